//! Exact few-photon Fock states on labelled optical modes, evolved by
//! creation-operator substitution under linear-optical transfer matrices.
//!
//! States are sparse maps from occupation vectors to complex amplitudes.
//! With at most four photons across a dozen modes the support stays tiny,
//! so no dense Fock tensor is ever built.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMat, max_singular_value};
use crate::scalar::{C, Real};

/// Ordered, unique mode labels. The ordering is the occupation-vector
/// layout and must stay fixed for the lifetime of a simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<String>,
}

impl ModeRegistry {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Configuration("mode registry cannot be empty".into()));
        }
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::Configuration("duplicate mode label".into()));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Configuration(format!("unknown mode label `{label}`")))
    }

    pub fn indices_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }
}

/// Occupation vector over the registry's modes.
pub type Occupation = Vec<u8>;

/// A transfer matrix acting on mode creation operators, with a loss flag.
///
/// Non-lossy elements must be unitary; lossy ones must have all singular
/// values at most one.
#[derive(Debug, Clone)]
pub struct CircuitElement<T: Real> {
    pub name: String,
    pub transfer: CMat<T>,
    pub lossy: bool,
}

impl<T: Real> CircuitElement<T> {
    /// Validate and wrap a unitary transfer matrix.
    pub fn unitary(name: impl Into<String>, transfer: CMat<T>) -> Result<Self> {
        let name = name.into();
        let defect = transfer.unitarity_defect();
        if defect > T::tol_unitary() {
            return Err(Error::Validation(format!(
                "element `{name}` is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self {
            name,
            transfer,
            lossy: false,
        })
    }

    /// Validate and wrap a sub-unitary (lossy) transfer matrix.
    pub fn lossy(name: impl Into<String>, transfer: CMat<T>) -> Result<Self> {
        let name = name.into();
        let sigma = max_singular_value(&transfer);
        if sigma > T::one() + T::tol_unitary() {
            return Err(Error::Validation(format!(
                "lossy element `{name}` amplifies (σ_max {sigma:e})"
            )));
        }
        Ok(Self {
            name,
            transfer,
            lossy: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.transfer.rows()
    }
}

/// Per-mode post-selection constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeConstraint {
    Exactly(u8),
    AtLeast(u8),
    Unconstrained,
}

/// Per-mode detection pattern; at least one mode must be constrained.
#[derive(Debug, Clone)]
pub struct PostSelectionPattern {
    constraints: Vec<(String, ModeConstraint)>,
}

impl PostSelectionPattern {
    pub fn new(constraints: Vec<(String, ModeConstraint)>) -> Result<Self> {
        if constraints
            .iter()
            .all(|(_, c)| matches!(c, ModeConstraint::Unconstrained))
        {
            return Err(Error::Configuration(
                "post-selection pattern constrains no mode".into(),
            ));
        }
        Ok(Self { constraints })
    }

    /// Pattern requiring zero photons on each listed mode.
    pub fn vacuum_on(labels: &[&str]) -> Result<Self> {
        Self::new(
            labels
                .iter()
                .map(|l| (l.to_string(), ModeConstraint::Exactly(0)))
                .collect(),
        )
    }

    pub fn constraints(&self) -> &[(String, ModeConstraint)] {
        &self.constraints
    }

    fn matches(&self, occupation: &[u8], registry: &ModeRegistry) -> Result<bool> {
        for (label, constraint) in &self.constraints {
            let idx = registry.index_of(label)?;
            let n = occupation[idx];
            let ok = match constraint {
                ModeConstraint::Exactly(k) => n == *k,
                ModeConstraint::AtLeast(k) => n >= *k,
                ModeConstraint::Unconstrained => true,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for PostSelectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .constraints
            .iter()
            .map(|(l, c)| match c {
                ModeConstraint::Exactly(k) => format!("{l}={k}"),
                ModeConstraint::AtLeast(k) => format!("{l}>={k}"),
                ModeConstraint::Unconstrained => format!("{l}=*"),
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Pure photonic state: complex amplitudes over occupation vectors.
#[derive(Debug, Clone)]
pub struct PhotonicState<T: Real> {
    modes: ModeRegistry,
    amplitudes: BTreeMap<Occupation, C<T>>,
}

impl<T: Real> PhotonicState<T> {
    /// Vacuum state.
    pub fn vacuum(modes: ModeRegistry) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vec![0u8; modes.len()], Complex::new(T::one(), T::zero()));
        Self { modes, amplitudes }
    }

    /// Build from explicit terms; amplitudes are used as given (call
    /// [`Self::normalized`] afterwards if needed).
    pub fn from_terms(
        modes: ModeRegistry,
        terms: impl IntoIterator<Item = (Occupation, C<T>)>,
    ) -> Result<Self> {
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != modes.len() {
                return Err(Error::Configuration(format!(
                    "occupation vector length {} does not match registry size {}",
                    occ.len(),
                    modes.len()
                )));
            }
            let entry = amplitudes
                .entry(occ)
                .or_insert_with(|| Complex::new(T::zero(), T::zero()));
            *entry = *entry + amp;
        }
        Ok(Self { modes, amplitudes })
    }

    /// Single basis term |occupation⟩ with unit amplitude.
    pub fn basis(modes: ModeRegistry, occupation: Occupation) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        Self::from_terms(modes, [(occupation, one)])
    }

    pub fn modes(&self) -> &ModeRegistry {
        &self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &C<T>)> {
        self.amplitudes.iter()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> C<T> {
        self.amplitudes
            .get(occupation)
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn term_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::tol_norm()
    }

    /// ⟨self|other⟩
    pub fn inner_product(&self, other: &Self) -> Result<C<T>> {
        if self.modes != other.modes {
            return Err(Error::Configuration(
                "inner product across different registries".into(),
            ));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (occ, amp) in &self.amplitudes {
            acc = acc + amp.conj() * other.amplitude(occ);
        }
        Ok(acc)
    }

    /// Total photon number if every term agrees, else `None`.
    pub fn definite_photon_number(&self) -> Option<u32> {
        let mut totals = self
            .amplitudes
            .keys()
            .map(|occ| occ.iter().map(|&n| n as u32).sum::<u32>());
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    /// Drop amplitudes below the pruning threshold and renormalize.
    pub fn normalized(mut self) -> Self {
        self.amplitudes.retain(|_, a| a.norm() > T::prune_eps());
        let norm = self.norm_sqr().sqrt();
        if norm > T::zero() {
            let inv = Complex::new(T::one() / norm, T::zero());
            for amp in self.amplitudes.values_mut() {
                *amp = *amp * inv;
            }
        }
        self
    }

    /// Expected photon number on one labelled mode.
    pub fn mean_photons_at(&self, label: &str) -> Result<T> {
        let idx = self.modes.index_of(label)?;
        Ok(self
            .amplitudes
            .iter()
            .map(|(occ, amp)| T::of(occ[idx] as f64) * amp.norm_sqr())
            .sum())
    }

    /// Re-express this state on a larger registry, mapping each local label
    /// to a target label; all other target modes stay in vacuum.
    pub fn embed(&self, target: ModeRegistry, label_map: &[(&str, &str)]) -> Result<Self> {
        let mut index_map = Vec::with_capacity(self.modes.len());
        for label in self.modes.labels() {
            let mapped = label_map
                .iter()
                .find(|(from, _)| from == label)
                .map(|(_, to)| *to)
                .ok_or_else(|| {
                    Error::Configuration(format!("embed: no mapping for mode `{label}`"))
                })?;
            index_map.push(target.index_of(mapped)?);
        }
        let mut terms = Vec::with_capacity(self.amplitudes.len());
        for (occ, amp) in &self.amplitudes {
            let mut new_occ = vec![0u8; target.len()];
            for (local, &global) in index_map.iter().enumerate() {
                new_occ[global] = occ[local];
            }
            terms.push((new_occ, *amp));
        }
        Self::from_terms(target, terms)
    }
}

/// Multiply `coeff` by the amplitude contribution of pushing `count` photons
/// from one input mode through column `col` of the transfer matrix,
/// accumulating output occupations. Standard multinomial bookkeeping:
/// each input mode contributes (Σ_k T_{k,col} a_k†)^count / √(count!).
fn expand_column<T: Real>(
    transfer: &CMat<T>,
    col: usize,
    count: u8,
    partial: Vec<(Vec<u8>, C<T>)>,
) -> Vec<(Vec<u8>, C<T>)> {
    let mut current = partial;
    for _ in 0..count {
        let mut next: BTreeMap<Vec<u8>, C<T>> = BTreeMap::new();
        for (occ, coeff) in &current {
            for k in 0..transfer.rows() {
                let t = transfer[(k, col)];
                if t.norm_sqr() == T::zero() {
                    continue;
                }
                let mut occ2 = occ.clone();
                occ2[k] += 1;
                let entry = next
                    .entry(occ2)
                    .or_insert_with(|| Complex::new(T::zero(), T::zero()));
                *entry = *entry + coeff * t;
            }
        }
        current = next.into_iter().collect();
    }
    // 1/√(count!) from the input normalization.
    let mut inv_fact = T::one();
    for i in 1..=count {
        inv_fact = inv_fact / T::of(i as f64);
    }
    let scale = Complex::new(inv_fact.sqrt(), T::zero());
    current
        .into_iter()
        .map(|(occ, c)| (occ, c * scale))
        .collect()
}

fn sqrt_factorial<T: Real>(n: u8) -> T {
    let mut f = T::one();
    for i in 1..=n {
        f = f * T::of(i as f64);
    }
    f.sqrt()
}

/// Apply a non-lossy element to the listed modes:
/// a_j† → Σ_k T_{kj} a_k† on every basis term, then renormalize and prune.
///
/// Photon number is conserved and the norm is preserved to within
/// [`Real::tol_norm`] by unitarity.
pub fn apply_element<T: Real>(
    state: &PhotonicState<T>,
    element: &CircuitElement<T>,
    mode_subset: &[&str],
) -> Result<PhotonicState<T>> {
    if element.lossy {
        return Err(Error::Validation(format!(
            "element `{}` is lossy; fold its loss into the rate budget instead",
            element.name
        )));
    }
    let defect = element.transfer.unitarity_defect();
    if defect > T::tol_unitary() {
        return Err(Error::Validation(format!(
            "element `{}` failed the unitarity check (defect {defect:e})",
            element.name
        )));
    }
    if element.dim() != mode_subset.len() {
        return Err(Error::Configuration(format!(
            "element `{}` acts on {} modes but {} labels were given",
            element.name,
            element.dim(),
            mode_subset.len()
        )));
    }
    let subset = state.modes.indices_of(mode_subset)?;

    let zero = Complex::new(T::zero(), T::zero());
    let mut out: BTreeMap<Occupation, C<T>> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        // Photons on untouched modes ride along unchanged.
        let mut base = occ.clone();
        for &idx in &subset {
            base[idx] = 0;
        }
        // Expand the touched modes' creation operators within the subset.
        let mut partial = vec![(vec![0u8; subset.len()], Complex::new(T::one(), T::zero()))];
        for (col, &idx) in subset.iter().enumerate() {
            partial = expand_column(&element.transfer, col, occ[idx], partial);
        }
        for (local_occ, coeff) in partial {
            let mut full = base.clone();
            let mut weight = coeff * *amp;
            for (local, &global) in subset.iter().enumerate() {
                full[global] = local_occ[local];
                // √(n_out!) from converting the monomial back to a ket.
                weight = weight * Complex::new(sqrt_factorial::<T>(local_occ[local]), T::zero());
            }
            let entry = out.entry(full).or_insert(zero);
            *entry = *entry + weight;
        }
    }

    let result = PhotonicState {
        modes: state.modes.clone(),
        amplitudes: out,
    };
    Ok(result.normalized())
}

/// Keep only the terms matched by `pattern`; returns the renormalized state
/// and the selected probability mass.
pub fn post_select<T: Real>(
    state: &PhotonicState<T>,
    pattern: &PostSelectionPattern,
) -> Result<(PhotonicState<T>, T)> {
    let mut surviving = BTreeMap::new();
    let mut probability = T::zero();
    for (occ, amp) in state.terms() {
        if pattern.matches(occ, &state.modes)? {
            probability = probability + amp.norm_sqr();
            surviving.insert(occ.clone(), *amp);
        }
    }
    if surviving.is_empty() || probability <= T::zero() {
        return Err(Error::EmptyPostSelection {
            pattern: pattern.to_string(),
        });
    }
    let selected = PhotonicState {
        modes: state.modes.clone(),
        amplitudes: surviving,
    };
    Ok((selected.normalized(), probability.min(T::one())))
}

/// Project a post-selected dual-rail state onto the two-qubit computational
/// basis: one photon expected in each rail pair, logical 0 on the first rail.
///
/// Returns the 4×4 density matrix (basis |00⟩,|01⟩,|10⟩,|11⟩ with signal
/// qubit first). Errors if more than [`Real::tol_leakage`] probability sits
/// outside the declared rails.
pub fn reduce_to_two_qubits<T: Real>(
    state: &PhotonicState<T>,
    signal_rails: (&str, &str),
    idler_rails: (&str, &str),
) -> Result<CMat<T>> {
    let s0 = state.modes.index_of(signal_rails.0)?;
    let s1 = state.modes.index_of(signal_rails.1)?;
    let i0 = state.modes.index_of(idler_rails.0)?;
    let i1 = state.modes.index_of(idler_rails.1)?;

    let zero = Complex::new(T::zero(), T::zero());
    let mut psi = [zero; 4];
    let mut leakage = T::zero();
    for (occ, amp) in state.terms() {
        let qubits = basis_index(occ, [s0, s1, i0, i1]);
        match qubits {
            Some(idx) => psi[idx] = psi[idx] + *amp,
            None => leakage = leakage + amp.norm_sqr(),
        }
    }
    if leakage > T::tol_leakage() {
        return Err(Error::Contract(format!(
            "photon probability {leakage:e} outside the declared qubit rails"
        )));
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
    if norm <= T::zero() {
        return Err(Error::Contract("no amplitude on the qubit rails".into()));
    }
    let inv = Complex::new(T::one() / norm, T::zero());
    let psi: Vec<C<T>> = psi.iter().map(|a| a * inv).collect();
    Ok(CMat::outer(&psi, &psi))
}

/// Map an occupation vector to a two-qubit basis index if it is exactly one
/// photon per rail pair and vacuum elsewhere.
fn basis_index(occ: &[u8], rails: [usize; 4]) -> Option<usize> {
    let [s0, s1, i0, i1] = rails;
    for (idx, &n) in occ.iter().enumerate() {
        let on_rail = idx == s0 || idx == s1 || idx == i0 || idx == i1;
        if !on_rail && n != 0 {
            return None;
        }
    }
    let (ns0, ns1, ni0, ni1) = (occ[s0], occ[s1], occ[i0], occ[i1]);
    if ns0 + ns1 != 1 || ni0 + ni1 != 1 {
        return None;
    }
    let s = if ns1 == 1 { 1 } else { 0 };
    let i = if ni1 == 1 { 1 } else { 0 };
    Some(s * 2 + i)
}
