//! Six-basis single-qubit state tomography (linear inversion plus a
//! maximum-likelihood search), single-qubit process tomography, and the
//! fidelity metrics built on them.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, hermitian_eigen, project_psd, sqrt_psd};
use crate::optimize::nelder_mead;
use crate::qubit::{Basis, cardinal_state, pauli, pure_density};
use crate::rng::SplitMix64;
use crate::scalar::{C, Real};

/// Validated 2×2 density matrix: Hermitian, unit trace, PSD within the
/// scalar's eigenvalue floor.
#[derive(Debug, Clone)]
pub struct QubitDensityMatrix<T: Real> {
    matrix: CMat<T>,
}

impl<T: Real> QubitDensityMatrix<T> {
    pub fn new(matrix: CMat<T>) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Validation("density matrix must be 2×2".into()));
        }
        if !matrix.is_hermitian(T::tol_density()) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        if (matrix.trace().re - T::one()).abs() > T::tol_density() {
            return Err(Error::Validation(format!(
                "density matrix trace {} is not 1",
                matrix.trace().re
            )));
        }
        let eig = hermitian_eigen(&matrix);
        if eig.values[0] < T::psd_floor() {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {:e}",
                eig.values[0]
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &[C<T>; 2]) -> Self {
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        let inv = Complex::new(T::one() / norm, T::zero());
        let v = [psi[0] * inv, psi[1] * inv];
        Self {
            matrix: pure_density(&v),
        }
    }

    pub fn cardinal(basis: Basis) -> Self {
        Self::from_pure(&cardinal_state(basis))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMat::identity(2).scale(Complex::new(T::half(), T::zero())),
        }
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    /// (r_x, r_y, r_z) with r_i = Tr[ρ·σ_i]; |r| ≤ 1 for physical states.
    pub fn bloch_vector(&self) -> [T; 3] {
        bloch_of(&self.matrix)
    }

    /// Born probabilities of a port-1 click for each of the six projectors.
    pub fn six_basis_probabilities(&self) -> BTreeMap<Basis, T> {
        Basis::ALL
            .iter()
            .map(|&b| {
                let psi = cardinal_state::<T>(b);
                (b, self.matrix.quadratic_form(&psi).re)
            })
            .collect()
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            dims: [2, 2],
            data: self.matrix.to_pairs(),
            basis: None,
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        Self::new(CMat::from_pairs(json.dims[0], json.dims[1], &json.data)?)
    }
}

fn bloch_of<T: Real>(rho: &CMat<T>) -> [T; 3] {
    [
        rho.mul(&pauli(1)).trace().re,
        rho.mul(&pauli(2)).trace().re,
        rho.mul(&pauli(3)).trace().re,
    ]
}

/// Row-major complex matrix as `[re, im]` pairs plus optional operator
/// basis labels, the on-disk form of every matrix this crate emits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: [usize; 2],
    pub data: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

/// Per-basis (count, total) pairs for the six measurement bases.
#[derive(Debug, Clone)]
pub struct TomographyCounts<T: Real> {
    entries: BTreeMap<Basis, (T, T)>,
}

impl<T: Real> TomographyCounts<T> {
    pub fn new(entries: BTreeMap<Basis, (T, T)>) -> Result<Self> {
        for (basis, (count, total)) in &entries {
            if *count < T::zero() || *total < T::zero() || count > total {
                return Err(Error::Input(format!(
                    "basis {basis}: count {count} / total {total} is inconsistent"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Exact Born-rule "counts": count = p·total for every basis.
    pub fn from_state_exact(rho: &QubitDensityMatrix<T>, total: T) -> Self {
        let entries = rho
            .six_basis_probabilities()
            .into_iter()
            .map(|(b, p)| (b, (p * total, total)))
            .collect();
        Self { entries }
    }

    /// Binomially sampled counts with `shots` per basis.
    pub fn sample(rho: &QubitDensityMatrix<T>, shots: u64, rng: &mut SplitMix64) -> Self {
        let entries = rho
            .six_basis_probabilities()
            .into_iter()
            .map(|(b, p)| {
                let k = rng.sample_binomial(shots, p.clamp(T::zero(), T::one()));
                (b, (T::of(k as f64), T::of(shots as f64)))
            })
            .collect();
        Self { entries }
    }

    pub fn get(&self, basis: Basis) -> Option<(T, T)> {
        self.entries.get(&basis).copied()
    }

    fn probability(&self, basis: Basis) -> Result<T> {
        let (count, total) = self
            .entries
            .get(&basis)
            .copied()
            .ok_or_else(|| Error::Input(format!("missing tomography basis {basis}")))?;
        if total <= T::zero() {
            return Err(Error::Input(format!("basis {basis} has zero total")));
        }
        Ok(count / total)
    }
}

/// Linear-inversion estimate: ρ = ½(I + r·σ). May stick out of the Bloch
/// ball, in which case `physical` is false.
#[derive(Debug, Clone)]
pub struct LinearInversionEstimate<T: Real> {
    pub matrix: CMat<T>,
    pub bloch: [T; 3],
    pub physical: bool,
}

/// Bloch-vector inversion from the six relative frequencies.
pub fn linear_inversion<T: Real>(
    counts: &TomographyCounts<T>,
) -> Result<LinearInversionEstimate<T>> {
    let r = [
        counts.probability(Basis::Plus)? - counts.probability(Basis::Minus)?,
        counts.probability(Basis::PlusI)? - counts.probability(Basis::MinusI)?,
        counts.probability(Basis::Zero)? - counts.probability(Basis::One)?,
    ];
    let mut matrix = CMat::identity(2);
    for (k, rk) in r.iter().enumerate() {
        matrix = matrix.add(&pauli(k + 1).scale(Complex::new(*rk, T::zero())));
    }
    let matrix = matrix.scale(Complex::new(T::half(), T::zero()));
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    Ok(LinearInversionEstimate {
        matrix,
        bloch: r,
        physical: len <= T::one() + T::tol_density(),
    })
}

/// ρ(θ) = T†T / Tr(T†T) with lower-triangular T parameterized by
/// (t₀₀, Re t₁₀, Im t₁₀, t₁₁).
fn rho_of_params<T: Real>(p: &[T]) -> CMat<T> {
    let t00 = Complex::new(p[0], T::zero());
    let t10 = Complex::new(p[1], p[2]);
    let t11 = Complex::new(p[3], T::zero());
    let z = Complex::new(T::zero(), T::zero());
    let t = CMat::from_rows(&[vec![t00, z], vec![t10, t11]]);
    let rho = t.adjoint().mul(&t);
    let tr = rho.trace().re.max(T::of(1e-300));
    rho.scale(Complex::new(T::one() / tr, T::zero()))
}

/// Lower-triangular factor parameters of a (slightly jittered) density
/// matrix, inverting [`rho_of_params`].
fn params_of_rho<T: Real>(rho: &CMat<T>) -> [T; 4] {
    // Mix in a sliver of the maximally mixed state so the factorization
    // stays defined on rank-1 inputs.
    let eps = T::of(1e-12);
    let mixed = rho
        .scale(Complex::new(T::one() - eps, T::zero()))
        .add(&CMat::identity(2).scale(Complex::new(eps * T::half(), T::zero())));
    let r11 = mixed[(1, 1)].re.max(T::of(1e-300));
    let t11 = r11.sqrt();
    let t10 = mixed[(1, 0)] / Complex::new(t11, T::zero());
    let t00 = (mixed[(0, 0)].re - t10.norm_sqr()).max(T::zero()).sqrt();
    [t00, t10.re, t10.im, t11]
}

fn log_likelihood<T: Real>(counts: &TomographyCounts<T>, rho: &CMat<T>) -> T {
    let tiny = T::of(1e-15);
    let mut ll = T::zero();
    for &basis in &Basis::ALL {
        let Some((count, total)) = counts.entries.get(&basis).copied() else {
            continue;
        };
        let psi = cardinal_state::<T>(basis);
        let p = rho
            .quadratic_form(&psi)
            .re
            .clamp(tiny, T::one() - tiny);
        ll = ll + count * p.ln() + (total - count) * (T::one() - p).ln();
    }
    ll
}

/// Maximum-likelihood reconstruction over the physical (PSD, trace-one)
/// family, with a binomial likelihood per basis. The search starts at the
/// PSD-projected linear-inversion estimate and stops when the
/// log-likelihood improves by less than 1e-10 or after 10⁵ evaluations.
pub fn mle_reconstruct<T: Real>(counts: &TomographyCounts<T>) -> Result<QubitDensityMatrix<T>> {
    for &basis in &Basis::ALL {
        counts.probability(basis)?;
    }
    let li = linear_inversion(counts)?;
    let projected = project_psd(&li.matrix, Some(T::one())).matrix;
    let start = params_of_rho(&projected);
    let start_ll = log_likelihood(counts, &rho_of_params(&start));

    let result = nelder_mead(
        |p| -log_likelihood(counts, &rho_of_params(p)),
        &start,
        T::of(0.05),
        T::of(1e-10),
        100_000,
    );
    let rho = rho_of_params(&result.params);

    // The search is monotone from the projected start, so this only trips
    // if something upstream produced a non-finite likelihood.
    if -result.objective + T::of(1e-6) < start_ll {
        return Err(Error::NonConvergence {
            evaluations: result.evaluations,
            diagnostics: format!(
                "likelihood regressed from {start_ll:?}; best-so-far rho {:?}",
                rho.to_pairs()
            ),
        });
    }
    if !result.converged {
        return Err(Error::NonConvergence {
            evaluations: result.evaluations,
            diagnostics: format!("best-so-far rho {:?}", rho.to_pairs()),
        });
    }
    // Clean residual asymmetry from the parameterization before validating.
    let symmetrized = project_psd(&rho, Some(T::one())).matrix;
    QubitDensityMatrix::new(symmetrized)
}

/// Uhlmann fidelity F = (Tr √(√ρ₁ ρ₂ √ρ₁))².
pub fn state_fidelity<T: Real>(a: &QubitDensityMatrix<T>, b: &QubitDensityMatrix<T>) -> T {
    let root_a = sqrt_psd(a.matrix());
    let inner = root_a.mul(b.matrix()).mul(&root_a);
    let eig = hermitian_eigen(&inner);
    let tr: T = eig
        .values
        .iter()
        .map(|l| l.max(T::zero()).sqrt())
        .sum();
    (tr * tr).clamp(T::zero(), T::one())
}

/// Bloch vector of a density matrix.
pub fn bloch_vector<T: Real>(rho: &QubitDensityMatrix<T>) -> [T; 3] {
    rho.bloch_vector()
}

/// Validated process matrix χ in the (I, X, Y, Z) operator basis.
#[derive(Debug, Clone)]
pub struct ProcessMatrix<T: Real> {
    matrix: CMat<T>,
}

impl<T: Real> ProcessMatrix<T> {
    pub fn new(matrix: CMat<T>) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::Validation("process matrix must be 4×4".into()));
        }
        if !matrix.is_hermitian(T::tol_density()) {
            return Err(Error::Validation("process matrix is not Hermitian".into()));
        }
        let eig = hermitian_eigen(&matrix);
        if eig.values[0] < T::psd_floor() {
            return Err(Error::Validation(format!(
                "process matrix has negative eigenvalue {:e}",
                eig.values[0]
            )));
        }
        let defect = trace_preservation_defect(&matrix);
        if defect > T::tol_trace_preserving() {
            return Err(Error::Validation(format!(
                "process matrix is not trace preserving (defect {defect:e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// χ of the identity channel: χ[I,I] = 1.
    pub fn identity() -> Self {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = Complex::new(T::one(), T::zero());
        Self { matrix: m }
    }

    /// Rank-one χ of a unitary channel from its Pauli decomposition
    /// U = Σ_m c_m E_m: χ_mn = c_m · c̄_n.
    pub fn of_unitary(u: &CMat<T>) -> Result<Self> {
        if u.unitarity_defect() > T::tol_unitary() {
            return Err(Error::Validation(
                "process matrix of a non-unitary map".into(),
            ));
        }
        let half = Complex::new(T::half(), T::zero());
        let coeffs: Vec<C<T>> = (0..4).map(|m| pauli(m).mul(u).trace() * half).collect();
        let mut matrix = CMat::zeros(4, 4);
        for m in 0..4 {
            for n in 0..4 {
                matrix[(m, n)] = coeffs[m] * coeffs[n].conj();
            }
        }
        Self::new(matrix)
    }

    /// Fully depolarizing mixture with probability `p` spread over X, Y, Z.
    pub fn depolarizing(p: T) -> Self {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = Complex::new(T::one() - p * T::of(0.75), T::zero());
        for k in 1..4 {
            m[(k, k)] = Complex::new(p * T::of(0.25), T::zero());
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    /// ρ ↦ Σ_mn χ_mn E_m ρ E_n†.
    pub fn apply(&self, rho: &CMat<T>) -> CMat<T> {
        apply_chi(&self.matrix, rho)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            dims: [4, 4],
            data: self.matrix.to_pairs(),
            basis: Some(vec!["I".into(), "X".into(), "Y".into(), "Z".into()]),
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        Self::new(CMat::from_pairs(json.dims[0], json.dims[1], &json.data)?)
    }
}

fn apply_chi<T: Real>(chi: &CMat<T>, rho: &CMat<T>) -> CMat<T> {
    let mut out = CMat::zeros(2, 2);
    for m in 0..4 {
        for n in 0..4 {
            let w = chi[(m, n)];
            if w.norm_sqr() == T::zero() {
                continue;
            }
            out = out.add(&pauli(m).mul(rho).mul(&pauli(n).adjoint()).scale(w));
        }
    }
    out
}

/// ‖Σ_mn χ_mn E_n†E_m − I‖_max.
fn trace_preservation_defect<T: Real>(chi: &CMat<T>) -> T {
    let mut sum = CMat::zeros(2, 2);
    for m in 0..4 {
        for n in 0..4 {
            let w = chi[(m, n)];
            if w.norm_sqr() == T::zero() {
                continue;
            }
            sum = sum.add(&pauli(n).adjoint().mul(&pauli(m)).scale(w));
        }
    }
    sum.max_abs_diff(&CMat::identity(2))
}

/// Outcome of reconstructing χ from the four canonical input/output pairs.
#[derive(Debug, Clone)]
pub struct ProcessTomographyResult<T: Real> {
    /// Hermitized, PSD-projected χ with unit trace.
    pub chi: CMat<T>,
    /// Trace-norm distance moved by the PSD projection.
    pub projection_distance: T,
    /// Set when the projection moved the estimate by more than 0.05.
    pub warning: bool,
}

impl<T: Real> ProcessTomographyResult<T> {
    pub fn validated(&self) -> Result<ProcessMatrix<T>> {
        ProcessMatrix::new(self.chi.clone())
    }
}

/// Single-qubit process tomography from the outputs for inputs
/// {|0⟩, |1⟩, |+⟩, |+i⟩}: assemble the block matrix Ω from
///   ρ'₁ = E(|0⟩⟨0|), ρ'₄ = E(|1⟩⟨1|),
///   ρ'₂ = E(|+⟩) + i·E(|+i⟩) − (1+i)(ρ'₁+ρ'₄)/2,  ρ'₃ = ρ'₂ conjugate
/// and sandwich χ = ΛΩΛ with Λ = ½[[I, X],[X, −I]].
pub fn process_tomography<T: Real>(
    out_zero: &QubitDensityMatrix<T>,
    out_one: &QubitDensityMatrix<T>,
    out_plus: &QubitDensityMatrix<T>,
    out_plus_i: &QubitDensityMatrix<T>,
) -> ProcessTomographyResult<T> {
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let half = Complex::new(T::half(), T::zero());

    let rho1 = out_zero.matrix().clone();
    let rho4 = out_one.matrix().clone();
    let sum14 = rho1.add(&rho4);
    // E(|0⟩⟨1|) and E(|1⟩⟨0|) by linearity over the tomographic inputs.
    let rho2 = out_plus
        .matrix()
        .add(&out_plus_i.matrix().scale(i))
        .sub(&sum14.scale((one + i) * half));
    let rho3 = out_plus
        .matrix()
        .sub(&out_plus_i.matrix().scale(i))
        .sub(&sum14.scale((one - i) * half));

    let mut omega = CMat::zeros(4, 4);
    for r in 0..2 {
        for c_idx in 0..2 {
            omega[(r, c_idx)] = rho1[(r, c_idx)];
            omega[(r, 2 + c_idx)] = rho2[(r, c_idx)];
            omega[(2 + r, c_idx)] = rho3[(r, c_idx)];
            omega[(2 + r, 2 + c_idx)] = rho4[(r, c_idx)];
        }
    }

    let x = pauli::<T>(1);
    let ident: CMat<T> = CMat::identity(2);
    let mut lambda = CMat::zeros(4, 4);
    for r in 0..2 {
        for c_idx in 0..2 {
            lambda[(r, c_idx)] = ident[(r, c_idx)] * half;
            lambda[(r, 2 + c_idx)] = x[(r, c_idx)] * half;
            lambda[(2 + r, c_idx)] = x[(r, c_idx)] * half;
            lambda[(2 + r, 2 + c_idx)] = -ident[(r, c_idx)] * half;
        }
    }

    // The Λ sandwich produces χ in the real-matrix basis (I, X, −iY, Z);
    // congruence by diag(1, 1, −i, 1) moves it onto (I, X, Y, Z).
    let tilde = lambda.mul(&omega).mul(&lambda);
    let mut phase_fix: CMat<T> = CMat::identity(4);
    phase_fix[(2, 2)] = Complex::new(T::zero(), -T::one());
    let raw = phase_fix.mul(&tilde).mul(&phase_fix.adjoint());
    let hermitized = raw.add(&raw.adjoint()).scale(half);
    let trace = hermitized.trace().re;
    let projection = project_psd(&hermitized, Some(trace.max(T::of(1e-12))));
    let warning = projection.distance > T::of(0.05);
    ProcessTomographyResult {
        chi: projection.matrix,
        projection_distance: projection.distance,
        warning,
    }
}

/// F_process = Tr[χ_ideal · χ]; real to numerical precision for Hermitian
/// inputs and within [0, 1] for physical ones.
pub fn process_fidelity<T: Real>(chi: &CMat<T>, chi_ideal: &CMat<T>) -> T {
    chi_ideal.mul(chi).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::euler_unitary;

    fn exact_counts(rho: &QubitDensityMatrix<f64>) -> TomographyCounts<f64> {
        TomographyCounts::from_state_exact(rho, 1.0)
    }

    #[test]
    fn linear_inversion_of_plus_state() {
        let li = linear_inversion(&exact_counts(&QubitDensityMatrix::cardinal(Basis::Plus)))
            .unwrap();
        assert!((li.bloch[0] - 1.0).abs() < 1e-12);
        assert!(li.bloch[1].abs() < 1e-12);
        assert!(li.bloch[2].abs() < 1e-12);
        assert!(li.physical);
    }

    #[test]
    fn linear_inversion_of_maximally_mixed() {
        let li = linear_inversion(&exact_counts(&QubitDensityMatrix::maximally_mixed())).unwrap();
        for r in li.bloch {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn linear_inversion_flags_unphysical_counts() {
        let mut entries = BTreeMap::new();
        // Every "plus-side" outcome certain: r = (1, 1, 1), |r| = √3 > 1.
        for b in [Basis::Zero, Basis::Plus, Basis::PlusI] {
            entries.insert(b, (1.0, 1.0));
        }
        for b in [Basis::One, Basis::Minus, Basis::MinusI] {
            entries.insert(b, (0.0, 1.0));
        }
        let li = linear_inversion(&TomographyCounts::new(entries).unwrap()).unwrap();
        assert!(!li.physical);
    }

    #[test]
    fn linear_inversion_requires_all_bases() {
        let mut entries = BTreeMap::new();
        entries.insert(Basis::Zero, (1.0, 1.0));
        let err = linear_inversion(&TomographyCounts::new(entries).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn mle_recovers_pure_states_from_exact_probabilities() {
        for basis in Basis::ALL {
            let truth = QubitDensityMatrix::cardinal(basis);
            let rho = mle_reconstruct(&exact_counts(&truth)).unwrap();
            let f = state_fidelity(&rho, &truth);
            assert!(f >= 1.0 - 1e-8, "{basis}: fidelity {f}");
        }
    }

    #[test]
    fn mle_output_is_physical_on_noisy_counts() {
        let mut entries = BTreeMap::new();
        // Deliberately over-polarized frequencies (|r| > 1).
        let table: [(Basis, f64); 6] = [
            (Basis::Zero, 98.0),
            (Basis::One, 2.0),
            (Basis::Plus, 95.0),
            (Basis::Minus, 5.0),
            (Basis::PlusI, 55.0),
            (Basis::MinusI, 45.0),
        ];
        for (b, k) in table {
            entries.insert(b, (k, 100.0));
        }
        let counts = TomographyCounts::new(entries).unwrap();
        assert!(!linear_inversion(&counts).unwrap().physical);
        let rho = mle_reconstruct(&counts).unwrap();
        let r = rho.bloch_vector();
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        assert!(len <= 1.0 + 1e-9, "Bloch length {len}");
    }

    #[test]
    fn state_fidelity_basics() {
        let zero = QubitDensityMatrix::<f64>::cardinal(Basis::Zero);
        let plus = QubitDensityMatrix::<f64>::cardinal(Basis::Plus);
        assert!((state_fidelity(&zero, &zero) - 1.0).abs() < 1e-12);
        assert!((state_fidelity(&zero, &plus) - 0.5).abs() < 1e-12);
        // Symmetry.
        assert!((state_fidelity(&plus, &zero) - state_fidelity(&zero, &plus)).abs() < 1e-10);
    }

    #[test]
    fn state_fidelity_pure_vs_mixture_closed_form() {
        // F(|+⟩, 0.99|+⟩⟨+| + 0.01·I/2) = 0.99 + 0.01/2 = 0.995.
        let plus = QubitDensityMatrix::<f64>::cardinal(Basis::Plus);
        let mixed = QubitDensityMatrix::new(crate::qubit::werner_mix(plus.matrix(), 0.99))
            .unwrap();
        assert!((state_fidelity(&plus, &mixed) - 0.995).abs() < 1e-12);
    }

    #[test]
    fn bloch_vector_of_cardinal_states() {
        assert_eq!(
            QubitDensityMatrix::<f64>::cardinal(Basis::Zero).bloch_vector()[2],
            1.0
        );
        let mixed = QubitDensityMatrix::<f64>::maximally_mixed();
        for r in mixed.bloch_vector() {
            assert!(r.abs() < 1e-12);
        }
        // Dephased |+⟩ with visibility v keeps r = (v, 0, 0).
        let v = 0.9763;
        let dephased = QubitDensityMatrix::new(crate::qubit::werner_mix(
            QubitDensityMatrix::<f64>::cardinal(Basis::Plus).matrix(),
            v,
        ))
        .unwrap();
        let r = dephased.bloch_vector();
        assert!((r[0] - v).abs() < 1e-12 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
    }

    #[test]
    fn identity_process_reconstructs_exactly() {
        let outs: Vec<QubitDensityMatrix<f64>> =
            [Basis::Zero, Basis::One, Basis::Plus, Basis::PlusI]
                .iter()
                .map(|&b| QubitDensityMatrix::cardinal(b))
                .collect();
        let result = process_tomography(&outs[0], &outs[1], &outs[2], &outs[3]);
        assert!((result.chi[(0, 0)].re - 1.0).abs() < 1e-10);
        for m in 0..4 {
            for n in 0..4 {
                if (m, n) != (0, 0) {
                    assert!(result.chi[(m, n)].norm() < 1e-10, "chi[{m}][{n}]");
                }
            }
        }
        assert!(!result.warning);
        let ident = ProcessMatrix::identity();
        assert!((process_fidelity(&result.chi, ident.matrix()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn x_flip_process_lands_on_chi_xx() {
        let x = pauli::<f64>(1);
        let flip = |b: Basis| {
            let rho = QubitDensityMatrix::cardinal(b);
            QubitDensityMatrix::new(x.mul(rho.matrix()).mul(&x.adjoint())).unwrap()
        };
        let result = process_tomography(
            &flip(Basis::Zero),
            &flip(Basis::One),
            &flip(Basis::Plus),
            &flip(Basis::PlusI),
        );
        assert!((result.chi[(1, 1)].re - 1.0).abs() < 1e-10);
        assert!(result.chi[(0, 0)].norm() < 1e-10);
    }

    #[test]
    fn chi_of_unitary_is_rank_one_and_consistent() {
        let u = euler_unitary(0.4_f64, 0.8, -1.1);
        let chi = ProcessMatrix::of_unitary(&u).unwrap();
        let eig = hermitian_eigen(chi.matrix());
        assert!((eig.values[3] - 1.0).abs() < 1e-10);
        assert!(eig.values[2].abs() < 1e-10);
        // Channel action matches conjugation by U.
        let rho_in = QubitDensityMatrix::cardinal(Basis::PlusI);
        let direct = u.mul(rho_in.matrix()).mul(&u.adjoint());
        assert!(chi.apply(rho_in.matrix()).max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn tomography_recipe_matches_pauli_decomposition_for_y_rotation() {
        // A Y-heavy rotation exposes the operator-basis phase convention:
        // both routes must land on the same χ in the (I, X, Y, Z) basis.
        let u = euler_unitary(0.0_f64, 2.3, 0.0);
        let conj = |b: Basis| {
            QubitDensityMatrix::new(
                u.mul(QubitDensityMatrix::<f64>::cardinal(b).matrix())
                    .mul(&u.adjoint()),
            )
            .unwrap()
        };
        let recipe = process_tomography(
            &conj(Basis::Zero),
            &conj(Basis::One),
            &conj(Basis::Plus),
            &conj(Basis::PlusI),
        );
        let direct = ProcessMatrix::of_unitary(&u).unwrap();
        assert!(recipe.chi.max_abs_diff(direct.matrix()) < 1e-10);
    }

    #[test]
    fn process_fidelity_of_depolarizing_channel() {
        let ident = ProcessMatrix::<f64>::identity();
        let depol = ProcessMatrix::<f64>::depolarizing(1.0);
        assert!((process_fidelity(depol.matrix(), ident.matrix()) - 0.25).abs() < 1e-12);
        assert!((process_fidelity(ident.matrix(), ident.matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_json_round_trip() {
        let rho = QubitDensityMatrix::<f64>::cardinal(Basis::PlusI);
        let json = serde_json::to_string(&rho.to_json()).unwrap();
        let back: MatrixJson = serde_json::from_str(&json).unwrap();
        let restored = QubitDensityMatrix::from_json(&back).unwrap();
        assert!((state_fidelity(&rho, &restored) - 1.0).abs() < 1e-10);
    }
}
