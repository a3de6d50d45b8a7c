//! Catalogue of the interconnect's physical components as circuit elements,
//! and assembly of the chip-A → fibre → chip-B pipeline.
//!
//! Conventions (fixed across the crate):
//! * every MMI is (1/√2)[[1, i],[i, 1]]; an imbalanced splitter replaces
//!   1/√2 by (√r, √(1−r));
//! * a source rail enters its demultiplexing MMI on the second port, so the
//!   straight-through output keeps the source's registry mode;
//! * analyzer phase shifters sit on the first rail of their pair, ordered
//!   [θ_Z, MMI, θ_Y, MMI]; at θ_Z = 0, θ_Y = π/2 the composite equals
//!   i·e^{iπ/4}·H (Hadamard up to that fixed global phase);
//! * detecting analyzer output port 1 realizes the projector
//!   cos(θ_Y/2)|0⟩ − sin(θ_Y/2)·e^{iθ_Z}|1⟩.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{CircuitElement, ModeRegistry, PhotonicState, PostSelectionPattern};
use crate::linalg::CMat;
use crate::qubit::axis_rotation;
use crate::rng::SplitMix64;
use crate::scalar::{C, Real, c, phase};

/// Photon-pair source pair: pump phase θ_SS and a phenomenological pair
/// amplitude in (0, 1] that scales generation rates (never the state).
#[derive(Debug, Clone, Copy)]
pub struct SourceSettings<T: Real> {
    pub theta_ss: T,
    pub pair_amplitude: T,
}

impl<T: Real> SourceSettings<T> {
    pub fn new(theta_ss: T, pair_amplitude: T) -> Result<Self> {
        if !theta_ss.is_finite() {
            return Err(Error::Validation("θ_SS must be finite".into()));
        }
        if pair_amplitude <= T::zero() || pair_amplitude > T::one() {
            return Err(Error::Validation(
                "pair amplitude must lie in (0, 1]".into(),
            ));
        }
        Ok(Self {
            theta_ss,
            pair_amplitude,
        })
    }

    pub fn ideal(theta_ss: T) -> Self {
        Self {
            theta_ss,
            pair_amplitude: T::one(),
        }
    }
}

/// Which chip an analyzer sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzerSide {
    A,
    B,
}

/// Projective measurement stage settings (θ_Z, θ_Y), in radians.
#[derive(Debug, Clone, Copy)]
pub struct AnalyzerSettings<T: Real> {
    pub theta_z: T,
    pub theta_y: T,
    pub which: AnalyzerSide,
}

impl<T: Real> AnalyzerSettings<T> {
    pub fn new(theta_z: T, theta_y: T, which: AnalyzerSide) -> Result<Self> {
        if !theta_z.is_finite() || !theta_y.is_finite() {
            return Err(Error::Validation("analyzer angles must be finite".into()));
        }
        Ok(Self {
            theta_z,
            theta_y,
            which,
        })
    }
}

/// Path/polarisation converter model: crosstalk extinction and insertion
/// loss, both in dB. `extinction_db = ∞` is the ideal converter.
#[derive(Debug, Clone, Copy)]
pub struct PPCModel<T: Real> {
    pub extinction_db: T,
    pub insertion_loss_db: T,
}

impl<T: Real> PPCModel<T> {
    pub fn new(extinction_db: T, insertion_loss_db: T) -> Result<Self> {
        if extinction_db < T::zero() || insertion_loss_db < T::zero() {
            return Err(Error::Validation(
                "extinction and insertion loss must be ≥ 0 dB".into(),
            ));
        }
        Ok(Self {
            extinction_db,
            insertion_loss_db,
        })
    }

    pub fn ideal() -> Self {
        Self {
            extinction_db: T::infinity(),
            insertion_loss_db: T::zero(),
        }
    }

    /// Crosstalk field amplitude ε = 10^(−extinction/20).
    pub fn crosstalk_amplitude(&self) -> T {
        if self.extinction_db.is_infinite() {
            T::zero()
        } else {
            T::of(10.0).powf(-self.extinction_db / T::of(20.0))
        }
    }

    /// Field transmission κ = 10^(−insertion_loss/20).
    pub fn insertion_amplitude(&self) -> T {
        T::of(10.0).powf(-self.insertion_loss_db / T::of(20.0))
    }
}

/// Fibre link: a polarisation rotation, compensated up to a residual
/// rotation of the given angle about a seed-derived random axis.
#[derive(Debug, Clone)]
pub struct FibreChannel<T: Real> {
    pub rotation: CMat<T>,
    pub compensation_residual: T,
    pub axis_seed: u64,
}

impl<T: Real> FibreChannel<T> {
    pub fn new(rotation: CMat<T>, compensation_residual: T, axis_seed: u64) -> Result<Self> {
        if rotation.rows() != 2 || rotation.cols() != 2 {
            return Err(Error::Configuration("fibre rotation must be 2×2".into()));
        }
        let defect = rotation.unitarity_defect();
        if defect > T::tol_unitary() {
            return Err(Error::Validation(format!(
                "fibre rotation is not unitary (defect {defect:e})"
            )));
        }
        if compensation_residual < T::zero() {
            return Err(Error::Validation(
                "compensation residual must be ≥ 0 rad".into(),
            ));
        }
        Ok(Self {
            rotation,
            compensation_residual,
            axis_seed,
        })
    }

    pub fn ideal() -> Self {
        Self {
            rotation: CMat::identity(2),
            compensation_residual: T::zero(),
            axis_seed: 0,
        }
    }

    /// Residual rotation left after compensation.
    pub fn residual_rotation(&self) -> CMat<T> {
        if self.compensation_residual == T::zero() {
            return CMat::identity(2);
        }
        let axis = SplitMix64::new(self.axis_seed).unit_axis();
        axis_rotation(axis, self.compensation_residual)
    }
}

/// Pump/signal/idler wavelengths in nm; SFWM energy conservation requires
/// the signal and idler to sit symmetrically about the pump.
#[derive(Debug, Clone, Copy)]
pub struct WavelengthPlan<T: Real> {
    pub lambda_p_nm: T,
    pub lambda_s_nm: T,
    pub lambda_i_nm: T,
}

impl<T: Real> WavelengthPlan<T> {
    pub fn new(lambda_p_nm: T, lambda_s_nm: T, lambda_i_nm: T) -> Result<Self> {
        let detune_s = lambda_p_nm - lambda_s_nm;
        let detune_i = lambda_i_nm - lambda_p_nm;
        if (detune_s - detune_i).abs() > T::of(0.2) {
            return Err(Error::Validation(format!(
                "wavelength plan violates energy conservation: {detune_s} nm vs {detune_i} nm"
            )));
        }
        Ok(Self {
            lambda_p_nm,
            lambda_s_nm,
            lambda_i_nm,
        })
    }

    /// The deployed plan: pump 1555.5 nm, signal 1550.7 nm, idler 1560.3 nm.
    pub fn default_plan() -> Result<Self> {
        Self::new(T::of(1555.5), T::of(1550.7), T::of(1560.3))
    }
}

/// Imbalanced 50/50-style coupler: [[√r, i√(1−r)], [i√(1−r), √r]].
pub fn mmi<T: Real>(reflectivity: T) -> Result<CircuitElement<T>> {
    if reflectivity <= T::zero() || reflectivity >= T::one() {
        return Err(Error::Validation("MMI reflectivity must be in (0,1)".into()));
    }
    let r = reflectivity.sqrt();
    let t = (T::one() - reflectivity).sqrt();
    let z = T::zero();
    CircuitElement::unitary(
        "mmi",
        CMat::from_rows(&[
            vec![Complex::new(r, z), Complex::new(z, t)],
            vec![Complex::new(z, t), Complex::new(r, z)],
        ]),
    )
}

/// Balanced MMI beam splitter.
pub fn mmi50<T: Real>() -> CircuitElement<T> {
    mmi(T::half()).expect("balanced MMI is valid")
}

/// Single-mode thermal phase shifter e^{iθ}.
pub fn phase_shifter<T: Real>(theta: T) -> CircuitElement<T> {
    CircuitElement::unitary("phase", CMat::from_rows(&[vec![phase(theta)]]))
        .expect("phase shifter is unitary")
}

/// Lossless waveguide crossing: exact swap of two modes. Its insertion loss
/// belongs in the loss budget, not here.
pub fn crossing<T: Real>() -> CircuitElement<T> {
    CircuitElement::unitary(
        "crossing",
        CMat::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]),
    )
    .expect("swap is unitary")
}

/// Photon-number entangled two-source state
/// (|1_s 1_i⟩_t|0_s 0_i⟩_b − e^{2iθ_SS}|0_s 0_i⟩_t|1_s 1_i⟩_b)/√2
/// on modes [t.sig, t.idl, b.sig, b.idl].
pub fn sfwm_two_source_state<T: Real>(settings: &SourceSettings<T>) -> PhotonicState<T> {
    let registry = ModeRegistry::new(["t.sig", "t.idl", "b.sig", "b.idl"])
        .expect("source registry is valid");
    let h = Complex::new(T::half().sqrt(), T::zero());
    let bottom = -phase(T::two() * settings.theta_ss) * h;
    PhotonicState::from_terms(registry, [(vec![1, 1, 0, 0], h), (vec![0, 0, 1, 1], bottom)])
        .expect("source terms are well-formed")
}

/// The four-element analyzer chain [θ_Z, MMI, θ_Y, MMI]. One-mode elements
/// act on the pair's first rail, two-mode elements on both rails.
pub fn analyzer_elements<T: Real>(settings: &AnalyzerSettings<T>) -> Vec<CircuitElement<T>> {
    vec![
        phase_shifter(settings.theta_z),
        mmi50(),
        phase_shifter(settings.theta_y),
        mmi50(),
    ]
}

/// Composite 2×2 transfer of the analyzer chain.
pub fn analyzer_unitary<T: Real>(settings: &AnalyzerSettings<T>) -> CMat<T> {
    let m = mmi50::<T>().transfer;
    let p = |theta: T| {
        let mut d = CMat::identity(2);
        d[(0, 0)] = phase(theta);
        d
    };
    m.mul(&p(settings.theta_y)).mul(&m).mul(&p(settings.theta_z))
}

/// Projector realized by a click at `port` (0 or 1) behind the analyzer:
/// the conjugated row of the composite unitary, normalized with the global
/// phase dropped.
pub fn analyzer_projector<T: Real>(settings: &AnalyzerSettings<T>, port: usize) -> [C<T>; 2] {
    assert!(port < 2, "analyzer has two output ports");
    let u = analyzer_unitary(settings);
    let row = [u[(port, 0)].conj(), u[(port, 1)].conj()];
    let norm = (row[0].norm_sqr() + row[1].norm_sqr()).sqrt();
    let lead = if row[0].norm() > T::of(1e-8) { row[0] } else { row[1] };
    let gauge = (lead / Complex::new(lead.norm(), T::zero())).conj();
    let scale = gauge / Complex::new(norm, T::zero());
    [row[0] * scale, row[1] * scale]
}

/// Heater targets (θ_Z, θ_Y) that point analyzer port 1 at each cardinal
/// projector.
pub fn projector_settings<T: Real>(basis: crate::qubit::Basis) -> (T, T) {
    use crate::qubit::Basis::*;
    let pi = T::pi();
    let half_pi = pi * T::half();
    match basis {
        Zero => (T::zero(), T::zero()),
        One => (T::zero(), pi),
        Plus => (pi, half_pi),
        Minus => (T::zero(), half_pi),
        PlusI => (pi + half_pi, half_pi),
        MinusI => (half_pi, half_pi),
    }
}

/// Conversion direction through a 2D-grating-coupler PPC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpcDirection {
    PathToPol,
    PolToPath,
}

/// Unitary 2×2 crosstalk core of the PPC: an ε-rotation with the cross
/// term's phase fixed at π on the lower-left entry.
pub fn ppc_qubit_matrix<T: Real>(model: &PPCModel<T>) -> CMat<T> {
    let eps = model.crosstalk_amplitude();
    let keep = (T::one() - eps * eps).max(T::zero()).sqrt();
    let z = T::zero();
    CMat::from_rows(&[
        vec![Complex::new(keep, z), Complex::new(eps, z)],
        vec![Complex::new(-eps, z), Complex::new(keep, z)],
    ])
}

/// Four-mode PPC element on [in₀, in₁, out₀, out₁]: the ideal part is the
/// permutation moving each input rail to its output partner; finite
/// extinction mixes the rails through [`ppc_qubit_matrix`]. A non-zero
/// insertion loss scales the transfer below unity and sets the lossy flag.
pub fn ppc_element<T: Real>(
    model: &PPCModel<T>,
    direction: PpcDirection,
) -> Result<CircuitElement<T>> {
    let x = ppc_qubit_matrix(model);
    let kappa = model.insertion_amplitude();
    let mut transfer = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            transfer[(2 + i, j)] = x[(i, j)];
            transfer[(i, 2 + j)] = x[(j, i)].conj();
        }
    }
    let name = match direction {
        PpcDirection::PathToPol => "ppc.path_to_pol",
        PpcDirection::PolToPath => "ppc.pol_to_path",
    };
    if kappa < T::one() {
        CircuitElement::lossy(name, transfer.scale(Complex::new(kappa, T::zero())))
    } else {
        CircuitElement::unitary(name, transfer)
    }
}

/// Registry labels for the full chip-fibre-chip mode layout.
pub mod modes {
    /// Signal-wavelength rails at chip-A's analyzer (logical 0, 1).
    pub const TT_SIG: &str = "a.tt.sig";
    pub const TB_SIG: &str = "a.tb.sig";
    /// Idler-wavelength leftovers co-propagating through analyzer A.
    pub const TT_IDL: &str = "a.tt.idl";
    pub const TB_IDL: &str = "a.tb.idl";
    /// Signal-wavelength leftovers on the idler rail pair.
    pub const BT_SIG: &str = "a.bt.sig";
    pub const BB_SIG: &str = "a.bb.sig";
    /// Idler-wavelength rails feeding the PPC (logical 0, 1).
    pub const BT_IDL: &str = "a.bt.idl";
    pub const BB_IDL: &str = "a.bb.idl";
    /// Fibre polarisation modes.
    pub const FIBRE_H: &str = "fibre.h";
    pub const FIBRE_V: &str = "fibre.v";
    /// Chip-B path rails behind the receiving PPC (logical 0, 1).
    pub const B_R0: &str = "b.r0";
    pub const B_R1: &str = "b.r1";

    pub const ALL: [&str; 12] = [
        TT_SIG, TT_IDL, TB_SIG, TB_IDL, BT_SIG, BT_IDL, BB_SIG, BB_IDL, FIBRE_H, FIBRE_V, B_R0,
        B_R1,
    ];
}

/// Pipeline stage grouping, used to evolve with or without the analyzers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageGroup {
    Preparation,
    AnalyzerA,
    IdlerChannel,
    AnalyzerB,
}

/// One element bound to the registry modes it acts on.
#[derive(Debug, Clone)]
pub struct Stage<T: Real> {
    pub element: CircuitElement<T>,
    pub modes: Vec<String>,
    pub group: StageGroup,
}

/// The assembled chip-A → fibre → chip-B circuit.
#[derive(Debug, Clone)]
pub struct Interconnect<T: Real> {
    pub registry: ModeRegistry,
    pub stages: Vec<Stage<T>>,
    pub source: SourceSettings<T>,
    /// Field-squared transmittance folded out of lossy elements on the
    /// idler arm (PPC insertion losses), for the rate budget.
    pub idler_insertion_transmittance: T,
}

impl<T: Real> Interconnect<T> {
    /// Two-source state embedded in the full registry (θ_SS applied by the
    /// preparation stages, not here).
    pub fn initial_state(&self) -> PhotonicState<T> {
        let bare = sfwm_two_source_state(&SourceSettings::ideal(T::zero()));
        bare.embed(
            self.registry.clone(),
            &[
                ("t.sig", modes::TB_SIG),
                ("t.idl", modes::TB_IDL),
                ("b.sig", modes::BB_SIG),
                ("b.idl", modes::BB_IDL),
            ],
        )
        .expect("embedding the source state cannot fail")
    }

    /// Evolve the source state through every stage whose group passes the
    /// filter, in pipeline order.
    pub fn run_filtered(&self, keep: impl Fn(StageGroup) -> bool) -> Result<PhotonicState<T>> {
        let mut state = self.initial_state();
        for stage in &self.stages {
            if !keep(stage.group) {
                continue;
            }
            let labels: Vec<&str> = stage.modes.iter().map(String::as_str).collect();
            state = crate::fock::apply_element(&state, &stage.element, &labels)?;
        }
        Ok(state)
    }

    /// Full pipeline including both analyzers.
    pub fn run(&self) -> Result<PhotonicState<T>> {
        self.run_filtered(|_| true)
    }

    /// Pipeline with both analyzers bypassed (for density-matrix work at
    /// the qubit level).
    pub fn run_without_analyzers(&self) -> Result<PhotonicState<T>> {
        self.run_filtered(|g| !matches!(g, StageGroup::AnalyzerA | StageGroup::AnalyzerB))
    }

    /// Wavelength-filter post-selection: vacuum on every rail the off-chip
    /// filters block (signal on the idler pair, idler on the analyzer-A
    /// pair). What survives is one signal photon at analyzer A and one
    /// idler photon in the receiving rail pair.
    pub fn bell_post_selection(&self) -> PostSelectionPattern {
        PostSelectionPattern::vacuum_on(&[
            modes::BT_SIG,
            modes::BB_SIG,
            modes::TT_IDL,
            modes::TB_IDL,
        ])
        .expect("pattern constrains modes")
    }

    /// Signal qubit rails (logical 0, logical 1).
    pub fn signal_rails(&self) -> (&'static str, &'static str) {
        (modes::TT_SIG, modes::TB_SIG)
    }

    /// Idler qubit rails after the chip-B PPC.
    pub fn idler_rails(&self) -> (&'static str, &'static str) {
        (modes::B_R0, modes::B_R1)
    }

    /// Idler qubit rails on chip A, before the conversion chain.
    pub fn idler_rails_on_chip_a(&self) -> (&'static str, &'static str) {
        (modes::BT_IDL, modes::BB_IDL)
    }
}

/// Assemble the interconnect. Stage ordering: θ_SS phase → demultiplexing
/// MMIs → crossing → analyzer A on the signal rails; then the idler chain
/// PPC(path→pol) → fibre rotation → compensation (inverse ⊕ residual) →
/// PPC(pol→path) → analyzer B.
pub fn build_interconnect<T: Real>(
    source: SourceSettings<T>,
    analyzer_a: AnalyzerSettings<T>,
    analyzer_b: AnalyzerSettings<T>,
    ppc_out: &PPCModel<T>,
    fibre: &FibreChannel<T>,
    ppc_in: &PPCModel<T>,
) -> Result<Interconnect<T>> {
    if analyzer_a.which != AnalyzerSide::A || analyzer_b.which != AnalyzerSide::B {
        return Err(Error::Configuration(
            "analyzer settings bound to the wrong chip".into(),
        ));
    }
    let registry = ModeRegistry::new(modes::ALL)?;
    let mut stages: Vec<Stage<T>> = Vec::new();

    let stage = |element: CircuitElement<T>, mode_list: &[&str], group: StageGroup| Stage {
        element,
        modes: mode_list.iter().map(|s| s.to_string()).collect(),
        group,
    };

    // Pair phase after the sources: e^{iθ_SS} on each bottom-source photon.
    for mode in [modes::BB_SIG, modes::BB_IDL] {
        stages.push(stage(
            phase_shifter(source.theta_ss),
            &[mode],
            StageGroup::Preparation,
        ));
    }
    // Demultiplexing MMIs, one per source rail per wavelength. The source
    // rail sits on the second port.
    for pair in [
        [modes::TT_SIG, modes::TB_SIG],
        [modes::TT_IDL, modes::TB_IDL],
        [modes::BT_SIG, modes::BB_SIG],
        [modes::BT_IDL, modes::BB_IDL],
    ] {
        stages.push(stage(mmi50(), &pair, StageGroup::Preparation));
    }
    // Waveguide crossing: swap the inner rails, each wavelength.
    stages.push(stage(
        crossing(),
        &[modes::TB_SIG, modes::BT_SIG],
        StageGroup::Preparation,
    ));
    stages.push(stage(
        crossing(),
        &[modes::TB_IDL, modes::BT_IDL],
        StageGroup::Preparation,
    ));

    // Analyzer A on the signal rails; the co-propagating idler leftovers
    // traverse the same interferometer at their own wavelength.
    push_analyzer(
        &mut stages,
        &analyzer_a,
        [modes::TT_SIG, modes::TB_SIG],
        StageGroup::AnalyzerA,
    );
    push_analyzer(
        &mut stages,
        &analyzer_a,
        [modes::TT_IDL, modes::TB_IDL],
        StageGroup::AnalyzerA,
    );

    // Idler conversion chain. Insertion loss is folded into the rate
    // budget; the state sees only the unitary crosstalk cores.
    let unitary_ppc = |model: &PPCModel<T>, direction| {
        ppc_element(&PPCModel::new(model.extinction_db, T::zero())?, direction)
    };
    let k_out = ppc_out.insertion_amplitude();
    let k_in = ppc_in.insertion_amplitude();
    let idler_insertion = k_out * k_out * k_in * k_in;

    stages.push(stage(
        unitary_ppc(ppc_out, PpcDirection::PathToPol)?,
        &[modes::BT_IDL, modes::BB_IDL, modes::FIBRE_H, modes::FIBRE_V],
        StageGroup::IdlerChannel,
    ));
    stages.push(stage(
        CircuitElement::unitary("fibre.rotation", fibre.rotation.clone())?,
        &[modes::FIBRE_H, modes::FIBRE_V],
        StageGroup::IdlerChannel,
    ));
    // Compensation undoes the rotation exactly, up to the residual error.
    let compensation = fibre.residual_rotation().mul(&fibre.rotation.adjoint());
    stages.push(stage(
        CircuitElement::unitary("fibre.compensation", compensation)?,
        &[modes::FIBRE_H, modes::FIBRE_V],
        StageGroup::IdlerChannel,
    ));
    stages.push(stage(
        unitary_ppc(ppc_in, PpcDirection::PolToPath)?,
        &[modes::FIBRE_H, modes::FIBRE_V, modes::B_R0, modes::B_R1],
        StageGroup::IdlerChannel,
    ));

    push_analyzer(
        &mut stages,
        &analyzer_b,
        [modes::B_R0, modes::B_R1],
        StageGroup::AnalyzerB,
    );

    Ok(Interconnect {
        registry,
        stages,
        source,
        idler_insertion_transmittance: idler_insertion,
    })
}

fn push_analyzer<T: Real>(
    stages: &mut Vec<Stage<T>>,
    settings: &AnalyzerSettings<T>,
    rails: [&str; 2],
    group: StageGroup,
) {
    let elements = analyzer_elements(settings);
    let spans: [&[&str]; 4] = [&rails[..1], &rails, &rails[..1], &rails];
    for (element, span) in elements.into_iter().zip(spans) {
        stages.push(Stage {
            element,
            modes: span.iter().map(|s| s.to_string()).collect(),
            group,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::apply_element;
    use crate::qubit::Basis;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn source_state_matches_contract() {
        let state = sfwm_two_source_state(&SourceSettings::ideal(0.0_f64));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitude(&[1, 1, 0, 0]).re - h).abs() < 1e-15);
        assert!((state.amplitude(&[0, 0, 1, 1]).re + h).abs() < 1e-15);

        // θ_SS = π/2 flips the minus to a plus.
        let flipped = sfwm_two_source_state(&SourceSettings::ideal(FRAC_PI_2));
        assert!((flipped.amplitude(&[0, 0, 1, 1]).re - h).abs() < 1e-12);
    }

    #[test]
    fn source_overlap_follows_phase_algebra() {
        // ⟨φ(0)|φ(π/4)⟩ = (1 + e^{iπ/2})/2, by direct amplitude algebra.
        let a = sfwm_two_source_state(&SourceSettings::ideal(0.0_f64));
        let b = sfwm_two_source_state(&SourceSettings::ideal(PI / 4.0));
        let got = a.inner_product(&b).unwrap();
        assert!((got.re - 0.5).abs() < 1e-12);
        assert!((got.im - 0.5).abs() < 1e-12);
    }

    #[test]
    fn analyzer_composite_closed_form() {
        // U = i·e^{iθ_Y/2}·[[sin(θ_Y/2)e^{iθ_Z}, cos(θ_Y/2)],
        //                   [cos(θ_Y/2)e^{iθ_Z}, -sin(θ_Y/2)]]
        let (tz, ty) = (0.37_f64, 1.21_f64);
        let settings = AnalyzerSettings::new(tz, ty, AnalyzerSide::A).unwrap();
        let u = analyzer_unitary(&settings);
        let g = c::<f64>(0.0, 1.0) * phase(ty / 2.0);
        let (s, co) = ((ty / 2.0).sin(), (ty / 2.0).cos());
        let expect = CMat::from_rows(&[
            vec![g * phase(tz) * c(s, 0.0), g * c(co, 0.0)],
            vec![g * phase(tz) * c(co, 0.0), g * c(-s, 0.0)],
        ]);
        assert!(u.max_abs_diff(&expect) < 1e-12);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn analyzer_balanced_point_routes_to_one_rail() {
        let settings = AnalyzerSettings::new(0.0_f64, 0.0, AnalyzerSide::A).unwrap();
        let u = analyzer_unitary(&settings);
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(u[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn analyzer_rail1_probability_is_cos_half_squared() {
        // Multiply the four 2×2 matrices symbolically and the rail-1 weight
        // for input |0⟩ comes out cos²(θ_Y/2); sweep to confirm.
        for k in 0..24 {
            let ty = 2.0 * PI * (k as f64) / 24.0;
            let settings = AnalyzerSettings::new(0.0_f64, ty, AnalyzerSide::A).unwrap();
            let u = analyzer_unitary(&settings);
            let p1 = u[(1, 0)].norm_sqr();
            assert!((p1 - (ty / 2.0).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_table_realizes_cardinal_states() {
        for basis in Basis::ALL {
            let (tz, ty) = projector_settings::<f64>(basis);
            let settings = AnalyzerSettings::new(tz, ty, AnalyzerSide::A).unwrap();
            let proj = analyzer_projector(&settings, 1);
            let target = crate::qubit::cardinal_state::<f64>(basis);
            let overlap = (proj[0].conj() * target[0] + proj[1].conj() * target[1]).norm();
            assert!((overlap - 1.0).abs() < 1e-12, "{basis}: overlap {overlap}");
        }
    }

    #[test]
    fn ppc_ideal_is_exact_permutation() {
        let element = ppc_element(&PPCModel::<f64>::ideal(), PpcDirection::PathToPol).unwrap();
        assert!(!element.lossy);
        assert!((element.transfer[(2, 0)].re - 1.0).abs() < 1e-15);
        assert!((element.transfer[(3, 1)].re - 1.0).abs() < 1e-15);
        assert!(element.transfer[(2, 1)].norm() < 1e-15);
        assert!(element.transfer.unitarity_defect() < 1e-12);
    }

    #[test]
    fn ppc_18db_crosstalk_amplitude() {
        let model = PPCModel::new(18.0_f64, 0.0).unwrap();
        assert!((model.crosstalk_amplitude() - 0.12589254117941673).abs() < 1e-12);
        let element = ppc_element(&model, PpcDirection::PathToPol).unwrap();
        assert!(element.transfer.unitarity_defect() < 1e-12);
    }

    #[test]
    fn ppc_insertion_loss_sets_lossy_flag() {
        let model = PPCModel::new(18.0_f64, 7.6).unwrap();
        let element = ppc_element(&model, PpcDirection::PolToPath).unwrap();
        assert!(element.lossy);
        let sigma = crate::linalg::max_singular_value(&element.transfer);
        assert!((sigma - model.insertion_amplitude()).abs() < 1e-10);
    }

    #[test]
    fn ppc_moves_single_photon_across() {
        let reg = ModeRegistry::new(["p0", "p1", "h", "v"]).unwrap();
        let state = PhotonicState::<f64>::basis(reg, vec![1, 0, 0, 0]).unwrap();
        let element = ppc_element(&PPCModel::ideal(), PpcDirection::PathToPol).unwrap();
        let out = apply_element(&state, &element, &["p0", "p1", "h", "v"]).unwrap();
        assert!((out.amplitude(&[0, 0, 1, 0]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wavelength_plan_checks_energy_conservation() {
        assert!(WavelengthPlan::<f64>::default_plan().is_ok());
        assert!(WavelengthPlan::new(1555.5_f64, 1550.7, 1565.0).is_err());
    }

    #[test]
    fn fibre_identity_channel_is_transparent() {
        let fibre = FibreChannel::<f64>::ideal();
        assert!(fibre.residual_rotation().max_abs_diff(&CMat::identity(2)) < 1e-15);
    }

    #[test]
    fn interconnect_builds_with_expected_ordering() {
        let ic = build_interconnect(
            SourceSettings::ideal(FRAC_PI_2),
            AnalyzerSettings::new(0.0_f64, 0.0, AnalyzerSide::A).unwrap(),
            AnalyzerSettings::new(0.0, 0.0, AnalyzerSide::B).unwrap(),
            &PPCModel::ideal(),
            &FibreChannel::ideal(),
            &PPCModel::ideal(),
        )
        .unwrap();
        let groups: Vec<StageGroup> = ic.stages.iter().map(|s| s.group).collect();
        let first_a = groups
            .iter()
            .position(|g| *g == StageGroup::AnalyzerA)
            .unwrap();
        let first_chan = groups
            .iter()
            .position(|g| *g == StageGroup::IdlerChannel)
            .unwrap();
        let first_b = groups
            .iter()
            .position(|g| *g == StageGroup::AnalyzerB)
            .unwrap();
        assert!(first_a < first_chan && first_chan < first_b);
        assert!(ic.stages.iter().all(|s| !s.element.lossy));
    }

    #[test]
    fn analyzer_side_mismatch_is_rejected() {
        let err = build_interconnect(
            SourceSettings::ideal(0.0_f64),
            AnalyzerSettings::new(0.0, 0.0, AnalyzerSide::B).unwrap(),
            AnalyzerSettings::new(0.0, 0.0, AnalyzerSide::B).unwrap(),
            &PPCModel::ideal(),
            &FibreChannel::ideal(),
            &PPCModel::ideal(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }
}
