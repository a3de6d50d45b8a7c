//! Scenario-level building blocks: distributed Bell states, exact and
//! sampled fringes, CHSH runs, and tomography of the conversion channel.
//!
//! Two evaluation routes coexist deliberately. The Fock route evolves the
//! full mode state through every element and reads probabilities at the
//! detection plane; the qubit route reduces the post-selected state to a
//! two-qubit density matrix, applies white-noise mixing there, and
//! projects with the analyzer algebra. They agree at unit visibility.



use crate::analysis::{CHSHResult, CorrelationCoefficient, chsh, correlation_coefficient};
use crate::components::{
    AnalyzerSettings, AnalyzerSide, FibreChannel, Interconnect, PPCModel, SourceSettings,
    analyzer_projector, build_interconnect, crossing, mmi50, modes, phase_shifter,
    ppc_qubit_matrix,
};
use crate::detection::{
    CoincidenceProbabilities, CountRecord, DetectorAssignment, DetectorModel, RateModel,
    RecordSettings, coincidence_probability, outcome_probabilities, sample_counts,
};
use crate::error::Result;
use crate::fock::{ModeRegistry, PhotonicState, apply_element, post_select, reduce_to_two_qubits};
use crate::linalg::CMat;
use crate::qubit::{joint_projection_probability, werner_mix};
use crate::rng::{SplitMix64, derive_seed};
use crate::scalar::Real;
use crate::tomography::QubitDensityMatrix;

/// Channel imperfections and state noise for a distributed-entanglement run.
#[derive(Debug, Clone)]
pub struct Imperfections<T: Real> {
    pub ppc_out: PPCModel<T>,
    pub fibre: FibreChannel<T>,
    pub ppc_in: PPCModel<T>,
    /// Werner-type white-noise visibility applied to the two-qubit state.
    pub noise_visibility: T,
}

impl<T: Real> Imperfections<T> {
    pub fn ideal() -> Self {
        Self {
            ppc_out: PPCModel::ideal(),
            fibre: FibreChannel::ideal(),
            ppc_in: PPCModel::ideal(),
            noise_visibility: T::one(),
        }
    }

    pub fn with_visibility(visibility: T) -> Self {
        Self {
            noise_visibility: visibility,
            ..Self::ideal()
        }
    }
}

/// Counting configuration shared by all sampled scenarios.
#[derive(Debug, Clone)]
pub struct CountingSetup<T: Real> {
    pub rates: RateModel<T>,
    pub detector_1: DetectorModel<T>,
    pub detector_2: DetectorModel<T>,
    pub window_s: T,
    pub duration_s: T,
}

fn interconnect_at<T: Real>(
    theta_ss: T,
    theta_ay: T,
    theta_by: T,
    imp: &Imperfections<T>,
) -> Result<Interconnect<T>> {
    build_interconnect(
        SourceSettings::ideal(theta_ss),
        AnalyzerSettings::new(T::zero(), theta_ay, AnalyzerSide::A)?,
        AnalyzerSettings::new(T::zero(), theta_by, AnalyzerSide::B)?,
        &imp.ppc_out,
        &imp.fibre,
        &imp.ppc_in,
    )
}

/// Outcome of distributing one Bell pair across the interconnect.
#[derive(Debug, Clone)]
pub struct DistributedState<T: Real> {
    /// Two-qubit density matrix after post-selection and noise mixing.
    pub rho: CMat<T>,
    /// Wavelength-filter post-selection probability (¼ for the ideal chip).
    pub selection_probability: T,
}

/// Run the pipeline without analyzers, post-select one photon per rail
/// pair, reduce to two qubits, and apply the white-noise visibility.
pub fn distributed_state<T: Real>(
    theta_ss: T,
    imp: &Imperfections<T>,
) -> Result<DistributedState<T>> {
    let ic = interconnect_at(theta_ss, T::zero(), T::zero(), imp)?;
    let state = ic.run_without_analyzers()?;
    let (selected, probability) = post_select(&state, &ic.bell_post_selection())?;
    let rho_pure = reduce_to_two_qubits(&selected, ic.signal_rails(), ic.idler_rails())?;
    Ok(DistributedState {
        rho: werner_mix(&rho_pure, imp.noise_visibility),
        selection_probability: probability,
    })
}

/// Joint probability of plus-port clicks at both analyzers, conditioned on
/// post-selection (the qubit route).
pub fn joint_click_probability<T: Real>(rho: &CMat<T>, theta_ay: T, theta_by: T) -> T {
    let proj_a = analyzer_projector(
        &AnalyzerSettings {
            theta_z: T::zero(),
            theta_y: theta_ay,
            which: AnalyzerSide::A,
        },
        1,
    );
    let proj_b = analyzer_projector(
        &AnalyzerSettings {
            theta_z: T::zero(),
            theta_y: theta_by,
            which: AnalyzerSide::B,
        },
        1,
    );
    joint_projection_probability(rho, &proj_a, &proj_b)
}

/// The four coincidence probabilities entering one correlation coefficient:
/// (θ_A, θ_B), (θ_A+π, θ_B+π), (θ_A, θ_B+π), (θ_A+π, θ_B).
pub fn correlation_quad<T: Real>(rho: &CMat<T>, theta_ay: T, theta_by: T) -> [T; 4] {
    let pi = T::pi();
    [
        joint_click_probability(rho, theta_ay, theta_by),
        joint_click_probability(rho, theta_ay + pi, theta_by + pi),
        joint_click_probability(rho, theta_ay, theta_by + pi),
        joint_click_probability(rho, theta_ay + pi, theta_by),
    ]
}

/// Normalized correlation from exact probabilities.
pub fn exact_correlation<T: Real>(rho: &CMat<T>, theta_ay: T, theta_by: T) -> T {
    let [c1, c2, c3, c4] = correlation_quad(rho, theta_ay, theta_by);
    (c1 + c2 - c3 - c4) / (c1 + c2 + c3 + c4)
}

/// Which Bell state a run targets; fixes the CHSH angle labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
        }
    }

    /// θ_SS producing this state (π/2 for |Φ⁺⟩, π for |Φ⁻⟩).
    pub fn theta_ss<T: Real>(self) -> T {
        match self {
            BellLabel::PhiPlus => T::pi() * T::half(),
            BellLabel::PhiMinus => T::pi(),
        }
    }

    /// Analyzer angles ((A₁, A₂), (B₁, B₂)) for which the Eq-style CHSH
    /// combination S = E₁₁+E₁₂+E₂₁−E₂₂ is maximal and positive.
    pub fn chsh_angles<T: Real>(self) -> ([T; 2], [T; 2]) {
        let pi = T::pi();
        let quarter = pi / T::of(4.0);
        match self {
            BellLabel::PhiPlus => {
                ([pi * T::half(), T::zero()], [quarter, T::of(3.0) * quarter])
            }
            BellLabel::PhiMinus => (
                [pi * T::half(), T::zero()],
                [T::of(7.0) * quarter, T::of(5.0) * quarter],
            ),
        }
    }
}

/// S from exact probabilities at the canonical angles.
pub fn exact_chsh_s<T: Real>(rho: &CMat<T>, label: BellLabel) -> T {
    let (a, b) = label.chsh_angles::<T>();
    let e = |i: usize, j: usize| exact_correlation(rho, a[i], b[j]);
    (e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)).abs()
}

/// Detection plane of the chip-to-chip experiment: analyzer-A ports carry
/// the signal filter, chip-B ports the idler filter, and every other mode
/// ends in a filtered sink.
pub fn chip_to_chip_assignment() -> DetectorAssignment {
    DetectorAssignment::new()
        .detector(modes::TB_SIG, "D1")
        .detector(modes::TT_SIG, "D1x")
        .detector(modes::B_R1, "D3")
        .detector(modes::B_R0, "D3x")
        .sink(modes::TT_IDL)
        .sink(modes::TB_IDL)
        .sink(modes::BT_SIG)
        .sink(modes::BB_SIG)
        .sink(modes::BT_IDL)
        .sink(modes::BB_IDL)
        .sink(modes::FIBRE_H)
        .sink(modes::FIBRE_V)
}

/// Unconditional probabilities for one chip-to-chip record via the full
/// Fock route: D1∧D3 coincidence plus both singles marginals.
pub fn fock_route_probabilities<T: Real>(
    theta_ss: T,
    theta_ay: T,
    theta_by: T,
    imp: &Imperfections<T>,
) -> Result<CoincidenceProbabilities<T>> {
    let ic = interconnect_at(theta_ss, theta_ay, theta_by, imp)?;
    let state = ic.run()?;
    let outcomes = outcome_probabilities(&state, &chip_to_chip_assignment())?;
    Ok(CoincidenceProbabilities {
        coincidence: coincidence_probability(&outcomes, &["D1", "D3"]),
        single_1: state.mean_photons_at(modes::TB_SIG)?,
        single_2: state.mean_photons_at(modes::B_R1)?,
    })
}

/// All four plus/minus-port coincidences of the Fock route, conditioned on
/// the post-selected sector. Ordering: (D1,D3), (D1x,D3x), (D1,D3x),
/// (D1x,D3) — the correlation quad at offset angles collapses onto these.
pub fn fock_route_conditional_quad<T: Real>(
    theta_ss: T,
    theta_ay: T,
    theta_by: T,
    imp: &Imperfections<T>,
) -> Result<[T; 4]> {
    let ic = interconnect_at(theta_ss, theta_ay, theta_by, imp)?;
    let state = ic.run()?;
    let outcomes = outcome_probabilities(&state, &chip_to_chip_assignment())?;
    let raw = [
        coincidence_probability(&outcomes, &["D1", "D3"]),
        coincidence_probability(&outcomes, &["D1x", "D3x"]),
        coincidence_probability(&outcomes, &["D1", "D3x"]),
        coincidence_probability(&outcomes, &["D1x", "D3"]),
    ];
    let total: T = raw.iter().copied().sum();
    Ok(raw.map(|p| p / total))
}

/// Bright-pump transmission to the D1 port as a function of θ_SS: the pump
/// splitter, pair phase, demultiplexers, crossing and analyzer traced with
/// a single photon on the signal-rail copies.
pub fn classical_fringe_probability<T: Real>(theta_ss: T, theta_ay: T) -> Result<T> {
    let registry = ModeRegistry::new([modes::TT_SIG, modes::TB_SIG, modes::BT_SIG, modes::BB_SIG])?;
    let mut state = PhotonicState::basis(registry, vec![0, 0, 0, 1])?;
    let steps: Vec<(crate::fock::CircuitElement<T>, Vec<&str>)> = vec![
        (mmi50(), vec![modes::TB_SIG, modes::BB_SIG]), // pump splitter
        (phase_shifter(theta_ss), vec![modes::BB_SIG]),
        (mmi50(), vec![modes::TT_SIG, modes::TB_SIG]),
        (mmi50(), vec![modes::BT_SIG, modes::BB_SIG]),
        (crossing(), vec![modes::TB_SIG, modes::BT_SIG]),
        (phase_shifter(T::zero()), vec![modes::TT_SIG]), // analyzer θ_Z
        (mmi50(), vec![modes::TT_SIG, modes::TB_SIG]),
        (phase_shifter(theta_ay), vec![modes::TT_SIG]),
        (mmi50(), vec![modes::TT_SIG, modes::TB_SIG]),
    ];
    for (element, mode_list) in &steps {
        state = apply_element(&state, element, mode_list)?;
    }
    state.mean_photons_at(modes::TB_SIG)
}

/// Two-photon quantum-interference coincidence between the analyzer-A
/// output ports (signal at D1, idler at D2) as a function of θ_SS.
pub fn quantum_fringe_probabilities<T: Real>(
    theta_ss: T,
    theta_ay: T,
) -> Result<CoincidenceProbabilities<T>> {
    let ic = interconnect_at(theta_ss, theta_ay, T::zero(), &Imperfections::ideal())?;
    let state = ic.run()?;
    let assignment = DetectorAssignment::new()
        .detector(modes::TB_SIG, "D1")
        .detector(modes::TT_IDL, "D2")
        .detector(modes::TT_SIG, "D1x")
        .detector(modes::TB_IDL, "D2x")
        .sink(modes::BT_SIG)
        .sink(modes::BB_SIG)
        .sink(modes::BT_IDL)
        .sink(modes::BB_IDL)
        .sink(modes::FIBRE_H)
        .sink(modes::FIBRE_V)
        .sink(modes::B_R0)
        .sink(modes::B_R1);
    let outcomes = outcome_probabilities(&state, &assignment)?;
    Ok(CoincidenceProbabilities {
        coincidence: coincidence_probability(&outcomes, &["D1", "D2"]),
        single_1: state.mean_photons_at(modes::TB_SIG)?,
        single_2: state.mean_photons_at(modes::TT_IDL)?,
    })
}

/// One sampled chip-to-chip record at the given analyzer angles.
#[allow(clippy::too_many_arguments)]
pub fn sample_correlation_record<T: Real>(
    rho: &CMat<T>,
    selection_probability: T,
    theta_ss: T,
    theta_ay: T,
    theta_by: T,
    imp: &Imperfections<T>,
    setup: &CountingSetup<T>,
    seed: u64,
) -> Result<CountRecord<T>> {
    // Coincidence from the (possibly mixed) qubit route; singles from the
    // Fock marginals, which white noise does not move.
    let fock = fock_route_probabilities(theta_ss, theta_ay, theta_by, imp)?;
    let probabilities = CoincidenceProbabilities {
        coincidence: selection_probability * joint_click_probability(rho, theta_ay, theta_by),
        single_1: fock.single_1,
        single_2: fock.single_2,
    };
    let settings = RecordSettings {
        theta_ay,
        theta_az: T::zero(),
        theta_by,
        theta_bz: T::zero(),
        theta_ss,
    };
    sample_counts(
        settings,
        probabilities,
        &setup.rates,
        (&setup.detector_1, &setup.detector_2),
        setup.window_s,
        setup.duration_s,
        seed,
    )
}

/// A complete sampled CHSH run: four correlation coefficients, sixteen
/// records, and the S parameter.
#[derive(Debug, Clone)]
pub struct ChshRun<T: Real> {
    pub result: CHSHResult<T>,
    pub coefficients: Vec<CorrelationCoefficient<T>>,
    pub records: Vec<CountRecord<T>>,
}

/// Sample the sixteen CHSH records with per-record derived seeds and
/// assemble S. Record ordering is by (coefficient, offset) index,
/// independent of sampling.
pub fn run_chsh_sampled<T: Real>(
    label: BellLabel,
    imp: &Imperfections<T>,
    setup: &CountingSetup<T>,
    seed: u64,
) -> Result<ChshRun<T>> {
    let theta_ss = label.theta_ss::<T>();
    let dist = distributed_state(theta_ss, imp)?;
    let (a_angles, b_angles) = label.chsh_angles::<T>();
    let pi = T::pi();

    let mut coefficients = Vec::with_capacity(4);
    let mut records = Vec::with_capacity(16);
    let mut record_index = 0u64;
    for &theta_a in &a_angles {
        for &theta_b in &b_angles {
            let offsets = [
                (T::zero(), T::zero()),
                (pi, pi),
                (T::zero(), pi),
                (pi, T::zero()),
            ];
            let mut quad: Vec<CountRecord<T>> = Vec::with_capacity(4);
            for (da, db) in offsets {
                let record = sample_correlation_record(
                    &dist.rho,
                    dist.selection_probability,
                    theta_ss,
                    theta_a + da,
                    theta_b + db,
                    imp,
                    setup,
                    derive_seed(seed, record_index),
                )?;
                record_index += 1;
                quad.push(record);
            }
            records.extend(quad.iter().cloned());
            coefficients.push(correlation_coefficient([
                quad[0].clone(),
                quad[1].clone(),
                quad[2].clone(),
                quad[3].clone(),
            ])?);
        }
    }
    // Coefficient order: (A1,B1), (A1,B2), (A2,B1), (A2,B2).
    let result = chsh(
        &coefficients[0],
        &coefficients[1],
        &coefficients[2],
        &coefficients[3],
        label.as_str(),
    );
    Ok(ChshRun {
        result,
        coefficients,
        records,
    })
}

/// Exact S after white-noise mixing: 2√2·v for the ideal pipeline.
pub fn exact_s_for_visibility<T: Real>(label: BellLabel, visibility: T) -> Result<T> {
    let imp = Imperfections::with_visibility(visibility);
    let dist = distributed_state(label.theta_ss::<T>(), &imp)?;
    Ok(exact_chsh_s(&dist.rho, label))
}

/// Unitary acting on the idler qubit between the chips: receiving-PPC
/// crosstalk composed with the residual compensation error.
pub fn conversion_channel<T: Real>(ppc: &PPCModel<T>, fibre: &FibreChannel<T>) -> CMat<T> {
    ppc_qubit_matrix(ppc).mul(&fibre.residual_rotation())
}

/// Apply a 2×2 unitary channel to a cardinal state.
pub fn channel_output<T: Real>(
    channel: &CMat<T>,
    basis: crate::qubit::Basis,
) -> QubitDensityMatrix<T> {
    let rho_in = QubitDensityMatrix::cardinal(basis);
    let out = channel.mul(rho_in.matrix()).mul(&channel.adjoint());
    QubitDensityMatrix::new(out).expect("unitary conjugation preserves physicality")
}

/// Classical-fringe record: bright-light singles at D1, no coincidences.
pub fn sample_classical_record<T: Real>(
    theta_ss: T,
    theta_ay: T,
    count_rate_hz: T,
    duration_s: T,
    seed: u64,
) -> Result<CountRecord<T>> {
    let p = classical_fringe_probability(theta_ss, theta_ay)?;
    let mut rng = SplitMix64::new(seed);
    let singles = rng.sample_poisson(count_rate_hz * p * duration_s);
    Ok(CountRecord {
        settings: RecordSettings {
            theta_ay,
            theta_az: T::zero(),
            theta_by: T::zero(),
            theta_bz: T::zero(),
            theta_ss,
        },
        singles_1: singles,
        singles_2: 0,
        coincidences_raw: 0,
        accidentals_estimate: T::zero(),
        coincidences_corrected: T::zero(),
        sigma: T::of(singles as f64).sqrt(),
        window_s: T::one(),
        duration_s,
        corrected: false,
        clamped: false,
    })
}

/// Quantum-fringe record: D1-D2 coincidences on chip A.
pub fn sample_quantum_fringe_record<T: Real>(
    theta_ss: T,
    theta_ay: T,
    setup: &CountingSetup<T>,
    seed: u64,
) -> Result<CountRecord<T>> {
    let probabilities = quantum_fringe_probabilities(theta_ss, theta_ay)?;
    let settings = RecordSettings {
        theta_ay,
        theta_az: T::zero(),
        theta_by: T::zero(),
        theta_bz: T::zero(),
        theta_ss,
    };
    sample_counts(
        settings,
        probabilities,
        &setup.rates,
        (&setup.detector_1, &setup.detector_2),
        setup.window_s,
        setup.duration_s,
        seed,
    )
}

/// Exact correlation-fringe value C(θ_AY, θ_BY) for plotting/fitting,
/// conditioned on post-selection.
pub fn exact_fringe_value<T: Real>(rho: &CMat<T>, theta_ay: T, theta_by: T) -> T {
    joint_click_probability(rho, theta_ay, theta_by)
}

/// Ideal Bell-state generation figure of merit for a θ_SS setting:
/// fidelity of the post-selected two-qubit state against the matching
/// Bell state, and the selection probability.
pub fn bell_generation_check<T: Real>(label: BellLabel) -> Result<(T, T)> {
    let dist = distributed_state(label.theta_ss::<T>(), &Imperfections::ideal())?;
    let target = crate::qubit::bell_phi::<T>(matches!(label, BellLabel::PhiPlus));
    // Both states are (near-)pure; overlap Tr[ρ·σ] is the fidelity.
    let fidelity = dist.rho.mul(&target).trace().re;
    Ok((fidelity, dist.selection_probability))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::bell_phi;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn ideal_phi_plus_distribution() {
        let dist = distributed_state(FRAC_PI_2, &Imperfections::<f64>::ideal()).unwrap();
        assert!((dist.selection_probability - 0.25).abs() < 1e-12);
        let overlap = dist.rho.mul(&bell_phi::<f64>(true)).trace().re;
        assert!(overlap > 1.0 - 1e-12, "fidelity {overlap}");
    }

    #[test]
    fn ideal_phi_minus_distribution() {
        let dist = distributed_state(PI, &Imperfections::<f64>::ideal()).unwrap();
        let overlap = dist.rho.mul(&bell_phi::<f64>(false)).trace().re;
        assert!(overlap > 1.0 - 1e-12, "fidelity {overlap}");
    }

    #[test]
    fn identity_channel_keeps_chip_a_qubit() {
        // Fibre rotation = identity, residual = 0: chip-B qubit equals the
        // chip-A idler qubit exactly.
        let ic = interconnect_at(
            FRAC_PI_2,
            0.0_f64,
            0.0,
            &Imperfections::ideal(),
        )
        .unwrap();
        let state = ic.run_without_analyzers().unwrap();
        let (selected, _) = post_select(&state, &ic.bell_post_selection()).unwrap();
        let rho_b =
            reduce_to_two_qubits(&selected, ic.signal_rails(), ic.idler_rails()).unwrap();

        // Re-run, reducing at the chip-A idler rails before the channel.
        let ic2 = interconnect_at(FRAC_PI_2, 0.0_f64, 0.0, &Imperfections::ideal()).unwrap();
        let prep_only = ic2
            .run_filtered(|g| matches!(g, crate::components::StageGroup::Preparation))
            .unwrap();
        let (selected_a, _) = post_select(&prep_only, &ic2.bell_post_selection()).unwrap();
        let rho_a =
            reduce_to_two_qubits(&selected_a, ic2.signal_rails(), ic2.idler_rails_on_chip_a())
                .unwrap();
        assert!(rho_b.max_abs_diff(&rho_a) < 1e-12);
    }

    #[test]
    fn fringe_prediction_matches_half_angle_cosine() {
        let dist = distributed_state(FRAC_PI_2, &Imperfections::<f64>::ideal()).unwrap();
        for k in 0..12 {
            let theta_b = 2.0 * PI * k as f64 / 12.0;
            for theta_a in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
                let got = joint_click_probability(&dist.rho, theta_a, theta_b);
                let expect = 0.5 * ((theta_a - theta_b) / 2.0).cos().powi(2);
                assert!((got - expect).abs() < 1e-12, "({theta_a}, {theta_b})");
            }
        }
    }

    #[test]
    fn phi_minus_fringe_uses_the_angle_sum() {
        let dist = distributed_state(PI, &Imperfections::<f64>::ideal()).unwrap();
        for k in 0..12 {
            let theta_b = 2.0 * PI * k as f64 / 12.0;
            let got = joint_click_probability(&dist.rho, FRAC_PI_2, theta_b);
            let expect = 0.5 * ((FRAC_PI_2 + theta_b) / 2.0).cos().powi(2);
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_chsh_loses_visibility_linearly() {
        for (label, v) in [
            (BellLabel::PhiPlus, 1.0),
            (BellLabel::PhiPlus, 0.9763),
            (BellLabel::PhiMinus, 0.9685),
            (BellLabel::PhiPlus, std::f64::consts::FRAC_1_SQRT_2),
        ] {
            let s = exact_s_for_visibility(label, v).unwrap();
            assert!(
                (s - 2.0 * std::f64::consts::SQRT_2 * v).abs() < 1e-9,
                "{label:?} v={v}: S={s}"
            );
        }
    }

    #[test]
    fn routes_agree_at_unit_visibility() {
        let imp = Imperfections::<f64> {
            ppc_out: PPCModel::new(18.0, 0.0).unwrap(),
            fibre: FibreChannel::new(
                crate::qubit::euler_unitary(0.3, 0.5, -0.2),
                0.05,
                11,
            )
            .unwrap(),
            ppc_in: PPCModel::new(20.0, 0.0).unwrap(),
            noise_visibility: 1.0,
        };
        let theta_ss = FRAC_PI_2;
        let dist = distributed_state(theta_ss, &imp).unwrap();
        for (ta, tb) in [(0.0, FRAC_PI_4), (FRAC_PI_2, 1.1), (2.0, 4.4)] {
            let quad = correlation_quad(&dist.rho, ta, tb);
            let total: f64 = quad.iter().sum();
            let qubit_route: Vec<f64> = quad.iter().map(|p| p / total).collect();
            let fock_route = fock_route_conditional_quad(theta_ss, ta, tb, &imp).unwrap();
            for (a, b) in qubit_route.iter().zip(fock_route) {
                assert!((a - b).abs() < 1e-10, "({ta}, {tb}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn ideal_unconditional_coincidence_is_one_eighth() {
        // Selection ¼ times the |Φ⁺⟩ joint-click probability ½ at matched
        // analyzers, straight from the Fock route.
        let probs =
            fock_route_probabilities(FRAC_PI_2, 0.0_f64, 0.0, &Imperfections::ideal()).unwrap();
        assert!((probs.coincidence - 0.125).abs() < 1e-12);
    }

    #[test]
    fn correlated_click_fraction_follows_the_quarter_angle() {
        // At θ_AY = 0, θ_BY = π/4 the correlated outcomes (both plus ports
        // or both minus ports) carry cos²(π/8) of the post-selected events.
        let quad =
            fock_route_conditional_quad(FRAC_PI_2, 0.0_f64, FRAC_PI_4, &Imperfections::ideal())
                .unwrap();
        let correlated = quad[0] + quad[1];
        assert!((correlated - (FRAC_PI_4 / 2.0).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn matched_angles_give_perfect_correlation() {
        let dist = distributed_state(FRAC_PI_2, &Imperfections::<f64>::ideal()).unwrap();
        for theta in [0.0, 0.4, FRAC_PI_2, 2.2] {
            let e = exact_correlation(&dist.rho, theta, theta);
            assert!((e - 1.0).abs() < 1e-12, "θ={theta}: E={e}");
        }
    }

    #[test]
    fn classical_fringe_has_unit_period_and_full_contrast() {
        // P(D1) = (1 − sin θ_SS)/4 at the Hadamard analyzer point.
        for k in 0..16 {
            let theta = 2.0 * PI * k as f64 / 16.0;
            let p = classical_fringe_probability(theta, FRAC_PI_2).unwrap();
            assert!((p - 0.25 * (1.0 - theta.sin())).abs() < 1e-12, "θ={theta}");
        }
    }

    #[test]
    fn quantum_fringe_is_doubled_frequency() {
        // P(D1∧D2) = cos²(θ_SS)/8 at the Hadamard analyzer point.
        for k in 0..16 {
            let theta = 2.0 * PI * k as f64 / 16.0;
            let probs = quantum_fringe_probabilities(theta, FRAC_PI_2).unwrap();
            assert!(
                (probs.coincidence - theta.cos().powi(2) / 8.0).abs() < 1e-12,
                "θ={theta}: {}",
                probs.coincidence
            );
        }
    }

    #[test]
    fn chsh_sampled_run_is_deterministic_and_ordered() {
        let setup = CountingSetup {
            rates: RateModel::new(4000.0, 0.5, 0.5).unwrap(),
            detector_1: DetectorModel::new(0.5, 800.0, "D1").unwrap(),
            detector_2: DetectorModel::new(0.5, 800.0, "D3").unwrap(),
            window_s: 450e-12,
            duration_s: 60.0,
        };
        let run_a =
            run_chsh_sampled(BellLabel::PhiPlus, &Imperfections::ideal(), &setup, 7).unwrap();
        let run_b =
            run_chsh_sampled(BellLabel::PhiPlus, &Imperfections::ideal(), &setup, 7).unwrap();
        assert_eq!(run_a.records.len(), 16);
        assert_eq!(run_a.result.s, run_b.result.s);
        assert!(run_a.result.s > 2.0, "S = {}", run_a.result.s);
    }

    #[test]
    fn ppc_only_channel_matches_qubit_matrix() {
        let ppc = PPCModel::new(18.0_f64, 0.0).unwrap();
        let channel = conversion_channel(&ppc, &FibreChannel::ideal());
        assert!(channel.max_abs_diff(&ppc_qubit_matrix(&ppc)) < 1e-15);
    }
}
