//! Scenario execution: each runner produces count records plus a summary
//! document, deterministically for a fixed seed.

use serde_json::{Map, Value, json};

use qpic_core::analysis::{
    FringeChannel, FringeDataset, fit_fringe, fit_fringe_fixed_k, s_from_visibility, visibility,
};
use qpic_core::calibration::{
    PhotonPath, fit_oe_contour, loss_budget, samples_from_csv, samples_to_csv, synthesize_contour,
};
use qpic_core::detection::CountRecord;
use qpic_core::error::{Error, Result};
use qpic_core::experiment::{
    channel_output, classical_fringe_probability, conversion_channel, distributed_state,
    exact_chsh_s, exact_fringe_value, quantum_fringe_probabilities, run_chsh_sampled,
    sample_classical_record, sample_correlation_record, sample_quantum_fringe_record,
};
use qpic_core::qubit::Basis;
use qpic_core::rng::{SplitMix64, derive_seed};
use qpic_core::tomography::{
    ProcessMatrix, QubitDensityMatrix, TomographyCounts, mle_reconstruct, process_fidelity,
    process_tomography, state_fidelity,
};

use crate::config::{ExperimentConfig, Scenario};

/// Everything a scenario run produces. `records_csv` is always present
/// (header-only for scenarios without count records); `extra_files` maps
/// file names to contents (the calibrate scenario's sample table).
#[derive(Debug)]
pub struct RunBundle {
    pub records_csv: String,
    pub summary: Value,
    pub extra_files: Vec<(String, String)>,
}

fn records_csv(records: &[CountRecord<f64>]) -> String {
    let mut out = String::from(CountRecord::<f64>::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn base_summary(scenario: Scenario, config: &ExperimentConfig, seed: u64) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("scenario".into(), json!(scenario.name()));
    map.insert("seed".into(), json!(seed));
    map.insert(
        "noise_visibility".into(),
        json!(config.physics.noise_visibility),
    );
    map
}

/// Run one scenario. Deterministic for a fixed (config, seed) pair.
pub fn run(scenario: Scenario, config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    if let Some(pinned) = config.scenario {
        if pinned != scenario {
            return Err(Error::Validation(format!(
                "config pins scenario `{}` but `{}` was requested",
                pinned.name(),
                scenario.name()
            )));
        }
    }
    config.validate()?;
    match scenario {
        Scenario::ClassicalFringe => classical_fringe(config, seed),
        Scenario::QuantumFringe => quantum_fringe(config, seed),
        Scenario::CorrelationFringe => correlation_fringe(config, seed),
        Scenario::Chsh => chsh(config, seed),
        Scenario::StateTomo => state_tomo(config, seed),
        Scenario::ProcessTomo => process_tomo(config, seed),
        Scenario::Calibrate => calibrate(config, seed),
        Scenario::LossBudget => loss_budget_scenario(config, seed),
    }
}

fn scan_angles(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| std::f64::consts::TAU * i as f64 / points as f64)
        .collect()
}

fn fringe_summary(
    mut summary: Map<String, Value>,
    data: &FringeDataset<f64>,
) -> Result<Value> {
    let fit = fit_fringe(data)?;
    let vis = visibility(data, &fit)?;
    let (s, sigma_s) = s_from_visibility(vis.value.clamp(0.0, 1.0), vis.sigma)?;
    summary.insert("fit".into(), fit.summary_json());
    summary.insert("fitted_k".into(), json!(fit.frequency));
    summary.insert("visibility".into(), json!(vis.value));
    summary.insert("visibility_sigma".into(), json!(vis.sigma));
    summary.insert("visibility_raw_minmax".into(), json!(vis.raw_value));
    summary.insert("s_from_visibility".into(), json!(s));
    summary.insert("s_from_visibility_sigma".into(), json!(sigma_s));
    Ok(Value::Object(summary))
}

fn classical_fringe(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let theta_ay = std::f64::consts::FRAC_PI_2; // Hadamard analyzer point
    let angles = scan_angles(config.run.points);
    let mut records = Vec::new();
    let data = if config.run.exact {
        FringeDataset::from_values(
            "theta_ss",
            angles
                .iter()
                .map(|&t| Ok((t, classical_fringe_probability(t, theta_ay)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        let mut pairs = Vec::new();
        for (i, &t) in angles.iter().enumerate() {
            let record = sample_classical_record(
                t,
                theta_ay,
                config.run.classical_rate_hz,
                config.run.duration_s,
                derive_seed(seed, i as u64),
            )?;
            pairs.push((t, record.clone()));
            records.push(record);
        }
        FringeDataset::from_records("theta_ss", &pairs, FringeChannel::Singles1)
    };
    let summary = fringe_summary(base_summary(Scenario::ClassicalFringe, config, seed), &data)?;
    Ok(RunBundle {
        records_csv: records_csv(&records),
        summary,
        extra_files: Vec::new(),
    })
}

fn quantum_fringe(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let theta_ay = std::f64::consts::FRAC_PI_2;
    let angles = scan_angles(config.run.points);
    let mut records = Vec::new();
    let data = if config.run.exact {
        FringeDataset::from_values(
            "theta_ss",
            angles
                .iter()
                .map(|&t| Ok((t, quantum_fringe_probabilities(t, theta_ay)?.coincidence)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        let setup = config.counting_setup()?;
        let mut pairs = Vec::new();
        for (i, &t) in angles.iter().enumerate() {
            let record =
                sample_quantum_fringe_record(t, theta_ay, &setup, derive_seed(seed, i as u64))?;
            pairs.push((t, record.clone()));
            records.push(record);
        }
        FringeDataset::from_records("theta_ss", &pairs, FringeChannel::CorrectedCoincidences)
    };
    let summary = fringe_summary(base_summary(Scenario::QuantumFringe, config, seed), &data)?;
    Ok(RunBundle {
        records_csv: records_csv(&records),
        summary,
        extra_files: Vec::new(),
    })
}

fn correlation_fringe(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let imp = config.imperfections()?;
    let theta_ss = config.theta_ss();
    let dist = distributed_state(theta_ss, &imp)?;
    let angles = scan_angles(config.run.points);
    let setup = config.counting_setup()?;

    let mut records = Vec::new();
    let mut fringes = Vec::new();
    let mut visibilities = Vec::new();
    let mut sigma_sum = 0.0;
    for (ai, theta_ay_pi) in config.run.theta_ay_grid_pi.iter().enumerate() {
        let theta_ay = theta_ay_pi * std::f64::consts::PI;
        let data = if config.run.exact {
            FringeDataset::from_values(
                "theta_by",
                angles
                    .iter()
                    .map(|&tb| (tb, exact_fringe_value(&dist.rho, theta_ay, tb))),
            )
        } else {
            let mut pairs = Vec::new();
            for (bi, &tb) in angles.iter().enumerate() {
                let record = sample_correlation_record(
                    &dist.rho,
                    dist.selection_probability,
                    theta_ss,
                    theta_ay,
                    tb,
                    &imp,
                    &setup,
                    derive_seed(seed, (ai * angles.len() + bi) as u64),
                )?;
                pairs.push((tb, record.clone()));
                records.push(record);
            }
            FringeDataset::from_records("theta_by", &pairs, FringeChannel::CorrectedCoincidences)
        };
        let fit = fit_fringe_fixed_k(&data, 1)?;
        let vis = visibility(&data, &fit)?;
        visibilities.push(vis.value);
        sigma_sum += vis.sigma * vis.sigma;
        let mut entry = Map::new();
        entry.insert("theta_ay_pi".into(), json!(theta_ay_pi));
        entry.insert("fit".into(), fit.summary_json());
        entry.insert("visibility".into(), json!(vis.value));
        entry.insert("visibility_sigma".into(), json!(vis.sigma));
        fringes.push(Value::Object(entry));
    }
    let mean_v: f64 = visibilities.iter().sum::<f64>() / visibilities.len() as f64;
    let mean_v_sigma = sigma_sum.sqrt() / visibilities.len() as f64;
    let (s, sigma_s) = s_from_visibility(mean_v.clamp(0.0, 1.0), mean_v_sigma)?;

    let mut summary = base_summary(Scenario::CorrelationFringe, config, seed);
    summary.insert("state".into(), json!(config.bell_label().as_str()));
    summary.insert("fringes".into(), Value::Array(fringes));
    summary.insert("mean_visibility".into(), json!(mean_v));
    summary.insert("mean_visibility_sigma".into(), json!(mean_v_sigma));
    summary.insert("s_from_visibility".into(), json!(s));
    summary.insert("s_from_visibility_sigma".into(), json!(sigma_s));
    Ok(RunBundle {
        records_csv: records_csv(&records),
        summary: Value::Object(summary),
        extra_files: Vec::new(),
    })
}

fn chsh(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let label = config.bell_label();
    let imp = config.imperfections()?;
    let mut summary = base_summary(Scenario::Chsh, config, seed);
    summary.insert("state".into(), json!(label.as_str()));

    let dist = distributed_state(config.theta_ss(), &imp)?;
    let s_exact = exact_chsh_s(&dist.rho, label);
    summary.insert("s_exact_probabilities".into(), json!(s_exact));
    summary.insert(
        "selection_probability".into(),
        json!(dist.selection_probability),
    );

    if config.run.exact {
        return Ok(RunBundle {
            records_csv: records_csv(&[]),
            summary: Value::Object(summary),
            extra_files: Vec::new(),
        });
    }

    let setup = config.counting_setup()?;
    let run = run_chsh_sampled(label, &imp, &setup, seed)?;
    summary.insert("chsh".into(), run.result.summary_json());
    let coefficients: Vec<Value> = run
        .coefficients
        .iter()
        .map(|c| json!({"value": c.value, "sigma": c.sigma}))
        .collect();
    summary.insert("correlation_coefficients".into(), Value::Array(coefficients));
    Ok(RunBundle {
        records_csv: records_csv(&run.records),
        summary: Value::Object(summary),
        extra_files: Vec::new(),
    })
}

fn state_tomo(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let imp = config.imperfections()?;
    let channel = conversion_channel(&imp.ppc_in, &imp.fibre);
    let shots = config.run.shots_per_basis;

    let mut states = Vec::new();
    let mut fidelity_sum = 0.0;
    for (idx, basis) in Basis::ALL.into_iter().enumerate() {
        let truth = channel_output(&channel, basis);
        let rho = if config.run.exact {
            mle_reconstruct(&TomographyCounts::from_state_exact(&truth, 1.0))?
        } else {
            let mut rng = SplitMix64::new(derive_seed(seed, idx as u64));
            mle_reconstruct(&TomographyCounts::sample(&truth, shots, &mut rng))?
        };
        let ideal = QubitDensityMatrix::cardinal(basis);
        let fidelity = state_fidelity(&rho, &ideal);
        fidelity_sum += fidelity;
        let r = rho.bloch_vector();
        states.push(json!({
            "input": basis.label(),
            "fidelity_to_ideal": fidelity,
            "bloch": [r[0], r[1], r[2]],
            "density_matrix": serde_json::to_value(rho.to_json())?,
        }));
    }
    let mut summary = base_summary(Scenario::StateTomo, config, seed);
    summary.insert("shots_per_basis".into(), json!(shots));
    summary.insert("states".into(), Value::Array(states));
    summary.insert(
        "mean_fidelity".into(),
        json!(fidelity_sum / Basis::ALL.len() as f64),
    );
    Ok(RunBundle {
        records_csv: records_csv(&[]),
        summary: Value::Object(summary),
        extra_files: Vec::new(),
    })
}

fn process_tomo(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let imp = config.imperfections()?;
    let channel = conversion_channel(&imp.ppc_in, &imp.fibre);
    let shots = config.run.shots_per_basis;
    let inputs = [Basis::Zero, Basis::One, Basis::Plus, Basis::PlusI];

    let outs: Vec<QubitDensityMatrix<f64>> = inputs
        .iter()
        .enumerate()
        .map(|(idx, &basis)| -> Result<QubitDensityMatrix<f64>> {
            let truth = channel_output(&channel, basis);
            if config.run.exact {
                Ok(truth)
            } else {
                let mut rng = SplitMix64::new(derive_seed(seed, idx as u64));
                mle_reconstruct(&TomographyCounts::sample(&truth, shots, &mut rng))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let result = process_tomography(&outs[0], &outs[1], &outs[2], &outs[3]);
    let ident = ProcessMatrix::<f64>::identity();
    let fidelity = process_fidelity(&result.chi, ident.matrix());

    let chi_json = qpic_core::tomography::MatrixJson {
        dims: [4, 4],
        data: result.chi.to_pairs(),
        basis: Some(vec!["I".into(), "X".into(), "Y".into(), "Z".into()]),
    };
    let mut summary = base_summary(Scenario::ProcessTomo, config, seed);
    summary.insert("shots_per_basis".into(), json!(shots));
    summary.insert("process_fidelity_to_identity".into(), json!(fidelity));
    summary.insert(
        "projection_distance".into(),
        json!(result.projection_distance),
    );
    summary.insert("projection_warning".into(), json!(result.warning));
    summary.insert("chi".into(), serde_json::to_value(chi_json)?);
    Ok(RunBundle {
        records_csv: records_csv(&[]),
        summary: Value::Object(summary),
        extra_files: Vec::new(),
    })
}

fn calibrate(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let cal = &config.run.calibration;
    let samples = match &cal.samples_csv {
        Some(path) => samples_from_csv(&std::fs::read_to_string(path)?)?,
        None => {
            let (truth_y, truth_z) = config.calibration_truth();
            synthesize_contour(
                truth_y,
                truth_z,
                cal.grid_points,
                cal.power_span_mw,
                cal.power_span_mw,
                cal.noise,
                seed,
            )
        }
    };
    let map = fit_oe_contour(&samples)?;

    // Replay each looked-up projector through the generating model when the
    // samples are synthetic (the truth is known).
    let replay = if cal.samples_csv.is_none() {
        let (truth_y, truth_z) = config.calibration_truth();
        let mut worst: f64 = 0.0;
        for basis in Basis::ALL {
            let (py, pz) = map.lookup[&basis];
            let settings = qpic_core::components::AnalyzerSettings {
                theta_z: truth_z.phase_at(pz),
                theta_y: truth_y.phase_at(py),
                which: qpic_core::components::AnalyzerSide::A,
            };
            let proj = qpic_core::components::analyzer_projector(&settings, 1);
            let target = qpic_core::qubit::cardinal_state::<f64>(basis);
            let p = (proj[0].conj() * target[0] + proj[1].conj() * target[1]).norm_sqr();
            worst = worst.max((1.0 - p).abs());
        }
        Some(worst)
    } else {
        None
    };

    let mut summary = base_summary(Scenario::Calibrate, config, seed);
    summary.insert("samples".into(), json!(samples.len()));
    summary.insert("calibration_map".into(), map.to_json());
    if let Some(worst) = replay {
        summary.insert("replay_worst_probability_error".into(), json!(worst));
    }
    Ok(RunBundle {
        records_csv: records_csv(&[]),
        summary: Value::Object(summary),
        extra_files: vec![("samples.csv".into(), samples_to_csv(&samples))],
    })
}

fn loss_budget_scenario(config: &ExperimentConfig, seed: u64) -> Result<RunBundle> {
    let budget = loss_budget(config.loss_entries())?;
    let rates = config.rate_model()?;
    let (d1, d2) = config.detectors()?;

    // Selected pair fraction is ¼; arm transmittances and detector
    // efficiencies scale the observed coincidences.
    let selection = 0.25;
    let chip_to_chip_hz = rates.pair_rate_hz
        * selection
        * budget.transmittance(PhotonPath::Signal)
        * budget.transmittance(PhotonPath::Idler)
        * d1.efficiency
        * d2.efficiency;
    // Idler measured at chip A instead: mirror the signal-arm attenuation.
    let post_chip_a_hz = rates.pair_rate_hz
        * selection
        * budget.transmittance(PhotonPath::Signal)
        * budget.transmittance(PhotonPath::Signal)
        * d1.efficiency
        * d2.efficiency;

    let mut summary = base_summary(Scenario::LossBudget, config, seed);
    summary.insert("budget".into(), budget.to_json());
    summary.insert(
        "measured_signal_total_db".into(),
        json!(config.run.measured_signal_total_db),
    );
    summary.insert(
        "measured_idler_total_db".into(),
        json!(config.run.measured_idler_total_db),
    );
    summary.insert("predicted_post_chip_a_pairs_hz".into(), json!(post_chip_a_hz));
    summary.insert(
        "predicted_chip_to_chip_coincidences_hz".into(),
        json!(chip_to_chip_hz),
    );
    Ok(RunBundle {
        records_csv: records_csv(&[]),
        summary: Value::Object(summary),
        extra_files: Vec::new(),
    })
}
