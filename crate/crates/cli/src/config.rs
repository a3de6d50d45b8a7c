//! Experiment configuration: a single JSON document with fail-closed
//! parsing (unknown keys are rejected) and defaults matching the deployed
//! hardware. All angle fields are in units of π — `0.25` means π/4 — to
//! avoid decimal-radian transcription errors.

use serde::{Deserialize, Serialize};

use qpic_core::calibration::{HeaterCalibration, LossEntry, PhotonPath};
use qpic_core::components::{FibreChannel, PPCModel, WavelengthPlan};
use qpic_core::detection::{DetectorModel, RateModel};
use qpic_core::error::{Error, Result};
use qpic_core::experiment::{BellLabel, CountingSetup, Imperfections};
use qpic_core::qubit::euler_unitary;

/// The eight runnable scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Scenario {
    ClassicalFringe,
    QuantumFringe,
    CorrelationFringe,
    Chsh,
    StateTomo,
    ProcessTomo,
    Calibrate,
    LossBudget,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassicalFringe => "classical-fringe",
            Scenario::QuantumFringe => "quantum-fringe",
            Scenario::CorrelationFringe => "correlation-fringe",
            Scenario::Chsh => "chsh",
            Scenario::StateTomo => "state-tomo",
            Scenario::ProcessTomo => "process-tomo",
            Scenario::Calibrate => "calibrate",
            Scenario::LossBudget => "loss-budget",
        }
    }
}

/// Top-level configuration document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Optional scenario pin; must match the CLI subcommand when present.
    pub scenario: Option<Scenario>,
    pub physics: PhysicsConfig,
    pub run: RunConfig,
}

/// Physical parameters. Defaults follow the deployed system: 18 dB PPC
/// extinction with 7.6 dB insertion loss, 50%-efficient detectors with
/// 800 Hz dark counts, and per-arm losses that put ~650 Hz of pairs after
/// chip A and ~18 Hz across both chips.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    /// Bell state targeted by chsh/correlation scenarios.
    pub bell_state: BellState,
    /// Source pair phase, units of π. `null` defers to `bell_state`
    /// (0.5 for phi+, 1.0 for phi-).
    pub theta_ss_pi: Option<f64>,
    /// Phenomenological source strength in (0, 1]; scales the pair rate.
    pub pair_amplitude: f64,
    /// Crosstalk extinction of the sending PPC, dB; `null` means ideal.
    pub ppc_out_extinction_db: Option<f64>,
    pub ppc_out_insertion_db: f64,
    pub ppc_in_extinction_db: Option<f64>,
    pub ppc_in_insertion_db: f64,
    /// Fibre polarisation rotation as Rz·Ry·Rz Euler angles, units of π.
    pub fibre_rotation_pi: [f64; 3],
    /// Residual rotation angle left after compensation, units of π.
    pub fibre_residual_pi: f64,
    /// Seed for the residual rotation's random axis.
    pub fibre_axis_seed: u64,
    /// Werner-type white-noise visibility of the two-qubit state.
    pub noise_visibility: f64,
    /// (signal, idler) detector efficiencies in [0, 1].
    pub detector_efficiency: [f64; 2],
    /// (signal, idler) dark-count rates, Hz.
    pub dark_rate_hz: [f64; 2],
    /// Generated photon-pair rate inside the chip, Hz.
    pub pair_rate_hz: f64,
    /// Per-arm attenuation (dB ≤ 0) outside the post-selection physics.
    pub signal_loss_db: f64,
    pub idler_loss_db: f64,
    /// (pump, signal, idler) wavelengths, nm.
    pub wavelength_nm: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            bell_state: BellState::PhiPlus,
            theta_ss_pi: None,
            pair_amplitude: 1.0,
            ppc_out_extinction_db: Some(18.0),
            ppc_out_insertion_db: 7.6,
            ppc_in_extinction_db: Some(18.0),
            ppc_in_insertion_db: 7.6,
            fibre_rotation_pi: [0.0, 0.0, 0.0],
            fibre_residual_pi: 0.0,
            fibre_axis_seed: 0,
            noise_visibility: 1.0,
            detector_efficiency: [0.5, 0.5],
            dark_rate_hz: [800.0, 800.0],
            pair_rate_hz: 3.8e5,
            signal_loss_db: -7.8,
            idler_loss_db: -23.3,
            wavelength_nm: [1555.5, 1550.7, 1560.3],
        }
    }
}

/// Run parameters: durations, grids, seeds, sampling switches.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Accumulation time per measurement setting, seconds.
    pub duration_s: f64,
    /// Coincidence integration window, seconds.
    pub window_s: f64,
    /// Points per fringe scan.
    pub points: usize,
    /// θ_AY settings for the correlation-fringe scenario, units of π.
    pub theta_ay_grid_pi: Vec<f64>,
    /// Shots per tomography basis.
    pub shots_per_basis: u64,
    /// Bright-light count rate for the classical fringe, Hz.
    pub classical_rate_hz: f64,
    /// Evaluate exact Born probabilities instead of sampling counts.
    pub exact: bool,
    pub calibration: CalibrationConfig,
    /// Loss contributors; `null` selects the built-in itemization.
    pub loss_entries: Option<Vec<LossEntryConfig>>,
    /// Externally measured per-path attenuation bands (dB) reported next
    /// to the itemized sums by the loss-budget scenario.
    pub measured_signal_total_db: [f64; 2],
    pub measured_idler_total_db: [f64; 2],
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration_s: 60.0,
            window_s: 450e-12,
            points: 64,
            theta_ay_grid_pi: vec![0.0, 0.5, 1.0, 1.5],
            shots_per_basis: 10_000,
            classical_rate_hz: 1.0e6,
            exact: false,
            calibration: CalibrationConfig::default(),
            loss_entries: None,
            measured_signal_total_db: [-38.0, -36.0],
            measured_idler_total_db: [-19.0, -18.0],
        }
    }
}

/// Synthetic O-E contour generation and fitting controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Ground-truth heater coefficients for the synthetic contour.
    pub theta0_y_rad: f64,
    pub alpha_y_rad_per_mw: f64,
    pub theta0_z_rad: f64,
    pub alpha_z_rad_per_mw: f64,
    pub grid_points: usize,
    pub power_span_mw: f64,
    /// Multiplicative measurement noise on the contour samples.
    pub noise: f64,
    /// Read samples from this CSV instead of synthesizing them.
    pub samples_csv: Option<String>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            theta0_y_rad: 0.3,
            alpha_y_rad_per_mw: 0.11,
            theta0_z_rad: 0.3,
            alpha_z_rad_per_mw: 0.11,
            grid_points: 12,
            power_span_mw: 60.0,
            noise: 0.0,
            samples_csv: None,
        }
    }
}

/// One loss contributor in the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossEntryConfig {
    pub component: String,
    /// "signal" or "idler".
    pub path: PhotonPath,
    pub db: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("config rejected: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        // Sanity of the wavelength plan and detector/rate models; each
        // constructor enforces its own invariants.
        WavelengthPlan::new(p.wavelength_nm[0], p.wavelength_nm[1], p.wavelength_nm[2])?;
        self.rate_model()?;
        self.detectors()?;
        self.imperfections()?;
        if !(0.0..=1.0).contains(&p.noise_visibility) {
            return Err(Error::Validation(
                "noise_visibility must lie in [0, 1]".into(),
            ));
        }
        if self.run.points < 16 {
            return Err(Error::Validation(
                "fringe scans need at least 16 points (8 per period at k = 2)".into(),
            ));
        }
        Ok(())
    }

    pub fn bell_label(&self) -> BellLabel {
        match self.physics.bell_state {
            BellState::PhiPlus => BellLabel::PhiPlus,
            BellState::PhiMinus => BellLabel::PhiMinus,
        }
    }

    /// Source phase in radians: explicit θ_SS or the targeted Bell state's.
    pub fn theta_ss(&self) -> f64 {
        match self.physics.theta_ss_pi {
            Some(t) => t * std::f64::consts::PI,
            None => self.bell_label().theta_ss::<f64>(),
        }
    }

    pub fn imperfections(&self) -> Result<Imperfections<f64>> {
        let p = &self.physics;
        let pi = std::f64::consts::PI;
        let ppc = |extinction: Option<f64>, insertion: f64| -> Result<PPCModel<f64>> {
            PPCModel::new(extinction.unwrap_or(f64::INFINITY), insertion)
        };
        let rotation = euler_unitary(
            p.fibre_rotation_pi[0] * pi,
            p.fibre_rotation_pi[1] * pi,
            p.fibre_rotation_pi[2] * pi,
        );
        Ok(Imperfections {
            ppc_out: ppc(p.ppc_out_extinction_db, p.ppc_out_insertion_db)?,
            fibre: FibreChannel::new(rotation, p.fibre_residual_pi * pi, p.fibre_axis_seed)?,
            ppc_in: ppc(p.ppc_in_extinction_db, p.ppc_in_insertion_db)?,
            noise_visibility: p.noise_visibility,
        })
    }

    pub fn rate_model(&self) -> Result<RateModel<f64>> {
        let p = &self.physics;
        if p.signal_loss_db > 0.0 || p.idler_loss_db > 0.0 {
            return Err(Error::Validation("arm losses must be ≤ 0 dB".into()));
        }
        if !(0.0 < p.pair_amplitude && p.pair_amplitude <= 1.0) {
            return Err(Error::Validation("pair_amplitude must lie in (0, 1]".into()));
        }
        RateModel::new(
            p.pair_rate_hz * p.pair_amplitude * p.pair_amplitude,
            10f64.powf(p.signal_loss_db / 10.0),
            10f64.powf(p.idler_loss_db / 10.0),
        )
    }

    pub fn detectors(&self) -> Result<(DetectorModel<f64>, DetectorModel<f64>)> {
        let p = &self.physics;
        Ok((
            DetectorModel::new(p.detector_efficiency[0], p.dark_rate_hz[0], "D1")?,
            DetectorModel::new(p.detector_efficiency[1], p.dark_rate_hz[1], "D3")?,
        ))
    }

    pub fn counting_setup(&self) -> Result<CountingSetup<f64>> {
        let (d1, d2) = self.detectors()?;
        Ok(CountingSetup {
            rates: self.rate_model()?,
            detector_1: d1,
            detector_2: d2,
            window_s: self.run.window_s,
            duration_s: self.run.duration_s,
        })
    }

    /// Loss itemization: configured entries or the built-in defaults.
    pub fn loss_entries(&self) -> Vec<LossEntry<f64>> {
        match &self.run.loss_entries {
            Some(entries) => entries
                .iter()
                .map(|e| LossEntry {
                    component: e.component.clone(),
                    path: e.path,
                    db: e.db,
                })
                .collect(),
            None => default_loss_entries(),
        }
    }

    pub fn calibration_truth(&self) -> (HeaterCalibration<f64>, HeaterCalibration<f64>) {
        let c = &self.run.calibration;
        (
            HeaterCalibration {
                theta0: c.theta0_y_rad,
                alpha: c.alpha_y_rad_per_mw,
            },
            HeaterCalibration {
                theta0: c.theta0_z_rad,
                alpha: c.alpha_z_rad_per_mw,
            },
        )
    }
}

/// Built-in per-arm attenuation itemization.
fn default_loss_entries() -> Vec<LossEntry<f64>> {
    let entry = |component: &str, path, db| LossEntry {
        component: component.to_string(),
        path,
        db,
    };
    vec![
        entry("chip-a 1d grating coupler", PhotonPath::Signal, -4.8),
        entry("signal dwdm filter", PhotonPath::Signal, -3.0),
        entry("chip-a 2d grating coupler", PhotonPath::Idler, -7.6),
        entry("fibre link", PhotonPath::Idler, -0.3),
        entry("chip-b 2d grating coupler", PhotonPath::Idler, -7.6),
        entry("chip-b 1d grating coupler", PhotonPath::Idler, -4.8),
        entry("idler dwdm filter", PhotonPath::Idler, -3.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let config = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(config.theta_ss(), std::f64::consts::FRAC_PI_2);
        assert!(config.imperfections().is_ok());
        let rates = config.rate_model().unwrap();
        // Post-chip-A pair coincidences near the observed few hundred Hz.
        let post_chip_a = rates.pair_rate_hz
            * 0.25
            * rates.signal_transmittance
            * rates.signal_transmittance
            * 0.25;
        assert!((500.0..800.0).contains(&post_chip_a), "{post_chip_a}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"physics": {"theta_ss": 0.5}}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(ExperimentConfig::from_json(r#"{"typo_field": 1}"#).is_err());
    }

    #[test]
    fn angles_are_in_units_of_pi() {
        let config =
            ExperimentConfig::from_json(r#"{"physics": {"theta_ss_pi": 0.25}}"#).unwrap();
        assert!((config.theta_ss() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn null_extinction_means_ideal() {
        let config = ExperimentConfig::from_json(
            r#"{"physics": {"ppc_out_extinction_db": null, "ppc_in_extinction_db": null}}"#,
        )
        .unwrap();
        let imp = config.imperfections().unwrap();
        assert_eq!(imp.ppc_out.crosstalk_amplitude(), 0.0);
    }

    #[test]
    fn bad_physics_is_caught() {
        assert!(
            ExperimentConfig::from_json(r#"{"physics": {"noise_visibility": 1.5}}"#).is_err()
        );
        assert!(
            ExperimentConfig::from_json(r#"{"physics": {"signal_loss_db": 3.0}}"#).is_err()
        );
        assert!(
            ExperimentConfig::from_json(r#"{"physics": {"wavelength_nm": [1555.5, 1550.7, 1900.0]}}"#)
                .is_err()
        );
    }
}
