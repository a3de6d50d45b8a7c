//! Heater calibration — fitting optical-vs-electrical-power contours and
//! inverting them to per-projector power settings — plus dB loss budgeting.
//!
//! The thermo-optic model is affine in electrical power: θ = θ₀ + α·P.
//! Calibration light is the anti-diagonal state (|0⟩ − |1⟩)/√2 and the
//! recorded observable is the analyzer's port-1 power, so the contour is
//! p(P_Y, P_Z) = ½·(1 + sin θ_Y · cos θ_Z). That observable is invariant
//! under shifting both offsets by π, so fitted offsets are canonicalized to
//! θ₀_Y ∈ [0, π).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Value, json};

use crate::components::{AnalyzerSettings, AnalyzerSide, analyzer_projector, projector_settings};
use crate::error::{Error, Result};
use crate::optimize::levenberg_marquardt;
use crate::qubit::{Basis, cardinal_state};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Affine phase-vs-power coefficients for one heater.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HeaterCalibration<T: Real> {
    /// Phase at zero electrical power, radians.
    pub theta0: T,
    /// Radians per mW; positive by convention.
    pub alpha: T,
}

impl<T: Real> HeaterCalibration<T> {
    pub fn phase_at(&self, power_mw: T) -> T {
        self.theta0 + self.alpha * power_mw
    }
}

/// One contour sample: heater powers in mW and normalized optical power.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalibrationSample<T: Real> {
    pub p_y_mw: T,
    pub p_z_mw: T,
    pub power_norm: T,
}

/// Fitted calibration: per-heater coefficients, the fit residual, and the
/// power lookup for the six cardinal projectors.
#[derive(Debug, Clone)]
pub struct CalibrationMap<T: Real> {
    pub heater_y: HeaterCalibration<T>,
    pub heater_z: HeaterCalibration<T>,
    pub residual_rms: T,
    /// Basis → (P_Y, P_Z) in mW.
    pub lookup: BTreeMap<Basis, (T, T)>,
    /// Optional hardware power ceiling for inversions.
    pub max_power_mw: Option<T>,
}

/// Analyzer port-1 power for the anti-diagonal calibration input, computed
/// through the projector algebra.
pub fn oe_model_power<T: Real>(theta_z: T, theta_y: T) -> T {
    let settings = AnalyzerSettings {
        theta_z,
        theta_y,
        which: AnalyzerSide::A,
    };
    let proj = analyzer_projector(&settings, 1);
    let h = T::half().sqrt();
    let inner = proj[0].conj().scale(h) - proj[1].conj().scale(h);
    inner.norm_sqr()
}

fn contour_residuals<T: Real>(params: &[T], samples: &[CalibrationSample<T>]) -> Vec<T> {
    let y = HeaterCalibration {
        theta0: params[0],
        alpha: params[1],
    };
    let z = HeaterCalibration {
        theta0: params[2],
        alpha: params[3],
    };
    samples
        .iter()
        .map(|s| {
            // Closed form of the projector overlap; keeps the hot loop cheap.
            let ty = y.phase_at(s.p_y_mw);
            let tz = z.phase_at(s.p_z_mw);
            T::half() * (T::one() + ty.sin() * tz.cos()) - s.power_norm
        })
        .collect()
}

fn span<T: Real>(values: impl Iterator<Item = T>) -> (T, T, usize) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut distinct: Vec<T> = Vec::new();
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        if !distinct.iter().any(|d| (*d - v).abs() < T::of(1e-9)) {
            distinct.push(v);
        }
    }
    (lo, hi - lo, distinct.len())
}

/// Least-squares fit of the O-E contour model θ = θ₀ + α·P per heater.
///
/// Multi-start Levenberg-Marquardt over a grid of offset/slope seeds;
/// deterministic for a given sample set. Fails when the residual RMS
/// exceeds 0.05.
pub fn fit_oe_contour<T: Real>(samples: &[CalibrationSample<T>]) -> Result<CalibrationMap<T>> {
    let (_, span_y, distinct_y) = span(samples.iter().map(|s| s.p_y_mw));
    let (_, span_z, distinct_z) = span(samples.iter().map(|s| s.p_z_mw));
    if distinct_y < 8 || distinct_z < 8 {
        return Err(Error::Input(format!(
            "calibration grid must be at least 8×8 (got {distinct_y}×{distinct_z})"
        )));
    }
    if span_y <= T::zero() || span_z <= T::zero() {
        return Err(Error::Input("calibration grid does not span any power".into()));
    }

    // Seed slopes assuming the grid spans one to two full phase turns.
    let alpha_seeds = [T::tau() / span_y, T::tau() / (span_y * T::two())];
    let offset_seeds = [
        T::zero(),
        T::pi() * T::half(),
        T::pi(),
        T::pi() + T::pi() * T::half(),
    ];

    let mut best: Option<(T, Vec<T>)> = None;
    for &a_y in &alpha_seeds {
        let a_z = a_y * span_y / span_z;
        for &t_y in &offset_seeds {
            for &t_z in &offset_seeds {
                let start = [t_y, a_y, t_z, a_z];
                let fit = levenberg_marquardt(|p| contour_residuals(p, samples), &start, 120);
                if best.as_ref().is_none_or(|(cost, _)| fit.objective < *cost) {
                    best = Some((fit.objective, fit.params));
                }
            }
        }
    }
    let (cost, mut params) = best.expect("at least one start ran");

    // Canonical branch: positive slopes, θ₀_Y in [0, π).
    // sin is invariant under (θ₀, α) → (π − θ₀, −α); cos under (−θ₀, −α).
    if params[1] < T::zero() {
        params[0] = T::pi() - params[0];
        params[1] = -params[1];
    }
    if params[3] < T::zero() {
        params[2] = -params[2];
        params[3] = -params[3];
    }
    let wrap = |t: T| {
        let mut x = t % T::tau();
        if x < T::zero() {
            x = x + T::tau();
        }
        x
    };
    params[0] = wrap(params[0]);
    params[2] = wrap(params[2]);
    // The contour cannot distinguish shifting both offsets by π.
    if params[0] >= T::pi() {
        params[0] = params[0] - T::pi();
        params[2] = wrap(params[2] + T::pi());
    }

    let residual_rms = (cost / T::of(samples.len() as f64)).sqrt();
    if residual_rms > T::of(0.05) {
        let worst = contour_residuals(&params, samples)
            .iter()
            .fold(T::zero(), |m, r| m.max(r.abs()));
        return Err(Error::FitFailure {
            reason: format!(
                "O-E contour fit did not converge (worst residual {worst:?})"
            ),
            residual_rms: residual_rms.to_f64().unwrap_or(f64::NAN),
        });
    }

    let heater_y = HeaterCalibration {
        theta0: params[0],
        alpha: params[1],
    };
    let heater_z = HeaterCalibration {
        theta0: params[2],
        alpha: params[3],
    };
    // Enforce the declared grid coverage: ≥ 2π of phase per heater.
    for (heater, span_axis) in [(heater_y, span_y), (heater_z, span_z)] {
        if heater.alpha * span_axis < T::tau() * T::of(0.999) {
            return Err(Error::Input(format!(
                "calibration grid spans {:?} rad on one heater; at least 2π required",
                heater.alpha * span_axis
            )));
        }
    }

    let mut map = CalibrationMap {
        heater_y,
        heater_z,
        residual_rms,
        lookup: BTreeMap::new(),
        max_power_mw: None,
    };
    for basis in Basis::ALL {
        let powers = powers_for_state(&map, basis)?;
        map.lookup.insert(basis, powers);
    }
    Ok(map)
}

/// Smallest non-negative power landing the heater phase on `target`
/// (mod 2π).
fn invert_power<T: Real>(heater: &HeaterCalibration<T>, target: T) -> T {
    let mut delta = (target - heater.theta0) % T::tau();
    if delta < T::zero() {
        delta = delta + T::tau();
    }
    delta / heater.alpha
}

/// Electrical powers steering the analyzer onto a cardinal projector.
/// Selects the minimal-power branch; errors if a hardware ceiling is set
/// and exceeded.
pub fn powers_for_state<T: Real>(map: &CalibrationMap<T>, target: Basis) -> Result<(T, T)> {
    if map.heater_y.alpha <= T::zero() || map.heater_z.alpha <= T::zero() {
        return Err(Error::Validation("calibration slopes must be positive".into()));
    }
    let (theta_z, theta_y) = projector_settings::<T>(target);
    let p_y = invert_power(&map.heater_y, theta_y);
    let p_z = invert_power(&map.heater_z, theta_z);
    if let Some(max) = map.max_power_mw {
        if p_y > max {
            return Err(Error::Range {
                required_phase_rad: theta_y.to_f64().unwrap_or(f64::NAN),
            });
        }
        if p_z > max {
            return Err(Error::Range {
                required_phase_rad: theta_z.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    // Replay through the analyzer model: the projector at these powers must
    // overlap the target state to within 1e-3 in probability.
    let settings = AnalyzerSettings {
        theta_z: map.heater_z.phase_at(p_z),
        theta_y: map.heater_y.phase_at(p_y),
        which: AnalyzerSide::A,
    };
    let proj = analyzer_projector(&settings, 1);
    let state = cardinal_state::<T>(target);
    let overlap = (proj[0].conj() * state[0] + proj[1].conj() * state[1]).norm_sqr();
    if (T::one() - overlap).abs() > T::of(1e-3) {
        return Err(Error::Validation(format!(
            "power inversion for {target} replays with probability error {:?}",
            T::one() - overlap
        )));
    }
    Ok((p_y, p_z))
}

/// Synthetic contour generator: the forward model evaluated on a uniform
/// grid, with optional multiplicative noise. Grid and noise are
/// deterministic for a given seed.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_contour<T: Real>(
    heater_y: HeaterCalibration<T>,
    heater_z: HeaterCalibration<T>,
    grid_points: usize,
    power_span_y_mw: T,
    power_span_z_mw: T,
    multiplicative_noise: T,
    seed: u64,
) -> Vec<CalibrationSample<T>> {
    let mut rng = SplitMix64::new(seed);
    let mut samples = Vec::with_capacity(grid_points * grid_points);
    for iy in 0..grid_points {
        for iz in 0..grid_points {
            let p_y = power_span_y_mw * T::of(iy as f64) / T::of((grid_points - 1) as f64);
            let p_z = power_span_z_mw * T::of(iz as f64) / T::of((grid_points - 1) as f64);
            let mut value = oe_model_power(heater_z.phase_at(p_z), heater_y.phase_at(p_y));
            if multiplicative_noise > T::zero() {
                value = value * (T::one() + multiplicative_noise * rng.normal());
            }
            samples.push(CalibrationSample {
                p_y_mw: p_y,
                p_z_mw: p_z,
                power_norm: value,
            });
        }
    }
    samples
}

/// CSV with header `p_y_mw,p_z_mw,power_norm`.
pub fn samples_to_csv<T: Real>(samples: &[CalibrationSample<T>]) -> String {
    let mut out = String::from("p_y_mw,p_z_mw,power_norm\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.p_y_mw, s.p_z_mw, s.power_norm));
    }
    out
}

pub fn samples_from_csv<T: Real>(text: &str) -> Result<Vec<CalibrationSample<T>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("empty calibration CSV".into()))?;
    if header.trim() != "p_y_mw,p_z_mw,power_norm" {
        return Err(Error::Input(format!(
            "unexpected calibration CSV header `{header}`"
        )));
    }
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Input(format!(
                "calibration CSV line {}: expected 3 fields",
                idx + 2
            )));
        }
        let parse = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .map(T::of)
                .map_err(|e| Error::Input(format!("calibration CSV line {}: {e}", idx + 2)))
        };
        samples.push(CalibrationSample {
            p_y_mw: parse(fields[0])?,
            p_z_mw: parse(fields[1])?,
            power_norm: parse(fields[2])?,
        });
    }
    Ok(samples)
}

impl<T: Real> CalibrationMap<T> {
    pub fn to_json(&self) -> Value {
        let lookup: BTreeMap<String, [f64; 2]> = self
            .lookup
            .iter()
            .map(|(b, (py, pz))| {
                (
                    b.label().to_string(),
                    [py.to_f64().unwrap_or(f64::NAN), pz.to_f64().unwrap_or(f64::NAN)],
                )
            })
            .collect();
        json!({
            "model": "theta = theta0 + alpha * power_mw",
            "heater_y": {
                "theta0_rad": self.heater_y.theta0.to_f64(),
                "alpha_rad_per_mw": self.heater_y.alpha.to_f64(),
            },
            "heater_z": {
                "theta0_rad": self.heater_z.theta0.to_f64(),
                "alpha_rad_per_mw": self.heater_z.alpha.to_f64(),
            },
            "residual_rms": self.residual_rms.to_f64(),
            "projector_powers_mw": lookup,
        })
    }
}

/// Photon path a loss entry applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonPath {
    Signal,
    Idler,
}

/// One attenuation contributor; dB values are ≤ 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossEntry<T: Real> {
    pub component: String,
    pub path: PhotonPath,
    pub db: T,
}

/// Itemized attenuation with exact per-path totals.
#[derive(Debug, Clone)]
pub struct LossBudget<T: Real> {
    pub entries: Vec<LossEntry<T>>,
}

impl<T: Real> LossBudget<T> {
    pub fn total_db(&self, path: PhotonPath) -> T {
        self.entries
            .iter()
            .filter(|e| e.path == path)
            .map(|e| e.db)
            .sum()
    }

    /// Linear power transmittance 10^(dB/10) of one path.
    pub fn transmittance(&self, path: PhotonPath) -> T {
        T::of(10.0).powf(self.total_db(path) / T::of(10.0))
    }

    pub fn to_json(&self) -> Value {
        let items: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "component": e.component,
                    "path": match e.path { PhotonPath::Signal => "signal", PhotonPath::Idler => "idler" },
                    "db": e.db.to_f64(),
                })
            })
            .collect();
        json!({
            "entries": items,
            "signal_total_db": self.total_db(PhotonPath::Signal).to_f64(),
            "idler_total_db": self.total_db(PhotonPath::Idler).to_f64(),
            "signal_transmittance": self.transmittance(PhotonPath::Signal).to_f64(),
            "idler_transmittance": self.transmittance(PhotonPath::Idler).to_f64(),
        })
    }
}

/// Validate and assemble a loss budget; positive dB entries are rejected.
pub fn loss_budget<T: Real>(entries: Vec<LossEntry<T>>) -> Result<LossBudget<T>> {
    for e in &entries {
        if e.db > T::zero() {
            return Err(Error::Validation(format!(
                "loss entry `{}` has positive dB {:?}",
                e.component, e.db
            )));
        }
    }
    Ok(LossBudget { entries })
}
