//! Photon counting: Born-rule outcome probabilities at the detection plane,
//! Poissonian count sampling with detector efficiency and dark counts,
//! and accidental-coincidence estimation/subtraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhotonicState;
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Single-photon detector: efficiency and dark-count rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorModel<T: Real> {
    pub efficiency: T,
    pub dark_rate_hz: T,
    pub label: String,
}

impl<T: Real> DetectorModel<T> {
    pub fn new(efficiency: T, dark_rate_hz: T, label: impl Into<String>) -> Result<Self> {
        if efficiency < T::zero() || efficiency > T::one() {
            return Err(Error::Validation("detector efficiency must be in [0,1]".into()));
        }
        if dark_rate_hz < T::zero() {
            return Err(Error::Validation("dark rate must be ≥ 0 Hz".into()));
        }
        Ok(Self {
            efficiency,
            dark_rate_hz,
            label: label.into(),
        })
    }

    /// The deployed detectors: ~50% efficiency, ~800 Hz dark counts.
    pub fn default_snspd(label: impl Into<String>) -> Self {
        Self {
            efficiency: T::half(),
            dark_rate_hz: T::of(800.0),
            label: label.into(),
        }
    }
}

/// Pair-generation rate and the per-arm transmittances that scale it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateModel<T: Real> {
    pub pair_rate_hz: T,
    pub signal_transmittance: T,
    pub idler_transmittance: T,
}

impl<T: Real> RateModel<T> {
    pub fn new(pair_rate_hz: T, signal_transmittance: T, idler_transmittance: T) -> Result<Self> {
        if pair_rate_hz < T::zero() {
            return Err(Error::Validation("pair rate must be ≥ 0 Hz".into()));
        }
        for t in [signal_transmittance, idler_transmittance] {
            if t < T::zero() || t > T::one() {
                return Err(Error::Validation("transmittance must be in [0,1]".into()));
            }
        }
        Ok(Self {
            pair_rate_hz,
            signal_transmittance,
            idler_transmittance,
        })
    }
}

/// Where a mode's photons end up: a named detector or a filtered sink.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    Detector(String),
    /// Blocked by a wavelength filter or otherwise discarded.
    Sink,
}

/// Mode label → channel map covering the final state's support.
#[derive(Debug, Clone, Default)]
pub struct DetectorAssignment {
    channels: BTreeMap<String, Channel>,
}

impl DetectorAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn detector(mut self, mode: &str, name: &str) -> Self {
        self.channels
            .insert(mode.into(), Channel::Detector(name.into()));
        self
    }

    pub fn sink(mut self, mode: &str) -> Self {
        self.channels.insert(mode.into(), Channel::Sink);
        self
    }

    pub fn channel_of(&self, mode: &str) -> Option<&Channel> {
        self.channels.get(mode)
    }
}

/// A joint detection outcome: the sorted multiset of detectors that fired
/// (sinks swallow their photons silently).
pub type Outcome = Vec<String>;

/// Born-rule probabilities of every detector-multiset outcome.
///
/// Every mode carrying more than [`Real::tol_leakage`] probability must be
/// assigned to a detector or an explicit sink, otherwise the detection
/// plane does not cover the state and a contract violation is returned.
pub fn outcome_probabilities<T: Real>(
    state: &PhotonicState<T>,
    assignment: &DetectorAssignment,
) -> Result<BTreeMap<Outcome, T>> {
    // Coverage check: amplitude on unassigned modes.
    for label in state.modes().labels() {
        if assignment.channel_of(label).is_none() {
            let weight = state.mean_photons_at(label)?;
            if weight > T::tol_leakage() {
                return Err(Error::Contract(format!(
                    "mode `{label}` carries probability {weight:e} but has no channel"
                )));
            }
        }
    }

    let labels = state.modes().labels().to_vec();
    let mut outcomes: BTreeMap<Outcome, T> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let mut fired: Vec<String> = Vec::new();
        for (idx, &n) in occ.iter().enumerate() {
            if n == 0 {
                continue;
            }
            match assignment.channel_of(&labels[idx]) {
                Some(Channel::Detector(name)) => {
                    for _ in 0..n {
                        fired.push(name.clone());
                    }
                }
                Some(Channel::Sink) | None => {}
            }
        }
        fired.sort();
        let entry = outcomes.entry(fired).or_insert_with(T::zero);
        *entry = *entry + amp.norm_sqr();
    }
    Ok(outcomes)
}

/// Probability of the exact coincidence `detectors` (sorted multiset).
pub fn coincidence_probability<T: Real>(
    outcomes: &BTreeMap<Outcome, T>,
    detectors: &[&str],
) -> T {
    let mut key: Vec<String> = detectors.iter().map(|s| s.to_string()).collect();
    key.sort();
    outcomes.get(&key).copied().unwrap_or_else(T::zero)
}

/// Marginal probability that `detector` fires (any multiplicity, any
/// partners).
pub fn singles_probability<T: Real>(outcomes: &BTreeMap<Outcome, T>, detector: &str) -> T {
    outcomes
        .iter()
        .filter(|(key, _)| key.iter().any(|d| d == detector))
        .map(|(_, p)| *p)
        .sum()
}

/// Analyzer heater settings attached to every count record, in radians.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecordSettings<T: Real> {
    pub theta_ay: T,
    pub theta_az: T,
    pub theta_by: T,
    pub theta_bz: T,
    pub theta_ss: T,
}

impl<T: Real> RecordSettings<T> {
    pub fn zero() -> Self {
        Self {
            theta_ay: T::zero(),
            theta_az: T::zero(),
            theta_by: T::zero(),
            theta_bz: T::zero(),
            theta_ss: T::zero(),
        }
    }
}

/// One accumulation window's worth of counts, with the accidental estimate
/// already folded in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountRecord<T: Real> {
    pub settings: RecordSettings<T>,
    pub singles_1: u64,
    pub singles_2: u64,
    pub coincidences_raw: u64,
    pub accidentals_estimate: T,
    pub coincidences_corrected: T,
    /// √(raw + σ²_accidental): Poissonian error of the corrected counts.
    pub sigma: T,
    pub window_s: T,
    pub duration_s: T,
    /// Accidental subtraction applied (singles-product estimator).
    pub corrected: bool,
    /// Corrected value was clamped at the −3σ_accidental floor.
    pub clamped: bool,
}

impl<T: Real> CountRecord<T> {
    /// CSV header for record tables.
    pub const CSV_HEADER: &'static str = "theta_ay,theta_az,theta_by,theta_bz,theta_ss,singles1,singles2,coinc_raw,accidentals,coinc_corrected,sigma,window_s,duration_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.settings.theta_ay,
            self.settings.theta_az,
            self.settings.theta_by,
            self.settings.theta_bz,
            self.settings.theta_ss,
            self.singles_1,
            self.singles_2,
            self.coincidences_raw,
            self.accidentals_estimate,
            self.coincidences_corrected,
            self.sigma,
            self.window_s,
            self.duration_s,
        )
    }
}

/// Expected accidental coincidences from uncorrelated singles:
/// rate₁ · rate₂ · window · duration.
pub fn estimate_accidentals<T: Real>(
    singles_1_hz: T,
    singles_2_hz: T,
    window_s: T,
    duration_s: T,
) -> T {
    singles_1_hz * singles_2_hz * window_s * duration_s
}

/// Probabilities feeding one sampled record: the selected coincidence and
/// the two singles marginals (photon part only, before efficiency).
#[derive(Debug, Clone, Copy)]
pub struct CoincidenceProbabilities<T: Real> {
    pub coincidence: T,
    pub single_1: T,
    pub single_2: T,
}

/// Sample one count record.
///
/// True coincidences are Poisson with mean
/// pair_rate · p_coinc · t_s · t_i · η₁ · η₂ · duration; singles include
/// dark counts; accidentals ride on the raw coincidences via the
/// singles-product rate and are subtracted back out using the sampled
/// singles. Deterministic for a fixed seed.
pub fn sample_counts<T: Real>(
    settings: RecordSettings<T>,
    probabilities: CoincidenceProbabilities<T>,
    rates: &RateModel<T>,
    detectors: (&DetectorModel<T>, &DetectorModel<T>),
    window_s: T,
    duration_s: T,
    seed: u64,
) -> Result<CountRecord<T>> {
    if duration_s <= T::zero() || window_s <= T::zero() {
        return Err(Error::Validation(
            "window and duration must be positive".into(),
        ));
    }
    let (d1, d2) = detectors;
    let mut rng = SplitMix64::new(seed);

    let singles_1_rate =
        rates.pair_rate_hz * probabilities.single_1 * rates.signal_transmittance * d1.efficiency
            + d1.dark_rate_hz;
    let singles_2_rate =
        rates.pair_rate_hz * probabilities.single_2 * rates.idler_transmittance * d2.efficiency
            + d2.dark_rate_hz;
    let true_coinc_rate = rates.pair_rate_hz
        * probabilities.coincidence
        * rates.signal_transmittance
        * rates.idler_transmittance
        * d1.efficiency
        * d2.efficiency;
    let accidental_rate = singles_1_rate * singles_2_rate * window_s;

    let singles_1 = rng.sample_poisson(singles_1_rate * duration_s);
    let singles_2 = rng.sample_poisson(singles_2_rate * duration_s);
    let raw = rng.sample_poisson((true_coinc_rate + accidental_rate) * duration_s);

    let s1 = T::of(singles_1 as f64);
    let s2 = T::of(singles_2 as f64);
    let estimate = if duration_s > T::zero() {
        // (s1/T)·(s2/T)·w·T = s1·s2·w/T, from the measured singles.
        s1 * s2 * window_s / duration_s
    } else {
        T::zero()
    };
    // Poisson error of the estimate through the product.
    let sigma_acc = if s1 > T::zero() && s2 > T::zero() {
        estimate * (T::one() / s1 + T::one() / s2).sqrt()
    } else {
        T::zero()
    };

    let mut corrected = T::of(raw as f64) - estimate;
    let floor = -(T::of(3.0) * sigma_acc);
    let clamped = corrected < floor;
    if clamped {
        corrected = floor;
    }
    let sigma = (T::of(raw as f64) + sigma_acc * sigma_acc).sqrt();

    Ok(CountRecord {
        settings,
        singles_1,
        singles_2,
        coincidences_raw: raw,
        accidentals_estimate: estimate,
        coincidences_corrected: corrected,
        sigma,
        window_s,
        duration_s,
        corrected: true,
        clamped,
    })
}
