//! Fringe fitting and visibility extraction, CHSH correlation coefficients
//! and the S parameter, all with Poissonian error propagation.

use serde_json::{Value, json};

use crate::detection::CountRecord;
use crate::error::{Error, Result};
use crate::optimize::solve_dense;
use crate::scalar::Real;

/// One fringe sample: scan angle, measured value, Poissonian error.
#[derive(Debug, Clone, Copy)]
pub struct FringePoint<T: Real> {
    pub angle: T,
    pub value: T,
    pub sigma: T,
}

/// Which column of a count record a fringe reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FringeChannel {
    CorrectedCoincidences,
    Singles1,
}

/// A fringe scan over one angle variable.
#[derive(Debug, Clone)]
pub struct FringeDataset<T: Real> {
    pub scan_variable: String,
    pub points: Vec<FringePoint<T>>,
}

impl<T: Real> FringeDataset<T> {
    pub fn from_points(scan_variable: impl Into<String>, points: Vec<FringePoint<T>>) -> Self {
        Self {
            scan_variable: scan_variable.into(),
            points,
        }
    }

    /// Exact (noise-free) fringe values; σ = 0 selects an unweighted fit.
    pub fn from_values(
        scan_variable: impl Into<String>,
        values: impl IntoIterator<Item = (T, T)>,
    ) -> Self {
        Self::from_points(
            scan_variable,
            values
                .into_iter()
                .map(|(angle, value)| FringePoint {
                    angle,
                    value,
                    sigma: T::zero(),
                })
                .collect(),
        )
    }

    /// Count records as fringe points. Fit weights come from the Poisson
    /// σ, floored at one count so empty bins cannot dominate the fit.
    pub fn from_records(
        scan_variable: impl Into<String>,
        records: &[(T, CountRecord<T>)],
        channel: FringeChannel,
    ) -> Self {
        let points = records
            .iter()
            .map(|(angle, record)| match channel {
                FringeChannel::CorrectedCoincidences => FringePoint {
                    angle: *angle,
                    value: record.coincidences_corrected,
                    sigma: record.sigma.max(T::one()),
                },
                FringeChannel::Singles1 => FringePoint {
                    angle: *angle,
                    value: T::of(record.singles_1 as f64),
                    sigma: T::of(record.singles_1 as f64).sqrt().max(T::one()),
                },
            })
            .collect();
        Self::from_points(scan_variable, points)
    }
}

/// Fitted fringe y = floor + amplitude·cos(k·θ + phase), with parameter
/// errors from the weighted least-squares covariance.
#[derive(Debug, Clone)]
pub struct FringeFit<T: Real> {
    pub frequency: u32,
    pub floor: T,
    pub amplitude: T,
    pub phase: T,
    pub sigma_floor: T,
    pub sigma_amplitude: T,
    pub sigma_phase: T,
    /// Covariance of (floor, amplitude) for downstream propagation.
    pub cov_floor_amplitude: [[T; 2]; 2],
    pub chi2: T,
    pub dof: usize,
}

impl<T: Real> FringeFit<T> {
    pub fn chi2_per_dof(&self) -> T {
        if self.dof > 0 {
            self.chi2 / T::of(self.dof as f64)
        } else {
            T::zero()
        }
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "model": "floor + amplitude*cos(k*theta + phase)",
            "k": self.frequency,
            "floor": f(self.floor),
            "amplitude": f(self.amplitude),
            "phase_rad": f(self.phase),
            "sigma_floor": f(self.sigma_floor),
            "sigma_amplitude": f(self.sigma_amplitude),
            "sigma_phase": f(self.sigma_phase),
            "chi2": f(self.chi2),
            "dof": self.dof,
        })
    }
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Fit the fringe at a fixed frequency multiplier.
///
/// The cos(kθ+φ) model is solved exactly in the linear basis
/// [1, cos kθ, sin kθ] by weighted least squares, which needs no starting
/// phase; the covariance is mapped back onto (floor, amplitude, phase).
pub fn fit_fringe_fixed_k<T: Real>(dataset: &FringeDataset<T>, k: u32) -> Result<FringeFit<T>> {
    let n = dataset.points.len();
    if n < 4 {
        return Err(Error::Input(format!("fringe fit needs ≥ 4 points, got {n}")));
    }
    let angles: Vec<T> = dataset.points.iter().map(|p| p.angle).collect();
    let span = angles
        .iter()
        .fold(T::neg_infinity(), |m, a| m.max(*a))
        - angles.iter().fold(T::infinity(), |m, a| m.min(*a));
    let periods = (span * T::of(k as f64) / T::tau()).max(T::one());
    if T::of(n as f64) < T::of(8.0) * periods - T::of(1e-9) {
        return Err(Error::Input(format!(
            "fringe sampling too sparse: {n} points over {periods:?} periods (need ≥ 8/period)"
        )));
    }

    let weighted = dataset.points.iter().all(|p| p.sigma > T::zero());
    let weight = |p: &FringePoint<T>| {
        if weighted {
            T::one() / (p.sigma * p.sigma)
        } else {
            T::one()
        }
    };

    // Normal equations for beta = (a, c, d) in y = a + c·cos(kθ) + d·sin(kθ).
    let mut xtx = vec![vec![T::zero(); 3]; 3];
    let mut xty = vec![T::zero(); 3];
    for p in &dataset.points {
        let kt = p.angle * T::of(k as f64);
        let row = [T::one(), kt.cos(), kt.sin()];
        let w = weight(p);
        for i in 0..3 {
            xty[i] = xty[i] + w * row[i] * p.value;
            for j in 0..3 {
                xtx[i][j] = xtx[i][j] + w * row[i] * row[j];
            }
        }
    }
    let beta = solve_dense(&xtx, &xty).ok_or_else(|| Error::FitFailure {
        reason: "singular normal equations (degenerate angle grid)".into(),
        residual_rms: f64::NAN,
    })?;
    let (a, c_coef, d_coef) = (beta[0], beta[1], beta[2]);
    let b = (c_coef * c_coef + d_coef * d_coef).sqrt();
    let phi = (-d_coef).atan2(c_coef);

    // Residuals and chi².
    let mut chi2 = T::zero();
    let mut rss = T::zero();
    for p in &dataset.points {
        let kt = p.angle * T::of(k as f64);
        let model = a + c_coef * kt.cos() + d_coef * kt.sin();
        let r = p.value - model;
        rss = rss + r * r;
        if weighted {
            chi2 = chi2 + (r / p.sigma) * (r / p.sigma);
        }
    }
    let dof = n.saturating_sub(3);
    if !weighted {
        chi2 = rss;
    }

    // Covariance = (XᵀWX)⁻¹, rescaled by RSS/dof when unweighted.
    let mut cov = vec![vec![T::zero(); 3]; 3];
    for j in 0..3 {
        let mut e = vec![T::zero(); 3];
        e[j] = T::one();
        let col = solve_dense(&xtx, &e).ok_or_else(|| Error::FitFailure {
            reason: "singular covariance".into(),
            residual_rms: f(rss.sqrt()),
        })?;
        for i in 0..3 {
            cov[i][j] = col[i];
        }
    }
    if !weighted && dof > 0 {
        let scale = rss / T::of(dof as f64);
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * scale;
            }
        }
    }

    // Map (a, c, d) covariance onto (a, b) and φ by the delta method.
    let safe_b = b.max(T::of(1e-300));
    let jac_b = [T::zero(), c_coef / safe_b, d_coef / safe_b];
    let jac_phi = [T::zero(), d_coef / (safe_b * safe_b), -c_coef / (safe_b * safe_b)];
    let quad = |u: &[T; 3], v: &[T; 3]| {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + u[i] * cov[i][j] * v[j];
            }
        }
        acc
    };
    let jac_a = [T::one(), T::zero(), T::zero()];
    let var_a = quad(&jac_a, &jac_a).max(T::zero());
    let var_b = quad(&jac_b, &jac_b).max(T::zero());
    let cov_ab = quad(&jac_a, &jac_b);
    let var_phi = quad(&jac_phi, &jac_phi).max(T::zero());

    Ok(FringeFit {
        frequency: k,
        floor: a,
        amplitude: b,
        phase: phi,
        sigma_floor: var_a.sqrt(),
        sigma_amplitude: var_b.sqrt(),
        sigma_phase: var_phi.sqrt(),
        cov_floor_amplitude: [[var_a, cov_ab], [cov_ab, var_b]],
        chi2,
        dof,
    })
}

/// Fit with the frequency multiplier restricted to {1, 2}, keeping the
/// lower-χ² model.
pub fn fit_fringe<T: Real>(dataset: &FringeDataset<T>) -> Result<FringeFit<T>> {
    let fit1 = fit_fringe_fixed_k(dataset, 1);
    let fit2 = fit_fringe_fixed_k(dataset, 2);
    match (fit1, fit2) {
        (Ok(a), Ok(b)) => Ok(if a.chi2 <= b.chi2 { a } else { b }),
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Fringe visibility V = 1 − N_min/N_max from the fitted extrema
/// N_max = floor + amplitude, N_min = floor − amplitude, with σ_V from the
/// fit covariance. Also reports the raw sample min/max estimate.
#[derive(Debug, Clone, Copy)]
pub struct Visibility<T: Real> {
    pub value: T,
    pub sigma: T,
    pub raw_value: T,
}

pub fn visibility<T: Real>(
    dataset: &FringeDataset<T>,
    fit: &FringeFit<T>,
) -> Result<Visibility<T>> {
    let (a, b) = (fit.floor, fit.amplitude);
    let n_max = a + b;
    if n_max <= T::zero() {
        return Err(Error::FitFailure {
            reason: "fitted fringe maximum is not positive".into(),
            residual_rms: f(fit.chi2.sqrt()),
        });
    }
    let value = T::two() * b / n_max;
    // Delta method through V(a, b) = 2b/(a+b).
    let ga = -(T::two() * b) / (n_max * n_max);
    let gb = T::two() * a / (n_max * n_max);
    let cov = fit.cov_floor_amplitude;
    let var = (ga * ga * cov[0][0] + T::two() * ga * gb * cov[0][1] + gb * gb * cov[1][1])
        .max(T::zero());

    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for p in &dataset.points {
        lo = lo.min(p.value);
        hi = hi.max(p.value);
    }
    let raw_value = if hi > T::zero() {
        T::one() - lo / hi
    } else {
        T::zero()
    };

    Ok(Visibility {
        value,
        sigma: var.sqrt(),
        raw_value,
    })
}

/// Normalized correlation ⟨A(θ_AY), B(θ_BY)⟩ built from four coincidence
/// records at (θ_AY,θ_BY), (θ_AY+π,θ_BY+π), (θ_AY,θ_BY+π), (θ_AY+π,θ_BY).
#[derive(Debug, Clone)]
pub struct CorrelationCoefficient<T: Real> {
    pub value: T,
    pub sigma: T,
    pub records: [CountRecord<T>; 4],
}

pub fn correlation_coefficient<T: Real>(
    records: [CountRecord<T>; 4],
) -> Result<CorrelationCoefficient<T>> {
    let duration = records[0].duration_s;
    for r in &records {
        if r.settings.theta_az.abs() > T::of(1e-9) || r.settings.theta_bz.abs() > T::of(1e-9) {
            return Err(Error::Input(
                "correlation records must be taken at θ_AZ = θ_BZ = 0".into(),
            ));
        }
        if (r.duration_s - duration).abs() > T::of(1e-12) {
            return Err(Error::Input(
                "correlation records must share one duration".into(),
            ));
        }
    }
    let counts: Vec<T> = records.iter().map(|r| r.coincidences_corrected).collect();
    let plus = counts[0] + counts[1];
    let minus = counts[2] + counts[3];
    let total = plus + minus;
    if total <= T::zero() {
        return Err(Error::Input(
            "correlation denominator is zero (no coincidences)".into(),
        ));
    }
    let value = (plus - minus) / total;

    // ∂E/∂C = ±2·(opposite sum)/total².
    let dplus = T::two() * minus / (total * total);
    let dminus = T::two() * plus / (total * total);
    let grads = [dplus, dplus, -dminus, -dminus];
    let var: T = records
        .iter()
        .zip(grads)
        .map(|(r, g)| {
            let s = g * r.sigma;
            s * s
        })
        .sum();
    let sigma = var.sqrt();

    if value.abs() > T::one() + T::of(3.0) * sigma {
        return Err(Error::Validation(format!(
            "correlation coefficient {value:?} exceeds 1 by more than 3σ"
        )));
    }
    Ok(CorrelationCoefficient {
        value,
        sigma,
        records,
    })
}

/// CHSH outcome: S, its propagated error and the violation significance.
#[derive(Debug, Clone)]
pub struct CHSHResult<T: Real> {
    pub s: T,
    pub sigma_s: T,
    pub violation_sigmas: T,
    pub state_label: String,
}

impl<T: Real> CHSHResult<T> {
    pub fn summary_json(&self) -> Value {
        json!({
            "state": self.state_label,
            "s": f(self.s),
            "sigma_s": f(self.sigma_s),
            "violation_sigmas": f(self.violation_sigmas),
            "violates_classical_bound": self.s > T::two(),
            "tsirelson_bound": f(T::two_sqrt_two()),
        })
    }
}

/// S = |⟨A₁B₁⟩ + ⟨A₁B₂⟩ + ⟨A₂B₁⟩ − ⟨A₂B₂⟩| with
/// σ_S = √(Σσ²) and violation_sigmas = (S − 2)/σ_S.
pub fn chsh<T: Real>(
    c11: &CorrelationCoefficient<T>,
    c12: &CorrelationCoefficient<T>,
    c21: &CorrelationCoefficient<T>,
    c22: &CorrelationCoefficient<T>,
    state_label: impl Into<String>,
) -> CHSHResult<T> {
    let s = (c11.value + c12.value + c21.value - c22.value).abs();
    let sigma_s = (c11.sigma * c11.sigma
        + c12.sigma * c12.sigma
        + c21.sigma * c21.sigma
        + c22.sigma * c22.sigma)
        .sqrt();
    let violation_sigmas = if sigma_s > T::zero() {
        (s - T::two()) / sigma_s
    } else if s > T::two() {
        T::infinity()
    } else {
        T::neg_infinity()
    };
    CHSHResult {
        s,
        sigma_s,
        violation_sigmas,
        state_label: state_label.into(),
    }
}

/// Maximally achievable S from a fringe visibility: S = 2√2·V.
pub fn s_from_visibility<T: Real>(v: T, sigma_v: T) -> Result<(T, T)> {
    if v < T::zero() || v > T::one() {
        return Err(Error::Input(format!("visibility {v:?} outside [0, 1]")));
    }
    Ok((T::two_sqrt_two() * v, T::two_sqrt_two() * sigma_v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::RecordSettings;

    fn ideal_fringe(k: u32, n: usize, floor: f64, amp: f64, phase: f64) -> FringeDataset<f64> {
        FringeDataset::from_values(
            "theta",
            (0..n).map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (theta, floor + amp * (k as f64 * theta + phase).cos())
            }),
        )
    }

    #[test]
    fn noiseless_fit_recovers_parameters_exactly() {
        let data = ideal_fringe(2, 64, 50.0, 50.0, 0.7);
        let fit = fit_fringe(&data).unwrap();
        assert_eq!(fit.frequency, 2);
        assert!((fit.floor - 50.0).abs() < 1e-9);
        assert!((fit.amplitude - 50.0).abs() < 1e-9);
        assert!((fit.phase - 0.7).abs() < 1e-9);
        let vis = visibility(&data, &fit).unwrap();
        assert!((vis.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn frequency_selection_separates_classical_and_quantum() {
        let classical = ideal_fringe(1, 32, 0.5, 0.5, 0.0);
        let quantum = ideal_fringe(2, 32, 300.0, 300.0, -0.3);
        assert_eq!(fit_fringe(&classical).unwrap().frequency, 1);
        assert_eq!(fit_fringe(&quantum).unwrap().frequency, 2);
    }

    #[test]
    fn sparse_sampling_is_rejected() {
        let data = ideal_fringe(2, 12, 1.0, 1.0, 0.0);
        assert!(matches!(
            fit_fringe_fixed_k(&data, 2),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn visibility_of_partial_fringe() {
        // floor 100, amplitude 80 → V = 160/180.
        let data = ideal_fringe(1, 24, 100.0, 80.0, 0.2);
        let fit = fit_fringe(&data).unwrap();
        let vis = visibility(&data, &fit).unwrap();
        assert!((vis.value - 160.0 / 180.0).abs() < 1e-9);
    }

    fn record(c: f64, sigma: f64) -> CountRecord<f64> {
        CountRecord {
            settings: RecordSettings::zero(),
            singles_1: 0,
            singles_2: 0,
            coincidences_raw: c.max(0.0) as u64,
            accidentals_estimate: 0.0,
            coincidences_corrected: c,
            sigma,
            window_s: 450e-12,
            duration_s: 60.0,
            corrected: true,
            clamped: false,
        }
    }

    #[test]
    fn correlation_of_ideal_quarter_fringe() {
        // cos²/sin²((θ_A−θ_B)/2) at θ_A = 0, θ_B = π/4, scaled to counts.
        let delta: f64 = std::f64::consts::FRAC_PI_4;
        let n = 1_000_000.0;
        let c_pp = n * (delta / 2.0).cos().powi(2);
        let c_mm = c_pp;
        let c_pm = n * (delta / 2.0).sin().powi(2);
        let c_mp = c_pm;
        let corr = correlation_coefficient([
            record(c_pp, c_pp.sqrt()),
            record(c_mm, c_mm.sqrt()),
            record(c_pm, c_pm.sqrt()),
            record(c_mp, c_mp.sqrt()),
        ])
        .unwrap();
        assert!((corr.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(corr.sigma > 0.0 && corr.sigma < 1e-2);
    }

    #[test]
    fn correlation_rejects_zero_denominator() {
        let err = correlation_coefficient([
            record(0.0, 0.0),
            record(0.0, 0.0),
            record(0.0, 0.0),
            record(0.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn chsh_combines_coefficients() {
        let e = std::f64::consts::FRAC_1_SQRT_2;
        let coeff = |v: f64| CorrelationCoefficient {
            value: v,
            sigma: 0.01,
            records: [
                record(1.0, 1.0),
                record(1.0, 1.0),
                record(1.0, 1.0),
                record(1.0, 1.0),
            ],
        };
        let result = chsh(&coeff(e), &coeff(e), &coeff(e), &coeff(-e), "phi+");
        assert!((result.s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((result.sigma_s - 0.02).abs() < 1e-12);
        assert!(result.violation_sigmas > 0.0);

        let zero = chsh(&coeff(0.0), &coeff(0.0), &coeff(0.0), &coeff(0.0), "none");
        assert_eq!(zero.s, 0.0);
    }

    #[test]
    fn equal_coefficient_magnitudes_rebuild_a_reference_s() {
        // Four equal coefficients of 0.6595 combine to S = 2.638.
        let coeff = |v: f64| CorrelationCoefficient {
            value: v,
            sigma: 0.0195,
            records: [
                record(1.0, 1.0),
                record(1.0, 1.0),
                record(1.0, 1.0),
                record(1.0, 1.0),
            ],
        };
        let result = chsh(
            &coeff(0.6595),
            &coeff(0.6595),
            &coeff(0.6595),
            &coeff(-0.6595),
            "phi+",
        );
        assert!((result.s - 2.638).abs() < 1e-12);
        assert!((result.sigma_s - 0.039).abs() < 5e-4);
    }

    #[test]
    fn s_from_visibility_scales_linearly() {
        let (s, sig) = s_from_visibility(1.0_f64, 0.0).unwrap();
        assert!((s - 2.8284271247461903).abs() < 1e-12);
        assert_eq!(sig, 0.0);
        let (s_half, _) = s_from_visibility(0.5_f64, 0.0).unwrap();
        assert!((s_half - std::f64::consts::SQRT_2).abs() < 1e-12);
        let (s_lossy, _) = s_from_visibility(0.9685_f64, 0.0).unwrap();
        assert!((s_lossy - 2.739).abs() < 5e-4);
        assert!(s_from_visibility(1.2_f64, 0.0).is_err());
    }
}
