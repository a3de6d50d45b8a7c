//! Deterministic random sampling.
//!
//! A SplitMix64 stream is the only entropy source, so every sampled count is
//! reproducible bit-for-bit from a `u64` seed. Per-setting streams are derived
//! as `mix(seed ^ mix(index + GOLDEN))`, keeping parallel sweeps independent
//! without shared state.

use crate::scalar::Real;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for sweep point `index` under a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(GOLDEN)))
}

/// Minimal counter-based SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in the open interval (0, 1).
    pub fn uniform<T: Real>(&mut self) -> T {
        let bits = (self.next_u64() >> 11) + 1; // 1..=2^53
        T::of(bits as f64) * T::of(1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller.
    pub fn normal<T: Real>(&mut self) -> T {
        let u1: T = self.uniform();
        let u2: T = self.uniform();
        (-T::two() * u1.ln()).sqrt() * (T::tau() * u2).cos()
    }

    /// Poisson sample: CDF inversion below mean 50, rounded normal
    /// approximation above. Mean must be finite and non-negative.
    pub fn sample_poisson<T: Real>(&mut self, mean: T) -> u64 {
        assert!(
            mean >= T::zero() && mean.is_finite(),
            "Poisson mean must be finite and >= 0"
        );
        if mean == T::zero() {
            return 0;
        }
        if mean < T::of(50.0) {
            let u: T = self.uniform();
            let mut p = (-mean).exp();
            let mut cdf = p;
            let mut k: u64 = 0;
            while u > cdf && k < 10_000 {
                k += 1;
                p = p * mean / T::of(k as f64);
                cdf = cdf + p;
            }
            k
        } else {
            let z: T = self.normal();
            let x = mean + mean.sqrt() * z;
            let rounded = x.round().max(T::zero());
            rounded.to_u64().unwrap_or(0)
        }
    }

    /// Binomial sample with the same determinism guarantees: exact Bernoulli
    /// counting for small n, CDF inversion for moderate n, normal
    /// approximation when the variance is large.
    pub fn sample_binomial<T: Real>(&mut self, n: u64, p: T) -> u64 {
        assert!(p >= T::zero() && p <= T::one(), "probability out of range");
        if n == 0 || p == T::zero() {
            return 0;
        }
        if p == T::one() {
            return n;
        }
        let nf = T::of(n as f64);
        let variance = nf * p * (T::one() - p);
        if n <= 64 {
            let mut k = 0;
            for _ in 0..n {
                if self.uniform::<T>() < p {
                    k += 1;
                }
            }
            k
        } else if variance > T::of(100.0) {
            let z: T = self.normal();
            let x = nf * p + variance.sqrt() * z;
            let rounded = x.round().max(T::zero()).min(nf);
            rounded.to_u64().unwrap_or(0)
        } else {
            // CDF inversion on the binomial pmf.
            let u: T = self.uniform();
            let q = T::one() - p;
            let ratio = p / q;
            let mut pmf = q.powi(n as i32);
            let mut cdf = pmf;
            let mut k: u64 = 0;
            while u > cdf && k < n {
                k += 1;
                pmf = pmf * ratio * T::of((n - k + 1) as f64) / T::of(k as f64);
                cdf = cdf + pmf;
            }
            k
        }
    }

    /// Uniformly distributed unit vector in R³ (for random rotation axes).
    pub fn unit_axis<T: Real>(&mut self) -> [T; 3] {
        let z = T::two() * self.uniform::<T>() - T::one();
        let phi = T::tau() * self.uniform::<T>();
        let r = (T::one() - z * z).max(T::zero()).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    }
}
