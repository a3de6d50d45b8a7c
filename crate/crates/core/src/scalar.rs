//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through [`Real`], with `f64` as the reference precision.
//!
//! Tolerances used by physics contracts (norm checks, unitarity, PSD floors)
//! are part of the trait so that `f32` instantiations get bounds matched to
//! their precision. The `f64` values are the ones the test suite pins down.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable for amplitudes, probabilities and fits.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert to scalar")
    }

    /// Tolerance on state-norm preservation (Σ|amp|² vs 1).
    fn tol_norm() -> Self;
    /// Tolerance on ‖T†T − I‖_max for unitary transfer matrices.
    fn tol_unitary() -> Self;
    /// Amplitude below which state terms are pruned.
    fn prune_eps() -> Self;
    /// Photon amplitude² allowed outside the declared qubit rails.
    fn tol_leakage() -> Self;
    /// Hermiticity / trace tolerance for density matrices.
    fn tol_density() -> Self;
    /// Eigenvalue floor below which a density matrix counts as unphysical.
    fn psd_floor() -> Self;
    /// Trace-preservation tolerance for process matrices.
    fn tol_trace_preserving() -> Self;

    fn two() -> Self {
        Self::one() + Self::one()
    }
    fn half() -> Self {
        Self::one() / Self::two()
    }
    fn pi() -> Self {
        Self::of(std::f64::consts::PI)
    }
    /// 2π
    fn tau() -> Self {
        Self::of(std::f64::consts::TAU)
    }
    /// 2√2, the Tsirelson bound.
    fn two_sqrt_two() -> Self {
        Self::two() * Self::two().sqrt()
    }
}

impl Real for f64 {
    fn tol_norm() -> Self {
        1e-12
    }
    fn tol_unitary() -> Self {
        1e-10
    }
    fn prune_eps() -> Self {
        1e-14
    }
    fn tol_leakage() -> Self {
        1e-9
    }
    fn tol_density() -> Self {
        1e-10
    }
    fn psd_floor() -> Self {
        -1e-9
    }
    fn tol_trace_preserving() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn tol_norm() -> Self {
        1e-5
    }
    fn tol_unitary() -> Self {
        1e-4
    }
    fn prune_eps() -> Self {
        1e-7
    }
    fn tol_leakage() -> Self {
        1e-4
    }
    fn tol_density() -> Self {
        1e-4
    }
    fn psd_floor() -> Self {
        -1e-4
    }
    fn tol_trace_preserving() -> Self {
        1e-3
    }
}

/// Complex amplitude over the crate's scalar.
pub type C<T> = Complex<T>;

/// `re + i·im` with f64 literals.
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::of(re), T::of(im))
}

/// e^{iθ}
pub fn phase<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_line_up() {
        assert_eq!(f64::two(), 2.0);
        assert!((f64::two_sqrt_two() - 2.828427124746190).abs() < 1e-12);
        assert!((f32::pi() - std::f32::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn phase_is_unit_modulus() {
        let p = phase(0.7_f64);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!((p.re - 0.7f64.cos()).abs() < 1e-15);
    }
}
