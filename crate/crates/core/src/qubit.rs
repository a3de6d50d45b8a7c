//! Single- and two-qubit helpers: Pauli operators, the six cardinal states,
//! projector algebra and Werner-type mixing.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::scalar::{C, Real, c, phase};

/// Labels for the six cardinal single-qubit states / measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Basis {
    pub const ALL: [Basis; 6] = [
        Basis::Zero,
        Basis::One,
        Basis::Plus,
        Basis::Minus,
        Basis::PlusI,
        Basis::MinusI,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Basis::Zero => "0",
            Basis::One => "1",
            Basis::Plus => "+",
            Basis::Minus => "-",
            Basis::PlusI => "+i",
            Basis::MinusI => "-i",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Basis::ALL.iter().copied().find(|b| b.label() == label)
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Normalized single-qubit state vector.
pub fn cardinal_state<T: Real>(basis: Basis) -> [C<T>; 2] {
    let h = T::half().sqrt();
    let z = T::zero();
    match basis {
        Basis::Zero => [c(1.0, 0.0), c(0.0, 0.0)],
        Basis::One => [c(0.0, 0.0), c(1.0, 0.0)],
        Basis::Plus => [Complex::new(h, z), Complex::new(h, z)],
        Basis::Minus => [Complex::new(h, z), Complex::new(-h, z)],
        Basis::PlusI => [Complex::new(h, z), Complex::new(z, h)],
        Basis::MinusI => [Complex::new(h, z), Complex::new(z, -h)],
    }
}

/// Pauli operators in the order (I, X, Y, Z).
pub fn pauli<T: Real>(k: usize) -> CMat<T> {
    match k {
        0 => CMat::identity(2),
        1 => CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]),
        2 => CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]),
        3 => CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]),
        _ => panic!("Pauli index out of range"),
    }
}

/// Density matrix |ψ⟩⟨ψ| of a pure state vector.
pub fn pure_density<T: Real>(psi: &[C<T>]) -> CMat<T> {
    CMat::outer(psi, psi)
}

/// v·ρ + (1−v)·I/d  — white-noise (Werner-type) mixing.
pub fn werner_mix<T: Real>(rho: &CMat<T>, visibility: T) -> CMat<T> {
    let d = rho.rows();
    let v = Complex::new(visibility, T::zero());
    let rest = Complex::new((T::one() - visibility) / T::of(d as f64), T::zero());
    rho.scale(v).add(&CMat::identity(d).scale(rest))
}

/// Tensor product of two single-qubit state vectors (signal ⊗ idler).
pub fn kron_vec<T: Real>(a: &[C<T>; 2], b: &[C<T>; 2]) -> [C<T>; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// ⟨φ_a ⊗ φ_b| ρ |φ_a ⊗ φ_b⟩ for a two-qubit density matrix.
pub fn joint_projection_probability<T: Real>(
    rho: &CMat<T>,
    proj_a: &[C<T>; 2],
    proj_b: &[C<T>; 2],
) -> T {
    let v = kron_vec(proj_a, proj_b);
    rho.quadratic_form(&v).re
}

/// Two-qubit Bell states (|00⟩ ± |11⟩)/√2.
pub fn bell_phi<T: Real>(plus: bool) -> CMat<T> {
    let h = T::half().sqrt();
    let sign = if plus { h } else { -h };
    let psi = [
        Complex::new(h, T::zero()),
        Complex::new(T::zero(), T::zero()),
        Complex::new(T::zero(), T::zero()),
        Complex::new(sign, T::zero()),
    ];
    pure_density(&psi)
}

/// SU(2) rotation exp(−i·angle/2·(n̂·σ)) about a unit axis.
pub fn axis_rotation<T: Real>(axis: [T; 3], angle: T) -> CMat<T> {
    let half = angle * T::half();
    let (s, co) = (half.sin(), half.cos());
    let i = Complex::new(T::zero(), T::one());
    let mut m = CMat::identity(2).scale(Complex::new(co, T::zero()));
    for (k, &n) in axis.iter().enumerate() {
        let factor = i * Complex::new(-s * n, T::zero());
        m = m.add(&pauli(k + 1).scale(factor));
    }
    m
}

/// SU(2) element from three Euler-like angles: Rz(a)·Ry(b)·Rz(c).
pub fn euler_unitary<T: Real>(a: T, b: T, c_angle: T) -> CMat<T> {
    let rz = |t: T| {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = phase(-t * T::half());
        m[(1, 1)] = phase(t * T::half());
        m
    };
    let half = b * T::half();
    let ry = CMat::from_rows(&[
        vec![
            Complex::new(half.cos(), T::zero()),
            Complex::new(-half.sin(), T::zero()),
        ],
        vec![
            Complex::new(half.sin(), T::zero()),
            Complex::new(half.cos(), T::zero()),
        ],
    ]);
    rz(a).mul(&ry).mul(&rz(c_angle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinal_states_are_normalized_and_orthogonal_in_pairs() {
        for b in Basis::ALL {
            let s = cardinal_state::<f64>(b);
            let n: f64 = s.iter().map(|a| a.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-15, "{b}");
        }
        let dot = |x: [C<f64>; 2], y: [C<f64>; 2]| (x[0].conj() * y[0] + x[1].conj() * y[1]).norm();
        assert!(dot(cardinal_state(Basis::Plus), cardinal_state(Basis::Minus)) < 1e-15);
        assert!(dot(cardinal_state(Basis::PlusI), cardinal_state(Basis::MinusI)) < 1e-15);
    }

    #[test]
    fn werner_mix_preserves_trace() {
        let rho = bell_phi::<f64>(true);
        let mixed = werner_mix(&rho, 0.9763);
        assert!((mixed.trace().re - 1.0).abs() < 1e-12);
        assert!(mixed.is_hermitian(1e-12));
    }

    #[test]
    fn phi_plus_correlates_perfectly_in_z() {
        let rho = bell_phi::<f64>(true);
        let p00 = joint_projection_probability(
            &rho,
            &cardinal_state(Basis::Zero),
            &cardinal_state(Basis::Zero),
        );
        let p01 = joint_projection_probability(
            &rho,
            &cardinal_state(Basis::Zero),
            &cardinal_state(Basis::One),
        );
        assert!((p00 - 0.5).abs() < 1e-12);
        assert!(p01 < 1e-12);
    }

    #[test]
    fn axis_rotation_is_unitary() {
        let r = axis_rotation([0.6, 0.0, 0.8], 0.37_f64);
        assert!(r.unitarity_defect() < 1e-12);
        let e = euler_unitary(0.3_f64, 1.1, -0.4);
        assert!(e.unitarity_defect() < 1e-12);
    }
}
