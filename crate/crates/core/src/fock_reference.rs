//! Brute-force reference evolution: expands creation-operator polynomials
//! one photon at a time, with no combinatoric shortcuts.
//!
//! This is the independent cross-check for the sparse evolution in
//! [`crate::fock`]; nothing in the production pipeline calls it. It scales
//! exponentially in photon number and is only meant for few-photon
//! verification.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::Result;
use crate::fock::{CircuitElement, PhotonicState};
use crate::linalg::CMat;
use crate::rng::SplitMix64;
use crate::scalar::{C, Real, phase};

/// A creation-operator monomial: the sorted list of mode indices, one entry
/// per photon.
type Monomial = Vec<usize>;

fn factorial<T: Real>(n: u8) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::of(i as f64))
}

/// Occupation vector → monomial plus the 1/√(Π n!) normalization.
fn to_monomials<T: Real>(state: &PhotonicState<T>) -> Vec<(Monomial, C<T>)> {
    state
        .terms()
        .map(|(occ, amp)| {
            let mut monomial = Vec::new();
            let mut norm = T::one();
            for (mode, &n) in occ.iter().enumerate() {
                for _ in 0..n {
                    monomial.push(mode);
                }
                norm = norm * factorial::<T>(n);
            }
            (monomial, *amp / Complex::new(norm.sqrt(), T::zero()))
        })
        .collect()
}

/// Substitute every creation operator through the transfer matrix, one
/// photon at a time, distributing products fully.
pub fn evolve_reference<T: Real>(
    state: &PhotonicState<T>,
    element: &CircuitElement<T>,
    mode_subset: &[&str],
) -> Result<PhotonicState<T>> {
    let subset = state.modes().indices_of(mode_subset)?;
    let transfer = &element.transfer;

    let mut collected: BTreeMap<Monomial, C<T>> = BTreeMap::new();
    for (monomial, coeff) in to_monomials(state) {
        // Expand photon by photon.
        let mut partial: Vec<(Monomial, C<T>)> = vec![(Vec::new(), coeff)];
        for &mode in &monomial {
            let mut next: Vec<(Monomial, C<T>)> = Vec::new();
            match subset.iter().position(|&s| s == mode) {
                Some(col) => {
                    for (built, c0) in &partial {
                        for (row, &target) in subset.iter().enumerate() {
                            let t = transfer[(row, col)];
                            if t.norm_sqr() == T::zero() {
                                continue;
                            }
                            let mut grown = built.clone();
                            grown.push(target);
                            next.push((grown, *c0 * t));
                        }
                    }
                }
                None => {
                    for (built, c0) in &partial {
                        let mut grown = built.clone();
                        grown.push(mode);
                        next.push((grown, *c0));
                    }
                }
            }
            partial = next;
        }
        for (mut built, c0) in partial {
            built.sort_unstable();
            let entry = collected
                .entry(built)
                .or_insert_with(|| Complex::new(T::zero(), T::zero()));
            *entry = *entry + c0;
        }
    }

    // Monomials back to kets, with the √(Π m!) factors reinstated.
    let n_modes = state.modes().len();
    let mut terms = Vec::with_capacity(collected.len());
    for (monomial, coeff) in collected {
        let mut occ = vec![0u8; n_modes];
        for mode in monomial {
            occ[mode] += 1;
        }
        let norm: T = occ
            .iter()
            .fold(T::one(), |acc, &n| acc * factorial::<T>(n));
        terms.push((occ, coeff * Complex::new(norm.sqrt(), T::zero())));
    }
    Ok(PhotonicState::from_terms(state.modes().clone(), terms)?.normalized())
}

/// Haar-ish random unitary from layered two-mode rotations and phases;
/// unitary by construction and deterministic per seed.
pub fn random_unitary<T: Real>(dim: usize, rng: &mut SplitMix64) -> CMat<T> {
    let mut u: CMat<T> = CMat::identity(dim);
    for _layer in 0..(2 * dim) {
        for a in 0..dim {
            let b = (a + 1) % dim;
            if a == b {
                continue;
            }
            let theta = T::tau() * rng.uniform::<T>();
            let phi = T::tau() * rng.uniform::<T>();
            let mut g: CMat<T> = CMat::identity(dim);
            g[(a, a)] = Complex::new(theta.cos(), T::zero());
            g[(a, b)] = phase::<T>(phi).scale(-theta.sin());
            g[(b, a)] = phase::<T>(-phi).scale(theta.sin());
            g[(b, b)] = Complex::new(theta.cos(), T::zero());
            u = u.mul(&g);
        }
        let mut d: CMat<T> = CMat::identity(dim);
        for k in 0..dim {
            d[(k, k)] = phase::<T>(T::tau() * rng.uniform::<T>());
        }
        u = u.mul(&d);
    }
    u
}
