//! Single-precision smoke tests: the same pipeline compiles and stays
//! physical at `f32`, with tolerances matched to that precision.

use qpic_core::experiment::{BellLabel, Imperfections, distributed_state, exact_chsh_s};
use qpic_core::qubit::bell_phi;

#[test]
fn bell_distribution_works_in_f32() {
    let dist =
        distributed_state(std::f32::consts::FRAC_PI_2, &Imperfections::<f32>::ideal()).unwrap();
    assert!((dist.selection_probability - 0.25).abs() < 1e-5);
    let fidelity = dist.rho.mul(&bell_phi::<f32>(true)).trace().re;
    assert!(fidelity > 1.0 - 1e-4, "fidelity {fidelity}");
}

#[test]
fn chsh_reaches_tsirelson_in_f32() {
    let dist =
        distributed_state(std::f32::consts::FRAC_PI_2, &Imperfections::<f32>::ideal()).unwrap();
    let s = exact_chsh_s(&dist.rho, BellLabel::PhiPlus);
    assert!((s - 2.828427).abs() < 1e-4, "S = {s}");
}
