//! Acceptance gate: every criterion at its pinned tolerance and runtime
//! budget, one pass/fail line each.

use airy_fredholm::verify::run_criterion;

fn gate(id: u8) {
    let outcome = run_criterion(id).expect("criterion id is valid");
    println!("{}", outcome.summary_line());
    assert!(outcome.passed, "{}", outcome.summary_line());
}

#[test]
fn criterion_01_exact_identities() {
    gate(1);
}

#[test]
fn criterion_02_model_constants() {
    gate(2);
}

#[test]
fn criterion_03_tracy_widom_tail() {
    gate(3);
}

#[test]
fn criterion_04_representation_equivalence() {
    gate(4);
}

#[test]
fn criterion_05_gap_boundedness() {
    gate(5);
}

#[test]
fn criterion_06_endpoint_expansion_rate() {
    gate(6);
}

#[test]
fn criterion_07_residual_boundedness() {
    gate(7);
}

#[test]
fn criterion_08_small_time_cross_check() {
    gate(8);
}

#[test]
fn criterion_09_tail_gap() {
    gate(9);
}

#[test]
fn criterion_10_spectral_invariants() {
    gate(10);
}

#[test]
fn criterion_11_kdv_residual() {
    gate(11);
}
