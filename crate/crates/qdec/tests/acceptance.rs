//! Acceptance suite: every criterion runs at its pinned tolerance and prints
//! one pass/fail line. The same checks back the `qdec suite` subcommand.

use qdec::suite;

const SEED: u64 = 7;

fn run(id: usize) {
    let result = suite::run_criterion(id, SEED).expect("criterion runs");
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn criterion_01_haar_second_moment() {
    run(1);
}

#[test]
fn criterion_02_decoupling_bound() {
    run(2);
}

#[test]
fn criterion_03_corollary_closed_forms() {
    run(3);
}

#[test]
fn criterion_04_entropy_oracles() {
    run(4);
}

#[test]
fn criterion_05_uhlmann() {
    run(5);
}

#[test]
fn criterion_06_oneshot_coding_soundness() {
    run(6);
}

#[test]
fn criterion_07_degenerate_reductions() {
    run(7);
}

#[test]
fn criterion_08_rate_formulas() {
    run(8);
}

#[test]
fn criterion_09_locking_properties() {
    run(9);
}

#[test]
fn criterion_10_appendix_property_suite() {
    run(10);
}
