//! Acceptance gate: every advertised property suite at its full case count,
//! one pass/fail line per criterion (visible under `--nocapture`; always
//! printed on failure).

use std::sync::OnceLock;

use krobust::selftest::{run_all, SelftestConfig, SuiteResult};

/// All suites run once on the shared full profile; the per-criterion tests
/// report and assert their slice of the results.
fn results() -> &'static [SuiteResult] {
    static RESULTS: OnceLock<Vec<SuiteResult>> = OnceLock::new();
    RESULTS.get_or_init(|| run_all(&SelftestConfig::full(7)))
}

fn check(name: &str, label: &str) -> &'static SuiteResult {
    let result = results()
        .iter()
        .find(|r| r.name == name)
        .expect("suite present");
    println!(
        "criterion {label}: {} ({} cases, {:.2}s) {}",
        if result.passed { "pass" } else { "FAIL" },
        result.cases,
        result.seconds,
        result.detail
    );
    assert!(result.passed, "criterion {label} failed: {}", result.detail);
    result
}

#[test]
fn criterion_1_duality_sandwich() {
    let result = check("duality-sandwich", "1, duality sandwich");
    assert!(
        result.seconds < 120.0,
        "sandwich suite took {:.1}s, budget is two minutes",
        result.seconds
    );
}

#[test]
fn criterion_2_anchors() {
    check("anchors", "2, analytic anchors");
}

#[test]
fn criterion_3_branch_correctness() {
    check("branch-correctness", "3, branch correctness");
}

#[test]
fn criterion_4_i2_split() {
    check("i2-split", "4, two-incoherent split");
}

#[test]
fn criterion_5_norm_properties() {
    check("norm-properties", "5, norm properties");
}

#[test]
fn criterion_6_entanglement_layer() {
    check("entanglement-layer", "6, entanglement layer");
}

#[test]
fn criterion_7_lp_solver() {
    check("lp-solver", "7, LP solver");
}

#[test]
fn criterion_8_cli_roundtrip() {
    check("cli-roundtrip", "8, CLI and JSON round trip");
}
