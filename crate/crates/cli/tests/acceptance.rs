//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`) and asserting both the
//! property and its runtime budget.

use std::process::Command;
use std::time::Duration;

use zdistill::checks::{self, CheckResult};

fn report(criterion: &str, budget: Duration, r: &CheckResult) {
    println!(
        "{} {criterion} ({}) — {} [{:.3} s, budget {:.0} s]",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.detail,
        r.duration.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        r.duration <= budget,
        "{criterion}: runtime {:.3} s exceeds budget {:.0} s",
        r.duration.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(r.passed, "{criterion}: {}", r.detail);
}

#[test]
fn criterion_01_spectral_engine_equivalence() {
    let r = checks::spectral_engine_equivalence(42);
    report("criterion 1", Duration::from_secs(5), &r);
}

#[test]
fn criterion_02_eigenvalue_bound() {
    let r = checks::eigenvalue_bound(42);
    report("criterion 2", Duration::from_secs(5), &r);
}

#[test]
fn criterion_03_qubit_closed_forms() {
    let r = checks::qubit_closed_forms();
    report("criterion 3", Duration::from_secs(10), &r);
}

#[test]
fn criterion_04_qubit_optimal_distillation() {
    let r = checks::qubit_optimal_distillation();
    report("criterion 4", Duration::from_secs(10), &r);
}

#[test]
fn criterion_05_cavity_closed_form() {
    let r = checks::cavity_closed_form(42);
    report("criterion 5", Duration::from_secs(20), &r);
}

#[test]
fn criterion_06_cavity_doublet() {
    let r = checks::cavity_doublet();
    report("criterion 6", Duration::from_secs(2), &r);
}

#[test]
fn criterion_07_sector_splitting() {
    let r = checks::sector_splitting();
    report("criterion 7", Duration::from_secs(10), &r);
}

#[test]
fn criterion_08_appendix_identities() {
    let r = checks::appendix_identities(42);
    report("criterion 8", Duration::from_secs(30), &r);
}

#[test]
fn criterion_09_end_to_end_distillation() {
    let r = checks::end_to_end_distillation();
    report("criterion 9", Duration::from_secs(10), &r);
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let prefix = dir.path().join(tag);
        let out = Command::new(env!("CARGO_BIN_EXE_zdistill"))
            .args(["verify", "all", "--seed", "42", "--out"])
            .arg(&prefix)
            .output()
            .expect("binary runs");
        let mut report =
            std::fs::read(format!("{}_verify.json", prefix.display())).expect("report written");
        report.extend(std::fs::read(format!("{}_scan.csv", prefix.display())).expect("scan written"));
        (out.stdout, out.status.code(), report)
    };
    let (stdout1, code1, report1) = run("first");
    let (stdout2, code2, report2) = run("second");
    let passed = stdout1 == stdout2 && report1 == report2 && code1 == code2;
    println!(
        "{} criterion 10 (determinism) — two `zdistill verify all` runs byte-identical: stdout {} bytes, report {} bytes, exit {:?}",
        if passed { "PASS" } else { "FAIL" },
        stdout1.len(),
        report1.len(),
        code1
    );
    assert!(!stdout1.is_empty());
    assert!(passed, "consecutive verify runs differ");
}
