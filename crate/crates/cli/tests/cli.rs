//! Binary-level behavior: exit codes, output files, and report contents.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use zdistill_core::qubit::solve_optimal_condition;

fn zdistill(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdistill"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn parse_trace(path: &Path) -> Vec<(usize, f64, f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,yield,fidelity,purity");
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn run_qubit_at_solved_point_distills() {
    let dir = tempfile::tempdir().unwrap();
    let pt = &solve_optimal_condition(2.6, 10.0).unwrap()[0];
    let p = pt.params().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!(
            "model = qubit\nomega = 1\ng_a = {g}\ng_b = {g}\nt_a = {t}\nt_b = {t}\n\
             tau_a = {tau}\ntau_b = {tau}\nprotocol = wp\ninitial_state = maximally-mixed\n\
             n_iterations = 200\noutput = out/qopt\n",
            g = p.g_a,
            t = p.t_a,
            tau = p.tau_a
        ),
    );
    let out = zdistill(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_trace(&dir.path().join("out/qopt_trace.csv"));
    assert_eq!(rows.len(), 201);
    let last = rows.last().unwrap();
    assert!(last.2 > 1.0 - 1e-6, "final fidelity {}", last.2);
    assert!((last.1 - 0.25).abs() < 1e-4, "final yield {}", last.1);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/qopt_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["model"], "qubit");
    assert_eq!(report["seed"], 42);
    assert_eq!(report["report"]["optimal"], true);
    assert_eq!(report["report"]["unique"], true);
    let l0 = &report["report"]["lambda0"];
    let mag = (l0["re"].as_f64().unwrap().powi(2) + l0["im"].as_f64().unwrap().powi(2)).sqrt();
    assert!((mag - 1.0).abs() < 1e-9);
}

#[test]
fn run_zero_iterations_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "model = qubit\nn_iterations = 0\noutput = zero\n",
    );
    let out = zdistill(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = parse_trace(&dir.path().join("zero_trace.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 0);
    assert!((rows[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn run_cavity_vacuum_prepared_reports_doublet_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "model = cavity\nomega = 1\ng_a = 1\ng_b = 1\nt_a = 1.5707963267948966\nt_b = 0.7\n\
         tau_a = 0.5\ntau_b = 0.5\nk_max = 6\nprotocol = wp2\ninitial_state = vacuum-prepared\n\
         prep_reps = 40\nn_iterations = 60\noutput = cav\n",
    );
    let out = zdistill(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cav_report.json")).unwrap())
            .unwrap();
    // degenerate dominant set, but the designated target is the k=1 state
    assert_eq!(report["report"]["unique"], false);
    assert_eq!(report["report"]["optimal"], true);
    let target = report["report"]["target"].as_array().unwrap();
    let amp = |idx: usize| {
        let z = &target[idx];
        (z["re"].as_f64().unwrap().powi(2) + z["im"].as_f64().unwrap().powi(2)).sqrt()
    };
    // box index of |1,0⟩ is 7 (mode dim 7), of |0,1⟩ is 1
    assert!((amp(7) - 0.7f64.cos()).abs() < 1e-6, "|<1,0|target>| = {}", amp(7));
    assert!((amp(1) - 0.7f64.sin()).abs() < 1e-6, "|<0,1|target>| = {}", amp(1));
    assert!(report["preparation"]["residual"].as_f64().unwrap() < 1e-8);
    // trace fidelity column converges to the reported target
    let rows = parse_trace(&dir.path().join("cav_trace.csv"));
    assert!(rows.last().unwrap().2 > 1.0 - 1e-6);
}

#[test]
fn run_annihilating_protocol_exits_with_underflow_code() {
    let dir = tempfile::tempdir().unwrap();
    let proto = dir.path().join("dead.qproto");
    fs::write(&proto, "prepare X up\nproject X down\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!("model = qubit\nprotocol = {}\nn_iterations = 3\noutput = dead\n", proto.display()),
    );
    let out = zdistill(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("yield underflow"));
}

#[test]
fn run_with_missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = zdistill(&["run", "--config", "nope.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_rejects_vacuum_prepared_for_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "model = qubit\ninitial_state = vacuum-prepared\noutput = x\n",
    );
    let out = zdistill(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_emits_roots_and_skip_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let out = zdistill(
        &["solve", "--x-grid", "2.6,1.5707963267948966,1.0471975511965976", "--out", "s"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = doc.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    // x = 2.6: roots with both branches, satisfying the documented schema
    let roots = entries[0]["roots"].as_array().unwrap();
    assert!(roots.len() >= 4);
    for r in roots {
        for key in ["x", "y", "z", "chi", "lambda0_re", "lambda0_im", "branch"] {
            assert!(r.get(key).is_some(), "missing key {key}");
        }
    }
    // x = π/2: degenerate, skipped with a reason
    assert!(entries[1]["skipped"].as_str().unwrap().contains("degenerate"));
    // x = π/3: valid but empty root list
    assert_eq!(entries[2]["roots"].as_array().unwrap().len(), 0);
    // file output matches stdout document
    let file: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s_solve.json")).unwrap())
            .unwrap();
    assert_eq!(file, doc);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        "model = cavity\nk_max = 4\nt_a = 1.5707963267948966\nt_b = 0.7\n\
         initial_state = vacuum-prepared\nn_iterations = 30\noutput = rep\n",
    );
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = zdistill(&["run", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let trace = fs::read(dir.path().join("rep_trace.csv")).unwrap();
        let report = fs::read(dir.path().join("rep_report.json")).unwrap();
        outputs.push((trace, report));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_unknown_suite_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = zdistill(&["verify", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn verify_appendix_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = zdistill(&["verify", "appendix"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS appendix_identities"));
    assert!(text.contains("1/1 checks passed"));
}
