//! Implementations behind the run/solve/verify subcommands, kept in the
//! library so integration tests can drive them directly.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;

use zdistill_core::cavity::{self, CavityParams};
use zdistill_core::engine::{asymptotics, iterate, DensityMatrix, TraceRow};
use zdistill_core::protocol::{builtin_text, compile_cycle, parse_program, CompiledCycle};
use zdistill_core::qubit::{self, solve_optimal_condition, QubitParams};

use crate::config::{InitialState, ModelKind, RunConfig};

pub struct RunSummary {
    pub trace_path: String,
    pub report_path: String,
    pub final_row: TraceRow,
}

fn load_program_text(cfg: &RunConfig) -> Result<String> {
    let name = cfg.protocol_or_default();
    if let Some(text) = builtin_text(name, cfg.t_a, cfg.tau_a, cfg.t_b, cfg.tau_b) {
        return Ok(text);
    }
    fs::read_to_string(name).with_context(|| format!("reading protocol file `{name}`"))
}

fn compile_for(cfg: &RunConfig) -> Result<(CompiledCycle, usize)> {
    let text = load_program_text(cfg)?;
    let prog = parse_program(&text)?;
    match cfg.model {
        ModelKind::Qubit => {
            let p = QubitParams::new(
                cfg.omega, cfg.g_a, cfg.g_b, cfg.t_a, cfg.t_b, cfg.tau_a, cfg.tau_b,
            )?;
            Ok((compile_cycle(&prog, &qubit::binding(&p))?, 4))
        }
        ModelKind::Cavity => {
            let p = CavityParams::new(
                cfg.omega, cfg.g_a, cfg.g_b, cfg.t_a, cfg.t_b, cfg.tau_a, cfg.tau_b, cfg.k_max,
            )?;
            Ok((compile_cycle(&prog, &cavity::binding(&p))?, p.box_dim()))
        }
    }
}

fn ensure_parent(path: &str) -> Result<()> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating output directory `{}`", parent.display()))?;
        }
    }
    Ok(())
}

/// Run one configured protocol: compile, build the initial state, iterate,
/// and write `<prefix>_trace.csv` plus `<prefix>_report.json`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let (cycle, dim) = compile_for(cfg)?;

    let mut prep_info = None;
    let rho0 = match (&cfg.initial_state, cfg.model) {
        (InitialState::MaximallyMixed, ModelKind::Qubit) => DensityMatrix::maximally_mixed(dim),
        (InitialState::MaximallyMixed, ModelKind::Cavity) => {
            let p = CavityParams::new(
                cfg.omega, cfg.g_a, cfg.g_b, cfg.t_a, cfg.t_b, cfg.tau_a, cfg.tau_b, cfg.k_max,
            )?;
            cavity::maximally_mixed_simplex(&p)
        }
        (InitialState::VacuumPrepared, ModelKind::Cavity) => {
            let p = CavityParams::new(
                cfg.omega, cfg.g_a, cfg.g_b, cfg.t_a, cfg.t_b, cfg.tau_a, cfg.tau_b, cfg.k_max,
            )?;
            let prep =
                cavity::prepare_initial_state(&cavity::maximally_mixed_simplex(&p), &p, cfg.prep_reps)?;
            prep_info = Some(json!({
                "reps": cfg.prep_reps,
                "yield": prep.yield_prob,
                "residual": prep.residual,
            }));
            prep.rho
        }
        (InitialState::VacuumPrepared, ModelKind::Qubit) => {
            bail!("initial_state = vacuum-prepared applies to the cavity model only")
        }
        (InitialState::Diagonal(w), _) => {
            if w.len() != dim {
                bail!("initial_state diag: expected {dim} weights, got {}", w.len());
            }
            DensityMatrix::from_diagonal_weights(w)?
        }
    };

    let report = asymptotics(&cycle.matrix, &rho0)?;
    let trace = iterate(&cycle.matrix, &rho0, cfg.n_iterations, &report.target)?;

    let trace_path = format!("{}_trace.csv", cfg.output);
    let report_path = format!("{}_report.json", cfg.output);
    ensure_parent(&cfg.output)?;
    fs::write(&trace_path, trace.to_csv()).with_context(|| format!("writing `{trace_path}`"))?;
    let mut doc = json!({
        "model": cfg.model.as_str(),
        "protocol": cfg.protocol_or_default(),
        "seed": cfg.seed,
        "n_iterations": cfg.n_iterations,
        "report": report.to_json(),
    });
    if let Some(prep) = prep_info {
        doc["preparation"] = prep;
    }
    if cfg.model == ModelKind::Cavity {
        let p = CavityParams::new(
            cfg.omega, cfg.g_a, cfg.g_b, cfg.t_a, cfg.t_b, cfg.tau_a, cfg.tau_b, cfg.k_max,
        )?;
        let sectors: Vec<serde_json::Value> = (1..=p.k_max)
            .map(|k| cavity::sector_report(k, &p).map(|r| r.to_json()))
            .collect::<zdistill_core::Result<_>>()?;
        doc["sectors"] = serde_json::Value::Array(sectors);
    }
    fs::write(&report_path, format!("{:#}\n", doc))
        .with_context(|| format!("writing `{report_path}`"))?;

    Ok(RunSummary { trace_path, report_path, final_row: trace.last().clone() })
}

/// Solve the optimality condition over a grid of x = g·t values. Grid points
/// where the condition degenerates are included with their skip reason;
/// empty root lists are valid results.
pub fn cmd_solve(x_grid: &[f64], y_max: f64) -> serde_json::Value {
    let mut entries = Vec::new();
    for &x in x_grid {
        match solve_optimal_condition(x, y_max) {
            Ok(points) => entries.push(json!({
                "x": x,
                "roots": points.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            })),
            Err(e) => entries.push(json!({ "x": x, "skipped": e.to_string() })),
        }
    }
    serde_json::Value::Array(entries)
}

/// Write a JSON document next to the other outputs.
pub fn write_json(prefix: &str, suffix: &str, value: &serde_json::Value) -> Result<String> {
    let path = format!("{prefix}_{suffix}.json");
    ensure_parent(prefix)?;
    fs::write(&path, format!("{:#}\n", value)).with_context(|| format!("writing `{path}`"))?;
    Ok(path)
}
