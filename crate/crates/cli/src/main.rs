use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use zdistill::checks;
use zdistill::commands::{cmd_run, cmd_solve, write_json};
use zdistill::config::{parse_config, RunConfig};

#[derive(Parser)]
#[command(name = "zdistill", version, about = "Repeated-measurement entanglement distillation: run protocols, solve optimality conditions, verify the models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a configured protocol and write <prefix>_trace.csv / <prefix>_report.json
    Run {
        /// Flat key = value configuration file
        #[arg(long)]
        config: PathBuf,
        /// Output path prefix (overrides the config `output` key)
        #[arg(long)]
        out: Option<String>,
        /// RNG seed recorded in reports (overrides the config `seed` key)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve the optimality condition over a grid of x = g·t values
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated grid, e.g. 2.6,2.8,3.0 (overrides the config)
        #[arg(long, value_delimiter = ',')]
        x_grid: Option<Vec<f64>>,
        /// Upper end of the ω·t search interval
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite: qubit | cavity | appendix | all
    Verify {
        /// Suite name (default: all)
        suite: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| anyhow::anyhow!("reading config `{}`: {e}", p.display()))?;
            parse_config(&text)
        }
    }
}

fn is_yield_underflow(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<zdistill_core::Error>(),
            Some(zdistill_core::Error::YieldUnderflow { .. })
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, out, seed } => {
            let mut cfg = match load_config(Some(&config)) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            if let Some(out) = out {
                cfg.output = out;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            match cmd_run(&cfg) {
                Ok(summary) => {
                    let r = &summary.final_row;
                    println!(
                        "N={} yield={} fidelity={} purity={}",
                        r.n, r.yield_prob, r.fidelity, r.purity
                    );
                    println!("wrote {} and {}", summary.trace_path, summary.report_path);
                    ExitCode::SUCCESS
                }
                Err(e) if is_yield_underflow(&e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Solve { config, x_grid, y_max, out, seed } => {
            let mut cfg = match load_config(config.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            if let Some(grid) = x_grid {
                cfg.x_grid = grid;
            }
            if let Some(y) = y_max {
                cfg.y_max = y;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if cfg.x_grid.is_empty() {
                eprintln!("error: empty x grid");
                return ExitCode::from(1);
            }
            let doc = cmd_solve(&cfg.x_grid, cfg.y_max);
            println!("{doc:#}");
            if let Some(prefix) = out {
                match write_json(&prefix, "solve", &doc) {
                    Ok(path) => eprintln!("wrote {path}"),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        return ExitCode::from(1);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Verify { suite, config, out, seed } => {
            let cfg = match load_config(config.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            let seed = seed.unwrap_or(cfg.seed);
            let suite_name = suite.unwrap_or_else(|| "all".to_string());
            let results = match checks::suite(&suite_name, seed) {
                Some(r) => r,
                None => {
                    eprintln!(
                        "error: unknown suite `{suite_name}`\nusage: zdistill verify [qubit|cavity|appendix|all] [--config PATH] [--out PREFIX] [--seed N]"
                    );
                    return ExitCode::from(1);
                }
            };
            print!("{}", checks::format_results(&suite_name, seed, &results));
            for r in &results {
                eprintln!("{}: {:.3} s", r.name, r.duration.as_secs_f64());
            }
            if let Some(prefix) = out {
                let doc = json!({
                    "suite": suite_name,
                    "seed": seed,
                    "checks": results.iter().map(|r| json!({
                        "name": r.name,
                        "passed": r.passed,
                        "detail": r.detail,
                    })).collect::<Vec<_>>(),
                });
                if let Err(e) = write_json(&prefix, "verify", &doc) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
                if suite_name == "appendix" || suite_name == "all" {
                    let path = format!("{prefix}_scan.csv");
                    if let Err(e) = fs::write(&path, checks::appendix_scan_csv()) {
                        eprintln!("error: writing `{path}`: {e}");
                        return ExitCode::from(1);
                    }
                }
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}
