//! Flat `key = value` run configuration ('#' comments, blank lines ignored).

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Qubit,
    Cavity,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Qubit => "qubit",
            ModelKind::Cavity => "cavity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    MaximallyMixed,
    VacuumPrepared,
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    pub omega: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub k_max: usize,
    /// Builtin name ("wp", "wp2") or a path to a `.qproto` file.
    pub protocol: String,
    pub initial_state: InitialState,
    pub n_iterations: usize,
    /// Output path prefix for `<prefix>_trace.csv` and `<prefix>_report.json`.
    pub output: String,
    pub seed: u64,
    /// Conditioning repetitions of the vacuum preparation.
    pub prep_reps: usize,
    /// Solver grid for the solve subcommand.
    pub x_grid: Vec<f64>,
    pub y_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Qubit,
            omega: 1.0,
            g_a: 1.0,
            g_b: 1.0,
            t_a: 1.0,
            t_b: 1.0,
            tau_a: 0.5,
            tau_b: 0.5,
            k_max: 12,
            protocol: String::new(), // resolved per model when empty
            initial_state: InitialState::MaximallyMixed,
            n_iterations: 50,
            output: "zdistill".into(),
            seed: 42,
            prep_reps: 40,
            x_grid: vec![2.6, 2.8, 3.0],
            y_max: 10.0,
        }
    }
}

impl RunConfig {
    /// The protocol name/path with the per-model default applied.
    pub fn protocol_or_default(&self) -> &str {
        if !self.protocol.is_empty() {
            return &self.protocol;
        }
        match self.model {
            ModelKind::Qubit => "wp",
            ModelKind::Cavity => "wp2",
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| anyhow!("config key `{key}`: invalid number `{v}`"))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| anyhow!("config key `{key}`: invalid integer `{v}`"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|_| anyhow!("config key `{key}`: invalid number `{tok}`")))
        .collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`", i + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }

    let mut cfg = RunConfig::default();
    for (k, v) in &map {
        match k.as_str() {
            "model" => {
                cfg.model = match v.as_str() {
                    "qubit" => ModelKind::Qubit,
                    "cavity" => ModelKind::Cavity,
                    other => bail!("config key `model`: expected qubit|cavity, got `{other}`"),
                }
            }
            "omega" => cfg.omega = parse_f64(k, v)?,
            "g_a" => cfg.g_a = parse_f64(k, v)?,
            "g_b" => cfg.g_b = parse_f64(k, v)?,
            "t_a" => cfg.t_a = parse_f64(k, v)?,
            "t_b" => cfg.t_b = parse_f64(k, v)?,
            "tau_a" => cfg.tau_a = parse_f64(k, v)?,
            "tau_b" => cfg.tau_b = parse_f64(k, v)?,
            "k_max" => cfg.k_max = parse_usize(k, v)?,
            "protocol" => cfg.protocol = v.clone(),
            "initial_state" => {
                cfg.initial_state = if v == "maximally-mixed" {
                    InitialState::MaximallyMixed
                } else if v == "vacuum-prepared" {
                    InitialState::VacuumPrepared
                } else if let Some(rest) = v.strip_prefix("diag:") {
                    InitialState::Diagonal(parse_list(k, rest)?)
                } else {
                    bail!(
                        "config key `initial_state`: expected maximally-mixed, \
                         vacuum-prepared, or diag:<w0,w1,...>, got `{v}`"
                    )
                }
            }
            "n_iterations" => cfg.n_iterations = parse_usize(k, v)?,
            "output" => cfg.output = v.clone(),
            "seed" => {
                cfg.seed = v.parse::<u64>().map_err(|_| anyhow!("config key `seed`: invalid integer `{v}`"))?
            }
            "prep_reps" => cfg.prep_reps = parse_usize(k, v)?,
            "x_grid" => cfg.x_grid = parse_list(k, v)?,
            "y_max" => cfg.y_max = parse_f64(k, v)?,
            other => bail!("unknown config key `{other}`"),
        }
    }
    if !map.contains_key("model") {
        bail!("config is missing the required key `model`");
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# comment
model = cavity
omega = 1.0
g_a = 1.0
t_a = 1.5707963267948966
k_max = 6
initial_state = vacuum-prepared
n_iterations = 100
output = out/run1
seed = 7
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.model, ModelKind::Cavity);
        assert_eq!(cfg.k_max, 6);
        assert_eq!(cfg.initial_state, InitialState::VacuumPrepared);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.protocol_or_default(), "wp2");
    }

    #[test]
    fn diagonal_weights_and_errors() {
        let cfg = parse_config("model = qubit\ninitial_state = diag:0.5,0.25,0.25,0\n").unwrap();
        assert_eq!(cfg.initial_state, InitialState::Diagonal(vec![0.5, 0.25, 0.25, 0.0]));
        assert!(parse_config("initial_state = diag:1\n").is_err()); // missing model
        assert!(parse_config("model = qubit\nwibble = 3\n").is_err());
        assert!(parse_config("model = qubit\nomega = abc\n").is_err());
    }
}
