//! Line-oriented protocol language and its compiler.
//!
//! A program is a prepare/interact/free/project sequence for one mediator.
//! Compilation against a model binding multiplies out the corresponding
//! evolution factors and closes the mediator indices, leaving the effective
//! (generally non-unitary) operator on everything else. Files use the
//! `.qproto` extension.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_matexp, CMatrix, CVector, HermitianOperator};

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolStep {
    /// `prepare X <state>` — mediator starts in the named basis state.
    Prepare { subsystem: String, state: String },
    /// `interact X <sys> <duration>` — joint evolution of mediator and partner.
    Interact { mediator: String, partner: String, duration: f64 },
    /// `free <duration>` — evolution under the free Hamiltonian alone.
    Free { duration: f64 },
    /// `project X <state>` — keep only the named mediator outcome.
    Project { subsystem: String, state: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolProgram {
    pub steps: Vec<ProtocolStep>,
    pub mediator: String,
}

impl ProtocolProgram {
    /// Time-reversed program: prepare and final project trade places, the
    /// middle runs backwards. For real-symmetric generators the compiled
    /// matrix of the reversal is the transpose of the original.
    pub fn reversed(&self) -> ProtocolProgram {
        let mut steps: Vec<ProtocolStep> = self.steps.iter().rev().cloned().collect();
        let last = steps.len() - 1;
        if let ProtocolStep::Project { subsystem, state } = steps[0].clone() {
            steps[0] = ProtocolStep::Prepare { subsystem, state };
        }
        if let ProtocolStep::Prepare { subsystem, state } = steps[last].clone() {
            steps[last] = ProtocolStep::Project { subsystem, state };
        }
        ProtocolProgram { steps, mediator: self.mediator.clone() }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_duration(tok: &str, line: usize) -> Result<f64> {
    let d: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid duration literal `{tok}`")))?;
    if !d.is_finite() {
        return Err(parse_err(line, format!("duration must be finite, got `{tok}`")));
    }
    if d < 0.0 {
        return Err(parse_err(line, format!("negative duration {d}")));
    }
    Ok(d)
}

/// Parse a program. One step per line; `#` starts a comment; errors carry
/// 1-based line numbers.
pub fn parse_program(text: &str) -> Result<ProtocolProgram> {
    let mut steps: Vec<(usize, ProtocolStep)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let step = match toks[0] {
            "prepare" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "usage: prepare <mediator> <state>"));
                }
                ProtocolStep::Prepare { subsystem: toks[1].into(), state: toks[2].into() }
            }
            "interact" => {
                if toks.len() != 4 {
                    return Err(parse_err(line, "usage: interact <mediator> <sys> <duration>"));
                }
                ProtocolStep::Interact {
                    mediator: toks[1].into(),
                    partner: toks[2].into(),
                    duration: parse_duration(toks[3], line)?,
                }
            }
            "free" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "usage: free <duration>"));
                }
                ProtocolStep::Free { duration: parse_duration(toks[1], line)? }
            }
            "project" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "usage: project <mediator> <state>"));
                }
                ProtocolStep::Project { subsystem: toks[1].into(), state: toks[2].into() }
            }
            kw => return Err(parse_err(line, format!("unknown keyword `{kw}`"))),
        };
        steps.push((line, step));
    }

    if steps.is_empty() {
        return Err(parse_err(0, "empty program"));
    }

    let mediator = match &steps[0].1 {
        ProtocolStep::Prepare { subsystem, .. } => subsystem.clone(),
        _ => return Err(parse_err(steps[0].0, "program must start with a prepare step")),
    };
    for (line, step) in steps.iter().skip(1) {
        match step {
            ProtocolStep::Prepare { .. } => {
                return Err(parse_err(*line, "prepare is only allowed as the first step"));
            }
            ProtocolStep::Interact { mediator: m, .. } if *m != mediator => {
                return Err(parse_err(
                    *line,
                    format!("interaction must involve the mediator `{mediator}`"),
                ));
            }
            ProtocolStep::Project { subsystem, .. } if *subsystem != mediator => {
                return Err(parse_err(
                    *line,
                    format!("projections act on the mediator `{mediator}`"),
                ));
            }
            _ => {}
        }
    }
    let (last_line, last) = steps.last().expect("non-empty");
    if !matches!(last, ProtocolStep::Project { .. }) {
        return Err(parse_err(*last_line, "program must end with a project step"));
    }

    Ok(ProtocolProgram { steps: steps.into_iter().map(|(_, s)| s).collect(), mediator })
}

/// One-pass cycle text: interact with A, drift, interact with B, drift,
/// keep the mediator in its initial state.
pub fn wp_text(t_a: f64, tau_a: f64, t_b: f64, tau_b: f64) -> String {
    format!(
        "prepare X up\n\
         interact X A {t_a}\n\
         free {tau_a}\n\
         interact X B {t_b}\n\
         free {tau_b}\n\
         project X up\n"
    )
}

/// Round-trip cycle text: forward pass conditioned on the flipped mediator
/// state, then the mirrored return pass conditioned on the initial one.
pub fn wp2_text(t_a: f64, tau_a: f64, t_b: f64, tau_b: f64) -> String {
    format!(
        "prepare X down\n\
         interact X A {t_a}\n\
         free {tau_a}\n\
         interact X B {t_b}\n\
         free {tau_b}\n\
         project X up\n\
         free {tau_b}\n\
         interact X B {t_b}\n\
         free {tau_a}\n\
         interact X A {t_a}\n\
         project X down\n"
    )
}

/// Builtin program source by name ("wp" or "wp2").
pub fn builtin_text(name: &str, t_a: f64, tau_a: f64, t_b: f64, tau_b: f64) -> Option<String> {
    match name {
        "wp" => Some(wp_text(t_a, tau_a, t_b, tau_b)),
        "wp2" => Some(wp2_text(t_a, tau_a, t_b, tau_b)),
        _ => None,
    }
}

/// Hamiltonians and basis data a program is compiled against.
///
/// The full space is mediator ⊗ rest (mediator index slowest). `h0` and each
/// interaction live on the full space and must be Hermitian.
#[derive(Debug, Clone)]
pub struct ModelBinding {
    mediator_label: String,
    mediator_dim: usize,
    rest_dim: usize,
    mediator_states: BTreeMap<String, CVector>,
    h0: HermitianOperator,
    interactions: BTreeMap<String, HermitianOperator>,
}

impl ModelBinding {
    pub fn new(
        mediator_label: impl Into<String>,
        mediator_states: Vec<(String, CVector)>,
        rest_dim: usize,
        h0: CMatrix,
        interactions: Vec<(String, CMatrix)>,
    ) -> Result<Self> {
        let mediator_label = mediator_label.into();
        if mediator_states.is_empty() {
            return Err(Error::InvalidParameter("no mediator basis states given".into()));
        }
        let mediator_dim = mediator_states[0].1.len();
        let full = mediator_dim * rest_dim;
        if h0.nrows() != full {
            return Err(Error::DimensionMismatch { expected: full, got: h0.nrows() });
        }
        let mut states = BTreeMap::new();
        for (label, v) in mediator_states {
            if v.len() != mediator_dim {
                return Err(Error::DimensionMismatch { expected: mediator_dim, got: v.len() });
            }
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "mediator state `{label}` is not unit norm"
                )));
            }
            states.insert(label, v);
        }
        let h0 = HermitianOperator::new(h0)?;
        let mut ints = BTreeMap::new();
        for (label, m) in interactions {
            if m.nrows() != full {
                return Err(Error::DimensionMismatch { expected: full, got: m.nrows() });
            }
            ints.insert(label, HermitianOperator::new(m)?);
        }
        Ok(Self {
            mediator_label,
            mediator_dim,
            rest_dim,
            mediator_states: states,
            h0,
            interactions: ints,
        })
    }

    pub fn mediator_label(&self) -> &str {
        &self.mediator_label
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_dim
    }

    fn mediator_state(&self, label: &str) -> Result<&CVector> {
        self.mediator_states.get(label).ok_or_else(|| Error::UnknownStateLabel {
            subsystem: self.mediator_label.clone(),
            label: label.to_string(),
        })
    }

    fn interaction(&self, partner: &str) -> Result<&HermitianOperator> {
        self.interactions
            .get(partner)
            .ok_or_else(|| Error::UnknownSubsystem(partner.to_string()))
    }
}

/// The effective operator for one full protocol cycle, acting on the
/// non-mediator space. Built from unitary factors and rank-one mediator
/// projections, so its spectral radius never exceeds 1 (up to roundoff).
#[derive(Debug, Clone)]
pub struct CompiledCycle {
    pub matrix: CMatrix,
    pub source: ProtocolProgram,
}

pub type EffectiveOperator = CompiledCycle;

/// ⟨φ'|F|φ⟩ over the mediator indices of a full-space operator F.
fn mediator_sandwich(
    f: &CMatrix,
    phi_out: &CVector,
    phi_in: &CVector,
    mediator_dim: usize,
    rest_dim: usize,
) -> CMatrix {
    let mut r = CMatrix::zeros(rest_dim, rest_dim);
    for a in 0..mediator_dim {
        let ca = phi_out[a].conj();
        if ca.norm() == 0.0 {
            continue;
        }
        for b in 0..mediator_dim {
            let w = ca * phi_in[b];
            if w.norm() == 0.0 {
                continue;
            }
            for i in 0..rest_dim {
                for j in 0..rest_dim {
                    r[(i, j)] += w * f[(a * rest_dim + i, b * rest_dim + j)];
                }
            }
        }
    }
    r
}

/// |φ⟩⟨φ| ⊗ 1 on the full space.
fn mediator_projector(phi: &CVector, mediator_dim: usize, rest_dim: usize) -> CMatrix {
    let full = mediator_dim * rest_dim;
    let mut p = CMatrix::zeros(full, full);
    for a in 0..mediator_dim {
        for b in 0..mediator_dim {
            let w = phi[a] * phi[b].conj();
            if w.norm() == 0.0 {
                continue;
            }
            for i in 0..rest_dim {
                p[(a * rest_dim + i, b * rest_dim + i)] = w;
            }
        }
    }
    p
}

/// Compile a program into its effective operator: the ordered product of the
/// evolution factors, opened by the prepare ket, closed by the final project
/// bra, with any interior projection inserted as a rank-one sandwich.
/// Repeated factors (same partner and duration, as in the round trip) are
/// computed once.
pub fn compile_cycle(prog: &ProtocolProgram, model: &ModelBinding) -> Result<CompiledCycle> {
    if prog.mediator != model.mediator_label {
        return Err(Error::UnknownSubsystem(prog.mediator.clone()));
    }
    let md = model.mediator_dim;
    let rd = model.rest_dim;
    let full = md * rd;
    let mut f = CMatrix::identity(full, full);
    let mut phi_in: Option<CVector> = None;
    let mut phi_out: Option<CVector> = None;
    let last = prog.steps.len() - 1;
    let mut factors: BTreeMap<(String, u64), CMatrix> = BTreeMap::new();

    for (idx, step) in prog.steps.iter().enumerate() {
        match step {
            ProtocolStep::Prepare { state, .. } => {
                phi_in = Some(model.mediator_state(state)?.clone());
            }
            ProtocolStep::Interact { partner, duration, .. } => {
                let key = (partner.clone(), duration.to_bits());
                if !factors.contains_key(&key) {
                    let h = HermitianOperator::new(
                        model.h0.matrix() + model.interaction(partner)?.matrix(),
                    )?;
                    factors.insert(key.clone(), hermitian_matexp(&h, *duration)?);
                }
                f = &factors[&key] * f;
            }
            ProtocolStep::Free { duration } => {
                let key = (String::new(), duration.to_bits());
                if !factors.contains_key(&key) {
                    factors.insert(key.clone(), hermitian_matexp(&model.h0, *duration)?);
                }
                f = &factors[&key] * f;
            }
            ProtocolStep::Project { state, .. } => {
                let phi = model.mediator_state(state)?.clone();
                if idx == last {
                    phi_out = Some(phi);
                } else {
                    f = mediator_projector(&phi, md, rd) * f;
                }
            }
        }
    }

    let phi_in = phi_in.ok_or_else(|| parse_err(0, "program has no prepare step"))?;
    let phi_out = phi_out.ok_or_else(|| parse_err(0, "program has no final project step"))?;
    let matrix = mediator_sandwich(&f, &phi_out, &phi_in, md, rd);
    Ok(CompiledCycle { matrix, source: prog.clone() })
}
