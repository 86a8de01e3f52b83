//! Conditional-evolution engine: iterate an effective operator on a density
//! matrix, track yield/fidelity/purity, and characterize the asymptotic state
//! from the spectral decomposition.

use num_complex::Complex64 as C64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{
    all_finite, hermitian_eigen, hermiticity_deviation, spectral_decompose, CCovector, CMatrix,
    CVector, DEGENERACY_TOL,
};

const DM_TOL: f64 = 1e-10;
/// Below this cumulative yield the conditional state is considered undefined.
pub const YIELD_FLOOR: f64 = 1e-300;

/// A unit-norm pure state.
#[derive(Debug, Clone)]
pub struct PureState {
    vector: CVector,
}

impl PureState {
    /// Accepts a vector that is already unit norm (within 1e-9).
    pub fn new(vector: CVector) -> Result<Self> {
        let n = vector.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("expected unit norm, got {n}")));
        }
        Ok(Self { vector })
    }

    /// Normalizes the input; errors on (near-)zero vectors.
    pub fn from_unnormalized(vector: CVector) -> Result<Self> {
        let n = vector.norm();
        if !n.is_finite() || n < 1e-150 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { vector: vector / C64::new(n, 0.0) })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self { vector: v }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.vector.dotc(&other.vector)
    }

    /// |⟨self|other⟩|— the global-phase-free comparison used everywhere.
    pub fn abs_overlap(&self, other: &PureState) -> f64 {
        self.overlap(other).norm()
    }
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite
/// (all within 1e-10).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if !all_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian: max |ρ - ρ†| = {dev:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DM_TOL || tr.im.abs() > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace = {tr}, expected 1")));
        }
        let (eigenvalues, _) = hermitian_eigen(&matrix)
            .map_err(|e| Error::InvalidDensityMatrix(format!("eigensolver failed: {e}")))?;
        let min = eigenvalues.into_iter().fold(f64::INFINITY, f64::min);
        if min < -DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        Self { matrix: CMatrix::identity(dim, dim) * C64::new(w, 0.0) }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.vector();
        let n = v.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        Self { matrix: m }
    }

    /// Diagonal state from non-negative weights (normalized here).
    pub fn from_diagonal_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDensityMatrix("no weights given".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDensityMatrix(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDensityMatrix("weights sum to zero".into()));
        }
        let mut m = CMatrix::zeros(weights.len(), weights.len());
        for (i, w) in weights.iter().enumerate() {
            m[(i, i)] = C64::new(w / total, 0.0);
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// ⟨target|ρ|target⟩.
    pub fn fidelity_to(&self, target: &PureState) -> f64 {
        let v = target.vector();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += v[i].conj() * self.matrix[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub yield_prob: f64,
    pub fidelity: f64,
    pub purity: f64,
}

/// Per-cycle record of the conditional evolution.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    /// CSV with the fixed header `N,yield,fidelity,purity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,yield,fidelity,purity\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.n, r.yield_prob, r.fidelity, r.purity));
        }
        out
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the N=0 row")
    }
}

/// Repeated conditional application of `v`: row N holds the cumulative yield
/// P(N) = Tr[V^N ρ0 V†^N], the fidelity of the renormalized state to `target`,
/// and its purity. The state is renormalized every cycle and the yield is
/// tracked multiplicatively so long runs cannot underflow the state itself.
pub fn iterate(
    v: &CMatrix,
    rho0: &DensityMatrix,
    n_max: usize,
    target: &PureState,
) -> Result<IterationTrace> {
    if v.nrows() != rho0.dim() || v.ncols() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), got: v.nrows() });
    }
    if target.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), got: target.dim() });
    }
    let vd = v.adjoint();
    let mut sigma = rho0.matrix().clone();
    let mut yield_prob = 1.0f64;
    let mut rows = Vec::with_capacity(n_max + 1);
    rows.push(TraceRow {
        n: 0,
        yield_prob,
        fidelity: rho0.fidelity_to(target),
        purity: rho0.purity(),
    });
    for n in 1..=n_max {
        sigma = v * sigma * &vd;
        let s = sigma.trace().re;
        yield_prob *= s;
        if s <= 0.0 || s.is_nan() || yield_prob < YIELD_FLOOR {
            return Err(Error::YieldUnderflow { last_valid: n - 1 });
        }
        sigma /= C64::new(s, 0.0);
        let state = DensityMatrix { matrix: sigma.clone() };
        rows.push(TraceRow {
            n,
            yield_prob,
            fidelity: state.fidelity_to(target),
            purity: state.purity(),
        });
    }
    Ok(IterationTrace { rows })
}

/// One magnitude-maximal eigenpair with its yield prefactor ⟨v|ρ0|v⟩.
#[derive(Debug, Clone)]
pub struct DominantPair {
    pub lambda: C64,
    pub right: PureState,
    pub left: CCovector,
    pub prefactor: f64,
}

/// Where the conditional evolution is headed for large N.
///
/// When several eigenvalues tie at the maximal magnitude (`unique == false`),
/// `dominant_set` carries the whole tied set and `target`/`left0`/`lambda0`
/// designate the member with the largest yield prefactor for the supplied
/// initial state, so the reported target is the component that actually
/// survives the conditioning.
#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub lambda0: C64,
    pub target: PureState,
    pub left0: CCovector,
    /// ⟨v₀|ρ(0)|v₀⟩; the large-N yield behaves as |λ₀|^{2N} × this.
    pub yield_prefactor: f64,
    pub lambda0_abs: f64,
    pub optimal: bool,
    pub unique: bool,
    pub dominant_set: Vec<DominantPair>,
}

impl AsymptoticReport {
    pub fn to_json(&self) -> serde_json::Value {
        let cvec = |v: &CVector| -> Vec<serde_json::Value> {
            v.iter().map(|z| json!({"re": z.re, "im": z.im})).collect()
        };
        let rvec = |v: &CCovector| -> Vec<serde_json::Value> {
            v.iter().map(|z| json!({"re": z.re, "im": z.im})).collect()
        };
        json!({
            "lambda0": {"re": self.lambda0.re, "im": self.lambda0.im},
            "lambda0_abs": self.lambda0_abs,
            "target": cvec(self.target.vector()),
            "left0": rvec(&self.left0),
            "yield_prefactor": self.yield_prefactor,
            "optimal": self.optimal,
            "unique": self.unique,
            "dominant_set": self.dominant_set.iter().map(|d| json!({
                "lambda": {"re": d.lambda.re, "im": d.lambda.im},
                "prefactor": d.prefactor,
            })).collect::<Vec<_>>(),
        })
    }
}

/// ⟨v|ρ|v⟩ for a left row vector v.
fn left_prefactor(left: &CCovector, rho: &DensityMatrix) -> f64 {
    (left * rho.matrix() * left.adjoint())[(0, 0)].re
}

pub fn asymptotics(v: &CMatrix, rho0: &DensityMatrix) -> Result<AsymptoticReport> {
    if v.nrows() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), got: v.nrows() });
    }
    let sd = spectral_decompose(v)?;
    let dominant: Vec<usize> = sd.dominant_indices();
    let unique = sd.unique_dominant();
    let pairs: Vec<DominantPair> = dominant
        .iter()
        .map(|&k| {
            let left = sd.left_vectors[k].clone();
            let prefactor = left_prefactor(&left, rho0);
            DominantPair {
                lambda: sd.eigenvalues[k],
                right: PureState::from_unnormalized(sd.right_vectors[k].clone())
                    .expect("eigenvectors are unit norm"),
                left,
                prefactor,
            }
        })
        .collect();
    let best = pairs
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.prefactor
                .total_cmp(&b.prefactor)
                .then(ib.cmp(ia)) // ties: keep the earliest in eigenvalue order
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lambda0 = pairs[best].lambda;
    let lambda0_abs = sd.spectral_radius();
    Ok(AsymptoticReport {
        lambda0,
        target: pairs[best].right.clone(),
        left0: pairs[best].left.clone(),
        yield_prefactor: pairs[best].prefactor,
        lambda0_abs,
        optimal: (lambda0_abs - 1.0).abs() <= DEGENERACY_TOL,
        unique,
        dominant_set: pairs,
    })
}

/// Smallest N with 1 - F(N) ≤ ε, by direct iteration toward the dominant
/// eigenvector. Needs a unique dominant eigenvalue; the step count scales
/// like log ε / log |λ₁/λ₀|.
pub fn convergence_steps(v: &CMatrix, rho0: &DensityMatrix, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be in (0,1), got {epsilon}")));
    }
    let sd = spectral_decompose(v)?;
    if !sd.unique_dominant() {
        return Err(Error::NonUniqueDominant { gap: sd.dominant_gap });
    }
    let target = PureState::from_unnormalized(sd.right_vectors[0].clone())?;
    let gap = sd.dominant_gap;
    let estimate = if gap > 0.0 && gap < 1.0 {
        (epsilon.ln() / gap.ln()).ceil().max(1.0) as usize
    } else {
        1
    };
    let max_steps = (40 * estimate).max(1000);
    let vd = v.adjoint();
    let mut sigma = rho0.matrix().clone();
    let mut yield_prob = 1.0f64;
    for n in 0..=max_steps {
        let state = DensityMatrix { matrix: sigma.clone() };
        if 1.0 - state.fidelity_to(&target) <= epsilon {
            return Ok(n);
        }
        sigma = v * sigma * &vd;
        let s = sigma.trace().re;
        yield_prob *= s;
        if s <= 0.0 || s.is_nan() || yield_prob < YIELD_FLOOR {
            return Err(Error::YieldUnderflow { last_valid: n });
        }
        sigma /= C64::new(s, 0.0);
    }
    Err(Error::NotConverged { max_steps })
}
