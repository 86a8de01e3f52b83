//! Two-cavity model: a two-level atom shuttles between cavities A and B under
//! resonant Jaynes–Cummings couplings, running the round-trip cycle with a
//! mid-cycle projection. Total excitation number is conserved, so the cycle
//! operator is block diagonal over sectors k = n + m, each block a phase
//! times a real symmetric tridiagonal matrix.
//!
//! The two-mode space is truncated to the box n, m ≤ k_max; every sector with
//! k ≤ k_max is then exact (no truncation error), and everything above is
//! excluded from analysis.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::engine::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, submatrix, symmetric_eigen_real, CMatrix, CVector};
use crate::protocol::{compile_cycle, parse_program, wp2_text, CompiledCycle, ModelBinding};

const SWAP_TOL: f64 = 1e-9;

/// Model parameters; k_max is the largest total excitation number retained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub omega: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub k_max: usize,
}

impl CavityParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega: f64,
        g_a: f64,
        g_b: f64,
        t_a: f64,
        t_b: f64,
        tau_a: f64,
        tau_b: f64,
        k_max: usize,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega", omega),
            ("g_a", g_a),
            ("g_b", g_b),
            ("t_a", t_a),
            ("t_b", t_b),
            ("tau_a", tau_a),
            ("tau_b", tau_b),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("omega", omega), ("g_a", g_a), ("g_b", g_b), ("t_a", t_a), ("t_b", t_b)]
        {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if tau_a < 0.0 || tau_b < 0.0 {
            return Err(Error::InvalidParameter("free-evolution times must be >= 0".into()));
        }
        if k_max < 1 {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        Ok(Self { omega, g_a, g_b, t_a, t_b, tau_a, tau_b, k_max })
    }

    /// T, the duration of one full round trip.
    pub fn total_period(&self) -> f64 {
        self.t_a + self.tau_a + self.t_b + self.tau_b
    }

    pub fn angles(&self) -> CavityAngles {
        CavityAngles { ga_ta: self.g_a * self.t_a, gb_tb: self.g_b * self.t_b }
    }

    /// Levels per mode, k_max + 1.
    pub fn mode_dim(&self) -> usize {
        self.k_max + 1
    }

    /// Dimension of the two-mode box space.
    pub fn box_dim(&self) -> usize {
        self.mode_dim() * self.mode_dim()
    }

    /// Index of |n, m⟩ in the box space.
    pub fn mode_index(&self, n: usize, m: usize) -> usize {
        n * self.mode_dim() + m
    }

    /// Whether sin(g_A t_A) = ±1 within tolerance (the one-photon exchange
    /// with cavity A is a complete swap). This is the condition that makes
    /// the doublet eigenvalue reach unit magnitude and splits every sector.
    pub fn satisfies_full_swap(&self) -> bool {
        (self.angles().ga_ta.sin().abs() - 1.0).abs() <= SWAP_TOL
    }

    /// +1.0 or -1.0 according to the sign of sin(g_A t_A).
    pub fn swap_sign(&self) -> f64 {
        self.angles().ga_ta.sin().signum()
    }
}

/// The Rabi angles φ_A^(n) = g_A t_A √n, φ_B^(m) = g_B t_B √m, and the sector
/// matrix elements built from them.
#[derive(Debug, Clone, Copy)]
pub struct CavityAngles {
    pub ga_ta: f64,
    pub gb_tb: f64,
}

impl CavityAngles {
    pub fn phi_a(&self, n: usize) -> f64 {
        self.ga_ta * (n as f64).sqrt()
    }

    pub fn phi_b(&self, m: usize) -> f64 {
        self.gb_tb * (m as f64).sqrt()
    }

    /// Diagonal element c_j of the k-sector block (state |j, k-j⟩).
    pub fn c_elem(&self, j: usize, k: usize) -> f64 {
        let sa = self.phi_a(j).sin();
        let ca = self.phi_a(j).cos();
        let cb = self.phi_b(k - j + 1).cos();
        let sb = self.phi_b(k - j).sin();
        sa * sa * cb * cb + ca * ca * sb * sb
    }

    /// Off-diagonal element d_j coupling |j, k-j⟩ and |j-1, k-j+1⟩.
    pub fn d_elem(&self, j: usize, k: usize) -> f64 {
        self.phi_a(j).sin()
            * self.phi_a(j - 1).cos()
            * self.phi_b(k - j + 1).sin()
            * self.phi_b(k - j + 1).cos()
    }
}

/// Occupation pair of the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockLabel {
    pub n: usize,
    pub m: usize,
}

impl FockLabel {
    pub fn sector(&self) -> usize {
        self.n + self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

fn cphase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Atom ⊗ mode_a ⊗ mode_b index (atom slowest), modes truncated at `dim` levels.
fn full_index(dim: usize, s: usize, n: usize, m: usize) -> usize {
    s * dim * dim + n * dim + m
}

/// One interaction propagator e^{-i(H₀+H'_X·)t} transcribed doublet by
/// doublet: within {|↑,l⟩, |↓,l+1⟩} of the interacting mode, a rotation by
/// φ^(l+1) with overall phase e^{-i(l+1)ωt}; the other mode contributes
/// spectator phases. The dangling top state of the truncated mode keeps only
/// its diagonal term, so sectors above the cutoff are not faithful.
pub fn jc_propagator(side: Side, p: &CavityParams, cutoff: usize) -> CMatrix {
    let dim = cutoff.max(1) + 1;
    let (g, t) = match side {
        Side::A => (p.g_a, p.t_a),
        Side::B => (p.g_b, p.t_b),
    };
    let gt = g * t;
    let phi = |l: usize| gt * (l as f64).sqrt();
    let w = p.omega;
    let total = 2 * dim * dim;
    let mut u = CMatrix::zeros(total, total);

    // own-mode blocks; the outer loop runs over the spectator mode
    for spectator in 0..dim {
        let spectator_phase = cphase(-w * spectator as f64 * t);
        let idx = |s: usize, own: usize| match side {
            Side::A => full_index(dim, s, own, spectator),
            Side::B => full_index(dim, s, spectator, own),
        };
        // ground |↓, 0⟩ is untouched up to the spectator phase
        u[(idx(1, 0), idx(1, 0))] = spectator_phase;
        for l in 0..dim - 1 {
            let ph = spectator_phase * cphase(-w * (l + 1) as f64 * t);
            let cs = C64::new(phi(l + 1).cos(), 0.0);
            let sn = C64::new(0.0, -phi(l + 1).sin());
            u[(idx(0, l), idx(0, l))] = ph * cs;
            u[(idx(0, l), idx(1, l + 1))] = ph * sn;
            u[(idx(1, l + 1), idx(0, l))] = ph * sn;
            u[(idx(1, l + 1), idx(1, l + 1))] = ph * cs;
        }
        // dangling |↑, dim-1⟩: partner lies outside the box
        let l = dim - 1;
        u[(idx(0, l), idx(0, l))] = spectator_phase
            * cphase(-w * (l + 1) as f64 * t)
            * C64::new(phi(l + 1).cos(), 0.0);
    }
    u
}

/// Free and interaction Hamiltonians on atom ⊗ mode_a ⊗ mode_b.
pub fn hamiltonians(p: &CavityParams) -> (CMatrix, CMatrix, CMatrix) {
    let dim = p.mode_dim();
    let id2 = CMatrix::identity(2, 2);
    let idm = CMatrix::identity(dim, dim);
    let mut lower = CMatrix::zeros(dim, dim); // annihilation operator
    for n in 1..dim {
        lower[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let number = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let atom_number = CMatrix::from_row_slice(2, 2, &[
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ]);
    let sigma_plus = CMatrix::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ]);
    let sigma_minus = sigma_plus.transpose();

    let w = C64::new(p.omega, 0.0);
    let h0 = (atom_number.kronecker(&idm).kronecker(&idm)
        + id2.kronecker(&number).kronecker(&idm)
        + id2.kronecker(&idm).kronecker(&number))
        * w;
    let raise = lower.adjoint();
    let hxa = (sigma_plus.kronecker(&lower).kronecker(&idm)
        + sigma_minus.kronecker(&raise).kronecker(&idm))
        * C64::new(p.g_a, 0.0);
    let hxb = (sigma_plus.kronecker(&idm).kronecker(&lower)
        + sigma_minus.kronecker(&idm).kronecker(&raise))
        * C64::new(p.g_b, 0.0);
    (h0, hxa, hxb)
}

/// Protocol binding: atom mediator over the two-mode box space.
pub fn binding(p: &CavityParams) -> ModelBinding {
    let (h0, hxa, hxb) = hamiltonians(p);
    let up = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let down = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    ModelBinding::new(
        "X",
        vec![("up".into(), up), ("down".into(), down)],
        p.box_dim(),
        h0,
        vec![("A".into(), hxa), ("B".into(), hxb)],
    )
    .expect("model Hamiltonians are Hermitian by construction")
}

/// Compile the round-trip cycle for these parameters.
pub fn wp2_cycle(p: &CavityParams) -> Result<CompiledCycle> {
    let prog = parse_program(&wp2_text(p.t_a, p.tau_a, p.t_b, p.tau_b))?;
    compile_cycle(&prog, &binding(p))
}

/// Closed form of the round-trip cycle operator on the box space: per source
/// state |n,m⟩ a diagonal term, a raising term |n+1,m-1⟩ and a lowering term
/// |n-1,m+1⟩, all carrying the sector phase −e^{-2i(n+m)ωT}.
pub fn build_vc_closed(p: &CavityParams) -> CMatrix {
    let dim = p.mode_dim();
    let ang = p.angles();
    let t = p.total_period();
    let mut vc = CMatrix::zeros(dim * dim, dim * dim);
    for n in 0..dim {
        for m in 0..dim {
            let ph = -cphase(-2.0 * (n + m) as f64 * p.omega * t);
            let col = p.mode_index(n, m);
            let diag = ang.phi_a(n).sin().powi(2) * ang.phi_b(m + 1).cos().powi(2)
                + ang.phi_a(n).cos().powi(2) * ang.phi_b(m).sin().powi(2);
            vc[(col, col)] += ph * C64::new(diag, 0.0);
            if n + 1 < dim && m >= 1 {
                let amp = ang.phi_a(n + 1).sin()
                    * ang.phi_a(n).cos()
                    * ang.phi_b(m).sin()
                    * ang.phi_b(m).cos();
                vc[(p.mode_index(n + 1, m - 1), col)] += ph * C64::new(amp, 0.0);
            }
            if n >= 1 && m + 1 < dim {
                let amp = ang.phi_a(n).sin()
                    * ang.phi_a(n - 1).cos()
                    * ang.phi_b(m + 1).sin()
                    * ang.phi_b(m + 1).cos();
                vc[(p.mode_index(n - 1, m + 1), col)] += ph * C64::new(amp, 0.0);
            }
        }
    }
    vc
}

/// Box indices of sector k in the canonical order |k,0⟩, |k-1,1⟩, …, |0,k⟩.
pub fn sector_indices(k: usize, p: &CavityParams) -> Result<Vec<usize>> {
    if k > p.k_max {
        return Err(Error::SectorOutOfRange { k, k_max: p.k_max });
    }
    Ok((0..=k).map(|r| p.mode_index(k - r, r)).collect())
}

/// Sector states in the same order as [`sector_indices`].
pub fn sector_labels(k: usize, p: &CavityParams) -> Result<Vec<FockLabel>> {
    if k > p.k_max {
        return Err(Error::SectorOutOfRange { k, k_max: p.k_max });
    }
    Ok((0..=k).map(|r| FockLabel { n: k - r, m: r }).collect())
}

/// Largest deviation between two box-space operators over all sector blocks
/// with k ≤ k_hi (the region where the truncation is exact).
pub fn max_sector_deviation(a: &CMatrix, b: &CMatrix, p: &CavityParams, k_hi: usize) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=k_hi.min(p.k_max) {
        let idx = sector_indices(k, p).expect("k <= k_max");
        let da = submatrix(a, &idx);
        let db = submatrix(b, &idx);
        worst = worst.max(max_abs(&(da - db)));
    }
    worst
}

/// The real symmetric tridiagonal block of the cycle on sector k, plus the
/// common phase: the cycle restricted to the sector equals phase × entries.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    pub k: usize,
    pub entries: DMatrix<f64>,
    /// Diagonal in order c_k … c_0.
    pub c: Vec<f64>,
    /// Off-diagonal in order d_k … d_1.
    pub d: Vec<f64>,
    /// −e^{-2ikωT}.
    pub phase: C64,
}

impl SectorMatrix {
    /// phase × entries as a complex matrix.
    pub fn complex_block(&self) -> CMatrix {
        CMatrix::from_fn(self.k + 1, self.k + 1, |i, j| {
            self.phase * C64::new(self.entries[(i, j)], 0.0)
        })
    }
}

pub fn sector_matrix(k: usize, p: &CavityParams) -> Result<SectorMatrix> {
    if k < 1 || k > p.k_max {
        return Err(Error::SectorOutOfRange { k, k_max: p.k_max });
    }
    let ang = p.angles();
    let dim = k + 1;
    let mut entries = DMatrix::<f64>::zeros(dim, dim);
    let mut c = Vec::with_capacity(dim);
    let mut d = Vec::with_capacity(k);
    for r in 0..dim {
        let j = k - r; // row r carries state |j, k-j⟩
        entries[(r, r)] = ang.c_elem(j, k);
        c.push(entries[(r, r)]);
        if r + 1 < dim {
            let dj = ang.d_elem(j, k);
            entries[(r, r + 1)] = dj;
            entries[(r + 1, r)] = dj;
            d.push(dj);
        }
    }
    let phase = -cphase(-2.0 * k as f64 * p.omega * p.total_period());
    Ok(SectorMatrix { k, entries, c, d, phase })
}

/// Analysis of the one-excitation sector under the full-swap condition.
#[derive(Debug, Clone)]
pub struct DoubletReport {
    /// The unit-magnitude eigenvalue −e^{-2iωT}.
    pub eigenvalue: C64,
    /// cos φ_B^(1) |1,0⟩ ± sin φ_B^(1) |0,1⟩ in sector coordinates.
    pub eigenvector: PureState,
    /// The orthogonal zero-mode.
    pub zero_vector: PureState,
    /// Sign of sin(g_A t_A), fixing the ± above.
    pub sign: f64,
    /// cos φ_B^(1) ≈ 0 means the surviving state is a product state, so the
    /// cycle purifies but does not distill entanglement.
    pub product_state_warning: bool,
}

pub fn doublet_analysis(p: &CavityParams) -> Result<DoubletReport> {
    let ang = p.angles();
    if !p.satisfies_full_swap() {
        return Err(Error::SwapConditionNotMet { value: ang.ga_ta.sin().abs(), tol: SWAP_TOL });
    }
    let sign = p.swap_sign();
    let cb = ang.phi_b(1).cos();
    let sb = ang.phi_b(1).sin();
    let eigenvector = PureState::from_unnormalized(CVector::from_vec(vec![
        C64::new(cb, 0.0),
        C64::new(sign * sb, 0.0),
    ]))?;
    let zero_vector = PureState::from_unnormalized(CVector::from_vec(vec![
        C64::new(-sign * sb, 0.0),
        C64::new(cb, 0.0),
    ]))?;
    let eigenvalue = -cphase(-2.0 * p.omega * p.total_period());

    // cross-check against the sector block itself
    let block = sector_matrix(1, p)?.complex_block();
    let v = &block * eigenvector.vector() - eigenvector.vector().map(|z| z * eigenvalue);
    if v.norm() > 1e-9 {
        return Err(Error::Inconsistency(format!(
            "doublet eigenvector residual {} exceeds tolerance",
            v.norm()
        )));
    }
    let z = (&block * zero_vector.vector()).norm();
    if z > 1e-9 {
        return Err(Error::Inconsistency(format!("doublet zero-mode residual {z}")));
    }

    Ok(DoubletReport {
        eigenvalue,
        eigenvector,
        zero_vector,
        sign,
        product_state_warning: cb.abs() < 1e-9,
    })
}

/// The distilled sector-k state cos φ_B^(k)|1,k-1⟩ ± sin φ_B^(k)|0,k⟩ on the
/// box space, verified to be an eigenvector of the cycle with eigenvalue
/// −e^{-2ikωT}. Requires the full-swap condition; k = 0 is annihilated by
/// the cycle and rejected.
pub fn target_state(p: &CavityParams, k: usize) -> Result<PureState> {
    if k < 1 || k > p.k_max {
        return Err(Error::SectorOutOfRange { k, k_max: p.k_max });
    }
    let ang = p.angles();
    if !p.satisfies_full_swap() {
        return Err(Error::SwapConditionNotMet { value: ang.ga_ta.sin().abs(), tol: SWAP_TOL });
    }
    let sign = p.swap_sign();
    let mut v = CVector::zeros(p.box_dim());
    v[p.mode_index(1, k - 1)] = C64::new(ang.phi_b(k).cos(), 0.0);
    v[p.mode_index(0, k)] = C64::new(sign * ang.phi_b(k).sin(), 0.0);
    let state = PureState::from_unnormalized(v)?;

    let vc = build_vc_closed(p);
    let lambda = -cphase(-2.0 * k as f64 * p.omega * p.total_period());
    let resid = (&vc * state.vector() - state.vector().map(|z| z * lambda)).norm();
    if resid > 1e-9 {
        return Err(Error::Inconsistency(format!(
            "sector-{k} target residual {resid} exceeds tolerance"
        )));
    }
    Ok(state)
}

/// Maximally mixed state over the physical simplex n + m ≤ k_max, embedded
/// in the box space.
pub fn maximally_mixed_simplex(p: &CavityParams) -> DensityMatrix {
    let dim = p.mode_dim();
    let count = (p.k_max + 1) * (p.k_max + 2) / 2;
    let w = C64::new(1.0 / count as f64, 0.0);
    let mut m = CMatrix::zeros(p.box_dim(), p.box_dim());
    for n in 0..dim {
        for mm in 0..dim {
            if n + mm <= p.k_max {
                let i = p.mode_index(n, mm);
                m[(i, i)] = w;
            }
        }
    }
    DensityMatrix::new(m).expect("uniform diagonal state is valid")
}

/// Result of the vacuum-preparation pre-protocol on cavity B.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    /// Probability that all `reps` conditioning steps succeeded.
    pub yield_prob: f64,
    /// Weight remaining outside m = 0 after preparation.
    pub residual: f64,
}

/// Drive cavity B toward its vacuum: send the atom in |↓⟩ through B alone and
/// keep the |↓⟩ outcome, `reps` times. The kept-outcome operator is diagonal,
/// |n,m⟩ ↦ e^{-iω(n+m)t_B} cos φ_B^(m) |n,m⟩, so every m > 0 level decays
/// geometrically while the m = 0 line is preserved exactly.
pub fn prepare_initial_state(
    rho: &DensityMatrix,
    p: &CavityParams,
    reps: usize,
) -> Result<PreparedState> {
    if rho.dim() != p.box_dim() {
        return Err(Error::DimensionMismatch { expected: p.box_dim(), got: rho.dim() });
    }
    let ang = p.angles();
    for m in 1..=p.k_max {
        if ang.phi_b(m).cos().abs() >= 1.0 - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "fine-tuned g_B t_B: |cos φ_B^({m})| = 1, level {m} would not decay"
            )));
        }
    }
    let dim = p.mode_dim();
    let mut w = CVector::zeros(p.box_dim());
    for n in 0..dim {
        for m in 0..dim {
            w[p.mode_index(n, m)] =
                cphase(-p.omega * (n + m) as f64 * p.t_b) * C64::new(ang.phi_b(m).cos(), 0.0);
        }
    }
    let mut sigma = rho.matrix().clone();
    let mut yield_prob = 1.0f64;
    for rep in 0..reps {
        let mut next = sigma.clone();
        for i in 0..p.box_dim() {
            for j in 0..p.box_dim() {
                next[(i, j)] = w[i] * sigma[(i, j)] * w[j].conj();
            }
        }
        let s = next.trace().re;
        yield_prob *= s;
        if s <= 0.0 || s.is_nan() || yield_prob < crate::engine::YIELD_FLOOR {
            return Err(Error::YieldUnderflow { last_valid: rep });
        }
        sigma = next / C64::new(s, 0.0);
    }
    let mut residual = 0.0;
    for n in 0..dim {
        for m in 1..dim {
            residual += sigma[(p.mode_index(n, m), p.mode_index(n, m))].re;
        }
    }
    Ok(PreparedState { rho: DensityMatrix::new(sigma)?, yield_prob, residual })
}

/// Spectral summary of one sector: all eigenvalue magnitudes (descending),
/// the eigenvectors attached to unit-magnitude eigenvalues, and whether the
/// sector splits (d₂ = 0) under the current parameters.
#[derive(Debug, Clone)]
pub struct SectorReport {
    pub k: usize,
    pub eigenvalue_magnitudes: Vec<f64>,
    pub unit_eigenvectors: Vec<Vec<f64>>,
    pub split: bool,
}

impl SectorReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "eigenvalue_magnitudes": self.eigenvalue_magnitudes,
            "unit_eigenvectors": self.unit_eigenvectors,
            "split": self.split,
        })
    }
}

pub fn sector_report(k: usize, p: &CavityParams) -> Result<SectorReport> {
    let sm = sector_matrix(k, p)?;
    let (eigenvalues, eigenvectors) = symmetric_eigen_real(&sm.entries)?;
    let mut order: Vec<usize> = (0..=k).collect();
    order.sort_by(|&a, &b| eigenvalues[b].abs().total_cmp(&eigenvalues[a].abs()));
    let eigenvalue_magnitudes: Vec<f64> = order.iter().map(|&i| eigenvalues[i].abs()).collect();
    let mut unit_eigenvectors = Vec::new();
    for &i in &order {
        if (eigenvalues[i].abs() - 1.0).abs() <= 1e-9 {
            unit_eigenvectors.push(eigenvectors.column(i).iter().cloned().collect());
        }
    }
    let split = k >= 2 && sm.d[k - 2].abs() <= 1e-12; // d_2 sits next-to-last in d_k…d_1
    Ok(SectorReport { k, eigenvalue_magnitudes, unit_eigenvectors, split })
}

/// The published generic g_B t_B values used by scans and reports.
pub fn generic_gbtb_values() -> [f64; 3] {
    [0.3, 0.7, 1.1]
}

/// A g_B t_B choice is generic when no φ_B^(j), j ≤ k_max, sits on a zero of
/// sin or cos.
pub fn gbtb_is_generic(gb_tb: f64, k_max: usize) -> bool {
    let ang = CavityAngles { ga_ta: 0.0, gb_tb };
    (1..=k_max).all(|j| ang.phi_b(j).sin().abs() > 1e-6 && ang.phi_b(j).cos().abs() > 1e-6)
}
