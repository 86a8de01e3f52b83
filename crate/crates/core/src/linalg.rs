//! Dense complex matrices, Hermitian matrix exponentials, and general
//! (non-Hermitian) eigendecomposition with biorthogonal left/right pairs.
//!
//! Everything is plain `f64` double precision on `nalgebra` dynamic matrices;
//! the dimensions in this crate stay small (≲ 400), so dense algorithms are
//! the right tool throughout.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::engine::DensityMatrix;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
/// Row vector; used for left eigenvectors ⟨v| (applied without extra conjugation).
pub type CCovector = RowDVector<C64>;

/// Tolerance for ⟨v_n|u_m⟩ = δ_nm, completeness, and reconstruction checks.
pub const BIORTH_TOL: f64 = 1e-9;
/// Two eigenvalue magnitudes within this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
const HERMITICITY_TOL: f64 = 1e-12;

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Rows-and-columns restriction of `m` to the given index set.
pub fn submatrix(m: &CMatrix, indices: &[usize]) -> CMatrix {
    let k = indices.len();
    CMatrix::from_fn(k, k, |i, j| m[(indices[i], indices[j])])
}

/// Deviation from Hermiticity, max |A - A†|.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A validated Hermitian matrix; entries are energies in units with ħ = 1,
/// so they carry dimension inverse-time.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
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
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitian { max_dev: dev });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Eigenvalues and an orthonormal eigenbasis of a Hermitian matrix, by
/// cyclic Jacobi rotations. Jacobi keeps the eigenvector matrix unitary to
/// machine precision and stays accurate on clustered spectra, which the
/// excitation-sector Hamiltonians here have plenty of.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    if n == 0 || n != h.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    let mut a = h.clone();
    let mut v = CMatrix::identity(n, n);
    let fro = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let stop = f64::EPSILON * fro;
    let skip = stop / n as f64;

    let mut converged = false;
    for _sweep in 0..100 {
        let mut off2 = 0.0;
        for j in 0..n {
            for i in 0..j {
                off2 += a[(i, j)].norm_sqr();
            }
        }
        if off2.sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= skip {
                    continue;
                }
                let phase = apq / C64::new(beta, 0.0);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);
                let cc = C64::new(c, 0.0);
                // A ← G†AG, V ← VG with G = I except G[pp]=G[qq]=c,
                // G[pq]=s, G[qp]=-s̄
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = cc * aip - s.conj() * aiq;
                    a[(i, q)] = s * aip + cc * aiq;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = cc * vip - s.conj() * viq;
                    v[(i, q)] = s * vip + cc * viq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = cc * apj - s * aqj;
                    a[(q, j)] = s.conj() * apj + cc * aqj;
                }
                a[(p, p)] = C64::new(app - t * beta, 0.0);
                a[(q, q)] = C64::new(aqq + t * beta, 0.0);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::Inconsistency("Jacobi eigensolver did not converge".into()));
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((eigenvalues, v))
}

/// Real symmetric eigenproblem through the Hermitian solver. A real input
/// only ever produces real rotations, so the eigenvectors come back real.
pub fn symmetric_eigen_real(s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    let complex = CMatrix::from_fn(n, n, |i, j| C64::new(s[(i, j)], 0.0));
    let (vals, vecs) = hermitian_eigen(&complex)?;
    Ok((vals, DMatrix::from_fn(n, n, |i, j| vecs[(i, j)].re)))
}

/// e^{-iHt} by diagonalizing H and exponentiating the eigenphases.
///
/// Exact unitarity of the result is what matters here, which is why the
/// exponential goes through the Hermitian eigenbasis rather than a series.
pub fn hermitian_matexp(h: &HermitianOperator, t: f64) -> Result<CMatrix> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let n = h.dim();
    let (eigenvalues, vectors) = hermitian_eigen(&h.matrix)?;
    let mut phased = vectors.clone();
    for k in 0..n {
        let phase = C64::from_polar(1.0, -eigenvalues[k] * t);
        for i in 0..n {
            phased[(i, k)] *= phase;
        }
    }
    Ok(phased * vectors.adjoint())
}

/// Eigenvalues with biorthogonal right/left eigenvectors of a (generally
/// non-normal) operator V:
///
///   V u_n = λ_n u_n,   v_n V = λ_n v_n,   v_n · u_m = δ_nm,
///
/// sorted by descending |λ_n| (ties: descending real part, then imaginary
/// part). Right vectors are unit norm; left rows carry the normalization.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: Vec<CVector>,
    pub left_vectors: Vec<CCovector>,
    /// |λ_1| / |λ_0|; defined as 0 for dim-1 operators.
    pub dominant_gap: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σ_n λ_n^N |u_n⟩⟨v_n|, the N-th power of the decomposed operator.
    pub fn power_matrix(&self, n: u32) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for k in 0..d {
            let lk = self.eigenvalues[k].powu(n);
            let u = &self.right_vectors[k];
            let v = &self.left_vectors[k];
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += lk * u[i] * v[j];
                }
            }
        }
        out
    }

    /// Σ_n λ_n |u_n⟩⟨v_n|, which must reproduce the decomposed operator.
    pub fn reconstruct(&self) -> CMatrix {
        self.power_matrix(1)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |l| l.norm())
    }

    /// True when the largest-magnitude eigenvalue is isolated by more than
    /// the relative degeneracy tolerance.
    pub fn unique_dominant(&self) -> bool {
        self.dim() == 1 || self.dominant_gap < 1.0 - DEGENERACY_TOL
    }

    /// Indices of all eigenvalues within relative `DEGENERACY_TOL` of the
    /// maximal magnitude.
    pub fn dominant_indices(&self) -> Vec<usize> {
        let top = self.spectral_radius();
        if top == 0.0 {
            return vec![0];
        }
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.norm() >= top * (1.0 - DEGENERACY_TOL))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Full spectral decomposition of a square complex matrix.
///
/// Route: complex Schur form, eigenvectors by back-substitution on the
/// triangular factor, then left vectors as rows of the inverse of the
/// right-eigenvector matrix (which enforces biorthonormality exactly).
/// Defective inputs fail the residual checks and come back as
/// `NonDiagonalizable`.
pub fn spectral_decompose(v: &CMatrix) -> Result<SpectralData> {
    let n = v.nrows();
    if n != v.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: v.ncols() });
    }
    if !all_finite(v) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = max_abs(v).max(1.0);

    if n == 1 {
        return Ok(SpectralData {
            eigenvalues: vec![v[(0, 0)]],
            right_vectors: vec![CVector::from_element(1, C64::new(1.0, 0.0))],
            left_vectors: vec![CCovector::from_element(1, C64::new(1.0, 0.0))],
            dominant_gap: 0.0,
        });
    }
    if max_abs(v) == 0.0 {
        // the Schur iteration cannot be asked about an all-zero matrix
        let id = CMatrix::identity(n, n);
        return Ok(SpectralData {
            eigenvalues: vec![C64::new(0.0, 0.0); n],
            right_vectors: (0..n).map(|k| id.column(k).into_owned()).collect(),
            left_vectors: (0..n).map(|k| id.row(k).into_owned()).collect(),
            dominant_gap: 0.0,
        });
    }

    let schur = v
        .clone()
        .try_schur(f64::EPSILON * scale, 100_000)
        .ok_or_else(|| Error::NonDiagonalizable {
            detail: "Schur iteration did not converge".into(),
        })?;
    let (q, t) = schur.unpack();

    // Eigenvectors of the triangular factor by back-substitution. A zero
    // denominator flags a repeated eigenvalue; the perturbed divide keeps the
    // computation going and the residual checks below decide whether the
    // matrix was actually diagonalizable.
    let tiny = f64::EPSILON * scale;
    let mut pairs: Vec<(C64, CVector)> = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[i] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in (j + 1)..=i {
                s += t[(j, l)] * y[l];
            }
            let den = t[(j, j)] - lambda;
            if den.norm() < tiny {
                y[j] = if s.norm() < tiny {
                    C64::new(0.0, 0.0)
                } else {
                    -s / C64::new(tiny, 0.0)
                };
            } else {
                y[j] = -s / den;
            }
        }
        let mut u = &q * CVector::from_vec(y);
        let norm = u.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonDiagonalizable {
                detail: format!("eigenvector for λ = {lambda} degenerated"),
            });
        }
        u /= C64::new(norm, 0.0);
        pairs.push((lambda, u));
    }

    pairs.sort_by(|a, b| {
        b.0.norm()
            .total_cmp(&a.0.norm())
            .then(b.0.re.total_cmp(&a.0.re))
            .then(b.0.im.total_cmp(&a.0.im))
    });

    let mut umat = CMatrix::zeros(n, n);
    for (k, (_, u)) in pairs.iter().enumerate() {
        umat.set_column(k, u);
    }
    let uinv = umat.clone().lu().try_inverse().ok_or_else(|| Error::NonDiagonalizable {
        detail: "right-eigenvector matrix is singular".into(),
    })?;

    let eigenvalues: Vec<C64> = pairs.iter().map(|(l, _)| *l).collect();
    let right_vectors: Vec<CVector> = pairs.into_iter().map(|(_, u)| u).collect();
    let left_vectors: Vec<CCovector> = (0..n).map(|k| uinv.row(k).into_owned()).collect();

    // Residual checks: completeness, biorthonormality, and reconstruction.
    let id_dev = max_abs(&(&umat * &uinv - CMatrix::identity(n, n)))
        .max(max_abs(&(&uinv * &umat - CMatrix::identity(n, n))));
    let mut recon = CMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                recon[(i, j)] += eigenvalues[k] * right_vectors[k][i] * left_vectors[k][j];
            }
        }
    }
    let recon_dev = max_abs(&(recon - v));
    if id_dev > BIORTH_TOL || recon_dev > BIORTH_TOL * scale {
        let mut closest = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                closest = closest.min((eigenvalues[i] - eigenvalues[j]).norm());
            }
        }
        return Err(Error::NonDiagonalizable {
            detail: format!(
                "residuals exceed tolerance (biorth {id_dev:.2e}, reconstruction {recon_dev:.2e}, \
                 closest eigenvalue pair {closest:.2e})"
            ),
        });
    }

    let dominant_gap = if n == 1 {
        0.0
    } else {
        let l0 = eigenvalues[0].norm();
        if l0 == 0.0 { 0.0 } else { eigenvalues[1].norm() / l0 }
    };

    Ok(SpectralData { eigenvalues, right_vectors, left_vectors, dominant_gap })
}

/// V^N ρ (V†)^N and its trace (the pre-normalization yield).
pub fn power_apply(v: &CMatrix, rho: &DensityMatrix, n: usize) -> Result<(CMatrix, f64)> {
    if v.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: v.nrows() });
    }
    let vd = v.adjoint();
    let mut m = rho.matrix().clone();
    for _ in 0..n {
        m = v * m * &vd;
    }
    let trace = m.trace().re;
    Ok((m, trace))
}

/// Random Hermitian matrix with entries of order `scale` (test/scan input).
pub fn random_hermitian<R: Rng>(dim: usize, scale: f64, rng: &mut R) -> HermitianOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(scale * rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..dim {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.5 * scale;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).expect("construction is Hermitian by symmetry")
}

/// Random unitary, e^{-iH} for a random Hermitian H.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let h = random_hermitian(dim, 1.0, rng);
    hermitian_matexp(&h, 1.0).expect("valid Hermitian input")
}

/// Random contraction built the way effective operators arise here: the
/// diagonal block ⟨0|U|0⟩ of a unitary on a doubled space. Its spectrum is
/// guaranteed to lie in the closed unit disk.
pub fn random_contraction<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(2 * dim, rng);
    u.view((0, 0), (dim, dim)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Independent oracle: plain Taylor series for e^{-iHt}.
    fn taylor_expm(h: &CMatrix, t: f64) -> CMatrix {
        let n = h.nrows();
        let a = h.map(|z| z * c(0.0, -t));
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..200 {
            term = &term * &a / c(k as f64, 0.0);
            sum += &term;
            if max_abs(&term) < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn matexp_zero_generator_is_identity() {
        for dim in [1, 2, 5] {
            let h = HermitianOperator::new(CMatrix::zeros(dim, dim)).unwrap();
            let u = hermitian_matexp(&h, 1.7).unwrap();
            assert!(max_abs(&(u - CMatrix::identity(dim, dim))) < 1e-14);
        }
    }

    #[test]
    fn matexp_diagonal_qubit_phases() {
        // free qubit Hamiltonian diag(0, ω) with ω = 2, evolved for t = π/2
        let h = HermitianOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.0, 0.0),
            c(2.0, 0.0),
        ])))
        .unwrap();
        let u = hermitian_matexp(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, -std::f64::consts::PI)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14 && u[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn matexp_unitary_inverse_and_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(8, 1.0, &mut rng);
        let u = hermitian_matexp(&h, 0.3).unwrap();
        let uinv = hermitian_matexp(&h, -0.3).unwrap();
        let id = CMatrix::identity(8, 8);
        assert!(max_abs(&(u.adjoint() * &u - &id)) < 1e-10);
        assert!(max_abs(&(&u * uinv - &id)) < 1e-10);
        let oracle = taylor_expm(h.matrix(), 0.3);
        assert!(max_abs(&(u - oracle)) < 1e-8);
    }

    #[test]
    fn matexp_group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(6, 1.0, &mut rng);
        let a = hermitian_matexp(&h, 0.4).unwrap();
        let b = hermitian_matexp(&h, 0.35).unwrap();
        let ab = hermitian_matexp(&h, 0.75).unwrap();
        assert!(max_abs(&(a * b - ab)) < 1e-10);
    }

    #[test]
    fn jacobi_eigen_accuracy_on_clustered_spectrum() {
        // block structure with many near-coincident eigenvalues, the case
        // where tridiagonal-QR implementations lose digits
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 48;
        let mut m = CMatrix::zeros(n, n);
        for b in 0..(n / 4) {
            let e = (b / 3) as f64; // repeated cluster centers
            for i in 0..4 {
                m[(4 * b + i, 4 * b + i)] = c(e, 0.0);
            }
            let z = C64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            m[(4 * b, 4 * b + 2)] = z;
            m[(4 * b + 2, 4 * b)] = z.conj();
        }
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        let id = CMatrix::identity(n, n);
        assert!(max_abs(&(vecs.adjoint() * &vecs - &id)) < 1e-13);
        let lam = CMatrix::from_fn(n, n, |i, j| {
            if i == j { c(vals[i], 0.0) } else { c(0.0, 0.0) }
        });
        let recon = &vecs * lam * vecs.adjoint();
        assert!(max_abs(&(recon - m)) < 1e-13);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn spectral_diagonal() {
        let v = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.2)]));
        let sd = spectral_decompose(&v).unwrap();
        assert!((sd.eigenvalues[0] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((sd.eigenvalues[1] - c(0.0, 0.2)).norm() < 1e-14);
        for k in 0..2 {
            assert!((sd.right_vectors[k][k].norm() - 1.0).abs() < 1e-12);
            assert!((sd.left_vectors[k][k].norm() - 1.0).abs() < 1e-12);
        }
        assert!((sd.dominant_gap - 0.4).abs() < 1e-12);
    }

    #[test]
    fn spectral_zero_matrix_is_trivial() {
        let sd = spectral_decompose(&CMatrix::zeros(3, 3)).unwrap();
        assert!(sd.eigenvalues.iter().all(|l| l.norm() == 0.0));
        assert!(max_abs(&sd.reconstruct()) == 0.0);
        assert_eq!(sd.dominant_gap, 0.0);
    }

    #[test]
    fn spectral_jordan_block_is_defective() {
        let mut v = CMatrix::identity(2, 2);
        v[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(spectral_decompose(&v), Err(Error::NonDiagonalizable { .. })));
    }

    #[test]
    fn spectral_identity_degenerate_but_diagonalizable() {
        let v = CMatrix::identity(3, 3);
        let sd = spectral_decompose(&v).unwrap();
        for l in &sd.eigenvalues {
            assert!((l - c(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(max_abs(&(sd.reconstruct() - v)) < 1e-10);
    }

    #[test]
    fn spectral_ordering_tie_break() {
        // equal magnitudes 0.5: order by descending re, then im
        let v = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(-0.5, 0.0),
            c(0.5, 0.0),
            c(0.0, 0.5),
        ]));
        let sd = spectral_decompose(&v).unwrap();
        assert!((sd.eigenvalues[0] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((sd.eigenvalues[1] - c(0.0, 0.5)).norm() < 1e-14);
        assert!((sd.eigenvalues[2] - c(-0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn spectral_invariants_on_random_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v = random_contraction(6, &mut rng);
            let sd = spectral_decompose(&v).unwrap();
            assert!(sd.spectral_radius() <= 1.0 + 1e-9);
            let n = sd.dim();
            for a in 0..n {
                assert!((sd.right_vectors[a].norm() - 1.0).abs() < 1e-12);
                let r = &v * &sd.right_vectors[a] - sd.right_vectors[a].map(|z| z * sd.eigenvalues[a]);
                assert!(r.norm() < 1e-9, "eigenvector residual {}", r.norm());
                for b in 0..n {
                    let dot = (&sd.left_vectors[a] * &sd.right_vectors[b])[(0, 0)];
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - c(expect, 0.0)).norm() < 1e-9);
                }
            }
            assert!(max_abs(&(sd.reconstruct() - &v)) < 1e-9);
            let mut completeness = CMatrix::zeros(n, n);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        completeness[(i, j)] += sd.right_vectors[k][i] * sd.left_vectors[k][j];
                    }
                }
            }
            assert!(max_abs(&(completeness - CMatrix::identity(n, n))) < 1e-9);
        }
    }

    #[test]
    fn spectral_roundtrip_preserves_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let v = random_contraction(5, &mut rng);
        let sd = spectral_decompose(&v).unwrap();
        let sd2 = spectral_decompose(&sd.reconstruct()).unwrap();
        for (a, b) in sd.eigenvalues.iter().zip(&sd2.eigenvalues) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn power_apply_identity_and_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::maximally_mixed(4);
        let v = CMatrix::identity(4, 4);
        let (m, tr) = power_apply(&v, &rho, 0).unwrap();
        assert!(max_abs(&(m - rho.matrix())) < 1e-15);
        assert!((tr - 1.0).abs() < 1e-12);
        let u = random_unitary(4, &mut rng);
        let (_, tr) = power_apply(&u, &rho, 5).unwrap();
        assert!((tr - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_apply_matches_spectral_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v = random_contraction(5, &mut rng);
        let rho = DensityMatrix::maximally_mixed(5);
        let n = 12;
        let (_, tr) = power_apply(&v, &rho, n).unwrap();
        let sd = spectral_decompose(&v).unwrap();
        // Σ_{n,m} λ_n^N conj(λ_m)^N ⟨v_n|ρ|v_m⟩ ⟨u_m|u_n⟩
        let mut sum = c(0.0, 0.0);
        for a in 0..5 {
            for b in 0..5 {
                let va = &sd.left_vectors[a];
                let vb = &sd.left_vectors[b];
                let vrv = (va * rho.matrix() * vb.adjoint())[(0, 0)];
                let uu = sd.right_vectors[b].dotc(&sd.right_vectors[a]);
                sum += sd.eigenvalues[a].powu(n as u32)
                    * sd.eigenvalues[b].conj().powu(n as u32)
                    * vrv
                    * uu;
            }
        }
        assert!((sum.im).abs() < 1e-10);
        assert!((sum.re - tr).abs() < 1e-8, "spectral sum {} vs direct {}", sum.re, tr);
    }
}
