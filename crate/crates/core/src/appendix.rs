//! Determinant identities for the split-off subsector {|k,0⟩, …, |2,k-2⟩}.
//!
//! Three independent routes to the same quantity keep each other honest:
//! the tridiagonal continuant (three-term recurrence) for det(S ∓ 1), the
//! product-form recursion for P_i = (-1)^{i+1} I_i, and the fully explicit
//! sum for P_k. A positive P_k excludes a +1 eigenvalue of the subsector,
//! positive J_k excludes -1; the eigensolver scan cross-checks both.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cavity::CavityAngles;
use crate::error::{Error, Result};

fn check_range(i: usize, k: usize) -> Result<()> {
    if i < 2 || i > k {
        return Err(Error::InvalidParameter(format!("need 2 <= i <= k, got i={i}, k={k}")));
    }
    Ok(())
}

/// The raw subsector matrix: diagonal c_k…c_2, off-diagonal d_k…d_3,
/// dimension (k-1)×(k-1).
pub fn subsector_matrix(k: usize, ang: &CavityAngles) -> Result<DMatrix<f64>> {
    check_range(2, k)?;
    let dim = k - 1;
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    for r in 0..dim {
        let j = k - r;
        s[(r, r)] = ang.c_elem(j, k);
        if r + 1 < dim {
            let d = ang.d_elem(j, k);
            s[(r, r + 1)] = d;
            s[(r + 1, r)] = d;
        }
    }
    Ok(s)
}

/// det over the leading block j = i…2 with the diagonal shifted by `shift`,
/// via the tridiagonal three-term recurrence.
fn continuant(i: usize, k: usize, ang: &CavityAngles, shift: f64) -> Result<f64> {
    check_range(i, k)?;
    // rows r = 1..=i-1 carry diagonal c_{i-r+1} + shift; row r couples to
    // row r-1 through d_{i-r+2}
    let mut d_prev2 = 1.0f64;
    let mut d_prev = ang.c_elem(i, k) + shift;
    for r in 2..=(i - 1) {
        let diag = ang.c_elem(i - r + 1, k) + shift;
        let off = ang.d_elem(i - r + 2, k);
        let d_cur = diag * d_prev - off * off * d_prev2;
        d_prev2 = d_prev;
        d_prev = d_cur;
    }
    Ok(d_prev)
}

/// I_i = det of the (c_j - 1, d_j) block, j = i…2.
pub fn bruteforce_i(i: usize, k: usize, ang: &CavityAngles) -> Result<f64> {
    continuant(i, k, ang, -1.0)
}

/// J_i = det of the (c_j + 1, d_j) block, j = i…2.
pub fn bruteforce_j(i: usize, k: usize, ang: &CavityAngles) -> Result<f64> {
    continuant(i, k, ang, 1.0)
}

/// The I/P/J series for one parameter point, i = 2…k in order.
#[derive(Debug, Clone)]
pub struct DeterminantSeries {
    pub k: usize,
    pub i_vals: Vec<f64>,
    pub p_vals: Vec<f64>,
    pub j_vals: Vec<f64>,
}

impl DeterminantSeries {
    pub fn p_k(&self) -> f64 {
        *self.p_vals.last().expect("k >= 2")
    }

    pub fn j_k(&self) -> f64 {
        *self.j_vals.last().expect("k >= 2")
    }
}

/// P_i by the product-form recursion
/// P_i = cos²φ_A^(i) cos²φ_B^(k-i) P_{i-1} + Π_{j<i} sin²φ_A^(j+1) sin²φ_B^(k-j),
/// with P_1 = 1; I_i = (-1)^{i+1} P_i. J_i comes from the continuant.
pub fn recursion_p(k: usize, ang: &CavityAngles) -> Result<DeterminantSeries> {
    check_range(2, k)?;
    let mut p_vals = Vec::with_capacity(k - 1);
    let mut i_vals = Vec::with_capacity(k - 1);
    let mut j_vals = Vec::with_capacity(k - 1);
    let mut p_prev = 1.0f64; // P_1
    let mut sin_prod = 1.0f64;
    for i in 2..=k {
        // extend Π_{j=1}^{i-1} sin²φ_A^(j+1) sin²φ_B^(k-j) by the j = i-1 term
        sin_prod *= ang.phi_a(i).sin().powi(2) * ang.phi_b(k - i + 1).sin().powi(2);
        let ca = ang.phi_a(i).cos();
        let cb = ang.phi_b(k - i).cos();
        let p_i = ca * ca * cb * cb * p_prev + sin_prod;
        p_prev = p_i;
        p_vals.push(p_i);
        i_vals.push(if i % 2 == 0 { -p_i } else { p_i });
        j_vals.push(bruteforce_j(i, k, ang)?);
    }
    Ok(DeterminantSeries { k, i_vals, p_vals, j_vals })
}

/// The individual non-negative terms of the explicit P_k sum: the all-cos
/// term, the mixed terms n = 2…k-1, and the all-sin term.
pub fn explicit_pk_terms(k: usize, ang: &CavityAngles) -> Result<Vec<f64>> {
    check_range(2, k)?;
    let cos2a = |l: usize| ang.phi_a(l).cos().powi(2);
    let sin2a = |l: usize| ang.phi_a(l).sin().powi(2);
    let cos2b = |l: usize| ang.phi_b(l).cos().powi(2);
    let sin2b = |l: usize| ang.phi_b(l).sin().powi(2);
    let prod = |lo: usize, hi: usize, f: &dyn Fn(usize) -> f64| -> f64 {
        if lo > hi { 1.0 } else { (lo..=hi).map(f).product() }
    };

    let mut terms = Vec::with_capacity(k);
    terms.push(prod(2, k, &cos2a) * prod(1, k.saturating_sub(2), &cos2b));
    for n in 2..k {
        terms.push(
            prod(2, n, &sin2a)
                * prod(n + 1, k, &cos2a)
                * prod(1, k - n - 1, &cos2b)
                * prod(k - n + 1, k - 1, &sin2b),
        );
    }
    terms.push(prod(2, k, &sin2a) * prod(1, k - 1, &sin2b));
    Ok(terms)
}

/// Explicit closed form of P_k, accumulated term by term (every term is a
/// product of squares, so the sum never cancels).
pub fn explicit_pk(k: usize, ang: &CavityAngles) -> Result<f64> {
    Ok(explicit_pk_terms(k, ang)?.iter().sum())
}

#[derive(Debug, Clone)]
pub struct PositivityViolation {
    pub ga_ta: f64,
    pub gb_tb: f64,
    pub k: usize,
    pub i: usize,
    pub value: f64,
}

/// Result of sampling J_i over random couplings.
#[derive(Debug, Clone)]
pub struct PositivityScan {
    pub samples: usize,
    pub k_hi: usize,
    pub seed: u64,
    pub min_j: f64,
    pub violations: Vec<PositivityViolation>,
}

/// Sample (g_A t_A, g_B t_B) uniformly in (0, π)² and evaluate every J_i,
/// 2 ≤ i ≤ k ≤ k_hi. A non-positive J_i is recorded as a violation (none are
/// expected; one would contradict the positivity argument).
pub fn positivity_scan(k_hi: usize, samples: usize, seed: u64) -> Result<PositivityScan> {
    check_range(2, k_hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_j = f64::INFINITY;
    let mut violations = Vec::new();
    for _ in 0..samples {
        let ang = CavityAngles {
            ga_ta: rng.gen_range(f64::EPSILON..std::f64::consts::PI),
            gb_tb: rng.gen_range(f64::EPSILON..std::f64::consts::PI),
        };
        for k in 2..=k_hi {
            for i in 2..=k {
                let j = bruteforce_j(i, k, &ang)?;
                min_j = min_j.min(j);
                if j <= 0.0 {
                    violations.push(PositivityViolation {
                        ga_ta: ang.ga_ta,
                        gb_tb: ang.gb_tb,
                        k,
                        i,
                        value: j,
                    });
                }
            }
        }
    }
    Ok(PositivityScan { samples, k_hi, seed, min_j, violations })
}

/// One row of the unit-eigenvalue scan.
#[derive(Debug, Clone)]
pub struct UnitScanRow {
    pub k: usize,
    pub ga_ta: f64,
    pub gb_tb: f64,
    pub p_k: f64,
    pub j_k: f64,
    pub max_abs_eig: f64,
    pub has_plus_one: bool,
    pub has_minus_one: bool,
}

/// CSV serialization with the fixed header `k,gAtA,gBtB,Pk,Jk,max_abs_eig`.
pub fn scan_csv(rows: &[UnitScanRow]) -> String {
    let mut out = String::from("k,gAtA,gBtB,Pk,Jk,max_abs_eig\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k, r.ga_ta, r.gb_tb, r.p_k, r.j_k, r.max_abs_eig
        ));
    }
    out
}

const UNIT_EIG_TOL: f64 = 1e-8;

/// Eigen-decompose each subsector directly and cross-check the determinant
/// predictions: a +1 eigenvalue must come with P_k = 0 and a -1 eigenvalue
/// with J_k = 0. det(S ∓ 1) is also compared against the eigensolver product
/// Π(μ ∓ 1); disagreement is an internal-consistency error.
pub fn unit_eigenvalue_scan(
    k_lo: usize,
    k_hi: usize,
    ang: &CavityAngles,
) -> Result<Vec<UnitScanRow>> {
    check_range(2, k_lo.max(2))?;
    if k_lo < 2 || k_lo > k_hi {
        return Err(Error::InvalidParameter(format!("bad k range {k_lo}..={k_hi}")));
    }
    let mut rows = Vec::new();
    for k in k_lo..=k_hi {
        let series = recursion_p(k, ang)?;
        let p_k = series.p_k();
        let i_k = *series.i_vals.last().expect("k >= 2");
        let j_k = series.j_k();
        let s = subsector_matrix(k, ang)?;
        let (mus, _) = crate::linalg::symmetric_eigen_real(&s)?;
        let max_abs_eig = mus.iter().map(|m| m.abs()).fold(0.0, f64::max);
        let dist_plus = mus.iter().map(|m| (m - 1.0).abs()).fold(f64::INFINITY, f64::min);
        let dist_minus = mus.iter().map(|m| (m + 1.0).abs()).fold(f64::INFINITY, f64::min);

        let det_minus: f64 = mus.iter().map(|m| m - 1.0).product();
        let det_plus: f64 = mus.iter().map(|m| m + 1.0).product();
        if (det_minus - i_k).abs() > UNIT_EIG_TOL || (det_plus - j_k).abs() > UNIT_EIG_TOL {
            return Err(Error::Inconsistency(format!(
                "k={k}: determinant vs eigenvalue product mismatch \
                 (I_k {i_k} vs {det_minus}, J_k {j_k} vs {det_plus})"
            )));
        }
        // unit-eigenvalue detection must agree with the determinant signal;
        // the two thresholds are deliberately asymmetric to avoid flapping
        // on borderline values
        if dist_plus <= 1e-10 && p_k.abs() > 1e-6 {
            return Err(Error::Inconsistency(format!(
                "k={k}: eigenvalue at +1 (dist {dist_plus:.2e}) but P_k = {p_k}"
            )));
        }
        if p_k.abs() <= 1e-12 && dist_plus > 1e-4 {
            return Err(Error::Inconsistency(format!(
                "k={k}: P_k = {p_k} but nearest eigenvalue to +1 is {dist_plus:.2e} away"
            )));
        }
        if dist_minus <= 1e-10 && j_k.abs() > 1e-6 {
            return Err(Error::Inconsistency(format!(
                "k={k}: eigenvalue at -1 (dist {dist_minus:.2e}) but J_k = {j_k}"
            )));
        }
        rows.push(UnitScanRow {
            k,
            ga_ta: ang.ga_ta,
            gb_tb: ang.gb_tb,
            p_k,
            j_k,
            max_abs_eig,
            has_plus_one: dist_plus <= UNIT_EIG_TOL,
            has_minus_one: dist_minus <= UNIT_EIG_TOL,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_angles(gb_tb: f64) -> CavityAngles {
        CavityAngles { ga_ta: std::f64::consts::FRAC_PI_2, gb_tb }
    }

    #[test]
    fn base_cases_match_elements() {
        let ang = CavityAngles { ga_ta: 0.9, gb_tb: 1.3 };
        let k = 5;
        let i2 = bruteforce_i(2, k, &ang).unwrap();
        assert!((i2 - (ang.c_elem(2, k) - 1.0)).abs() < 1e-15);
        let i3 = bruteforce_i(3, k, &ang).unwrap();
        let expect = (ang.c_elem(3, k) - 1.0) * (ang.c_elem(2, k) - 1.0)
            - ang.d_elem(3, k).powi(2);
        assert!((i3 - expect).abs() < 1e-15);
        let j2 = bruteforce_j(2, k, &ang).unwrap();
        assert!((j2 - (ang.c_elem(2, k) + 1.0)).abs() < 1e-15);
        assert!(j2 > 0.0);
        let j3 = bruteforce_j(3, k, &ang).unwrap();
        let expect = (ang.c_elem(3, k) + 1.0) * (ang.c_elem(2, k) + 1.0)
            - ang.d_elem(3, k).powi(2);
        assert!((j3 - expect).abs() < 1e-15);
        assert!(j3 > 0.0);
    }

    #[test]
    fn recursion_matches_continuant_randomly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..25 {
            let ang = CavityAngles {
                ga_ta: rng.gen_range(0.05..3.1),
                gb_tb: rng.gen_range(0.05..3.1),
            };
            for k in 2..=9 {
                let series = recursion_p(k, &ang).unwrap();
                for (offset, i) in (2..=k).enumerate() {
                    let brute = bruteforce_i(i, k, &ang).unwrap();
                    assert!(
                        (series.i_vals[offset] - brute).abs() < 1e-10,
                        "k={k} i={i}: {} vs {}",
                        series.i_vals[offset],
                        brute
                    );
                    assert!(series.p_vals[offset] >= -1e-12);
                    assert!(series.j_vals[offset] > 0.0);
                }
                let exp = explicit_pk(k, &ang).unwrap();
                assert!((exp - series.p_k()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn p2_base_consistency() {
        let ang = CavityAngles { ga_ta: 1.1, gb_tb: 0.6 };
        let k = 4;
        let series = recursion_p(k, &ang).unwrap();
        let p2 = series.p_vals[0];
        assert!((p2 - (1.0 - ang.c_elem(2, k))).abs() < 1e-14);
        assert!(p2 >= 0.0);
    }

    #[test]
    fn p9_vanishes_under_swap_condition() {
        let ang = swap_angles(0.7);
        let series = recursion_p(9, &ang).unwrap();
        assert!(series.p_k().abs() < 1e-10, "P_9 = {}", series.p_k());
        assert!(bruteforce_i(9, 9, &ang).unwrap().abs() < 1e-10);
        assert!(explicit_pk(9, &ang).unwrap().abs() < 1e-10);
    }

    #[test]
    fn p_values_below_nine_stay_positive_under_swap() {
        let ang = swap_angles(0.7);
        for k in 2..=8 {
            let p = recursion_p(k, &ang).unwrap().p_k();
            assert!(p > 1e-7, "k={k}: P_k = {p}");
        }
        // the k = 8 value sits just below 1e-6; pinned as a regression point
        let p8 = recursion_p(8, &ang).unwrap().p_k();
        assert!((p8 - 5.950387e-7).abs() < 1e-12);
    }

    #[test]
    fn explicit_terms_are_nonnegative() {
        let ang = CavityAngles { ga_ta: 2.2, gb_tb: 0.4 };
        for k in 2..=9 {
            for t in explicit_pk_terms(k, &ang).unwrap() {
                assert!(t >= 0.0);
            }
        }
    }

    #[test]
    fn continuant_matches_lu_determinant_at_k9() {
        let ang = CavityAngles { ga_ta: 1.7, gb_tb: 0.9 };
        let k = 9;
        let s = subsector_matrix(k, &ang).unwrap();
        let dim = k - 1;
        let id = DMatrix::<f64>::identity(dim, dim);
        let lu_minus = (s.clone() - &id).lu().determinant();
        let lu_plus = (s + id).lu().determinant();
        assert!((lu_minus - bruteforce_i(k, k, &ang).unwrap()).abs() < 1e-12);
        assert!((lu_plus - bruteforce_j(k, k, &ang).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn positivity_scan_finds_no_violations() {
        let scan = positivity_scan(9, 200, 42).unwrap();
        assert!(scan.violations.is_empty());
        assert!(scan.min_j > 0.0);
    }

    #[test]
    fn unit_scan_swap_condition() {
        let ang = swap_angles(0.7);
        let rows = unit_eigenvalue_scan(2, 9, &ang).unwrap();
        let by_k = |k: usize| rows.iter().find(|r| r.k == k).unwrap();
        // +1 appears exactly where P_k vanishes
        assert!(by_k(9).has_plus_one);
        assert!(by_k(9).p_k.abs() < 1e-10);
        assert!(!by_k(4).has_plus_one);
        assert!(by_k(4).max_abs_eig < 1.0);
        for r in &rows {
            assert!(!r.has_minus_one);
            assert!(r.j_k > 0.0);
        }
    }

    #[test]
    fn unit_scan_generic_parameters() {
        let ang = CavityAngles { ga_ta: 1.2, gb_tb: 0.8 };
        let rows = unit_eigenvalue_scan(2, 6, &ang).unwrap();
        for r in &rows {
            assert!(!r.has_plus_one);
            assert!(r.p_k.abs() > 1e-8);
        }
    }

    #[test]
    fn csv_header_and_shape() {
        let ang = swap_angles(0.3);
        let rows = unit_eigenvalue_scan(2, 4, &ang).unwrap();
        let csv = scan_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,gAtA,gBtB,Pk,Jk,max_abs_eig");
        assert_eq!(lines.count(), 3);
    }
}
