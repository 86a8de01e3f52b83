//! Verification checks behind `zdistill verify`, one per acceptance-grade
//! property of the models. Every check is deterministic for a fixed seed and
//! reports a machine-stable detail string (timings are kept out of it).

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zdistill_core::appendix::{
    bruteforce_i, explicit_pk, positivity_scan, recursion_p, unit_eigenvalue_scan,
};
use zdistill_core::cavity::{
    self, build_vc_closed, doublet_analysis, generic_gbtb_values, max_sector_deviation,
    prepare_initial_state, sector_matrix, target_state, CavityAngles, CavityParams,
};
use zdistill_core::engine::{iterate, DensityMatrix};
use zdistill_core::linalg::{
    max_abs, power_apply, random_contraction, random_hermitian, spectral_decompose, submatrix,
    symmetric_eigen_real, CVector,
};
use zdistill_core::protocol::{compile_cycle, parse_program, wp2_text, wp_text, ModelBinding};
use zdistill_core::qubit::{
    self, closed_form_blocks, solve_optimal_condition, verify_distillation, QubitParams,
    EVEN_INDICES, ODD_INDICES,
};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub duration: Duration,
}

fn finish(name: &'static str, t0: Instant, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail, duration: t0.elapsed() }
}

fn fail(name: &'static str, t0: Instant, detail: String) -> CheckResult {
    finish(name, t0, false, detail)
}

/// Direct iteration of V^N ρ V†^N agrees with the spectral power formula for
/// 50 random 6-dim contractions, N ≤ 20, to 1e-8.
pub fn spectral_engine_equivalence(seed: u64) -> CheckResult {
    let name = "spectral_engine_equivalence";
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let v = random_contraction(6, &mut rng);
        let weights: Vec<f64> = (0..6).map(|_| rng.gen_range(0.05..1.0)).collect();
        let rho = DensityMatrix::from_diagonal_weights(&weights).expect("valid weights");
        let sd = match spectral_decompose(&v) {
            Ok(sd) => sd,
            Err(e) => return fail(name, t0, format!("draw {draw}: {e}")),
        };
        for n in [5usize, 12, 20] {
            let (direct, tr) = power_apply(&v, &rho, n).expect("dims match");
            let pw = sd.power_matrix(n as u32);
            let via = &pw * rho.matrix() * pw.adjoint();
            worst = worst.max(max_abs(&(direct - &via)));
            worst = worst.max((tr - via.trace().re).abs());
        }
    }
    finish(
        name,
        t0,
        worst <= 1e-8,
        format!("max |direct - spectral| = {worst:.3e} over 50 contractions, N <= 20"),
    )
}

/// Every compiled cycle built from random Hermitian generators and random
/// durations keeps its whole spectrum inside the unit disk (50 draws).
pub fn eigenvalue_bound(seed: u64) -> CheckResult {
    let name = "eigenvalue_bound";
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let up = CVector::from_vec(vec![1.0.into(), 0.0.into()]);
    let down = CVector::from_vec(vec![0.0.into(), 1.0.into()]);
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let h0 = random_hermitian(6, 1.0, &mut rng).matrix().clone();
        let ha = random_hermitian(6, 0.8, &mut rng).matrix().clone();
        let hb = random_hermitian(6, 0.8, &mut rng).matrix().clone();
        let binding = ModelBinding::new(
            "X",
            vec![("up".into(), up.clone()), ("down".into(), down.clone())],
            3,
            h0,
            vec![("A".into(), ha), ("B".into(), hb)],
        )
        .expect("random generators are Hermitian");
        let (ta, tua, tb, tub) = (
            rng.gen_range(0.0..2.5),
            rng.gen_range(0.0..2.5),
            rng.gen_range(0.0..2.5),
            rng.gen_range(0.0..2.5),
        );
        let text = if draw % 2 == 0 { wp_text(ta, tua, tb, tub) } else { wp2_text(ta, tua, tb, tub) };
        let prog = parse_program(&text).expect("builtin text parses");
        let cycle = match compile_cycle(&prog, &binding) {
            Ok(c) => c,
            Err(e) => return fail(name, t0, format!("draw {draw}: {e}")),
        };
        match spectral_decompose(&cycle.matrix) {
            Ok(sd) => worst = worst.max(sd.spectral_radius()),
            Err(e) => return fail(name, t0, format!("draw {draw}: {e}")),
        }
    }
    finish(
        name,
        t0,
        worst <= 1.0 + 1e-9,
        format!("max spectral radius = {worst:.12} over 50 random compilations"),
    )
}

/// Closed-form parity blocks match the compiled operator product on a 5×5×5
/// grid of (g t, ω t, ω τ) to 1e-10.
pub fn qubit_closed_forms() -> CheckResult {
    let name = "qubit_closed_forms";
    let t0 = Instant::now();
    let xs = [0.4, 0.9, 1.5, 2.1, 2.7];
    let ys = [0.5, 1.0, 1.6, 2.2, 3.0];
    let zs = [0.0, 0.6, 1.2, 1.9, 2.5];
    let mut worst = 0.0f64;
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                let p = match QubitParams::symmetric(1.0, x / y, y, z) {
                    Ok(p) => p,
                    Err(e) => return fail(name, t0, format!("x={x} y={y} z={z}: {e}")),
                };
                let v = match qubit::wp_cycle(&p) {
                    Ok(c) => c.matrix,
                    Err(e) => return fail(name, t0, format!("x={x} y={y} z={z}: {e}")),
                };
                let blocks = closed_form_blocks(&p);
                let dev = max_abs(&(submatrix(&v, &EVEN_INDICES) - blocks.even_action()))
                    .max(max_abs(&(submatrix(&v, &ODD_INDICES) - blocks.odd_action())));
                worst = worst.max(dev);
            }
        }
    }
    finish(
        name,
        t0,
        worst <= 1e-10,
        format!("max |compiled - closed form| = {worst:.3e} over the 5x5x5 grid"),
    )
}

/// At every solver root on x ∈ {2.6, 2.8, 3.0}: the target is an eigenvector
/// with the predicted unit eigenvalue (1e-9), all other magnitudes stay below
/// 1 - 1e-3, and from the maximally mixed state the fidelity reaches
/// 1 - 1e-6 within N ≤ 200 with yield converging to 0.25 ± 1e-4.
pub fn qubit_optimal_distillation() -> CheckResult {
    let name = "qubit_optimal_distillation";
    let t0 = Instant::now();
    let rho = DensityMatrix::maximally_mixed(4);
    let mut failures: Vec<String> = Vec::new();
    let mut roots = 0usize;
    for x in [2.6, 2.8, 3.0] {
        let points = match solve_optimal_condition(x, 10.0) {
            Ok(p) => p,
            Err(e) => return fail(name, t0, format!("x={x}: {e}")),
        };
        if points.is_empty() {
            failures.push(format!("x={x}: no roots found"));
            continue;
        }
        for pt in points {
            roots += 1;
            let rep = match verify_distillation(&pt, &rho, 200) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("x={x} y={:.6} {}: {e}", pt.y, pt.branch.as_str()));
                    continue;
                }
            };
            let eig_ok = rep
                .checks
                .iter()
                .find(|c| c.name == "eigenvector")
                .map(|c| c.passed)
                .unwrap_or(false);
            let margin_ok = rep.subdominant_margin >= 1e-3;
            let fid_gap = 1.0 - rep.final_fidelity;
            let yield_gap = (rep.final_yield - 0.25).abs();
            if !(eig_ok && margin_ok && fid_gap <= 1e-6 && yield_gap <= 1e-4) {
                failures.push(format!(
                    "x={x} y={:.6} {}: eigenvector={} margin={:.3e} 1-F(200)={:.3e} |yield-0.25|={:.3e}",
                    pt.y,
                    pt.branch.as_str(),
                    eig_ok,
                    rep.subdominant_margin,
                    fid_gap,
                    yield_gap
                ));
            }
        }
    }
    let passed = failures.is_empty();
    let detail = if passed {
        format!("all {roots} solver roots verified (eigenvector, margin, convergence, yield)")
    } else {
        format!("{} of {roots} roots failed: {}", failures.len(), failures.join(" | "))
    };
    finish(name, t0, passed, detail)
}

/// The closed form of the round-trip operator equals the compiled product to
/// 1e-10 on every sector k ≤ 8 for 10 random parameter draws, and the vacuum
/// column of the closed form is exactly zero.
pub fn cavity_closed_form(seed: u64) -> CheckResult {
    let name = "cavity_closed_form";
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xcaf1);
    let mut worst = 0.0f64;
    for draw in 0..10 {
        let p = CavityParams::new(
            1.0,
            rng.gen_range(0.3..1.8),
            rng.gen_range(0.3..1.8),
            rng.gen_range(0.3..1.8),
            rng.gen_range(0.3..1.8),
            rng.gen_range(0.0..1.2),
            rng.gen_range(0.0..1.2),
            8,
        )
        .expect("sampled parameters are valid");
        let vc = build_vc_closed(&p);
        let vac = p.mode_index(0, 0);
        for i in 0..p.box_dim() {
            if vc[(i, vac)].norm() != 0.0 {
                return fail(name, t0, format!("draw {draw}: vacuum column entry {i} nonzero"));
            }
        }
        let compiled = match cavity::wp2_cycle(&p) {
            Ok(c) => c.matrix,
            Err(e) => return fail(name, t0, format!("draw {draw}: {e}")),
        };
        worst = worst.max(max_sector_deviation(&vc, &compiled, &p, p.k_max));
    }
    finish(
        name,
        t0,
        worst <= 1e-10,
        format!("max |closed - compiled| = {worst:.3e} over 10 draws, sectors k <= 8"),
    )
}

fn swap_params(gb_tb: f64, k_max: usize) -> CavityParams {
    CavityParams::new(1.0, 1.0, 1.0, std::f64::consts::FRAC_PI_2, gb_tb, 0.5, 0.5, k_max)
        .expect("fixed parameters are valid")
}

/// Under the full-swap condition the one-excitation sector carries one
/// unit-magnitude eigenvalue with the predicted entangled eigenvector and one
/// zero mode, for the three published g_B t_B values.
pub fn cavity_doublet() -> CheckResult {
    let name = "cavity_doublet";
    let t0 = Instant::now();
    let mut detail = Vec::new();
    for gb_tb in generic_gbtb_values() {
        let p = swap_params(gb_tb, 3);
        let rep = match doublet_analysis(&p) {
            Ok(r) => r,
            Err(e) => return fail(name, t0, format!("gBtB={gb_tb}: {e}")),
        };
        if (rep.eigenvalue.norm() - 1.0).abs() > 1e-9 {
            return fail(name, t0, format!("gBtB={gb_tb}: |λ| = {}", rep.eigenvalue.norm()));
        }
        let expect_c = gb_tb.cos();
        let expect_s = gb_tb.sin();
        let v = rep.eigenvector.vector();
        if (v[0].re - expect_c).abs() > 1e-12 || (v[1].re - expect_s).abs() > 1e-12 {
            return fail(name, t0, format!("gBtB={gb_tb}: unexpected eigenvector"));
        }
        let sm = sector_matrix(1, &p).expect("k=1 in range");
        let (vals, _) = symmetric_eigen_real(&sm.entries).expect("2x2 eigensolver");
        let min_mag = vals.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if min_mag > 1e-12 {
            return fail(name, t0, format!("gBtB={gb_tb}: smallest |eig| = {min_mag:.3e}"));
        }
        detail.push(format!("gBtB={gb_tb}: ok"));
    }
    finish(name, t0, true, detail.join(", "))
}

/// Under the full-swap condition: d₂ = 0 to 1e-12 for k = 2…8, every sector
/// target is an eigenvector with its predicted eigenvalue, and the
/// complementary subsector magnitudes stay ≤ 1 - 1e-3 for the published
/// g_B t_B values.
pub fn sector_splitting() -> CheckResult {
    let name = "sector_splitting";
    let t0 = Instant::now();
    let mut failures = Vec::new();
    for gb_tb in generic_gbtb_values() {
        let p = swap_params(gb_tb, 8);
        for k in 2..=8usize {
            let sm = match sector_matrix(k, &p) {
                Ok(s) => s,
                Err(e) => return fail(name, t0, format!("gBtB={gb_tb} k={k}: {e}")),
            };
            let d2 = sm.d[k - 2];
            if d2.abs() > 1e-12 {
                failures.push(format!("gBtB={gb_tb} k={k}: d2 = {d2:.3e}"));
            }
            if let Err(e) = target_state(&p, k) {
                failures.push(format!("gBtB={gb_tb} k={k}: target not verified: {e}"));
            }
            let sub = sm.entries.view((0, 0), (k - 1, k - 1)).into_owned();
            let (vals, _) = symmetric_eigen_real(&sub).expect("subsector eigensolver");
            let max_mag = vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if max_mag > 1.0 - 1e-3 {
                failures.push(format!(
                    "gBtB={gb_tb} k={k}: subsector max |eig| = {max_mag:.10} > 1 - 1e-3"
                ));
            }
        }
    }
    let passed = failures.is_empty();
    let detail = if passed {
        "d2 = 0, sector targets verified, subsector margins >= 1e-3 for all published values"
            .to_string()
    } else {
        failures.join(" | ")
    };
    finish(name, t0, passed, detail)
}

/// Triple determinant agreement (continuant / recursion / explicit), the k=9
/// vanishing under the swap condition, J-positivity over 1000 samples, and
/// determinant-vs-eigensolver consistency of unit-eigenvalue detection.
pub fn appendix_identities(seed: u64) -> CheckResult {
    let name = "appendix_identities";
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa99e);
    let mut worst_triple = 0.0f64;
    for _ in 0..100 {
        let ang = CavityAngles {
            ga_ta: rng.gen_range(0.05..3.1),
            gb_tb: rng.gen_range(0.05..3.1),
        };
        for k in 2..=9usize {
            let series = match recursion_p(k, &ang) {
                Ok(s) => s,
                Err(e) => return fail(name, t0, format!("recursion k={k}: {e}")),
            };
            for (offset, i) in (2..=k).enumerate() {
                let brute = bruteforce_i(i, k, &ang).expect("range checked");
                worst_triple = worst_triple.max((series.i_vals[offset] - brute).abs());
            }
            let exp = explicit_pk(k, &ang).expect("range checked");
            worst_triple = worst_triple.max((exp - series.p_k()).abs());
        }
    }
    if worst_triple > 1e-10 {
        return fail(name, t0, format!("triple-agreement deviation {worst_triple:.3e} > 1e-10"));
    }

    let mut worst_p9 = 0.0f64;
    for gb_tb in generic_gbtb_values() {
        let ang = CavityAngles { ga_ta: std::f64::consts::FRAC_PI_2, gb_tb };
        let p9 = recursion_p(9, &ang).expect("k = 9").p_k();
        worst_p9 = worst_p9.max(p9.abs());
    }
    if worst_p9 > 1e-10 {
        return fail(name, t0, format!("P_9 = {worst_p9:.3e} under the swap condition"));
    }

    let scan = match positivity_scan(9, 1000, seed) {
        Ok(s) => s,
        Err(e) => return fail(name, t0, format!("positivity scan: {e}")),
    };
    if !scan.violations.is_empty() {
        return fail(
            name,
            t0,
            format!("{} J-positivity violations (min J = {:.3e})", scan.violations.len(), scan.min_j),
        );
    }

    // determinant predictions vs the eigensolver (the scan errors internally
    // on any disagreement beyond tolerance)
    for gb_tb in generic_gbtb_values() {
        let ang = CavityAngles { ga_ta: std::f64::consts::FRAC_PI_2, gb_tb };
        let rows = match unit_eigenvalue_scan(2, 9, &ang) {
            Ok(r) => r,
            Err(e) => return fail(name, t0, format!("unit scan gBtB={gb_tb}: {e}")),
        };
        let k9 = rows.iter().find(|r| r.k == 9).expect("k = 9 scanned");
        if !k9.has_plus_one {
            return fail(name, t0, format!("gBtB={gb_tb}: P_9 = 0 but no +1 eigenvalue found"));
        }
        if rows.iter().any(|r| r.has_minus_one) {
            return fail(name, t0, format!("gBtB={gb_tb}: unexpected -1 eigenvalue"));
        }
    }
    for _ in 0..5 {
        let ang = CavityAngles {
            ga_ta: rng.gen_range(0.05..3.1),
            gb_tb: rng.gen_range(0.05..3.1),
        };
        if let Err(e) = unit_eigenvalue_scan(2, 6, &ang) {
            return fail(name, t0, format!("unit scan at random angles: {e}"));
        }
    }

    finish(
        name,
        t0,
        true,
        format!(
            "triple agreement {worst_triple:.3e}, P_9 <= {worst_p9:.3e}, \
             J > 0 over {} samples (min {:.3e}), unit-eigenvalue detection consistent",
            scan.samples, scan.min_j
        ),
    )
}

/// Vacuum preparation (40 repetitions) followed by 100 round-trip cycles
/// reaches the one-excitation entangled target with fidelity above 1 - 1e-4
/// and yield within 1e-3 of its initial-state overlap. Runs at k_max = 6,
/// where every retained sector contracts fast enough for the 100-cycle
/// budget; higher sectors host slow transients and are covered by the
/// sector reports instead.
pub fn end_to_end_distillation() -> CheckResult {
    let name = "end_to_end_distillation";
    let t0 = Instant::now();
    let p = swap_params(0.7, 6);
    let base = cavity::maximally_mixed_simplex(&p);
    let prep = match prepare_initial_state(&base, &p, 40) {
        Ok(pr) => pr,
        Err(e) => return fail(name, t0, format!("preparation: {e}")),
    };
    let compiled = match cavity::wp2_cycle(&p) {
        Ok(c) => c.matrix,
        Err(e) => return fail(name, t0, format!("compile: {e}")),
    };
    let target = match target_state(&p, 1) {
        Ok(t) => t,
        Err(e) => return fail(name, t0, format!("target: {e}")),
    };
    let expected_yield = prep.rho.fidelity_to(&target);
    let trace = match iterate(&compiled, &prep.rho, 100, &target) {
        Ok(tr) => tr,
        Err(e) => return fail(name, t0, format!("iterate: {e}")),
    };
    let fid_gap = 1.0 - trace.last().fidelity;
    let yield_gap = (trace.last().yield_prob - expected_yield).abs();
    finish(
        name,
        t0,
        fid_gap < 1e-4 && yield_gap < 1e-3,
        format!(
            "prep residual {:.3e}, 1 - F(100) = {fid_gap:.3e}, |yield - overlap| = {yield_gap:.3e}",
            prep.residual
        ),
    )
}

/// The canonical unit-eigenvalue scan written by `verify --out`: the three
/// published g_B t_B values under the swap condition, sectors k = 2…9.
pub fn appendix_scan_csv() -> String {
    let mut rows = Vec::new();
    for gb_tb in generic_gbtb_values() {
        let ang = CavityAngles { ga_ta: std::f64::consts::FRAC_PI_2, gb_tb };
        rows.extend(unit_eigenvalue_scan(2, 9, &ang).expect("canonical scan succeeds"));
    }
    zdistill_core::appendix::scan_csv(&rows)
}

/// The checks belonging to a named suite; `None` for an unknown name.
pub fn suite(name: &str, seed: u64) -> Option<Vec<CheckResult>> {
    match name {
        "qubit" => Some(vec![qubit_closed_forms(), qubit_optimal_distillation()]),
        "cavity" => Some(vec![
            cavity_closed_form(seed),
            cavity_doublet(),
            sector_splitting(),
            end_to_end_distillation(),
        ]),
        "appendix" => Some(vec![appendix_identities(seed)]),
        "all" => {
            let mut out = vec![spectral_engine_equivalence(seed), eigenvalue_bound(seed)];
            out.extend(suite("qubit", seed).expect("known suite"));
            out.extend(suite("cavity", seed).expect("known suite"));
            out.extend(suite("appendix", seed).expect("known suite"));
            Some(out)
        }
        _ => None,
    }
}

/// Deterministic stdout block for a suite run (no timings).
pub fn format_results(suite_name: &str, seed: u64, results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!("{} {} — {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed (suite {suite_name}, seed {seed})\n", results.len()));
    let failing: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if !failing.is_empty() {
        out.push_str(&format!("failing: {}\n", failing.join(", ")));
    }
    out
}
