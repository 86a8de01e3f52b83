//! Cross-module flows: solver → compiler → engine for the qubit model, and
//! preparation → round trip → engine for the cavity model.

use zdistill_core::cavity::{
    self, build_vc_closed, max_sector_deviation, prepare_initial_state, target_state,
    CavityParams,
};
use zdistill_core::engine::{asymptotics, iterate, DensityMatrix};
use zdistill_core::linalg::{max_abs, submatrix};
use zdistill_core::qubit::{
    self, closed_form_blocks, solve_optimal_condition, verify_distillation, QubitParams,
    TargetState, EVEN_INDICES, ODD_INDICES,
};

#[test]
fn qubit_solver_to_engine_distills_the_odd_target() {
    let points = solve_optimal_condition(2.8, 10.0).unwrap();
    assert!(points.len() >= 2);
    let rho = DensityMatrix::maximally_mixed(4);
    for pt in points.iter().take(4) {
        let rep = verify_distillation(pt, &rho, 200).unwrap();
        assert!(rep.all_passed(), "{:?}: {:?}", pt.branch, rep.checks);
        assert!((rep.final_yield - 0.25).abs() < 1e-4);
        assert!(rep.subdominant_margin > 1e-3);

        let v = qubit::wp_cycle(&pt.params().unwrap()).unwrap().matrix;
        let asym = asymptotics(&v, &rho).unwrap();
        assert!(asym.optimal && asym.unique);
        assert!((asym.yield_prefactor - 0.25).abs() < 1e-9);
        assert!(asym.target.abs_overlap(&TargetState::new(pt.chi).state) > 1.0 - 1e-9);
    }
}

#[test]
fn qubit_closed_forms_track_compiled_blocks_on_a_grid() {
    for &x in &[0.5, 1.4, 2.3] {
        for &y in &[0.7, 1.5, 2.4] {
            for &z in &[0.0, 0.9, 1.8] {
                let p = QubitParams::symmetric(1.0, x / y, y, z).unwrap();
                let v = qubit::wp_cycle(&p).unwrap().matrix;
                let blocks = closed_form_blocks(&p);
                let dev = max_abs(&(submatrix(&v, &EVEN_INDICES) - blocks.even_action()))
                    .max(max_abs(&(submatrix(&v, &ODD_INDICES) - blocks.odd_action())));
                assert!(dev < 1e-10, "x={x} y={y} z={z}: dev {dev:.3e}");
            }
        }
    }
}

#[test]
fn cavity_preparation_and_round_trip_distill_the_doublet_state() {
    let p = CavityParams::new(1.0, 1.0, 1.0, std::f64::consts::FRAC_PI_2, 0.7, 0.5, 0.5, 6)
        .unwrap();
    let compiled = cavity::wp2_cycle(&p).unwrap().matrix;
    assert!(max_sector_deviation(&build_vc_closed(&p), &compiled, &p, p.k_max) < 1e-10);

    let base = cavity::maximally_mixed_simplex(&p);
    let prep = prepare_initial_state(&base, &p, 40).unwrap();
    assert!(prep.residual < 1e-8);

    let target = target_state(&p, 1).unwrap();
    let expected_yield = prep.rho.fidelity_to(&target);
    let trace = iterate(&compiled, &prep.rho, 100, &target).unwrap();
    assert!(1.0 - trace.last().fidelity < 1e-4);
    assert!((trace.last().yield_prob - expected_yield).abs() < 1e-3);

    // the trace serializes with the fixed header and one row per cycle
    let csv = trace.to_csv();
    assert!(csv.starts_with("N,yield,fidelity,purity\n"));
    assert_eq!(csv.lines().count(), 102);
}
