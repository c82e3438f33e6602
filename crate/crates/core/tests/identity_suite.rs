use std::collections::HashSet;

use hypersum_core::identities::{
    prop5_partial_sum, prop6_partial_sum, run_full_suite, run_suite, verify_alternating, verify_eq,
    verify_prop5, verify_prop6, Alternating, SuiteGrid,
};
use hypersum_core::real::{PrecReal, PrecisionRequest};
use hypersum_core::Error;
use num_rational::BigRational;

fn req(digits: u32) -> PrecisionRequest {
    PrecisionRequest::new(digits).unwrap()
}

#[test]
fn full_suite_passes_at_15_digits() {
    let reports = run_full_suite(&req(15));
    assert_eq!(reports.len(), SuiteGrid::default().ids().len());
    let failed: Vec<_> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| &r.identity_id)
        .collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
    for rep in &reports {
        assert!(rep.difference <= rep.tolerance, "{}", rep.identity_id);
        assert!(rep.error.is_none());
    }
}

#[test]
fn restricted_suite_passes_at_25_digits() {
    let grid = SuiteGrid::default().restricted(2, 4);
    let ids = grid.ids();
    assert!(ids.contains(&"thm1_r2_m4_k1".to_string()));
    assert!(!ids.iter().any(|id| id.starts_with("thm2_r3")));
    assert!(!ids.iter().any(|id| id.starts_with("sigma3")));
    for rep in run_suite(&grid, &req(25)) {
        assert!(rep.passed, "{} failed", rep.identity_id);
    }
}

#[test]
fn registered_ids_are_unique_and_ordered() {
    let ids = SuiteGrid::default().ids();
    let unique: HashSet<_> = ids.iter().collect();
    assert_eq!(unique.len(), ids.len());
    assert_eq!(ids[0], "i2_closed_form");
    assert_eq!(ids.last().unwrap(), "alt_second_n3");
    assert_eq!(ids, SuiteGrid::default().ids());
}

#[test]
fn empty_grid_runs_nothing() {
    let grid = SuiteGrid::empty();
    assert!(grid.ids().is_empty());
    assert!(run_suite(&grid, &req(15)).is_empty());
}

#[test]
fn reports_come_back_in_registered_order() {
    let mut grid = SuiteGrid::empty();
    grid.eq1_m = vec![5, 2, 3];
    grid.prop_r = vec![1];
    let reports = run_suite(&grid, &req(15));
    let got: Vec<_> = reports.iter().map(|r| r.identity_id.clone()).collect();
    assert_eq!(got, grid.ids());
}

#[test]
fn unknown_ids_are_rejected() {
    assert!(matches!(
        verify_eq("eq7", &req(10)),
        Err(Error::UnknownIdentity(_))
    ));
    assert!(matches!(
        verify_eq("eq1_m1", &req(10)),
        Err(Error::UnknownIdentity(_))
    ));
    assert!(matches!(
        verify_eq("thm1_r2_m3", &req(10)),
        Err(Error::UnknownIdentity(_))
    ));
}

#[test]
fn ids_outside_the_default_grid_still_evaluate() {
    let rep = verify_eq("eq1_m9", &req(20)).unwrap();
    assert!(rep.passed);
    let rep = verify_eq("thm1_r5_m7_k3", &req(15)).unwrap();
    assert!(rep.passed);
    // invalid parameters surface as errors rather than failures
    assert!(verify_eq("thm1_r3_m3_k0", &req(15)).is_err());
}

#[test]
fn printed_coefficient_variant_fails() {
    let rep = verify_eq("eq8_15over6", &req(25)).unwrap();
    assert!(!rep.passed);
    assert!(rep.difference.to_f64() > 0.5);
    assert!(verify_eq("eq8", &req(25)).unwrap().passed);
}

#[test]
fn proposition_partial_sums_rise_to_their_limits() {
    // the Beta-weighted forms converge to 1 and ζ(2) for every r
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    for r in 0..=4u32 {
        let limit5 = BigRational::from_integer(1.into());
        let mut prev = BigRational::from_integer(0.into());
        for count in [1, 5, 20, 80] {
            let s = prop5_partial_sum(r, count).unwrap();
            assert!(s > prev && s < limit5, "prop5 r = {r}, count = {count}");
            prev = s;
        }
        let limit6 = zeta2;
        let mut prev = 0.0;
        for count in [1, 5, 20, 80] {
            let s = prop6_partial_sum(r, count).unwrap();
            let s = PrecReal::from_rational(&s, 64).to_f64();
            assert!(s > prev && s < limit6, "prop6 r = {r}, count = {count}");
            prev = s;
        }
    }
}

#[test]
fn propositions_pass_at_ten_digits() {
    for r in 0..=4 {
        assert!(verify_prop5(r, &req(10)).unwrap().passed, "prop5 r = {r}");
        assert!(verify_prop6(r, &req(10)).unwrap().passed, "prop6 r = {r}");
    }
}

#[test]
fn alternating_series_report_residuals() {
    for n in 0..=3 {
        let rep = verify_alternating(n, Alternating::First, &req(8)).unwrap();
        assert!(rep.passed, "first n = {n}");
        assert!(rep.residual.unwrap() <= PrecReal::pow10_neg(8, 64));
    }
    for n in 1..=3 {
        let rep = verify_alternating(n, Alternating::Second, &req(8)).unwrap();
        assert!(rep.passed, "second n = {n}");
        assert!(rep.residual.is_some() && rep.bracketed.is_some());
    }
    assert!(verify_alternating(0, Alternating::Second, &req(8)).is_err());
}

#[test]
fn records_are_stable_without_timing() {
    let rep = verify_eq("eq5", &req(20)).unwrap();
    let rec = rep.record(false);
    assert_eq!(rec.identity_id, "eq5");
    assert!(rec.passed);
    assert!(rec.elapsed_ms.is_none());
    assert!(rep.record(true).elapsed_ms.is_some());
    assert_eq!(
        rec.lhs,
        verify_eq("eq5", &req(20)).unwrap().record(false).lhs
    );
}
