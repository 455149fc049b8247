use bach3_core::catalog::{build_solution, verify_solution, QSign, SolutionSpec, VerifyOptions};
use bach3_core::roots::rnds_lapse_roots;
use bach3_core::{DiffConfig, Point};

fn print_summary(name: &str, spec: &SolutionSpec, opts: &VerifyOptions) -> bach3_core::catalog::ResidualReport {
    let rep = verify_solution(spec, opts).unwrap();
    eprintln!("{name}: {:#?}\n{:?}", rep.summary, rep.verdict);
    rep
}

#[test]
fn nariai_passes_strict() {
    let rep = print_summary("nariai", &SolutionSpec::nariai(1.0, 0.75), &VerifyOptions::default());
    assert!(rep.verdict.pass);
    assert_eq!(rep.rows.len(), 45);
}

#[test]
fn cold_passes_strict() {
    let rep = print_summary("cold", &SolutionSpec::cold(1.0, 0.4), &VerifyOptions::default());
    assert!((rep.derived.q - 0.24f64.sqrt()).abs() < 1e-15);
    assert!(rep.verdict.pass);
}

#[test]
fn rnds_passes_strict_and_q_changes_sign_across_static_radius() {
    let (m, q, lambda) = (1.0, 0.5, 0.02);
    let rep = print_summary("rnds", &SolutionSpec::rnds(m, q, lambda), &VerifyOptions::default());
    assert!(rep.verdict.pass);
    assert_eq!(rep.rows.len(), 7);
    for row in &rep.rows {
        let r: f64 = row.point[0];
        let f2 = 1.0 - 2.0 * m / r + q * q / (r * r) - lambda * r * r / 3.0;
        let fp = (2.0 * m / (r * r) - 2.0 * q * q / r.powi(3) - 2.0 * lambda * r / 3.0) / (2.0 * f2.sqrt());
        let expected = 2.0 * (1.0 - q * q / (r.powi(4) * fp * fp));
        let got = row.q.unwrap();
        assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0), "r = {r}: {got} vs {expected}");
    }
    assert_eq!(rep.summary.q_sign, QSign::Mixed);
}

#[test]
fn printed_ultracold_is_reported_not_passed() {
    let rep = print_summary("ultracold", &SolutionSpec::ultracold(0.25), &VerifyOptions::default());
    assert!(rep.summary.residual_max > 1e-3);
    assert!(rep.summary.trace_chain_max < 1e-8);
}

#[test]
fn nariai_fd() {
    let opts = VerifyOptions {
        diff: DiffConfig::finite_difference(),
        tolerance: bach3_core::catalog::ToleranceProfile::loose_fd(),
        ..VerifyOptions::default()
    };
    let rep = print_summary("nariai-fd", &SolutionSpec::nariai(1.0, 0.75), &opts);
    assert!(rep.verdict.pass);
}

#[test]
fn rnds_scalar_curvature_at_three() {
    let s = build_solution(&SolutionSpec::rnds(1.0, 0.5, 0.02)).unwrap();
    let pack = bach3_core::curvature::curvature_stack(&s.system.metric, &Point::new(3.0, 1.0, 2.0)).unwrap();
    let expected = 2.0 * (0.25 / 81.0 + 0.02);
    assert!(((pack.scalar - expected) / expected).abs() < 1e-12);
    let roots = rnds_lapse_roots(1.0, 0.5, 0.02).unwrap();
    eprintln!("{roots:?}");
}

#[test]
fn report_survives_json_round_trip() {
    let opts = VerifyOptions {
        grid: Some([3, 2, 2]),
        depth: 2,
        ..VerifyOptions::default()
    };
    let rep = verify_solution(&SolutionSpec::cold(1.0, 0.4), &opts).unwrap();
    assert!(rep.rows.iter().all(|r| r.div2_b.is_some()));
    let text = serde_json::to_string(&rep).unwrap();
    let back: bach3_core::catalog::ResidualReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
}

#[test]
fn ld_v_formula_on_ultracold_variants() {
    use bach3_core::catalog::product_system;
    use bach3_core::electrostatic::{ld_v_tensor_check, residual_suite};
    let lambda: f64 = 0.25;
    let range = [0.0, 4.0 / lambda.sqrt()];
    let consistent = product_system("ultracold", lambda, 1.0 / (2.0 * lambda), range, |r| r, lambda.sqrt()).unwrap();
    let printed = build_solution(&SolutionSpec::ultracold(lambda)).unwrap().system;
    for r in [1.0, 3.0, 6.0] {
        let p = Point::new(r, 1.2, 2.0);
        assert!(residual_suite(&consistent, &p).unwrap().max_residual() < 1e-12);
        assert!(ld_v_tensor_check(&consistent, None, &p).unwrap().v_defect <= 1e-6);
        assert!(ld_v_tensor_check(&printed, None, &p).unwrap().v_defect > 1e-3);
    }
}
