use bcs_tc::effective::{ground_energy, EffectiveProblem};
use bcs_tc::model::Config;
use bcs_tc::pipeline::{run_config, solve_pair_stage, PairStage, Stage};
use bcs_tc::report::{checks_csv, emit, Format};
use bcs_tc::verify::{
    run_identity_checks, CheckInputs, CheckOptions, CheckResult, ToleranceClass, TOLERANCES,
};

fn small() -> Config {
    let mut c = Config::example();
    c.numerics.n_r = 120;
    c.numerics.n_p = 200;
    c
}

fn checks_with(
    cfg: &Config,
    pair: &PairStage,
    gl: &bcs_tc::gl::GlCoefficients,
    scale: f64,
) -> Vec<CheckResult> {
    let prob = EffectiveProblem::new(gl.coupling(), cfg.model.w.clone(), &cfg.numerics).unwrap();
    let gs = ground_energy(&prob).unwrap();
    let inputs = CheckInputs {
        solver: &pair.solver,
        tc: &pair.tc,
        op: &pair.op,
        top: &pair.top,
        pair: &pair.pair,
        t: &pair.t,
        gl,
        gap_tolerance: cfg.numerics.tolerances.gap,
        effective: Some((&prob, &gs)),
    };
    run_identity_checks(
        &inputs,
        &CheckOptions {
            tolerance_scale: scale,
        },
    )
    .unwrap()
}

fn find<'a>(checks: &'a [CheckResult], id: &str) -> &'a CheckResult {
    checks.iter().find(|c| c.id == id).unwrap()
}

#[test]
fn all_checks_pass_on_small_grids() {
    let bundle = run_config(&small(), Stage::Verify, &CheckOptions::default()).unwrap();
    let failed: Vec<_> = bundle
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| &c.id)
        .collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(bundle.checks.len(), TOLERANCES.len());
}

#[test]
fn corrupted_lambda2_fails_slope_check() {
    let cfg = small();
    let pair = solve_pair_stage(&cfg.model, &cfg.numerics).unwrap();
    let mut gl = pair.gl;
    gl.lambda2 *= 1.1;
    let checks = checks_with(&cfg, &pair, &gl, 1.0);
    let slope = find(&checks, "gl.dA0_dT_slope");
    assert!(!slope.passed);
    assert!((slope.measured / slope.expected - 1.1).abs() < 1e-6);
}

#[test]
fn tightened_tolerances_separate_the_classes() {
    let cfg = small();
    let pair = solve_pair_stage(&cfg.model, &cfg.numerics).unwrap();
    let checks = checks_with(&cfg, &pair, &pair.gl, 1e-6);
    let quadrature_failures = checks
        .iter()
        .filter(|c| c.class == ToleranceClass::Quadrature && !c.passed)
        .count();
    assert!(quadrature_failures > 0);
    for id in [
        "bs.kernel_symmetry",
        "bs.amplitude_linearity_exact",
        "g.parity",
        "xi.symmetry",
    ] {
        let c = find(&checks, id);
        assert_eq!(c.class, ToleranceClass::Identity);
        assert!(c.passed, "{id}: {} vs {}", c.measured, c.tolerance);
    }
}

#[test]
fn checks_csv_has_one_row_per_registered_check() {
    let bundle = run_config(&small(), Stage::Verify, &CheckOptions::default()).unwrap();
    let csv = String::from_utf8(checks_csv(&bundle).unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,measured,expected,tolerance,passed"));
    assert_eq!(lines.count(), TOLERANCES.len());

    let dir = tempfile::tempdir().unwrap();
    let written = emit(&bundle, dir.path(), Format::Csv, "start").unwrap();
    let names: Vec<_> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        ["gl.csv", "tc_shift.csv", "checks.csv", "manifest.json"]
    );
}

#[test]
fn emitted_json_round_trips() {
    let bundle = run_config(&small(), Stage::Verify, &CheckOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&bundle, dir.path(), Format::Json, "start").unwrap();
    let text = std::fs::read_to_string(dir.path().join("result.json")).unwrap();
    let parsed: bcs_tc::pipeline::ResultBundle = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, bundle);
    let gl = bundle.gl.unwrap();
    assert_eq!(
        bundle.shift.as_ref().unwrap().t_c,
        bundle.tc.as_ref().unwrap().t_c
    );
    assert_eq!(gl.beta_c, bundle.tc.as_ref().unwrap().beta_c);
}
