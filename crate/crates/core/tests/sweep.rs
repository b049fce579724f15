use bcs_tc::model::{Config, Dimensionality, FieldFamily};
use bcs_tc::pipeline::{sweep, SweepAxis};

fn small() -> Config {
    let mut c = Config::example();
    c.numerics.n_r = 96;
    c.numerics.n_p = 160;
    c.model.h_values = vec![0.05];
    c
}

#[test]
fn w_amplitude_sweep_crosses_zero_at_zero_field() {
    let mut c = small();
    c.model.w.family = FieldFamily::GaussianWell;
    c.model.w.dimensionality = Dimensionality::OneD;
    let values = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let report = sweep(&c, SweepAxis::WAmplitude, &values).unwrap();
    assert_eq!(report.pair_stages, 1);
    assert_eq!(report.cache_hits, values.len() - 1);
    let d: Vec<f64> = report.rows.iter().map(|r| r.d_c.unwrap()).collect();
    // A 1D well always binds; a bump never does.
    assert_eq!(&d[..3], &[0.0, 0.0, 0.0]);
    assert!(d[3] < 0.0 && d[4] < d[3]);
}

#[test]
fn mu_sweep_beta_c_is_smooth() {
    let values: Vec<f64> = (0..9).map(|k| 0.6 + 0.1 * k as f64).collect();
    let report = sweep(&small(), SweepAxis::Mu, &values).unwrap();
    assert_eq!(report.pair_stages, values.len());
    let beta: Vec<f64> = report.rows.iter().map(|r| r.beta_c.unwrap()).collect();
    let deltas: Vec<f64> = beta.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for k in 1..deltas.len() - 1 {
        let neighbours = deltas[k - 1].max(deltas[k + 1]);
        assert!(
            deltas[k] <= 10.0 * neighbours,
            "jump at mu = {}",
            values[k + 1]
        );
    }
}

#[test]
fn failing_points_are_recorded_and_the_sweep_continues() {
    let values = [3.0, 0.01];
    let report = sweep(&small(), SweepAxis::VAmplitude, &values).unwrap();
    assert!(report.rows[0].error.is_none());
    let err = report.rows.last().unwrap().error.as_deref().unwrap();
    assert!(err.starts_with("AssumptionViolation"), "{err}");
}
