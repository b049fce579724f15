//! End-to-end runs: configuration in, [`ResultBundle`] out, plus parameter
//! sweeps that reuse the expensive pairing stage across points.

use std::collections::BTreeMap;
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::birman_schwinger::{
    extract_pair_state, solve_beta_c, BsOperator, BsSolver, CriticalTemperature, PairState,
    SpectralTop,
};
use crate::effective::{
    compute_dc, ground_energy, tc_of_h, EffectiveGroundState, EffectiveProblem, TcShiftReport,
};
use crate::error::{Error, Result};
use crate::gl::{compute_lambdas, compute_t, GlCoefficients, TProfile};
use crate::model::{
    validate_assumptions, Config, Numerics, PhysicalModel, Tolerances, ValidationReport,
};
use crate::verify::{run_identity_checks, CheckInputs, CheckOptions, CheckResult};

/// How far a run goes. Each stage includes the ones before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Tc,
    Gl,
    Dc,
    Shift,
    Verify,
}

/// SHA-256 of the canonical serialization of the configuration with all
/// defaults applied, so key order and omitted defaults do not matter.
pub fn config_digest(config: &Config) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Digest of the inputs that determine the pairing stage.
fn pair_key(model: &PhysicalModel, numerics: &Numerics) -> String {
    let key = serde_json::json!({ "V": model.v, "mu": model.mu, "numerics": numerics });
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub r_max: f64,
    pub p_max: f64,
    pub radial_nodes: usize,
    pub momentum_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grids: Option<GridSummary>,
    pub tolerances: Tolerances,
    pub lambda_evaluations: usize,
    pub cache_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// `1 - lambda2`, the spectral gap below the critical eigenvalue.
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSummary {
    pub coupling: f64,
    pub domain_radius: f64,
    pub ground_state: EffectiveGroundState,
    #[serde(rename = "D_c")]
    pub d_c: f64,
}

/// Everything a run produces. Timestamps are kept out so that identical
/// configurations serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub manifest: RunManifest,
    pub config: Config,
    pub validation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tc: Option<CriticalTemperature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gl: Option<GlCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective: Option<EffectiveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<TcShiftReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckResult>,
}

impl ResultBundle {
    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Output of the pairing stage at `beta_c`; depends on `V`, `mu` and the
/// numerics only.
pub struct PairStage {
    pub solver: BsSolver,
    pub tc: CriticalTemperature,
    pub op: BsOperator,
    pub top: SpectralTop,
    pub pair: PairState,
    pub t: TProfile,
    pub gl: GlCoefficients,
}

pub fn solve_pair_stage(model: &PhysicalModel, numerics: &Numerics) -> Result<PairStage> {
    let solver = BsSolver::new(model, numerics)?;
    let tc = solve_beta_c(&solver, numerics.beta_bracket, numerics.tolerances.beta_rel)?;
    info!("beta_c = {} (T_c = {})", tc.beta_c, tc.t_c);
    let (pair, top, op) = extract_pair_state(&solver, &tc, numerics.tolerances.gap)?;
    let t = compute_t(&pair, &op, model.mu)?;
    let gl = compute_lambdas(&t, &tc, model.mu, top.gap())?;
    Ok(PairStage {
        solver,
        tc,
        op,
        top,
        pair,
        t,
        gl,
    })
}

fn effective_stage(
    model: &PhysicalModel,
    numerics: &Numerics,
    gl: &GlCoefficients,
) -> Result<(EffectiveProblem, EffectiveGroundState, f64)> {
    let prob = EffectiveProblem::new(gl.coupling(), model.w.clone(), numerics)?;
    let gs = ground_energy(&prob)?;
    let d_c = compute_dc(gl, &gs);
    Ok((prob, gs, d_c))
}

fn manifest(
    config: &Config,
    stage: Stage,
    pair: Option<&PairStage>,
    cache_hits: usize,
) -> RunManifest {
    let grids = pair.map(|p| GridSummary {
        r_max: config.numerics.r_max_for(&config.model),
        p_max: config.numerics.p_max_for(&config.model),
        radial_nodes: p.op.rgrid.len(),
        momentum_nodes: p.op.pgrid.len(),
    });
    RunManifest {
        config_digest: config_digest(config),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        stage,
        grids,
        tolerances: config.numerics.tolerances.clone(),
        lambda_evaluations: pair.map_or(0, |p| p.solver.evaluations()),
        cache_hits,
    }
}

/// Run the pipeline up to `stage`. Assumption failures stop every stage
/// after validation.
pub fn run_config(config: &Config, stage: Stage, opts: &CheckOptions) -> Result<ResultBundle> {
    config.validate()?;
    let validation = validate_assumptions(&config.model, &config.numerics)?;
    let base = |pair: Option<&PairStage>| ResultBundle {
        manifest: manifest(config, stage, pair, 0),
        config: config.clone(),
        validation: validation.clone(),
        tc: None,
        spectrum: None,
        gl: None,
        effective: None,
        shift: None,
        checks: Vec::new(),
    };
    if stage == Stage::Validate {
        return Ok(base(None));
    }
    if !validation.all_passed() {
        let failed: Vec<String> = validation.failures().iter().map(|i| i.id.clone()).collect();
        return Err(Error::AssumptionViolation(format!(
            "failed: {}",
            failed.join(", ")
        )));
    }
    let pair = solve_pair_stage(&config.model, &config.numerics)?;
    let mut bundle = base(Some(&pair));
    complete_bundle(&mut bundle, config, &pair, stage, opts)?;
    Ok(bundle)
}

fn complete_bundle(
    bundle: &mut ResultBundle,
    config: &Config,
    pair: &PairStage,
    stage: Stage,
    opts: &CheckOptions,
) -> Result<()> {
    bundle.tc = Some(pair.tc.clone());
    let ev = &pair.top.eigenvalues;
    bundle.spectrum = Some(SpectrumSummary {
        lambda1: ev[0],
        lambda2: ev[1],
        lambda3: ev.get(2).copied().unwrap_or(f64::NAN),
        kappa: 1.0 - ev[1],
    });
    if stage < Stage::Gl {
        return Ok(());
    }
    bundle.gl = Some(pair.gl);
    if stage < Stage::Dc {
        return Ok(());
    }
    let (prob, gs, d_c) = effective_stage(&config.model, &config.numerics, &pair.gl)?;
    bundle.effective = Some(EffectiveSummary {
        coupling: prob.coupling,
        domain_radius: prob.domain_radius,
        ground_state: gs.clone(),
        d_c,
    });
    if stage < Stage::Shift {
        return Ok(());
    }
    bundle.shift = Some(tc_of_h(&pair.gl, d_c, &config.model.h_values)?);
    if stage < Stage::Verify {
        return Ok(());
    }
    let inputs = CheckInputs {
        solver: &pair.solver,
        tc: &pair.tc,
        op: &pair.op,
        top: &pair.top,
        pair: &pair.pair,
        t: &pair.t,
        gl: &pair.gl,
        gap_tolerance: config.numerics.tolerances.gap,
        effective: Some((&prob, &gs)),
    };
    bundle.checks = run_identity_checks(&inputs, opts)?;
    Ok(())
}

pub fn run_pipeline(config_path: &std::path::Path, stage: Stage) -> Result<ResultBundle> {
    let config = Config::load(config_path)?;
    run_config(&config, stage, &CheckOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    H,
    Mu,
    VAmplitude,
    WAmplitude,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(SweepAxis::H),
            "mu" => Ok(SweepAxis::Mu),
            "v_amplitude" => Ok(SweepAxis::VAmplitude),
            "w_amplitude" => Ok(SweepAxis::WAmplitude),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep axis {other}"
            ))),
        }
    }
}

/// One sweep row; failed points carry the error text and no numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub beta_c: Option<f64>,
    #[serde(rename = "T_c")]
    pub t_c: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub e0: Option<f64>,
    #[serde(rename = "D_c")]
    pub d_c: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "T_c_shifted")]
    pub t_c_shifted: Option<f64>,
    /// `T_c - T_c(h)`.
    pub shift: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "value",
    "beta_c",
    "T_c",
    "lambda0",
    "lambda1",
    "lambda2",
    "e0",
    "D_c",
    "h",
    "T_c_shifted",
    "shift",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config_digest: String,
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Points that reused an already computed pairing stage.
    pub cache_hits: usize,
    pub pair_stages: usize,
}

fn point_config(base: &Config, axis: SweepAxis, value: f64) -> Result<Config> {
    let mut c = base.clone();
    match axis {
        SweepAxis::H => c.model.h_values = vec![value],
        SweepAxis::Mu => c.model.mu = value,
        SweepAxis::VAmplitude => c.model.v.amplitude = value,
        SweepAxis::WAmplitude => c.model.w.amplitude = value,
    }
    c.validate()?;
    Ok(c)
}

fn failed_row(value: f64, err: &Error) -> SweepRow {
    SweepRow {
        value,
        beta_c: None,
        t_c: None,
        lambda0: None,
        lambda1: None,
        lambda2: None,
        e0: None,
        d_c: None,
        h: None,
        t_c_shifted: None,
        shift: None,
        error: Some(format!("{}: {err}", err.kind())),
    }
}

fn sweep_point(cfg: &Config, value: f64, pair: &PairStage) -> Result<Vec<SweepRow>> {
    let (_, gs, d_c) = effective_stage(&cfg.model, &cfg.numerics, &pair.gl)?;
    let report = tc_of_h(&pair.gl, d_c, &cfg.model.h_values)?;
    let gl = &pair.gl;
    let row = |h: Option<f64>, shifted: Option<f64>| SweepRow {
        value,
        beta_c: Some(gl.beta_c),
        t_c: Some(gl.t_c),
        lambda0: Some(gl.lambda0),
        lambda1: Some(gl.lambda1),
        lambda2: Some(gl.lambda2),
        e0: Some(gs.e0),
        d_c: Some(d_c),
        h,
        t_c_shifted: shifted,
        shift: shifted.map(|s| gl.t_c - s),
        error: None,
    };
    if report.rows.is_empty() {
        return Ok(vec![row(None, None)]);
    }
    Ok(report
        .rows
        .iter()
        .map(|r| row(Some(r.h), Some(r.t_c_shifted)))
        .collect())
}

/// Run the pipeline through the shift stage at each value of `axis`. The
/// pairing stage is computed once per distinct `(V, mu, numerics)` and shared.
pub fn sweep(base: &Config, axis: SweepAxis, values: &[f64]) -> Result<SweepReport> {
    base.validate()?;
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sweep value {v} not finite"
        )));
    }
    let configs: Vec<Result<Config>> = values
        .iter()
        .map(|&v| point_config(base, axis, v))
        .collect();
    let mut keys: BTreeMap<String, Config> = BTreeMap::new();
    for c in configs.iter().flatten() {
        keys.entry(pair_key(&c.model, &c.numerics))
            .or_insert_with(|| c.clone());
    }
    let stages: BTreeMap<String, std::result::Result<Arc<PairStage>, Arc<Error>>> = keys
        .par_iter()
        .map(|(k, c)| {
            let stage = validate_assumptions(&c.model, &c.numerics)
                .and_then(|v| {
                    if v.all_passed() {
                        Ok(())
                    } else {
                        let failed: Vec<String> =
                            v.failures().iter().map(|i| i.id.clone()).collect();
                        Err(Error::AssumptionViolation(format!(
                            "failed: {}",
                            failed.join(", ")
                        )))
                    }
                })
                .and_then(|_| solve_pair_stage(&c.model, &c.numerics))
                .map(Arc::new)
                .map_err(Arc::new);
            (k.clone(), stage)
        })
        .collect();
    let rows: Vec<Vec<SweepRow>> = configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(cfg, &value)| {
            let cfg = match cfg {
                Ok(c) => c,
                Err(e) => return vec![failed_row(value, e)],
            };
            match &stages[&pair_key(&cfg.model, &cfg.numerics)] {
                Err(e) => vec![failed_row(value, e)],
                Ok(pair) => {
                    sweep_point(cfg, value, pair).unwrap_or_else(|e| vec![failed_row(value, &e)])
                }
            }
        })
        .collect();
    let computed = configs.iter().filter(|c| c.is_ok()).count();
    Ok(SweepReport {
        config_digest: config_digest(base),
        axis,
        rows: rows.into_iter().flatten().collect(),
        cache_hits: computed - stages.len(),
        pair_stages: stages.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Config {
        let mut c = Config::example();
        c.numerics.n_r = 96;
        c.numerics.n_p = 160;
        c
    }

    #[test]
    fn digest_ignores_key_order_and_defaults() {
        let a = r#"{"V":{"family":"gaussian","amplitude":3,"range":1},"W":{"family":"zero","dimensionality":"one_d"},"mu":1,"h_values":[0.1]}"#;
        let b = r#"{"h_values":[0.1],"mu":1.0,"W":{"dimensionality":"one_d","family":"zero"},"V":{"range":1,"amplitude":3,"family":"gaussian"},"numerics":{"n_r":400}}"#;
        let c = r#"{"V":{"family":"gaussian","amplitude":3,"range":1},"W":{"family":"zero","dimensionality":"one_d"},"mu":1,"h_values":[0.2]}"#;
        let da = config_digest(&Config::from_json(a).unwrap());
        let db = config_digest(&Config::from_json(b).unwrap());
        let dc = config_digest(&Config::from_json(c).unwrap());
        assert_eq!(da, db);
        assert_ne!(da, dc);
    }

    #[test]
    fn stages_fill_the_bundle_progressively() {
        let cfg = small();
        let opts = CheckOptions::default();
        let v = run_config(&cfg, Stage::Validate, &opts).unwrap();
        assert!(v.tc.is_none() && v.validation.all_passed());
        let tc = run_config(&cfg, Stage::Tc, &opts).unwrap();
        assert!(tc.tc.is_some() && tc.gl.is_none());
        let shift = run_config(&cfg, Stage::Shift, &opts).unwrap();
        let s = shift.shift.as_ref().unwrap();
        assert_eq!(s.t_c, shift.tc.as_ref().unwrap().t_c);
        assert_eq!(shift.gl.unwrap().beta_c, shift.tc.unwrap().beta_c);
        assert!(shift.checks.is_empty());
    }

    #[test]
    fn zero_interaction_fails_validation() {
        let mut cfg = small();
        cfg.model.v.amplitude = 0.0;
        let v = run_config(&cfg, Stage::Validate, &CheckOptions::default()).unwrap();
        assert!(!v.validation.all_passed());
        let err = run_config(&cfg, Stage::Tc, &CheckOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn sweep_reuses_pair_stage_for_field_axes() {
        let cfg = small();
        let report = sweep(&cfg, SweepAxis::H, &[0.01, 0.02, 0.04]).unwrap();
        assert_eq!(report.pair_stages, 1);
        assert_eq!(report.cache_hits, 2);
        let s: Vec<f64> = report.rows.iter().map(|r| r.shift.unwrap()).collect();
        assert!((s[1] / s[0] - 4.0).abs() < 1e-9 && (s[2] / s[0] - 16.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_records_point_errors() {
        let cfg = small();
        let report = sweep(&cfg, SweepAxis::VAmplitude, &[-1.0, 3.0]).unwrap();
        assert!(report.rows[0]
            .error
            .as_deref()
            .unwrap()
            .starts_with("ConfigError"));
        assert!(report.rows.iter().skip(1).all(|r| r.error.is_none()));
    }
}
