//! Numerical cross-checks of the identities the pipeline relies on.
//!
//! Every check compares a computed quantity against an independent route to
//! the same number. Tolerances live in [`TOLERANCES`] and fall into two
//! classes: `identity` checks hold to rounding, `quadrature` checks are
//! limited by discretization.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{
    lambda_of_beta, round_trip_residual, BsOperator, BsSolver, CriticalTemperature, PairState,
    SpectralTop,
};
use crate::effective::{rayleigh_quotient_gaussian, EffectiveGroundState, EffectiveProblem};
use crate::error::{Error, Result};
use crate::gl::{
    a0_two_routes, a_functionals, normalization_position_space, one_minus_r, r_small_p_coefficient,
    tau_hat, GlCoefficients, TProfile,
};
use crate::kernels::{
    chi, g0, g1, g1_exponential_form, g2, g2_exponential_form, hessian_l_closed,
    laplacian_l_finite_difference, matsubara_chi_derivative, matsubara_tanh_real, matsubara_xi, xi,
    Beta, MatsubaraTruncation,
};
use crate::radial::RadialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceClass {
    Identity,
    Quadrature,
}

/// Where the expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckSource {
    /// An identity or limit of the underlying theory.
    Theory,
    /// Follows from the definitions by inspection.
    ByDefinition,
    /// Independent numerical route to the same quantity.
    CrossCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - expected| <= tolerance`
    Absolute,
    /// `|measured - expected| <= tolerance |expected|`
    Relative,
    /// `measured <= expected + tolerance`
    AtMost,
    /// `measured >= expected - tolerance`
    AtLeast,
    /// `measured > expected`
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub measured: f64,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub passed: bool,
    pub class: ToleranceClass,
    pub source: CheckSource,
}

/// `(id, class, tolerance, source, description)`.
pub const TOLERANCES: &[(&str, ToleranceClass, f64, CheckSource, &str)] = {
    use CheckSource::*;
    use ToleranceClass::*;
    &[
        (
            "g1.closed_forms",
            Identity,
            1e-12,
            Theory,
            "g1: hyperbolic and exponential forms agree on [-50, 50]",
        ),
        (
            "g2.closed_forms",
            Identity,
            1e-12,
            Theory,
            "g2: hyperbolic and exponential forms agree on [-50, 50]",
        ),
        (
            "g.origin_limits",
            Identity,
            1e-10,
            Theory,
            "g0(0) = 1/2, g1(0) = 0, g2(0) = 1/4",
        ),
        (
            "g.parity",
            Identity,
            1e-12,
            ByDefinition,
            "g0, g2 even and g1 odd",
        ),
        (
            "xi.symmetry",
            Identity,
            1e-12,
            ByDefinition,
            "Xi(E, E') = Xi(E', E)",
        ),
        (
            "xi.mean_chi_bound",
            Identity,
            1e-12,
            Theory,
            "Xi(E, E') <= (chi(E) + chi(E')) / 2",
        ),
        (
            "matsubara.tanh",
            Quadrature,
            1e-3,
            Theory,
            "truncated Matsubara sum reproduces tanh, n_max = 1e4",
        ),
        (
            "matsubara.xi",
            Quadrature,
            1e-3,
            Theory,
            "truncated Matsubara sum reproduces Xi, n_max = 1e4",
        ),
        (
            "matsubara.decay_ratio",
            Quadrature,
            0.2,
            CrossCheck,
            "truncation error halves when n_max doubles",
        ),
        (
            "matsubara.chi_derivative",
            Quadrature,
            1e-8,
            Theory,
            "Matsubara sum of the energy response equals -beta^2 g1",
        ),
        (
            "hessian.finite_difference",
            Quadrature,
            1e-6,
            Theory,
            "closed-form Laplacian of L matches finite differences",
        ),
        (
            "hessian.bridge",
            Identity,
            1e-10,
            Theory,
            "A1 integrand equals (1/6) Laplacian of L times |tau|^2",
        ),
        (
            "bs.kernel_symmetry",
            Identity,
            1e-12,
            ByDefinition,
            "assembled operator is symmetric",
        ),
        (
            "bs.amplitude_linearity_exact",
            Identity,
            1e-12,
            ByDefinition,
            "lambda(4^k V) = 4^k lambda(V)",
        ),
        (
            "bs.amplitude_linearity",
            Identity,
            1e-12,
            ByDefinition,
            "lambda(c V) = c lambda(V) for c in {0.5, 2, 10}",
        ),
        (
            "bs.deweight_round_trip",
            Identity,
            1e-12,
            ByDefinition,
            "de-weighted eigenvector re-weights to the matrix eigenvector",
        ),
        (
            "bs.monotone",
            Quadrature,
            0.0,
            Theory,
            "lambda(beta) strictly increasing on 10 log-spaced beta",
        ),
        (
            "bs.bracket_certificate",
            Quadrature,
            0.0,
            CrossCheck,
            "lambda(beta_lo) < 1 < lambda(beta_hi) on re-evaluation",
        ),
        (
            "bs.lambda_at_beta_c",
            Quadrature,
            1e-8,
            Theory,
            "top eigenvalue equals 1 at beta_c",
        ),
        (
            "bs.round_trip",
            Quadrature,
            1e-6,
            CrossCheck,
            "V^1/2 chi V^1/2 phi = phi through momentum space",
        ),
        (
            "bs.gap",
            Quadrature,
            1e-6,
            Theory,
            "gap 1 - lambda2 at beta_c is positive",
        ),
        (
            "gl.normalization_two_route",
            Quadrature,
            1e-8,
            CrossCheck,
            "N from momentum space and from the chi^2 kernel",
        ),
        (
            "gl.t_decay",
            Quadrature,
            1e-3,
            CrossCheck,
            "|t(p_max)| small against max |t|",
        ),
        (
            "gl.a0_two_route",
            Quadrature,
            1e-8,
            CrossCheck,
            "A0 from momentum space and from the chi kernel, five trial states",
        ),
        (
            "gl.a1_identity",
            Quadrature,
            1e-8,
            Theory,
            "A1(T_c) = -Lambda0",
        ),
        (
            "gl.a2_identity",
            Quadrature,
            1e-8,
            Theory,
            "A2(T_c) = -Lambda1",
        ),
        (
            "gl.a2_mu_derivative",
            Quadrature,
            1e-6,
            CrossCheck,
            "A2 = -dA0/dmu by finite differences",
        ),
        (
            "gl.dA0_dT_slope",
            Quadrature,
            1e-5,
            Theory,
            "Lambda2 = -T_c dA0/dT at T_c by finite differences",
        ),
        (
            "gl.lambda0_positive",
            Quadrature,
            1e-7,
            Theory,
            "Lambda0 > 0 with margin",
        ),
        (
            "gl.lambda2_positive",
            Quadrature,
            1e-7,
            Theory,
            "Lambda2 > 0 with margin",
        ),
        (
            "r.small_p",
            Quadrature,
            1e-4,
            Theory,
            "(1 - R(p)) / p^2 at p = 1e-3 equals (1/12) <phi, r^2 phi>",
        ),
        (
            "r.large_p",
            Quadrature,
            0.02,
            Theory,
            "1 - R(p) tends to 1/2 at large p",
        ),
        ("r.range", Quadrature, 0.0, ByDefinition, "0 <= R(p) <= 1"),
        (
            "r.minorant",
            Quadrature,
            0.0,
            Theory,
            "1 - R(p) >= c p^2 / (E0 + p^2) with c > 0 at 200 p",
        ),
        (
            "schrodinger.lower_bound",
            Identity,
            1e-12,
            ByDefinition,
            "e0 >= min coupling W",
        ),
        (
            "schrodinger.variational",
            Quadrature,
            1e-6,
            Theory,
            "e0 <= Rayleigh quotient of gaussian trial states",
        ),
        (
            "schrodinger.refinement",
            Quadrature,
            1e-6,
            CrossCheck,
            "grid refinement change below tolerance",
        ),
    ]
};

fn entry(id: &str) -> &'static (&'static str, ToleranceClass, f64, CheckSource, &'static str) {
    TOLERANCES
        .iter()
        .find(|e| e.0 == id)
        .unwrap_or_else(|| panic!("check {id} missing from tolerance table"))
}

/// Build a result for `id`, scaling its tabulated tolerance by `scale`.
pub fn make_check(
    id: &str,
    measured: f64,
    expected: f64,
    comparison: Comparison,
    scale: f64,
) -> CheckResult {
    let &(_, class, tol, source, description) = entry(id);
    let tolerance = tol * scale;
    let passed = match comparison {
        Comparison::Absolute => (measured - expected).abs() <= tolerance,
        Comparison::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
        Comparison::AtMost => measured <= expected + tolerance,
        Comparison::AtLeast => measured >= expected - tolerance,
        Comparison::Above => measured > expected,
    };
    CheckResult {
        id: id.to_string(),
        description: description.to_string(),
        measured,
        expected,
        comparison,
        tolerance,
        passed,
        class,
        source,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub tolerance_scale: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tolerance_scale: 1.0,
        }
    }
}

/// Everything the checks read; all of it comes out of one pipeline run.
pub struct CheckInputs<'a> {
    pub solver: &'a BsSolver,
    pub tc: &'a CriticalTemperature,
    pub op: &'a BsOperator,
    pub top: &'a SpectralTop,
    pub pair: &'a PairState,
    pub t: &'a TProfile,
    pub gl: &'a GlCoefficients,
    pub gap_tolerance: f64,
    pub effective: Option<(&'a EffectiveProblem, &'a EffectiveGroundState)>,
}

type Group<'a> = Box<dyn Fn(&CheckInputs, f64) -> Result<Vec<CheckResult>> + Send + Sync + 'a>;

/// Run the full battery. Groups run in parallel; the returned order is fixed.
pub fn run_identity_checks(inputs: &CheckInputs, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let groups: Vec<Group> = vec![
        Box::new(|_, s| Ok(scalar_checks(s))),
        Box::new(|_, s| Ok(matsubara_checks(s))),
        Box::new(hessian_checks),
        Box::new(operator_checks),
        Box::new(gl_checks),
        Box::new(r_checks),
        Box::new(schrodinger_checks),
    ];
    let scale = opts.tolerance_scale;
    let results: Vec<Result<Vec<CheckResult>>> =
        groups.par_iter().map(|g| g(inputs, scale)).collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0f64, |m, v| m.max(v.abs()))
}

fn scalar_checks(s: f64) -> Vec<CheckResult> {
    let zs: Vec<f64> = (0..10_000)
        .map(|k| -50.0 + 100.0 * k as f64 / 9_999.0)
        .collect();
    let d1 = max_abs(zs.iter().map(|&z| g1(z) - g1_exponential_form(z)));
    let d2 = max_abs(zs.iter().map(|&z| g2(z) - g2_exponential_form(z)));
    let origin = (g0(0.0) - 0.5)
        .abs()
        .max(g1(0.0).abs())
        .max((g2(0.0) - 0.25).abs());
    let parity = max_abs(
        zs.iter()
            .flat_map(|&z| [g0(z) - g0(-z), g1(z) + g1(-z), g2(z) - g2(-z)]),
    );
    let beta = Beta::new(1.7).expect("positive");
    let es: Vec<f64> = (0..40)
        .map(|k| -4.0 + 8.0 * (k as f64 + 0.5) / 40.0)
        .collect();
    let mut sym = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    for &e in &es {
        for &ep in &es {
            sym = sym.max((xi(beta, e, ep) - xi(beta, ep, e)).abs());
            let mean = 0.5 * (chi(beta, e) + chi(beta, ep));
            excess = excess.max((xi(beta, e, ep) - mean) / mean);
        }
    }
    vec![
        make_check("g1.closed_forms", d1, 0.0, Comparison::Absolute, s),
        make_check("g2.closed_forms", d2, 0.0, Comparison::Absolute, s),
        make_check("g.origin_limits", origin, 0.0, Comparison::Absolute, s),
        make_check("g.parity", parity, 0.0, Comparison::Absolute, s),
        make_check("xi.symmetry", sym, 0.0, Comparison::Absolute, s),
        make_check("xi.mean_chi_bound", excess, 0.0, Comparison::AtMost, s),
    ]
}

fn truncation(n: usize) -> MatsubaraTruncation {
    MatsubaraTruncation::new(n).expect("positive truncation")
}

/// Largest truncation errors of the tanh and Xi sums over fixed samples.
pub fn matsubara_errors(n_max: usize) -> (f64, f64) {
    let trunc = truncation(n_max);
    let tanh_err = max_abs(tanh_samples().map(|x| matsubara_tanh_real(x, trunc) - x.tanh()));
    let beta = Beta::new(2.0).expect("positive");
    let xi_err =
        max_abs(xi_samples().map(|(e, ep)| matsubara_xi(beta, e, ep, trunc) - xi(beta, e, ep)));
    (tanh_err, xi_err)
}

fn tanh_samples() -> impl Iterator<Item = f64> {
    (0..100).map(|k| -10.0 + 20.0 * (k as f64 + 0.5) / 100.0)
}

fn xi_samples() -> impl Iterator<Item = (f64, f64)> {
    (0..100).map(|k| {
        let (i, j) = (k / 10, k % 10);
        (
            -3.0 + 6.0 * (i as f64 + 0.5) / 10.0,
            -3.0 + 6.0 * (j as f64 + 0.5) / 10.0,
        )
    })
}

fn matsubara_checks(s: f64) -> Vec<CheckResult> {
    let (tanh_err, xi_err) = matsubara_errors(10_000);
    let (c1, c2) = (truncation(1_000), truncation(2_000));
    let ratio_dev = tanh_samples()
        .map(|x| {
            let a = (matsubara_tanh_real(x, c1) - x.tanh()).abs();
            let b = (matsubara_tanh_real(x, c2) - x.tanh()).abs();
            (a / b / 2.0 - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    let beta = Beta::new(1.3).expect("positive");
    let trunc = truncation(10_000);
    let deriv = max_abs((0..100).map(|k| {
        let e = -5.0 + 10.0 * (k as f64 + 0.5) / 100.0;
        let b = beta.value();
        matsubara_chi_derivative(beta, e, trunc) + b * b * g1(b * e)
    }));
    vec![
        make_check("matsubara.tanh", tanh_err, 0.0, Comparison::Absolute, s),
        make_check("matsubara.xi", xi_err, 0.0, Comparison::Absolute, s),
        make_check(
            "matsubara.decay_ratio",
            ratio_dev,
            0.0,
            Comparison::Absolute,
            s,
        ),
        make_check(
            "matsubara.chi_derivative",
            deriv,
            0.0,
            Comparison::Absolute,
            s,
        ),
    ]
}

/// Twenty fixed `(beta, mu, k)` points with `beta` in `[0.5, 5]`.
pub fn hessian_samples() -> Vec<(f64, f64, f64)> {
    (0..20)
        .map(|i| {
            let u = (i as f64 + 0.5) / 20.0;
            let beta = 0.5 + 4.5 * u;
            let mu = -1.0 + 3.0 * ((7 * i) % 20) as f64 / 19.0;
            let k = 0.1 + 1.9 * ((13 * i) % 20) as f64 / 19.0;
            (beta, mu, k)
        })
        .collect()
}

fn hessian_checks(inp: &CheckInputs, s: f64) -> Result<Vec<CheckResult>> {
    let fd = max_abs(hessian_samples().into_iter().map(|(b, mu, k)| {
        let beta = Beta::new(b).expect("positive");
        laplacian_l_finite_difference(beta, mu, k, 2e-3) - hessian_l_closed(beta, mu, k)
    }));
    let beta = Beta::new(inp.tc.beta_c)?;
    let b = beta.value();
    let mu = inp.solver.model.mu;
    let tau = tau_hat(inp.t);
    let n = tau.grid.len();
    let mut bridge = 0.0f64;
    for idx in (0..10).map(|j| (j * n) / 10 + n / 20) {
        let p = tau.grid.nodes[idx];
        let z = b * (p * p - mu);
        let t2 = tau.values[idx] * tau.values[idx];
        let integrand = -b * b / 4.0 * t2 * (g1(z) + 2.0 / 3.0 * b * p * p * g2(z));
        let via_hessian = hessian_l_closed(beta, mu, p) / 6.0 * t2;
        if integrand != 0.0 {
            bridge = bridge.max(((integrand - via_hessian) / integrand).abs());
        }
    }
    Ok(vec![
        make_check(
            "hessian.finite_difference",
            fd,
            0.0,
            Comparison::Absolute,
            s,
        ),
        make_check("hessian.bridge", bridge, 0.0, Comparison::Absolute, s),
    ])
}

fn operator_checks(inp: &CheckInputs, s: f64) -> Result<Vec<CheckResult>> {
    let m = &inp.op.matrix;
    let asym = max_abs((0..m.nrows()).flat_map(|i| (0..i).map(move |j| m[(i, j)] - m[(j, i)])));
    let model = &inp.solver.model;
    let disc = &inp.solver.disc;
    let beta = Beta::new(inp.tc.beta_c)?;
    let base = lambda_of_beta(model, beta, disc)?;
    let scaled_dev = |cs: &[f64]| -> Result<f64> {
        let mut dev = 0.0f64;
        for &c in cs {
            let l = lambda_of_beta(&model.with_scaled_interaction(c), beta, disc)?;
            dev = dev.max(((l - c * base) / (c * base)).abs());
        }
        Ok(dev)
    };
    let exact = scaled_dev(&[0.25, 4.0, 16.0])?;
    let general = scaled_dev(&[0.5, 2.0, 10.0])?;

    let betas: Vec<f64> = (0..10)
        .map(|k| inp.tc.beta_c * 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0))
        .collect();
    let lambdas = betas
        .iter()
        .map(|&b| inp.solver.lambda(b))
        .collect::<Result<Vec<f64>>>()?;
    let min_step = lambdas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);

    let [lo, hi] = inp.tc.bracket;
    let l_lo = lambda_of_beta(model, Beta::new(lo)?, disc)?;
    let l_hi = lambda_of_beta(model, Beta::new(hi)?, disc)?;
    let certificate = (1.0 - l_lo).min(l_hi - 1.0);

    let residual = round_trip_residual(inp.op, inp.pair, model.mu);
    let kappa = 1.0 - inp.top.lambda2();
    Ok(vec![
        make_check("bs.kernel_symmetry", asym, 0.0, Comparison::Absolute, s),
        make_check(
            "bs.amplitude_linearity_exact",
            exact,
            0.0,
            Comparison::Absolute,
            s,
        ),
        make_check(
            "bs.amplitude_linearity",
            general,
            0.0,
            Comparison::Absolute,
            s,
        ),
        make_check(
            "bs.deweight_round_trip",
            inp.top.deweight_residual,
            0.0,
            Comparison::Absolute,
            s,
        ),
        make_check("bs.monotone", min_step, 0.0, Comparison::Above, s),
        make_check(
            "bs.bracket_certificate",
            certificate,
            0.0,
            Comparison::Above,
            s,
        ),
        make_check(
            "bs.lambda_at_beta_c",
            inp.top.lambda1(),
            1.0,
            Comparison::Absolute,
            s,
        ),
        make_check("bs.round_trip", residual, 0.0, Comparison::Absolute, s),
        {
            let mut c = make_check("bs.gap", kappa, inp.gap_tolerance, Comparison::Above, s);
            c.tolerance = inp.gap_tolerance;
            c
        },
    ])
}

/// Centered difference of `f` at `x` with step `h`, Richardson-improved.
fn derivative(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

/// `-T_c dA0/dT` at `T_c` for the trial state built from `t`.
pub fn slope_lambda2(t: &TProfile, t_c: f64, mu: f64) -> Result<f64> {
    let tau = tau_hat(t);
    let slope = derivative(
        |temp| Ok(a_functionals(&tau, temp, mu)?.a0),
        t_c,
        1e-3 * t_c,
    )?;
    Ok(-t_c * slope)
}

fn gl_checks(inp: &CheckInputs, s: f64) -> Result<Vec<CheckResult>> {
    let mu = inp.solver.model.mu;
    let gl = inp.gl;
    let tau = tau_hat(inp.t);
    let a = a_functionals(&tau, gl.t_c, mu)?;
    let da0_dmu = derivative(
        |m| Ok(a_functionals(&tau, gl.t_c, m)?.a0),
        mu,
        1e-4 * mu.abs().max(1.0),
    )?;
    let slope = slope_lambda2(inp.t, gl.t_c, mu)?;
    let n_pos = normalization_position_space(inp.pair, inp.op, mu);
    let tmax = max_abs(inp.t.t.values.iter().copied());
    let tail = inp.t.t.values.last().copied().unwrap_or(0.0).abs() / tmax;

    let rgrid = Arc::clone(&inp.op.rgrid);
    let mut a0_dev = 0.0f64;
    for (width, center) in [(0.5, 0.0), (1.0, 0.3), (1.5, 1.0), (0.8, 2.0), (2.0, 0.5)] {
        let trial = RadialFunction::from_fn(Arc::clone(&rgrid), |r| {
            (-((r - center) / width).powi(2)).exp()
        });
        let (m, p) = a0_two_routes(&trial, &inp.op.pgrid, gl.t_c, mu)?;
        a0_dev = a0_dev.max(((m - p) / m).abs());
    }

    Ok(vec![
        make_check(
            "gl.normalization_two_route",
            n_pos,
            inp.t.normalization,
            Comparison::Relative,
            s,
        ),
        make_check("gl.t_decay", tail, 0.0, Comparison::AtMost, s),
        make_check("gl.a0_two_route", a0_dev, 0.0, Comparison::Absolute, s),
        make_check("gl.a1_identity", a.a1, -gl.lambda0, Comparison::Relative, s),
        make_check("gl.a2_identity", a.a2, -gl.lambda1, Comparison::Relative, s),
        make_check(
            "gl.a2_mu_derivative",
            a.a2,
            -da0_dmu,
            Comparison::Relative,
            s,
        ),
        make_check(
            "gl.dA0_dT_slope",
            gl.lambda2,
            slope,
            Comparison::Relative,
            s,
        ),
        {
            let mut c = make_check("gl.lambda0_positive", gl.lambda0, 0.0, Comparison::Above, s);
            c.expected = 10.0 * c.tolerance;
            c.passed = gl.lambda0 > c.expected;
            c
        },
        {
            let mut c = make_check("gl.lambda2_positive", gl.lambda2, 0.0, Comparison::Above, s);
            c.expected = 10.0 * c.tolerance;
            c.passed = gl.lambda2 > c.expected;
            c
        },
    ])
}

/// Sample momenta for the `R(p)` scan: 200 log-spaced values spanning six
/// decades around the inverse size of the pair state.
pub fn minorant_momenta(pair: &PairState) -> Vec<f64> {
    let size = (12.0 * r_small_p_coefficient(pair)).sqrt().max(1e-12);
    (0..200)
        .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 199.0) / size)
        .collect()
}

/// Constants `c > 0`, `E0 > 0` with `1 - R(p) >= c p^2 / (E0 + p^2)` at every
/// sampled momentum. `c` is the smallest value of `1 - R` over the upper half
/// of the samples (capped at 1/2, the large-momentum limit) and `E0` the
/// smallest value that makes the bound hold everywhere.
pub fn r_minorant(pair: &PairState) -> Result<(f64, f64)> {
    let ps = minorant_momenta(pair);
    let values: Vec<f64> = ps.iter().map(|&p| one_minus_r(pair, p)).collect();
    if let Some((p, v)) = ps.iter().zip(&values).find(|(_, v)| **v <= 0.0) {
        return Err(Error::MinorantViolation { p: *p, value: *v });
    }
    let c = values[ps.len() / 2..]
        .iter()
        .copied()
        .fold(0.5f64, f64::min);
    let e0 = ps
        .iter()
        .zip(&values)
        .map(|(p, v)| c * p * p / v - p * p)
        .fold(f64::MIN_POSITIVE, f64::max);
    Ok((c, e0))
}

fn r_checks(inp: &CheckInputs, s: f64) -> Result<Vec<CheckResult>> {
    let pair = inp.pair;
    let range = inp.solver.model.v.range;
    let small = one_minus_r(pair, 1e-3) / 1e-6;
    let large = one_minus_r(pair, 50.0 / range);
    let mut out_of_range = 0.0f64;
    for p in minorant_momenta(pair) {
        let r = 1.0 - one_minus_r(pair, p);
        out_of_range = out_of_range.max(-r).max(r - 1.0);
    }
    let minorant = match r_minorant(pair) {
        Ok((c, e0)) => {
            let worst = minorant_momenta(pair)
                .into_iter()
                .map(|p| one_minus_r(pair, p) - c * p * p / (e0 + p * p))
                .fold(f64::INFINITY, f64::min);
            if worst >= -1e-15 {
                c
            } else {
                -1.0
            }
        }
        Err(_) => -1.0,
    };
    Ok(vec![
        make_check(
            "r.small_p",
            small,
            r_small_p_coefficient(pair),
            Comparison::Relative,
            s,
        ),
        make_check("r.large_p", large, 0.5, Comparison::Absolute, s),
        make_check("r.range", out_of_range, 0.0, Comparison::AtMost, s),
        make_check("r.minorant", minorant, 0.0, Comparison::Above, s),
    ])
}

fn schrodinger_checks(inp: &CheckInputs, s: f64) -> Result<Vec<CheckResult>> {
    let Some((prob, gs)) = inp.effective else {
        return Ok(Vec::new());
    };
    let rq = [0.25, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|w| rayleigh_quotient_gaussian(prob, w * prob.field.length_scale()))
        .fold(f64::INFINITY, f64::min);
    let scale = gs.e0.abs().max(1.0);
    let mut refinement = make_check(
        "schrodinger.refinement",
        gs.refinement_delta,
        0.0,
        Comparison::AtMost,
        s,
    );
    refinement.tolerance *= scale;
    refinement.passed = gs.refinement_delta <= refinement.tolerance;
    let mut variational = make_check("schrodinger.variational", gs.e0, rq, Comparison::AtMost, s);
    variational.tolerance *= scale;
    variational.passed = gs.e0 <= rq + variational.tolerance;
    Ok(vec![
        make_check(
            "schrodinger.lower_bound",
            gs.e0,
            gs.potential_min,
            Comparison::AtLeast,
            s,
        ),
        variational,
        refinement,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_has_a_unique_entry() {
        let mut ids: Vec<&str> = TOLERANCES.iter().map(|e| e.0).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n);
        for e in TOLERANCES {
            let range = match e.1 {
                ToleranceClass::Identity => 1e-12..=1e-10,
                ToleranceClass::Quadrature => 0.0..=0.2,
            };
            assert!(range.contains(&e.2), "{}", e.0);
        }
    }

    #[test]
    fn comparisons() {
        assert!(make_check("g.parity", 1e-13, 0.0, Comparison::Absolute, 1.0).passed);
        assert!(!make_check("g.parity", 1e-13, 0.0, Comparison::Absolute, 1e-6).passed);
        assert!(make_check("gl.a1_identity", 1.0 + 1e-9, 1.0, Comparison::Relative, 1.0).passed);
        assert!(!make_check("r.minorant", 0.0, 0.0, Comparison::Above, 1.0).passed);
        assert!(make_check("r.range", -1.0, 0.0, Comparison::AtMost, 1.0).passed);
    }

    #[test]
    fn scalar_and_matsubara_groups_pass() {
        for c in scalar_checks(1.0).into_iter().chain(matsubara_checks(1.0)) {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn hessian_samples_cover_beta_range() {
        let s = hessian_samples();
        assert_eq!(s.len(), 20);
        assert!(s.iter().all(|(b, _, _)| (0.5..=5.0).contains(b)));
    }
}
