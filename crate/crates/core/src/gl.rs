//! Pair profile `t(p)`, the Ginzburg-Landau coefficients and the trial-state
//! functionals `A0`, `A1`, `A2` built from the same momentum samples.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{BsOperator, CriticalTemperature, PairState};
use crate::error::{Error, Result};
use crate::kernels::{chi, g1, g2, sech2, Beta, InverseTemperature};
use crate::radial::{
    assemble_kernel, ft3_radial, kernel_quadratic_form, one_minus_j0, Grid, RadialFunction,
};

/// `t(p) = 2 (V^1/2 phi)^(p) / N` on the momentum grid used at `beta_c`,
/// with `N = || chi (V^1/2 phi)^ ||`.
#[derive(Debug, Clone)]
pub struct TProfile {
    pub t: RadialFunction,
    pub normalization: f64,
}

pub fn compute_t(pair: &PairState, op: &BsOperator, mu: f64) -> Result<TProfile> {
    let hat = ft3_radial(&pair.v_half_phi, &op.pgrid);
    let n2 = op
        .pgrid
        .integrate_3d(|k, p| (op.temp.chi(p * p - mu) * hat.values[k]).powi(2));
    if n2.is_nan() || n2 <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let n = n2.sqrt();
    let values = hat.values.iter().map(|h| 2.0 * h / n).collect();
    Ok(TProfile {
        t: RadialFunction::new(Arc::clone(&op.pgrid), values)?,
        normalization: n,
    })
}

/// `N` from the position-space quadratic form of the `chi^2` multiplier.
pub fn normalization_position_space(pair: &PairState, op: &BsOperator, mu: f64) -> f64 {
    let temp = op.temp;
    let k = assemble_kernel(&op.rgrid, &op.pgrid, |p| temp.chi(p * p - mu).powi(2));
    kernel_quadratic_form(&k, &pair.v_half_phi).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlCoefficients {
    pub beta_c: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `lambda1 - lambda2` of the operator at `beta_c`.
    pub gap: f64,
}

impl GlCoefficients {
    /// `Lambda1 / Lambda0`, the coupling of `W` in the effective problem.
    pub fn coupling(&self) -> f64 {
        self.lambda1 / self.lambda0
    }
}

/// `(1 / 2 pi^2) \int p^2 t^2 f(p) dp`.
fn moment(t: &RadialFunction, f: impl Fn(f64) -> f64) -> f64 {
    let g = &t.grid;
    g.nodes
        .iter()
        .zip(&g.weights)
        .zip(&t.values)
        .map(|((&p, w), tv)| w * p * p * tv * tv * f(p))
        .sum::<f64>()
        / (2.0 * PI * PI)
}

pub fn compute_lambdas(
    t: &TProfile,
    tc: &CriticalTemperature,
    mu: f64,
    gap: f64,
) -> Result<GlCoefficients> {
    let b = tc.beta_c;
    let lambda0 = b * b / 16.0
        * moment(&t.t, |p| {
            let z = b * (p * p - mu);
            g1(z) + 2.0 / 3.0 * b * p * p * g2(z)
        });
    let lambda1 = b * b / 4.0 * moment(&t.t, |p| g1(b * (p * p - mu)));
    let lambda2 = b / 8.0 * moment(&t.t, |p| sech2(b * (p * p - mu) / 2.0));
    if lambda0.is_nan() || lambda0 <= 0.0 {
        return Err(Error::PositivityViolation {
            name: "lambda0",
            value: lambda0,
        });
    }
    if lambda2.is_nan() || lambda2 <= 0.0 {
        return Err(Error::PositivityViolation {
            name: "lambda2",
            value: lambda2,
        });
    }
    Ok(GlCoefficients {
        beta_c: b,
        t_c: tc.t_c,
        lambda0,
        lambda1,
        lambda2,
        gap,
    })
}

/// Trial state `tau^ = (1/2) (2 pi)^(-3/2) t`.
pub fn tau_hat(t: &TProfile) -> RadialFunction {
    let c = 0.5 * (2.0 * PI).powf(-1.5);
    RadialFunction {
        grid: Arc::clone(&t.t.grid),
        values: t.t.values.iter().map(|v| c * v).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AFunctionals {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub temperature: f64,
}

/// Zeroth, first and second order functionals of a momentum-space trial
/// state at temperature `T`:
/// `a0 = <tau, chi_beta tau>`, `a1 = -(beta^2/4) <tau, (g1 + 2/3 beta p^2 g2) tau>`,
/// `a2 = -beta^2 <tau, g1 tau> = -d a0 / d mu`.
pub fn a_functionals(tau_hat: &RadialFunction, temperature: f64, mu: f64) -> Result<AFunctionals> {
    let beta = Beta::from_temperature(temperature)?;
    let b = beta.value();
    let g = &tau_hat.grid;
    let sq = |k: usize| tau_hat.values[k] * tau_hat.values[k];
    let a0 = g.integrate_3d(|k, p| sq(k) * chi(beta, p * p - mu));
    let a1 = -b * b / 4.0
        * g.integrate_3d(|k, p| {
            let z = b * (p * p - mu);
            sq(k) * (g1(z) + 2.0 / 3.0 * b * p * p * g2(z))
        });
    let a2 = -b * b * g.integrate_3d(|k, p| sq(k) * g1(b * (p * p - mu)));
    Ok(AFunctionals {
        a0,
        a1,
        a2,
        temperature,
    })
}

/// `a0` of a position-space trial state, once through its transform on
/// `pgrid` and once as the quadratic form of the `chi_beta` kernel.
pub fn a0_two_routes(
    tau: &RadialFunction,
    pgrid: &Arc<Grid>,
    temperature: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    let beta = Beta::from_temperature(temperature)?;
    let hat = ft3_radial(tau, pgrid);
    let momentum = a_functionals(&hat, temperature, mu)?.a0;
    let temp = InverseTemperature::Finite(beta);
    let k = assemble_kernel(&tau.grid, pgrid, |p| temp.chi(p * p - mu));
    Ok((momentum, kernel_quadratic_form(&k, tau)))
}

/// `1 - R(p) = (1/2) <phi, (1 - j0(p r)) phi>`, using the direction average
/// `(1 + j0(p r)) / 2` of `cos^2(p . r / 2)`.
pub fn one_minus_r(pair: &PairState, p: f64) -> f64 {
    let phi = &pair.phi;
    0.5 * phi
        .grid
        .integrate_3d(|i, r| phi.values[i] * phi.values[i] * one_minus_j0(p * r))
}

pub fn r_of_p(pair: &PairState, p: f64) -> f64 {
    1.0 - one_minus_r(pair, p)
}

/// Limit of `(1 - R(p)) / p^2` as `p -> 0`: `(1/12) <phi, r^2 phi>`.
pub fn r_small_p_coefficient(pair: &PairState) -> f64 {
    let phi = &pair.phi;
    phi.grid
        .integrate_3d(|i, r| phi.values[i] * phi.values[i] * r * r)
        / 12.0
}
