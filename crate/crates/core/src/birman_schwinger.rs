//! Discretized Birman-Schwinger operator `V^1/2 chi_beta(p^2 - mu) V^1/2` on
//! the s-wave sector and the critical inverse temperature where its top
//! eigenvalue crosses one.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Beta, InverseTemperature};
use crate::model::{eval_v, Numerics, PhysicalModel, PotentialFamily};
use crate::radial::{assemble_chi_kernel, ft3_radial, Grid, RadialFunction};

/// Largest inverse temperature tried while bracketing.
pub const BETA_MAX: f64 = 1e6;
const BETA_MIN: f64 = 1e-8;

/// Grid parameters shared by every operator built for one model.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub rgrid: Arc<Grid>,
    pub mu: f64,
    pub p_max: f64,
    pub n_p: usize,
    pub guard_epsilon: f64,
}

impl Discretization {
    pub fn new(model: &PhysicalModel, numerics: &Numerics) -> Result<Self> {
        let r_max = numerics.r_max_for(model);
        let kinks: Vec<f64> = match model.v.family {
            PotentialFamily::SquareWell => vec![model.v.range],
            PotentialFamily::Tabulated => model
                .v
                .table
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|p| p[0])
                .collect(),
            _ => Vec::new(),
        };
        Ok(Discretization {
            rgrid: Arc::new(Grid::radial(r_max, numerics.n_r, &kinks)),
            mu: model.mu,
            p_max: numerics.p_max_for(model),
            n_p: numerics.n_p,
            guard_epsilon: numerics.guard_epsilon_for(model),
        })
    }

    /// Same discretization with `n_p` replaced.
    pub fn with_momentum_points(&self, n_p: usize) -> Self {
        Discretization {
            n_p,
            ..self.clone()
        }
    }

    pub fn momentum_grid(&self, temp: InverseTemperature) -> Result<Arc<Grid>> {
        Grid::for_temperature(temp, self.mu, self.p_max, self.n_p, self.guard_epsilon).map(Arc::new)
    }
}

/// Symmetric matrix `S V^1/2 K V^1/2 S` with `S = diag(r_i sqrt(4 pi w_i))`,
/// whose spectrum approximates the operator's.
#[derive(Debug, Clone)]
pub struct BsOperator {
    pub temp: InverseTemperature,
    pub matrix: DMatrix<f64>,
    pub rgrid: Arc<Grid>,
    pub pgrid: Arc<Grid>,
    /// `r_i sqrt(4 pi w_i)`.
    pub weights: Vec<f64>,
    /// `V(r_i)^1/2`.
    pub sqrt_v: Vec<f64>,
}

pub fn assemble(
    model: &PhysicalModel,
    temp: InverseTemperature,
    disc: &Discretization,
) -> Result<BsOperator> {
    let rgrid = Arc::clone(&disc.rgrid);
    let pgrid = disc.momentum_grid(temp)?;
    let k = assemble_chi_kernel(temp, model.mu, &rgrid, &pgrid)?;
    let weights: Vec<f64> = rgrid
        .nodes
        .iter()
        .zip(&rgrid.weights)
        .map(|(r, w)| r * (4.0 * PI * w).sqrt())
        .collect();
    let sqrt_v = rgrid
        .nodes
        .iter()
        .map(|&r| eval_v(model, r).map(f64::sqrt))
        .collect::<Result<Vec<f64>>>()?;
    let a: Vec<f64> = weights.iter().zip(&sqrt_v).map(|(s, v)| s * v).collect();
    let n = a.len();
    let mut matrix = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let m = a[i] * (k[(i, j)] / (4.0 * PI)) * a[j];
            matrix[(i, j)] = m;
            matrix[(j, i)] = m;
        }
    }
    Ok(BsOperator {
        temp,
        matrix,
        rgrid,
        pgrid,
        weights,
        sqrt_v,
    })
}

/// Leading part of the spectrum, eigenvalues in decreasing order.
#[derive(Debug, Clone)]
pub struct SpectralTop {
    pub eigenvalues: Vec<f64>,
    /// Top eigenvector de-weighted to a function normalized in `L^2(R^3)`,
    /// signed so that `\int phi >= 0`.
    pub top_vector: RadialFunction,
    /// Largest deviation when the de-weighted vector is weighted again.
    pub deweight_residual: f64,
}

impl SpectralTop {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues
            .get(1)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn gap(&self) -> f64 {
        self.lambda1() - self.lambda2()
    }
}

pub fn top_eigenvalues(op: &BsOperator, m: usize) -> Result<SpectralTop> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "need at least two eigenvalues".into(),
        ));
    }
    let eig = SymmetricEigen::new(op.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().take(m).map(|&i| eig.eigenvalues[i]).collect();
    let u = eig.eigenvectors.column(order[0]);
    let mut phi: Vec<f64> = u.iter().zip(&op.weights).map(|(u, s)| u / s).collect();
    let mean: f64 = op
        .rgrid
        .nodes
        .iter()
        .zip(&op.rgrid.weights)
        .zip(&phi)
        .map(|((r, w), f)| w * r * r * f)
        .sum();
    let sign = if mean < 0.0 { -1.0 } else { 1.0 };
    for f in phi.iter_mut() {
        *f *= sign;
    }
    let deweight_residual = phi
        .iter()
        .zip(&op.weights)
        .zip(u.iter())
        .map(|((f, s), u)| (f * s - sign * u).abs())
        .fold(0.0, f64::max);
    Ok(SpectralTop {
        eigenvalues,
        top_vector: RadialFunction::new(Arc::clone(&op.rgrid), phi)?,
        deweight_residual,
    })
}

fn largest_eigenvalue(op: &BsOperator) -> f64 {
    op.matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Top eigenvalue of the operator at inverse temperature `beta`.
pub fn lambda_of_beta(model: &PhysicalModel, beta: Beta, disc: &Discretization) -> Result<f64> {
    let op = assemble(model, InverseTemperature::Finite(beta), disc)?;
    Ok(largest_eigenvalue(&op))
}

/// Top eigenvalue at zero temperature on the guarded grid, with its change
/// when the momentum grid is doubled. For `mu > 0` the exact value is
/// infinite, so the change measures how strongly the grid cutoff enters.
pub fn sup_spec_zero_temperature(
    model: &PhysicalModel,
    disc: &Discretization,
) -> Result<(f64, f64)> {
    let coarse = largest_eigenvalue(&assemble(model, InverseTemperature::Infinite, disc)?);
    let fine_disc = disc.with_momentum_points(2 * disc.n_p);
    let fine = largest_eigenvalue(&assemble(model, InverseTemperature::Infinite, &fine_disc)?);
    Ok((fine, (fine - coarse).abs()))
}

/// `lambda(beta)` evaluator with a cache keyed by `beta`.
pub struct BsSolver {
    pub model: PhysicalModel,
    pub disc: Discretization,
    cache: Mutex<HashMap<u64, f64>>,
}

impl BsSolver {
    pub fn new(model: &PhysicalModel, numerics: &Numerics) -> Result<Self> {
        Ok(BsSolver {
            model: model.clone(),
            disc: Discretization::new(model, numerics)?,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn lambda(&self, beta: f64) -> Result<f64> {
        let key = beta.to_bits();
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = lambda_of_beta(&self.model, Beta::new(beta)?, &self.disc)?;
        self.cache.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    pub fn operator(&self, beta: f64) -> Result<BsOperator> {
        assemble(
            &self.model,
            InverseTemperature::Finite(Beta::new(beta)?),
            &self.disc,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTemperature {
    pub beta_c: f64,
    pub t_c: f64,
    /// Final bracket `[beta_lo, beta_hi]` with `lambda(beta_lo) < 1 < lambda(beta_hi)`.
    pub bracket: [f64; 2],
    pub lambda_bracket: [f64; 2],
    pub tolerance: f64,
    pub iterations: usize,
}

/// Bisection in `log beta` for `lambda(beta_c) = 1`. The hint bracket is
/// widened by factors of four, up to [`BETA_MAX`], until it contains the
/// crossing.
pub fn solve_beta_c(solver: &BsSolver, hint: [f64; 2], tol: f64) -> Result<CriticalTemperature> {
    let [mut lo, mut hi] = hint;
    let mut l_lo = solver.lambda(lo)?;
    while l_lo >= 1.0 {
        if lo / 4.0 < BETA_MIN {
            return Err(Error::AssumptionViolation(format!(
                "lambda({lo:e}) = {l_lo} >= 1 at the smallest admissible beta"
            )));
        }
        hi = lo;
        lo /= 4.0;
        l_lo = solver.lambda(lo)?;
    }
    let mut l_hi = solver.lambda(hi)?;
    while l_hi <= 1.0 {
        if hi >= BETA_MAX {
            return Err(Error::NoBracket {
                beta_max: hi,
                lambda: l_hi,
            });
        }
        let next = (hi * 4.0).min(BETA_MAX);
        let l_next = solver.lambda(next)?;
        if l_next < l_hi - monotone_slack(l_hi) {
            return Err(Error::NonMonotone {
                beta_lo: hi,
                lambda_lo: l_hi,
                beta_hi: next,
                lambda_hi: l_next,
            });
        }
        lo = hi;
        l_lo = l_hi;
        hi = next;
        l_hi = l_next;
    }
    debug!("bracket [{lo}, {hi}] lambda [{l_lo}, {l_hi}]");
    let mut iterations = 0;
    while hi - lo > tol * lo {
        let mid = (lo * hi).sqrt();
        let l_mid = solver.lambda(mid)?;
        if l_mid < l_lo - monotone_slack(l_lo) || l_mid > l_hi + monotone_slack(l_hi) {
            let (b, l) = if l_mid < l_lo { (lo, l_lo) } else { (hi, l_hi) };
            return Err(Error::NonMonotone {
                beta_lo: b.min(mid),
                lambda_lo: if b < mid { l } else { l_mid },
                beta_hi: b.max(mid),
                lambda_hi: if b < mid { l_mid } else { l },
            });
        }
        if l_mid > 1.0 {
            hi = mid;
            l_hi = l_mid;
        } else {
            lo = mid;
            l_lo = l_mid;
        }
        iterations += 1;
    }
    let beta_c = 0.5 * (lo + hi);
    Ok(CriticalTemperature {
        beta_c,
        t_c: 1.0 / beta_c,
        bracket: [lo, hi],
        lambda_bracket: [l_lo, l_hi],
        tolerance: tol,
        iterations,
    })
}

fn monotone_slack(l: f64) -> f64 {
    1e-12 * l.abs().max(1.0)
}

/// Eigenvector of the operator at `beta_c` and its image under `V^1/2`.
#[derive(Debug, Clone)]
pub struct PairState {
    pub phi: RadialFunction,
    pub v_half_phi: RadialFunction,
}

/// Top eigenpair at `beta_c`; fails if the top eigenvalue is not separated
/// from the next one by `gap_tol`.
pub fn extract_pair_state(
    solver: &BsSolver,
    tc: &CriticalTemperature,
    gap_tol: f64,
) -> Result<(PairState, SpectralTop, BsOperator)> {
    let op = solver.operator(tc.beta_c)?;
    let top = top_eigenvalues(&op, 3)?;
    if top.gap() < gap_tol {
        return Err(Error::AssumptionViolation(format!(
            "top eigenvalue not simple at beta_c: lambda1 - lambda2 = {:e}",
            top.gap()
        )));
    }
    let phi = top.top_vector.clone();
    let v_half_phi = RadialFunction::new(
        Arc::clone(&phi.grid),
        phi.values
            .iter()
            .zip(&op.sqrt_v)
            .map(|(f, v)| f * v)
            .collect(),
    )?;
    Ok((PairState { phi, v_half_phi }, top, op))
}

/// `max |V^1/2 chi V^1/2 phi - phi| / max |phi|`, with the operator applied
/// through momentum space rather than the assembled kernel.
pub fn round_trip_residual(op: &BsOperator, pair: &PairState, mu: f64) -> f64 {
    let mut hat = ft3_radial(&pair.v_half_phi, &op.pgrid);
    for (h, p) in hat.values.iter_mut().zip(&op.pgrid.nodes) {
        *h *= op.temp.chi(p * p - mu);
    }
    let back = ft3_radial(&hat, &op.rgrid);
    let phi = &pair.phi.values;
    let scale = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    back.values
        .iter()
        .zip(&op.sqrt_v)
        .zip(phi)
        .map(|((b, v), f)| (b * v - f).abs())
        .fold(0.0, f64::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Config, InteractionPotential};

    fn small_config(amplitude: f64) -> Config {
        let mut cfg = Config::example();
        cfg.model.v.amplitude = amplitude;
        cfg.numerics.n_r = 96;
        cfg.numerics.n_p = 160;
        cfg
    }

    #[test]
    fn operator_is_symmetric_and_positive() {
        let cfg = small_config(3.0);
        let disc = Discretization::new(&cfg.model, &cfg.numerics).unwrap();
        let op = assemble(
            &cfg.model,
            InverseTemperature::Finite(Beta::new(2.0).unwrap()),
            &disc,
        )
        .unwrap();
        assert_eq!(op.matrix, op.matrix.transpose());
        let eig = op.matrix.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn zero_potential_has_no_bracket() {
        let cfg = small_config(0.0);
        let solver = BsSolver::new(&cfg.model, &cfg.numerics).unwrap();
        assert_eq!(solver.lambda(10.0).unwrap(), 0.0);
        let err = solve_beta_c(&solver, [0.1, 100.0], 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }), "{err}");
    }

    #[test]
    fn lambda_scales_with_amplitude() {
        let cfg = small_config(3.0);
        let disc = Discretization::new(&cfg.model, &cfg.numerics).unwrap();
        let beta = Beta::new(3.0).unwrap();
        let base = lambda_of_beta(&cfg.model, beta, &disc).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled =
                lambda_of_beta(&cfg.model.with_scaled_interaction(c), beta, &disc).unwrap();
            assert!((scaled - c * base).abs() <= 1e-12 * c * base, "c = {c}");
        }
    }

    #[test]
    fn beta_c_is_bracketed_and_pair_state_is_normalized() {
        let cfg = small_config(3.0);
        let solver = BsSolver::new(&cfg.model, &cfg.numerics).unwrap();
        let tc = solve_beta_c(&solver, [0.1, 100.0], 1e-10).unwrap();
        assert!(tc.lambda_bracket[0] < 1.0 && tc.lambda_bracket[1] > 1.0);
        assert!((tc.beta_c - 3.2583937).abs() < 1e-4, "{}", tc.beta_c);
        let (pair, top, op) = extract_pair_state(&solver, &tc, 1e-6).unwrap();
        assert!((top.lambda1() - 1.0).abs() < 1e-8);
        assert!((pair.phi.norm() - 1.0).abs() < 1e-12);
        assert!(top.deweight_residual < 1e-14);
        let res = round_trip_residual(&op, &pair, cfg.model.mu);
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn hint_outside_crossing_is_widened() {
        let cfg = small_config(3.0);
        let solver = BsSolver::new(&cfg.model, &cfg.numerics).unwrap();
        let a = solve_beta_c(&solver, [0.1, 100.0], 1e-10).unwrap();
        let b = solve_beta_c(&solver, [10.0, 20.0], 1e-10).unwrap();
        let c = solve_beta_c(&solver, [0.01, 0.02], 1e-10).unwrap();
        assert!((a.beta_c - b.beta_c).abs() < 1e-9 * a.beta_c);
        assert!((a.beta_c - c.beta_c).abs() < 1e-9 * a.beta_c);
    }

    #[test]
    fn square_well_potential_is_supported() {
        let mut cfg = small_config(3.0);
        cfg.model.v = InteractionPotential {
            family: PotentialFamily::SquareWell,
            amplitude: 2.0,
            range: 1.0,
            table: None,
        };
        let solver = BsSolver::new(&cfg.model, &cfg.numerics).unwrap();
        assert!(solver.lambda(5.0).unwrap() > 0.0);
    }
}
