//! Bottom of the spectrum of `p^2 + (Lambda1/Lambda0) W`, the shift constant
//! `D_c` and the predicted curve `T_c(h) = T_c (1 - D_c h^2)`.

use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::GlCoefficients;
use crate::model::{Dimensionality, ExternalField, Numerics};
use crate::radial::gauss_legendre;

const MAX_POINTS: usize = 1 << 22;
const DOMAIN_CAP: f64 = 1e4;
const LEAK_TOLERANCE: f64 = 1e-4;
const SAMPLES: usize = 401;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveProblem {
    pub coupling: f64,
    pub field: ExternalField,
    pub domain_radius: f64,
    /// Double `domain_radius` (up to a cap) when the eigenfunction reaches
    /// the wall. Off when the radius was configured explicitly.
    pub grow_domain: bool,
    pub n_points: usize,
    /// Relative refinement tolerance.
    pub tolerance: f64,
}

impl EffectiveProblem {
    pub fn new(coupling: f64, field: ExternalField, numerics: &Numerics) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling {coupling} not finite"
            )));
        }
        let domain_radius = numerics
            .w_domain_radius
            .unwrap_or_else(|| default_domain_radius(coupling, &field));
        Ok(EffectiveProblem {
            coupling,
            field,
            domain_radius,
            grow_domain: numerics.w_domain_radius.is_none(),
            n_points: numerics.w_points,
            tolerance: numerics.tolerances.schrodinger,
        })
    }
}

/// `20 L / min(1, sqrt|coupling * amplitude|)`, capped, where `L` is the
/// field's length scale.
pub fn default_domain_radius(coupling: f64, field: &ExternalField) -> f64 {
    let strength = (coupling * field.amplitude).abs().sqrt().min(1.0);
    if strength == 0.0 {
        return (20.0 * field.length_scale()).min(DOMAIN_CAP);
    }
    (20.0 * field.length_scale() / strength).min(DOMAIN_CAP)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGroundState {
    /// Estimate of the infimum of the spectrum.
    pub e0: f64,
    /// Lowest Dirichlet eigenvalue on the finest grid.
    pub lowest_discrete: f64,
    /// `coupling * W` at the domain boundary.
    pub essential_bottom: f64,
    pub bound_state: bool,
    pub refinement_delta: f64,
    pub n_points: usize,
    pub domain_radius: f64,
    /// Smallest cell average of `coupling * W`.
    pub potential_min: f64,
    /// `(x, psi(x))` samples of the normalized bound state; for radial fields
    /// `psi` is the three-dimensional wave function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenfunction: Option<Vec<[f64; 2]>>,
}

struct Discrete {
    /// Interior node coordinates.
    x: Vec<f64>,
    h: f64,
    /// Cell averages of `coupling * W`.
    potential: Vec<f64>,
}

impl Discrete {
    fn new(prob: &EffectiveProblem, n: usize) -> Self {
        let l = prob.domain_radius;
        let (start, h) = match prob.field.dimensionality {
            Dimensionality::OneD => (-l, 2.0 * l / (n + 1) as f64),
            Dimensionality::Radial3d => (0.0, l / (n + 1) as f64),
        };
        let x: Vec<f64> = (1..=n).map(|j| start + j as f64 * h).collect();
        let breaks = prob.field.breakpoints();
        let (gx, gw) = gauss_legendre(3);
        let c = prob.coupling;
        let potential = x
            .iter()
            .map(|&xj| {
                let (a, b) = (xj - 0.5 * h, xj + 0.5 * h);
                let mut cuts = vec![a];
                cuts.extend(breaks.iter().copied().filter(|&k| k > a && k < b));
                cuts.push(b);
                let mut total = 0.0;
                for piece in cuts.windows(2) {
                    let half = 0.5 * (piece[1] - piece[0]);
                    let mid = 0.5 * (piece[1] + piece[0]);
                    for (t, w) in gx.iter().zip(&gw) {
                        total += half * w * prob.field.eval(mid + half * t);
                    }
                }
                c * total / h
            })
            .collect();
        Discrete { x, h, potential }
    }

    /// Number of eigenvalues below `e` (Sturm sequence).
    fn count_below(&self, e: f64) -> usize {
        let d = 2.0 / (self.h * self.h);
        let off2 = 1.0 / self.h.powi(4);
        let tiny = f64::EPSILON * d;
        let mut count = 0;
        let mut q = 1.0;
        for (j, v) in self.potential.iter().enumerate() {
            q = d + v - e - if j == 0 { 0.0 } else { off2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lowest_eigenvalue(&self) -> f64 {
        let vmin = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = self
            .potential
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut lo, mut hi) = (vmin, vmax + 4.0 / (self.h * self.h));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue near `e` by inverse iteration, normalized
    /// to unit discrete `L^2` norm.
    fn eigenvector(&self, e: f64) -> Vec<f64> {
        let n = self.x.len();
        let d = 2.0 / (self.h * self.h);
        let off = -1.0 / (self.h * self.h);
        let shift = e - 1e-10 * e.abs().max(1.0);
        let mut v = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        for _ in 0..4 {
            let mut denom = d + self.potential[0] - shift;
            c[0] = off / denom;
            y[0] = v[0] / denom;
            for j in 1..n {
                denom = d + self.potential[j] - shift - off * c[j - 1];
                c[j] = off / denom;
                y[j] = (v[j] - off * y[j - 1]) / denom;
            }
            for j in (0..n - 1).rev() {
                y[j] -= c[j] * y[j + 1];
            }
            let norm = (y.iter().map(|a| a * a).sum::<f64>() * self.h).sqrt();
            for (vj, yj) in v.iter_mut().zip(&y) {
                *vj = yj / norm;
            }
        }
        v
    }
}

/// Bottom of the essential spectrum: the smallest limit of `coupling * W`
/// at infinity.
fn essential_bottom(prob: &EffectiveProblem) -> f64 {
    let c = prob.coupling;
    let w = &prob.field;
    match w.dimensionality {
        Dimensionality::Radial3d => c * w.asymptote(1.0),
        Dimensionality::OneD => (c * w.asymptote(-1.0)).min(c * w.asymptote(1.0)),
    }
}

/// Lowest point of the spectrum by second-order finite differences with
/// Dirichlet walls, refined by doubling until two levels agree.
pub fn ground_energy(prob: &EffectiveProblem) -> Result<EffectiveGroundState> {
    let mut prob = prob.clone();
    loop {
        match ground_energy_in_box(&prob) {
            Err(Error::DomainTooSmall { .. })
                if prob.grow_domain && 2.0 * prob.domain_radius <= DOMAIN_CAP =>
            {
                prob.domain_radius *= 2.0;
                debug!(
                    "effective problem: domain radius raised to {}",
                    prob.domain_radius
                );
            }
            other => return other,
        }
    }
}

fn ground_energy_in_box(prob: &EffectiveProblem) -> Result<EffectiveGroundState> {
    if prob.n_points < 100 {
        return Err(Error::InvalidArgument(
            "n_points must be at least 100".into(),
        ));
    }
    let mut n = prob.n_points;
    let mut grid = Discrete::new(prob, n);
    let mut e = grid.lowest_eigenvalue();
    let delta = loop {
        let n2 = 2 * n + 1;
        if n2 > MAX_POINTS {
            return Err(Error::Unconverged {
                what: "effective ground energy",
                delta: f64::NAN,
            });
        }
        let fine = Discrete::new(prob, n2);
        let e2 = fine.lowest_eigenvalue();
        let delta = (e2 - e).abs();
        debug!("effective problem n = {n2}: e = {e2}, delta = {delta:e}");
        n = n2;
        grid = fine;
        e = e2;
        if delta < prob.tolerance * e.abs().max(1.0) {
            break delta;
        }
    };
    let b = essential_bottom(prob);
    let bound_state = e < b - (10.0 * delta).max(1e-12 * b.abs().max(1.0));
    let potential_min = grid.potential.iter().copied().fold(f64::INFINITY, f64::min);
    let eigenfunction = if bound_state {
        let v = grid.eigenvector(e);
        let edge = 0.9 * prob.domain_radius;
        let total: f64 = v.iter().map(|a| a * a).sum();
        let outer: f64 = grid
            .x
            .iter()
            .zip(&v)
            .filter(|(x, _)| x.abs() > edge)
            .map(|(_, a)| a * a)
            .sum();
        let leak = outer / total;
        if leak > LEAK_TOLERANCE {
            return Err(Error::DomainTooSmall {
                boundary_mass: leak,
                domain_radius: prob.domain_radius,
            });
        }
        Some(sample_eigenfunction(prob, &grid, &v))
    } else {
        None
    };
    Ok(EffectiveGroundState {
        e0: e.min(b),
        lowest_discrete: e,
        essential_bottom: b,
        bound_state,
        refinement_delta: delta,
        n_points: n,
        domain_radius: prob.domain_radius,
        potential_min,
        eigenfunction,
    })
}

fn sample_eigenfunction(prob: &EffectiveProblem, grid: &Discrete, v: &[f64]) -> Vec<[f64; 2]> {
    let n = v.len();
    let stride = (n / SAMPLES).max(1);
    let sign = if v[n / 2] < 0.0
        || (prob.field.dimensionality == Dimensionality::Radial3d && v[0] < 0.0)
    {
        -1.0
    } else {
        1.0
    };
    (0..n)
        .step_by(stride)
        .map(|j| {
            let x = grid.x[j];
            let value = match prob.field.dimensionality {
                Dimensionality::OneD => v[j],
                Dimensionality::Radial3d => v[j] / ((4.0 * PI).sqrt() * x),
            };
            [x, sign * value]
        })
        .collect()
}

/// Rayleigh quotient of the gaussian `exp(-|x|^2 / (2 s^2))` for the
/// untruncated operator.
pub fn rayleigh_quotient_gaussian(prob: &EffectiveProblem, width: f64) -> f64 {
    let (gx, gw) = gauss_legendre(16);
    let span = (12.0 * width).min(prob.domain_radius.max(12.0 * width));
    let radial = prob.field.dimensionality == Dimensionality::Radial3d;
    let lo = if radial { 0.0 } else { -span };
    let mut breaks: Vec<f64> = (0..=400)
        .map(|k| lo + (span - lo) * k as f64 / 400.0)
        .collect();
    breaks.extend(
        prob.field
            .breakpoints()
            .into_iter()
            .filter(|&k| k > lo && k < span),
    );
    breaks.sort_by(f64::total_cmp);
    let (mut num, mut den) = (0.0, 0.0);
    for piece in breaks.windows(2) {
        let half = 0.5 * (piece[1] - piece[0]);
        let mid = 0.5 * (piece[1] + piece[0]);
        for (t, w) in gx.iter().zip(&gw) {
            let x = mid + half * t;
            let measure = if radial { x * x } else { 1.0 };
            let g2 = (-x * x / (width * width)).exp() * measure * half * w;
            num += g2 * prob.coupling * prob.field.eval(x);
            den += g2;
        }
    }
    let kinetic = if radial { 1.5 } else { 0.5 } / (width * width);
    kinetic + num / den
}

/// `D_c = (Lambda0 / Lambda2) e0`.
pub fn compute_dc(gl: &GlCoefficients, gs: &EffectiveGroundState) -> f64 {
    gl.lambda0 / gl.lambda2 * gs.e0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub h: f64,
    #[serde(rename = "T_c_shifted")]
    pub t_c_shifted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcShiftReport {
    #[serde(rename = "D_c")]
    pub d_c: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub rows: Vec<ShiftRow>,
    pub warnings: Vec<String>,
    /// Some shifted temperature is not positive.
    pub nonpositive: bool,
}

/// Leading-order curve `T_c (1 - D_c h^2)`, rows sorted by `h`.
pub fn tc_of_h(gl: &GlCoefficients, d_c: f64, h_values: &[f64]) -> Result<TcShiftReport> {
    if let Some(h) = h_values.iter().find(|h| !(**h >= 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "h = {h} must be non-negative"
        )));
    }
    let mut hs = h_values.to_vec();
    hs.sort_by(f64::total_cmp);
    let mut warnings = Vec::new();
    let rows: Vec<ShiftRow> = hs
        .iter()
        .map(|&h| {
            if d_c.abs() * h * h > 0.1 {
                warnings.push(format!(
                    "h = {h}: |D_c| h^2 = {:.3} exceeds 0.1, leading-order formula unreliable",
                    d_c.abs() * h * h
                ));
            }
            ShiftRow {
                h,
                t_c_shifted: gl.t_c * (1.0 - d_c * h * h),
            }
        })
        .collect();
    let nonpositive = rows.iter().any(|r| r.t_c_shifted <= 0.0);
    if nonpositive {
        warnings.push("shifted critical temperature not positive".into());
    }
    Ok(TcShiftReport {
        d_c,
        t_c: gl.t_c,
        rows,
        warnings,
        nonpositive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FieldFamily;

    fn field(
        family: FieldFamily,
        amplitude: f64,
        range: f64,
        dim: Dimensionality,
    ) -> ExternalField {
        ExternalField {
            family,
            amplitude,
            range,
            dimensionality: dim,
            table: None,
        }
    }

    fn problem(coupling: f64, w: ExternalField) -> EffectiveProblem {
        let numerics = Numerics::default();
        EffectiveProblem::new(coupling, w, &numerics).unwrap()
    }

    fn gl() -> GlCoefficients {
        GlCoefficients {
            beta_c: 2.0,
            t_c: 0.5,
            lambda0: 1.0,
            lambda1: 0.5,
            lambda2: 2.0,
            gap: 0.3,
        }
    }

    /// Ground state of `-u'' - v0 u` on `|x| < a`: the root of
    /// `k tan(k a) = sqrt(v0 - k^2)` with `k a < pi/2`.
    fn square_well_root(v0: f64, a: f64) -> f64 {
        let f = |k: f64| k * (k * a).tan() - (v0 - k * k).sqrt();
        let (mut lo, mut hi) = (0.0, v0.sqrt().min(PI / (2.0 * a)));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        k * k - v0
    }

    #[test]
    fn zero_field_has_zero_energy() {
        for dim in [Dimensionality::OneD, Dimensionality::Radial3d] {
            let gs = ground_energy(&problem(0.7, ExternalField::zero(dim))).unwrap();
            assert_eq!(gs.e0, 0.0);
            assert!(!gs.bound_state);
        }
    }

    #[test]
    fn constant_field_shifts_energy() {
        let gs = ground_energy(&problem(
            0.5,
            field(FieldFamily::Constant, -0.8, 1.0, Dimensionality::OneD),
        ))
        .unwrap();
        assert_eq!(gs.e0, 0.5 * -0.8);
        let gs = ground_energy(&problem(
            0.5,
            field(FieldFamily::Constant, 0.8, 1.0, Dimensionality::Radial3d),
        ))
        .unwrap();
        assert_eq!(gs.e0, 0.5 * 0.8);
    }

    #[test]
    fn square_well_matches_transcendental_root() {
        let (v0, a) = (1.0, 1.0);
        let prob = problem(
            1.0,
            field(FieldFamily::SquareWell1d, v0, a, Dimensionality::OneD),
        );
        let gs = ground_energy(&prob).unwrap();
        let exact = square_well_root(v0, a);
        assert!(gs.bound_state);
        assert!((gs.e0 - exact).abs() < 1e-6, "{} vs {exact}", gs.e0);
    }

    #[test]
    fn energy_bounds_hold() {
        for dim in [Dimensionality::OneD, Dimensionality::Radial3d] {
            let prob = problem(2.0, field(FieldFamily::GaussianWell, 3.0, 1.0, dim));
            let gs = ground_energy(&prob).unwrap();
            assert!(gs.e0 >= gs.potential_min);
            assert!(gs.e0 <= rayleigh_quotient_gaussian(&prob, 0.7) + 1e-6);
            assert!(gs.bound_state);
        }
    }

    #[test]
    fn radial_well_below_threshold_has_no_bound_state() {
        let prob = problem(
            1.0,
            field(
                FieldFamily::GaussianWell,
                0.5,
                1.0,
                Dimensionality::Radial3d,
            ),
        );
        let gs = ground_energy(&prob).unwrap();
        assert!(!gs.bound_state);
        assert_eq!(gs.e0, gs.essential_bottom);
    }

    #[test]
    fn small_domain_is_detected() {
        let mut prob = problem(
            1.0,
            field(FieldFamily::GaussianWell, 1.0, 1.0, Dimensionality::OneD),
        );
        prob.domain_radius = 4.0;
        prob.grow_domain = false;
        assert!(matches!(
            ground_energy(&prob),
            Err(Error::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn small_default_domain_grows() {
        let mut prob = problem(
            1.0,
            field(FieldFamily::GaussianWell, 1.0, 1.0, Dimensionality::OneD),
        );
        prob.domain_radius = 4.0;
        let gs = ground_energy(&prob).unwrap();
        assert!(gs.bound_state);
        assert!(gs.domain_radius >= 8.0);
    }

    #[test]
    fn enlarging_the_domain_does_not_raise_the_eigenvalue() {
        let w = field(FieldFamily::GaussianWell, 2.0, 1.0, Dimensionality::OneD);
        let mut prob = problem(1.0, w);
        prob.domain_radius = 8.0;
        prob.grow_domain = false;
        let small = ground_energy(&prob).unwrap();
        prob.domain_radius = 16.0;
        let large = ground_energy(&prob).unwrap();
        assert!(large.lowest_discrete <= small.lowest_discrete + 1e-6);
    }

    #[test]
    fn shift_rows_follow_h_squared() {
        let report = tc_of_h(&gl(), 0.4, &[0.04, 0.01, 0.02]).unwrap();
        let shifts: Vec<f64> = report.rows.iter().map(|r| 0.5 - r.t_c_shifted).collect();
        assert_eq!(report.rows[0].h, 0.01);
        assert!((shifts[1] / shifts[0] - 4.0).abs() < 1e-9);
        assert!((shifts[2] / shifts[0] - 16.0).abs() < 1e-9);
        let zero = tc_of_h(&gl(), 0.0, &[0.0, 0.5]).unwrap();
        assert!(zero.rows.iter().all(|r| r.t_c_shifted == 0.5));
        let raised = tc_of_h(&gl(), -1.0, &[0.1, 0.2]).unwrap();
        assert!(raised.rows.iter().all(|r| r.t_c_shifted > 0.5));
        let big = tc_of_h(&gl(), 50.0, &[0.2]).unwrap();
        assert!(big.nonpositive && !big.warnings.is_empty());
    }

    #[test]
    fn dc_of_constant_field() {
        let gs = ground_energy(&problem(
            gl().coupling(),
            field(FieldFamily::Constant, 0.3, 1.0, Dimensionality::OneD),
        ))
        .unwrap();
        let d = compute_dc(&gl(), &gs);
        assert!((d - gl().lambda1 / gl().lambda2 * 0.3).abs() < 1e-15);
    }
}
