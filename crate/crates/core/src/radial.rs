//! Quadrature grids and s-wave (radial) Fourier transforms in three dimensions.
//!
//! Radial functions are sampled at the nodes of a composite Gauss-Legendre
//! grid. The same [`Grid`] type serves position space and momentum space.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::InverseTemperature;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Quadrature nodes and weights on a half line (`r` or `p`).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Smallest `|p^2 - mu|` over the nodes, recorded for momentum grids built
    /// away from the Fermi surface.
    pub fermi_gap: Option<f64>,
}

pub type RadialGrid = Grid;
pub type MomentumGrid = Grid;

impl Grid {
    /// Composite rule with `per_panel` Gauss-Legendre nodes on each interval
    /// between consecutive `breaks`.
    pub fn composite(breaks: &[f64], per_panel: usize) -> Self {
        let (x, w) = gauss_legendre(per_panel);
        let mut nodes = Vec::with_capacity(per_panel * breaks.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Grid {
            nodes,
            weights,
            fermi_gap: None,
        }
    }

    /// Position grid on `[0, r_max]`: 24 equal panels, with an extra break at
    /// each point in `kinks` so that piecewise-smooth potentials integrate
    /// to full order.
    pub fn radial(r_max: f64, n_r: usize, kinks: &[f64]) -> Self {
        const PANELS: usize = 24;
        let mut breaks: Vec<f64> = (0..=PANELS)
            .map(|i| r_max * i as f64 / PANELS as f64)
            .collect();
        for &k in kinks {
            if k > 0.0 && k < r_max && breaks.iter().all(|b| (b - k).abs() > 1e-12 * r_max) {
                breaks.push(k);
            }
        }
        breaks.sort_by(f64::total_cmp);
        Grid::composite(&breaks, n_r.div_ceil(PANELS).max(2))
    }

    /// Momentum grid on `[0, p_max]` graded toward the Fermi surface
    /// `p = sqrt(mu)` on the energy scale `scale`.
    fn fermi_graded(mu: f64, p_max: f64, scale: f64) -> Vec<f64> {
        const MAX_WIDTH: f64 = 0.5;
        let mut breaks = vec![0.0, p_max];
        if mu > 0.0 && mu.sqrt() < p_max {
            breaks.push(mu.sqrt());
            let mut e = 0.5 * scale;
            while e < mu {
                breaks.push((mu - e).sqrt());
                e *= 2.0;
            }
            let mut e = 0.5 * scale;
            while (mu + e).sqrt() < p_max {
                breaks.push((mu + e).sqrt());
                e *= 2.0;
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * p_max);
        let mut out = vec![0.0];
        for pair in breaks.windows(2) {
            let pieces = ((pair[1] - pair[0]) / MAX_WIDTH).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                out.push(pair[0] + (pair[1] - pair[0]) * k as f64 / pieces as f64);
            }
        }
        out
    }

    /// Momentum grid for inverse temperature `beta` (temperature `T`).
    pub fn thermal(mu: f64, p_max: f64, n_p: usize, temperature: f64) -> Self {
        let breaks = Grid::fermi_graded(mu, p_max, temperature);
        let per = n_p.div_ceil(breaks.len() - 1).max(4);
        Grid::composite(&breaks, per)
    }

    /// Momentum grid for zero temperature whose nodes keep `|p^2 - mu| >= epsilon`.
    pub fn guarded(mu: f64, p_max: f64, n_p: usize, epsilon: f64) -> Result<Self> {
        let scale = 1e-2 * mu.abs().max(1.0);
        let breaks = Grid::fermi_graded(mu, p_max, scale);
        let per = n_p.div_ceil(breaks.len() - 1).max(4);
        let mut g = Grid::composite(&breaks, per);
        let gap = g
            .nodes
            .iter()
            .map(|p| (p * p - mu).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < epsilon {
            return Err(Error::GuardViolation {
                min_gap: gap,
                epsilon,
            });
        }
        g.fermi_gap = Some(gap);
        Ok(g)
    }

    pub fn for_temperature(
        temp: InverseTemperature,
        mu: f64,
        p_max: f64,
        n_p: usize,
        epsilon: f64,
    ) -> Result<Self> {
        match temp {
            InverseTemperature::Finite(b) => Ok(Grid::thermal(mu, p_max, n_p, b.temperature())),
            InverseTemperature::Infinite => Grid::guarded(mu, p_max, n_p, epsilon),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `4 pi \int f(r) r^2 dr` for samples `f` on this grid.
    pub fn integrate_3d(&self, f: impl Fn(usize, f64) -> f64) -> f64 {
        4.0 * PI
            * self
                .nodes
                .iter()
                .zip(&self.weights)
                .enumerate()
                .map(|(i, (r, w))| w * r * r * f(i, *r))
                .sum::<f64>()
    }
}

/// Radially symmetric function sampled on a grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(RadialFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        RadialFunction { grid, values }
    }

    fn same_grid(&self, other: &RadialFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes
    }

    pub fn norm(&self) -> f64 {
        self.grid
            .integrate_3d(|i, _| self.values[i] * self.values[i])
            .sqrt()
    }
}

/// Spherical Bessel function `j0(x) = sin(x)/x`.
pub fn j0(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-4 {
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// `1 - j0(x)` without cancellation for small `x`.
pub fn one_minus_j0(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-2 {
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        1.0 - x.sin() / x
    }
}

/// Three-dimensional unitary Fourier transform of a radial function,
/// `f^(p) = sqrt(2/pi) \int f(r) j0(p r) r^2 dr`, evaluated on `out`.
///
/// The transform is its own inverse, so the same routine maps momentum
/// samples back to position space.
pub fn ft3_radial(f: &RadialFunction, out: &Arc<Grid>) -> RadialFunction {
    let g = &f.grid;
    let c = (2.0 / PI).sqrt();
    let values = out
        .nodes
        .par_iter()
        .map(|&p| {
            c * g
                .nodes
                .iter()
                .zip(&g.weights)
                .zip(&f.values)
                .map(|((r, w), fv)| w * r * r * fv * j0(p * r))
                .sum::<f64>()
        })
        .collect();
    RadialFunction {
        grid: Arc::clone(out),
        values,
    }
}

/// `<f, g> = 4 pi \int f g r^2 dr`.
pub fn radial_inner(f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid.integrate_3d(|i, _| f.values[i] * g.values[i]))
}

fn check_guard(temp: InverseTemperature, mu: f64, pgrid: &Grid) -> Result<()> {
    if temp != InverseTemperature::Infinite {
        return Ok(());
    }
    let epsilon = pgrid.fermi_gap.ok_or(Error::GuardViolation {
        min_gap: 0.0,
        epsilon: f64::MIN_POSITIVE,
    })?;
    let gap = pgrid
        .nodes
        .iter()
        .map(|p| (p * p - mu).abs())
        .fold(f64::INFINITY, f64::min);
    if gap < epsilon || gap == 0.0 {
        return Err(Error::GuardViolation {
            min_gap: gap,
            epsilon,
        });
    }
    Ok(())
}

/// Radial kernel of `chi(p^2 - mu)` acting on s-wave functions:
/// `k(r, r') = (2/pi) \int chi(p^2 - mu) j0(p r) j0(p r') p^2 dp`.
pub fn assemble_chi_kernel(
    temp: InverseTemperature,
    mu: f64,
    rgrid: &Grid,
    pgrid: &Grid,
) -> Result<DMatrix<f64>> {
    check_guard(temp, mu, pgrid)?;
    Ok(assemble_kernel(rgrid, pgrid, |p| temp.chi(p * p - mu)))
}

/// Radial kernel of the Fourier multiplier `m(|p|)`. Only the upper triangle
/// is accumulated; the lower one is a mirror, so the result is exactly
/// symmetric.
pub fn assemble_kernel(
    rgrid: &Grid,
    pgrid: &Grid,
    multiplier: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = rgrid.len();
    let weight: Vec<f64> = pgrid
        .nodes
        .iter()
        .zip(&pgrid.weights)
        .map(|(&p, w)| 2.0 / PI * w * p * p * multiplier(p))
        .collect();
    let bessel: Vec<Vec<f64>> = rgrid
        .nodes
        .par_iter()
        .map(|&r| pgrid.nodes.iter().map(|&p| j0(p * r)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a: Vec<f64> = bessel[i].iter().zip(&weight).map(|(b, c)| b * c).collect();
            (i..n)
                .map(|j| a.iter().zip(&bessel[j]).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    k
}

/// `<f, K f>` in `L^2(R^3)` for a radial kernel `K` assembled on `f`'s grid.
pub fn kernel_quadratic_form(kernel: &DMatrix<f64>, f: &RadialFunction) -> f64 {
    let g = &f.grid;
    let m: Vec<f64> = g
        .nodes
        .iter()
        .zip(&g.weights)
        .zip(&f.values)
        .map(|((r, w), v)| w * r * r * v)
        .collect();
    let n = m.len();
    let mut total = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| kernel[(i, j)] * m[j]).sum();
        total += m[i] * row;
    }
    4.0 * PI * total
}
