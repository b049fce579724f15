//! Scalar thermal kernels.
//!
//! Closed-form evaluation of the auxiliary functions `g0`, `g1`, `g2`, the
//! one- and two-energy kernels `chi_beta`, `chi_inf`, `xi`, the pair kernel
//! `L(p, q)` and its centre-of-mass Laplacian, plus truncated Matsubara sums
//! that converge to the same closed forms.
//!
//! Every function here is total on finite inputs. Removable singularities are
//! handled by Taylor branches and exponential overflow by rewriting in terms
//! of `exp(-|x|)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Inverse temperature `beta = 1/T`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Beta(f64);

impl Beta {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Beta(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "inverse temperature must be positive and finite, got {value}"
            )))
        }
    }

    pub fn from_temperature(t: f64) -> Result<Self> {
        Beta::new(1.0 / t)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn temperature(self) -> f64 {
        1.0 / self.0
    }
}

impl TryFrom<f64> for Beta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Beta::new(v)
    }
}

impl From<Beta> for f64 {
    fn from(b: Beta) -> f64 {
        b.0
    }
}

/// Either a finite inverse temperature or the zero-temperature limit, where
/// `chi_beta` is replaced by `chi_inf(E) = 1/|E|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(Beta),
    Infinite,
}

impl InverseTemperature {
    /// The one-energy kernel for this temperature.
    #[inline]
    pub fn chi(self, e: f64) -> f64 {
        match self {
            InverseTemperature::Finite(b) => chi(b, e),
            InverseTemperature::Infinite => chi_inf(e),
        }
    }
}

/// Symmetric Matsubara truncation: the sum runs over `n = -n_max .. n_max-1`,
/// pairing `n` with `-(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatsubaraTruncation(usize);

impl MatsubaraTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        Ok(MatsubaraTruncation(n_max))
    }

    #[inline]
    pub fn n_max(self) -> usize {
        self.0
    }
}

// Taylor coefficients of tanh(z/2)/z in powers of z^2.
const G0_SERIES: [f64; 7] = [
    1.0 / 2.0,
    -1.0 / 24.0,
    1.0 / 240.0,
    -17.0 / 40320.0,
    31.0 / 725760.0,
    -691.0 / 159667200.0,
    5461.0 / 12454041600.0,
];

// Taylor coefficients of g1(z)/z in powers of z^2 (g1 = -g0').
const G1_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 60.0,
    17.0 / 6720.0,
    -31.0 / 90720.0,
    691.0 / 15966720.0,
    -5461.0 / 1037836800.0,
    929569.0 / 1494484992000.0,
];

const SERIES_DENOMINATOR: f64 = 1e-4;

fn even_series(coeffs: &[f64], z2: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z2 + c)
}

/// `sech^2(x)` without overflow.
#[inline]
pub fn sech2(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `g0(z) = tanh(z/2)/z`, with `g0(0) = 1/2`.
pub fn g0(z: f64) -> f64 {
    if z.abs() < SERIES_DENOMINATOR {
        even_series(&G0_SERIES, z * z)
    } else {
        (0.5 * z).tanh() / z
    }
}

/// `g1(z) = (sinh z - z) / (2 z^2 cosh^2(z/2))`.
///
/// Evaluated as `(tanh(z/2) - (z/2) sech^2(z/2)) / z^2`, the same expression
/// after `sinh z = 2 sinh(z/2) cosh(z/2)`, which never overflows.
pub fn g1(z: f64) -> f64 {
    let z2 = z * z;
    if z2 < SERIES_DENOMINATOR {
        z * even_series(&G1_SERIES, z2)
    } else {
        let h = 0.5 * z;
        (h.tanh() - h * sech2(h)) / z2
    }
}

/// `g2(z) = tanh(z/2) / (2 z cosh^2(z/2))`, with `g2(0) = 1/4`.
pub fn g2(z: f64) -> f64 {
    0.5 * g0(z) * sech2(0.5 * z)
}

/// `g1` from its exponential form `(e^{2z} - 2 z e^z - 1) / (z^2 (e^z + 1)^2)`.
///
/// Independent of [`g1`]: near zero the numerator is summed from its own
/// power series `sum_{k>=3} (2^k - 2k) z^k / k!`.
pub fn g1_exponential_form(z: f64) -> f64 {
    if z.abs() < 0.25 {
        // numerator / z^3
        let mut sum = 0.0;
        let mut fact = 6.0; // 3!
        let mut zk = 1.0;
        for k in 3..=22 {
            if k > 3 {
                fact *= k as f64;
                zk *= z;
            }
            sum += ((2.0f64).powi(k) - 2.0 * k as f64) / fact * zk;
        }
        let d = z.exp() + 1.0;
        return z * sum / (d * d);
    }
    if z > 0.0 {
        // divide through by e^{2z}
        let e = (-z).exp();
        let num = 1.0 - 2.0 * z * e - e * e;
        let d = 1.0 + e;
        num / (z * z * d * d)
    } else {
        let e = z.exp();
        let num = (2.0 * z).exp_m1() - 2.0 * z * e;
        let d = e + 1.0;
        num / (z * z * d * d)
    }
}

/// `g2` from its exponential form `2 e^z (e^z - 1) / (z (e^z + 1)^3)`.
pub fn g2_exponential_form(z: f64) -> f64 {
    let expm1_over_z = |x: f64| {
        if x.abs() < 1e-5 {
            1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
        } else {
            x.exp_m1() / x
        }
    };
    if z > 0.0 {
        let e = (-z).exp();
        let d = 1.0 + e;
        // 2 e^{-z} (1 - e^{-z}) / (z (1 + e^{-z})^3)
        2.0 * e * expm1_over_z(-z) / (d * d * d)
    } else {
        let e = z.exp();
        let d = 1.0 + e;
        2.0 * e * expm1_over_z(z) / (d * d * d)
    }
}

/// `chi_beta(E) = tanh(beta E / 2) / E`, equal to `beta * g0(beta E)`.
#[inline]
pub fn chi(beta: Beta, e: f64) -> f64 {
    let b = beta.value();
    b * g0(b * e)
}

/// `chi_inf(E) = 1/|E|`; `+inf` at `E = 0`.
#[inline]
pub fn chi_inf(e: f64) -> f64 {
    if e == 0.0 {
        f64::INFINITY
    } else {
        1.0 / e.abs()
    }
}

/// `Xi_beta(E, E') = (tanh(beta E/2) + tanh(beta E'/2)) / (E + E')`, continued
/// to `(beta/2) sech^2(beta E/2)` on the anti-diagonal.
pub fn xi(beta: Beta, e: f64, ep: f64) -> f64 {
    let b = beta.value();
    let a = 0.5 * b * e;
    let c = 0.5 * b * ep;
    let s = a + c;
    if s.abs() < 1.0 {
        // tanh a + tanh c = sinh(a + c) / (cosh a cosh c)
        let shc = if s == 0.0 { 1.0 } else { s.sinh() / s };
        let (ea, ec) = ((-2.0 * a.abs()).exp(), (-2.0 * c.abs()).exp());
        let sech_sech = 4.0 * (-(a.abs() + c.abs())).exp() / ((1.0 + ea) * (1.0 + ec));
        0.5 * b * shc * sech_sech
    } else {
        (a.tanh() + c.tanh()) / (e + ep)
    }
}

/// `L(p, q) = Xi_beta(p^2 - mu, q^2 - mu)`.
#[inline]
pub fn l_pq(beta: Beta, mu: f64, p: f64, q: f64) -> f64 {
    xi(beta, p * p - mu, q * q - mu)
}

/// Laplacian in the relative momentum `l` of `L(k + l/2, k - l/2)` at `l = 0`:
/// `-(3 beta^2 / 2) (g1(z) + (2/3) beta k^2 g2(z))` with `z = beta (k^2 - mu)`.
pub fn hessian_l_closed(beta: Beta, mu: f64, k: f64) -> f64 {
    let b = beta.value();
    let z = b * (k * k - mu);
    -1.5 * b * b * (g1(z) + 2.0 / 3.0 * b * k * k * g2(z))
}

/// Partial-fraction sum `sum_n 1/(z - i (n + 1/2) pi)` over the symmetric
/// truncation, pairing `n` with `-(n+1)`.
pub fn matsubara_tanh(z: Complex64, trunc: MatsubaraTruncation) -> Result<Complex64> {
    // nearest pole i (m + 1/2) pi
    let m = (z.im.abs() / PI - 0.5).round().max(0.0);
    let pole = Complex64::new(0.0, z.im.signum() * (m + 0.5) * PI);
    let distance = (z - pole).norm();
    if distance < 1e-10 * z.norm().max(1.0) {
        return Err(Error::PoleProximity {
            re: z.re,
            im: z.im,
            distance,
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for n in (0..trunc.n_max()).rev() {
        let a = Complex64::new(0.0, (n as f64 + 0.5) * PI);
        sum += (z - a).inv() + (z + a).inv();
    }
    Ok(sum)
}

/// Real-argument version of [`matsubara_tanh`]; the paired terms reduce to
/// `2x / (x^2 + a_n^2)` and no pole can be hit.
pub fn matsubara_tanh_real(x: f64, trunc: MatsubaraTruncation) -> f64 {
    (0..trunc.n_max())
        .rev()
        .map(|n| {
            let a = (n as f64 + 0.5) * PI;
            2.0 * x / (x * x + a * a)
        })
        .sum()
}

#[inline]
fn matsubara_frequency(beta: Beta, n: usize) -> f64 {
    PI * (2 * n + 1) as f64 / beta.value()
}

/// `-(2/beta) sum_n ((i w_n - E)(i w_n + E'))^{-1}` over the symmetric
/// truncation; converges to [`xi`].
pub fn matsubara_xi(beta: Beta, e: f64, ep: f64, trunc: MatsubaraTruncation) -> f64 {
    let ee = e * ep;
    let d = ep - e;
    let sum: f64 = (0..trunc.n_max())
        .rev()
        .map(|n| {
            let w = matsubara_frequency(beta, n);
            let w2 = w * w;
            let re = -(w2 + ee);
            // terms n and -(n+1) are complex conjugates
            2.0 * re / (re * re + w2 * d * d)
        })
        .sum();
    -2.0 / beta.value() * sum
}

/// Matsubara sum for the response of the pair kernel to a common energy
/// shift of both particles, `(2/beta) sum_n [-(i w - E)^{-2}(i w + E)^{-1} +
/// (i w - E)^{-1}(i w + E)^{-2}] = (2/beta) sum_n -2E / (w_n^2 + E^2)^2`.
///
/// The limit is `d chi_beta / dE = -beta^2 g1(beta E)`.
pub fn matsubara_chi_derivative(beta: Beta, e: f64, trunc: MatsubaraTruncation) -> f64 {
    let sum: f64 = (0..trunc.n_max())
        .rev()
        .map(|n| {
            let w = matsubara_frequency(beta, n);
            let q = w * w + e * e;
            2.0 * (-2.0 * e) / (q * q)
        })
        .sum();
    2.0 / beta.value() * sum
}

/// Sum of three axis second differences of L(k + l/2, k - l/2) in the
/// 3-vector l, with k = (k, 0, 0).
fn fd_laplacian(beta: Beta, mu: f64, k: f64, h: f64) -> f64 {
    let l_at = |l: [f64; 3]| {
        let p = [k + l[0] / 2.0, l[1] / 2.0, l[2] / 2.0];
        let q = [k - l[0] / 2.0, -l[1] / 2.0, -l[2] / 2.0];
        let pn = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        l_pq(beta, mu, pn, qn)
    };
    let c = l_at([0.0; 3]);
    (0..3)
        .map(|ax| {
            let mut e = [0.0; 3];
            e[ax] = h;
            let mut m = [0.0; 3];
            m[ax] = -h;
            (l_at(e) - 2.0 * c + l_at(m)) / (h * h)
        })
        .sum()
}

/// Laplacian of `L` in the relative momentum at `l = 0`: Richardson
/// combination of the `h` and `h/2` second differences, error `O(h^4)`.
pub fn laplacian_l_finite_difference(beta: Beta, mu: f64, k: f64, h: f64) -> f64 {
    (4.0 * fd_laplacian(beta, mu, k, 0.5 * h) - fd_laplacian(beta, mu, k, h)) / 3.0
}
