//! Physical model: interaction `V`, external field `W`, chemical potential
//! and the field-scale ratios `h`, plus the JSON configuration that carries
//! them together with the numerical parameters.
//!
//! Energies and lengths are dimensionless with `hbar = 2m = 1`, so the kinetic
//! energy is `p^2`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{self, Discretization};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFamily {
    Gaussian,
    Exponential,
    SquareWell,
    Tabulated,
}

/// Non-negative, radial, bounded interaction `V(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionPotential {
    pub family: PotentialFamily,
    #[serde(default)]
    pub amplitude: f64,
    pub range: f64,
    /// `(r, V(r))` nodes for the tabulated family, ascending in `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFamily {
    Zero,
    Constant,
    GaussianWell,
    #[serde(rename = "square_well_1d")]
    SquareWell1d,
    TabulatedRadial,
    #[serde(rename = "tabulated_1d")]
    Tabulated1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimensionality {
    /// `W(X)` depends on `|X|` only.
    #[serde(rename = "radial_3d")]
    Radial3d,
    /// `W(X)` depends on one Cartesian coordinate only.
    OneD,
}

/// External field `W`, entering the one-body Hamiltonian as `h^2 W(h x)`.
///
/// `gaussian_well` is `-amplitude * exp(-(x/range)^2)` and `square_well_1d` is
/// `-amplitude` on `|x| < range`, so a positive amplitude is attractive.
/// Tabulated fields interpolate linearly and are held constant beyond the
/// table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalField {
    pub family: FieldFamily,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_field_range")]
    pub range: f64,
    pub dimensionality: Dimensionality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

fn default_field_range() -> f64 {
    1.0
}

impl ExternalField {
    pub fn zero(dimensionality: Dimensionality) -> Self {
        ExternalField {
            family: FieldFamily::Zero,
            amplitude: 0.0,
            range: 1.0,
            dimensionality,
            table: None,
        }
    }

    /// Value at radius `|X|` (radial) or coordinate `x` (one-dimensional).
    pub fn eval(&self, x: f64) -> f64 {
        let a = self.amplitude;
        match self.family {
            FieldFamily::Zero => 0.0,
            FieldFamily::Constant => a,
            FieldFamily::GaussianWell => {
                let s = x / self.range;
                -a * (-s * s).exp()
            }
            FieldFamily::SquareWell1d => {
                if x.abs() < self.range {
                    -a
                } else {
                    0.0
                }
            }
            FieldFamily::TabulatedRadial | FieldFamily::Tabulated1d => {
                let table = self.table.as_deref().unwrap_or(&[]);
                interpolate_clamped(table, x)
            }
        }
    }

    /// Limit of `W` as `x -> +inf` (`side > 0`) or `x -> -inf`. Tables are
    /// continued by their end values.
    pub fn asymptote(&self, side: f64) -> f64 {
        match self.family {
            FieldFamily::Zero | FieldFamily::GaussianWell | FieldFamily::SquareWell1d => 0.0,
            FieldFamily::Constant => self.amplitude,
            FieldFamily::TabulatedRadial | FieldFamily::Tabulated1d => {
                self.eval(side.signum() * f64::MAX)
            }
        }
    }

    /// Points where `W` may fail to be smooth (jumps or kinks).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            FieldFamily::SquareWell1d => vec![-self.range, self.range],
            FieldFamily::TabulatedRadial | FieldFamily::Tabulated1d => self
                .table
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|p| p[0])
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Length scale used for default domain sizes.
    pub fn length_scale(&self) -> f64 {
        match self.family {
            FieldFamily::TabulatedRadial | FieldFamily::Tabulated1d => {
                let t = self.table.as_deref().unwrap_or(&[]);
                let span = t.iter().map(|p| p[0].abs()).fold(0.0f64, f64::max);
                span.max(self.range)
            }
            _ => self.range,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::Config("W.amplitude must be finite".into()));
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::Config("W.range must be positive".into()));
        }
        match (self.family, self.dimensionality) {
            (FieldFamily::SquareWell1d, Dimensionality::Radial3d)
            | (FieldFamily::Tabulated1d, Dimensionality::Radial3d) => {
                return Err(Error::Config(format!(
                    "W family {:?} requires dimensionality one_d",
                    self.family
                )))
            }
            (FieldFamily::TabulatedRadial, Dimensionality::OneD) => {
                return Err(Error::Config(
                    "W family tabulated_radial requires dimensionality radial_3d".into(),
                ))
            }
            _ => {}
        }
        if matches!(
            self.family,
            FieldFamily::TabulatedRadial | FieldFamily::Tabulated1d
        ) {
            let t = self
                .table
                .as_deref()
                .ok_or_else(|| Error::Config("tabulated W requires a table".into()))?;
            check_table(t, "W")?;
            if self.family == FieldFamily::TabulatedRadial && t[0][0] < 0.0 {
                return Err(Error::Config("radial W table must start at r >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Immutable problem definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalModel {
    #[serde(rename = "V")]
    pub v: InteractionPotential,
    #[serde(rename = "W")]
    pub w: ExternalField,
    pub mu: f64,
    pub h_values: Vec<f64>,
}

impl PhysicalModel {
    pub fn validate(&self) -> Result<()> {
        let v = &self.v;
        if !(v.amplitude.is_finite() && v.amplitude >= 0.0) {
            return Err(Error::Config("V.amplitude must be finite and >= 0".into()));
        }
        if !(v.range.is_finite() && v.range > 0.0) {
            return Err(Error::Config("V.range must be positive".into()));
        }
        if v.family == PotentialFamily::Tabulated {
            let t = v
                .table
                .as_deref()
                .ok_or_else(|| Error::Config("tabulated V requires a table".into()))?;
            check_table(t, "V")?;
            if t[0][0] != 0.0 {
                return Err(Error::Config("V table must start at r = 0".into()));
            }
            if t.iter().any(|p| p[1] < 0.0) {
                return Err(Error::Config("V table must be non-negative".into()));
            }
        }
        self.w.validate()?;
        if !self.mu.is_finite() {
            return Err(Error::Config("mu must be finite".into()));
        }
        if let Some(h) = self.h_values.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::Config(format!("h value {h} outside (0, 1)")));
        }
        Ok(())
    }

    /// Largest radius at which `V` can be evaluated.
    pub fn v_support_limit(&self) -> f64 {
        match (&self.v.family, &self.v.table) {
            (PotentialFamily::Tabulated, Some(t)) if !t.is_empty() => t[t.len() - 1][0],
            _ => f64::INFINITY,
        }
    }

    /// Copy with the interaction amplitude multiplied by `c`.
    pub fn with_scaled_interaction(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.v.amplitude *= c;
        if let Some(t) = m.v.table.as_mut() {
            for p in t.iter_mut() {
                p[1] *= c;
            }
        }
        m
    }
}

fn check_table(t: &[[f64; 2]], name: &str) -> Result<()> {
    if t.len() < 2 {
        return Err(Error::Config(format!(
            "{name} table needs at least two nodes"
        )));
    }
    if t.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Config(format!(
            "{name} table has non-finite entries"
        )));
    }
    if t.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::Config(format!(
            "{name} table nodes must be strictly increasing"
        )));
    }
    Ok(())
}

fn interpolate(t: &[[f64; 2]], x: f64) -> f64 {
    let i = t.partition_point(|p| p[0] <= x).clamp(1, t.len() - 1);
    let ([x0, y0], [x1, y1]) = (t[i - 1], t[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn interpolate_clamped(t: &[[f64; 2]], x: f64) -> f64 {
    match t {
        [] => 0.0,
        [only] => only[1],
        _ if x <= t[0][0] => t[0][1],
        _ if x >= t[t.len() - 1][0] => t[t.len() - 1][1],
        _ => interpolate(t, x),
    }
}

/// Evaluate `V(r)` for the configured family.
pub fn eval_v(model: &PhysicalModel, r: f64) -> Result<f64> {
    let v = &model.v;
    let a = v.amplitude;
    Ok(match v.family {
        PotentialFamily::Gaussian => {
            let s = r / v.range;
            a * (-s * s).exp()
        }
        PotentialFamily::Exponential => a * (-r / v.range).exp(),
        PotentialFamily::SquareWell => {
            if r < v.range {
                a
            } else {
                0.0
            }
        }
        PotentialFamily::Tabulated => {
            let t = v.table.as_deref().unwrap_or(&[]);
            let (first, last) = match t {
                [f, .., l] => (f[0], l[0]),
                _ => return Err(Error::Config("tabulated V requires a table".into())),
            };
            if r < first || r > last {
                return Err(Error::TableRange { r, first, last });
            }
            interpolate(t, r)
        }
    })
}

/// Tolerances; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative width of the final `beta_c` bracket.
    pub beta_rel: f64,
    /// Minimum `lambda1 - lambda2` at `beta_c`.
    pub gap: f64,
    /// Relative refinement tolerance of the effective ground energy.
    pub schrodinger: f64,
    /// Minimum `|p^2 - mu|` on the zero-temperature momentum grid; defaults to
    /// `1e-6 max(1, |mu|)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_epsilon: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            beta_rel: 1e-10,
            gap: 1e-6,
            schrodinger: 1e-6,
            guard_epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Numerics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    pub n_r: usize,
    pub n_p: usize,
    pub beta_bracket: [f64; 2],
    pub tolerances: Tolerances,
    /// Truncation radius for the effective Schroedinger problem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_domain_radius: Option<f64>,
    /// Starting number of finite-difference points for the effective problem.
    pub w_points: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            r_max: None,
            p_max: None,
            n_r: 400,
            n_p: 400,
            beta_bracket: [0.1, 100.0],
            tolerances: Tolerances::default(),
            w_domain_radius: None,
            w_points: 1000,
        }
    }
}

impl Numerics {
    fn validate(&self) -> Result<()> {
        let pos = |x: Option<f64>| x.is_none_or(|v| v.is_finite() && v > 0.0);
        if !pos(self.r_max) || !pos(self.p_max) || !pos(self.w_domain_radius) {
            return Err(Error::Config(
                "r_max, p_max and w_domain_radius must be positive".into(),
            ));
        }
        if self.n_r < 8 || self.n_p < 8 {
            return Err(Error::Config("n_r and n_p must be at least 8".into()));
        }
        let [lo, hi] = self.beta_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(
                "beta_bracket must satisfy 0 < lo < hi".into(),
            ));
        }
        let t = &self.tolerances;
        if !(t.beta_rel > 0.0 && t.gap >= 0.0 && t.schrodinger > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.w_points < 100 {
            return Err(Error::Config("w_points must be at least 100".into()));
        }
        Ok(())
    }

    pub fn r_max_for(&self, model: &PhysicalModel) -> f64 {
        self.r_max
            .unwrap_or(12.0 * model.v.range)
            .min(model.v_support_limit())
    }

    pub fn p_max_for(&self, model: &PhysicalModel) -> f64 {
        self.p_max
            .unwrap_or_else(|| 8.0f64.max(6.0 * model.mu.max(1.0).sqrt()))
    }

    pub fn guard_epsilon_for(&self, model: &PhysicalModel) -> f64 {
        self.tolerances
            .guard_epsilon
            .unwrap_or(1e-6 * model.mu.abs().max(1.0))
    }
}

/// Top-level JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(flatten)]
    pub model: PhysicalModel,
    #[serde(default)]
    pub numerics: Numerics,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.numerics.validate()
    }

    /// Gaussian interaction `3 exp(-r^2)` at `mu = 1` in the radial field
    /// `-2 exp(-(r/2)^2)`.
    pub fn example() -> Self {
        Config {
            model: PhysicalModel {
                v: InteractionPotential {
                    family: PotentialFamily::Gaussian,
                    amplitude: 3.0,
                    range: 1.0,
                    table: None,
                },
                w: ExternalField {
                    family: FieldFamily::GaussianWell,
                    amplitude: 2.0,
                    range: 2.0,
                    dimensionality: Dimensionality::Radial3d,
                    table: None,
                },
                mu: 1.0,
                h_values: vec![0.01, 0.02, 0.05, 0.1],
            },
            numerics: Numerics::default(),
        }
    }
}

/// One line of the assumption report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionItem {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub measured: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub items: Vec<AssumptionItem>,
    /// Largest eigenvalue of the zero-temperature operator on the guarded grid.
    pub sup_spec_zero_temperature: f64,
    /// Change of that eigenvalue when the momentum grid is doubled.
    pub sup_spec_refinement_delta: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> Vec<&AssumptionItem> {
        self.items.iter().filter(|i| !i.passed).collect()
    }
}

const SAMPLE_POINTS: usize = 4001;

fn lipschitz_quotient(w: &ExternalField, lo: f64, hi: f64, n: usize) -> f64 {
    let dx = (hi - lo) / (n - 1) as f64;
    let mut prev = w.eval(lo);
    let mut q = 0.0f64;
    for i in 1..n {
        let cur = w.eval(lo + i as f64 * dx);
        q = q.max((cur - prev).abs() / dx);
        prev = cur;
    }
    q
}

/// Check the standing assumptions on `V` and `W` on sample grids, and the
/// zero-temperature pairing criterion `sup spec V^1/2 chi_inf V^1/2 > 1`.
pub fn validate_assumptions(
    model: &PhysicalModel,
    numerics: &Numerics,
) -> Result<ValidationReport> {
    let r_max = numerics.r_max_for(model);
    let mut v_min = f64::INFINITY;
    let mut v_max = 0.0f64;
    let mut rv_max = 0.0f64;
    let mut finite = true;
    for i in 0..SAMPLE_POINTS {
        let r = r_max * i as f64 / (SAMPLE_POINTS - 1) as f64;
        let v = eval_v(model, r)?;
        finite &= v.is_finite();
        v_min = v_min.min(v);
        v_max = v_max.max(v);
        rv_max = rv_max.max(r * v);
    }
    let mut items = vec![
        AssumptionItem {
            id: "V.nonnegative".into(),
            description: "V(r) >= 0 and bounded".into(),
            passed: finite && v_min >= 0.0,
            measured: v_min,
            detail: format!("min V = {v_min:e}, max V = {v_max:e} on [0, {r_max}]"),
        },
        AssumptionItem {
            id: "V.r_weighted_bound".into(),
            description: "|r| V(r) bounded".into(),
            passed: rv_max.is_finite(),
            measured: rv_max,
            detail: format!("max r V = {rv_max:e}"),
        },
    ];

    let span = 20.0 * model.w.length_scale();
    let lo = match model.w.dimensionality {
        Dimensionality::Radial3d => 0.0,
        Dimensionality::OneD => -span,
    };
    let w_max = (0..SAMPLE_POINTS)
        .map(|i| {
            model
                .w
                .eval(lo + (span - lo) * i as f64 / (SAMPLE_POINTS - 1) as f64)
                .abs()
        })
        .fold(0.0f64, f64::max);
    // A jump shows up as a quotient that doubles when the sampling is refined.
    let q1 = lipschitz_quotient(&model.w, lo, span, SAMPLE_POINTS);
    let q2 = lipschitz_quotient(&model.w, lo, span, 2 * SAMPLE_POINTS - 1);
    let lipschitz = q2.is_finite() && q2 <= 1.5 * q1.max(1e-300);
    items.push(AssumptionItem {
        id: "W.bounded_lipschitz".into(),
        description: "W bounded and Lipschitz continuous".into(),
        passed: w_max.is_finite() && (lipschitz || q2 == 0.0),
        measured: q2,
        detail: format!(
            "sup |W| = {w_max:e}, sampled Lipschitz quotient {q1:e} -> {q2:e} under refinement"
        ),
    });

    let disc = Discretization::new(model, numerics)?;
    let (sup_spec, delta) = birman_schwinger::sup_spec_zero_temperature(model, &disc)?;
    items.push(AssumptionItem {
        id: "pairing.zero_temperature".into(),
        description: "sup spec V^1/2 chi_inf(p^2 - mu) V^1/2 > 1".into(),
        passed: sup_spec > 1.0,
        measured: sup_spec,
        detail: format!("refinement delta {delta:e}"),
    });

    Ok(ValidationReport {
        items,
        sup_spec_zero_temperature: sup_spec,
        sup_spec_refinement_delta: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(family: PotentialFamily, amplitude: f64, range: f64) -> PhysicalModel {
        let mut m = Config::example().model;
        m.v = InteractionPotential {
            family,
            amplitude,
            range,
            table: None,
        };
        m
    }

    #[test]
    fn eval_v_families() {
        let m = model(PotentialFamily::Gaussian, 10.0, 1.0);
        assert_eq!(eval_v(&m, 0.0).unwrap(), 10.0);
        let m = model(PotentialFamily::SquareWell, 5.0, 2.0);
        assert_eq!(eval_v(&m, 3.0).unwrap(), 0.0);
        assert_eq!(eval_v(&m, 1.0).unwrap(), 5.0);
        let m = model(PotentialFamily::Exponential, 2.0, 0.5);
        assert!((eval_v(&m, 0.5).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolation_and_range() {
        let mut m = model(PotentialFamily::Tabulated, 1.0, 1.0);
        m.v.table = Some(vec![[0.0, 1.0], [1.0, 0.0]]);
        m.validate().unwrap();
        assert_eq!(eval_v(&m, 0.5).unwrap(), 0.5);
        assert_eq!(eval_v(&m, 1.0).unwrap(), 0.0);
        assert!(matches!(eval_v(&m, 1.5), Err(Error::TableRange { .. })));
    }

    #[test]
    fn eval_v_is_lipschitz_within_families() {
        for (fam, k) in [
            (PotentialFamily::Gaussian, 3.0 * 0.86),
            (PotentialFamily::Exponential, 3.0),
        ] {
            let m = model(fam, 3.0, 1.0);
            let d = 1e-4;
            for i in 0..200 {
                let r = i as f64 * 0.05;
                let diff = (eval_v(&m, r + d).unwrap() - eval_v(&m, r).unwrap()).abs();
                assert!(diff <= k * d * 1.001, "{fam:?} at {r}");
            }
        }
    }

    #[test]
    fn config_rejects_bad_input() {
        let bad = [
            r#"{"V":{"family":"gaussian","amplitude":-1,"range":1},"W":{"family":"zero","dimensionality":"radial_3d"},"mu":1,"h_values":[0.1]}"#,
            r#"{"V":{"family":"gaussian","amplitude":1,"range":1},"W":{"family":"zero","dimensionality":"general_3d"},"mu":1,"h_values":[0.1]}"#,
            r#"{"V":{"family":"gaussian","amplitude":1,"range":1},"W":{"family":"zero","dimensionality":"radial_3d"},"mu":1,"h_values":[1.5]}"#,
            r#"{"V":{"family":"gaussian","amplitude":1,"range":1},"W":{"family":"square_well_1d","amplitude":1,"range":1,"dimensionality":"radial_3d"},"mu":1,"h_values":[0.1]}"#,
            r#"{"V":{"family":"yukawa","amplitude":1,"range":1},"W":{"family":"zero","dimensionality":"radial_3d"},"mu":1,"h_values":[0.1]}"#,
        ];
        for text in bad {
            assert!(
                matches!(Config::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn config_defaults_fill_numerics() {
        let text = r#"{"V":{"family":"gaussian","amplitude":3,"range":1},
            "W":{"family":"constant","amplitude":0.5,"dimensionality":"one_d"},
            "mu":1,"h_values":[0.1]}"#;
        let cfg = Config::from_json(text).unwrap();
        assert_eq!(cfg.numerics, Numerics::default());
        assert_eq!(cfg.numerics.r_max_for(&cfg.model), 12.0);
        assert_eq!(cfg.numerics.p_max_for(&cfg.model), 8.0);
    }

    #[test]
    fn field_shapes() {
        let w = ExternalField {
            family: FieldFamily::GaussianWell,
            amplitude: 2.0,
            range: 1.0,
            dimensionality: Dimensionality::OneD,
            table: None,
        };
        assert_eq!(w.eval(0.0), -2.0);
        let t = ExternalField {
            family: FieldFamily::Tabulated1d,
            amplitude: 0.0,
            range: 1.0,
            dimensionality: Dimensionality::OneD,
            table: Some(vec![[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]]),
        };
        assert_eq!(t.eval(-0.5), -0.5);
        assert_eq!(t.eval(5.0), 0.0);
        assert_eq!(t.eval(-5.0), 0.0);
    }

    #[test]
    fn constant_field_has_zero_lipschitz_quotient() {
        let w = ExternalField {
            family: FieldFamily::Constant,
            amplitude: 0.7,
            range: 1.0,
            dimensionality: Dimensionality::Radial3d,
            table: None,
        };
        assert_eq!(lipschitz_quotient(&w, 0.0, 10.0, 101), 0.0);
    }
}
