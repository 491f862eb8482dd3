//! Problem definitions, the right-hand-side registry, grids and trajectories.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::special::gamma_unchecked;

/// Entries of the fixed right-hand-side registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    /// `f = c`
    Constant,
    /// `f = λ y`
    Linear,
    /// `f = r y (1 - y)`
    Logistic,
    /// `f = cos t - y`
    CosForced,
    /// `f = 2 (t - a)^{2-α} / Γ(3-α)`, the Caputo derivative of `(t - a)^2`.
    ManufacturedQuadratic,
}

impl RhsKind {
    pub const ALL: [RhsKind; 5] = [
        RhsKind::Constant,
        RhsKind::Linear,
        RhsKind::Logistic,
        RhsKind::CosForced,
        RhsKind::ManufacturedQuadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RhsKind::Constant => "constant",
            RhsKind::Linear => "linear",
            RhsKind::Logistic => "logistic",
            RhsKind::CosForced => "cos_forced",
            RhsKind::ManufacturedQuadratic => "manufactured_quadratic",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        RhsKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownRhs {
                name: name.to_string(),
                known: RhsKind::registry_names(),
            })
    }

    pub fn registry_names() -> String {
        RhsKind::ALL.map(RhsKind::name).join(", ")
    }

    /// Parameters each entry requires. Every entry also accepts an optional `offset`.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            RhsKind::Constant => &["c"],
            RhsKind::Linear => &["lambda"],
            RhsKind::Logistic => &["r"],
            RhsKind::CosForced => &[],
            RhsKind::ManufacturedQuadratic => &["alpha", "a"],
        }
    }
}

impl fmt::Display for RhsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameter added to `f` by every registry entry; used for `f + δ` perturbations.
pub const OFFSET_PARAM: &str = "offset";

/// Declared sup of `|f|`, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsBound {
    Finite(f64),
    Unbounded,
}

impl Serialize for RhsBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RhsBound::Finite(m) => s.serialize_f64(*m),
            RhsBound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for RhsBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(m) => Ok(RhsBound::Finite(m)),
            Raw::Text(t) if t == "unbounded" => Ok(RhsBound::Unbounded),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "bound_M must be a number or \"unbounded\", got \"{t}\""
            ))),
        }
    }
}

/// A named right-hand side `f(t, y)` with its declared Lipschitz constant and bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsSpec {
    pub name: RhsKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "lipschitz_L")]
    pub lipschitz: f64,
    #[serde(rename = "bound_M")]
    pub bound: RhsBound,
}

impl RhsSpec {
    pub fn new(
        name: RhsKind,
        params: BTreeMap<String, f64>,
        lipschitz: f64,
        bound: RhsBound,
    ) -> Result<Self> {
        let spec = RhsSpec {
            name,
            params,
            lipschitz,
            bound,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.params {
            if k != OFFSET_PARAM && !self.name.required_params().contains(&k.as_str()) {
                return Err(Error::InvalidProblem(format!(
                    "rhs `{}` does not take parameter `{k}`",
                    self.name
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidProblem(format!("rhs parameter `{k}` is not finite")));
            }
        }
        for p in self.name.required_params() {
            if !self.params.contains_key(*p) {
                return Err(Error::InvalidProblem(format!(
                    "rhs `{}` requires parameter `{p}`",
                    self.name
                )));
            }
        }
        if !self.lipschitz.is_finite() || self.lipschitz < 0.0 {
            return Err(Error::InvalidProblem(
                "lipschitz_L must be finite and >= 0".into(),
            ));
        }
        if let RhsBound::Finite(m) = self.bound {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidProblem("bound_M must be finite and >= 0".into()));
            }
        }
        if self.name == RhsKind::ManufacturedQuadratic {
            let alpha = self.param("alpha");
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::InvalidProblem(format!(
                    "manufactured_quadratic needs 0 < alpha < 2, got {alpha}"
                )));
            }
        }
        Ok(())
    }

    fn from_pairs(name: RhsKind, pairs: &[(&str, f64)], lipschitz: f64, bound: RhsBound) -> Self {
        let params = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        RhsSpec::new(name, params, lipschitz, bound).expect("registry constructor")
    }

    /// `f = c`, with `L = 0` and `M = |c|`.
    pub fn constant(c: f64) -> Self {
        Self::from_pairs(RhsKind::Constant, &[("c", c)], 0.0, RhsBound::Finite(c.abs()))
    }

    /// `f = λ y`, with `L = |λ|` and no global bound.
    pub fn linear(lambda: f64) -> Self {
        Self::from_pairs(RhsKind::Linear, &[("lambda", lambda)], lambda.abs(), RhsBound::Unbounded)
    }

    /// `f = r y (1 - y)` with constants declared for the strip `|y| ≤ y_max`.
    pub fn logistic(r: f64, y_max: f64) -> Self {
        let probe = Self::from_pairs(RhsKind::Logistic, &[("r", r)], 0.0, RhsBound::Unbounded);
        let lip = probe.lipschitz_on(y_max);
        let m = probe.sup_on(0.0, 0.0, y_max);
        Self::from_pairs(RhsKind::Logistic, &[("r", r)], lip, RhsBound::Finite(m))
    }

    /// `f = cos t - y`, with `L = 1` and no global bound.
    pub fn cos_forced() -> Self {
        Self::from_pairs(RhsKind::CosForced, &[], 1.0, RhsBound::Unbounded)
    }

    /// Manufactured right-hand side whose solution with zero data is `(t - a)^2`.
    /// `M` is declared for the horizon `t_end`.
    pub fn manufactured_quadratic(alpha: f64, a: f64, t_end: f64) -> Self {
        let probe = Self::from_pairs(
            RhsKind::ManufacturedQuadratic,
            &[("alpha", alpha), ("a", a)],
            0.0,
            RhsBound::Unbounded,
        );
        let m = probe.sup_on(a, t_end, 0.0);
        Self::from_pairs(
            RhsKind::ManufacturedQuadratic,
            &[("alpha", alpha), ("a", a)],
            0.0,
            RhsBound::Finite(m),
        )
    }

    /// Copy of this right-hand side with `δ` added to the offset; `M` grows by `|δ|`.
    pub fn with_offset(&self, delta: f64) -> Self {
        let mut out = self.clone();
        let current = self.param(OFFSET_PARAM);
        out.params.insert(OFFSET_PARAM.to_string(), current + delta);
        if let RhsBound::Finite(m) = out.bound {
            out.bound = RhsBound::Finite(m + delta.abs());
        }
        out
    }

    fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(0.0)
    }

    fn eval_unchecked(&self, t: f64, y: f64) -> f64 {
        let base = match self.name {
            RhsKind::Constant => self.param("c"),
            RhsKind::Linear => self.param("lambda") * y,
            RhsKind::Logistic => self.param("r") * y * (1.0 - y),
            RhsKind::CosForced => t.cos() - y,
            RhsKind::ManufacturedQuadratic => {
                let alpha = self.param("alpha");
                let a = self.param("a");
                let s = (t - a).max(0.0);
                2.0 * s.powf(2.0 - alpha) / gamma_unchecked(3.0 - alpha)
            }
        };
        base + self.param(OFFSET_PARAM)
    }

    /// `f(t, y)`.
    pub fn eval(&self, t: f64, y: f64) -> Result<f64> {
        let v = self.eval_unchecked(t, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("{}({t}, {y})", self.name)))
        }
    }

    /// Lipschitz constant in `y` on the strip `|y| ≤ y_max`.
    pub fn lipschitz_on(&self, y_max: f64) -> f64 {
        match self.name {
            RhsKind::Constant | RhsKind::ManufacturedQuadratic => 0.0,
            RhsKind::Linear => self.param("lambda").abs(),
            RhsKind::Logistic => self.param("r").abs() * (1.0 + 2.0 * y_max.abs()),
            RhsKind::CosForced => 1.0,
        }
    }

    /// `sup |f|` over `[lo, hi] × [-y_max, y_max]`.
    pub fn sup_on(&self, lo: f64, hi: f64, y_max: f64) -> f64 {
        let y = y_max.abs();
        let offset = self.param(OFFSET_PARAM);
        match self.name {
            RhsKind::Constant => (self.param("c") + offset).abs(),
            RhsKind::Linear => self.param("lambda").abs() * y + offset.abs(),
            RhsKind::Logistic => {
                let r = self.param("r");
                let g = |v: f64| (r * v * (1.0 - v) + offset).abs();
                let mut m = g(-y).max(g(y));
                if y >= 0.5 {
                    m = m.max(g(0.5));
                }
                m
            }
            RhsKind::CosForced => {
                let (lo, hi) = (lo.min(hi), lo.max(hi));
                // max |cos t| on [lo, hi]
                let k = (lo / std::f64::consts::PI).ceil();
                let max_cos = if k * std::f64::consts::PI <= hi {
                    1.0
                } else {
                    lo.cos().abs().max(hi.cos().abs())
                };
                y + max_cos + offset.abs()
            }
            RhsKind::ManufacturedQuadratic => {
                let a = self.param("a");
                let top = hi.max(lo);
                (self.eval_unchecked(top.max(a), 0.0) - offset).abs() + offset.abs()
            }
        }
    }

    /// Bound `M` to use on `[lo, hi]` given the realized solution: the declared
    /// value when finite, otherwise `sup |f|` on the rectangle whose `y` extent is
    /// the trajectory's largest magnitude plus 20 %.
    pub fn effective_bound(&self, traj: &Trajectory) -> f64 {
        match self.bound {
            RhsBound::Finite(m) => m,
            RhsBound::Unbounded => {
                let (lo, hi) = (traj.start(), traj.end());
                self.sup_on(lo, hi, working_y_max(traj))
            }
        }
    }
}

/// Height of the working rectangle for a realized trajectory.
pub fn working_y_max(traj: &Trajectory) -> f64 {
    1.2 * traj.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Number of initial values a problem of order `alpha` needs: ⌈α⌉.
pub fn initial_value_count(alpha: f64) -> usize {
    alpha.ceil() as usize
}

/// Caputo initial value problem `D^α_{*a} y = f(t, y)`, `y^{(k)}(a) = y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalIvp {
    pub alpha: f64,
    pub start: f64,
    pub horizon: f64,
    pub init: Vec<f64>,
    pub rhs: RhsSpec,
}

impl FractionalIvp {
    pub fn new(alpha: f64, start: f64, horizon: f64, init: Vec<f64>, rhs: RhsSpec) -> Result<Self> {
        let p = FractionalIvp {
            alpha,
            start,
            horizon,
            init,
            rhs,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::InvalidProblem(format!(
                "order must be finite and > 0, got {}",
                self.alpha
            )));
        }
        if !self.start.is_finite() || !self.horizon.is_finite() {
            return Err(Error::InvalidProblem("interval ends must be finite".into()));
        }
        if self.start >= self.horizon {
            return Err(Error::DegenerateInterval {
                lo: self.start,
                hi: self.horizon,
            });
        }
        let need = initial_value_count(self.alpha);
        if self.init.len() != need {
            return Err(Error::InvalidProblem(format!(
                "init length must equal ceil(alpha)={need}, got {}",
                self.init.len()
            )));
        }
        if self.init.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("initial values must be finite".into()));
        }
        self.rhs.validate()
    }

    /// `Σ_k y_k (t - a)^k / k!`.
    pub fn taylor_part(&self, t: f64) -> f64 {
        let dt = t - self.start;
        let mut term = 1.0;
        let mut sum = 0.0;
        for (k, yk) in self.init.iter().enumerate() {
            if k > 0 {
                term *= dt / k as f64;
            }
            sum += yk * term;
        }
        sum
    }
}

/// Terminal value problem `D^α_{*a} y = f(t, y)`, `y(T) = y*`, with `0 < α < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalTvp {
    pub alpha: f64,
    pub start: f64,
    pub terminal: f64,
    pub y_star: f64,
    pub rhs: RhsSpec,
}

impl FractionalTvp {
    pub fn new(alpha: f64, start: f64, terminal: f64, y_star: f64, rhs: RhsSpec) -> Result<Self> {
        let p = FractionalTvp {
            alpha,
            start,
            terminal,
            y_star,
            rhs,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "terminal value problems require 0 < alpha < 1, got {}",
                self.alpha
            )));
        }
        if !self.start.is_finite() || !self.terminal.is_finite() || !self.y_star.is_finite() {
            return Err(Error::InvalidProblem("problem data must be finite".into()));
        }
        if self.start >= self.terminal {
            return Err(Error::DegenerateInterval {
                lo: self.start,
                hi: self.terminal,
            });
        }
        self.rhs.validate()
    }

    /// The initial value problem with the same equation and `y(a) = c`.
    pub fn as_ivp(&self, c: f64) -> FractionalIvp {
        FractionalIvp {
            alpha: self.alpha,
            start: self.start,
            horizon: self.terminal,
            init: vec![c],
            rhs: self.rhs.clone(),
        }
    }
}

/// `n + 1` equispaced nodes from `a` to `t_end`, both ends exact.
pub fn make_uniform_grid(a: f64, t_end: f64, n: usize) -> Result<Vec<f64>> {
    if !(a < t_end) || !a.is_finite() || !t_end.is_finite() {
        return Err(Error::DegenerateInterval { lo: a, hi: t_end });
    }
    if n == 0 {
        return Err(Error::InvalidProblem("grid needs n >= 1".into()));
    }
    let width = t_end - a;
    let nf = n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|i| a + width * (i as f64 / nf)).collect();
    nodes[n] = t_end;
    Ok(nodes)
}

/// How a trajectory is evaluated between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    PiecewiseLinear,
}

/// Solution values on a strictly increasing node set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: Vec<f64>,
    values: Vec<f64>,
    interp: Interpolation,
}

impl Trajectory {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidProblem(format!(
                "trajectory needs matching non-empty node/value sequences ({} vs {})",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidProblem("trajectory nodes must be strictly increasing".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("trajectory value at node {i}")));
        }
        Ok(Trajectory {
            nodes,
            values,
            interp: Interpolation::PiecewiseLinear,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn last_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.start() <= lo && hi <= self.end()
    }

    /// Piecewise-linear value at `t`; node values are returned bit-exactly.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::OutOfRange {
                t,
                lo: self.start(),
                hi: self.end(),
            });
        }
        let i = self.nodes.partition_point(|&x| x < t);
        if self.nodes[i] == t {
            return Ok(self.values[i]);
        }
        let (t0, t1) = (self.nodes[i - 1], self.nodes[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let w = (t - t0) / (t1 - t0);
        Ok(v0 + w * (v1 - v0))
    }

    /// `t,y` CSV with 17 significant digits and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.len() + 1));
        out.push_str("t,y\n");
        for (t, y) in self.nodes.iter().zip(&self.values) {
            out.push_str(&crate::fmt17(*t));
            out.push(',');
            out.push_str(&crate::fmt17(*y));
            out.push('\n');
        }
        out
    }
}
