//! Caputo initial value problems via their Volterra integral form
//!
//! `y(t) = Σ_k y_k (t-a)^k / k! + (1/Γ(α)) ∫_a^t (t-s)^{α-1} f(s, y(s)) ds`,
//!
//! discretized with product-trapezoidal weights in predictor-corrector form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{make_uniform_grid, FractionalIvp, Trajectory};
use crate::quadrature::{product_trapezoid_weights, UniformWeights};
use crate::special::{gamma_unchecked, ml};

/// Magnitude beyond which a solve is declared blown up.
pub const BLOW_UP_LIMIT: f64 = 1e12;
/// Upper bound on corrector passes per node.
pub const MAX_CORRECTOR_PASSES: usize = 100;

fn default_n_steps() -> usize {
    1024
}
fn default_corrector_iterations() -> usize {
    1
}
fn default_tol_residual() -> f64 {
    1e-8
}

/// Discretization controls shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    /// Minimum number of corrector passes per node. Passes continue past this
    /// count until successive iterates agree to a hundredth of `tol_residual`.
    #[serde(default = "default_corrector_iterations")]
    pub corrector_iterations: usize,
    #[serde(default = "default_tol_residual")]
    pub tol_residual: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_steps: default_n_steps(),
            corrector_iterations: default_corrector_iterations(),
            tol_residual: default_tol_residual(),
        }
    }
}

impl SolverConfig {
    pub fn with_steps(n_steps: usize) -> Self {
        SolverConfig {
            n_steps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(Error::InvalidProblem("n_steps must be >= 1".into()));
        }
        if self.corrector_iterations < 1 {
            return Err(Error::InvalidProblem("corrector_iterations must be >= 1".into()));
        }
        if !(self.tol_residual > 0.0 && self.tol_residual.is_finite()) {
            return Err(Error::InvalidProblem("tol_residual must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the Volterra equation at `t`, with the memory integral
/// taken by product-trapezoidal weights on the trajectory's nodes in `[a, t]`.
pub fn volterra_rhs(p: &FractionalIvp, traj: &Trajectory, t: f64) -> Result<f64> {
    if !(t >= p.start && t <= p.horizon) {
        return Err(Error::OutOfRange {
            t,
            lo: p.start,
            hi: p.horizon,
        });
    }
    if !traj.covers(p.start, t) {
        return Err(Error::Coverage {
            need_lo: p.start,
            need_hi: t,
            have_lo: traj.start(),
            have_hi: traj.end(),
        });
    }
    let mut nodes = vec![p.start];
    nodes.extend(traj.nodes().iter().copied().filter(|&s| s > p.start && s < t));
    if t > p.start {
        nodes.push(t);
    }
    let mut fvals = Vec::with_capacity(nodes.len());
    for &s in &nodes {
        fvals.push(p.rhs.eval(s, traj.eval(s)?)?);
    }
    let w = product_trapezoid_weights(&nodes, p.alpha);
    let integral: f64 = w.iter().zip(&fvals).map(|(wi, fi)| wi * fi).sum();
    Ok(p.taylor_part(t) + integral / gamma_unchecked(p.alpha))
}

/// Solve on `make_uniform_grid(a, T, n_steps)`.
///
/// Each node gets a product-rectangle predictor followed by product-trapezoid
/// corrector passes; the memory sum is recomputed in full at every node.
pub fn solve_ivp(p: &FractionalIvp, cfg: &SolverConfig) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    let nodes = make_uniform_grid(p.start, p.horizon, cfg.n_steps)?;
    let values = march(p, cfg, &nodes)?;
    Trajectory::new(nodes, values)
}

fn march(p: &FractionalIvp, cfg: &SolverConfig, nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len() - 1;
    let h = (p.horizon - p.start) / n as f64;
    let scale = h.powf(p.alpha) / gamma_unchecked(p.alpha);
    let weights = UniformWeights::new(n, p.alpha);
    let self_weight = scale * weights.interior[0];
    let pass_tol = 0.01 * cfg.tol_residual;

    let mut y = Vec::with_capacity(n + 1);
    let mut f = Vec::with_capacity(n + 1);
    y.push(p.init[0]);
    f.push(p.rhs.eval(nodes[0], y[0])?);

    for k in 1..=n {
        let t = nodes[k];
        let base = p.taylor_part(t);
        let predicted = base + scale * weights.rect_history(k, &f);
        let fixed = base + scale * weights.history(k, &f);

        let mut yk = predicted;
        let mut passes = 0;
        let mut last_step = f64::INFINITY;
        loop {
            let next = fixed + self_weight * p.rhs.eval(t, yk)?;
            let prev_step = std::mem::replace(&mut last_step, (next - yk).abs());
            yk = next;
            passes += 1;
            if !yk.is_finite() {
                return Err(Error::NonFinite(format!("solution at node {k} (t = {t})")));
            }
            if yk.abs() > BLOW_UP_LIMIT {
                return Err(Error::BlowUp {
                    node: k,
                    t,
                    value: yk.abs(),
                });
            }
            if passes >= cfg.corrector_iterations && last_step <= pass_tol.max(4.0 * f64::EPSILON * yk.abs()) {
                break;
            }
            if passes >= MAX_CORRECTOR_PASSES {
                return Err(Error::NonConvergence {
                    iterations: passes,
                    ratio: last_step / prev_step,
                });
            }
        }
        y.push(yk);
        f.push(p.rhs.eval(t, yk)?);
    }
    Ok(y)
}

/// `y0 · E_α(λ (t - a)^α)`, the solution of `D^α y = λ y` with `y(a) = y0`
/// (and zero higher initial derivatives when `α > 1`).
pub fn ml_linear_solution(alpha: f64, a: f64, y0: f64, lambda: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("closed form needs 0 < alpha <= 2, got {alpha}")));
    }
    if !(t >= a) {
        return Err(Error::Domain(format!("closed form needs t >= a, got t={t}, a={a}")));
    }
    Ok(y0 * ml(alpha, lambda * (t - a).powf(alpha))?)
}

/// Largest node-wise gap between the trajectory and the Volterra right-hand side
/// evaluated on that trajectory.
pub fn residual_check(p: &FractionalIvp, traj: &Trajectory) -> Result<f64> {
    if !traj.covers(p.start, p.horizon) {
        return Err(Error::Coverage {
            need_lo: p.start,
            need_hi: p.horizon,
            have_lo: traj.start(),
            have_hi: traj.end(),
        });
    }
    let mut nodes = vec![p.start];
    nodes.extend(traj.nodes().iter().copied().filter(|&s| s > p.start && s <= p.horizon));
    if *nodes.last().unwrap() < p.horizon {
        nodes.push(p.horizon);
    }
    let mut values = Vec::with_capacity(nodes.len());
    let mut fvals = Vec::with_capacity(nodes.len());
    for &s in &nodes {
        let v = traj.eval(s)?;
        values.push(v);
        fvals.push(p.rhs.eval(s, v)?);
    }
    let inv_gamma = 1.0 / gamma_unchecked(p.alpha);
    let mut worst = 0.0_f64;
    for i in 0..nodes.len() {
        let w = product_trapezoid_weights(&nodes[..=i], p.alpha);
        let integral: f64 = w.iter().zip(&fvals).map(|(wi, fi)| wi * fi).sum();
        let rhs = p.taylor_part(nodes[i]) + integral * inv_gamma;
        worst = worst.max((values[i] - rhs).abs());
    }
    Ok(worst)
}

/// Sup-norm gap between solutions at `n` and `n/2` steps, compared on the
/// coarse nodes. Used as a (conservative) discretization-error estimate.
pub fn error_estimate(p: &FractionalIvp, cfg: &SolverConfig) -> Result<f64> {
    let fine = solve_ivp(p, cfg)?;
    let coarse_cfg = SolverConfig {
        n_steps: (cfg.n_steps / 2).max(1),
        ..*cfg
    };
    let coarse = solve_ivp(p, &coarse_cfg)?;
    crate::sweep::sup_diff(&fine, &coarse, p.start, p.horizon)
}
