//! Terminal value problems `D^α_{*a} y = f(t, y)`, `y(T) = y*`, `0 < α < 1`.
//!
//! Two independent solvers: damped Picard iteration on the Fredholm form
//! `y(t) = y* + (1/Γ(α)) ∫_a^T G(t, s) f(s, y(s)) ds`, and shooting on `y(a)`.
//! On a shared grid both land on the same discrete system, so each checks the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{solve_ivp, SolverConfig};
use crate::problem::{make_uniform_grid, FractionalTvp, Trajectory};
use crate::quadrature::{interval_mass, product_trapezoid_weights, UniformWeights};
use crate::special::gamma_unchecked;

/// Picard damping factor.
pub const PICARD_THETA: f64 = 0.5;
pub const PICARD_MAX_ITERATIONS: usize = 500;
/// Shooting stops once `|y(T) - y*|` drops below this.
pub const SHOOTING_TOL: f64 = 1e-10;
const SHOOTING_MAX_SOLVES: usize = 200;
const BRACKET_EXPANSIONS: usize = 60;

/// Arguments of the Green kernel `G(t, s)` for terminal point `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub t: f64,
    pub s: f64,
    pub terminal: f64,
    pub alpha: f64,
}

/// `G(t, s) = (t-s)^{α-1} - (T-s)^{α-1}` for `s < t`, `-(T-s)^{α-1}` for `s > t`.
///
/// Both `s = t` and `s = T` are singular and rejected; integrate across them
/// with product weights instead.
pub fn green_kernel(q: KernelQuery) -> Result<f64> {
    let KernelQuery {
        t,
        s,
        terminal,
        alpha,
    } = q;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("kernel needs 0 < alpha < 1, got {alpha}")));
    }
    if !(t.is_finite() && s.is_finite() && terminal.is_finite()) {
        return Err(Error::Domain("kernel arguments must be finite".into()));
    }
    if s == t || s == terminal {
        return Err(Error::Singular { t, s, terminal });
    }
    if s > terminal || t > terminal {
        return Err(Error::Domain(format!(
            "kernel needs s, t <= T, got t={t}, s={s}, T={terminal}"
        )));
    }
    let far = (terminal - s).powf(alpha - 1.0);
    if s > t {
        Ok(-far)
    } else {
        Ok((t - s).powf(alpha - 1.0) - far)
    }
}

/// `(1/Γ(α)) ∫_a^T |G(t, s)| ds` by product integration on `n` uniform steps
/// (with `t` inserted as a node).
pub fn kernel_abs_integral(t: f64, a: f64, terminal: f64, alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("kernel needs 0 < alpha < 1, got {alpha}")));
    }
    if !(t >= a && t <= terminal) {
        return Err(Error::OutOfRange {
            t,
            lo: a,
            hi: terminal,
        });
    }
    let mut nodes = make_uniform_grid(a, terminal, n)?;
    if let Err(pos) = nodes.binary_search_by(|x| x.total_cmp(&t)) {
        nodes.insert(pos, t);
    }
    // G ≥ 0 on [a, t] and < 0 on (t, T], so |G| integrates piece by piece
    let mut near = 0.0;
    let mut far_left = 0.0;
    let mut far_right = 0.0;
    for w in nodes.windows(2) {
        let far = interval_mass(terminal - w[0], terminal - w[1], alpha);
        if w[1] <= t {
            near += interval_mass(t - w[0], t - w[1], alpha);
            far_left += far;
        } else {
            far_right += far;
        }
    }
    Ok((near - far_left + far_right) / gamma_unchecked(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvpMethod {
    Fredholm,
    Shooting,
}

impl TvpMethod {
    pub fn name(self) -> &'static str {
        match self {
            TvpMethod::Fredholm => "fredholm",
            TvpMethod::Shooting => "shooting",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvpSolution {
    pub traj: Trajectory,
    /// The implied `y(a)`.
    pub recovered_initial: f64,
    pub method: TvpMethod,
    /// Picard sweeps or IVP solves performed.
    pub iterations: usize,
    /// Sup-norm defect of the trajectory in the discretized Fredholm equation.
    pub residual: f64,
}

/// Fredholm map on a uniform grid: `y_i ← y* + c (H_i(F) - H_N(F))`.
struct FredholmMap<'a> {
    p: &'a FractionalTvp,
    nodes: Vec<f64>,
    weights: UniformWeights,
    scale: f64,
}

impl<'a> FredholmMap<'a> {
    fn new(p: &'a FractionalTvp, n: usize) -> Result<Self> {
        let nodes = make_uniform_grid(p.start, p.terminal, n)?;
        let h = (p.terminal - p.start) / n as f64;
        Ok(FredholmMap {
            p,
            nodes,
            weights: UniformWeights::new(n, p.alpha),
            scale: h.powf(p.alpha) / gamma_unchecked(p.alpha),
        })
    }

    fn apply(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.nodes.len() - 1;
        let f = self
            .nodes
            .iter()
            .zip(y)
            .map(|(&t, &v)| self.p.rhs.eval(t, v))
            .collect::<Result<Vec<f64>>>()?;
        let memory = |i: usize| self.weights.history(i, &f) + self.weights.interior[0] * f[i];
        let at_terminal = if n == 0 { 0.0 } else { memory(n) };
        out[0] = self.p.y_star - self.scale * at_terminal;
        for i in 1..=n {
            out[i] = self.p.y_star + self.scale * (memory(i) - at_terminal);
        }
        Ok(())
    }
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Damped Picard iteration from the constant `y*`.
///
/// Converged when one application of the map moves the iterate by at most
/// `tol_residual` and the distance to the discrete fixed point, estimated from
/// the observed contraction ratio, is below a hundredth of it. Fails with the
/// last contraction ratio after
/// [`PICARD_MAX_ITERATIONS`] sweeps or as soon as the iterates leave any
/// reasonable range.
pub fn solve_tvp_fredholm(p: &FractionalTvp, cfg: &SolverConfig) -> Result<TvpSolution> {
    p.validate()?;
    cfg.validate()?;
    let map = FredholmMap::new(p, cfg.n_steps)?;
    let len = map.nodes.len();
    let mut y = vec![p.y_star; len];
    let mut image = vec![0.0; len];
    let mut prev_gap = f64::INFINITY;
    let mut ratio = f64::NAN;
    let mut first_gap = None;
    for iteration in 1..=PICARD_MAX_ITERATIONS {
        map.apply(&y, &mut image)?;
        let gap = sup_gap(&y, &image);
        if !gap.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iteration,
                ratio,
            });
        }
        if prev_gap.is_finite() && prev_gap > 0.0 {
            ratio = gap / prev_gap;
        }
        prev_gap = gap;
        let first = *first_gap.get_or_insert(gap);
        // the iterate sits within θ·gap/(1-ρ) of the discrete fixed point
        let rho = if ratio < 1.0 { ratio } else { 0.99 };
        let settled = gap == 0.0
            || (gap <= cfg.tol_residual && PICARD_THETA * gap / (1.0 - rho) <= 0.01 * cfg.tol_residual);
        if settled {
            let traj = Trajectory::new(map.nodes.clone(), y)?;
            return Ok(TvpSolution {
                recovered_initial: traj.values()[0],
                traj,
                method: TvpMethod::Fredholm,
                iterations: iteration,
                residual: gap,
            });
        }
        if gap > 1e12 * first.max(1.0) {
            return Err(Error::NonConvergence {
                iterations: iteration,
                ratio,
            });
        }
        for (v, m) in y.iter_mut().zip(&image) {
            *v = (1.0 - PICARD_THETA) * *v + PICARD_THETA * m;
        }
    }
    Err(Error::NonConvergence {
        iterations: PICARD_MAX_ITERATIONS,
        ratio,
    })
}

/// Root-find on `c = y(a)` so that the forward solve reaches `y*` at `T`.
///
/// The bracket grows geometrically outward from `c = y*`; inside it, secant
/// steps are taken when they stay in the bracket and bisection otherwise.
pub fn solve_tvp_shooting(p: &FractionalTvp, cfg: &SolverConfig) -> Result<TvpSolution> {
    p.validate()?;
    cfg.validate()?;
    let count = std::cell::Cell::new(0usize);
    let shoot = |c: f64| -> Result<(f64, Trajectory)> {
        count.set(count.get() + 1);
        let traj = solve_ivp(&p.as_ivp(c), cfg)?;
        Ok((traj.last_value() - p.y_star, traj))
    };

    let c0 = p.y_star;
    let (r0, t0) = shoot(c0)?;
    if r0.abs() <= SHOOTING_TOL {
        return finish_shooting(p, c0, t0, count.get());
    }

    // bracket expansion; the step also seeds a secant guess
    let mut step = 0.1 * c0.abs().max(1.0);
    let (mut lo, mut r_lo) = (c0, r0);
    let (mut hi, mut r_hi) = (c0, r0);
    let mut best = (c0, r0, t0);
    let mut bracket = None;
    for _ in 0..BRACKET_EXPANSIONS {
        let (c_up, c_down) = (c0 + step, c0 - step);
        let (r_up, t_up) = shoot(c_up)?;
        if r_up.abs() < best.1.abs() {
            best = (c_up, r_up, t_up);
        }
        if r_up.abs() <= SHOOTING_TOL {
            return finish_shooting(p, best.0, best.2, count.get());
        }
        if r_up.signum() != r_hi.signum() {
            bracket = Some(((hi, r_hi), (c_up, r_up)));
            break;
        }
        hi = c_up;
        r_hi = r_up;
        let (r_down, t_down) = shoot(c_down)?;
        if r_down.abs() < best.1.abs() {
            best = (c_down, r_down, t_down);
        }
        if r_down.abs() <= SHOOTING_TOL {
            return finish_shooting(p, best.0, best.2, count.get());
        }
        if r_down.signum() != r_lo.signum() {
            bracket = Some(((c_down, r_down), (lo, r_lo)));
            break;
        }
        lo = c_down;
        r_lo = r_down;
        step *= 2.0;
    }
    let Some(((mut a, mut fa), (mut b, fb))) = bracket else {
        return Err(Error::Bracketing { lo, hi });
    };

    // hybrid secant / bisection on [a, b] with fa, fb of opposite sign
    let (mut prev_c, mut prev_r) = (a, fa);
    let (mut cur_c, mut cur_r) = (b, fb);
    while count.get() < SHOOTING_MAX_SOLVES {
        let secant = if cur_r != prev_r {
            cur_c - cur_r * (cur_c - prev_c) / (cur_r - prev_r)
        } else {
            f64::NAN
        };
        let mid = 0.5 * (a + b);
        let inside = secant.is_finite() && secant > a.min(b) && secant < a.max(b);
        let c = if inside { secant } else { mid };
        let (r, traj) = shoot(c)?;
        if r.abs() < best.1.abs() {
            best = (c, r, traj);
        }
        if r.abs() <= SHOOTING_TOL || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
            return finish_shooting(p, best.0, best.2, count.get());
        }
        if r.signum() == fa.signum() {
            a = c;
            fa = r;
        } else {
            b = c;
        }
        prev_c = cur_c;
        prev_r = cur_r;
        cur_c = c;
        cur_r = r;
    }
    Err(Error::NonConvergence {
        iterations: count.get(),
        ratio: best.1.abs(),
    })
}

fn finish_shooting(p: &FractionalTvp, c: f64, traj: Trajectory, solves: usize) -> Result<TvpSolution> {
    let residual = fredholm_residual(p, &traj)?;
    Ok(TvpSolution {
        traj,
        recovered_initial: c,
        method: TvpMethod::Shooting,
        iterations: solves,
        residual,
    })
}

/// Sup over nodes of `|y_i - y* - (1/Γ(α)) ∫_a^T G(t_i, s) f ds|`, with both
/// memory integrals taken by product weights on the trajectory's nodes.
pub fn fredholm_residual(p: &FractionalTvp, traj: &Trajectory) -> Result<f64> {
    if !traj.covers(p.start, p.terminal) || traj.start() != p.start || traj.end() != p.terminal {
        return Err(Error::Coverage {
            need_lo: p.start,
            need_hi: p.terminal,
            have_lo: traj.start(),
            have_hi: traj.end(),
        });
    }
    let nodes = traj.nodes();
    let f = nodes
        .iter()
        .zip(traj.values())
        .map(|(&t, &v)| p.rhs.eval(t, v))
        .collect::<Result<Vec<f64>>>()?;
    let memory = |i: usize| -> f64 {
        product_trapezoid_weights(&nodes[..=i], p.alpha)
            .iter()
            .zip(&f)
            .map(|(w, g)| w * g)
            .sum()
    };
    let inv_gamma = 1.0 / gamma_unchecked(p.alpha);
    let at_terminal = memory(nodes.len() - 1);
    let mut worst = 0.0_f64;
    for (i, y) in traj.values().iter().enumerate() {
        let rhs = p.y_star + inv_gamma * (memory(i) - at_terminal);
        worst = worst.max((y - rhs).abs());
    }
    Ok(worst)
}
