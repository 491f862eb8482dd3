//! Perturbation sweeps: move one piece of problem data by `δ`, re-solve,
//! measure the sup-norm change on the right interval and fit `diff ≈ C δ^p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    d1_bound, d2_bound, example1_lower_bound, example2_lower_bound, gronwall_envelope,
    ShiftBoundInputs,
};
use crate::error::{Error, Result};
use crate::ivp::{solve_ivp, SolverConfig};
use crate::problem::{FractionalIvp, FractionalTvp, RhsKind, Trajectory, OFFSET_PARAM};
use crate::tvp::{solve_tvp_fredholm, solve_tvp_shooting, TvpMethod};

/// Which piece of data a sweep perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// `ã = a + δ` for an initial value problem.
    StartShift,
    /// `T̃ = T + δ` for a terminal value problem.
    TerminalShift,
    /// `ã = a + δ` for a terminal value problem.
    TvpStartShift,
    /// `α̃ = α - δ`.
    AlphaShift,
    /// `ỹ_0 = y_0 + δ`.
    InitShift,
    /// `f̃ = f + δ`.
    RhsScale,
}

impl SweepMode {
    pub const ALL: [SweepMode; 6] = [
        SweepMode::StartShift,
        SweepMode::TerminalShift,
        SweepMode::TvpStartShift,
        SweepMode::AlphaShift,
        SweepMode::InitShift,
        SweepMode::RhsScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepMode::StartShift => "start_shift",
            SweepMode::TerminalShift => "terminal_shift",
            SweepMode::TvpStartShift => "tvp_start_shift",
            SweepMode::AlphaShift => "alpha_shift",
            SweepMode::InitShift => "init_shift",
            SweepMode::RhsScale => "rhs_scale",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        SweepMode::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn needs_tvp(self) -> bool {
        matches!(self, SweepMode::TerminalShift | SweepMode::TvpStartShift)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepBase {
    Ivp(FractionalIvp),
    Tvp(FractionalTvp),
}

impl SweepBase {
    fn alpha(&self) -> f64 {
        match self {
            SweepBase::Ivp(p) => p.alpha,
            SweepBase::Tvp(p) => p.alpha,
        }
    }

    fn interval(&self) -> (f64, f64) {
        match self {
            SweepBase::Ivp(p) => (p.start, p.horizon),
            SweepBase::Tvp(p) => (p.start, p.terminal),
        }
    }

    fn with_interval(&self, lo: f64, hi: f64) -> SweepBase {
        match self {
            SweepBase::Ivp(p) => SweepBase::Ivp(FractionalIvp {
                start: lo,
                horizon: hi,
                ..p.clone()
            }),
            SweepBase::Tvp(p) => SweepBase::Tvp(FractionalTvp {
                start: lo,
                terminal: hi,
                ..p.clone()
            }),
        }
    }

    fn solve(&self, n_steps: usize, solver: &SolverConfig, method: TvpMethod) -> Result<Trajectory> {
        let cfg = SolverConfig { n_steps, ..*solver };
        match self {
            SweepBase::Ivp(p) => solve_ivp(p, &cfg),
            SweepBase::Tvp(p) => match method {
                TvpMethod::Fredholm => solve_tvp_fredholm(p, &cfg).map(|s| s.traj),
                TvpMethod::Shooting => solve_tvp_shooting(p, &cfg).map(|s| s.traj),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: SweepBase,
    pub mode: SweepMode,
    /// Strictly decreasing, positive.
    pub deltas: Vec<f64>,
    pub solver: SolverConfig,
    /// Solver used for terminal value problems.
    pub tvp_method: TvpMethod,
}

/// `span · 2^{-k}` for `k` in `exponents`.
pub fn dyadic_deltas(span: f64, exponents: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    exponents.map(|k| span * 2f64.powi(-k)).collect()
}

impl SweepPlan {
    pub fn new(base: SweepBase, mode: SweepMode, deltas: Vec<f64>, solver: SolverConfig) -> Result<Self> {
        let plan = SweepPlan {
            base,
            mode,
            deltas,
            solver,
            tvp_method: TvpMethod::Fredholm,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        match &self.base {
            SweepBase::Ivp(p) => p.validate()?,
            SweepBase::Tvp(p) => p.validate()?,
        }
        let d = &self.deltas;
        if d.len() < 4 {
            return Err(Error::InvalidProblem(format!(
                "a sweep needs at least 4 deltas, got {}",
                d.len()
            )));
        }
        if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidProblem("deltas must be finite and > 0".into()));
        }
        if d.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidProblem("deltas must be strictly decreasing".into()));
        }
        if (d[0] / d[d.len() - 1]).log2() < 2.0 {
            return Err(Error::InvalidProblem(
                "deltas must span at least two dyadic decades (largest / smallest >= 4)".into(),
            ));
        }
        let is_tvp = matches!(self.base, SweepBase::Tvp(_));
        if self.mode.needs_tvp() != is_tvp {
            return Err(Error::InvalidProblem(format!(
                "mode {} needs a {} value problem",
                self.mode.name(),
                if self.mode.needs_tvp() { "terminal" } else { "initial" }
            )));
        }
        let (a, t_end) = self.base.interval();
        match self.mode {
            SweepMode::StartShift | SweepMode::TvpStartShift if a + d[0] >= t_end => {
                Err(Error::InvalidProblem(format!(
                    "shifted start a + {} must stay below T = {t_end}",
                    d[0]
                )))
            }
            SweepMode::AlphaShift => {
                let alpha = self.base.alpha();
                let lowest = alpha - d[0];
                if !(lowest > 0.0) || lowest.ceil() != alpha.ceil() {
                    return Err(Error::InvalidProblem(format!(
                        "alpha - delta must keep ceil(alpha) = {} and stay > 0; alpha - {} = {lowest}",
                        alpha.ceil(),
                        d[0]
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Exponent the theory predicts for this mode.
    pub fn predicted_exponent(&self) -> f64 {
        let alpha = self.base.alpha();
        match self.mode {
            SweepMode::StartShift => alpha.min(1.0),
            SweepMode::TerminalShift | SweepMode::TvpStartShift => alpha,
            SweepMode::AlphaShift | SweepMode::InitShift | SweepMode::RhsScale => 1.0,
        }
    }

    /// The perturbed problem for shift `delta` (`delta = 0` reproduces the base).
    pub fn perturbed(&self, delta: f64) -> SweepBase {
        let (a, t_end) = self.base.interval();
        match (self.mode, &self.base) {
            (SweepMode::StartShift | SweepMode::TvpStartShift, b) => b.with_interval(a + delta, t_end),
            (SweepMode::TerminalShift, b) => b.with_interval(a, t_end + delta),
            (SweepMode::AlphaShift, SweepBase::Ivp(p)) => SweepBase::Ivp(FractionalIvp {
                alpha: p.alpha - delta,
                ..p.clone()
            }),
            (SweepMode::InitShift, SweepBase::Ivp(p)) => {
                let mut q = p.clone();
                q.init[0] += delta;
                SweepBase::Ivp(q)
            }
            (SweepMode::RhsScale, SweepBase::Ivp(p)) => SweepBase::Ivp(FractionalIvp {
                rhs: p.rhs.with_offset(delta),
                ..p.clone()
            }),
            (_, b) => b.clone(),
        }
    }

    /// Interval on which base and perturbed solutions are compared.
    pub fn comparison_interval(&self, delta: f64) -> (f64, f64) {
        let (a, t_end) = self.base.interval();
        match self.mode {
            SweepMode::StartShift | SweepMode::TvpStartShift => (a + delta, t_end),
            _ => (a, t_end),
        }
    }

    /// Step counts `(base, perturbed)`. When `δ` is a whole number of base
    /// steps the perturbed grid reuses the base step so the node sets coincide;
    /// otherwise the perturbed problem gets `n` steps and the base is refined
    /// until its step is no coarser.
    fn step_counts(&self, delta: f64) -> (usize, usize) {
        let n = self.solver.n_steps;
        let (a, t_end) = self.base.interval();
        let span = t_end - a;
        let whole_steps = {
            let m = delta * n as f64 / span;
            let r = m.round();
            (r >= 1.0 && (m - r).abs() <= 1e-9 * r).then_some(r as usize)
        };
        match self.mode {
            SweepMode::StartShift | SweepMode::TvpStartShift => match whole_steps {
                Some(m) if m < n => (n, n - m),
                _ if delta == 0.0 => (n, n),
                _ => {
                    let refined = (n as f64 * span / (t_end - a - delta) - 1e-9).ceil() as usize;
                    (refined.max(n), n)
                }
            },
            SweepMode::TerminalShift => match whole_steps {
                Some(m) => (n, n + m),
                None => (n, n),
            },
            _ => (n, n),
        }
    }

    /// `D^α y = y`, `y(a) = 1`, higher initial values zero: the problem with closed-form lower bounds.
    fn is_example_problem(&self) -> bool {
        match &self.base {
            SweepBase::Ivp(p) => {
                p.rhs.name == RhsKind::Linear
                    && p.rhs.params.get("lambda") == Some(&1.0)
                    && p.rhs.params.get(OFFSET_PARAM).copied().unwrap_or(0.0) == 0.0
                    && p.init[0] == 1.0
                    && p.init[1..].iter().all(|&v| v == 0.0)
            }
            SweepBase::Tvp(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub sup_diff: Option<f64>,
    pub bound_d1: Option<f64>,
    pub bound_d2: Option<f64>,
    pub bound_envelope: Option<f64>,
    pub lower_bound: Option<f64>,
    /// `sup |y_n - y_{n/2}|` of base plus perturbed solve.
    pub error_estimate: Option<f64>,
    pub comparison_interval: (f64, f64),
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub rows: Vec<SweepRow>,
    pub fitted_exponent: f64,
    pub fit_r2: f64,
    pub predicted_exponent: f64,
    /// Comparison interval of the largest shift.
    pub comparison_interval: (f64, f64),
    /// `sup_diff` for an extra `δ = 0` row; should not exceed `2 tol_residual`.
    pub zero_shift_diff: f64,
    pub warnings: Vec<String>,
}

/// Machine-readable summary written next to the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub mode: SweepMode,
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    pub fit_r2: f64,
    pub comparison_interval: [f64; 2],
}

impl SweepReport {
    pub fn summary(&self) -> SweepSummary {
        SweepSummary {
            mode: self.mode,
            predicted_exponent: self.predicted_exponent,
            fitted_exponent: self.fitted_exponent,
            fit_r2: self.fit_r2,
            comparison_interval: [self.comparison_interval.0, self.comparison_interval.1],
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(crate::fmt17).unwrap_or_default();
        let mut out = String::from("delta,sup_diff,bound_d1,bound_d2,bound_envelope,lower_bound,status\n");
        for r in &self.rows {
            let status = match r.status {
                RowStatus::Ok => "ok",
                RowStatus::Failed(_) => "failed",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                crate::fmt17(r.delta),
                opt(r.sup_diff),
                opt(r.bound_d1),
                opt(r.bound_d2),
                opt(r.bound_envelope),
                opt(r.lower_bound),
                status
            ));
        }
        out
    }
}

/// Largest `|y(t) - ỹ(t)|` over the union of both node sets inside `[lo, hi]`
/// (the endpoints included). Neither trajectory is evaluated outside `[lo, hi]`.
pub fn sup_diff(y: &Trajectory, y_tilde: &Trajectory, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    for tr in [y, y_tilde] {
        if !tr.covers(lo, hi) {
            return Err(Error::Coverage {
                need_lo: lo,
                need_hi: hi,
                have_lo: tr.start(),
                have_hi: tr.end(),
            });
        }
    }
    let inside = |tr: &Trajectory| {
        let s = tr.nodes().partition_point(|&t| t < lo);
        let e = tr.nodes().partition_point(|&t| t <= hi);
        tr.nodes()[s..e].to_vec()
    };
    let mut points = inside(y);
    points.extend(inside(y_tilde));
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut worst = 0.0_f64;
    for t in points {
        worst = worst.max((y.eval(t)? - y_tilde.eval(t)?).abs());
    }
    Ok(worst)
}

/// Least-squares slope and `R²` of `ln diff` against `ln δ`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 pairs, got {}", pairs.len())));
    }
    if let Some((d, v)) = pairs.iter().find(|(d, v)| !(*d > 0.0 && *v > 0.0 && d.is_finite() && v.is_finite())) {
        return Err(Error::DegenerateFit(format!(
            "deltas and differences must be positive and finite, got ({d}, {v})"
        )));
    }
    let mut sorted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFit("deltas must be distinct".into()));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok((slope, r2))
}

#[derive(Debug, Clone)]
struct Solved {
    traj: Trajectory,
    estimate: f64,
}

fn solve_with_estimate(problem: &SweepBase, n: usize, plan: &SweepPlan) -> Result<Solved> {
    let (fine, coarse) = rayon::join(
        || problem.solve(n, &plan.solver, plan.tvp_method),
        || problem.solve((n / 2).max(1), &plan.solver, plan.tvp_method),
    );
    let traj = fine?;
    let coarse = coarse?;
    let estimate = sup_diff(&traj, &coarse, traj.start(), traj.end())?;
    Ok(Solved { traj, estimate })
}

fn run_row(plan: &SweepPlan, shared_base: &Solved, delta: f64) -> Result<SweepRow> {
    let (base_steps, pert_steps) = plan.step_counts(delta);
    let own_base;
    let base = if base_steps == plan.solver.n_steps {
        shared_base
    } else {
        own_base = solve_with_estimate(&plan.base, base_steps, plan)?;
        &own_base
    };
    let perturbed = solve_with_estimate(&plan.perturbed(delta), pert_steps, plan)?;
    let (lo, hi) = plan.comparison_interval(delta);
    let diff = sup_diff(&base.traj, &perturbed.traj, lo, hi)?;

    let mut row = SweepRow {
        delta,
        sup_diff: Some(diff),
        bound_d1: None,
        bound_d2: None,
        bound_envelope: None,
        lower_bound: None,
        error_estimate: Some(base.estimate + perturbed.estimate),
        comparison_interval: (lo, hi),
        status: RowStatus::Ok,
    };
    if let (SweepMode::StartShift, SweepBase::Ivp(p)) = (plan.mode, &plan.base) {
        let bound = p
            .rhs
            .effective_bound(&base.traj)
            .max(p.rhs.effective_bound(&perturbed.traj));
        let inputs = ShiftBoundInputs {
            alpha: p.alpha,
            a: p.start,
            a_tilde: p.start + delta,
            terminal: p.horizon,
            lipschitz: p.rhs.lipschitz,
            bound,
            init: p.init.clone(),
        };
        row.bound_d1 = Some(d1_bound(&inputs)?);
        row.bound_d2 = Some(d2_bound(&inputs)?);
        row.bound_envelope = gronwall_envelope(&inputs).ok();
        if plan.is_example_problem() {
            row.lower_bound = Some(if p.alpha <= 1.0 {
                example1_lower_bound(p.alpha, delta)?
            } else {
                example2_lower_bound(p.alpha, delta, p.horizon, p.start + delta)?
            });
        }
    }
    Ok(row)
}

/// Run every row of the plan on the current rayon pool.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepReport> {
    plan.validate()?;
    let base = solve_with_estimate(&plan.base, plan.solver.n_steps, plan)?;

    let (zero, outcomes) = rayon::join(
        || run_row(plan, &base, 0.0),
        || {
            plan.deltas
                .par_iter()
                .map(|&d| run_row(plan, &base, d))
                .collect::<Vec<_>>()
        },
    );

    let mut warnings = Vec::new();
    let zero_shift_diff = zero?.sup_diff.unwrap_or(f64::NAN);
    if !(zero_shift_diff <= 2.0 * plan.solver.tol_residual) {
        warnings.push(format!(
            "zero-shift check: sup_diff {zero_shift_diff:e} exceeds 2*tol_residual"
        ));
    }

    let rows: Vec<SweepRow> = plan
        .deltas
        .iter()
        .zip(outcomes)
        .map(|(&delta, outcome)| match outcome {
            Ok(row) => row,
            Err(e) => {
                warnings.push(format!("delta {delta:e}: {e}"));
                SweepRow {
                    delta,
                    sup_diff: None,
                    bound_d1: None,
                    bound_d2: None,
                    bound_envelope: None,
                    lower_bound: None,
                    error_estimate: None,
                    comparison_interval: plan.comparison_interval(delta),
                    status: RowStatus::Failed(e.to_string()),
                }
            }
        })
        .collect();

    let measured: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.sup_diff.map(|d| (r.delta, d)))
        .collect();
    for w in measured.windows(2) {
        if w[1].1 > w[0].1 {
            warnings.push(format!(
                "sup_diff grew from {:e} to {:e} as delta fell to {:e}",
                w[0].1, w[1].1, w[1].0
            ));
        }
    }
    if measured.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "only {} of {} rows succeeded",
            measured.len(),
            rows.len()
        )));
    }
    let (fitted_exponent, fit_r2) = fit_exponent(&measured)?;
    Ok(SweepReport {
        mode: plan.mode,
        comparison_interval: plan.comparison_interval(plan.deltas[0]),
        rows,
        fitted_exponent,
        fit_r2,
        predicted_exponent: plan.predicted_exponent(),
        zero_shift_diff,
        warnings,
    })
}

/// [`run_sweep`] on a dedicated pool of `threads` workers (`0` = rayon's default).
pub fn run_sweep_with_threads(plan: &SweepPlan, threads: usize) -> Result<SweepReport> {
    if threads == 0 {
        return run_sweep(plan);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_sweep(plan))
}
