//! Caputo fractional initial and terminal value problems, with sweeps that
//! measure how solutions move when the problem data move.
//!
//! Start with [`ivp::solve_ivp`] and [`tvp::solve_tvp_fredholm`]; the
//! perturbation experiments live in [`sweep`] and the explicit estimates they
//! are checked against in [`bounds`].

pub mod bounds;
pub mod cli;
pub mod error;
pub mod ivp;
pub mod problem;
mod quadrature;
pub mod special;
pub mod sweep;
pub mod tvp;

pub use error::{Error, Result};
pub use ivp::{residual_check, solve_ivp, SolverConfig};
pub use problem::{FractionalIvp, FractionalTvp, RhsBound, RhsKind, RhsSpec, Trajectory};
pub use special::{gamma_fn, ml};
pub use sweep::{run_sweep, SweepMode, SweepPlan, SweepReport};
pub use tvp::{solve_tvp_fredholm, solve_tvp_shooting, TvpMethod, TvpSolution};

/// Seventeen significant digits, enough for a lossless `f64` round trip.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}
