//! Solve D^α y = y, y(0) = 1 on [0, 1] and compare with y = E_α(t^α).
//!
//! cargo run --example solve_ivp -- 0.5

use fracwell::ivp::{ml_linear_solution, residual_check, solve_ivp, SolverConfig};
use fracwell::problem::{FractionalIvp, RhsSpec};

fn main() -> fracwell::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let mut init = vec![0.0; alpha.ceil() as usize];
    init[0] = 1.0;
    let p = FractionalIvp::new(alpha, 0.0, 1.0, init, RhsSpec::linear(1.0))?;

    println!("{:>6} {:>14} {:>10}", "n", "max error", "residual");
    for n in [64, 256, 1024, 4096] {
        let cfg = SolverConfig::with_steps(n);
        let traj = solve_ivp(&p, &cfg)?;
        let mut err = 0.0_f64;
        for (t, y) in traj.nodes().iter().zip(traj.values()) {
            err = err.max((y - ml_linear_solution(alpha, 0.0, 1.0, 1.0, *t)?).abs());
        }
        println!("{n:>6} {err:>14.3e} {:>10.1e}", residual_check(&p, &traj)?);
    }
    Ok(())
}
