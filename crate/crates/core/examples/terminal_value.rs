//! A terminal value problem solved twice: Fredholm fixed point and shooting.
//!
//! With f = y and y(1) = E_α(1) the solution is E_α(t^α), so y(0) should come back as 1.
//!
//! cargo run --example terminal_value

use fracwell::ivp::SolverConfig;
use fracwell::problem::{FractionalTvp, RhsSpec};
use fracwell::special::ml;
use fracwell::sweep::sup_diff;
use fracwell::tvp::{solve_tvp_fredholm, solve_tvp_shooting};

fn main() -> fracwell::Result<()> {
    let cfg = SolverConfig::with_steps(1024);
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let p = FractionalTvp::new(alpha, 0.0, 1.0, ml(alpha, 1.0)?, RhsSpec::linear(1.0))?;
        let fr = solve_tvp_fredholm(&p, &cfg)?;
        let sh = solve_tvp_shooting(&p, &cfg)?;
        println!(
            "alpha {alpha}: y(0) fredholm {:.8} ({} sweeps), shooting {:.8} ({} solves), gap {:.1e}",
            fr.recovered_initial,
            fr.iterations,
            sh.recovered_initial,
            sh.iterations,
            sup_diff(&fr.traj, &sh.traj, 0.0, 1.0)?
        );
    }
    Ok(())
}
