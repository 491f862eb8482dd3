//! Move the starting point of D^α y = y, y(a) = 1 and watch the solution move.
//!
//! Prints each row with the explicit upper envelope and the lower bound, then
//! the fitted exponent next to min(α, 1).
//!
//! cargo run --example starting_point_sweep -- 0.5

use fracwell::ivp::SolverConfig;
use fracwell::problem::{FractionalIvp, RhsSpec};
use fracwell::sweep::{dyadic_deltas, run_sweep, SweepBase, SweepMode, SweepPlan};

fn main() -> fracwell::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let mut init = vec![0.0; alpha.ceil() as usize];
    init[0] = 1.0;
    let p = FractionalIvp::new(alpha, 0.0, 1.0, init, RhsSpec::linear(1.0))?;
    let plan = SweepPlan::new(
        SweepBase::Ivp(p),
        SweepMode::StartShift,
        dyadic_deltas(1.0, 3..=8),
        SolverConfig::with_steps(4096),
    )?;
    let report = run_sweep(&plan)?;

    println!("{:>10} {:>12} {:>12} {:>12}", "delta", "lower", "sup_diff", "envelope");
    for r in &report.rows {
        println!(
            "{:>10.6} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.delta,
            r.lower_bound.unwrap_or(f64::NAN),
            r.sup_diff.unwrap_or(f64::NAN),
            r.bound_envelope.unwrap_or(f64::NAN)
        );
    }
    println!(
        "fitted exponent {:.3} (r2 {:.4}), predicted {}",
        report.fitted_exponent, report.fit_r2, report.predicted_exponent
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
