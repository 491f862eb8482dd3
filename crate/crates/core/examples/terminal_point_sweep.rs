//! Terminal value problems: shift T, then shift a, and fit both exponents.
//!
//! cargo run --example terminal_point_sweep -- 0.4

use fracwell::ivp::SolverConfig;
use fracwell::problem::{FractionalTvp, RhsSpec};
use fracwell::special::ml;
use fracwell::sweep::{dyadic_deltas, run_sweep, SweepBase, SweepMode, SweepPlan};

fn main() -> fracwell::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let p = FractionalTvp::new(alpha, 0.0, 1.0, ml(alpha, 1.0)?, RhsSpec::linear(1.0))?;
    for mode in [SweepMode::TerminalShift, SweepMode::TvpStartShift] {
        let plan = SweepPlan::new(
            SweepBase::Tvp(p.clone()),
            mode,
            dyadic_deltas(1.0, 3..=8),
            SolverConfig::with_steps(2048),
        )?;
        let report = run_sweep(&plan)?;
        println!("{} on [{}, {}]", mode.name(), report.comparison_interval.0, report.comparison_interval.1);
        for r in &report.rows {
            println!("  delta {:>10.6}  sup_diff {:.4e}", r.delta, r.sup_diff.unwrap_or(f64::NAN));
        }
        println!(
            "  fitted {:.3} (r2 {:.4}), predicted {}",
            report.fitted_exponent, report.fit_r2, report.predicted_exponent
        );
    }
    Ok(())
}
