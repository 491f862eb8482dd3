//! Perturb the order, the initial value and the right-hand side in turn.
//! Each difference should shrink linearly in the perturbation.
//!
//! cargo run --example classical_perturbations

use fracwell::ivp::SolverConfig;
use fracwell::problem::{FractionalIvp, RhsSpec};
use fracwell::sweep::{dyadic_deltas, run_sweep, SweepBase, SweepMode, SweepPlan};

fn main() -> fracwell::Result<()> {
    for alpha in [0.7_f64, 1.5] {
        let mut init = vec![0.0; alpha.ceil() as usize];
        init[0] = 1.0;
        let p = FractionalIvp::new(alpha, 0.0, 1.0, init, RhsSpec::linear(1.0))?;
        for mode in [SweepMode::AlphaShift, SweepMode::InitShift, SweepMode::RhsScale] {
            // keep α - δ above ⌈α⌉ - 1
            let span = if mode == SweepMode::AlphaShift { 0.25 } else { 1.0 };
            let plan = SweepPlan::new(
                SweepBase::Ivp(p.clone()),
                mode,
                dyadic_deltas(span, 3..=8),
                SolverConfig::with_steps(1024),
            )?;
            let report = run_sweep(&plan)?;
            println!(
                "alpha {alpha} {:<12} fitted {:.3} (r2 {:.5})",
                mode.name(),
                report.fitted_exponent,
                report.fit_r2
            );
        }
    }
    Ok(())
}
