//! Empirical order of the solver on y = t², whose right-hand side is
//! 2 t^{2-α} / Γ(3-α).
//!
//! cargo run --example convergence_order

use fracwell::ivp::{solve_ivp, SolverConfig};
use fracwell::problem::{FractionalIvp, RhsSpec};

fn main() -> fracwell::Result<()> {
    for alpha in [0.3, 0.5, 0.8, 1.2, 1.5, 1.8] {
        let rhs = RhsSpec::manufactured_quadratic(alpha, 0.0, 1.0);
        let p = FractionalIvp::new(alpha, 0.0, 1.0, vec![0.0; alpha.ceil() as usize], rhs)?;
        let mut prev: Option<f64> = None;
        let mut line = format!("alpha {alpha:<4}");
        for n in [128, 256, 512, 1024, 2048] {
            let traj = solve_ivp(&p, &SolverConfig::with_steps(n))?;
            let err = traj
                .nodes()
                .iter()
                .zip(traj.values())
                .map(|(t, y)| (y - t * t).abs())
                .fold(0.0, f64::max);
            if let Some(e) = prev {
                line.push_str(&format!("  {:.2}", (e / err).log2()));
            }
            prev = Some(err);
        }
        // for α > 1 the s^{2-α} factor in f caps the product rule at order 3 - α
        println!("{line}   (min(1+α, 2) = {:.2}, 3-α = {:.2})", (1.0 + alpha).min(2.0), 3.0 - alpha);
    }
    Ok(())
}
