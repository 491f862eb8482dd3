//! The starting-point estimate term by term.
//!
//! For f ≡ 1 the difference is known in closed form and meets D2 exactly;
//! for f = y the E_α growth factor makes the envelope loose but valid.
//!
//! cargo run --example gronwall_envelope

use fracwell::bounds::{d1_bound, d2_bound, example1_lower_bound, gronwall_envelope, ShiftBoundInputs};
use fracwell::special::{gamma_fn, ml};

fn main() -> fracwell::Result<()> {
    let alpha = 0.5;
    println!("f = 1, alpha {alpha}");
    for shift in [0.25, 0.125, 0.0625] {
        let inp = ShiftBoundInputs {
            alpha,
            a: 0.0,
            a_tilde: shift,
            terminal: 1.0,
            lipschitz: 0.0,
            bound: 1.0,
            init: vec![0.0],
        };
        // y(t) = t^α/Γ(α+1), ỹ(t) = (t-ã)^α/Γ(α+1); the gap peaks at t = ã
        let exact = shift.powf(alpha) / gamma_fn(alpha + 1.0)?;
        println!("  shift {shift:<7} exact {exact:.15}  D2 {:.15}", d2_bound(&inp)?);
    }

    println!("f = y, y(0) = 1, M = sup|y| = E_alpha(1)");
    for alpha in [0.5_f64, 1.5] {
        let mut init = vec![0.0; alpha.ceil() as usize];
        init[0] = 1.0;
        let inp = ShiftBoundInputs {
            alpha,
            a: 0.0,
            a_tilde: 0.125,
            terminal: 1.0,
            lipschitz: 1.0,
            bound: ml(alpha, 1.0)?,
            init,
        };
        let lower = if alpha <= 1.0 {
            format!("{:.4}", example1_lower_bound(alpha, 0.125)?)
        } else {
            "-".to_string()
        };
        println!(
            "  alpha {alpha}: D1 {:.4}  D2 {:.4}  envelope {:.4}  lower {lower}",
            d1_bound(&inp)?,
            d2_bound(&inp)?,
            gronwall_envelope(&inp)?
        );
    }
    Ok(())
}
