//! Tabulate E_α(z) and check the two closed-form orders.
//!
//! cargo run --example mittag_leffler

use fracwell::special::{gamma_fn, ml};

fn main() -> fracwell::Result<()> {
    println!("{:>6} {:>8} {:>24}", "alpha", "z", "E_alpha(z)");
    for alpha in [0.3, 0.5, 0.8, 1.5] {
        for z in [-2.0, -0.5, 0.5, 1.0, 4.0] {
            println!("{alpha:>6} {z:>8} {:>24.16e}", ml(alpha, z)?);
        }
    }

    let worst_exp = (-100..=100)
        .map(|i| i as f64 / 10.0)
        .map(|z| (ml(1.0, z).unwrap() - z.exp()).abs() / z.abs().exp())
        .fold(0.0, f64::max);
    let worst_cosh = (0..=250)
        .map(|i| i as f64 / 10.0)
        .map(|z: f64| (ml(2.0, z).unwrap() - z.sqrt().cosh()).abs())
        .fold(0.0, f64::max);
    println!("E_1 vs exp, scaled error on [-10, 10]: {worst_exp:.2e}");
    println!("E_2 vs cosh(sqrt z) on [0, 25]:       {worst_cosh:.2e}");
    println!("Gamma(1.5) = {:.17}", gamma_fn(1.5)?);

    // outside the supported region the series is refused rather than trusted
    match ml(0.2, -40.0) {
        Ok(v) => println!("E_0.2(-40) = {v}"),
        Err(e) => println!("E_0.2(-40): {e}"),
    }
    Ok(())
}
