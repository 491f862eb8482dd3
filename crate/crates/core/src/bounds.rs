//! Explicit estimates for the difference of two solutions whose starting points differ.
//!
//! With `y` started at `a` and `ỹ` at `ã ≥ a`, `sup_{[ã,T]} |y - ỹ|` is bounded by
//! `(D1 + D2) E_α(L (T-a)^α)`, where `D1` collects the Taylor-part mismatch
//! (only present for `α > 1`) and `D2` the memory carried over `[a, ã]`.

use crate::error::{Error, Result};
use crate::problem::initial_value_count;
use crate::special::{gamma_unchecked, ml};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftBoundInputs {
    pub alpha: f64,
    pub a: f64,
    pub a_tilde: f64,
    pub terminal: f64,
    /// Lipschitz constant of `f` in `y`.
    pub lipschitz: f64,
    /// `sup |f|`.
    pub bound: f64,
    pub init: Vec<f64>,
}

impl ShiftBoundInputs {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.a, self.a_tilde, self.terminal, self.lipschitz, self.bound]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.init.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("bound inputs must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidProblem(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.a <= self.a_tilde && self.a_tilde < self.terminal) {
            return Err(Error::InvalidProblem(format!(
                "need a <= a_tilde < T, got a={}, a_tilde={}, T={}",
                self.a, self.a_tilde, self.terminal
            )));
        }
        if self.lipschitz < 0.0 || self.bound < 0.0 {
            return Err(Error::InvalidProblem("L and M must be >= 0".into()));
        }
        Ok(())
    }

    fn shift(&self) -> f64 {
        self.a_tilde - self.a
    }
}

/// Taylor-part mismatch: `0` for `α ≤ 1`, otherwise
/// `|ã - a| Σ_{k=1}^{⌈α⌉-1} |y_k| (T-a)^{k-1} / (k-1)!`.
pub fn d1_bound(inp: &ShiftBoundInputs) -> Result<f64> {
    inp.validate()?;
    if inp.alpha <= 1.0 {
        return Ok(0.0);
    }
    let span = inp.terminal - inp.a;
    let top = initial_value_count(inp.alpha).min(inp.init.len());
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..top {
        if k > 1 {
            term *= span / (k - 1) as f64;
        }
        sum += inp.init[k].abs() * term;
    }
    Ok(inp.shift().abs() * sum)
}

/// Memory carried over `[a, ã]`: `M (ã-a)^α / Γ(α+1)` for `α ≤ 1`, otherwise
/// `M (ã-a) (T-a)^{α-1} / Γ(α)`.
pub fn d2_bound(inp: &ShiftBoundInputs) -> Result<f64> {
    inp.validate()?;
    let d = inp.shift();
    if inp.alpha <= 1.0 {
        Ok(inp.bound * d.powf(inp.alpha) / gamma_unchecked(inp.alpha + 1.0))
    } else {
        let span = inp.terminal - inp.a;
        Ok(inp.bound * d * span.powf(inp.alpha - 1.0) / gamma_unchecked(inp.alpha))
    }
}

/// `(D1 + D2) E_α(L (T-a)^α)`.
pub fn gronwall_envelope(inp: &ShiftBoundInputs) -> Result<f64> {
    let base = d1_bound(inp)? + d2_bound(inp)?;
    let growth = ml(inp.alpha, inp.lipschitz * (inp.terminal - inp.a).powf(inp.alpha))?;
    Ok(base * growth)
}

/// Lower bound `δ^α / Γ(α+1)` for `D^α y = y`, `y(0) = 1`, `0 < α ≤ 1`.
pub fn example1_lower_bound(alpha: f64, a_shift: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("needs 0 < alpha <= 1, got {alpha}")));
    }
    if !(a_shift >= 0.0) {
        return Err(Error::Domain(format!("shift must be >= 0, got {a_shift}")));
    }
    Ok(a_shift.powf(alpha) / gamma_unchecked(alpha + 1.0))
}

/// Lower bound `(T-ã)^{α-1} δ / Γ(α)` for the same problem with `α > 1`.
pub fn example2_lower_bound(alpha: f64, a_shift: f64, terminal: f64, a_tilde: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("needs alpha > 1, got {alpha}")));
    }
    if !(a_shift >= 0.0) {
        return Err(Error::Domain(format!("shift must be >= 0, got {a_shift}")));
    }
    if !(terminal > a_tilde) {
        return Err(Error::Domain(format!("needs T > a_tilde, got T={terminal}, a_tilde={a_tilde}")));
    }
    Ok((terminal - a_tilde).powf(alpha - 1.0) * a_shift / gamma_unchecked(alpha))
}

/// Inhomogeneity `2 M (T̃-T)^α / Γ(α+1)` of the difference inequality for two
/// terminal value problems whose terminal points differ.
pub fn tvp_terminal_prebound(alpha: f64, f_sup: f64, terminal: f64, terminal_tilde: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("needs 0 < alpha <= 1, got {alpha}")));
    }
    if !(terminal_tilde >= terminal) || !(f_sup >= 0.0) {
        return Err(Error::Domain(format!(
            "needs T_tilde >= T and f_sup >= 0, got T={terminal}, T_tilde={terminal_tilde}, f_sup={f_sup}"
        )));
    }
    Ok(2.0 * f_sup * (terminal_tilde - terminal).powf(alpha) / gamma_unchecked(alpha + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(alpha: f64, a_tilde: f64, lipschitz: f64, bound: f64, init: Vec<f64>) -> ShiftBoundInputs {
        ShiftBoundInputs {
            alpha,
            a: 0.0,
            a_tilde,
            terminal: 1.0,
            lipschitz,
            bound,
            init,
        }
    }

    const D2_HALF: f64 = 0.564_189_583_547_756_3;

    #[test]
    fn d1_examples() {
        assert_eq!(d1_bound(&inputs(0.5, 0.3, 1.0, 1.0, vec![4.0])).unwrap(), 0.0);
        let v = d1_bound(&inputs(1.5, 0.1, 1.0, 1.0, vec![0.0, 2.0])).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
        assert_eq!(d1_bound(&inputs(1.5, 0.0, 1.0, 1.0, vec![0.0, 2.0])).unwrap(), 0.0);
        // third-order case: y_1 (T-a)^0/0! + y_2 (T-a)^1/1! with T - a = 2
        let mut inp = inputs(2.5, 0.1, 1.0, 1.0, vec![0.0, 1.0, 3.0]);
        inp.terminal = 2.0;
        assert!((d1_bound(&inp).unwrap() - 0.1 * (1.0 + 6.0)).abs() < 1e-14);
    }

    #[test]
    fn d2_examples() {
        let v = d2_bound(&inputs(0.5, 0.25, 0.0, 1.0, vec![0.0])).unwrap();
        assert!((v - D2_HALF).abs() < 1e-15);
        assert_eq!(d2_bound(&inputs(0.5, 0.0, 0.0, 1.0, vec![0.0])).unwrap(), 0.0);
        let v = d2_bound(&inputs(2.0, 0.1, 0.0, 1.0, vec![0.0, 0.0])).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn d2_is_homogeneous_in_the_shift() {
        for alpha in [0.2, 0.5, 0.9] {
            let one = d2_bound(&inputs(alpha, 0.1, 0.0, 1.0, vec![0.0])).unwrap();
            let two = d2_bound(&inputs(alpha, 0.2, 0.0, 1.0, vec![0.0])).unwrap();
            assert!((two / one - 2f64.powf(alpha)).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_examples() {
        let inp = inputs(0.5, 0.25, 0.0, 1.0, vec![0.0]);
        assert_eq!(gronwall_envelope(&inp).unwrap(), d2_bound(&inp).unwrap());
        assert!((gronwall_envelope(&inp).unwrap() - D2_HALF).abs() < 1e-15);
        assert_eq!(gronwall_envelope(&inputs(0.5, 0.0, 1.0, 1.0, vec![1.0])).unwrap(), 0.0);
        let inp = inputs(0.5, 0.25, 1.0, 2.0, vec![1.0]);
        let want = 2.0 * D2_HALF * 5.008_980_080_762_283;
        assert!((gronwall_envelope(&inp).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn lower_bound_examples() {
        assert!((example1_lower_bound(1.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((example1_lower_bound(0.5, 0.25).unwrap() - D2_HALF).abs() < 1e-15);
        assert_eq!(example1_lower_bound(0.5, 0.0).unwrap(), 0.0);
        assert!(example1_lower_bound(1.5, 0.1).is_err());

        assert!((example2_lower_bound(2.0, 0.1, 1.0, 0.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(example2_lower_bound(1.5, 0.0, 1.0, 0.0).unwrap(), 0.0);
        let v = example2_lower_bound(1.5, 0.1, 4.0, 0.0).unwrap();
        assert!((v - 0.225_675_833_419_102_5).abs() < 1e-15);
        assert!(example2_lower_bound(0.5, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn terminal_prebound_examples() {
        assert_eq!(tvp_terminal_prebound(0.5, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let v = tvp_terminal_prebound(0.5, 1.0, 1.0, 1.25).unwrap();
        assert!((v - 2.0 * D2_HALF).abs() < 1e-14);
        assert!((tvp_terminal_prebound(1.0, 3.0, 0.0, 0.5).unwrap() - 3.0).abs() < 1e-15);
        assert!(tvp_terminal_prebound(0.5, 1.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(d2_bound(&inputs(0.5, 1.0, 0.0, 1.0, vec![0.0])).is_err());
        assert!(d2_bound(&inputs(0.5, -0.1, 0.0, 1.0, vec![0.0])).is_err());
        assert!(d2_bound(&inputs(0.5, 0.1, -1.0, 1.0, vec![0.0])).is_err());
    }
}
