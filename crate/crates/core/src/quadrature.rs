//! Product-integration weights for the weakly singular kernel `(t - s)^{α-1}`.
//!
//! On each interval the smooth factor is replaced by its linear interpolant and
//! the kernel is integrated against it in closed form, so neither the `s = t`
//! singularity nor far-history cancellation needs numerical quadrature.

/// `x^p - y^p` for `x = y + h`, `h > 0`, without cancellation.
fn pow_diff(y: f64, h: f64, p: f64) -> f64 {
    if y == 0.0 {
        h.powf(p)
    } else {
        y.powf(p) * (p * (h / y).ln_1p()).exp_m1()
    }
}

/// Weights `(w_left, w_right)` such that
/// `∫ (t-s)^{α-1} g(s) ds ≈ w_left g(s_j) + w_right g(s_{j+1})` over `[s_j, s_{j+1}]`,
/// exact for linear `g`. Distances are `u_left = t - s_j > u_right = t - s_{j+1} ≥ 0`.
pub(crate) fn interval_weights(u_left: f64, u_right: f64, alpha: f64) -> (f64, f64) {
    let h = u_left - u_right;
    debug_assert!(h > 0.0 && u_right >= 0.0);
    if u_right == 0.0 {
        let ha = h.powf(alpha);
        return (ha / (alpha + 1.0), ha / (alpha * (alpha + 1.0)));
    }
    // ∫ u^{α-1} du and ∫ u^α du over [u_right, u_left]
    let i0 = pow_diff(u_right, h, alpha) / alpha;
    let i1 = pow_diff(u_right, h, alpha + 1.0) / (alpha + 1.0);
    let w_left = (i1 - u_right * i0) / h;
    let w_right = (u_left * i0 - i1) / h;
    (w_left, w_right)
}

/// `∫_{s_j}^{s_{j+1}} (t-s)^{α-1} ds` (product-rectangle weight).
pub(crate) fn interval_mass(u_left: f64, u_right: f64, alpha: f64) -> f64 {
    pow_diff(u_right, u_left - u_right, alpha) / alpha
}

/// Weights on arbitrary nodes `s_0 < … < s_m = t` for `∫_{s_0}^{t} (t-s)^{α-1} g(s) ds`.
pub(crate) fn product_trapezoid_weights(nodes: &[f64], alpha: f64) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    if m < 2 {
        return w;
    }
    let t = nodes[m - 1];
    for j in 0..m - 1 {
        let (wl, wr) = interval_weights(t - nodes[j], t - nodes[j + 1], alpha);
        w[j] += wl;
        w[j + 1] += wr;
    }
    w
}

/// Unit-step weight tables for a uniform grid, scaled by `h^α` at use.
///
/// For target node `n ≥ 1` the corrector weight of node `j` is
/// `end[n]` for `j = 0`, `interior[n - j]` for `1 ≤ j < n` and `interior[0]` for `j = n`.
#[derive(Debug, Clone)]
pub(crate) struct UniformWeights {
    /// `interior[0]` is the self weight; `interior[m]` (m ≥ 1) couples nodes `m` steps apart.
    pub interior: Vec<f64>,
    /// Weight of the first node when the target is `n` steps away.
    pub end: Vec<f64>,
    /// Product-rectangle predictor weight for a node `m + 1` steps behind the target.
    pub rect: Vec<f64>,
}

impl UniformWeights {
    pub fn new(n: usize, alpha: f64) -> Self {
        // left/right weights of the interval whose right end is d steps before the target
        let lr: Vec<(f64, f64)> = (0..=n)
            .map(|d| interval_weights((d + 1) as f64, d as f64, alpha))
            .collect();
        let mut interior = vec![0.0; n + 1];
        let mut end = vec![0.0; n + 1];
        interior[0] = lr[0].1;
        for m in 1..=n {
            interior[m] = lr[m - 1].0 + lr[m].1;
            end[m] = lr[m - 1].0;
        }
        let rect = (0..=n)
            .map(|d| interval_mass((d + 1) as f64, d as f64, alpha))
            .collect();
        UniformWeights {
            interior,
            end,
            rect,
        }
    }

    /// `Σ_j A_n(j) g_j` over `g[0..n]` (excluding the self term of node `n`).
    pub fn history(&self, n: usize, g: &[f64]) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.end[n] * g[0];
        for j in 1..n {
            acc += self.interior[n - j] * g[j];
        }
        acc
    }

    /// Product-rectangle sum predicting node `n` from `g[0..n]`.
    pub fn rect_history(&self, n: usize, g: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (j, gj) in g.iter().enumerate().take(n) {
            acc += self.rect[n - 1 - j] * gj;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // composite Gauss-Legendre on a graded mesh, used only as an oracle
    fn oracle_integral(t: f64, alpha: f64, g: impl Fn(f64) -> f64) -> f64 {
        // substitute s = t - u^(1/alpha) to remove the singularity:
        // ∫_0^t (t-s)^{α-1} g(s) ds = (1/α) ∫_0^{t^α} g(t - v^{1/α}) dv
        let top = t.powf(alpha);
        let nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let panels = 2000;
        let hp = top / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * hp;
            for (x, w) in nodes.iter().zip(weights) {
                let v: f64 = mid + 0.5 * hp * x;
                acc += w * 0.5 * hp * g(t - v.powf(1.0 / alpha));
            }
        }
        acc / alpha
    }

    #[test]
    fn weights_integrate_linear_functions_exactly() {
        for alpha in [0.3, 0.5, 0.9, 1.0, 1.5] {
            let nodes: Vec<f64> = vec![0.0, 0.1, 0.25, 0.4, 0.7, 1.0];
            let w = product_trapezoid_weights(&nodes, alpha);
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0 / alpha).abs() < 1e-14, "alpha={alpha}");
            // g(s) = s: ∫ (1-s)^{α-1} s ds = 1/(α(α+1))
            let lin: f64 = w.iter().zip(&nodes).map(|(wi, s)| wi * s).sum();
            assert!((lin - 1.0 / (alpha * (alpha + 1.0))).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_converge_for_smooth_integrands() {
        let alpha = 0.4;
        let want = oracle_integral(1.0, alpha, |s| s.cos());
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let w = product_trapezoid_weights(&nodes, alpha);
            let got: f64 = w.iter().zip(&nodes).map(|(wi, s)| wi * s.cos()).sum();
            let err = (got - want).abs();
            assert!(err < prev / 3.5, "n={n} err={err} prev={prev}");
            prev = err;
        }
    }

    #[test]
    fn uniform_tables_match_general_weights() {
        let alpha = 0.6;
        let n = 40;
        let tables = UniformWeights::new(n, alpha);
        for target in [1, 2, 7, 40] {
            let nodes: Vec<f64> = (0..=target).map(|i| i as f64).collect();
            let general = product_trapezoid_weights(&nodes, alpha);
            let g: Vec<f64> = (0..=target).map(|i| (i as f64 * 0.37).sin() + 2.0).collect();
            let from_table = tables.history(target, &g) + tables.interior[0] * g[target];
            let direct: f64 = general.iter().zip(&g).map(|(w, x)| w * x).sum();
            assert!((from_table - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn far_history_weights_are_accurate() {
        let alpha = 0.5;
        let d = 4000.0_f64;
        let (wl, wr) = interval_weights(d + 1.0, d, alpha);
        // midpoint expansion: kernel ≈ (d+0.5)^{α-1}, both weights ≈ half the mass
        let mass = interval_mass(d + 1.0, d, alpha);
        assert!((wl + wr - mass).abs() < 1e-15);
        assert!(((wl - wr) / mass).abs() < 1e-3);
        // the kernel grows toward t, so the node nearer t carries more weight
        assert!(wr > wl);
    }
}
