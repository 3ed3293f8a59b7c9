//! Gauss-Legendre rules and the integrators built on them.
//!
//! Nodes are computed by Newton iteration on the three-term Legendre
//! recurrence, seeded with the large-n asymptotic approximation of the zeros.
//! The rule is fully determined by `n`, so repeated calls return bitwise
//! identical nodes and weights.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{ensure_finite, invalid, Result};

pub const MAX_ORDER: usize = 2048;

/// Nodes and weights of an interpolatory rule on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Value of `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Order-`n` Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(invalid(format!("quadrature order must lie in 1..={MAX_ORDER}, got {n}")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    if n == 1 {
        weights[0] = 2.0;
        return Ok(QuadratureRule { nodes, weights, lo: -1.0, hi: 1.0 });
    }
    let nf = n as f64;
    for i in 0..n / 2 {
        // i-th largest zero; the asymptotic guess is accurate to O(n^-4).
        let theta = PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p1) = legendre_pair(n, x);
            dp = nf * (x * p - p1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                let (p, p1) = legendre_pair(n, x);
                dp = nf * (x * p - p1) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, p1) = legendre_pair(n, 0.0);
        // P_n'(0) = n P_{n-1}(0)
        let dp = nf * p1;
        weights[n / 2] = 2.0 / (dp * dp);
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights, lo: -1.0, hi: 1.0 })
}

/// Affinely transports `rule` from its own domain onto `[lo, hi]`.
pub fn map_rule(rule: &QuadratureRule, lo: f64, hi: f64) -> Result<QuadratureRule> {
    ensure_finite("lo", lo)?;
    ensure_finite("hi", hi)?;
    if lo >= hi {
        return Err(invalid(format!("empty interval [{lo}, {hi}]")));
    }
    let (a, b) = rule.domain();
    let scale = (hi - lo) / (b - a);
    let nodes = rule.nodes.iter().map(|&x| lo + (x - a) * scale).collect();
    let weights = rule.weights.iter().map(|&w| w * scale).collect();
    Ok(QuadratureRule { nodes, weights, lo, hi })
}

/// Concatenation of Gauss-Legendre panels; `panels` lists `(lo, hi, order)`.
pub fn composite(panels: &[(f64, f64, usize)]) -> Result<QuadratureRule> {
    let first = panels.first().ok_or_else(|| invalid("no panels"))?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut prev_hi = first.0;
    for &(lo, hi, order) in panels {
        if lo != prev_hi {
            return Err(invalid("panels must be contiguous"));
        }
        let mapped = map_rule(&gauss_legendre(order)?, lo, hi)?;
        nodes.extend_from_slice(&mapped.nodes);
        weights.extend_from_slice(&mapped.weights);
        prev_hi = hi;
    }
    Ok(QuadratureRule { nodes, weights, lo: first.0, hi: prev_hi })
}

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const PANEL_ORDER: usize = 20;
const MAX_PANELS: usize = 4000;

fn panel_estimate<F: Fn(f64) -> f64>(f: &F, rule: &QuadratureRule, a: f64, b: f64) -> (f64, f64) {
    let gl = |lo: f64, hi: f64| {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        h * rule.integrate(|x| f(c + h * x))
    };
    let m = 0.5 * (a + b);
    let coarse = gl(a, b);
    let fine = gl(a, m) + gl(m, b);
    (fine, (fine - coarse).abs())
}

/// Globally adaptive Gauss-Legendre integration of `f` over `[a, b]`.
///
/// `breaks` are interior points where `f` or its derivatives jump; they seed
/// the initial partition. The panel with the largest error estimate is bisected
/// until the summed estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if !(b > a) {
        return Integral { value: 0.0, error: 0.0 };
    }
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(PANEL_ORDER).expect("fixed panel order is valid"));
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&c| c > a && c < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    // (lo, hi, value, error)
    let mut panels: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = panel_estimate(&f, rule, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || panels.len() >= MAX_PANELS {
            let mut sorted = panels.clone();
            sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
            let value = sorted.iter().map(|p| p.2).sum();
            return Integral { value, error };
        }
        let (worst, _) =
            panels.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // interval exhausted at machine resolution
            panels.push((lo, hi, 0.0, 0.0));
            continue;
        }
        let (v1, e1) = panel_estimate(&f, rule, lo, mid);
        let (v2, e2) = panel_estimate(&f, rule, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_have_closed_forms() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[2.0]);

        let r2 = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes()[0] + s).abs() < 1e-15);
        assert!((r2.nodes()[1] - s).abs() < 1e-15);
        assert!((r2.weights()[0] - 1.0).abs() < 1e-15);
        assert!((r2.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sixteen_points_integrate_x10() {
        let r = gauss_legendre(16).unwrap();
        let v = r.integrate(|x| x.powi(10));
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn order_out_of_range() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(MAX_ORDER + 1).is_err());
        assert!(gauss_legendre(MAX_ORDER).is_ok());
    }

    #[test]
    fn rule_invariants_up_to_max_order() {
        for n in [3, 17, 200, 1024, 2048] {
            let r = gauss_legendre(n).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 2e-13, "n={n} sum={sum}");
            assert!(r.weights().iter().all(|&w| w > 0.0));
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
        }
    }

    #[test]
    fn monomial_exactness() {
        for n in 1..=64 {
            let r = gauss_legendre(n).unwrap();
            for k in 0..2 * n {
                let q = r.integrate(|x| x.powi(k as i32));
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                let scale = r.integrate(|x| x.abs().powi(k as i32)).max(exact);
                assert!((q - exact).abs() <= 1e-12 * scale, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = gauss_legendre(333).unwrap();
        let b = gauss_legendre(333).unwrap();
        assert!(a.nodes().iter().zip(b.nodes()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn mapping() {
        let base = gauss_legendre(5).unwrap();
        let m = map_rule(&base, 0.0, 2.0).unwrap();
        for (x, y) in base.nodes().iter().zip(m.nodes()) {
            assert!((y - (x + 1.0)).abs() < 1e-15);
        }
        assert_eq!(base.weights(), m.weights());

        let m2 = map_rule(&gauss_legendre(2).unwrap(), 0.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((m2.nodes()[0] - (1.0 - s) / 2.0).abs() < 1e-15);
        assert!((m2.nodes()[1] - (1.0 + s) / 2.0).abs() < 1e-15);
        assert!((m2.weights()[0] - 0.5).abs() < 1e-15);

        let m8 = map_rule(&gauss_legendre(8).unwrap(), -3.0, 5.0).unwrap();
        let sum: f64 = m8.weights().iter().sum();
        assert!((sum - 8.0).abs() < 1e-13 * 8.0);

        assert!(map_rule(&base, f64::NAN, 1.0).is_err());
        assert!(map_rule(&base, 0.0, f64::INFINITY).is_err());
        assert!(map_rule(&base, 1.0, 1.0).is_err());
    }

    #[test]
    fn adaptive_handles_kinks_and_peaks() {
        let v = integrate_adaptive(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1e-15, 1e-15);
        assert!((v.value - 2.5).abs() < 1e-14);
        // narrow Lorentzian, total mass pi
        let eps = 1e-4;
        let v = integrate_adaptive(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, &[], 1e-13, 1e-13);
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v.value - exact).abs() < 1e-11, "{} vs {exact}", v.value);
    }
}
