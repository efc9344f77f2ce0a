//! Gauss–Legendre rules: fixed composite panels and an adaptive bisection
//! driver for slowly decaying oscillatory integrands.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on `P_n`, seeded with the
    /// Chebyshev-like guess `cos(π(i − ¼)/(n + ½))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// Composite rule: `[a, b]` cut into `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(&mut f, lo, lo + h)
            })
            .sum()
    }

    /// Node/weight pairs of the composite rule, in increasing node order.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let half = 0.5 * h;
        let mut out = Vec::with_capacity(panels * self.len());
        for k in 0..panels {
            let mid = a + h * (k as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, w * half));
            }
        }
        out
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Outcome of [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveEstimate {
    pub value: f64,
    /// Sum of the per-panel `|coarse − refined|` differences.
    pub error: f64,
    pub panels: usize,
}

/// Adaptive Gauss–Legendre integration by panel halving.
///
/// The interval is first cut into `initial_panels` equal panels. A panel is
/// accepted when one application of the rule and the sum over its two halves
/// differ by at most its share (`width / (b − a)`) of `abs_tol`; otherwise it
/// is halved. Accepted contributions are summed in left-to-right order, so
/// the result is bit-stable.
pub fn adaptive<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    max_panels: usize,
) -> Result<AdaptiveEstimate> {
    let total_width = b - a;
    let h = total_width / initial_panels.max(1) as f64;
    // Stack of (lo, hi, whole-panel estimate); popped depth-first, left child last pushed.
    let mut stack: Vec<(f64, f64, f64)> = Vec::new();
    for k in (0..initial_panels.max(1)).rev() {
        let lo = a + h * k as f64;
        let hi = if k + 1 == initial_panels.max(1) {
            b
        } else {
            lo + h
        };
        stack.push((lo, hi, rule.integrate(&mut f, lo, hi)));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut visited = 0usize;
    while let Some((lo, hi, whole)) = stack.pop() {
        visited += 1;
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut f, lo, mid);
        let right = rule.integrate(&mut f, mid, hi);
        let diff = (left + right - whole).abs();
        let share = abs_tol * (hi - lo) / total_width;
        if diff <= share || (hi - lo) <= 1e-12 * total_width.abs() {
            value += left + right;
            error += diff;
            panels += 1;
        } else {
            if visited > max_panels {
                return Err(Error::Convergence {
                    iterations: visited,
                    estimate: error + diff,
                });
            }
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    Ok(AdaptiveEstimate {
        value,
        error,
        panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_point_rule_matches_tabulated_values() {
        let rule = GaussLegendre::new(8);
        // Abramowitz & Stegun 25.4.30, n = 8.
        let x = [0.960_289_856_497_536_2, 0.796_666_477_413_626_7];
        let w = [0.101_228_536_290_376_3, 0.222_381_034_453_374_5];
        assert!((rule.nodes()[7] - x[0]).abs() < 1e-15);
        assert!((rule.nodes()[6] - x[1]).abs() < 1e-15);
        assert!((rule.weights()[7] - w[0]).abs() < 1e-15);
        assert!((rule.weights()[6] - w[1]).abs() < 1e-15);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..12 {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let got = rule.integrate(|x| x.powi(deg as i32) + x.powi(deg as i32 - 1), 0.0, 1.0);
            let want = 1.0 / (deg as f64 + 1.0) + 1.0 / deg as f64;
            assert!((got - want).abs() < 1e-13, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn composite_points_reproduce_composite_sum() {
        let rule = GaussLegendre::new(5);
        let pts = rule.composite_points(0.0, PI, 7);
        let a: f64 = pts.iter().map(|(x, w)| w * x.sin()).sum();
        let b = rule.composite(f64::sin, 0.0, PI, 7);
        assert!((a - b).abs() < 1e-14);
        assert!((a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_a_sharp_peak() {
        let rule = GaussLegendre::new(8);
        let eps = 1e-3;
        let est = adaptive(
            &rule,
            |x| eps / (x * x + eps * eps),
            -1.0,
            1.0,
            2,
            1e-12,
            10_000,
        )
        .unwrap();
        let want = 2.0 * (1.0 / eps).atan();
        assert!(
            (est.value - want).abs() < 1e-10,
            "{} vs {}",
            est.value,
            want
        );
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let rule = GaussLegendre::new(2);
        let err = adaptive(&rule, |x| (1.0 / x).sin(), 1e-9, 1.0, 1, 1e-14, 50).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }
}
