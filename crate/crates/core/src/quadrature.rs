//! Gauss-Legendre rules and a globally adaptive integrator for vector-valued integrands.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_traits::Float;
use core::f64::consts::PI;


/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn integrate_vec(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> Vec<f64>) -> Vec<f64> {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc: Vec<f64> = Vec::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            if acc.is_empty() {
                acc = alloc::vec![0.0; v.len()];
            }
            for (a, vi) in acc.iter_mut().zip(v) {
                *a += w * half * vi;
            }
        }
        acc
    }
}

/// Legendre `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: Vec<f64>,
    /// Sum over panels of `|coarse - fine|_inf`.
    pub error_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fine: Vec<f64>,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Legendre integration of a vector-valued `f` over the
/// partition `breaks`. Each panel compares the rule on the whole panel with the
/// rule on its two halves; the panel with the largest discrepancy is bisected until
/// the summed discrepancy drops below `rel_tol * |integral|_inf` (or `abs_floor`).
pub fn integrate_adaptive(
    rule: &GaussLegendre,
    breaks: &[f64],
    rel_tol: f64,
    abs_floor: f64,
    max_panels: usize,
    mut f: impl FnMut(f64) -> Vec<f64>,
) -> QuadratureResult {
    let mut eval = |a: f64, b: f64, coarse: Option<Vec<f64>>| -> Panel {
        let m = 0.5 * (a + b);
        let coarse = coarse.unwrap_or_else(|| rule.integrate_vec(a, b, &mut f));
        let left = rule.integrate_vec(a, m, &mut f);
        let right = rule.integrate_vec(m, b, &mut f);
        let fine: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let err = fine.iter().zip(&coarse).fold(0.0f64, |e, (x, y)| e.max((x - y).abs()));
        Panel { a, b, fine, err }
    };

    let mut heap: BinaryHeap<Panel> = breaks.windows(2).map(|w| eval(w[0], w[1], None)).collect();
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        let mut value: Vec<f64> = Vec::new();
        for p in heap.iter() {
            if value.is_empty() {
                value = alloc::vec![0.0; p.fine.len()];
            }
            for (v, x) in value.iter_mut().zip(&p.fine) {
                *v += x;
            }
        }
        let scale = value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let done = total_err <= (rel_tol * scale).max(abs_floor);
        if done || heap.len() >= max_panels {
            // sum in a fixed order for reproducibility
            let mut panels = heap.into_vec();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let mut value = alloc::vec![0.0; value.len()];
            for p in &panels {
                for (v, x) in value.iter_mut().zip(&p.fine) {
                    *v += x;
                }
            }
            return QuadratureResult {
                value,
                error_estimate: total_err,
                panels: panels.len(),
                converged: done,
            };
        }
        let worst = heap.pop().expect("nonempty partition");
        let m = 0.5 * (worst.a + worst.b);
        // the halves of `worst` were already integrated; recompute their halves only
        let left = eval(worst.a, m, None);
        let right = eval(m, worst.b, None);
        heap.push(left);
        heap.push(right);
    }
}

/// Evenly spaced breakpoints.
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 is integrated exactly by 8 points
        let v = gl.integrate(-1.0, 1.0, |x| x.powi(14) + x.powi(15));
        assert!((v - 2.0 / 15.0).abs() < 1e-15);
        assert!((gl.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_nodes_are_accurate() {
        let gl = GaussLegendre::new(64);
        let v = gl.integrate(0.0, PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let gl = GaussLegendre::new(16);
        // int_0^1 1 / (1e-4 + x^2) dx = atan(100) * 100
        let r = integrate_adaptive(&gl, &[0.0, 1.0], 1e-12, 0.0, 10_000, |x| {
            alloc::vec![1.0 / (1e-4 + x * x)]
        });
        assert!(r.converged);
        let exact = 100.0 * 100.0f64.atan();
        assert!((r.value[0] - exact).abs() / exact < 1e-11);
    }
}
