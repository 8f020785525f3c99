//! Gauss–Legendre rules and the composite/graded integrators built on them.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule by Newton iteration on the Legendre
    /// polynomial, exact for polynomials of degree `2 * order - 1`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        s * half
    }

    /// Mean of `f` over the box `[lo, hi]` with the tensor-product rule.
    pub fn box_mean<F: Fn(&[f64]) -> f64>(&self, lo: &[f64], hi: &[f64], f: F) -> f64 {
        let dim = lo.len();
        let q = self.order();
        let mut idx = vec![0usize; dim];
        let mut point = vec![0.0; dim];
        let mut acc = 0.0;
        loop {
            let mut w = 1.0;
            for d in 0..dim {
                let half = 0.5 * (hi[d] - lo[d]);
                point[d] = lo[d] + half * (1.0 + self.nodes[idx[d]]);
                w *= 0.5 * self.weights[idx[d]];
            }
            acc += w * f(&point);
            let mut d = 0;
            loop {
                if d == dim {
                    return acc;
                }
                idx[d] += 1;
                if idx[d] < q {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if order == 0 { 1.0 } else { p1 };
    let dp = order as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Composite rule on `panels` equal sub-intervals of `[a, b]`.
pub fn composite<F: Fn(f64) -> f64>(rule: &GaussLegendre, a: f64, b: f64, panels: usize, f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// Integral over `[0, b]` on a mesh graded geometrically toward 0, suited to
/// integrands like `r^alpha g(r)` that are smooth only away from the origin.
pub fn graded_from_zero<F: Fn(f64) -> f64>(rule: &GaussLegendre, b: f64, levels: usize, f: F) -> f64 {
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &f);
        hi = lo;
    }
    acc + rule.integrate(0.0, hi, &f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for order in [1, 2, 5, 8, 16, 32] {
            let r = GaussLegendre::new(order);
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "order {order}: {s}");
        }
    }

    #[test]
    fn exact_for_degree_2q_minus_1() {
        let r = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = r.integrate(0.0, 1.0, |x| x.powi(deg));
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn box_mean_of_separable_monomial() {
        let r = GaussLegendre::new(8);
        let m = r.box_mean(&[0.0, 1.0], &[1.0, 3.0], |p| p[0] * p[0] * p[1]);
        // mean of x² over [0,1] times mean of y over [1,3]
        assert!((m - (1.0 / 3.0) * 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_handles_root_singularity() {
        let r = GaussLegendre::new(16);
        let got = graded_from_zero(&r, 1.0, 60, |x| x.powf(0.3));
        assert!((got - 1.0 / 1.3).abs() < 1e-13);
    }
}
