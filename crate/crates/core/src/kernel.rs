//! Deformed hyperbolic activation and the kernels derived from it.
//!
//! `g(x) = (e^{λx} − q e^{−λx}) / (e^{λx} + q e^{−λx})` is a shifted `tanh`;
//! `M(x) = (g(x+1) − g(x−1)) / 4` is a bell-shaped density; averaging `M` for
//! `q` and `1/q` gives the even kernel `Φ`, and `Z(x) = Π Φ(x_i)` is its
//! separable multivariate extension. Integer translates of `Φ` sum to one.

use crate::error::{Error, Result};

/// Default upper bound on the discarded lattice tail mass.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_TRUNC_RADIUS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    q: f64,
    lambda: f64,
    trunc_radius: usize,
    tail_tol: f64,
}

impl KernelParams {
    pub fn new(q: f64, lambda: f64, trunc_radius: usize) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::param("q", format!("must be positive and finite, got {q}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if trunc_radius < 1 {
            return Err(Error::param("trunc_radius", "must be at least 1"));
        }
        Ok(Self {
            q,
            lambda,
            trunc_radius,
            tail_tol: DEFAULT_TAIL_TOLERANCE,
        })
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::param("tail_tol", format!("must be positive, got {tol}")));
        }
        self.tail_tol = tol;
        Ok(self)
    }

    pub fn with_trunc_radius(mut self, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::param("trunc_radius", "must be at least 1"));
        }
        self.trunc_radius = k;
        Ok(self)
    }

    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn trunc_radius(&self) -> usize {
        self.trunc_radius
    }
    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tol
    }

    /// Same slope and cutoff with `q` replaced by `1/q`.
    pub fn reciprocal(&self) -> Self {
        Self {
            q: 1.0 / self.q,
            ..*self
        }
    }

    /// Analytic bound on `Σ_{|k|>K} Φ(x − k)` from the exponential tails of `g`:
    /// `1 − g(y) ≤ 2q e^{−2λy}` and `1 + g(−y) ≤ (2/q) e^{−2λy}`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let k = self.trunc_radius as f64;
        let two_l = 2.0 * self.lambda;
        let spread = (self.q + 1.0 / self.q) * (1.0 + (-two_l).exp()) / 4.0;
        spread * ((-two_l * (k - x)).exp() + (-two_l * (k + x)).exp())
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            q: 1.0,
            lambda: 1.0,
            trunc_radius: DEFAULT_TRUNC_RADIUS,
            tail_tol: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// Multi-index `k ∈ Z^N` of a lattice cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `g_{q,λ}(x)`, evaluated without forming `e^{λx}`.
pub fn eval_g(p: &KernelParams, x: f64) -> f64 {
    let lx = p.lambda * x;
    if lx >= 0.0 {
        let e = p.q * (-2.0 * lx).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        let e = (2.0 * lx).exp();
        (e - p.q) / (e + p.q)
    }
}

/// `g'(x) = 4λq / (e^{λx} + q e^{−λx})²`.
pub fn eval_g_prime(p: &KernelParams, x: f64) -> f64 {
    let lx = p.lambda * x;
    if lx >= 0.0 {
        let e = (-2.0 * lx).exp();
        4.0 * p.lambda * p.q * e / (1.0 + p.q * e).powi(2)
    } else {
        let e = (2.0 * lx).exp();
        4.0 * p.lambda * p.q * e / (e + p.q).powi(2)
    }
}

/// `g(a) − g(b)` for `a > b`, without cancellation when both lie in the same
/// saturated tail.
fn g_difference(p: &KernelParams, a: f64, b: f64) -> f64 {
    let two_l = 2.0 * p.lambda;
    if b >= 0.0 {
        let ea = p.q * (-two_l * a).exp();
        let eb = p.q * (-two_l * b).exp();
        // eb − ea = −eb · expm1(−2λ(a − b))
        let num = -eb * (-two_l * (a - b)).exp_m1();
        2.0 * num / ((1.0 + ea) * (1.0 + eb))
    } else if a <= 0.0 {
        let ea = (two_l * a).exp();
        let eb = (two_l * b).exp();
        // ea − eb = eb · expm1(2λ(a − b))
        let num = eb * (two_l * (a - b)).exp_m1();
        2.0 * p.q * num / ((ea + p.q) * (eb + p.q))
    } else {
        eval_g(p, a) - eval_g(p, b)
    }
}

/// `M_{q,λ}(x) = (g(x+1) − g(x−1)) / 4`.
pub fn eval_m(p: &KernelParams, x: f64) -> f64 {
    0.25 * g_difference(p, x + 1.0, x - 1.0)
}

/// Symmetrized kernel `Φ(x) = (M_{q,λ}(x) + M_{1/q,λ}(x)) / 2`.
pub fn eval_phi(p: &KernelParams, x: f64) -> f64 {
    // M_{1/q}(x) = M_q(−x), so evaluating both at |x| makes Φ exactly even.
    let ax = x.abs();
    0.5 * (eval_m(p, ax) + eval_m(&p.reciprocal(), ax))
}

/// Product kernel `Z(x) = Π_i Φ(x_i)`.
pub fn eval_z(p: &KernelParams, x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::param("x", "product kernel needs at least one coordinate"));
    }
    Ok(x.iter().map(|&xi| eval_phi(p, xi)).product())
}

/// Truncated partition sum `Σ_{|k|≤K} Φ(x − k)`.
///
/// Logs a warning when the analytic tail bound exceeds the tolerance.
pub fn partition_sum(p: &KernelParams, x: f64) -> f64 {
    let bound = p.tail_bound(x);
    if bound > p.tail_tol {
        log::warn!(
            "partition tail bound {bound:.3e} exceeds tolerance {:.3e} (x = {x}, K = {})",
            p.tail_tol,
            p.trunc_radius
        );
    }
    let k = p.trunc_radius as i64;
    let mut acc = crate::stats::CompensatedSum::new();
    for j in -k..=k {
        acc.add(eval_phi(p, x - j as f64));
    }
    acc.value()
}

/// Kernel weights `Z(y − k)` over the truncated lattice `round(y) + [−K, K]^N`.
///
/// Lattice points are visited in lexicographic order; a branch is pruned as
/// soon as its partial product drops below `prune_below`.
#[derive(Debug, Clone)]
pub struct LatticeStencil {
    pub points: Vec<LatticePoint>,
    pub weights: Vec<f64>,
    /// Sum of the per-axis analytic tail bounds.
    pub tail_bound: f64,
}

impl LatticeStencil {
    pub fn build(p: &KernelParams, y: &[f64], prune_below: f64) -> Self {
        let dim = y.len();
        let k = p.trunc_radius as i64;
        let centers: Vec<i64> = y.iter().map(|v| v.round() as i64).collect();
        let axis: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                (-k..=k)
                    .map(|j| eval_phi(p, y[d] - (centers[d] + j) as f64))
                    .collect()
            })
            .collect();
        let tail_bound = (0..dim)
            .map(|d| p.tail_bound(y[d] - centers[d] as f64))
            .sum();

        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0i64; dim];
        fn recurse(
            d: usize,
            partial: f64,
            idx: &mut Vec<i64>,
            axis: &[Vec<f64>],
            centers: &[i64],
            k: i64,
            prune: f64,
            points: &mut Vec<LatticePoint>,
            weights: &mut Vec<f64>,
        ) {
            if d == axis.len() {
                points.push(LatticePoint(
                    idx.iter().zip(centers).map(|(j, c)| c + j).collect(),
                ));
                weights.push(partial);
                return;
            }
            for j in -k..=k {
                let w = partial * axis[d][(j + k) as usize];
                if w < prune {
                    continue;
                }
                idx[d] = j;
                recurse(d + 1, w, idx, axis, centers, k, prune, points, weights);
            }
        }
        recurse(
            0, 1.0, &mut idx, &axis, &centers, k, prune_below, &mut points, &mut weights,
        );
        Self {
            points,
            weights,
            tail_bound,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(q: f64, lambda: f64) -> KernelParams {
        KernelParams::new(q, lambda, 40).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(eval_g(&params(1.0, 1.0), 0.0), 0.0);
        let e = std::f64::consts::E;
        let want = (e - 1.0 / e) / (e + 1.0 / e);
        assert!((eval_g(&params(1.0, 1.0), 1.0) - want).abs() < 1e-15);
        assert!((want - 0.7615941559557649).abs() < 1e-15);
        let s = 0.5f64.exp();
        let want = (s - 2.0 / s) / (s + 2.0 / s);
        assert!((eval_g(&params(2.0, 1.0), 0.5) - want).abs() < 1e-15);
        assert!((want - 0.152233).abs() < 1e-6);
    }

    #[test]
    fn g_is_overflow_safe() {
        let p = params(3.0, 2.0);
        assert_eq!(eval_g(&p, 1e4), 1.0);
        assert_eq!(eval_g(&p, -1e4), -1.0);
        assert!(eval_g_prime(&p, 1e4) >= 0.0);
        assert!(eval_g_prime(&p, -1e4).is_finite());
    }

    #[test]
    fn g_prime_examples() {
        assert!((eval_g_prime(&params(1.0, 1.0), 0.0) - 1.0).abs() < 1e-15);
        let p = params(1.0, 1.0);
        let h = 1e-5;
        let fd = (eval_g(&p, 2.0 + h) - eval_g(&p, 2.0 - h)) / (2.0 * h);
        assert!((eval_g_prime(&p, 2.0) - fd).abs() < 1e-8);
        assert!(eval_g_prime(&params(3.0, 0.5), -1.0) > 0.0);
    }

    #[test]
    fn m_examples() {
        let p = params(1.0, 1.0);
        assert!((eval_m(&p, 0.0) - 1f64.tanh() / 2.0).abs() < 1e-15);
        assert!((eval_m(&p, 0.0) - 0.3807970780).abs() < 1e-10);
        let far = eval_m(&p, 20.0);
        assert!(far > 0.0 && far < 1e-15);
        let a = eval_m(&params(2.0, 1.0), 0.5);
        let b = eval_m(&params(0.5, 1.0), -0.5);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn m_matches_naive_difference_where_naive_is_accurate() {
        for q in [0.3, 1.0, 4.0] {
            let p = params(q, 0.8);
            for i in -30..=30 {
                let x = i as f64 * 0.17;
                let naive = 0.25 * (eval_g(&p, x + 1.0) - eval_g(&p, x - 1.0));
                assert!((eval_m(&p, x) - naive).abs() < 1e-15, "q={q} x={x}");
            }
        }
    }

    #[test]
    fn phi_examples() {
        let p = params(2.0, 1.0);
        assert_eq!(eval_phi(&p, 0.7), eval_phi(&p, -0.7));
        assert!((eval_phi(&params(1.0, 1.0), 0.0) - 0.3807970780).abs() < 1e-10);
        let p = params(5.0, 2.0);
        let mean = 0.5 * (eval_m(&p, 0.0) + eval_m(&p.reciprocal(), 0.0));
        assert!((eval_phi(&p, 0.0) - mean).abs() < 1e-16);
    }

    #[test]
    fn z_examples() {
        let p = params(1.5, 1.0);
        let phi0 = eval_phi(&p, 0.0);
        assert!((eval_z(&p, &[0.0, 0.0]).unwrap() - phi0 * phi0).abs() < 1e-16);
        let (a, b, c) = (0.3, -1.2, 2.5);
        assert_eq!(
            eval_z(&p, &[a, b, c]).unwrap(),
            eval_z(&p, &[-a, b, -c]).unwrap()
        );
        assert_eq!(eval_z(&p, &[0.3]).unwrap(), eval_phi(&p, 0.3));
        assert!(eval_z(&p, &[]).is_err());
    }

    #[test]
    fn partition_examples() {
        let s = partition_sum(&params(1.0, 1.0), 0.3);
        assert!((s - 1.0).abs() < 1e-10);
        let p = KernelParams::new(2.0, 0.5, 60).unwrap();
        assert!((partition_sum(&p, -1.7) - 1.0).abs() < 1e-10);
        let short = KernelParams::new(1.0, 1.0, 1).unwrap();
        let s = partition_sum(&short, 0.0);
        assert!(1.0 - s > 1e-3, "truncation gap {}", 1.0 - s);
        // the analytic bound dominates the actual loss
        assert!(short.tail_bound(0.0) >= 1.0 - s);
    }

    #[test]
    fn tail_bound_dominates_truncation_loss() {
        for (q, lambda) in [(0.5, 0.5), (1.0, 1.0), (3.0, 0.7)] {
            for k in 2..8 {
                let p = KernelParams::new(q, lambda, k).unwrap();
                for x in [-0.5, 0.0, 0.2, 0.5] {
                    let loss = 1.0 - partition_sum(&p, x);
                    assert!(p.tail_bound(x) >= loss - 1e-15, "q={q} λ={lambda} K={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn decay_envelope() {
        // fit C once on a reference grid, then check it on a disjoint one
        for (q, lambda) in [(0.5, 0.5), (1.0, 1.0), (2.0, 2.0)] {
            let p = params(q, lambda);
            let envelope = |x: f64| (-lambda * (x.abs() - 2.0)).exp();
            let c = (0..=300)
                .map(|i| 3.0 + 0.1 * i as f64)
                .map(|x| eval_phi(&p, x) / envelope(x))
                .fold(0.0, f64::max);
            for i in 0..500 {
                let x = 3.05 + 0.0731 * i as f64;
                assert!(eval_phi(&p, x) <= c * envelope(x));
                assert!(eval_phi(&p, -x) <= c * envelope(-x));
            }
        }
    }

    #[test]
    fn stencil_matches_direct_product() {
        let p = params(1.3, 1.0);
        let st = LatticeStencil::build(&p, &[2.4, -0.6], 0.0);
        assert_eq!(st.len(), 81 * 81);
        for (k, w) in st.points.iter().zip(&st.weights).step_by(97) {
            let d = [2.4 - k.0[0] as f64, -0.6 - k.0[1] as f64];
            assert!((eval_z(&p, &d).unwrap() - w).abs() <= 1e-16 * w.max(1e-300));
        }
        let total: f64 = st.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let pruned = LatticeStencil::build(&p, &[2.4, -0.6], 1e-20);
        assert!(pruned.len() < st.len());
        let total: f64 = pruned.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn oddness_pairing(q in 0.05f64..20.0, lambda in 0.05f64..5.0, x in -20.0f64..20.0) {
            let p = params(q, lambda);
            prop_assert!((eval_g(&p, -x) + eval_g(&p.reciprocal(), x)).abs() < 1e-12);
        }

        #[test]
        fn g_strictly_increasing(q in 0.1f64..10.0, lambda in 0.1f64..3.0, x0 in -5.0f64..5.0) {
            let p = params(q, lambda);
            let xs: Vec<f64> = (0..50).map(|i| x0 + 0.05 * i as f64).collect();
            for w in xs.windows(2) {
                let (a, b) = (eval_g(&p, w[0]), eval_g(&p, w[1]));
                // strict until g saturates at ±1 in double precision
                if 1.0 - a.abs().max(b.abs()) > 1e-10 {
                    prop_assert!(b > a);
                } else {
                    prop_assert!(b >= a);
                }
            }
        }

        #[test]
        fn phi_even_and_positive(q in 0.05f64..20.0, lambda in 0.05f64..5.0, x in -30.0f64..30.0) {
            let p = params(q, lambda);
            prop_assert_eq!(eval_phi(&p, x) - eval_phi(&p, -x), 0.0);
            prop_assert!(eval_phi(&p, x) > 0.0);
            prop_assert!(eval_m(&p, x) > 0.0);
        }

        #[test]
        fn partition_of_unity(q in prop::sample::select(vec![0.5, 1.0, 2.0]),
                              lambda in 0.5f64..3.0, x in -3.0f64..3.0) {
            let p = params(q, lambda);
            prop_assert!((partition_sum(&p, x) - 1.0).abs() < 1e-10);
        }
    }
}
