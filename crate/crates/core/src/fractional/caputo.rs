use super::special::gamma_fn;
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

/// Fractional order strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::param("alpha", format!("must lie strictly in (0, 1), got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Uniform grid `t_j = t0 + j h`, `h = (t1 − t0) / steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::param("t1", format!("need t1 > t0, got [{t0}, {t1}]")));
        }
        if steps < 2 {
            return Err(Error::param("steps", format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn t1(&self) -> f64 {
        self.t1
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }
    pub fn node(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.step()
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.node(j)).collect()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..=self.steps).map(|j| f(self.node(j))).collect()
    }
}

/// L1 history weights `b_j = (j+1)^{1−α} − j^{1−α}`, `j = 0..count`.
pub fn l1_weights(alpha: FracOrder, count: usize) -> Vec<f64> {
    let e = 1.0 - alpha.value();
    (0..count)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                let jf = j as f64;
                // j^{1−α} · ((1 + 1/j)^{1−α} − 1), free of cancellation
                jf.powf(e) * (e * (1.0 / jf).ln_1p()).exp_m1()
            }
        })
        .collect()
}

/// L1 discretization of the Caputo derivative with lower limit `t0`:
///
/// `D^α f(t_n) ≈ h^{−α}/Γ(2−α) · Σ_{j<n} b_j (f_{n−j} − f_{n−j−1})`.
///
/// Node 0 is 0 by convention. The scheme assumes `f` is C¹ on the grid
/// interval; it is exact for linear `f` and of order `2 − α` for smooth `f`.
pub fn caputo_l1(grid: &TimeGrid, values: &[f64], alpha: FracOrder) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::param("values", format!("need at least 2 samples, got {}", values.len())));
    }
    if values.len() != grid.steps() + 1 {
        return Err(Error::DimensionMismatch {
            expected: grid.steps() + 1,
            got: values.len(),
        });
    }
    let a = alpha.value();
    let scale = grid.step().powf(-a) / gamma_fn(2.0 - a)?;
    let b = l1_weights(alpha, values.len());
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![0.0; values.len()];
    for n in 1..values.len() {
        let mut acc = CompensatedSum::new();
        for j in 0..n {
            acc.add(b[j] * diffs[n - j - 1]);
        }
        out[n] = scale * acc.value();
    }
    Ok(out)
}

/// `‖f‖_{L∞} + sup |D^α f|` over the grid nodes, with `D^α` from [`caputo_l1`].
pub fn frac_sobolev_norm(grid: &TimeGrid, values: &[f64], alpha: FracOrder) -> Result<f64> {
    let d = caputo_l1(grid, values, alpha)?;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(sup(values) + sup(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> FracOrder {
        FracOrder::new(0.5).unwrap()
    }

    #[test]
    fn order_rejects_endpoints() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert!(FracOrder::new(0.3).is_ok());
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn weights_match_direct_formula() {
        let a = FracOrder::new(0.3).unwrap();
        let b = l1_weights(a, 50);
        for (j, w) in b.iter().enumerate() {
            let jf = j as f64;
            let direct = (jf + 1.0).powf(0.7) - jf.powf(0.7);
            assert!((w - direct).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let d = caputo_l1(&g, &vec![7.0; 65], half()).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_is_exact() {
        // D^α t = t^{1−α} / Γ(2−α)
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let d = caputo_l1(&g, &g.sample(|t| t), half()).unwrap();
        let want = 1.0 / gamma_fn(1.5).unwrap();
        assert!((d[64] - want).abs() < 1e-12);
        assert!((want - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        for (j, v) in d.iter().enumerate().skip(1) {
            let t = g.node(j);
            assert!((v - t.sqrt() * want).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_converges_to_closed_form() {
        // D^α t² = 2 t^{2−α} / Γ(3−α)
        let want = 2.0 / gamma_fn(2.5).unwrap();
        assert!((want - 1.5045055).abs() < 1e-7);
        let g = TimeGrid::new(0.0, 1.0, 1024).unwrap();
        let d = caputo_l1(&g, &g.sample(|t| t * t), half()).unwrap();
        assert!((d[1024] - want).abs() < 1e-3);
    }

    #[test]
    fn shifted_lower_limit() {
        let g = TimeGrid::new(2.0, 3.0, 32).unwrap();
        let d = caputo_l1(&g, &g.sample(|t| 4.0 * (t - 2.0)), half()).unwrap();
        assert!((d[32] - 4.0 / gamma_fn(1.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_mismatched_input() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert!(caputo_l1(&g, &[1.0], half()).is_err());
        assert!(caputo_l1(&g, &[1.0, 2.0, 3.0], half()).is_err());
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = TimeGrid::new(0.0, 1.0, 256).unwrap();
        assert_eq!(frac_sobolev_norm(&g, &vec![-3.0; 257], half()).unwrap(), 3.0);
        let lin = frac_sobolev_norm(&g, &g.sample(|t| t), half()).unwrap();
        assert!((lin - 2.1283792).abs() < 1e-7);
        let quad = frac_sobolev_norm(&g, &g.sample(|t| t * t), half()).unwrap();
        assert!((quad - 2.5045055).abs() < 1e-3);
    }
}
