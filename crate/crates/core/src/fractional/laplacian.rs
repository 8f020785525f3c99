use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Domain, Field, PeriodicGrid};

/// Unnormalized DFT coefficients of a periodic 1D or 2D field.
///
/// Plans are created per instance; nothing is cached globally.
pub struct SpectralField {
    grid: PeriodicGrid,
    coef: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralField {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points());
        let inverse = planner.plan_fft_inverse(grid.points());
        Self {
            grid,
            coef: vec![Complex64::new(0.0, 0.0); grid.total_points()],
            forward,
            inverse,
        }
    }

    pub fn from_field(u: &Field) -> Result<Self> {
        let grid = periodic_grid(u)?;
        let mut s = Self::new(grid);
        s.load_real(u.values());
        Ok(s)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coef
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    /// Forward transform of real samples into the coefficient buffer.
    pub fn load_real(&mut self, values: &[f64]) {
        for (c, v) in self.coef.iter_mut().zip(values) {
            *c = Complex64::new(*v, 0.0);
        }
        self.transform(true);
    }

    /// Inverse transform, returning the real part normalized by `1/P^dim`.
    pub fn to_real(&self) -> Vec<f64> {
        let mut tmp = Self {
            grid: self.grid,
            coef: self.coef.clone(),
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
        };
        tmp.transform(false);
        let norm = 1.0 / self.grid.total_points() as f64;
        tmp.coef.iter().map(|c| c.re * norm).collect()
    }

    /// Squared magnitude of the wavevector of flat coefficient index `idx`.
    pub fn wavevector_sq(&self, idx: usize) -> f64 {
        let p = self.grid.points();
        match self.grid.dim() {
            1 => self.grid.wavenumber(idx).powi(2),
            _ => self.grid.wavenumber(idx / p).powi(2) + self.grid.wavenumber(idx % p).powi(2),
        }
    }

    fn transform(&mut self, forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        let p = self.grid.points();
        match self.grid.dim() {
            1 => plan.process(&mut self.coef),
            _ => {
                for row in self.coef.chunks_mut(p) {
                    plan.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); p];
                for j in 0..p {
                    for i in 0..p {
                        col[i] = self.coef[i * p + j];
                    }
                    plan.process(&mut col);
                    for i in 0..p {
                        self.coef[i * p + j] = col[i];
                    }
                }
            }
        }
    }
}

fn periodic_grid(u: &Field) -> Result<PeriodicGrid> {
    match u.domain() {
        Domain::Periodic(g) => Ok(*g),
        Domain::Boxed(_) => Err(Error::param("u", "spectral operators need a periodic field")),
    }
}

/// Applies the Fourier multiplier `m(|ξ|²)` and returns the real field.
pub fn spectral_multiplier<M: Fn(f64) -> f64>(u: &Field, m: M) -> Result<Field> {
    let mut s = SpectralField::from_field(u)?;
    for idx in 0..s.coef.len() {
        let k2 = s.wavevector_sq(idx);
        s.coef[idx] *= m(k2);
    }
    u.with_values(s.to_real())
}

/// Spectral fractional Laplacian: `F[(−Δ)^s u](ξ) = |ξ|^{2s} F[u](ξ)`, with the
/// zero mode sent to 0.
pub fn frac_laplacian(u: &Field, s: f64) -> Result<Field> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    spectral_multiplier(u, |k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(points: usize) -> PeriodicGrid {
        PeriodicGrid::new(2.0 * PI, points, 1).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn eigenfunction() {
        let u = Field::periodic_1d(grid(64), |x| (3.0 * x).sin());
        let got = frac_laplacian(&u, 0.7).unwrap();
        let want = Field::periodic_1d(grid(64), |x| 3f64.powf(1.4) * (3.0 * x).sin());
        assert!(max_diff(got.values(), want.values()) < 1e-12);
    }

    #[test]
    fn constant_is_annihilated() {
        let u = Field::periodic_1d(grid(32), |_| 2.5);
        let got = frac_laplacian(&u, 0.3).unwrap();
        assert!(got.max_abs() < 1e-14);
    }

    #[test]
    fn linear_over_modes() {
        let u = Field::periodic_1d(grid(64), |x| x.sin() + (4.0 * x).sin());
        let got = frac_laplacian(&u, 0.5).unwrap();
        let want = Field::periodic_1d(grid(64), |x| x.sin() + 4.0 * (4.0 * x).sin());
        assert!(max_diff(got.values(), want.values()) < 1e-12);
    }

    #[test]
    fn s_one_is_the_laplacian() {
        // −u'' for a trigonometric polynomial
        let u = Field::periodic_1d(grid(128), |x| (2.0 * x).cos() + 0.5 * (5.0 * x).sin() + 1.0);
        let got = frac_laplacian(&u, 1.0).unwrap();
        let want = Field::periodic_1d(grid(128), |x| 4.0 * (2.0 * x).cos() + 12.5 * (5.0 * x).sin());
        assert!(max_diff(got.values(), want.values()) < 1e-10);
    }

    #[test]
    fn composition_adds_exponents() {
        let u = Field::periodic_1d(grid(64), |x| (x.sin() * 2.0).exp());
        let two_step = frac_laplacian(&frac_laplacian(&u, 0.3).unwrap(), 0.45).unwrap();
        let one_step = frac_laplacian(&u, 0.75).unwrap();
        assert!(max_diff(two_step.values(), one_step.values()) < 1e-10);
    }

    #[test]
    fn two_dimensional_eigenfunction() {
        let g = PeriodicGrid::new(2.0 * PI, 32, 2).unwrap();
        let u = Field::from_fn(Domain::Periodic(g), |x| (2.0 * x[0]).sin() * (3.0 * x[1]).cos());
        let got = frac_laplacian(&u, 0.6).unwrap();
        let scale = 13f64.powf(0.6);
        let want: Vec<f64> = u.values().iter().map(|v| scale * v).collect();
        assert!(max_diff(got.values(), &want) < 1e-12);
    }

    #[test]
    fn rejects_boxed_fields() {
        let b = crate::field::BoxGrid::new(vec![0.0], vec![1.0], 16).unwrap();
        let u = Field::from_fn(Domain::Boxed(b), |x| x[0]);
        assert!(frac_laplacian(&u, 0.5).is_err());
    }
}
