//! Summation, Monte Carlo moments and log-log slope fitting.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Neumaier compensated sum over a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Sample moments of a Monte Carlo batch, reduced in index order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean.
    pub mean_se: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    pub variance_se: f64,
}

impl SampleMoments {
    pub fn from_samples(xs: &[f64]) -> Self {
        let r = xs.len();
        assert!(r >= 2, "need at least two samples");
        let rf = r as f64;
        let mean = compensated_sum(xs.iter().copied()) / rf;
        let m2 = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / rf;
        let m4 = compensated_sum(xs.iter().map(|x| (x - mean).powi(4))) / rf;
        let variance = m2 * rf / (rf - 1.0);
        let variance_se = ((m4 - m2 * m2 * (rf - 3.0) / (rf - 1.0)) / rf).max(0.0).sqrt();
        Self {
            count: r,
            mean,
            variance,
            mean_se: (variance / rf).sqrt(),
            variance_se,
        }
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
}

impl SlopeFit {
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

/// Ordinary least squares on log-log data with a Student-t 95% half-width.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::SlopeFit {
            reason: format!("got {} points", points.len()),
        });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::SlopeFit {
            reason: format!("non-positive pair ({x}, {y})"),
        });
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::SlopeFit {
            reason: "all abscissae equal".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("dof >= 2")
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        half_width: t * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{NoiseStream, StreamDomain};

    #[test]
    fn exact_power_laws() {
        let sq: Vec<_> = (1..=6).map(|i| (i as f64, (i * i) as f64)).collect();
        let fit = fit_slope(&sq).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.half_width < 1e-10);

        let inv: Vec<_> = (1..=6).map(|i| (i as f64, 3.0 / i as f64)).collect();
        assert!((fit_slope(&inv).unwrap().slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_root_law() {
        let s = NoiseStream::new(42, StreamDomain::Synthetic);
        let pts: Vec<_> = (0..8)
            .map(|i| {
                let x = 2f64.powi(i + 2);
                (x, x.powf(-0.5) * (1.0 + 0.01 * s.gaussian(0, &[i as i64])))
            })
            .collect();
        let fit = fit_slope(&pts).unwrap();
        assert!(fit.contains(-0.6, -0.4), "{fit:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let three = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert!(fit_slope(&three).is_err());
        let neg = [(1.0, 1.0), (2.0, -2.0), (3.0, 3.0), (4.0, 4.0)];
        assert!(fit_slope(&neg).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
