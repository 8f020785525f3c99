//! Analytic test fields with exact partial derivatives.

use std::f64::consts::FRAC_PI_2;

/// A scalar field on `R^N` that can report `∂^β f` exactly.
pub trait SmoothField: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn derivative(&self, beta: &[u32], x: &[f64]) -> f64;
}

/// Sparse polynomial `Σ c · x^e`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Self {
        assert!(terms.iter().all(|(_, e)| e.len() == dim), "exponent length must equal dim");
        Self { dim, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }
}

/// `d^b/dx^b x^e` as (coefficient, remaining exponent).
fn monomial_derivative(e: u32, b: u32) -> (f64, u32) {
    if b > e {
        return (0.0, 0);
    }
    let c = ((e - b + 1)..=e).map(|k| k as f64).product();
    (c, e - b)
}

impl SmoothField for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.derivative(&vec![0; self.dim], x)
    }

    fn derivative(&self, beta: &[u32], x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut v = *c;
                for d in 0..self.dim {
                    let (k, rest) = monomial_derivative(e[d], beta[d]);
                    v *= k * x[d].powi(rest as i32);
                }
                v
            })
            .sum()
    }
}

/// `Π_i sin(a_i x_i + φ_i)`.
#[derive(Debug, Clone)]
pub struct SineProduct {
    pub freqs: Vec<f64>,
    pub phases: Vec<f64>,
}

impl SineProduct {
    pub fn new(freqs: Vec<f64>, phases: Vec<f64>) -> Self {
        assert_eq!(freqs.len(), phases.len());
        Self { freqs, phases }
    }
}

impl SmoothField for SineProduct {
    fn dim(&self) -> usize {
        self.freqs.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.derivative(&vec![0; self.dim()], x)
    }

    fn derivative(&self, beta: &[u32], x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|d| {
                let a = self.freqs[d];
                let b = beta[d];
                a.powi(b as i32) * (a * x[d] + self.phases[d] + b as f64 * FRAC_PI_2).sin()
            })
            .product()
    }
}

/// `Π_i exp(a_i x_i)`.
#[derive(Debug, Clone)]
pub struct ExpProduct {
    pub rates: Vec<f64>,
}

impl SmoothField for ExpProduct {
    fn dim(&self) -> usize {
        self.rates.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.rates.iter().zip(x).map(|(a, xi)| (a * xi).exp()).product()
    }

    fn derivative(&self, beta: &[u32], x: &[f64]) -> f64 {
        self.rates
            .iter()
            .zip(x)
            .zip(beta)
            .map(|((a, xi), b)| a.powi(*b as i32) * (a * xi).exp())
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // p = 3x²y − y³ + 2
        let p = Polynomial::new(2, vec![(3.0, vec![2, 1]), (-1.0, vec![0, 3]), (2.0, vec![0, 0])]);
        let x = [1.5, -0.5];
        assert!((p.value(&x) - (3.0 * 2.25 * -0.5 + 0.125 + 2.0)).abs() < 1e-14);
        assert!((p.derivative(&[1, 0], &x) - 6.0 * 1.5 * -0.5).abs() < 1e-14);
        assert!((p.derivative(&[0, 2], &x) - (-6.0 * -0.5)).abs() < 1e-14);
        assert_eq!(p.derivative(&[3, 0], &x), 0.0);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn sine_derivatives_match_finite_differences() {
        let f = SineProduct::new(vec![1.3, 0.7], vec![0.2, -0.4]);
        let x = [0.4, 1.1];
        let h = 1e-5;
        let fd = (f.value(&[x[0] + h, x[1]]) - f.value(&[x[0] - h, x[1]])) / (2.0 * h);
        assert!((f.derivative(&[1, 0], &x) - fd).abs() < 1e-9);
    }
}
