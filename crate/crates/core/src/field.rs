//! Uniformly sampled scalar fields on periodic or boxed grids (1D or 2D).
//!
//! Values are stored row-major with the last axis fastest.

use crate::error::{Error, Result};

/// Periodic grid `[0, L)^dim` with `points` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    length: f64,
    points: usize,
    dim: usize,
}

impl PeriodicGrid {
    pub fn new(length: f64, points: usize, dim: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::param("length", format!("must be positive, got {length}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { points });
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::param("dim", format!("must be 1 or 2, got {dim}")));
        }
        Ok(Self { length, points, dim })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }
    pub fn total_points(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Angular wavenumber `2π m / L` of FFT bin `j` (standard FFT ordering).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let p = self.points as i64;
        let m = if (j as i64) <= p / 2 { j as i64 } else { j as i64 - p };
        2.0 * std::f64::consts::PI * m as f64 / self.length
    }

    /// Integer mode index of FFT bin `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let p = self.points as i64;
        if (j as i64) <= p / 2 {
            j as i64
        } else {
            j as i64 - p
        }
    }
}

/// Closed box `[lo, hi]` per axis with `points` samples including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    points: usize,
}

impl BoxGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points: usize) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if !(1..=2).contains(&lo.len()) {
            return Err(Error::param("dim", format!("must be 1 or 2, got {}", lo.len())));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(Error::param("box", "every axis needs hi > lo"));
        }
        if points < 2 {
            return Err(Error::param("points", "need at least 2 samples per axis"));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }
    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.points - 1) as f64
    }
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.lo[axis] + j as f64 * self.spacing(axis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Periodic(PeriodicGrid),
    Boxed(BoxGrid),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Periodic(g) => g.dim(),
            Domain::Boxed(b) => b.dim(),
        }
    }

    pub fn points(&self) -> usize {
        match self {
            Domain::Periodic(g) => g.points(),
            Domain::Boxed(b) => b.points(),
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        match self {
            Domain::Periodic(g) => g.spacing(),
            Domain::Boxed(b) => b.spacing(axis),
        }
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        match self {
            Domain::Periodic(g) => g.coordinate(j),
            Domain::Boxed(b) => b.coordinate(axis, j),
        }
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Periodic(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    domain: Domain,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        let expected = domain.points().pow(domain.dim() as u32);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { domain, values })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(domain: Domain, f: F) -> Self {
        let p = domain.points();
        let values = match domain.dim() {
            1 => (0..p).map(|i| f(&[domain.coordinate(0, i)])).collect(),
            _ => (0..p * p)
                .map(|idx| {
                    let (i, j) = (idx / p, idx % p);
                    f(&[domain.coordinate(0, i), domain.coordinate(1, j)])
                })
                .collect(),
        };
        Self { domain, values }
    }

    pub fn periodic_1d<F: Fn(f64) -> f64>(grid: PeriodicGrid, f: F) -> Self {
        Self::from_fn(Domain::Periodic(grid), |x| f(x[0]))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Grid coordinates of flat index `idx`.
    pub fn coordinates(&self, idx: usize) -> Vec<f64> {
        let p = self.domain.points();
        match self.dim() {
            1 => vec![self.domain.coordinate(0, idx)],
            _ => vec![
                self.domain.coordinate(0, idx / p),
                self.domain.coordinate(1, idx % p),
            ],
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.domain.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sqrt(h^N Σ v²)`.
    pub fn l2_norm(&self) -> f64 {
        let s = crate::stats::compensated_sum(self.values.iter().map(|v| v * v));
        (s * self.domain.cell_volume()).sqrt()
    }
}
