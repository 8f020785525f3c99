//! Stochastic symmetrized Kantorovich operator on the lattice `Z^N / n`:
//!
//! `K_n^W(f, x) = Σ_k (n^N ∫_{cell k} f) (1 + σ W_k) Z(nx − k)`
//!
//! with i.i.d. standard Gaussian multipliers `W_k`. The truncated lattice is
//! `round(nx) + [−K, K]^N`; cell means use an 8-point Gauss–Legendre product
//! rule and every lattice sum runs in a fixed order with compensation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, LatticePoint, LatticeStencil};
use crate::quadrature::GaussLegendre;
use crate::rng::{NoiseStream, StreamDomain};
use crate::stats::CompensatedSum;
use crate::testfn::SmoothField;

pub const CELL_QUADRATURE_ORDER: usize = 8;

/// Lattice resolution `n`, dimension `N` and the box on which the operator
/// is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GridSpec {
    pub fn new(n: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len().max(1),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b >= a)) {
            return Err(Error::param("eval_box", "box is empty"));
        }
        Ok(Self { n, lo, hi })
    }

    /// `[lo, hi]^dim` with the same bounds on every axis.
    pub fn cube(n: usize, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(n, vec![lo; dim], vec![hi; dim])
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn eval_box(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.lo.clone(), self.hi.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Multiplicative `(1 + σ W_k)` per lattice cell.
    CellMultiplier,
    /// Random measure `dZ` with mean `dy` and variance `σ² dy`.
    WhiteNoiseMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    base_seed: u64,
    kind: NoiseKind,
}

impl NoiseModel {
    pub fn new(sigma: f64, base_seed: u64, kind: NoiseKind) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be non-negative, got {sigma}")));
        }
        Ok(Self {
            sigma,
            base_seed,
            kind,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }
    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub(crate) fn require(&self, kind: NoiseKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::param("noise.kind", format!("expected {kind:?}, got {:?}", self.kind)))
        }
    }
}

/// Multi-index `β ∈ N^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `β! = Π β_i!`.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&b| (1..=b).map(f64::from).product::<f64>())
            .product()
    }

    /// All multi-indices of dimension `dim` with `lo ≤ |β| ≤ hi`, graded then
    /// lexicographic.
    pub fn enumerate(dim: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in lo..=hi {
            let mut cur = vec![0u32; dim];
            fill(order, 0, &mut cur, &mut out);
        }
        fn fill(rest: u32, d: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if d + 1 == cur.len() {
                cur[d] = rest;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for b in (0..=rest).rev() {
                cur[d] = b;
                fill(rest - b, d + 1, cur, out);
            }
        }
        out
    }
}

fn cell_bounds(k: &LatticePoint, n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let lo = k.0.iter().map(|&ki| ki as f64 / nf).collect();
    let hi = k.0.iter().map(|&ki| (ki + 1) as f64 / nf).collect();
    (lo, hi)
}

/// `n^N ∫_{[k/n,(k+1)/n]^N} f`, i.e. the mean of `f` over cell `k`.
pub fn cell_average<F: Fn(&[f64]) -> f64>(f: F, k: &LatticePoint, grid: &GridSpec) -> Result<f64> {
    if k.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: k.dim(),
        });
    }
    let rule = GaussLegendre::new(CELL_QUADRATURE_ORDER);
    let (lo, hi) = cell_bounds(k, grid.n());
    Ok(rule.box_mean(&lo, &hi, f))
}

fn check_point(x: &[f64], grid: &GridSpec) -> Result<()> {
    if x.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Cell means and kernel weights of the truncated lattice around `nx`.
///
/// Building the stencil once lets expectation, variance and any number of
/// noisy replicates share the quadrature work.
#[derive(Debug, Clone)]
pub struct KantorovichStencil {
    cells: Vec<LatticePoint>,
    means: Vec<f64>,
    weights: Vec<f64>,
    tail_bound: f64,
}

impl KantorovichStencil {
    pub fn build<F>(f: F, x: &[f64], grid: &GridSpec, params: &KernelParams) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        check_point(x, grid)?;
        let nf = grid.n() as f64;
        let y: Vec<f64> = x.iter().map(|xi| nf * xi).collect();
        let lattice = LatticeStencil::build(params, &y, params.tail_tolerance() * 1e-6);
        if lattice.tail_bound > params.tail_tolerance() {
            log::warn!(
                "lattice tail bound {:.3e} exceeds tolerance {:.3e} at x = {x:?}",
                lattice.tail_bound,
                params.tail_tolerance()
            );
        }
        let rule = GaussLegendre::new(CELL_QUADRATURE_ORDER);
        let means: Vec<f64> = lattice
            .points
            .par_iter()
            .map(|k| {
                let (lo, hi) = cell_bounds(k, grid.n());
                rule.box_mean(&lo, &hi, &f)
            })
            .collect();
        Ok(Self {
            cells: lattice.points,
            means,
            weights: lattice.weights,
            tail_bound: lattice.tail_bound,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn cells(&self) -> &[LatticePoint] {
        &self.cells
    }

    /// `E[K_n^W(f, x)] = Σ_k mean_k Z(nx − k)`.
    pub fn expectation(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (m, w) in self.means.iter().zip(&self.weights) {
            acc.add(m * w);
        }
        acc.value()
    }

    /// `σ² Σ_k mean_k² Z²(nx − k)`.
    pub fn variance(&self, sigma: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (m, w) in self.means.iter().zip(&self.weights) {
            acc.add((m * w).powi(2));
        }
        sigma * sigma * acc.value()
    }

    /// One realization; `W_k` is addressed by `(seed, replicate, k)` so that
    /// stencils at different points see the same noise field.
    pub fn sample(&self, noise: &NoiseModel, replicate: u64) -> Result<f64> {
        noise.require(NoiseKind::CellMultiplier)?;
        let stream = NoiseStream::new(noise.base_seed(), StreamDomain::LatticeCell);
        let sigma = noise.sigma();
        let mut acc = CompensatedSum::new();
        for ((k, m), w) in self.cells.iter().zip(&self.means).zip(&self.weights) {
            let mult = if sigma == 0.0 {
                1.0
            } else {
                1.0 + sigma * stream.gaussian(replicate, &k.0)
            };
            acc.add(m * mult * w);
        }
        Ok(acc.value())
    }

    /// The realized multipliers `W_k` for one replicate, in stencil order.
    pub fn multipliers(&self, noise: &NoiseModel, replicate: u64) -> Vec<f64> {
        let stream = NoiseStream::new(noise.base_seed(), StreamDomain::LatticeCell);
        self.cells.iter().map(|k| stream.gaussian(replicate, &k.0)).collect()
    }

    /// `M_β(x) = Σ_k (n^N ∫_{cell k} (t − x)^β dt) Z(nx − k)` with the cell
    /// integrals taken from per-axis antiderivatives.
    pub fn moment(&self, beta: &MultiIndex, x: &[f64], n: usize) -> f64 {
        let nf = n as f64;
        let mut acc = CompensatedSum::new();
        for (k, w) in self.cells.iter().zip(&self.weights) {
            let mut cell = 1.0;
            for (d, &b) in beta.0.iter().enumerate() {
                let lo = k.0[d] as f64 / nf - x[d];
                let hi = (k.0[d] + 1) as f64 / nf - x[d];
                let e = b as i32 + 1;
                cell *= nf * (hi.powi(e) - lo.powi(e)) / e as f64;
            }
            acc.add(cell * w);
        }
        acc.value()
    }
}

/// `E[K_n^W(f, x)]`.
pub fn apply_expectation<F>(f: F, x: &[f64], grid: &GridSpec, params: &KernelParams) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(KantorovichStencil::build(f, x, grid, params)?.expectation())
}

/// One noisy realization of `K_n^W(f, x)`; deterministic in
/// `(noise.base_seed, replicate)`.
pub fn sample<F>(
    f: F,
    x: &[f64],
    grid: &GridSpec,
    params: &KernelParams,
    noise: &NoiseModel,
    replicate: u64,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    noise.require(NoiseKind::CellMultiplier)?;
    KantorovichStencil::build(f, x, grid, params)?.sample(noise, replicate)
}

/// `Var[K_n^W(f, x)] = σ² Σ_k (cell mean)² Z²(nx − k)`.
pub fn variance_closed_form<F>(f: F, x: &[f64], grid: &GridSpec, params: &KernelParams, sigma: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be non-negative, got {sigma}")));
    }
    Ok(KantorovichStencil::build(f, x, grid, params)?.variance(sigma))
}

/// Kernel moment `M_{β,n}(x)`.
pub fn kernel_moment(beta: &MultiIndex, x: &[f64], grid: &GridSpec, params: &KernelParams) -> Result<f64> {
    check_point(x, grid)?;
    if beta.0.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: beta.0.len(),
        });
    }
    let nf = grid.n() as f64;
    let y: Vec<f64> = x.iter().map(|xi| nf * xi).collect();
    let lattice = LatticeStencil::build(params, &y, params.tail_tolerance() * 1e-6);
    let st = KantorovichStencil {
        means: vec![0.0; lattice.points.len()],
        cells: lattice.points,
        weights: lattice.weights,
        tail_bound: lattice.tail_bound,
    };
    Ok(st.moment(beta, x, grid.n()))
}

/// `E[K_n^W(f, x)] − f(x) − Σ_{1≤|β|≤m} ∂^β f(x) M_{β,n}(x) / β!`, with the
/// derivatives supplied analytically by `f`.
pub fn voronovskaya_remainder<S: SmoothField>(
    f: &S,
    x: &[f64],
    grid: &GridSpec,
    params: &KernelParams,
    m: u32,
) -> Result<f64> {
    if f.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: f.dim(),
        });
    }
    let st = KantorovichStencil::build(|t| f.value(t), x, grid, params)?;
    let mut acc = CompensatedSum::new();
    acc.add(st.expectation());
    acc.add(-f.value(x));
    for beta in MultiIndex::enumerate(grid.dim(), 1, m) {
        let d = f.derivative(&beta.0, x);
        if d != 0.0 {
            acc.add(-d * st.moment(&beta, x, grid.n()) / beta.factorial());
        }
    }
    Ok(acc.value())
}
