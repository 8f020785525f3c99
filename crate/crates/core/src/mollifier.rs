//! Stochastic mollification with compactly supported bump kernels.
//!
//! The deterministic operator is the convolution `φ_n ∗ u` with
//! `φ_n(x) = n^{N−γ} φ(nx)`; the stochastic one integrates against a white
//! noise measure, `∫ u(y) φ_n(x − y) dZ(y)` with `E[dZ] = dy` and
//! `Var[dZ] = σ² dy`.
//!
//! On a grid with spacing `h` every cell contributes `dZ ≈ h^N + σ h^{N/2} ξ`,
//! `ξ` standard normal and addressed by `(seed, replicate, cell)`. Discrete
//! kernel weights `h^N φ_n(x_j)` are rescaled so that for `γ = 0` they sum to
//! exactly one; this keeps constants reproduced exactly and keeps quadrature
//! error out of the bias.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Domain, Field};
use crate::fractional::FracOrder;
use crate::kantorovich::{NoiseKind, NoiseModel};
use crate::quadrature::{composite, graded_from_zero, GaussLegendre};
use crate::rng::{NoiseStream, StreamDomain};
use crate::stats::{CompensatedSum, SampleMoments};

const NORMALIZATION_ORDER: usize = 16;
const NORMALIZATION_PANELS: usize = 64;
const GRADED_LEVELS: usize = 60;

/// Unnormalized radial profile `exp(−1/(1 − r²))` on `r < 1`.
fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Surface measure of the unit sphere in `R^dim` (`2` for dim 1, `2π` for dim 2).
fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => unreachable!("dimension validated at construction"),
    }
}

/// Normalized bump `φ(x) = c · exp(−1/(1 − ‖x‖²))` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    dim: usize,
    normalization: f64,
    l2_norm_sq: f64,
}

impl Mollifier {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The constant `c` with `∫ φ = 1`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `‖φ‖²_{L²}`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.normalization * bump_profile(r2)
    }

    /// `S_{N−1} ∫_0^1 r^{N−1} g(r) dr` for a radial integrand `g`.
    fn radial_integral<G: Fn(f64) -> f64>(dim: usize, g: G) -> f64 {
        let rule = GaussLegendre::new(NORMALIZATION_ORDER);
        let d = dim as i32 - 1;
        sphere_measure(dim) * composite(&rule, 0.0, 1.0, NORMALIZATION_PANELS, |r| r.powi(d) * g(r))
    }
}

/// Builds the normalized bump in dimension 1 or 2.
pub fn make_bump(dim: usize) -> Result<Mollifier> {
    if !(1..=2).contains(&dim) {
        return Err(Error::param("dim", format!("bump kernels support dim 1 or 2, got {dim}")));
    }
    let mass = Mollifier::radial_integral(dim, |r| bump_profile(r * r));
    let c = 1.0 / mass;
    let l2 = Mollifier::radial_integral(dim, |r| (c * bump_profile(r * r)).powi(2));
    Ok(Mollifier {
        dim,
        normalization: c,
        l2_norm_sq: l2,
    })
}

/// `φ_n^γ(x) = n^{N−γ} φ(nx)`; `γ = 0` is the standard mollifier sequence.
/// For `γ > 0` the kernel mass is `n^{−γ}`; no renormalization is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledKernel {
    base: Mollifier,
    n: usize,
    gamma: f64,
}

impl ScaledKernel {
    pub fn new(base: Mollifier, n: usize, gamma: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be non-negative, got {gamma}")));
        }
        Ok(Self { base, n, gamma })
    }

    pub fn standard(base: Mollifier, n: usize) -> Result<Self> {
        Self::new(base, n, 0.0)
    }

    pub fn base(&self) -> &Mollifier {
        &self.base
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// `n^{−γ}`, the mass of the kernel.
    pub fn amplitude(&self) -> f64 {
        (self.n as f64).powf(-self.gamma)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let nf = self.n as f64;
        let scaled: Vec<f64> = x.iter().map(|v| nf * v).collect();
        nf.powf(self.dim() as f64 - self.gamma) * self.base.eval(&scaled)
    }

    /// `∫ φ_n^γ` by radial quadrature over the support `‖x‖ < 1/n`.
    pub fn mass(&self) -> f64 {
        let rule = GaussLegendre::new(NORMALIZATION_ORDER);
        let d = self.dim() as i32 - 1;
        let r_max = 1.0 / self.n as f64;
        sphere_measure(self.dim())
            * composite(&rule, 0.0, r_max, NORMALIZATION_PANELS, |r| {
                let mut x = vec![0.0; self.dim()];
                x[0] = r;
                r.powi(d) * self.eval(&x)
            })
    }
}

/// `‖φ_n^γ‖²_{L²}` by quadrature of `φ_n²` over its support. For `γ = 0` this
/// is `n^N ‖φ‖²`; in general `n^{N−2γ} ‖φ‖²`.
pub fn l2_norm_sq_scaled(kernel: &ScaledKernel) -> f64 {
    let rule = GaussLegendre::new(NORMALIZATION_ORDER);
    let dim = kernel.dim();
    let d = dim as i32 - 1;
    let r_max = 1.0 / kernel.n() as f64;
    sphere_measure(dim)
        * composite(&rule, 0.0, r_max, NORMALIZATION_PANELS, |r| {
            let mut x = vec![0.0; dim];
            x[0] = r;
            r.powi(d) * kernel.eval(&x).powi(2)
        })
}

/// `C_φ = ∫ |w|^α φ(w) dw` with the default 16-point graded rule.
pub fn c_phi(moll: &Mollifier, alpha: FracOrder) -> f64 {
    c_phi_with_order(moll, alpha.value(), 16)
}

/// `∫ |w|^a φ(w) dw` on a mesh graded toward the origin; `a` may be any
/// non-negative exponent (used to probe the `α → 0` and `α = 1` limits).
pub fn c_phi_with_order(moll: &Mollifier, a: f64, order: usize) -> f64 {
    let rule = GaussLegendre::new(order);
    let d = moll.dim as f64 - 1.0;
    let c = moll.normalization;
    sphere_measure(moll.dim) * graded_from_zero(&rule, 1.0, GRADED_LEVELS, |r| r.powf(d + a) * c * bump_profile(r * r))
}

/// Discrete convolution weights on a uniform grid.
#[derive(Debug, Clone)]
struct DiscreteKernel {
    offsets: Vec<[i64; 2]>,
    weights: Vec<f64>,
    radius: [i64; 2],
    inv_sqrt_cell: f64,
}

impl DiscreteKernel {
    fn build(domain: &Domain, kernel: &ScaledKernel) -> Result<Self> {
        if domain.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: domain.dim(),
            });
        }
        let dim = domain.dim();
        let n = kernel.n();
        let limit = 1.0 / (4.0 * n as f64);
        let mut radius = [0i64; 2];
        for axis in 0..dim {
            let h = domain.spacing(axis);
            if h > limit * (1.0 + 1e-12) {
                return Err(Error::GridTooCoarse { spacing: h, limit, n });
            }
            radius[axis] = (1.0 / (n as f64 * h)).floor() as i64;
        }
        let h: Vec<f64> = (0..dim).map(|a| domain.spacing(a)).collect();
        let cell = domain.cell_volume();
        let standard = ScaledKernel::standard(kernel.base, n)?;
        let mut offsets = Vec::new();
        let mut raw = Vec::new();
        let r1 = if dim == 2 { radius[1] } else { 0 };
        for i in -radius[0]..=radius[0] {
            for j in -r1..=r1 {
                let x: Vec<f64> = match dim {
                    1 => vec![i as f64 * h[0]],
                    _ => vec![i as f64 * h[0], j as f64 * h[1]],
                };
                let w = standard.eval(&x) * cell;
                if w > 0.0 {
                    offsets.push([i, j]);
                    raw.push(w);
                }
            }
        }
        let mass = crate::stats::compensated_sum(raw.iter().copied());
        let amp = kernel.amplitude();
        let weights = raw.iter().map(|w| amp * (w / mass)).collect();
        Ok(Self {
            offsets,
            weights,
            radius,
            inv_sqrt_cell: 1.0 / cell.sqrt(),
        })
    }
}

/// Maps an output index plus offset to (storage index, noise key).
struct Indexer {
    dim: usize,
    points: i64,
    periodic: bool,
}

impl Indexer {
    fn new(domain: &Domain) -> Self {
        Self {
            dim: domain.dim(),
            points: domain.points() as i64,
            periodic: domain.is_periodic(),
        }
    }

    fn split(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [idx as i64, 0],
            _ => [idx as i64 / self.points, idx as i64 % self.points],
        }
    }

    fn axis(&self, v: i64) -> i64 {
        if self.periodic {
            v.rem_euclid(self.points)
        } else {
            v.clamp(0, self.points - 1)
        }
    }

    /// Storage index of the sampled value and the cell key for the noise.
    fn neighbor(&self, base: [i64; 2], off: [i64; 2]) -> (usize, [i64; 2]) {
        let v = [base[0] + off[0], base[1] + off[1]];
        let s = [self.axis(v[0]), self.axis(v[1])];
        let storage = match self.dim {
            1 => s[0] as usize,
            _ => (s[0] * self.points + s[1]) as usize,
        };
        // periodic cells wrap; boxed cells outside the box are distinct
        // virtual cells carrying the clamped value
        let key = if self.periodic { s } else { v };
        (storage, key)
    }
}

fn check_field(u: &Field) -> Result<()> {
    if u.is_empty() {
        return Err(Error::param("u", "field is empty"));
    }
    Ok(())
}

/// `(φ_n^γ ∗ u)` at every grid node.
///
/// Periodic fields wrap; boxed fields extend their edge values outward
/// (see [`boundary_layer`] for the affected nodes).
pub fn mollify(u: &Field, kernel: &ScaledKernel) -> Result<Field> {
    check_field(u)?;
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let vals = u.values();
    let out: Vec<f64> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let base = ix.split(i);
            let mut acc = CompensatedSum::new();
            for (off, w) in dk.offsets.iter().zip(&dk.weights) {
                let (s, _) = ix.neighbor(base, *off);
                acc.add(w * vals[s]);
            }
            acc.value()
        })
        .collect();
    u.with_values(out)
}

/// Nodes of a boxed field whose kernel support leaves the box; always empty
/// for periodic fields. Rate fits exclude these nodes.
pub fn boundary_layer(u: &Field, kernel: &ScaledKernel) -> Result<Vec<bool>> {
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    if u.domain().is_periodic() {
        return Ok(vec![false; u.len()]);
    }
    let ix = Indexer::new(u.domain());
    let p = ix.points;
    Ok((0..u.len())
        .map(|i| {
            let b = ix.split(i);
            (0..ix.dim).any(|a| b[a] < dk.radius[a] || b[a] + dk.radius[a] > p - 1)
        })
        .collect())
}

fn point_sample(
    vals: &[f64],
    dk: &DiscreteKernel,
    ix: &Indexer,
    idx: usize,
    stream: &NoiseStream,
    sigma: f64,
    replicate: u64,
) -> f64 {
    let base = ix.split(idx);
    let mut acc = CompensatedSum::new();
    for (off, w) in dk.offsets.iter().zip(&dk.weights) {
        let (s, key) = ix.neighbor(base, *off);
        let mult = if sigma == 0.0 {
            1.0
        } else {
            let k: &[i64] = if ix.dim == 1 { &key[..1] } else { &key };
            1.0 + sigma * dk.inv_sqrt_cell * stream.gaussian(replicate, k)
        };
        acc.add(w * vals[s] * mult);
    }
    acc.value()
}

/// One realization of `∫ u(y) φ_n(x − y) dZ(y)` at grid node `idx`.
pub fn stochastic_mollify_at(
    u: &Field,
    idx: usize,
    kernel: &ScaledKernel,
    noise: &NoiseModel,
    replicate: u64,
) -> Result<f64> {
    noise.require(NoiseKind::WhiteNoiseMeasure)?;
    check_field(u)?;
    if idx >= u.len() {
        return Err(Error::param("idx", format!("{idx} out of range for {} nodes", u.len())));
    }
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let stream = NoiseStream::new(noise.base_seed(), StreamDomain::WhiteNoiseCell);
    Ok(point_sample(u.values(), &dk, &ix, idx, &stream, noise.sigma(), replicate))
}

/// One realization over the whole field. All nodes share the same `dZ`
/// realization, so this agrees node-by-node with [`stochastic_mollify_at`].
pub fn stochastic_mollify_sample(
    u: &Field,
    kernel: &ScaledKernel,
    noise: &NoiseModel,
    replicate: u64,
) -> Result<Field> {
    noise.require(NoiseKind::WhiteNoiseMeasure)?;
    check_field(u)?;
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let stream = NoiseStream::new(noise.base_seed(), StreamDomain::WhiteNoiseCell);
    let sigma = noise.sigma();
    if sigma == 0.0 {
        return mollify(u, kernel);
    }
    // pre-draw one ξ per (possibly virtual) cell
    let margin = if ix.periodic { [0, 0] } else { dk.radius };
    let span = [ix.points + 2 * margin[0], if ix.dim == 2 { ix.points + 2 * margin[1] } else { 1 }];
    let xi: Vec<f64> = (0..(span[0] * span[1]) as usize)
        .into_par_iter()
        .map(|c| {
            let a = c as i64 / span[1] - margin[0];
            let b = c as i64 % span[1] - margin[1];
            if ix.dim == 1 {
                stream.gaussian(replicate, &[a])
            } else {
                stream.gaussian(replicate, &[a, b])
            }
        })
        .collect();
    let vals = u.values();
    let out: Vec<f64> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let base = ix.split(i);
            let mut acc = CompensatedSum::new();
            for (off, w) in dk.offsets.iter().zip(&dk.weights) {
                let (s, key) = ix.neighbor(base, *off);
                let c = (key[0] + margin[0]) * span[1] + if ix.dim == 2 { key[1] + margin[1] } else { 0 };
                let mult = 1.0 + sigma * dk.inv_sqrt_cell * xi[c as usize];
                acc.add(w * vals[s] * mult);
            }
            acc.value()
        })
        .collect();
    u.with_values(out)
}

/// Closed-form pointwise variance `σ² h^{−N} Σ_j (w_j u_j)²`, the grid form
/// of `σ² ∫ u(y)² φ_n(x − y)² dy`.
pub fn stochastic_variance_at(u: &Field, idx: usize, kernel: &ScaledKernel, sigma: f64) -> Result<f64> {
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let base = ix.split(idx);
    let vals = u.values();
    let mut acc = CompensatedSum::new();
    for (off, w) in dk.offsets.iter().zip(&dk.weights) {
        let (s, _) = ix.neighbor(base, *off);
        acc.add((w * vals[s]).powi(2));
    }
    Ok(sigma * sigma * dk.inv_sqrt_cell.powi(2) * acc.value())
}

/// Monte Carlo samples at one node for replicates `0..replicates`, computed in
/// parallel and returned in replicate order.
pub fn replicate_samples(
    u: &Field,
    idx: usize,
    kernel: &ScaledKernel,
    noise: &NoiseModel,
    replicates: usize,
) -> Result<Vec<f64>> {
    noise.require(NoiseKind::WhiteNoiseMeasure)?;
    check_field(u)?;
    if idx >= u.len() {
        return Err(Error::param("idx", format!("{idx} out of range for {} nodes", u.len())));
    }
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let stream = NoiseStream::new(noise.base_seed(), StreamDomain::WhiteNoiseCell);
    Ok((0..replicates as u64)
        .into_par_iter()
        .map(|r| point_sample(u.values(), &dk, &ix, idx, &stream, noise.sigma(), r))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseDecomposition {
    pub target: f64,
    pub mollified: f64,
    /// `(φ_n ∗ u − u)²` at the node, from the deterministic operator.
    pub bias_sq: f64,
    /// Monte Carlo variance (divisor `R`, matching the MSE identity).
    pub variance: f64,
    pub variance_se: f64,
    /// Closed-form variance for comparison.
    pub variance_closed: f64,
    /// Monte Carlo mean of `(K − u)²`.
    pub mse: f64,
    pub mse_se: f64,
    pub mean: f64,
    pub mean_se: f64,
}

impl MseDecomposition {
    /// `|mse − bias² − variance|`.
    pub fn gap(&self) -> f64 {
        (self.mse - self.bias_sq - self.variance).abs()
    }

    /// Whether the gap is within 3 Monte Carlo standard errors of the MSE,
    /// plus a rounding floor for the noise-free case.
    pub fn additive(&self) -> bool {
        self.gap() <= 3.0 * self.mse_se + 1e-12 * self.mse.max(f64::MIN_POSITIVE)
    }
}

/// Bias², variance and MSE of the stochastic mollifier at node `idx`.
pub fn mse_decomposition(
    u: &Field,
    idx: usize,
    kernel: &ScaledKernel,
    noise: &NoiseModel,
    replicates: usize,
) -> Result<MseDecomposition> {
    if replicates < 100 {
        return Err(Error::param("replicates", format!("need at least 100, got {replicates}")));
    }
    let samples = replicate_samples(u, idx, kernel, noise, replicates)?;
    let target = u.values()[idx];
    let mollified = mollify_at(u, idx, kernel)?;
    let moments = SampleMoments::from_samples(&samples);
    let sq: Vec<f64> = samples.iter().map(|s| (s - target).powi(2)).collect();
    let sq_moments = SampleMoments::from_samples(&sq);
    let rf = replicates as f64;
    Ok(MseDecomposition {
        target,
        mollified,
        bias_sq: (mollified - target).powi(2),
        variance: moments.variance * (rf - 1.0) / rf,
        variance_se: moments.variance_se,
        variance_closed: stochastic_variance_at(u, idx, kernel, noise.sigma())?,
        mse: sq_moments.mean,
        mse_se: sq_moments.mean_se,
        mean: moments.mean,
        mean_se: moments.mean_se,
    })
}

/// `(φ_n^γ ∗ u)` at a single node.
pub fn mollify_at(u: &Field, idx: usize, kernel: &ScaledKernel) -> Result<f64> {
    let dk = DiscreteKernel::build(u.domain(), kernel)?;
    let ix = Indexer::new(u.domain());
    let base = ix.split(idx);
    let vals = u.values();
    let mut acc = CompensatedSum::new();
    for (off, w) in dk.offsets.iter().zip(&dk.weights) {
        let (s, _) = ix.neighbor(base, *off);
        acc.add(w * vals[s]);
    }
    Ok(acc.value())
}
