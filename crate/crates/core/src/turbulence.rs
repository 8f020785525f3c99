//! Fractional turbulence toy problems on periodic grids.
//!
//! The flow model is a 1D pressure-free fractional Burgers equation
//!
//! ```text
//! ᶜD_t^α u + u u_x = −ν (−Δ)^s u + ξ
//! ```
//!
//! used as a stand-in for the incompressible Navier–Stokes system: it has
//! Caputo memory in time, fractional dissipation, a quadratic nonlinearity
//! and stochastic forcing, while staying cheap enough for desk-scale runs.
//! Pressure and incompressibility are out of scope.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::field::{Domain, Field, PeriodicGrid};
use crate::fractional::{gamma_fn, l1_weights, FracOrder, SpectralField, TimeGrid};
use crate::kantorovich::NoiseModel;
use crate::mollifier::{boundary_layer, make_bump, mollify, stochastic_mollify_sample, ScaledKernel};
use crate::report::ExperimentReport;
use crate::rng::{NoiseStream, StreamDomain};
use crate::stats::{CompensatedSum, SampleMoments};

/// Number of low Fourier modes receiving stochastic forcing.
pub const FORCED_MODES: usize = 4;
/// Abort threshold on the growth of `max |u|`.
pub const GROWTH_LIMIT: f64 = 1e6;
/// Bound on `Γ(2−α) h^α · max|u0| · k_max` for the explicit advection term.
pub const ADVECTIVE_GUARD: f64 = 0.5;
/// Magic bytes of binary snapshots.
pub const SNAPSHOT_MAGIC: [u8; 8] = *b"SFFIELD1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracFlowParams {
    alpha: FracOrder,
    s: f64,
    nu: f64,
    sigma_f: f64,
}

impl FracFlowParams {
    pub fn new(alpha: FracOrder, s: f64, nu: f64, sigma_f: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.5) {
            return Err(Error::param("s", format!("must lie in (0, 1.5], got {s}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::param("nu", format!("must be positive, got {nu}")));
        }
        if !(sigma_f >= 0.0 && sigma_f.is_finite()) {
            return Err(Error::param("sigma_f", format!("must be non-negative, got {sigma_f}")));
        }
        Ok(Self { alpha, s, nu, sigma_f })
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }
}

/// Random-phase spectrum `k^{−p/2}` over modes `1..=modes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub exponent: f64,
    pub modes: usize,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn new(exponent: f64, modes: usize, seed: u64) -> Result<Self> {
        if modes < 2 {
            return Err(Error::param("modes", format!("need at least 2, got {modes}")));
        }
        if !exponent.is_finite() {
            return Err(Error::param("exponent", "must be finite"));
        }
        Ok(Self { exponent, modes, seed })
    }

    /// Gaussian `(a_k, b_k)` for `k = 1..=modes`.
    pub fn coefficients(&self) -> Vec<(f64, f64)> {
        let stream = NoiseStream::new(self.seed, StreamDomain::Spectrum);
        (1..=self.modes as i64)
            .map(|k| (stream.gaussian(0, &[k, 0]), stream.gaussian(0, &[k, 1])))
            .collect()
    }
}

fn require_1d(grid: &PeriodicGrid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    Ok(())
}

/// `u(x) = Σ_k k^{−p/2} (a_k cos κ_k x + b_k sin κ_k x)` with `κ_k = 2πk/L`.
pub fn synth_velocity(spec: &SpectrumSpec, grid: &PeriodicGrid) -> Result<Field> {
    require_1d(grid)?;
    if spec.modes > grid.points() / 4 {
        return Err(Error::param(
            "modes",
            format!("{} exceeds points/4 = {}", spec.modes, grid.points() / 4),
        ));
    }
    let coef = spec.coefficients();
    let base = std::f64::consts::TAU / grid.length();
    Ok(Field::periodic_1d(*grid, |x| {
        let mut acc = CompensatedSum::new();
        for (i, (a, b)) in coef.iter().enumerate() {
            let k = (i + 1) as f64;
            let amp = k.powf(-spec.exponent / 2.0);
            acc.add(amp * (a * (base * k * x).cos() + b * (base * k * x).sin()));
        }
        acc.value()
    }))
}

/// Solver switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersOptions {
    /// Disable to solve the linear fractional relaxation problem.
    pub nonlinear: bool,
    /// Store every `keep_every`-th snapshot (the final one is always kept).
    pub keep_every: usize,
}

impl Default for BurgersOptions {
    fn default() -> Self {
        Self {
            nonlinear: true,
            keep_every: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

/// Solves the fractional Burgers proxy with default options.
pub fn frac_burgers_solve(
    u0: &Field,
    params: &FracFlowParams,
    grid: &PeriodicGrid,
    t_grid: &TimeGrid,
    noise_seed: u64,
) -> Result<Trajectory> {
    frac_burgers_solve_with(u0, params, grid, t_grid, noise_seed, &BurgersOptions::default())
}

/// L1 Caputo stepping in Fourier space.
///
/// With `μ = Γ(2−α) h^α` and `D^m = U^m − U^{m−1}`, each mode solves
///
/// ```text
/// (1 + μ ν |ξ|^{2s}) U^n = U^{n−1} − Σ_{j=1}^{n−1} b_j D^{n−j} + μ N(U^{n−1})
/// ```
///
/// so dissipation is implicit and the dealiased advection explicit. Forcing
/// adds `σ_f √h (a cos κx + b sin κx)` on the lowest [`FORCED_MODES`] modes
/// after each step, with `(a, b)` keyed by `(noise_seed, step, mode)`.
pub fn frac_burgers_solve_with(
    u0: &Field,
    params: &FracFlowParams,
    grid: &PeriodicGrid,
    t_grid: &TimeGrid,
    noise_seed: u64,
    opts: &BurgersOptions,
) -> Result<Trajectory> {
    require_1d(grid)?;
    match u0.domain() {
        Domain::Periodic(g) if g == grid => {}
        _ => return Err(Error::param("u0", "initial field must live on the solver grid")),
    }
    if opts.keep_every == 0 {
        return Err(Error::param("keep_every", "must be at least 1"));
    }
    let p = grid.points();
    let h = t_grid.step();
    let alpha = params.alpha();
    let mu = gamma_fn(2.0 - alpha.value())? * h.powf(alpha.value());
    let cutoff = p / 3;
    let k_max = grid.wavenumber(cutoff).abs();
    let u_max0 = u0.max_abs();
    if opts.nonlinear {
        let courant = mu * u_max0 * k_max;
        if courant > ADVECTIVE_GUARD {
            return Err(Error::StepSizeGuard {
                value: courant,
                limit: ADVECTIVE_GUARD,
            });
        }
    }

    let steps = t_grid.steps();
    let b = l1_weights(alpha, steps);
    let lambda: Vec<f64> = (0..p)
        .map(|j| {
            let k2 = grid.wavenumber(j).powi(2);
            if k2 == 0.0 {
                0.0
            } else {
                params.nu() * k2.powf(params.s())
            }
        })
        .collect();
    let dealias: Vec<bool> = (0..p).map(|j| grid.mode(j).unsigned_abs() as usize <= cutoff).collect();
    let forcing = NoiseStream::new(noise_seed, StreamDomain::Forcing);
    let force_amp = params.sigma_f() * h.sqrt() * p as f64 / 2.0;

    let mut spec = SpectralField::from_field(u0)?;
    let mut current: Vec<Complex64> = spec.coefficients().to_vec();
    let mut diffs: Vec<Vec<Complex64>> = Vec::with_capacity(steps);
    let mut times = vec![t_grid.node(0)];
    let mut snapshots = vec![u0.clone()];
    let limit = GROWTH_LIMIT * u_max0.max(1.0);
    let zero = Complex64::new(0.0, 0.0);

    for n in 1..=steps {
        let nonlin = if opts.nonlinear {
            advection(&mut spec, &current, &dealias)
        } else {
            vec![zero; p]
        };
        let mut next = vec![zero; p];
        for k in 0..p {
            let mut hist = zero;
            for j in 1..n {
                hist += b[j] * diffs[n - j - 1][k];
            }
            next[k] = (current[k] - hist + mu * nonlin[k]) / (1.0 + mu * lambda[k]);
        }
        if force_amp > 0.0 {
            for m in 1..=FORCED_MODES.min(cutoff) {
                let a = forcing.gaussian(n as u64, &[m as i64, 0]);
                let bb = forcing.gaussian(n as u64, &[m as i64, 1]);
                let c = force_amp * Complex64::new(a, -bb);
                next[m] += c;
                next[p - m] += c.conj();
            }
        }
        diffs.push(next.iter().zip(&current).map(|(a, b)| a - b).collect());
        current = next;

        let keep = n % opts.keep_every == 0 || n == steps;
        spec.coefficients_mut().copy_from_slice(&current);
        let real = spec.to_real();
        let norm = real.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(norm <= limit) {
            return Err(Error::Unstable { step: n, norm });
        }
        if keep {
            times.push(t_grid.node(n));
            snapshots.push(u0.with_values(real)?);
        }
    }
    Ok(Trajectory { times, snapshots })
}

/// Dealiased `−u u_x` in coefficient space.
fn advection(spec: &mut SpectralField, coef: &[Complex64], keep: &[bool]) -> Vec<Complex64> {
    let p = coef.len();
    let zero = Complex64::new(0.0, 0.0);
    let grid = *spec.grid();
    let trunc: Vec<Complex64> = coef.iter().zip(keep).map(|(c, k)| if *k { *c } else { zero }).collect();
    spec.coefficients_mut().copy_from_slice(&trunc);
    let u = spec.to_real();
    for (j, c) in spec.coefficients_mut().iter_mut().enumerate() {
        *c = Complex64::new(0.0, grid.wavenumber(j)) * trunc[j];
    }
    // the Nyquist derivative of a real field is not real; it is already cut
    let ux = spec.to_real();
    let prod: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| -a * b).collect();
    spec.load_real(&prod);
    (0..p)
        .map(|j| if keep[j] { spec.coefficients()[j] } else { zero })
        .collect()
}

/// `ε = ν ∫ |(−Δ)^{s/2} u|²`, by Parseval over the DFT coefficients.
pub fn energy_dissipation(u: &Field, params: &FracFlowParams) -> Result<f64> {
    let spec = SpectralField::from_field(u)?;
    let grid = *spec.grid();
    let total = grid.total_points() as f64;
    let vol = grid.length().powi(grid.dim() as i32);
    let mut acc = CompensatedSum::new();
    for (idx, c) in spec.coefficients().iter().enumerate() {
        let k2 = spec.wavevector_sq(idx);
        if k2 > 0.0 {
            acc.add(k2.powf(params.s()) * c.norm_sqr());
        }
    }
    Ok(params.nu() * vol / (total * total) * acc.value())
}

/// `|E[ε_n] − ε|` for the mollified field over `n_list`.
///
/// The deterministic column (`param = det`) uses the mollified expectation.
/// When `noise.sigma() > 0` and `replicates > 0` a Monte Carlo column
/// (`param = mc`) averages `ε` over stochastic mollifications; that column
/// also carries the energy injected by the noise, so it is reported only.
pub fn dissipation_convergence(
    u: &Field,
    params: &FracFlowParams,
    n_list: &[usize],
    noise: &NoiseModel,
    replicates: usize,
) -> Result<ExperimentReport> {
    check_n_list(n_list)?;
    let eps = energy_dissipation(u, params)?;
    let bump = make_bump(u.dim())?;
    let mut report = ExperimentReport::new("dissipation");
    report.push("exact", 0.0, "eps", eps, 0.0);
    let mut errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let kernel = ScaledKernel::standard(bump, n)?;
        let eps_n = energy_dissipation(&mollify(u, &kernel)?, params)?;
        let err = (eps_n - eps).abs();
        errors.push(err);
        report.push("det", n as f64, "eps_n", eps_n, 0.0);
        report.push("det", n as f64, "abs_error", err, 0.0);
        if noise.sigma() > 0.0 && replicates > 0 {
            let samples: Vec<f64> = (0..replicates as u64)
                .into_par_iter()
                .map(|r| {
                    stochastic_mollify_sample(u, &kernel, noise, r).and_then(|f| energy_dissipation(&f, params))
                })
                .collect::<Result<_>>()?;
            let m = SampleMoments::from_samples(&samples);
            report.push("mc", n as f64, "eps_n", m.mean, m.mean_se);
            report.push("mc", n as f64, "abs_error", (m.mean - eps).abs(), m.mean_se);
        }
    }
    report.fit_series("det", "abs_error");
    let constant = eps == 0.0;
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    report.check(
        "dissipation error strictly decreasing",
        decreasing || (constant && errors.iter().all(|e| *e == 0.0)),
        format!("errors {errors:?}"),
    );
    Ok(report)
}

/// `‖φ_n ∗ u − u‖_{L²}` over `n_list`; boxed fields skip boundary-layer nodes.
pub fn l2_convergence(u: &Field, n_list: &[usize]) -> Result<ExperimentReport> {
    check_n_list(n_list)?;
    let bump = make_bump(u.dim())?;
    let cell = u.domain().cell_volume();
    let mut report = ExperimentReport::new("l2");
    let mut errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let kernel = ScaledKernel::standard(bump, n)?;
        let smooth = mollify(u, &kernel)?;
        let layer = boundary_layer(u, &kernel)?;
        let mut acc = CompensatedSum::new();
        for ((a, b), skip) in smooth.values().iter().zip(u.values()).zip(&layer) {
            if !skip {
                acc.add((a - b).powi(2));
            }
        }
        let err = (cell * acc.value()).sqrt();
        errors.push(err);
        report.push("u", n as f64, "l2_error", err, 0.0);
    }
    report.fit_series("u", "l2_error");
    report.check(
        "l2 error non-increasing",
        errors.windows(2).all(|w| w[1] <= w[0]),
        format!("errors {errors:?}"),
    );
    Ok(report)
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::param("n_list", "must not be empty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n_list", "must be strictly increasing"));
    }
    Ok(())
}

/// Writes `x,u` (or `x,y,u`) rows with an LF-terminated header.
pub fn write_snapshot_csv<W: Write>(u: &Field, mut out: W) -> io::Result<()> {
    match u.dim() {
        1 => writeln!(out, "x,u")?,
        _ => writeln!(out, "x,y,u")?,
    }
    for (i, v) in u.values().iter().enumerate() {
        let c = u.coordinates(i);
        for x in c {
            write!(out, "{x},")?;
        }
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Binary snapshot: 8-byte magic, `u32` dim, `u32` points (little endian),
/// then the values as little-endian `f64` in row-major order.
pub fn write_snapshot_binary<W: Write>(u: &Field, mut out: W) -> io::Result<()> {
    out.write_all(&SNAPSHOT_MAGIC)?;
    out.write_all(&(u.dim() as u32).to_le_bytes())?;
    out.write_all(&(u.domain().points() as u32).to_le_bytes())?;
    for v in u.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a binary snapshot back as `(dim, points, values)`.
pub fn read_snapshot_binary<R: Read>(mut input: R) -> io::Result<(usize, usize, Vec<f64>)> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..8] != SNAPSHOT_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad snapshot magic"));
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let points = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let count = points.pow(dim as u32);
    let mut values = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok((dim, points, values))
}
