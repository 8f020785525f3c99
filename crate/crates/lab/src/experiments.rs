//! The experiment catalogue. Each experiment returns an [`ExperimentReport`]
//! whose checks encode its tolerance assertions.

use anyhow::{bail, Result};
use rayon::prelude::*;

use stochfrac::field::{Field, PeriodicGrid};
use stochfrac::fractional::{caputo_l1, gagliardo_seminorm, gamma_fn, mittag_leffler, FracOrder, TimeGrid};
use stochfrac::kantorovich::{apply_expectation, voronovskaya_remainder, GridSpec, KantorovichStencil, NoiseKind, NoiseModel};
use stochfrac::kernel::{eval_m, eval_phi, eval_z, partition_sum};
use stochfrac::mollifier::{
    c_phi, make_bump, mollify, mse_decomposition, replicate_samples, stochastic_variance_at, ScaledKernel,
};
use stochfrac::rng::{NoiseStream, StreamDomain};
use stochfrac::stats::SampleMoments;
use stochfrac::testfn::{Polynomial, SineProduct};
use stochfrac::turbulence::{
    dissipation_convergence, energy_dissipation, frac_burgers_solve_with, l2_convergence, synth_velocity,
    BurgersOptions, FracFlowParams, SpectrumSpec, ADVECTIVE_GUARD,
};
use stochfrac::{ExperimentReport, KernelParams};

use crate::config::{Experiment, NoiseKindName, RunConfig};

const HOLDER_ORDERS: [f64; 3] = [0.3, 0.5, 0.7];

/// A report plus any field snapshots worth writing next to it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub snapshots: Vec<(String, Field)>,
}

impl From<ExperimentReport> for Outcome {
    fn from(report: ExperimentReport) -> Self {
        Outcome {
            report,
            snapshots: Vec::new(),
        }
    }
}

/// Runs one experiment, on a dedicated pool when `cfg.workers > 0`.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
        pool.install(|| dispatch(cfg))?
    } else {
        dispatch(cfg)?
    };
    out.report.config_echo = serde_json::to_value(cfg)?;
    Ok(out)
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    log::info!("running {} (seed {})", cfg.experiment, cfg.seed);
    Ok(match cfg.experiment {
        Experiment::Kernel => kernel(cfg)?.into(),
        Experiment::Caputo => caputo(cfg)?.into(),
        Experiment::KantorovichRates => kantorovich_rates(cfg)?.into(),
        Experiment::VarianceScaling => variance_scaling(cfg)?.into(),
        Experiment::Voronovskaya => voronovskaya(cfg)?.into(),
        Experiment::MollifierRates => mollifier_rates(cfg)?.into(),
        Experiment::Mse => mse(cfg)?.into(),
        Experiment::Burgers => burgers(cfg)?,
        Experiment::Dissipation => dissipation(cfg)?.into(),
        Experiment::L2 => l2(cfg)?.into(),
    })
}

fn require_1d(cfg: &RunConfig) -> Result<()> {
    if cfg.dim != 1 {
        bail!("experiment `{}` supports dim 1 only; config key `dim` is {}", cfg.experiment, cfg.dim);
    }
    Ok(())
}

fn require_noise(cfg: &RunConfig, want: NoiseKindName) -> Result<()> {
    if cfg.noise_kind != want {
        bail!(
            "experiment `{}` needs config key `noise_kind` = {:?}, got {:?}",
            cfg.experiment,
            want,
            cfg.noise_kind
        );
    }
    Ok(())
}

fn kernel_params(cfg: &RunConfig) -> Result<KernelParams> {
    Ok(KernelParams::new(cfg.q, cfg.lambda, cfg.k)?)
}

fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn slope_check(r: &mut ExperimentReport, param: &str, metric: &str, lo: f64, hi: f64) {
    match r.fit_series(param, metric) {
        Some(fit) => r.check(
            format!("slope {param} {metric} in [{lo:.2}, {hi:.2}]"),
            fit.slope >= lo && fit.slope <= hi,
            format!("slope {:.4} ± {:.4}", fit.slope, fit.half_width),
        ),
        None => r.check(
            format!("slope {param} {metric} in [{lo:.2}, {hi:.2}]"),
            false,
            "fewer than 4 positive points",
        ),
    }
}

fn orders_with(extra: f64) -> Vec<f64> {
    let mut v = HOLDER_ORDERS.to_vec();
    if !v.contains(&extra) {
        v.push(extra);
    }
    v
}

fn periodic(points: usize) -> Result<PeriodicGrid> {
    Ok(PeriodicGrid::new(std::f64::consts::TAU, points, 1)?)
}

/// Partition of unity over a `(q, λ)` grid and symmetry/positivity on random
/// inputs.
fn kernel(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("kernel");
    let stream = NoiseStream::new(cfg.seed, StreamDomain::Synthetic);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for q in [0.5, 1.0, 2.0] {
        for l in [0.5, 1.0, 2.0] {
            pairs.push((q, l));
        }
    }
    if !pairs.contains(&(cfg.q, cfg.lambda)) {
        pairs.push((cfg.q, cfg.lambda));
    }
    for (pi, &(q, l)) in pairs.iter().enumerate() {
        let p = KernelParams::new(q, l, cfg.k)?;
        let param = format!("q={q};lambda={l}");
        let mut xs: Vec<f64> = (0..100).map(|i| stream.uniform_in(0, &[pi as i64, i], -3.0, 3.0)).collect();
        xs.sort_by(f64::total_cmp);
        let mut worst = 0.0f64;
        for x in xs {
            let dev = (partition_sum(&p, x) - 1.0).abs();
            worst = worst.max(dev);
            r.push(&param, x, "partition_deviation", dev, 0.0);
        }
        r.check(format!("partition of unity {param}"), worst < 1e-10, format!("max deviation {worst:e}"));
    }

    let trials = 10_000;
    let draws: Vec<(f64, f64, f64, f64)> = (0..trials as i64)
        .into_par_iter()
        .map(|i| {
            let u = |k: i64, lo: f64, hi: f64| stream.uniform_in(1, &[i, k], lo, hi);
            let q = u(0, 0.05f64.ln(), 20f64.ln()).exp();
            let p = KernelParams::new(q, u(1, 0.05, 5.0), cfg.k).expect("sampled parameters are valid");
            let x = u(2, -20.0, 20.0);
            let asym = (eval_phi(&p, x) - eval_phi(&p, -x)).abs();
            let dim = 1 + (i % 3) as usize;
            let y: Vec<f64> = (0..dim as i64).map(|d| u(3 + d, -10.0, 10.0)).collect();
            let z = eval_z(&p, &y).expect("non-empty input");
            (asym, eval_phi(&p, x), eval_m(&p, x), z)
        })
        .collect();
    let asym = sup(draws.iter().map(|d| d.0));
    let min_of = |f: fn(&(f64, f64, f64, f64)) -> f64| draws.iter().map(f).fold(f64::INFINITY, f64::min);
    let (phi_min, m_min, z_min) = (min_of(|d| d.1), min_of(|d| d.2), min_of(|d| d.3));
    let n = trials as f64;
    r.push("random", n, "symmetry_max", asym, 0.0);
    r.push("random", n, "phi_min", phi_min, 0.0);
    r.push("random", n, "m_min", m_min, 0.0);
    r.push("random", n, "z_min", z_min, 0.0);
    r.check("phi even", asym <= 1e-14, format!("max |phi(x) - phi(-x)| = {asym:e}"));
    r.check(
        "phi, M, Z positive",
        phi_min > 0.0 && m_min > 0.0 && z_min > 0.0,
        format!("minima {phi_min:e}, {m_min:e}, {z_min:e}"),
    );
    Ok(r)
}

/// L1 error against exact Caputo derivatives of `t` and `t²` on `[0, 1]`.
fn caputo(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("caputo");
    for alpha in orders_with(cfg.alpha) {
        let a = FracOrder::new(alpha)?;
        let g1 = gamma_fn(2.0 - alpha)?;
        let g2 = gamma_fn(3.0 - alpha)?;
        let lin = format!("f=t;alpha={alpha}");
        let quad = format!("f=t2;alpha={alpha}");
        let mut lin_worst = 0.0f64;
        for &steps in &cfg.n_list {
            let grid = TimeGrid::new(0.0, 1.0, steps)?;
            let nodes = grid.nodes();
            let err = |f: fn(f64) -> f64, exact: &dyn Fn(f64) -> f64| -> Result<f64> {
                let d = caputo_l1(&grid, &grid.sample(f), a)?;
                Ok(sup((1..nodes.len()).map(|n| (d[n] - exact(nodes[n])).abs())))
            };
            let e1 = err(|t| t, &|t: f64| t.powf(1.0 - alpha) / g1)?;
            let e2 = err(|t| t * t, &|t: f64| 2.0 * t.powf(2.0 - alpha) / g2)?;
            lin_worst = lin_worst.max(e1);
            r.push(&lin, steps as f64, "max_error", e1, 0.0);
            r.push(&quad, steps as f64, "max_error", e2, 0.0);
        }
        r.check(format!("L1 exact for {lin}"), lin_worst <= 1e-12, format!("max error {lin_worst:e}"));
        let order = 2.0 - alpha;
        slope_check(&mut r, &quad, "max_error", -order - 0.2, -order + 0.2);
    }
    Ok(r)
}

/// Sup error of the expectation operator on `Σ |x_i − 1/2|^α`, plus the
/// noisy mean-square error at the cusp.
fn kantorovich_rates(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_noise(cfg, NoiseKindName::CellMultiplier)?;
    let mut r = ExperimentReport::new("kantorovich_rates");
    let p = kernel_params(cfg)?;
    let noise = NoiseModel::new(cfg.sigma, cfg.seed, NoiseKind::CellMultiplier)?;
    let dim = cfg.dim;
    let points: Vec<Vec<f64>> = match dim {
        1 => (0..=64).map(|j| vec![j as f64 / 64.0]).collect(),
        _ => (0..=8)
            .flat_map(|i| (0..=8).map(move |j| vec![i as f64 / 8.0, j as f64 / 8.0]))
            .collect(),
    };
    let cusp = vec![0.5; dim];
    for alpha in orders_with(cfg.alpha) {
        let f = move |x: &[f64]| x.iter().map(|v| (v - 0.5).abs().powf(alpha)).sum::<f64>();
        let param = format!("alpha={alpha}");
        for &n in &cfg.n_list {
            let grid = GridSpec::cube(n, dim, 0.0, 1.0)?;
            let errs = points
                .iter()
                .map(|x| Ok((apply_expectation(f, x, &grid, &p)? - f(x)).abs()))
                .collect::<Result<Vec<f64>>>()?;
            r.push(&param, n as f64, "sup_error", sup(errs), 0.0);

            let st = KantorovichStencil::build(f, &cusp, &grid, &p)?;
            let target = f(&cusp);
            let sq = (0..cfg.replicates as u64)
                .into_par_iter()
                .map(|rep| Ok((st.sample(&noise, rep)? - target).powi(2)))
                .collect::<Result<Vec<f64>>>()?;
            let m = SampleMoments::from_samples(&sq);
            r.push(&param, n as f64, "mse_at_cusp", m.mean, m.mean_se);
        }
        if HOLDER_ORDERS.contains(&alpha) {
            slope_check(&mut r, &param, "sup_error", -alpha - 0.2, -alpha + 0.2);
        } else {
            r.fit_series(&param, "sup_error");
        }
    }
    Ok(r)
}

/// Pointwise variance growth of the stochastic mollifier (asserted) and of
/// the lattice operator (reported only).
fn variance_scaling(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_1d(cfg)?;
    let mut r = ExperimentReport::new("variance_scaling");
    let grid = periodic(cfg.points)?;
    let u = Field::periodic_1d(grid, |x| 1.0 + 0.5 * x.sin());
    let idx = cfg.points / 8;
    let bump = make_bump(1)?;
    let white = NoiseModel::new(cfg.sigma, cfg.seed, NoiseKind::WhiteNoiseMeasure)?;
    for &n in &cfg.n_list {
        let k = ScaledKernel::standard(bump, n)?;
        let samples = replicate_samples(&u, idx, &k, &white, cfg.replicates)?;
        let m = SampleMoments::from_samples(&samples);
        let closed = stochastic_variance_at(&u, idx, &k, cfg.sigma)?;
        r.push("mollifier", n as f64, "variance", m.variance, m.variance_se);
        r.push("mollifier", n as f64, "variance_closed", closed, 0.0);
        r.check(
            format!("mollifier variance matches closed form at n={n}"),
            (m.variance - closed).abs() <= 3.0 * m.variance_se,
            format!("mc {:e} ± {:e}, closed {closed:e}", m.variance, m.variance_se),
        );
    }
    slope_check(&mut r, "mollifier", "variance", 0.7, 1.3);

    let p = kernel_params(cfg)?;
    let cells = NoiseModel::new(cfg.sigma, cfg.seed, NoiseKind::CellMultiplier)?;
    let f = |x: &[f64]| 1.0 + 0.5 * (std::f64::consts::TAU * x[0]).sin();
    for &n in &cfg.n_list {
        let grid = GridSpec::cube(n, 1, 0.0, 1.0)?;
        let st = KantorovichStencil::build(f, &[0.3], &grid, &p)?;
        let samples = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|rep| Ok(st.sample(&cells, rep)?))
            .collect::<Result<Vec<f64>>>()?;
        let m = SampleMoments::from_samples(&samples);
        r.push("lattice", n as f64, "variance", m.variance, m.variance_se);
        r.push("lattice", n as f64, "variance_closed", st.variance(cfg.sigma), 0.0);
    }
    r.fit_series("lattice", "variance_closed");
    Ok(r)
}

/// Voronovskaya remainders: exact for low-degree polynomials, and faster
/// decay with the second-order expansion for a sine.
fn voronovskaya(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("voronovskaya");
    let p = kernel_params(cfg)?;
    let polys = [
        (1, 1, Polynomial::new(1, vec![(2.0, vec![0]), (-3.0, vec![1])])),
        (1, 2, Polynomial::new(1, vec![(1.0, vec![0]), (1.0, vec![1]), (-2.0, vec![2])])),
        (2, 1, Polynomial::new(2, vec![(1.0, vec![0, 0]), (1.0, vec![1, 0]), (-2.0, vec![0, 1])])),
        (
            2,
            2,
            Polynomial::new(
                2,
                vec![(1.0, vec![0, 0]), (1.0, vec![1, 1]), (-1.0, vec![0, 2]), (0.5, vec![2, 0])],
            ),
        ),
    ];
    for (dim, m, poly) in &polys {
        let x: Vec<f64> = [0.37, -0.21][..*dim].to_vec();
        let param = format!("poly;N={dim};m={m}");
        let mut worst = 0.0f64;
        for &n in &cfg.n_list {
            let grid = GridSpec::cube(n, *dim, -1.0, 1.0)?;
            let rem = voronovskaya_remainder(poly, &x, &grid, &p, *m)?.abs();
            worst = worst.max(rem);
            r.push(&param, n as f64, "abs_remainder", rem, 0.0);
        }
        r.check(format!("exact for {param}"), worst <= 1e-10, format!("max remainder {worst:e}"));
    }

    let sine = SineProduct::new(vec![1.3], vec![0.2]);
    let mut slopes = Vec::new();
    for m in [1, 2] {
        let param = format!("sin;m={m}");
        for &n in &cfg.n_list {
            let grid = GridSpec::cube(n, 1, -1.0, 1.0)?;
            let rem = voronovskaya_remainder(&sine, &[0.37], &grid, &p, m)?.abs();
            r.push(&param, n as f64, "abs_remainder", rem, 0.0);
        }
        slopes.push(r.fit_series(&param, "abs_remainder").map(|f| f.slope));
    }
    match (slopes[0], slopes[1]) {
        (Some(s1), Some(s2)) => r.check(
            "sine remainder decays faster with m=2",
            s2 < s1,
            format!("slopes m=1 {s1:.4}, m=2 {s2:.4}"),
        ),
        _ => r.check("sine remainder decays faster with m=2", false, "fewer than 4 positive points"),
    }
    Ok(r)
}

/// Sup-error rates of the deterministic mollifier on `|sin x|^α`, with the
/// pointwise bound `|f|_α C_φ n^{−α}`.
fn mollifier_rates(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_1d(cfg)?;
    let mut r = ExperimentReport::new("mollifier_rates");
    let grid = periodic(cfg.points)?;
    let bump = make_bump(1)?;
    for alpha in orders_with(cfg.alpha) {
        let a = FracOrder::new(alpha)?;
        let u = Field::periodic_1d(grid, |x| x.sin().abs().powf(alpha));
        let semi = gagliardo_seminorm(&u, a)?;
        let cphi = c_phi(&bump, a);
        let param = format!("alpha={alpha}");
        r.push(&param, 0.0, "seminorm", semi, 0.0);
        r.push(&param, 0.0, "c_phi", cphi, 0.0);
        let mut violations = 0usize;
        let mut tightest = 0.0f64;
        for &n in &cfg.n_list {
            let k = ScaledKernel::standard(bump, n)?;
            let smooth = mollify(&u, &k)?;
            let bound = semi * cphi * (n as f64).powf(-alpha);
            let errs: Vec<f64> = smooth.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).collect();
            violations += errs.iter().filter(|e| **e > bound).count();
            let worst = sup(errs.iter().copied());
            tightest = tightest.max(worst / bound);
            r.push(&param, n as f64, "sup_error", worst, 0.0);
            r.push(&param, n as f64, "bound", bound, 0.0);
        }
        r.check(
            format!("pointwise bound {param}"),
            violations == 0,
            format!("{violations} violations; max error/bound {tightest:.6}"),
        );
        if HOLDER_ORDERS.contains(&alpha) {
            slope_check(&mut r, &param, "sup_error", -alpha - 0.2, -alpha + 0.2);
        } else {
            r.fit_series(&param, "sup_error");
        }
    }
    let u = Field::periodic_1d(grid, |x| x.sin());
    for &n in &cfg.n_list {
        let k = ScaledKernel::standard(bump, n)?;
        let smooth = mollify(&u, &k)?;
        let worst = sup(smooth.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()));
        r.push("smooth", n as f64, "sup_error", worst, 0.0);
    }
    r.fit_series("smooth", "sup_error");
    Ok(r)
}

/// Bias², variance and MSE of the stochastic mollifier over an `(n, σ)` grid,
/// and the γ-scaled variant.
fn mse(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_1d(cfg)?;
    require_noise(cfg, NoiseKindName::WhiteNoise)?;
    let mut r = ExperimentReport::new("mse");
    let grid = periodic(cfg.points)?;
    let u = Field::periodic_1d(grid, |x| 1.0 + x.cos());
    let bump = make_bump(1)?;
    let sigmas = if cfg.sigma == 0.0 {
        vec![0.0]
    } else {
        vec![cfg.sigma / 2.0, cfg.sigma, 2.0 * cfg.sigma]
    };
    let mut failures = Vec::new();
    let mut cases = 0;
    for &sigma in &sigmas {
        let noise = NoiseModel::new(sigma, cfg.seed, NoiseKind::WhiteNoiseMeasure)?;
        let param = format!("sigma={sigma}");
        for &n in &cfg.n_list {
            let k = ScaledKernel::standard(bump, n)?;
            let d = mse_decomposition(&u, 0, &k, &noise, cfg.replicates)?;
            let nf = n as f64;
            r.push(&param, nf, "bias_sq", d.bias_sq, 0.0);
            r.push(&param, nf, "variance", d.variance, d.variance_se);
            r.push(&param, nf, "variance_closed", d.variance_closed, 0.0);
            r.push(&param, nf, "mse", d.mse, d.mse_se);
            r.push(&param, nf, "additivity_gap", d.gap(), d.mse_se);
            cases += 1;
            if !d.additive() {
                failures.push(format!("n={n} {param}: gap {:e} > 3 x {:e}", d.gap(), d.mse_se));
            }
        }
    }
    r.check(
        "mse = bias^2 + variance within 3 SE",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{cases} cases")
        } else {
            failures.join("; ")
        },
    );

    let gammas = if cfg.gamma > 0.0 { vec![cfg.gamma] } else { vec![0.25, 0.5] };
    let noise = NoiseModel::new(cfg.sigma, cfg.seed, NoiseKind::WhiteNoiseMeasure)?;
    for gamma in gammas {
        let param = format!("gamma={gamma}");
        let mut best = (0usize, f64::INFINITY);
        for &n in &cfg.n_list {
            let k = ScaledKernel::new(bump, n, gamma)?;
            let d = mse_decomposition(&u, 0, &k, &noise, cfg.replicates)?;
            r.push(&param, n as f64, "bias_sq", d.bias_sq, 0.0);
            r.push(&param, n as f64, "variance", d.variance, d.variance_se);
            r.push(&param, n as f64, "mse", d.mse, d.mse_se);
            if d.mse < best.1 {
                best = (n, d.mse);
            }
        }
        r.push(&param, best.0 as f64, "argmin_mse", best.1, 0.0);
    }
    Ok(r)
}

/// Projection of a 1D field on `sin(kx)` over a `2π` grid.
fn sine_amplitude(f: &Field, grid: &PeriodicGrid, k: f64) -> f64 {
    let p = grid.points() as f64;
    f.values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * (k * grid.coordinate(i)).sin())
        .sum::<f64>()
        * 2.0
        / p
}

/// Linear relaxation oracles and a forced nonlinear run.
fn burgers(cfg: &RunConfig) -> Result<Outcome> {
    require_1d(cfg)?;
    let mut r = ExperimentReport::new("burgers");
    let grid = periodic(cfg.points)?;
    let a = FracOrder::new(cfg.alpha)?;
    let linear = BurgersOptions {
        nonlinear: false,
        keep_every: usize::MAX,
    };
    let k = 2.0;
    let u0 = Field::periodic_1d(grid, |x| (k * x).sin());

    let flow = FracFlowParams::new(a, cfg.s, cfg.nu, 0.0)?;
    let want = mittag_leffler(a, -cfg.nu * k.powf(2.0 * cfg.s))?;
    let mut sweep: Vec<usize> = vec![64, 128, 256, 512, 1024];
    if !sweep.contains(&cfg.steps) {
        sweep.push(cfg.steps);
        sweep.sort_unstable();
    }
    let param = "linear;k=2";
    for &steps in &sweep {
        let t = TimeGrid::new(0.0, 1.0, steps)?;
        let traj = frac_burgers_solve_with(&u0, &flow, &grid, &t, cfg.seed, &linear)?;
        let err = (sine_amplitude(traj.last(), &grid, k) - want).abs();
        r.push(param, steps as f64, "ml_error_final", err, 0.0);
        if steps == cfg.steps {
            r.check(
                format!("Mittag-Leffler relaxation at {steps} steps"),
                err < 1e-3,
                format!("final-time error {err:e}"),
            );
        }
    }
    r.fit_series(param, "ml_error_final");

    let near_one = FracFlowParams::new(FracOrder::new(0.999)?, 1.0, cfg.nu, 0.0)?;
    let t = TimeGrid::new(0.0, 1.0, cfg.steps)?;
    let traj = frac_burgers_solve_with(&u0, &near_one, &grid, &t, cfg.seed, &linear)?;
    let err = (sine_amplitude(traj.last(), &grid, k) - (-cfg.nu * k * k).exp()).abs();
    r.push("classical;k=2", cfg.steps as f64, "exp_error_final", err, 0.0);
    r.check("classical limit alpha=0.999", err < 1e-2, format!("final-time error {err:e}"));

    // forced nonlinear run, amplitude chosen inside the advective guard
    let flow = FracFlowParams::new(a, cfg.s, cfg.nu, cfg.sigma_f)?;
    let spec = SpectrumSpec::new(2.0, 4.min(cfg.points / 4), cfg.seed)?;
    let base = synth_velocity(&spec, &grid)?;
    let mu = gamma_fn(2.0 - cfg.alpha)? * t.step().powf(cfg.alpha);
    let k_max = (cfg.points / 3) as f64;
    let amp = (0.8 * ADVECTIVE_GUARD / (mu * k_max)).min(1.0);
    let scale = amp / base.max_abs();
    let start = base.with_values(base.values().iter().map(|v| v * scale).collect())?;
    let opts = BurgersOptions {
        nonlinear: true,
        keep_every: (cfg.steps / 32).max(1),
    };
    let traj = frac_burgers_solve_with(&start, &flow, &grid, &t, cfg.seed, &opts)?;
    let h = grid.spacing();
    for (time, f) in traj.times.iter().zip(&traj.snapshots) {
        let energy = 0.5 * h * f.values().iter().map(|v| v * v).sum::<f64>();
        r.push("nonlinear", *time, "energy", energy, 0.0);
        r.push("nonlinear", *time, "dissipation", energy_dissipation(f, &flow)?, 0.0);
        r.push("nonlinear", *time, "max_abs", f.max_abs(), 0.0);
    }
    let finite = traj.last().values().iter().all(|v| v.is_finite());
    r.check("nonlinear run finite", finite, format!("{} snapshots", traj.snapshots.len()));
    Ok(Outcome {
        report: r,
        snapshots: vec![("initial".into(), start), ("final".into(), traj.last().clone())],
    })
}

/// Exact single-mode dissipation and convergence of `ε_n` for a smooth
/// synthetic field.
fn dissipation(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_1d(cfg)?;
    require_noise(cfg, NoiseKindName::WhiteNoise)?;
    let grid = periodic(cfg.points)?;
    let flow = FracFlowParams::new(FracOrder::new(cfg.alpha)?, cfg.s, cfg.nu, 0.0)?;
    let spec = SpectrumSpec::new(3.0, 8.min(cfg.points / 4), cfg.seed)?;
    let u = synth_velocity(&spec, &grid)?;
    let noise = NoiseModel::new(cfg.sigma, cfg.seed, NoiseKind::WhiteNoiseMeasure)?;
    let mut r = dissipation_convergence(&u, &flow, &cfg.n_list, &noise, cfg.replicates)?;
    let mut worst = 0.0f64;
    for k in [1.0, 3.0, 5.0] {
        let single = Field::periodic_1d(grid, |x| (k * x).sin());
        let exact = cfg.nu * k.powf(2.0 * cfg.s) * std::f64::consts::PI;
        let err = (energy_dissipation(&single, &flow)? - exact).abs();
        worst = worst.max(err);
        r.push(format!("sin;k={k}"), k, "eps_error", err, 0.0);
    }
    r.check("single-mode dissipation exact", worst < 1e-8, format!("max error {worst:e}"));
    Ok(r)
}

/// L² mollification error for a smooth field and for Weierstrass-type
/// fields that are Hölder-α everywhere.
fn l2(cfg: &RunConfig) -> Result<ExperimentReport> {
    require_1d(cfg)?;
    let mut r = ExperimentReport::new("l2");
    let grid = periodic(cfg.points)?;
    let absorb = |r: &mut ExperimentReport, u: &Field, param: &str| -> Result<()> {
        let sub = l2_convergence(u, &cfg.n_list)?;
        for row in sub.rows {
            r.push(param, row.n, row.metric, row.value, row.stderr);
        }
        for c in sub.checks {
            r.check(format!("{} {param}", c.name), c.passed, c.detail);
        }
        Ok(())
    };
    let smooth = Field::periodic_1d(grid, |x| x.sin() + 0.3 * (2.0 * x).cos());
    absorb(&mut r, &smooth, "smooth")?;
    slope_check(&mut r, "smooth", "l2_error", -2.3, -1.7);

    let octaves = (cfg.points / 4).ilog2();
    for alpha in orders_with(cfg.alpha) {
        let u = Field::periodic_1d(grid, |x| {
            (0..=octaves)
                .map(|j| {
                    let f = (1u64 << j) as f64;
                    f.powf(-alpha) * (f * x).cos()
                })
                .sum()
        });
        let param = format!("weierstrass;alpha={alpha}");
        absorb(&mut r, &u, &param)?;
        if HOLDER_ORDERS.contains(&alpha) {
            slope_check(&mut r, &param, "l2_error", -alpha - 0.2, -alpha + 0.2);
        } else {
            r.fit_series(&param, "l2_error");
        }
    }
    Ok(r)
}
