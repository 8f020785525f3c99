//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use stochfrac::field::{Domain, Field, PeriodicGrid};
use stochfrac::fractional::frac_laplacian;
use stochfrac::kantorovich::{apply_expectation, GridSpec, KantorovichStencil, NoiseKind, NoiseModel};
use stochfrac::stats::SampleMoments;
use stochfrac::{ExperimentReport, KernelParams};
use stochfrac_lab::{render_csv, run, Experiment, RunConfig};

struct Verdict {
    passed: bool,
    detail: String,
}

fn timed(budget_s: f64, body: impl FnOnce() -> Result<Verdict>) -> Verdict {
    let start = Instant::now();
    let v = body().unwrap_or_else(|e| Verdict {
        passed: false,
        detail: format!("error: {e:#}"),
    });
    let took = start.elapsed();
    let in_time = took.as_secs_f64() <= budget_s;
    Verdict {
        passed: v.passed && in_time,
        detail: format!("{} [{:.2}s of {budget_s}s]", v.detail, took.as_secs_f64()),
    }
}

fn config(exp: Experiment, tweak: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut cfg = RunConfig::defaults(exp);
    tweak(&mut cfg);
    cfg.validate().expect("acceptance configuration is valid");
    cfg
}

/// Checks of `report` whose name satisfies `pick`, folded into one verdict.
fn from_checks(reports: &[&ExperimentReport], pick: impl Fn(&str) -> bool) -> Verdict {
    let mut passed = true;
    let mut count = 0;
    let mut failed = Vec::new();
    for r in reports {
        for c in r.checks.iter().filter(|c| pick(&c.name)) {
            count += 1;
            if !c.passed {
                passed = false;
                failed.push(format!("{}: {}", c.name, c.detail));
            }
        }
    }
    if count == 0 {
        return Verdict {
            passed: false,
            detail: "no matching checks".into(),
        };
    }
    let detail = if failed.is_empty() {
        format!("{count} checks passed")
    } else {
        format!("{} of {count} checks failed ({})", failed.len(), failed.join("; "))
    };
    Verdict { passed, detail }
}

fn fit_summary(r: &ExperimentReport) -> String {
    r.fits
        .iter()
        .map(|f| format!("{} {:.3}", f.param, f.fit.slope))
        .collect::<Vec<_>>()
        .join(", ")
}

type TestFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

fn test_functions() -> Vec<(&'static str, TestFn, Vec<f64>)> {
    vec![
        ("1+sin(2 pi x)", Box::new(|x: &[f64]| 1.0 + (TAU * x[0]).sin()), vec![0.37]),
        ("exp(x)", Box::new(|x: &[f64]| x[0].exp()), vec![0.61]),
        ("|x-0.5|^0.5", Box::new(|x: &[f64]| (x[0] - 0.5).abs().sqrt()), vec![0.45]),
        ("1/(1+25x^2)", Box::new(|x: &[f64]| 1.0 / (1.0 + 25.0 * x[0] * x[0])), vec![0.2]),
        (
            "cos(x)cos(2y) 2D",
            Box::new(|x: &[f64]| (x[0]).cos() * (2.0 * x[1]).cos()),
            vec![0.4, 0.7],
        ),
    ]
}

/// Monte Carlo mean and variance of the noisy Kantorovich operator against
/// the expectation and the closed form, for each test function and n.
fn kantorovich_identities(replicates: u64) -> Result<(Verdict, Verdict)> {
    let p = KernelParams::new(1.0, 1.0, 40)?;
    let noise = NoiseModel::new(0.1, 42, NoiseKind::CellMultiplier)?;
    let (mut mean_ok, mut var_ok) = (true, true);
    let (mut mean_worst, mut var_worst) = (0.0f64, 0.0f64);
    for (name, f, x) in test_functions() {
        for n in [8usize, 32] {
            let grid = GridSpec::cube(n, x.len(), 0.0, 1.0)?;
            let st = KantorovichStencil::build(&f, &x, &grid, &p)?;
            let samples = (0..replicates)
                .map(|rep| st.sample(&noise, rep))
                .collect::<stochfrac::Result<Vec<f64>>>()?;
            let m = SampleMoments::from_samples(&samples);
            let expect = apply_expectation(&f, &x, &grid, &p)?;
            let closed = st.variance(noise.sigma());
            let zm = (m.mean - expect).abs() / m.mean_se;
            let zv = (m.variance - closed).abs() / m.variance_se;
            mean_worst = mean_worst.max(zm);
            var_worst = var_worst.max(zv);
            if zm > 3.0 {
                mean_ok = false;
                println!("  mean outside 3 SE for {name}, n={n}: {zm:.2} SE");
            }
            if zv > 3.0 {
                var_ok = false;
                println!("  variance outside 3 SE for {name}, n={n}: {zv:.2} SE");
            }
        }
    }
    Ok((
        Verdict {
            passed: mean_ok,
            detail: format!("10 cases, worst |mean - E| = {mean_worst:.2} SE"),
        },
        Verdict {
            passed: var_ok,
            detail: format!("10 cases, worst |var - closed| = {var_worst:.2} SE"),
        },
    ))
}

fn laplacian_identities() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let g1 = PeriodicGrid::new(TAU, 64, 1)?;
    for (k, s) in [(1.0, 0.3), (3.0, 0.5), (7.0, 0.75), (12.0, 1.0), (5.0, 1.5)] {
        let u = Field::periodic_1d(g1.clone(), |x| (k * x).sin());
        let lu = frac_laplacian(&u, s)?;
        let scale = k.powf(2.0 * s);
        for (a, b) in lu.values().iter().zip(u.values()) {
            worst = worst.max((a - scale * b).abs() / scale);
        }
    }
    let g2 = PeriodicGrid::new(TAU, 32, 2)?;
    let u = Field::from_fn(Domain::Periodic(g2), |x| (2.0 * x[0] + 3.0 * x[1]).cos());
    let lu = frac_laplacian(&u, 0.4)?;
    let scale = 13f64.powf(0.4);
    for (a, b) in lu.values().iter().zip(u.values()) {
        worst = worst.max((a - scale * b).abs() / scale);
    }
    let eigen = worst;

    let g = PeriodicGrid::new(TAU, 128, 1)?;
    let u = Field::periodic_1d(g, |x| (x.sin()).exp() + 0.3 * (5.0 * x).cos());
    let mut comp = 0.0f64;
    for (s1, s2) in [(0.3, 0.45), (0.25, 0.25), (0.5, 0.7)] {
        let two = frac_laplacian(&frac_laplacian(&u, s1)?, s2)?;
        let one = frac_laplacian(&u, s1 + s2)?;
        let norm = one.max_abs().max(1.0);
        for (a, b) in two.values().iter().zip(one.values()) {
            comp = comp.max((a - b).abs() / norm);
        }
    }
    Ok(Verdict {
        passed: eigen <= 1e-10 && comp <= 1e-10,
        detail: format!("eigenfunction error {eigen:e}, composition error {comp:e}"),
    })
}

/// Runs every experiment with one and with four workers and compares CSV
/// bytes.
fn determinism() -> Result<Verdict> {
    let mut mismatched = Vec::new();
    for exp in Experiment::ALL {
        let cfg = |workers| {
            config(exp, |c| {
                c.workers = workers;
                if exp == Experiment::Dissipation {
                    c.replicates = 50;
                }
            })
        };
        let a = render_csv(&run(&cfg(1))?.report);
        let b = render_csv(&run(&cfg(4))?.report);
        if a != b {
            mismatched.push(exp.name());
        }
    }
    Ok(Verdict {
        passed: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} experiments byte-identical across 1 and 4 workers", Experiment::ALL.len())
        } else {
            format!("CSV differs for {}", mismatched.join(", "))
        },
    })
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |id, name, v: Verdict| {
        println!("{} criterion {id:>2}: {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };

    let start = Instant::now();
    let kernel = run(&config(Experiment::Kernel, |_| {}));
    let kernel_time = start.elapsed().as_secs_f64();
    match &kernel {
        Ok(out) => {
            let r = &out.report;
            let mut v = from_checks(&[r], |n| n.starts_with("partition of unity"));
            v.passed &= kernel_time < 1.0;
            v.detail += &format!(" [{kernel_time:.2}s of 1s, shared with criterion 2]");
            record(1, "partition of unity", v);
            let mut v = from_checks(&[r], |n| n == "phi even" || n == "phi, M, Z positive");
            v.passed &= kernel_time < 1.0;
            v.detail += &format!(" [{kernel_time:.2}s of 1s, shared with criterion 1]");
            record(2, "symmetry and positivity", v);
        }
        Err(e) => {
            for (id, name) in [(1, "partition of unity"), (2, "symmetry and positivity")] {
                record(id, name, Verdict { passed: false, detail: format!("error: {e:#}") });
            }
        }
    }

    let start = Instant::now();
    match kantorovich_identities(10_000) {
        Ok((mean, var)) => {
            let took = start.elapsed().as_secs_f64();
            let ok = took < 30.0;
            record(
                3,
                "expectation identity",
                Verdict {
                    passed: mean.passed && ok,
                    detail: format!("{} [{took:.2}s of 30s, shared with criterion 4]", mean.detail),
                },
            );
            record(
                4,
                "variance identity",
                Verdict {
                    passed: var.passed && ok,
                    detail: format!("{} [{took:.2}s of 30s, shared with criterion 3]", var.detail),
                },
            );
        }
        Err(e) => {
            for (id, name) in [(3, "expectation identity"), (4, "variance identity")] {
                record(id, name, Verdict { passed: false, detail: format!("error: {e:#}") });
            }
        }
    }

    let v = timed(10.0, || {
        let out = run(&config(Experiment::Voronovskaya, |c| c.n_list = vec![8, 16, 32, 64]))?;
        Ok(from_checks(&[&out.report], |_| true))
    });
    record(5, "Voronovskaya exactness", v);

    let v = timed(60.0, || {
        let kr = run(&config(Experiment::KantorovichRates, |c| c.n_list = vec![8, 16, 32, 64, 128]))?.report;
        let mr = run(&config(Experiment::MollifierRates, |c| c.n_list = vec![8, 16, 32, 64, 128]))?.report;
        let mut v = from_checks(&[&kr, &mr], |_| true);
        v.detail += &format!("; lattice slopes {}; mollifier slopes {}", fit_summary(&kr), fit_summary(&mr));
        Ok(v)
    });
    record(6, "consistency rate", v);

    let v = timed(60.0, || {
        let r = run(&config(Experiment::VarianceScaling, |c| {
            c.n_list = vec![4, 8, 16, 32];
            c.replicates = 10_000;
        }))?
        .report;
        let mut v = from_checks(&[&r], |_| true);
        v.detail += &format!("; slopes {}", fit_summary(&r));
        Ok(v)
    });
    record(7, "variance growth", v);

    let v = timed(60.0, || {
        let r = run(&config(Experiment::Mse, |c| c.replicates = 10_000))?.report;
        Ok(from_checks(&[&r], |_| true))
    });
    record(8, "MSE additivity", v);

    let v = timed(10.0, || {
        let r = run(&config(Experiment::Caputo, |c| c.n_list = vec![64, 128, 256, 512, 1024]))?.report;
        let mut v = from_checks(&[&r], |_| true);
        v.detail += &format!("; slopes {}", fit_summary(&r));
        Ok(v)
    });
    record(9, "Caputo L1 order", v);

    record(10, "fractional Laplacian", timed(1.0, laplacian_identities));

    let v = timed(5.0, || {
        let r = run(&config(Experiment::Burgers, |c| c.steps = 256))?.report;
        Ok(from_checks(&[&r], |n| n.starts_with("Mittag-Leffler relaxation at 256 steps")))
    });
    record(11, "fractional relaxation oracle", v);

    let v = timed(10.0, || {
        let r = run(&config(Experiment::Dissipation, |c| {
            c.n_list = vec![8, 16, 32, 64];
            c.replicates = 100;
        }))?
        .report;
        Ok(from_checks(&[&r], |_| true))
    });
    record(12, "dissipation convergence", v);

    let v = timed(30.0, || {
        let r = run(&config(Experiment::L2, |_| {}))?.report;
        let mut v = from_checks(&[&r], |_| true);
        v.detail += &format!("; slopes {}", fit_summary(&r));
        Ok(v)
    });
    record(13, "L2 convergence", v);

    record(14, "determinism", timed(120.0, determinism));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.passed).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
