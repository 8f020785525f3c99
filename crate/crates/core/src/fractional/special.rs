use std::f64::consts::PI;

use super::FracOrder;
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Gamma function for positive arguments (Lanczos, g = 7, with reflection
/// below 1/2). Overflows to `inf` past ~171.6.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param("x", format!("gamma needs a positive argument, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        // exact factorials for small integers
        return (1..x as u64).map(|k| k as f64).product();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let p = t.powf(0.5 * (xm + 0.5));
    (2.0 * PI).sqrt() * p * (p * (-t).exp()) * lanczos_sum(xm)
}

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param("x", format!("ln_gamma needs a positive argument, got {x}")));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_positive(1.0 - x);
    }
    if x < 100.0 {
        return gamma_positive(x).ln();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// Largest admissible series term; beyond it cancellation in the alternating
/// sum eats into the 1e-10 accuracy target.
const MAX_TERM: f64 = 1e4;
const REMAINDER_TARGET: f64 = 1e-13;

/// Terms `z^j / Γ(αj + 1)` of the Mittag-Leffler series up to the point
/// where the monitored remainder drops below target.
pub fn mittag_leffler_terms(alpha: FracOrder, z: f64) -> Result<Vec<f64>> {
    let a = alpha.value();
    let reject = |reason: String| Error::MittagLefflerDomain { alpha: a, z, reason };
    if z > 0.0 || !z.is_finite() {
        return Err(reject("only the decay regime z <= 0 is supported".into()));
    }
    let mut terms = vec![1.0];
    if z == 0.0 {
        return Ok(terms);
    }
    let lz = z.abs().ln();
    let mut zpow = 1.0;
    let mut prev_mag = 1.0;
    for j in 1..20_000usize {
        let arg = a * j as f64 + 1.0;
        zpow *= z;
        let term = if arg < 170.0 && zpow.is_finite() {
            zpow / gamma_positive(arg)
        } else {
            let mag = (j as f64 * lz - ln_gamma_positive(arg)).exp();
            if j % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        let mag = term.abs();
        if mag > MAX_TERM {
            return Err(reject(format!("series term {mag:.3e} exceeds {MAX_TERM:e}")));
        }
        terms.push(term);
        let ratio = mag / prev_mag;
        prev_mag = mag;
        // once the term ratio is below one it keeps decreasing (Γ grows
        // super-exponentially), so the tail is bounded geometrically
        if ratio < 1.0 {
            let bound = mag * ratio / (1.0 - ratio);
            if bound < REMAINDER_TARGET {
                return Ok(terms);
            }
        }
    }
    Err(reject("series did not converge within 20000 terms".into()))
}

/// `E_α(z) = Σ_j z^j / Γ(αj + 1)` for `z ≤ 0`, compensated summation.
pub fn mittag_leffler(alpha: FracOrder, z: f64) -> Result<f64> {
    let terms = mittag_leffler_terms(alpha, z)?;
    let mut s = CompensatedSum::new();
    for t in terms {
        s.add(t);
    }
    Ok(s.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        let root_pi = PI.sqrt();
        assert!((gamma_fn(0.5).unwrap() - root_pi).abs() < 1e-15 * root_pi);
        assert!((root_pi - 1.7724538509).abs() < 1e-10);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_integer_and_half_integer_identities() {
        // Γ(n) = (n−1)!, Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for n in 1..=30u64 {
            let want = factorial(n - 1);
            let got = gamma_positive(n as f64);
            assert!((got - want).abs() <= 1e-12 * want, "Γ({n})");
        }
        for n in 0..=40u64 {
            let want = factorial(2 * n) * PI.sqrt() / (4f64.powi(n as i32) * factorial(n));
            let got = gamma_positive(n as f64 + 0.5);
            assert!((got - want).abs() <= 1e-12 * want, "Γ({n}.5): {got} vs {want}");
        }
    }

    #[test]
    fn gamma_recursion_and_reflection() {
        for i in 1..400 {
            let x = 0.013 + i as f64 * 0.107;
            let lhs = gamma_positive(x + 1.0);
            let rhs = x * gamma_positive(x);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs, "x = {x}");
        }
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let prod = gamma_positive(x) * gamma_positive(1.0 - x) * (PI * x).sin();
            assert!((prod - PI).abs() < 1e-12 * PI);
        }
    }

    #[test]
    fn ln_gamma_matches_log_of_gamma() {
        for i in 1..300 {
            let x = 0.05 + i as f64 * 0.55;
            let want = gamma_positive(x).ln();
            assert!((ln_gamma_positive(x) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn mittag_leffler_examples() {
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(mittag_leffler(FracOrder::new(a).unwrap(), 0.0).unwrap(), 1.0);
        }
        let near_one = FracOrder::new(0.999).unwrap();
        let v = mittag_leffler(near_one, -1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 2e-3, "{v}");
        assert!((v - 0.3678794).abs() < 2e-3);
    }

    #[test]
    fn mittag_leffler_half_two_summation_orders() {
        let half = FracOrder::new(0.5).unwrap();
        let terms = mittag_leffler_terms(half, -1.0).unwrap();
        let forward = mittag_leffler(half, -1.0).unwrap();
        let mut rev = CompensatedSum::new();
        for t in terms.iter().rev() {
            rev.add(*t);
        }
        assert!((forward - rev.value()).abs() < 1e-14);
        // E_{1/2}(−1) = e·erfc(1)
        let erfc1 = 0.157_299_207_050_285_13;
        assert!((forward - std::f64::consts::E * erfc1).abs() < 1e-12);
    }

    #[test]
    fn mittag_leffler_exponential_limit() {
        // 30-digit reference values of E_{1-1e-6}(z)
        let a = FracOrder::new(1.0 - 1e-6).unwrap();
        let reference = [
            (-0.5, 0.606_530_614_200_095_08),
            (-1.0, 0.367_879_506_225_951_74),
            (-2.5, 0.082_085_344_299_559_563),
            (-5.0, 0.006_738_253_346_434_900_6),
        ];
        for (z, want) in reference {
            assert!((mittag_leffler(a, z).unwrap() - want).abs() < 1e-10, "z = {z}");
        }
        // the perturbation 1e-6 in alpha alone moves E away from e^z by up to ~4e-7
        for i in 0..=50 {
            let z = -5.0 * i as f64 / 50.0;
            let got = mittag_leffler(a, z).unwrap();
            assert!((got - z.exp()).abs() < 5e-7, "z = {z}: {got} vs {}", z.exp());
        }
    }

    #[test]
    fn mittag_leffler_reference_values() {
        let cases = [
            (0.3, -1.0, 0.456_594_408_329_690_67),
            (0.5, -2.0, 0.255_395_676_310_505_74),
            (0.7, -3.0, 0.137_897_109_665_027_08),
        ];
        for (a, z, want) in cases {
            let got = mittag_leffler(FracOrder::new(a).unwrap(), z).unwrap();
            assert!((got - want).abs() < 1e-10, "E_{a}({z}) = {got}");
        }
    }

    #[test]
    fn mittag_leffler_rejects_unsupported_domain() {
        let a = FracOrder::new(0.5).unwrap();
        assert!(mittag_leffler(a, 0.5).is_err());
        assert!(mittag_leffler(a, -40.0).is_err());
        assert!(mittag_leffler(a, f64::NEG_INFINITY).is_err());
    }
}
