use rayon::prelude::*;

use super::FracOrder;
use crate::error::{Error, Result};
use crate::field::Field;

/// `max_{i<j} |f_i − f_j| / |x_i − x_j|^α` over all sample pairs of a 1D field.
///
/// Coordinates are taken as plain (non-periodic) distances, so on any grid
/// this is a lower bound for the true Hölder seminorm.
pub fn gagliardo_seminorm(field: &Field, alpha: FracOrder) -> Result<f64> {
    if field.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: field.dim(),
        });
    }
    if field.len() < 2 {
        return Err(Error::param("field", "need at least 2 samples"));
    }
    let a = alpha.value();
    // uniform grids: distances depend only on the index gap
    let h = field.domain().spacing(0);
    let inv_pow: Vec<f64> = (0..field.len()).map(|g| 1.0 / (g as f64 * h).powf(a)).collect();
    let v = field.values();
    let best = (0..v.len())
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in i + 1..v.len() {
                m = m.max((v[i] - v[j]).abs() * inv_pow[j - i]);
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoxGrid, Domain};

    fn boxed(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> Field {
        Field::from_fn(Domain::Boxed(BoxGrid::new(vec![lo], vec![hi], points).unwrap()), |x| f(x[0]))
    }

    #[test]
    fn constant_field_is_zero() {
        let f = boxed(0.0, 1.0, 50, |_| 3.0);
        assert_eq!(gagliardo_seminorm(&f, FracOrder::new(0.5).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn identity_on_unit_interval() {
        // |x − y|^{1/2} is largest for the endpoint pair
        let f = boxed(0.0, 1.0, 101, |x| x);
        let s = gagliardo_seminorm(&f, FracOrder::new(0.5).unwrap()).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn root_cusp_reaches_one() {
        let f = boxed(-1.0, 1.0, 201, |x| x.abs().sqrt());
        let s = gagliardo_seminorm(&f, FracOrder::new(0.5).unwrap()).unwrap();
        // pairs (0, y) give exactly 1; pairs straddling 0 give up to √2
        assert!(s >= 1.0 - 1e-14);
    }

    #[test]
    fn scale_covariance() {
        let a = FracOrder::new(0.3).unwrap();
        let f = boxed(0.0, 2.0, 120, |x| (3.0 * x).sin() + x.abs().powf(0.3));
        let s = gagliardo_seminorm(&f, a).unwrap();
        for c in [-2.5, 0.5, 4.0] {
            let g = f.with_values(f.values().iter().map(|v| c * v).collect()).unwrap();
            let sg = gagliardo_seminorm(&g, a).unwrap();
            assert!((sg - c.abs() * s).abs() <= 1e-14 * sg);
        }
    }
}
