use crate::error::{invalid, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Tolerated spread `max / min` when a quantity sampled on a finite sweep is
/// declared bounded by a single constant.
pub const STABILITY_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub samples: usize,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Least squares coefficients for the design matrix whose rows are given.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    if rows.is_empty() || rows.len() != y.len() {
        return Err(invalid("least squares needs matching non-empty rows and data"));
    }
    let p = rows[0].len();
    if rows.len() < p {
        return Err(invalid("underdetermined least squares"));
    }
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| invalid(format!("least squares failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Ordinary least squares slope of `ln y` against `ln x`.
pub fn fit_order(xs: &[f64], ys: &[f64], target: f64, tol: f64) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(invalid("fit: length mismatch"));
    }
    if xs.len() < 4 {
        return Err(invalid(format!("fit needs at least 4 samples, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let rows: Vec<Vec<f64>> = lx.iter().map(|&x| vec![1.0, x]).collect();
    let c = least_squares(&rows, &ly)?;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - c[0] - c[1] * x).powi(2))
        .sum::<f64>()
        / lx.len() as f64)
        .sqrt();
    Ok(FitReport {
        slope: c[1],
        intercept: c[0],
        residual_rms: rms,
        samples: xs.len(),
        target,
        tol,
        pass: (c[1] - target).abs() <= tol,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Spread {
    pub max: f64,
    pub min: f64,
    pub ratio: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
        Self { max, min, ratio }
    }

    pub fn bounded(&self) -> bool {
        self.ratio <= STABILITY_FACTOR
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let xs = [1e-1, 1e-2, 1e-3, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let r = fit_order(&xs, &ys, 1.5, 1e-12).unwrap();
        assert!(r.pass);
        assert!((r.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_negative() {
        assert!(fit_order(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1.0, 0.1).is_err());
        assert!(fit_order(&[1.0, 2.0, 3.0, 4.0], &[1.0, -2.0, 3.0, 4.0], 1.0, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn slope_recovered(p in -3.0f64..3.0, c in 0.1f64..10.0) {
            let xs = [0.5, 0.25, 0.125, 0.0625, 0.03125];
            let ys: Vec<f64> = xs.iter().map(|x: &f64| c * x.powf(p)).collect();
            let r = fit_order(&xs, &ys, p, 1e-9).unwrap();
            prop_assert!(r.pass);
        }
    }
}
