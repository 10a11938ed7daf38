//! Effective boundary operator
//! `L_h^c = -(h^{1/2} + c h^{3/4}) d^2/ds^2 - kappa - h^{1/2} kappa^2 / 2 + c h^{7/8}`
//! on periodic functions of arc length, discretised by Fourier-Galerkin.

use crate::error::{invalid, Result};
use crate::geometry::Curve;
use crate::numerics::eigen::generalized_dense;
use crate::numerics::fourier::{real_basis_len, real_gram, FourierSeries};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenvalues of `-d^2/ds^2` on `[-L, L)` with periodic conditions,
/// `(pi k / L)^2` with multiplicity two for `k >= 1`, lowest `count`.
pub fn fourier_mode_eigenvalues(half_length: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let k = i.div_ceil(2) as f64;
            (PI * k / half_length).powi(2)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct EffectiveOperator<'a> {
    curve: &'a Curve,
    pub h: f64,
    pub c: f64,
    pub modes: usize,
}

/// Matrix of the operator in the real trigonometric basis with `|k| <= K`.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub matrix: DMatrix<f64>,
    /// Curvature has non-negligible content at the truncation index.
    pub truncated: bool,
}

impl<'a> EffectiveOperator<'a> {
    pub fn new(curve: &'a Curve, h: f64, c: f64, modes: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid(format!("h must lie in (0, 1), got {h}")));
        }
        if !c.is_finite() {
            return Err(invalid("c must be finite"));
        }
        if modes == 0 || 4 * modes >= curve.curvature_samples().len() {
            return Err(invalid(format!("Fourier mode count {modes} out of range")));
        }
        Ok(Self { curve, h, c, modes })
    }

    pub fn kinetic_coefficient(&self) -> f64 {
        self.h.sqrt() + self.c * self.h.powf(0.75)
    }

    pub fn potential(&self) -> FourierSeries {
        let (h, c) = (self.h, self.c);
        self.curve.series_of(|k| -k - 0.5 * h.sqrt() * k * k + c * h.powf(0.875))
    }

    pub fn assemble(&self) -> Assembled {
        let l = self.curve.half_length();
        let one = FourierSeries::from_samples(&[1.0]);
        let kinetic = real_gram(&one, self.modes, l, true) * self.kinetic_coefficient();
        let potential = real_gram(&self.potential(), self.modes, l, false);
        let kappa0 = self.curve.kappa_series().coeff(0).norm();
        let tail = self.curve.kappa_series().coeff(self.modes as i64).norm();
        Assembled { matrix: kinetic + potential, truncated: tail > 1e-12 * kappa0.max(1e-300) }
    }

    /// Lowest `count` eigenvalues in ascending order.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        let m = self.assemble().matrix;
        let n = m.nrows();
        if count > n {
            return Err(invalid(format!("{count} eigenvalues requested from a basis of size {n}")));
        }
        let (vals, _) = generalized_dense(&m, &DMatrix::identity(n, n))?;
        Ok(vals[..count].to_vec())
    }

    pub fn basis_size(&self) -> usize {
        real_basis_len(self.modes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRow {
    pub curve_id: String,
    pub h: f64,
    pub c: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    pub n: usize,
    pub lambda: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_diagonal() {
        let disk = Curve::circle(1.0).unwrap();
        let h = 1e-3;
        let op = EffectiveOperator::new(&disk, h, 0.0, 20).unwrap();
        let ev = op.eigenvalues(9).unwrap();
        let expect: Vec<f64> = fourier_mode_eigenvalues(PI, 9)
            .iter()
            .map(|m| h.sqrt() * m - 1.0 - 0.5 * h.sqrt())
            .collect();
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!op.assemble().truncated);
    }

    #[test]
    fn ellipse_converges_in_k() {
        let e = Curve::ellipse(2.0, 1.0).unwrap();
        let a = EffectiveOperator::new(&e, 1e-3, 1.0, 48).unwrap().eigenvalues(20).unwrap();
        let b = EffectiveOperator::new(&e, 1e-3, 1.0, 96).unwrap().eigenvalues(20).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        // Two vertex wells: the lowest pair is nearly degenerate.
        assert!(a[0] > -2.0 && a[0] < -1.5);
        assert!((a[1] - a[0]).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let e = Curve::circle(1.0).unwrap();
        assert!(EffectiveOperator::new(&e, 0.0, 1.0, 8).is_err());
        assert!(EffectiveOperator::new(&e, 1e-3, 1.0, 0).is_err());
    }
}
