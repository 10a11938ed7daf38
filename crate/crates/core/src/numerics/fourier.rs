//! Periodic Fourier series on an interval of length `2L` and the real
//! trigonometric basis used by the Galerkin discretisations.
//!
//! Orthonormal exponentials: `e_n(s) = exp(i pi n s / L) / sqrt(2L)`.
//! Real basis: index 0 is the constant, `2k-1` is `cos(pi k s/L)/sqrt(L)`,
//! `2k` is `sin(pi k s/L)/sqrt(L)`.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct FourierSeries {
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    /// Coefficients `f_n = (1/2L) int f exp(-i pi n s/L) ds` from samples at
    /// `s_j = 2L j / N`.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        fft.process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Self { coeffs: buf }
    }

    /// Series with prescribed coefficients for `n = 0..len`; negative indices
    /// follow from conjugate symmetry.
    pub fn from_nonnegative(coeffs: &[Complex64], len: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        for (n, &v) in coeffs.iter().enumerate().take(len / 2) {
            c[n] = v;
            if n > 0 {
                c[len - n] = v.conj();
            }
        }
        Self { coeffs: c }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of index `n`; zero beyond the Nyquist index.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let len = self.coeffs.len() as i64;
        if 2 * n.abs() >= len {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[n.rem_euclid(len) as usize]
    }

    pub fn eval(&self, s: f64, half_len: f64) -> f64 {
        let half = (self.coeffs.len() as i64 - 1) / 2;
        let mut v = self.coeff(0).re;
        for n in 1..=half {
            let ph = PI * n as f64 * s / half_len;
            let c = self.coeff(n);
            v += 2.0 * (c.re * ph.cos() - c.im * ph.sin());
        }
        v
    }

    pub fn samples(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut buf = self.coeffs.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

pub fn real_basis_len(k_max: usize) -> usize {
    2 * k_max + 1
}

/// Exponential components of real basis function `p`.
fn components(p: usize) -> [(i64, Complex64); 2] {
    if p == 0 {
        return [(0, Complex64::new(1.0, 0.0)), (0, Complex64::new(0.0, 0.0))];
    }
    let k = p.div_ceil(2) as i64;
    if p % 2 == 1 {
        let u = Complex64::new(FRAC_1_SQRT_2, 0.0);
        [(k, u), (-k, u)]
    } else {
        [(k, Complex64::new(0.0, -FRAC_1_SQRT_2)), (-k, Complex64::new(0.0, FRAC_1_SQRT_2))]
    }
}

pub fn basis_wavenumber(p: usize) -> usize {
    p.div_ceil(2)
}

pub fn real_basis_eval(p: usize, s: f64, half_len: f64) -> f64 {
    if p == 0 {
        return 1.0 / (2.0 * half_len).sqrt();
    }
    let ph = PI * basis_wavenumber(p) as f64 * s / half_len;
    let v = if p % 2 == 1 { ph.cos() } else { ph.sin() };
    v / half_len.sqrt()
}

/// Gram matrix `<f b_q, b_p>` (or `<f b_q', b_p'>` when `derivative`) in the
/// real basis with modes `|k| <= k_max`.
pub fn real_gram(f: &FourierSeries, k_max: usize, half_len: f64, derivative: bool) -> DMatrix<f64> {
    let n = real_basis_len(k_max);
    let comps: Vec<_> = (0..n).map(components).collect();
    let w = PI / half_len;
    DMatrix::from_fn(n, n, |p, q| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(k, u) in &comps[q] {
            if u.norm_sqr() == 0.0 {
                continue;
            }
            for &(l, v) in &comps[p] {
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let weight = if derivative { w * w * (k * l) as f64 } else { 1.0 };
                acc += u * v.conj() * f.coeff(l - k) * weight;
            }
        }
        acc.re
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_of_cosine() {
        let n = 64;
        let l = 1.5;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let s = 2.0 * l * j as f64 / n as f64;
                2.0 + (3.0 * PI * s / l).cos()
            })
            .collect();
        let f = FourierSeries::from_samples(&samples);
        assert!((f.coeff(0).re - 2.0).abs() < 1e-14);
        assert!((f.coeff(3).re - 0.5).abs() < 1e-14);
        assert!((f.coeff(-3).re - 0.5).abs() < 1e-14);
        assert!((f.eval(0.3, l) - (2.0 + (3.0 * PI * 0.3 / l).cos())).abs() < 1e-13);
    }

    #[test]
    fn gram_of_constant_is_identity() {
        let f = FourierSeries::from_samples(&[1.0; 32]);
        let g = real_gram(&f, 5, 2.0, false);
        assert!((g - DMatrix::identity(11, 11)).norm() < 1e-14);
        let d = real_gram(&f, 5, 2.0, true);
        assert!((d[(3, 3)] - (2.0 * PI / 2.0).powi(2)).abs() < 1e-12);
        assert!((d[(4, 4)] - (2.0 * PI / 2.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn gram_matches_quadrature() {
        let l = 1.0;
        let n = 128;
        let fun = |s: f64| 1.0 + 0.3 * (PI * s / l).sin() + 0.1 * (2.0 * PI * s / l).cos();
        let samples: Vec<f64> = (0..n).map(|j| fun(2.0 * l * j as f64 / n as f64)).collect();
        let f = FourierSeries::from_samples(&samples);
        let g = real_gram(&f, 3, l, false);
        let m = 4096;
        for p in 0..7 {
            for q in 0..7 {
                let v: f64 = (0..m)
                    .map(|j| {
                        let s = 2.0 * l * j as f64 / m as f64;
                        fun(s) * real_basis_eval(p, s, l) * real_basis_eval(q, s, l)
                    })
                    .sum::<f64>()
                    * 2.0
                    * l
                    / m as f64;
                assert!((g[(p, q)] - v).abs() < 1e-12, "{p} {q}");
            }
        }
    }
}
