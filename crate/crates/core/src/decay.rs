//! Localisation checks for edge eigenfunctions: exponential rate fits,
//! weighted Agmon integrals, polynomial and pointwise bounds.
//!
//! Collar modes only carry data inside the collar, so every quantity computed
//! from them is restricted to it and flagged as such.

use crate::error::{invalid, Error, Result};
use crate::numerics::fit::least_squares;
use crate::numerics::fourier::real_basis_eval;
use crate::numerics::quadrature::GaussLegendre;
use crate::robin2d::{EigenMode, ModeSource};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FIT_SAMPLES: usize = 60;
const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub normalized_rate: f64,
    pub samples: usize,
    pub window: (f64, f64),
    /// Coefficient of `t^2` in a quadratic fit of `ln|u|`, reported only.
    pub quadratic: Option<f64>,
}

/// Least squares slope of `ln|u|` against distance on `[sqrt(h), 6 sqrt(h)]`.
pub fn fit_decay_rate(mode: &EigenMode) -> Result<DecayFit> {
    let s = mode.h.sqrt();
    fit_decay_rate_on(mode, (s, 6.0 * s))
}

pub fn fit_decay_rate_on(mode: &EigenMode, window: (f64, f64)) -> Result<DecayFit> {
    let (a, b) = (window.0.max(0.0), window.1.min(mode.depth()));
    if !(b > a) {
        return Err(invalid("fit window is empty inside the mode domain"));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for i in 0..FIT_SAMPLES {
        let t = a + (b - a) * i as f64 / (FIT_SAMPLES - 1) as f64;
        let y = mode.ln_ray_profile(t)?;
        if y.is_finite() && y > -690.0 {
            ts.push(t);
            ys.push(y);
        }
    }
    if ts.len() < MIN_SAMPLES {
        return Err(invalid(format!("only {} usable samples in the fit window", ts.len())));
    }
    let lin = least_squares(&ts.iter().map(|&t| vec![1.0, t]).collect::<Vec<_>>(), &ys)?;
    let quad = least_squares(&ts.iter().map(|&t| vec![1.0, t, t * t]).collect::<Vec<_>>(), &ys).ok();
    let rate = -lin[1];
    Ok(DecayFit {
        rate,
        normalized_rate: rate * mode.h.sqrt(),
        samples: ts.len(),
        window: (a, b),
        quadratic: quad.map(|c| c[2]),
    })
}

fn check_energy(mode: &EigenMode, m: f64) -> Result<()> {
    if !(m > 0.0 && m < 1.0) {
        return Err(invalid("M must lie in (0, 1)"));
    }
    if !(mode.w() < -m / mode.h) {
        return Err(Error::Hypothesis(format!(
            "w = {} is not below -M/h = {}",
            mode.w(),
            -m / mode.h
        )));
    }
    Ok(())
}

/// Collar grid values: `(t_i, s_j, u, d_t u, d_s u, a)` with boundary norm 1.
struct CollarGrid {
    t: Vec<f64>,
    ds: f64,
    u: DMatrix<f64>,
    ut: DMatrix<f64>,
    us: DMatrix<f64>,
    a: DMatrix<f64>,
}

fn collar_grid(mode: &EigenMode) -> Option<CollarGrid> {
    let ModeSource::Collar { vector, .. } = &mode.source else {
        return None;
    };
    let nb = vector.coeffs.ncols();
    let ns = 4 * nb;
    let l = vector.half_length;
    let s: Vec<f64> = (0..ns).map(|j| 2.0 * l * j as f64 / ns as f64).collect();
    let basis = DMatrix::from_fn(nb, ns, |p, j| real_basis_eval(p, s[j], l));
    let dbasis = DMatrix::from_fn(nb, ns, |p, j| {
        if p == 0 {
            return 0.0;
        }
        let k = crate::numerics::fourier::basis_wavenumber(p) as f64 * PI / l;
        let ph = k * s[j];
        let v = if p % 2 == 1 { -k * ph.sin() } else { k * ph.cos() };
        v / l.sqrt()
    });
    let norm0: f64 = vector.coeffs.row(0).iter().map(|x| x * x).sum::<f64>().sqrt();
    let u = &vector.coeffs * &basis / norm0;
    let us = &vector.coeffs * &dbasis / norm0;
    let nt = vector.t_nodes.len();
    let dt = vector.t_nodes[1] - vector.t_nodes[0];
    let ut = DMatrix::from_fn(nt, ns, |i, j| {
        if i == 0 {
            (u[(1, j)] - u[(0, j)]) / dt
        } else if i + 1 == nt {
            (u[(i, j)] - u[(i - 1, j)]) / dt
        } else {
            (u[(i + 1, j)] - u[(i - 1, j)]) / (2.0 * dt)
        }
    });
    let nk = vector.kappa_samples.len();
    let a = DMatrix::from_fn(nt, ns, |i, j| {
        let kappa = vector.kappa_samples[(j * nk / ns).min(nk - 1)];
        1.0 - vector.t_nodes[i] * kappa
    });
    Some(CollarGrid { t: vector.t_nodes.clone(), ds: 2.0 * l / ns as f64, u, ut, us, a })
}

fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
            let right = if i + 1 < n { t[i + 1] - t[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Weighted integral `int (|u|^2 + h |grad u|^2) exp(2 alpha d / sqrt h)`
/// divided by `||u||^2_{L^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgmonReport {
    pub ratio: f64,
    pub restricted_to_collar: bool,
}

pub fn agmon_ratio(mode: &EigenMode, alpha: f64, m: f64) -> Result<AgmonReport> {
    check_energy(mode, m)?;
    let h = mode.h;
    let sh = h.sqrt();
    match &mode.source {
        ModeSource::Radial { radius, m: ang, .. } => {
            let g = GaussLegendre::new(10);
            let panels = ((4.0 * radius / sh).ceil() as usize).max(64);
            let ang2 = (*ang as f64).powi(2);
            let mut num = 0.0;
            let mut den = 0.0;
            let dr = radius / panels as f64;
            for p in 0..panels {
                for (r, w) in g.on(p as f64 * dr, (p + 1) as f64 * dr) {
                    let (f, df) = mode.radial_factor(r).unwrap();
                    let weight = (2.0 * alpha * (radius - r) / sh).exp();
                    let grad = df * df + ang2 * f * f / (r * r);
                    num += w * r * weight * (f * f + h * grad);
                    den += w * r * f * f;
                }
            }
            Ok(AgmonReport { ratio: num / den, restricted_to_collar: false })
        }
        ModeSource::Collar { .. } => {
            let grid = collar_grid(mode).unwrap();
            let wt = trapezoid_weights(&grid.t);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..grid.t.len() {
                let weight = (2.0 * alpha * grid.t[i] / sh).exp();
                for j in 0..grid.u.ncols() {
                    let a = grid.a[(i, j)];
                    let u2 = grid.u[(i, j)].powi(2);
                    let g2 = grid.ut[(i, j)].powi(2) + (grid.us[(i, j)] / a).powi(2);
                    let dv = wt[i] * grid.ds * a;
                    num += dv * weight * (u2 + h * g2);
                    den += dv * u2;
                }
            }
            Ok(AgmonReport { ratio: num / den, restricted_to_collar: true })
        }
    }
}

/// `sup |u(x)| (d(x)^2 / h)^p` over the sampling grid.
pub fn polynomial_bound_check(mode: &EigenMode, p: f64, epsilon: f64) -> Result<f64> {
    if mode.w() > epsilon {
        return Err(Error::Hypothesis(format!("w = {} exceeds epsilon = {epsilon}", mode.w())));
    }
    if let Some(d) = mode.dirichlet_floor() {
        if epsilon >= d {
            return Err(Error::Hypothesis(format!(
                "epsilon = {epsilon} must stay below the first Dirichlet eigenvalue {d}"
            )));
        }
    }
    sup_over_grid(mode, |d| if p == 0.0 { 0.0 } else { p * (2.0 * d.ln() - mode.h.ln()) })
}

/// `sup |u(x)| h^{n/4 + 1/4 + shift} exp(alpha min(d, eps0) / sqrt h)` with `n = 2`.
pub fn pointwise_prefactor_check(mode: &EigenMode, alpha: f64, m: f64, eps0: f64, shift: f64) -> Result<f64> {
    check_energy(mode, m)?;
    let sh = mode.h.sqrt();
    let pre = (0.75 + shift) * mode.h.ln();
    sup_over_grid(mode, |d| pre + alpha * d.min(eps0) / sh)
}

/// `sup exp(ln|u| + log_factor(d))` over the grid.
fn sup_over_grid(mode: &EigenMode, log_factor: impl Fn(f64) -> f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    match &mode.source {
        ModeSource::Radial { radius, .. } => {
            let n = 20_000;
            for i in 0..=n {
                let d = radius * i as f64 / n as f64;
                let v = mode.ln_ray_profile(d.min(*radius))? - 0.5 * (2.0 * PI * radius).ln() + log_factor(d);
                if v.is_finite() {
                    best = best.max(v);
                }
            }
        }
        ModeSource::Collar { .. } => {
            let grid = collar_grid(mode).unwrap();
            for (i, &t) in grid.t.iter().enumerate() {
                for j in 0..grid.u.ncols() {
                    let v = grid.u[(i, j)].abs().ln() + log_factor(t);
                    if v.is_finite() {
                        best = best.max(v);
                    }
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(invalid("no finite samples on the grid"));
    }
    Ok(best.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub h: f64,
    pub index: usize,
    pub w: f64,
    pub rate: f64,
    pub normalized_rate: f64,
    pub quadratic: Option<f64>,
    /// `(p, sup)` pairs.
    pub polynomial_sups: Vec<(f64, f64)>,
    pub agmon_ratio: f64,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub restricted_to_collar: bool,
    pub rate_window: (f64, f64),
    pub rate_pass: bool,
}

impl DecayReport {
    /// Rate fit, Agmon ratio at `(alpha, M)` and polynomial sups for each `p`;
    /// the rate passes when `r sqrt(h)` lies in `rate_window`.
    pub fn build(
        mode: &EigenMode,
        index: usize,
        alpha: f64,
        m: f64,
        ps: &[f64],
        epsilon: f64,
        rate_window: (f64, f64),
    ) -> Result<Self> {
        let fit = fit_decay_rate(mode)?;
        let agmon = agmon_ratio(mode, alpha, m)?;
        let polynomial_sups = ps
            .iter()
            .map(|&p| Ok((p, polynomial_bound_check(mode, p, epsilon)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            h: mode.h,
            index,
            w: mode.w(),
            rate: fit.rate,
            normalized_rate: fit.normalized_rate,
            quadratic: fit.quadratic,
            polynomial_sups,
            agmon_ratio: agmon.ratio,
            alpha,
            m,
            restricted_to_collar: agmon.restricted_to_collar,
            rate_window,
            rate_pass: fit.normalized_rate >= rate_window.0 && fit.normalized_rate <= rate_window.1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robin2d::{disk_mode_eig, EigenMode};

    fn disk_mode(h: f64, m: u32) -> EigenMode {
        let l = disk_mode_eig(h, m, 1.0).unwrap().unwrap();
        EigenMode::disk(h, 1.0, m, l).unwrap()
    }

    #[test]
    fn ground_state_rate() {
        let h = 1e-3;
        let f = fit_decay_rate(&disk_mode(h, 0)).unwrap();
        assert!(f.normalized_rate > 0.9 && f.normalized_rate < 1.1);
        assert!((f.rate / (-disk_mode(h, 0).w()).sqrt() - 1.0).abs() < 0.02);
    }

    #[test]
    fn unweighted_agmon() {
        let h = 1e-2;
        let mode = disk_mode(h, 0);
        let r = agmon_ratio(&mode, 0.0, 0.81).unwrap();
        // Without weight the ratio is 1 + h ||grad u||^2 / ||u||^2.
        let g = GaussLegendre::new(10);
        let (mut num, mut den) = (0.0, 0.0);
        for p in 0..400 {
            for (r, w) in g.on(p as f64 / 400.0, (p + 1) as f64 / 400.0) {
                let (f, df) = mode.radial_factor(r).unwrap();
                num += w * r * df * df;
                den += w * r * f * f;
            }
        }
        assert!((r.ratio - (1.0 + h * num / den)).abs() < 1e-9);
        assert!(agmon_ratio(&mode, 0.5, 0.81).unwrap().ratio > r.ratio);
    }

    #[test]
    fn hypothesis_rejected() {
        let h = 1e-2;
        let l = disk_mode_eig(h, 9, 1.0).unwrap().unwrap();
        let mode = EigenMode::disk(h, 1.0, 9, l).unwrap();
        assert!(matches!(agmon_ratio(&mode, 0.5, 0.81), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn p_zero_is_max() {
        let mode = disk_mode(1e-3, 0);
        let s = polynomial_bound_check(&mode, 0.0, 0.0).unwrap();
        assert!((s - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
    }
}
