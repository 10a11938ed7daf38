//! Dirichlet-to-Neumann spectra, the Robin to Steklov correspondence
//! `mu ~ h^{-1} sqrt(h + lambda)`, Weyl counting and pair-gap checks.

use crate::error::{invalid, Error, Result};
use crate::numerics::bessel::{i_log_derivative, j_log_derivative, J0_FIRST_ZERO};
use crate::numerics::fit::{fit_order, FitReport};
use crate::robin2d::SpectrumResult;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenvalue `mu_m(w)` of the DtN map `Lambda(w)` of the unit disk in
/// angular mode `m`, for `w < j_{0,1}^2`.
pub fn dtn_disk_eig(w: f64, m: u32) -> Result<f64> {
    if !w.is_finite() || w >= J0_FIRST_ZERO * J0_FIRST_ZERO {
        return Err(invalid(format!("w = {w} is not below the first Dirichlet eigenvalue of the disk")));
    }
    Ok(if w < 0.0 {
        i_log_derivative(m, (-w).sqrt())
    } else if w == 0.0 {
        m as f64
    } else {
        j_log_derivative(m, w.sqrt())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnSpectrum {
    pub w: f64,
    pub domain: String,
    /// `(mu, signed angular mode)`, ascending.
    pub values: Vec<(f64, i64)>,
}

/// DtN eigenvalues of the unit disk for angular modes `|m| <= m_max`.
pub fn disk_dtn_spectrum(w: f64, m_max: u32) -> Result<DtnSpectrum> {
    let mut values = Vec::new();
    for m in 0..=m_max {
        let mu = dtn_disk_eig(w, m)?;
        values.push((mu, m as i64));
        if m > 0 {
            values.push((mu, -(m as i64)));
        }
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    Ok(DtnSpectrum { w, domain: "disk-r1".into(), values })
}

/// `h^{-1} sqrt(h + lambda)`; eigenvalues below `-h` are outside the model.
pub fn robin_to_steklov(h: f64, lambda: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("h must be positive"));
    }
    if lambda < -h {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} lies below the floor -h = {}; out of model",
            -h
        )));
    }
    Ok((h + lambda).sqrt() / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCount {
    pub count: usize,
    pub prediction: f64,
    pub deviation: f64,
}

/// Counting function `N(T_h, threshold)` against
/// `(|boundary|/pi) sqrt(1 + lambda) h^{-1/2}` with `lambda = threshold/h` for
/// negative thresholds and `lambda = 0` otherwise.
pub fn weyl_count(spectrum: &SpectrumResult, threshold: f64) -> Result<WeylCount> {
    if !spectrum.complete {
        return Err(invalid("spectrum is flagged incomplete; counting would be unreliable"));
    }
    let h = spectrum.problem.h;
    if threshold > spectrum.problem.window {
        return Err(invalid("threshold above the computed window"));
    }
    let lam = threshold.min(0.0) / h;
    if lam < -1.0 {
        return Err(invalid("threshold below -h"));
    }
    let len = spectrum.problem.domain.boundary_length()?;
    let count = spectrum.count_below(threshold);
    let prediction = len / PI * (1.0 + lam).sqrt() / h.sqrt();
    Ok(WeylCount { count, prediction, deviation: count as f64 - prediction })
}

/// `#{(m, sign) : mu_m(0) < h^{-1/2}}` for the unit disk.
pub fn disk_steklov_count(h: f64) -> usize {
    let k = h.powf(-0.5);
    let mut n = 0;
    let mut m = 0u32;
    while (m as f64) < k {
        n += if m == 0 { 1 } else { 2 };
        m += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RozenblumReport {
    pub k_min: usize,
    pub k_max: usize,
    /// `max_k |mu_{2k+1} - mu_{2k}|`.
    pub max_pair_gap: f64,
    /// `max_k |mu_{2k} - pi k / L|`.
    pub max_lattice_deviation: f64,
    /// Power-law fit of the nonzero gaps against `k`, when there are enough.
    pub gap_fit: Option<FitReport>,
}

/// Pair gaps of an ascending Steklov list `mu_1 <= mu_2 <= ...` (1 based as
/// in `mu_{2k} ~ mu_{2k+1} ~ pi k / L`) for `k_min <= k <= k_max`.
pub fn rozenblum_check(half_length: f64, mus: &[f64], k_min: usize, k_max: usize) -> Result<RozenblumReport> {
    if k_min == 0 || k_min > k_max || mus.len() < 2 * k_max + 1 {
        return Err(invalid(format!(
            "need 1 <= k_min <= k_max and at least {} values",
            2 * k_max + 1
        )));
    }
    let mut gap: f64 = 0.0;
    let mut lat: f64 = 0.0;
    let mut ks = Vec::new();
    let mut gs = Vec::new();
    for k in k_min..=k_max {
        let even = mus[2 * k - 1];
        let odd = mus[2 * k];
        let g = (odd - even).abs();
        gap = gap.max(g);
        lat = lat.max((even - PI * k as f64 / half_length).abs());
        if g > 0.0 {
            ks.push(k as f64);
            gs.push(g);
        }
    }
    let gap_fit = if ks.len() >= 4 { fit_order(&ks, &gs, f64::NEG_INFINITY, f64::INFINITY).ok() } else { None };
    Ok(RozenblumReport { k_min, k_max, max_pair_gap: gap, max_lattice_deviation: lat, gap_fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteklovRow {
    pub domain_id: String,
    pub w_or_h: f64,
    pub m: i64,
    pub mu: f64,
    pub method: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robin2d::{disk_mode_eig, disk_spectrum, RobinProblem};
    use proptest::prelude::*;

    #[test]
    fn harmonic_values() {
        assert_eq!(dtn_disk_eig(0.0, 3).unwrap(), 3.0);
        let s = disk_dtn_spectrum(0.0, 50).unwrap();
        let mus: Vec<f64> = s.values.iter().map(|v| v.0).collect();
        let r = rozenblum_check(PI, &mus, 1, 50).unwrap();
        assert_eq!(r.max_pair_gap, 0.0);
        assert!(r.max_lattice_deviation < 1e-12);
        assert!(dtn_disk_eig(6.0, 0).is_err());
    }

    #[test]
    fn large_negative_w() {
        let w = -1e8;
        let mu = dtn_disk_eig(w, 4).unwrap();
        assert!((mu / (-w).sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn correspondence_floor_and_level() {
        let h = 1e-2;
        assert_eq!(robin_to_steklov(h, -h).unwrap(), 0.0);
        assert!((robin_to_steklov(h, 0.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(robin_to_steklov(h, -1.1 * h).is_err());
    }

    #[test]
    fn robin_level_is_dtn_eigenvalue() {
        // The Robin eigenvalue in mode m is the w at which mu_m(w) = h^{-1/2}.
        let h = 1e-2;
        let l = disk_mode_eig(h, 5, 1.0).unwrap().unwrap();
        let mu = dtn_disk_eig(l / (h * h), 5).unwrap();
        assert!((mu - 10.0).abs() < 1e-10);
    }

    #[test]
    fn counting_identity() {
        for h in [1.3e-2, 4.1e-3, 7e-4] {
            let s = disk_spectrum(&RobinProblem::disk(h, 1.0, 0.0).unwrap()).unwrap();
            let w = weyl_count(&s, 0.0).unwrap();
            assert_eq!(w.count, disk_steklov_count(h));
        }
    }

    proptest! {
        #[test]
        fn dtn_decreasing_in_w(m in 0u32..30, a in -500.0f64..-0.01, d in 0.001f64..50.0) {
            prop_assert!(dtn_disk_eig(a - d, m).unwrap() > dtn_disk_eig(a, m).unwrap());
        }

        #[test]
        fn correspondence_monotone(l1 in -0.01f64..0.0, d in 1e-6f64..1e-3) {
            prop_assert!(robin_to_steklov(0.01, l1).unwrap() < robin_to_steklov(0.01, l1 + d).unwrap());
        }
    }
}
