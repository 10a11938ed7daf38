use super::{sort_records, Domain, EigenRecord, Method, RobinProblem, SpectrumResult};
use crate::error::{invalid, Result};
use crate::numerics::bessel::{i_log_derivative, k_log_derivative, ln_i, ln_k};
use crate::numerics::roots::bisect;

const SCAN_POINTS: usize = 2000;

/// Scaled boundary determinant of the annulus `{r0 < r < 1}` in mode `m` at
/// `w = -xi^2`. The radial solution is `c1 I_m(xi r) + c2 K_m(xi r)`; rows
/// are divided by `I_m(xi) K_m(xi r0)` so that the coupling term carries the
/// factor `K_m(xi) I_m(xi r0) / (I_m(xi) K_m(xi r0)) < 1`.
fn determinant(m: u32, xi: f64, r0: f64, k: f64) -> f64 {
    let a_i = i_log_derivative(m, xi) - k;
    let a_k = k_log_derivative(m, xi) - k;
    let b_i = -i_log_derivative(m, xi * r0) / r0 - k;
    let b_k = -k_log_derivative(m, xi * r0) / r0 - k;
    let ln_e = ln_k(m, xi) + ln_i(m, xi * r0) - ln_i(m, xi) - ln_k(m, xi * r0);
    a_i * b_k - ln_e.exp() * a_k * b_i
}

fn monotone_root(f: impl Fn(f64) -> f64, lo: f64, mut hi: f64) -> Result<Option<f64>> {
    if f(lo) >= 0.0 {
        return Ok(None);
    }
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(f, lo, hi, 1e-15).map(Some)
}

/// `(lambda, component)` pairs for mode `m`, component 0 for the outer circle.
pub fn annulus_mode_eigenvalues(h: f64, m: u32, r0: f64) -> Result<Vec<(f64, usize)>> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(invalid("annulus inner radius must lie in (0, 1)"));
    }
    let k = h.powf(-0.5);
    let xi_min = 1e-8;
    // Uncoupled boundary conditions locate the roots approximately.
    let outer = monotone_root(|x| i_log_derivative(m, x) - k, xi_min, k + 2.0)?;
    let inner = monotone_root(|x| -k_log_derivative(m, x * r0) / r0 - k, xi_min, k + 2.0)?;
    let xi_max = k + 3.0 + 1.0 / r0;
    let mut grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| xi_min + (xi_max - xi_min) * i as f64 / SCAN_POINTS as f64)
        .collect();
    grid.push(xi_min);
    for c in outer.iter().chain(&inner) {
        for j in -6i32..=6 {
            let p = c + j as f64 * 1e-3 * c.max(1.0) * 4f64.powi(-j.abs());
            if p > xi_min && p < xi_max {
                grid.push(p);
            }
        }
    }
    if let (Some(a), Some(b)) = (outer, inner) {
        grid.push(0.5 * (a + b));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&x| determinant(m, x, r0, k)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
        } else if vals[i].signum() != vals[i + 1].signum() {
            roots.push(bisect(|x| determinant(m, x, r0, k), grid[i], grid[i + 1], 1e-15)?);
        }
    }
    Ok(roots
        .into_iter()
        .map(|xi| {
            let d_out = outer.map_or(f64::INFINITY, |o| (o - xi).abs());
            let d_in = inner.map_or(f64::INFINITY, |o| (o - xi).abs());
            (-h * h * xi * xi, usize::from(d_in < d_out))
        })
        .collect())
}

/// Negative spectrum of the annulus `{r0 < |x| < 1}`.
pub fn annulus_spectrum(prob: &RobinProblem) -> Result<SpectrumResult> {
    let Domain::Annulus { inner_radius } = prob.domain else {
        return Err(invalid("annulus_spectrum needs an annulus domain"));
    };
    if prob.window > 0.0 {
        return Err(invalid("annulus spectra are computed for windows <= 0"));
    }
    let h = prob.h;
    let m_last = h.powf(-0.5).ceil() as u32 + 2;
    let mut records = Vec::new();
    let mut complete = true;
    for m in 0..=m_last {
        let roots = annulus_mode_eigenvalues(h, m, inner_radius)?;
        let expected = usize::from((m as f64) < h.powf(-0.5)) + usize::from((m as f64) < inner_radius * h.powf(-0.5));
        if roots.len() < expected {
            complete = false;
        }
        for (lambda, comp) in roots {
            if lambda >= prob.window {
                continue;
            }
            let tags: &[i64] = if m == 0 { &[0] } else { &[m as i64, -(m as i64)] };
            for &tag in tags {
                records.push(EigenRecord {
                    lambda,
                    mode: tag,
                    component: comp,
                    method: Method::BesselExact,
                    inner_bc: None,
                    err_estimate: 8.0 * f64::EPSILON * lambda.abs(),
                });
            }
        }
    }
    sort_records(&mut records);
    Ok(SpectrumResult { problem: prob.clone(), records, collar: None, complete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robin2d::disk_mode_eig;

    #[test]
    fn two_roots_for_modes_seen_by_both_circles() {
        let h = 1e-2;
        for m in 0..10u32 {
            let r = annulus_mode_eigenvalues(h, m, 0.5).unwrap();
            let expect = 1 + usize::from(m < 5);
            assert_eq!(r.len(), expect, "mode {m}: {r:?}");
        }
        // Off the integer lattice of h^{-1/2} the counts are 10 + 5 modes.
        let h = 1.1e-2;
        for m in 0..12u32 {
            let r = annulus_mode_eigenvalues(h, m, 0.5).unwrap();
            assert_eq!(r.len(), usize::from(m < 10) + usize::from(m < 5), "mode {m}: {r:?}");
        }
    }

    #[test]
    fn coupling_lowers_the_tie_mode() {
        // At h^{-1/2} = 10 the disk mode 10 sits exactly at zero; the inner
        // circle pulls it slightly below.
        let r = annulus_mode_eigenvalues(1e-2, 10, 0.5).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].0 < 0.0 && r[0].0 > -1e-5);
    }

    #[test]
    fn small_hole_recovers_disk() {
        let h = 1e-2;
        for m in [2u32, 3, 6] {
            let disk = disk_mode_eig(h, m, 1.0).unwrap().unwrap();
            let r = annulus_mode_eigenvalues(h, m, 1e-3).unwrap();
            let outer: Vec<_> = r.iter().filter(|x| x.1 == 0).collect();
            assert_eq!(outer.len(), 1);
            assert!((outer[0].0 - disk).abs() < 1e-8 * disk.abs(), "{m}");
        }
    }

    #[test]
    fn spectrum_is_complete_and_sorted() {
        let s = annulus_spectrum(&RobinProblem::annulus(1.1e-2, 0.5, 0.0).unwrap()).unwrap();
        assert!(s.complete);
        assert_eq!(s.len(), 19 + 9);
        assert!(s.records.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    }
}
