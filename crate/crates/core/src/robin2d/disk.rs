use super::{sort_records, Domain, EigenRecord, Method, RobinProblem, SpectrumResult};
use crate::error::{invalid, Result};
use crate::numerics::bessel::{i_log_derivative, j_log_derivative};
use crate::numerics::roots::bisect_newton;

/// Negative eigenvalue of `T_h` in angular mode `m` on the disk of radius
/// `r`, if any. A root exists iff `m < r h^{-1/2}`.
pub fn disk_mode_eig(h: f64, m: u32, radius: f64) -> Result<Option<f64>> {
    Ok(disk_mode_root(h, m, radius)?.map(|(lambda, _)| lambda))
}

/// `(lambda, err_estimate)` for the negative branch.
pub(crate) fn disk_mode_root(h: f64, m: u32, radius: f64) -> Result<Option<(f64, f64)>> {
    if !(h > 0.0 && h < 1.0 && radius > 0.0) {
        return Err(invalid("disk mode needs h in (0, 1) and r > 0"));
    }
    let alpha = radius / h.sqrt();
    if (m as f64) >= alpha {
        return Ok(None);
    }
    // x I_m'(x)/I_m(x) increases from m at x = 0 and exceeds x - 1/2.
    let g = |x: f64| i_log_derivative(m, x) - alpha;
    let dg = |x: f64| {
        let y = i_log_derivative(m, x);
        (x * x + (m * m) as f64 - y * y) / x
    };
    let mut hi = alpha + 2.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    let x = bisect_newton(g, dg, 1e-300_f64.max(1e-12 * alpha), hi, 1e-16)?;
    let xi = x / radius;
    let lambda = -h * h * xi * xi;
    let dx = (g(x) / dg(x)).abs() + 4.0 * f64::EPSILON * x;
    Ok(Some((lambda, 2.0 * h * h * xi * dx / radius)))
}

/// Positive eigenvalue `h^2 w` with `0 < w <= w_max` in mode `m`, from
/// `sqrt(w) r J_m'/J_m = r h^{-1/2}`; requires `w_max r^2` below the first
/// zero of `J_m` squared.
pub fn disk_mode_positive(h: f64, m: u32, radius: f64, w_max: f64) -> Result<Option<f64>> {
    let alpha = radius / h.sqrt();
    if w_max <= 0.0 || (m as f64) <= alpha {
        return Ok(None);
    }
    let x_max = radius * w_max.sqrt();
    let g = |x: f64| j_log_derivative(m, x) - alpha;
    if g(x_max) > 0.0 {
        return Ok(None);
    }
    let dg = |x: f64| {
        let y = j_log_derivative(m, x);
        (-x * x + (m * m) as f64 - y * y) / x
    };
    let x = bisect_newton(g, dg, 1e-12 * x_max, x_max, 1e-16)?;
    Ok(Some(h * h * (x / radius).powi(2)))
}

/// All disk eigenvalues below the window, angular modes `m >= 1` twice.
pub fn disk_spectrum(prob: &RobinProblem) -> Result<SpectrumResult> {
    let Domain::Disk { radius } = prob.domain else {
        return Err(invalid("disk_spectrum needs a disk domain"));
    };
    let h = prob.h;
    let alpha = radius / h.sqrt();
    let w_max = prob.window / (h * h);
    let mut records = Vec::new();
    let push = |records: &mut Vec<EigenRecord>, m: u32, lambda: f64, err: f64| {
        let tags: &[i64] = if m == 0 { &[0] } else { &[m as i64, -(m as i64)] };
        for &tag in tags {
            records.push(EigenRecord {
                lambda,
                mode: tag,
                component: 0,
                method: Method::BesselExact,
                inner_bc: None,
                err_estimate: err,
            });
        }
    };
    let m_last = alpha.ceil() as u32 + 2;
    let mut m = 0u32;
    loop {
        let mut found = false;
        if let Some((lambda, err)) = disk_mode_root(h, m, radius)? {
            if lambda < prob.window {
                push(&mut records, m, lambda, err);
                found = true;
            }
        }
        if let Some(lambda) = disk_mode_positive(h, m, radius, w_max)? {
            if lambda < prob.window {
                push(&mut records, m, lambda, 4.0 * f64::EPSILON * lambda);
                found = true;
            }
        }
        if m >= m_last && !found {
            break;
        }
        m += 1;
    }
    sort_records(&mut records);
    Ok(SpectrumResult { problem: prob.clone(), records, collar: None, complete: true })
}

/// Number of disk eigenvalues strictly below `threshold <= 0`, with multiplicity.
pub fn disk_count_below(h: f64, radius: f64, threshold: f64) -> Result<usize> {
    if threshold > 0.0 {
        return Err(invalid("disk_count_below handles non-positive thresholds"));
    }
    let mut n = 0;
    let mut m = 0u32;
    while let Some(lambda) = disk_mode_eig(h, m, radius)? {
        if lambda < threshold {
            n += if m == 0 { 1 } else { 2 };
        } else {
            break;
        }
        m += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn existence_threshold_is_strict() {
        let h = 1e-2;
        assert!(disk_mode_eig(h, 9, 1.0).unwrap().is_some());
        assert!(disk_mode_eig(h, 10, 1.0).unwrap().is_none());
        assert!(disk_mode_eig(h, 11, 1.0).unwrap().is_none());
    }

    #[test]
    fn ground_state_near_two_term_asymptotics() {
        let h = 1e-2;
        let l = disk_mode_eig(h, 0, 1.0).unwrap().unwrap();
        assert!((l - (-h - h.powf(1.5))).abs() < 2e-4);
    }

    #[test]
    fn negative_count_and_pairing() {
        let prob = RobinProblem::disk(1e-2, 1.0, 0.0).unwrap();
        let s = disk_spectrum(&prob).unwrap();
        assert_eq!(s.len(), 19);
        assert_eq!(disk_count_below(1e-2, 1.0, 0.0).unwrap(), 19);
        for m in 1..10i64 {
            let a: Vec<_> = s.records.iter().filter(|r| r.mode.abs() == m).collect();
            assert_eq!(a.len(), 2);
            assert_eq!(a[0].lambda, a[1].lambda);
        }
    }

    #[test]
    fn positive_branch_inside_window() {
        // h^{-1/2} = 10.9: mode 11 has a root with w just above zero.
        let h = 1.0 / (10.9f64 * 10.9);
        let l = disk_mode_positive(h, 11, 1.0, 3.3).unwrap().unwrap();
        let x = (l / (h * h)).sqrt();
        assert!(x < 3.3f64.sqrt());
        assert!((j_log_derivative(11, x) - 10.9).abs() < 1e-9);
        assert!(disk_mode_positive(h, 10, 1.0, 3.3).unwrap().is_none());
        assert!(disk_mode_positive(h, 12, 1.0, 3.3).unwrap().is_none());
        let s = disk_spectrum(&RobinProblem::disk(h, 1.0, 3.3 * h * h).unwrap()).unwrap();
        assert_eq!(s.len(), 23);
    }
}
