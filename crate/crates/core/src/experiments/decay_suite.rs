//! Localisation of the disk ground state along an h-sweep.

use super::{max_strict, min_strict, points, spread, Computed, Criterion, ExperimentConfig, TableSet};
use crate::decay::{agmon_ratio, fit_decay_rate, pointwise_prefactor_check, polynomial_bound_check, DecayReport};
use crate::error::{invalid, Result};
use crate::par;
use crate::robin2d::{collar_spectrum, disk_mode_eig, mode_profile, EigenMode, RobinProblem};
use serde::{Deserialize, Serialize};

const PROFILE_SAMPLES: usize = 161;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DecayRow {
    h: f64,
    w: f64,
    rate: f64,
    normalized_rate: f64,
    quadratic: Option<f64>,
    /// Same fit on the collar mode; absent unless the window fits in half the collar.
    collar_normalized_rate: Option<f64>,
    agmon: f64,
    agmon_negative: f64,
    poly: f64,
    poly_alt: f64,
    pointwise: f64,
    pointwise_shifted: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileRow {
    h: f64,
    t: f64,
    abs_u: f64,
    log_abs_u: f64,
}

pub(super) fn compute(cfg: &ExperimentConfig) -> Result<Computed> {
    let (alpha, m) = (cfg.param("alpha")?, cfg.param("M")?);
    let (p, p_alt, eps) = (cfg.param("p")?, cfg.param("p_alt")?, cfg.param("epsilon")?);
    let neg_alpha = cfg.param("negative_alpha_factor")? * m.sqrt();
    let (pw_alpha, eps0, shift) = (cfg.param("pointwise_alpha")?, cfg.param("eps0")?, cfg.param("pointwise_shift")?);
    let disc = cfg.collar();
    let results = par::map(&cfg.h, |&h| -> Result<(DecayRow, Vec<ProfileRow>, DecayReport)> {
        let lambda = disk_mode_eig(h, 0, 1.0)?.ok_or_else(|| invalid("no ground state"))?;
        let mode = EigenMode::disk(h, 1.0, 0, lambda)?;
        let fit = fit_decay_rate(&mode)?;
        let collar_rate = if 6.0 * h.sqrt() <= 0.5 * disc.width(h) {
            let collar = collar_spectrum(&RobinProblem::disk(h, 1.0, 0.0)?, &disc)?;
            Some(fit_decay_rate(&mode_profile(&collar, 0)?)?.normalized_rate)
        } else {
            None
        };
        let row = DecayRow {
            h,
            w: mode.w(),
            rate: fit.rate,
            normalized_rate: fit.normalized_rate,
            quadratic: fit.quadratic,
            collar_normalized_rate: collar_rate,
            agmon: agmon_ratio(&mode, alpha, m)?.ratio,
            agmon_negative: agmon_ratio(&mode, neg_alpha, m)?.ratio,
            poly: polynomial_bound_check(&mode, p, eps)?,
            poly_alt: polynomial_bound_check(&mode, p_alt, eps)?,
            pointwise: pointwise_prefactor_check(&mode, pw_alpha, m, eps0, 0.0)?,
            pointwise_shifted: pointwise_prefactor_check(&mode, pw_alpha, m, eps0, shift)?,
        };
        let depth = 8.0 * h.sqrt();
        let profile = (0..PROFILE_SAMPLES)
            .map(|i| {
                let t = depth * i as f64 / (PROFILE_SAMPLES - 1) as f64;
                let u = mode.ray_value(t)?;
                Ok(ProfileRow { h, t, abs_u: u, log_abs_u: u.ln() })
            })
            .collect::<Result<Vec<_>>>()?;
        let report = DecayReport::build(
            &mode,
            1,
            alpha,
            m,
            &[p, p_alt],
            eps,
            (cfg.tol("rate_min")?, cfg.tol("rate_max")?),
        )?;
        Ok((row, profile, report))
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("h", &cfg.h), results);
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    let mut reports = Vec::new();
    for (r, p, d) in ok {
        rows.push(r);
        profiles.extend(p);
        reports.push(d);
    }
    out.tables.insert("decay", &rows)?;
    out.tables.insert("profiles", &profiles)?;
    out.json.push(("decay_reports.json".into(), serde_json::to_string_pretty(&reports)?));
    Ok(out)
}

/// `values[last] / values[first]` in sweep order.
fn growth(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(a), Some(b)) if values.len() >= 2 && *a > 0.0 => b / a,
        _ => f64::NAN,
    }
}

/// Largest value relative to the coarsest one: small when nothing grows.
fn growth_max(values: &[f64]) -> f64 {
    match values.first() {
        Some(a) if *a > 0.0 => max_strict(values.iter().copied()) / a,
        _ => f64::NAN,
    }
}

pub(super) fn evaluate(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let mut rows: Vec<DecayRow> = tables.rows("decay")?;
    if rows.len() != cfg.h.len() {
        rows.clear();
    }
    let col = |f: fn(&DecayRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let bound = cfg.tol("bounded_ratio")?;
    let rates = col(|r| r.normalized_rate);
    let collar_dev = max_strict(
        rows.iter().filter_map(|r| r.collar_normalized_rate.map(|c| (c / r.normalized_rate - 1.0).abs())),
    );
    Ok(vec![
        Criterion::at_least("rate_min", min_strict(rates.iter().copied()), cfg.tol("rate_min")?),
        Criterion::at_most("rate_max", max_strict(rates.iter().copied()), cfg.tol("rate_max")?),
        Criterion::at_most("agmon_bounded", spread(&col(|r| r.agmon)), bound),
        Criterion::at_most("polynomial_bounded", spread(&col(|r| r.poly)), bound),
        Criterion::at_least("agmon_negative_growth", growth(&col(|r| r.agmon_negative)), cfg.tol("growth_min")?),
        Criterion::at_most("pointwise_non_growing", growth_max(&col(|r| r.pointwise)), bound),
        Criterion::at_least("pointwise_shifted_growth", growth(&col(|r| r.pointwise_shifted)), cfg.tol("growth_min")?),
        Criterion::at_most("collar_rate_agreement", collar_dev, cfg.tol("collar_rate_rel")?),
    ])
}
