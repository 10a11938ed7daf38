//! Disk and annulus experiments: per-mode asymptotics, counting functions and
//! collar bracketing.

use super::{max_strict, points, spread, Computed, Criterion, ExperimentConfig, TableSet};
use crate::error::{invalid, Result};
use crate::numerics::fit::fit_order;
use crate::par;
use crate::robin2d::{
    annulus_spectrum, collar_spectrum, disk_count_below, disk_spectrum, InnerBc, RobinProblem, SpectrumResult,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModeRow {
    h: f64,
    n: usize,
    m: i64,
    lambda: f64,
    /// `lambda + h - h^2 m^2`.
    remainder: f64,
    /// `h^{3/2} (1 + h^{3/4} m^2)`.
    scale: f64,
}

pub(super) fn theorem_main(cfg: &ExperimentConfig) -> Result<Computed> {
    let factor = cfg.param("mode_factor")?;
    let results = par::map(&cfg.h, |&h| -> Result<Vec<ModeRow>> {
        let spec = disk_spectrum(&RobinProblem::disk(h, 1.0, 0.0)?)?;
        let k_max = factor / h.sqrt();
        Ok(spec
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| (r.mode.unsigned_abs() as f64) <= k_max)
            .map(|(n, r)| {
                let k2 = (r.mode * r.mode) as f64;
                ModeRow {
                    h,
                    n: n + 1,
                    m: r.mode,
                    lambda: r.lambda,
                    remainder: r.lambda + h - h * h * k2,
                    scale: h.powf(1.5) * (1.0 + h.powf(0.75) * k2),
                }
            })
            .collect())
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("h", &cfg.h), results);
    out.tables.insert("modes", &ok.concat())?;
    Ok(out)
}

pub(super) fn evaluate_theorem_main(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<ModeRow> = tables.rows("modes")?;
    let per_h: Vec<f64> = cfg
        .h
        .iter()
        .map(|&h| max_strict(rows.iter().filter(|r| r.h == h).map(|r| r.remainder.abs() / r.scale)))
        .collect();
    let c = max_strict(per_h.iter().copied());
    Ok(vec![
        Criterion::at_most("remainder_constant_spread", spread(&per_h), cfg.tol("bounded_ratio")?),
        Criterion::at_least("remainder_constant", c, f64::MIN_POSITIVE),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CountRow {
    h: f64,
    /// Threshold is `threshold_factor * h`.
    threshold_factor: f64,
    count: usize,
    /// `(|boundary| / pi) sqrt(1 + threshold_factor) h^{-1/2}`.
    prediction: f64,
}

pub(super) fn weyl(cfg: &ExperimentConfig) -> Result<Computed> {
    let shifted = cfg.param("threshold_factor")?;
    let grid: Vec<(f64, f64)> = cfg.h.iter().flat_map(|&h| [(h, 0.0), (h, shifted)]).collect();
    let results = par::map(&grid, |&(h, f)| -> Result<CountRow> {
        let count = disk_count_below(h, 1.0, f * h)?;
        Ok(CountRow { h, threshold_factor: f, count, prediction: 2.0 * (1.0 + f).sqrt() / h.sqrt() })
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("(h, threshold_factor)", &grid), results);
    out.tables.insert("counts", &ok)?;
    Ok(out)
}

pub(super) fn evaluate_weyl(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<CountRow> = tables.rows("counts")?;
    let shifted = cfg.param("threshold_factor")?;
    let zero: Vec<&CountRow> = rows.iter().filter(|r| r.threshold_factor == 0.0).collect();
    let dev0 = max_strict(zero.iter().map(|r| (r.count as f64 - r.prediction).abs()));
    let c = max_strict(
        rows.iter()
            .filter(|r| r.threshold_factor == shifted)
            .map(|r| (r.count as f64 - r.prediction).abs() * r.h.powf(0.25)),
    );
    let (target, tol) = (cfg.tol("slope_target")?, cfg.tol("slope_tol")?);
    let xs: Vec<f64> = zero.iter().map(|r| r.h).collect();
    let ys: Vec<f64> = zero.iter().map(|r| r.count as f64).collect();
    let slope = fit_order(&xs, &ys, target, tol).map_or(f64::NAN, |f| f.slope);
    Ok(vec![
        Criterion::at_most("zero_threshold_deviation", dev0, cfg.tol("zero_count_dev")?),
        Criterion::at_most("shifted_threshold_constant", c, cfg.tol("shifted_c_max")?),
        Criterion::within("count_slope", slope, target, tol),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BracketRow {
    h: f64,
    n: usize,
    m: i64,
    component: usize,
    exact: f64,
    neumann: f64,
    dirichlet: f64,
    /// `max(dirichlet - exact, exact - neumann) / h`.
    gap_over_h: f64,
}

fn bracket_rows(h: f64, exact: &SpectrumResult, neu: &SpectrumResult, dir: &SpectrumResult, modes: usize) -> Result<Vec<BracketRow>> {
    if exact.len() < modes || neu.len() < modes || dir.len() < modes {
        return Err(invalid(format!(
            "fewer than {modes} eigenvalues (exact {}, neumann {}, dirichlet {})",
            exact.len(),
            neu.len(),
            dir.len()
        )));
    }
    Ok((0..modes)
        .map(|i| {
            let e = &exact.records[i];
            let (nv, dv) = (neu.records[i].lambda, dir.records[i].lambda);
            BracketRow {
                h,
                n: i + 1,
                m: e.mode,
                component: e.component,
                exact: e.lambda,
                neumann: nv,
                dirichlet: dv,
                gap_over_h: (dv - e.lambda).max(e.lambda - nv) / h,
            }
        })
        .collect())
}

fn violations(rows: &[BracketRow]) -> f64 {
    rows.iter().filter(|r| !(r.neumann <= r.exact && r.exact <= r.dirichlet)).count() as f64
}

pub(super) fn bracketing(cfg: &ExperimentConfig) -> Result<Computed> {
    let modes = cfg.param("modes")? as usize;
    let disc = cfg.collar();
    let results = par::map(&cfg.h, |&h| -> Result<Vec<BracketRow>> {
        let prob = RobinProblem::disk(h, 1.0, 0.0)?;
        let exact = disk_spectrum(&prob)?;
        let neu = collar_spectrum(&prob, &disc.with_bc(InnerBc::Neumann))?;
        let dir = collar_spectrum(&prob, &disc.with_bc(InnerBc::Dirichlet))?;
        bracket_rows(h, &exact, &neu, &dir, modes)
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("h", &cfg.h), results);
    out.tables.insert("bracketing", &ok.concat())?;
    Ok(out)
}

pub(super) fn evaluate_bracketing(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<BracketRow> = tables.rows("bracketing")?;
    let expected = cfg.h.len() * cfg.param("modes")? as usize;
    let order = if rows.len() == expected { violations(&rows) } else { f64::INFINITY };
    let tol = cfg.tol("gap_over_h")?;
    let mut out = vec![
        Criterion::at_most("bracket_order", order, 0.0),
        Criterion::at_most("collar_gap_over_h", max_strict(rows.iter().map(|r| r.gap_over_h)), tol),
    ];
    for &h in &cfg.h {
        let g = max_strict(rows.iter().filter(|r| r.h == h).map(|r| r.gap_over_h));
        out.push(Criterion::at_most(&format!("collar_gap_over_h_at_{h}"), g, tol));
    }
    Ok(out)
}

pub(super) fn annulus(cfg: &ExperimentConfig) -> Result<Computed> {
    let modes = cfg.param("modes")? as usize;
    let r0 = cfg.param("inner_radius")?;
    let disc = cfg.collar();
    let results = par::map(&cfg.h, |&h| -> Result<(Vec<BracketRow>, CountRow)> {
        let prob = RobinProblem::annulus(h, r0, 0.0)?;
        let exact = annulus_spectrum(&prob)?;
        let neu = collar_spectrum(&prob, &disc.with_bc(InnerBc::Neumann))?;
        let dir = collar_spectrum(&prob, &disc.with_bc(InnerBc::Dirichlet))?;
        let count = CountRow {
            h,
            threshold_factor: 0.0,
            count: exact.count_below(0.0),
            prediction: 2.0 * (1.0 + r0) / h.sqrt(),
        };
        Ok((bracket_rows(h, &exact, &neu, &dir, modes)?, count))
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("h", &cfg.h), results);
    let (b, c): (Vec<_>, Vec<_>) = ok.into_iter().unzip();
    out.tables.insert("bracketing", &b.concat())?;
    out.tables.insert("counts", &c)?;
    Ok(out)
}

pub(super) fn evaluate_annulus(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<BracketRow> = tables.rows("bracketing")?;
    let counts: Vec<CountRow> = tables.rows("counts")?;
    let expected = cfg.h.len() * cfg.param("modes")? as usize;
    let order = if rows.len() == expected { violations(&rows) } else { f64::INFINITY };
    let dev = if counts.len() == cfg.h.len() {
        max_strict(counts.iter().map(|r| (r.count as f64 - r.prediction).abs()))
    } else {
        f64::INFINITY
    };
    Ok(vec![
        Criterion::at_most("bracket_order", order, 0.0),
        Criterion::at_most("count_deviation", dev, cfg.tol("count_dev")?),
    ])
}
