//! Boundary-operator experiments: effective sandwich on a curve, the
//! Robin to Steklov correspondence and DtN pair gaps on the disk.

use super::{max_strict, points, Computed, Criterion, ExperimentConfig, TableSet};
use crate::effective_op::EffectiveOperator;
use crate::error::{invalid, Result};
use crate::geometry::Curve;
use crate::par;
use crate::robin2d::{collar_spectrum, disk_mode_eig, Domain, InnerBc, RobinProblem};
use crate::steklov::{disk_dtn_spectrum, dtn_disk_eig, robin_to_steklov, rozenblum_check};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SandwichRow {
    h: f64,
    c: f64,
    n: usize,
    /// `h^{3/2} lambda_n(L^{-c})`; NaN past the Neumann collar count.
    lower: f64,
    /// Neumann collar `lambda_n + h`.
    neumann_shifted: f64,
    /// Dirichlet collar `lambda_n + h`; NaN past its count.
    dirichlet_shifted: f64,
    /// `h^{3/2} lambda_n(L^{+c})`.
    upper: f64,
}

fn curve_of(cfg: &ExperimentConfig) -> Result<Curve> {
    match &cfg.domain {
        Some(Domain::Curve { curve }) => Curve::from_document(curve),
        Some(Domain::Disk { radius }) => Curve::circle(*radius),
        _ => Err(invalid("the sandwich experiment needs a curve or disk domain")),
    }
}

pub(super) fn sandwich(cfg: &ExperimentConfig) -> Result<Computed> {
    let curve = curve_of(cfg)?;
    let modes = cfg.param("effective_modes")? as usize;
    let disc = cfg.collar();
    let results = par::map(&cfg.h, |&h| -> Result<Vec<SandwichRow>> {
        let prob = RobinProblem::curve(h, &curve, 0.0)?;
        let neu = collar_spectrum(&prob, &disc.with_bc(InnerBc::Neumann))?;
        let dir = collar_spectrum(&prob, &disc.with_bc(InnerBc::Dirichlet))?;
        let count = neu.len().max(dir.len());
        let h32 = h.powf(1.5);
        let mut rows = Vec::new();
        for &c in &cfg.c_search {
            let lo = EffectiveOperator::new(&curve, h, -c, modes)?.eigenvalues(count)?;
            let up = EffectiveOperator::new(&curve, h, c, modes)?.eigenvalues(count)?;
            for n in 0..count {
                let (has_n, has_d) = (n < neu.len(), n < dir.len());
                rows.push(SandwichRow {
                    h,
                    c,
                    n: n + 1,
                    lower: if has_n { h32 * lo[n] } else { f64::NAN },
                    neumann_shifted: if has_n { neu.records[n].lambda + h } else { f64::NAN },
                    dirichlet_shifted: if has_d { dir.records[n].lambda + h } else { f64::NAN },
                    upper: if has_d { h32 * up[n] } else { f64::NAN },
                });
            }
        }
        Ok(rows)
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("h", &cfg.h), results);
    out.tables.insert("sandwich", &ok.concat())?;
    Ok(out)
}

pub(super) fn evaluate_sandwich(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<SandwichRow> = tables.rows("sandwich")?;
    let covered = cfg.h.iter().all(|&h| rows.iter().any(|r| r.h == h));
    let holds = |c: f64| {
        let sel: Vec<&SandwichRow> = rows.iter().filter(|r| r.c == c).collect();
        !sel.is_empty()
            && sel.iter().all(|r| {
                (r.lower.is_nan() || r.lower <= r.neumann_shifted)
                    && (r.upper.is_nan() || r.dirichlet_shifted <= r.upper)
            })
    };
    let mut cs = cfg.c_search.clone();
    cs.sort_by(f64::total_cmp);
    let found = if covered { cs.into_iter().find(|&c| holds(c)).unwrap_or(f64::INFINITY) } else { f64::INFINITY };
    Ok(vec![Criterion::at_most("sandwich_constant", found, cfg.tol("c_max")?)])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CorrespondenceRow {
    h: f64,
    m: u32,
    lambda: f64,
    /// `h^{-1} sqrt(h + lambda)`, NaN when `h + lambda < 0`.
    mu_robin: f64,
    /// `|mu_robin - h^{-1/2}| h^{1/2}`.
    rel_err_level: f64,
    /// `|mu_robin - m| / m`.
    rel_err_mode: f64,
    /// `mu_m(lambda / h^2)` of the DtN map.
    dtn_at_level: f64,
}

pub(super) fn steklov(cfg: &ExperimentConfig) -> Result<Computed> {
    let (lo, hi) = (cfg.param("lower_exponent")?, cfg.param("mode_factor")?);
    let grid: Vec<(f64, u32)> = cfg
        .h
        .iter()
        .flat_map(|&h| {
            let first = h.powf(lo).ceil() as u32;
            let last = (hi / h.sqrt()).floor() as u32;
            (first..=last).map(move |m| (h, m))
        })
        .collect();
    let results = par::map(&grid, |&(h, m)| -> Result<CorrespondenceRow> {
        let lambda = disk_mode_eig(h, m, 1.0)?.ok_or_else(|| invalid(format!("mode {m} has no negative eigenvalue")))?;
        let mu_robin = robin_to_steklov(h, lambda).unwrap_or(f64::NAN);
        let level = h.powf(-0.5);
        Ok(CorrespondenceRow {
            h,
            m,
            lambda,
            mu_robin,
            rel_err_level: (mu_robin - level).abs() / level,
            rel_err_mode: (mu_robin - m as f64).abs() / m as f64,
            dtn_at_level: dtn_disk_eig(lambda / (h * h), m)?,
        })
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("(h, m)", &grid), results);
    out.tables.insert("correspondence", &ok)?;
    Ok(out)
}

pub(super) fn evaluate_steklov(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<CorrespondenceRow> = tables.rows("correspondence")?;
    let tol = cfg.tol("rel_err")?;
    let window_low = cfg.param("index_window_low")?;
    let upper: Vec<&CorrespondenceRow> = rows.iter().filter(|r| r.m as f64 >= window_low / r.h.sqrt()).collect();
    let dtn = max_strict(rows.iter().map(|r| (r.dtn_at_level * r.h.sqrt() - 1.0).abs()));
    let nonempty = |v: f64, n: usize| if n == 0 { f64::INFINITY } else { v };
    Ok(vec![
        Criterion::at_most(
            "correspondence_against_level",
            nonempty(max_strict(rows.iter().map(|r| r.rel_err_level)), rows.len()),
            tol,
        ),
        Criterion::at_most(
            "correspondence_against_mode",
            nonempty(max_strict(rows.iter().map(|r| r.rel_err_mode)), rows.len()),
            tol,
        ),
        Criterion::at_most(
            "correspondence_against_mode_upper_window",
            nonempty(max_strict(upper.iter().map(|r| r.rel_err_mode)), upper.len()),
            tol,
        ),
        Criterion::at_most("dtn_level", nonempty(dtn, rows.len()), cfg.tol("dtn_level_rel")?),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairRow {
    w: f64,
    k: usize,
    mu_even: f64,
    mu_odd: f64,
    gap: f64,
    /// `|mu_even - k|` for the harmonic case, NaN otherwise.
    lattice_dev: f64,
}

pub(super) fn rozenblum(cfg: &ExperimentConfig) -> Result<Computed> {
    let k_max = cfg.param("k_max")? as usize;
    let results = par::map(&cfg.w_values, |&w| -> Result<Vec<PairRow>> {
        let spec = disk_dtn_spectrum(w, k_max as u32)?;
        let mus: Vec<f64> = spec.values.iter().map(|v| v.0).collect();
        let report = rozenblum_check(PI, &mus, 1, k_max)?;
        let rows: Vec<PairRow> = (1..=k_max)
            .map(|k| PairRow {
                w,
                k,
                mu_even: mus[2 * k - 1],
                mu_odd: mus[2 * k],
                gap: (mus[2 * k] - mus[2 * k - 1]).abs(),
                lattice_dev: if w == 0.0 { (mus[2 * k - 1] - k as f64).abs() } else { f64::NAN },
            })
            .collect();
        debug_assert_eq!(report.max_pair_gap, max_strict(rows.iter().map(|r| r.gap)));
        Ok(rows)
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("w", &cfg.w_values), results);
    out.tables.insert("pairs", &ok.concat())?;
    Ok(out)
}

pub(super) fn evaluate_rozenblum(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<PairRow> = tables.rows("pairs")?;
    let complete = rows.len() == cfg.w_values.len() * cfg.param("k_max")? as usize;
    let gap = if complete { max_strict(rows.iter().map(|r| r.gap)) } else { f64::INFINITY };
    let lattice = if cfg.w_values.contains(&0.0) {
        max_strict(rows.iter().filter(|r| r.w == 0.0).map(|r| r.lattice_dev))
    } else {
        0.0
    };
    Ok(vec![
        Criterion::at_most("pair_gap", gap, cfg.tol("pair_gap")?),
        Criterion::at_most("harmonic_lattice", lattice, cfg.tol("lattice_dev")?),
    ])
}
