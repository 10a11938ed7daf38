//! Interval model and weighted 1D operator experiments.

use super::{max_strict, min_strict, points, spread, Computed, Criterion, ExperimentConfig, TableSet};
use crate::error::Result;
use crate::model1d::{dirichlet_bracket, interval_ground, interval_positive, neumann_bracket, Cap, WeightedModel};
use crate::numerics::fit::fit_order;
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GroundRow {
    t: f64,
    cap: Cap,
    lambda: f64,
    lambda_plus_one: f64,
    /// `(lambda + 1) / (4 e^{-2T})`.
    ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BracketRow {
    t: f64,
    cap: Cap,
    n: usize,
    lambda: f64,
    /// Interval `(((2n-3) pi / 2T)^2, ((n-1) pi / T)^2)` quoted for both caps.
    shared_lower: f64,
    shared_upper: f64,
    /// Interval derived from the secular equation of this cap.
    own_lower: f64,
    own_upper: f64,
}

pub(super) fn lemmas(cfg: &ExperimentConfig) -> Result<Computed> {
    let n_max = cfg.param("n_max")? as usize;
    let mut out = Computed::new();
    let results = par::map(&cfg.t_values, |&t| -> Result<(Vec<GroundRow>, Vec<BracketRow>)> {
        let mut ground = Vec::new();
        let mut brackets = Vec::new();
        for cap in [Cap::Dirichlet, Cap::Neumann] {
            if let Ok((lambda, lp1)) = interval_ground(t, cap) {
                ground.push(GroundRow { t, cap, lambda, lambda_plus_one: lp1, ratio: lp1 / (4.0 * (-2.0 * t).exp()) });
            }
            for n in 2..=n_max {
                let lambda = interval_positive(t, cap, n)?;
                let shared = neumann_bracket(n, t);
                let own = match cap {
                    Cap::Dirichlet => dirichlet_bracket(n, t),
                    Cap::Neumann => neumann_bracket(n, t),
                };
                brackets.push(BracketRow {
                    t,
                    cap,
                    n,
                    lambda,
                    shared_lower: shared.0,
                    shared_upper: shared.1,
                    own_lower: own.0,
                    own_upper: own.1,
                });
            }
        }
        Ok((ground, brackets))
    });
    let ok = out.collect(&points("T", &cfg.t_values), results);
    let (g, b): (Vec<_>, Vec<_>) = ok.into_iter().unzip();
    out.tables.insert("ground", &g.concat())?;
    out.tables.insert("brackets", &b.concat())?;
    Ok(out)
}

pub(super) fn evaluate_lemmas(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let ground: Vec<GroundRow> = tables.rows("ground")?;
    let brackets: Vec<BracketRow> = tables.rows("brackets")?;
    let dev = |t: f64| {
        ground
            .iter()
            .find(|r| r.cap == Cap::Dirichlet && r.t == t)
            .map_or(f64::INFINITY, |r| (r.ratio - 1.0).abs())
    };
    let violations = |cap: Cap, own: bool| {
        brackets
            .iter()
            .filter(|r| r.cap == cap)
            .filter(|r| {
                let (lo, hi) = if own { (r.own_lower, r.own_upper) } else { (r.shared_lower, r.shared_upper) };
                !(lo < r.lambda && r.lambda < hi)
            })
            .count() as f64
    };
    Ok(vec![
        Criterion::at_most("ground_ratio_t5", dev(5.0), cfg.tol("ground_t5")?),
        Criterion::at_most("ground_ratio_t10", dev(10.0), cfg.tol("ground_t10")?),
        Criterion::at_most("dirichlet_brackets_shared", violations(Cap::Dirichlet, false), 0.0),
        Criterion::at_most("dirichlet_brackets_secular", violations(Cap::Dirichlet, true), 0.0),
        Criterion::at_most("neumann_brackets", violations(Cap::Neumann, false), 0.0),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuasiRow {
    h: f64,
    beta: f64,
    /// `cutoff` for `T = h^{rho - 1/2}`, `long` for the long-interval diagnostic.
    rule: String,
    length: f64,
    mu_app: f64,
    residual: f64,
    lambda1: f64,
    err_estimate: f64,
    /// `|lambda_1 - mu_app| / h^{3/2}`.
    scaled_error: f64,
}

fn long_length(cfg: &ExperimentConfig, h: f64, beta: f64) -> Result<f64> {
    let floor = cfg.param("long_weight_floor")?;
    let cap = cfg.param("long_max_length")?;
    Ok(if beta == 0.0 { cap } else { ((1.0 - floor) / (h.sqrt() * beta.abs())).min(cap) })
}

pub(super) fn quasimode(cfg: &ExperimentConfig) -> Result<Computed> {
    let rho = cfg.param("rho")?;
    let mut betas = cfg.betas.clone();
    let quasi_beta = cfg.param("beta")?;
    let long_h_max = cfg.param("long_h_max")?;
    if !betas.contains(&quasi_beta) {
        betas.push(quasi_beta);
    }
    let grid: Vec<(f64, f64, bool)> = cfg
        .h
        .iter()
        .flat_map(|&h| betas.iter().flat_map(move |&b| [(h, b, false), (h, b, true)]))
        .filter(|&(h, _, long)| !long || h <= long_h_max)
        .collect();
    let results = par::map(&grid, |&(h, beta, long)| -> Result<QuasiRow> {
        let m = if long {
            WeightedModel::with_length(h, beta, long_length(cfg, h, beta)?, Cap::Dirichlet)?
        } else {
            WeightedModel::new(h, beta, rho, Cap::Dirichlet)?
        };
        let q = m.quasimode();
        let e = m.eigenvalues(1)?[0];
        Ok(QuasiRow {
            h,
            beta,
            rule: if long { "long" } else { "cutoff" }.into(),
            length: m.length,
            mu_app: q.mu_app,
            residual: q.residual_norm,
            lambda1: e.lambda,
            err_estimate: e.err_estimate,
            scaled_error: (e.lambda - q.mu_app).abs() / h.powf(1.5),
        })
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("(h, beta, long)", &grid), results);
    out.tables.insert("quasimode", &ok)?;
    Ok(out)
}

pub(super) fn evaluate_quasimode(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<QuasiRow> = tables.rows("quasimode")?;
    let beta = cfg.param("beta")?;
    let (target, tol, bound) = (cfg.tol("slope_target")?, cfg.tol("slope_tol")?, cfg.tol("bounded_ratio")?);
    let slope = |rule: &str| {
        let sel: Vec<&QuasiRow> = rows.iter().filter(|r| r.rule == rule && r.beta == beta).collect();
        let xs: Vec<f64> = sel.iter().map(|r| r.h).collect();
        let ys: Vec<f64> = sel.iter().map(|r| r.residual).collect();
        fit_order(&xs, &ys, target, tol).map_or(f64::NAN, |f| f.slope)
    };
    let expansion = |rule: &str| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.rule == rule && cfg.betas.contains(&r.beta))
            .map(|r| r.scaled_error)
            .collect();
        spread(&v)
    };
    Ok(vec![
        Criterion::within("quasimode_slope", slope("cutoff"), target, tol),
        Criterion::at_most("expansion_constant", expansion("cutoff"), bound),
        Criterion::within("quasimode_slope_long", slope("long"), target, tol),
        Criterion::at_most("expansion_constant_long", expansion("long"), bound),
    ])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GapRow {
    h: f64,
    beta: f64,
    cap: Cap,
    length: f64,
    lambda2: f64,
    /// `lambda_2 h^{2 rho - 1}`.
    scaled_lambda2: f64,
    deflated: f64,
    scaled_deflated: f64,
}

pub(super) fn gap(cfg: &ExperimentConfig) -> Result<Computed> {
    let rho = cfg.param("rho")?;
    let grid: Vec<(f64, f64, Cap)> = cfg
        .h
        .iter()
        .flat_map(|&h| cfg.betas.iter().flat_map(move |&b| [(h, b, Cap::Dirichlet), (h, b, Cap::Neumann)]))
        .collect();
    let results = par::map(&grid, |&(h, beta, cap)| -> Result<GapRow> {
        let m = WeightedModel::new(h, beta, rho, cap)?;
        let scale = h.powf(2.0 * rho - 1.0);
        let lambda2 = m.eigenvalues(2)?[1].lambda;
        let deflated = m.deflated_minimum(m.elements)?;
        Ok(GapRow {
            h,
            beta,
            cap,
            length: m.length,
            lambda2,
            scaled_lambda2: lambda2 * scale,
            deflated,
            scaled_deflated: deflated * scale,
        })
    });
    let mut out = Computed::new();
    let ok = out.collect(&points("(h, beta, cap)", &grid), results);
    out.tables.insert("gap", &ok)?;
    Ok(out)
}

pub(super) fn evaluate_gap(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let rows: Vec<GapRow> = tables.rows("gap")?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.scaled_deflated).collect();
    // One series per (beta, cap); each must stay within the spread bound.
    let mut series: Vec<(f64, Cap)> = rows.iter().map(|r| (r.beta, r.cap)).collect();
    series.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 as u8).cmp(&(b.1 as u8))));
    series.dedup();
    let worst = max_strict(series.iter().map(|&(b, c)| {
        spread(&rows.iter().filter(|r| r.beta == b && r.cap == c).map(|r| r.scaled_deflated).collect::<Vec<_>>())
    }));
    Ok(vec![
        Criterion::at_least("gap_lower_bound", min_strict(rows.iter().map(|r| r.scaled_lambda2)), cfg.tol("gap_floor")?),
        Criterion::at_least("deflated_minimum_positive", min_strict(scaled.iter().copied()), f64::MIN_POSITIVE),
        Criterion::at_most("deflated_minimum_bounded", worst, cfg.tol("bounded_ratio")?),
    ])
}
