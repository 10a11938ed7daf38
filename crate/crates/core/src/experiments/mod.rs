//! Batch experiments: configuration, CSV tables, pass/fail summaries and an
//! independent checker that recomputes every verdict from the written tables.
//!
//! Each experiment is split into `compute`, which produces typed rows that are
//! serialised to CSV text, and `evaluate`, which only ever sees that CSV text.
//! Running in memory and checking files on disk therefore go through the same
//! code path.

mod boundary;
mod decay_suite;
mod disk;
mod one_d;

use crate::error::{Error, Result};
use crate::geometry::{Curve, CurveDocument};
use crate::robin2d::{CollarDiscretization, Domain};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_TABLE: &str = "timing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Model1dLemmas,
    QuasimodeOrder,
    Gap,
    EffectiveSandwich,
    DiskTheoremMain,
    Weyl,
    SteklovCorrespondence,
    Rozenblum,
    DecaySuite,
    Annulus,
    Bracketing,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::Model1dLemmas,
        ExperimentId::QuasimodeOrder,
        ExperimentId::Gap,
        ExperimentId::DiskTheoremMain,
        ExperimentId::Weyl,
        ExperimentId::Bracketing,
        ExperimentId::EffectiveSandwich,
        ExperimentId::SteklovCorrespondence,
        ExperimentId::Rozenblum,
        ExperimentId::DecaySuite,
        ExperimentId::Annulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Model1dLemmas => "model1d-lemmas",
            ExperimentId::QuasimodeOrder => "quasimode-order",
            ExperimentId::Gap => "gap",
            ExperimentId::EffectiveSandwich => "effective-sandwich",
            ExperimentId::DiskTheoremMain => "disk-theorem-main",
            ExperimentId::Weyl => "weyl",
            ExperimentId::SteklovCorrespondence => "steklov-correspondence",
            ExperimentId::Rozenblum => "rozenblum",
            ExperimentId::DecaySuite => "decay-suite",
            ExperimentId::Annulus => "annulus",
            ExperimentId::Bracketing => "bracketing",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::Model1dLemmas => "interval model: ground state asymptotics and eigenvalue brackets",
            ExperimentId::QuasimodeOrder => "weighted 1D operator: quasimode residual order and ground state expansion",
            ExperimentId::Gap => "weighted 1D operator: second eigenvalue and deflated Rayleigh minimum",
            ExperimentId::EffectiveSandwich => "ellipse: collar spectra between effective boundary operators",
            ExperimentId::DiskTheoremMain => "disk: eigenvalue asymptotics per angular mode",
            ExperimentId::Weyl => "disk: counting function of negative eigenvalues",
            ExperimentId::SteklovCorrespondence => "disk: Robin eigenvalues against Steklov levels",
            ExperimentId::Rozenblum => "disk: pairing of Dirichlet-to-Neumann eigenvalues",
            ExperimentId::DecaySuite => "disk: exponential decay, Agmon and polynomial bounds",
            ExperimentId::Annulus => "annulus: exact spectrum against two-component collars",
            ExperimentId::Bracketing => "disk: Neumann and Dirichlet collars around the exact spectrum",
        }
    }

    /// Whether the experiment sweeps the semiclassical parameter.
    fn needs_h(self) -> bool {
        !matches!(self, ExperimentId::Model1dLemmas | ExperimentId::Rozenblum)
    }

    fn required(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ExperimentId::Model1dLemmas => (&["n_max"], &["ground_t5", "ground_t10", "runtime_s"]),
            ExperimentId::QuasimodeOrder => (
                &["beta", "rho", "long_weight_floor", "long_max_length", "long_h_max"],
                &["slope_target", "slope_tol", "bounded_ratio", "runtime_s"],
            ),
            ExperimentId::Gap => (&["rho"], &["gap_floor", "bounded_ratio", "runtime_s"]),
            ExperimentId::EffectiveSandwich => (&["effective_modes"], &["c_max", "runtime_s"]),
            ExperimentId::DiskTheoremMain => (&["mode_factor"], &["bounded_ratio", "runtime_s"]),
            ExperimentId::Weyl => (
                &["threshold_factor"],
                &["zero_count_dev", "shifted_c_max", "slope_target", "slope_tol", "runtime_s"],
            ),
            ExperimentId::SteklovCorrespondence => (
                &["lower_exponent", "mode_factor", "index_window_low"],
                &["rel_err", "dtn_level_rel", "runtime_s"],
            ),
            ExperimentId::Rozenblum => (&["k_max"], &["pair_gap", "lattice_dev", "runtime_s"]),
            ExperimentId::DecaySuite => (
                &["alpha", "M", "p", "p_alt", "epsilon", "negative_alpha_factor", "pointwise_alpha", "eps0", "pointwise_shift"],
                &["rate_min", "rate_max", "bounded_ratio", "growth_min", "collar_rate_rel", "runtime_s"],
            ),
            ExperimentId::Annulus => (&["inner_radius", "modes"], &["count_dev", "runtime_s"]),
            ExperimentId::Bracketing => (&["modes"], &["gap_over_h", "runtime_s"]),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Semiclassical parameters, decreasing geometrically with ratio at most 1/2.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<f64>,
    /// Interval lengths for the interval model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<f64>,
    /// Candidate constants for the effective operators.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_search: Vec<f64>,
    /// Helmholtz parameters for Dirichlet-to-Neumann spectra.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collar: Option<CollarDiscretization>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "OutputConfig::is_default")]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputConfig {
    /// Artifact directory; `results/<experiment>` when absent.
    pub dir: Option<PathBuf>,
}

impl OutputConfig {
    fn is_default(&self) -> bool {
        self.dir.is_none()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.experiment;
        if id.needs_h() {
            validate_h(&self.h)?;
        }
        if id == ExperimentId::Model1dLemmas && self.t_values.is_empty() {
            return Err(Error::Config("t_values must not be empty".into()));
        }
        if id == ExperimentId::Rozenblum && self.w_values.is_empty() {
            return Err(Error::Config("w_values must not be empty".into()));
        }
        if id == ExperimentId::EffectiveSandwich && self.c_search.is_empty() {
            return Err(Error::Config("c_search must not be empty".into()));
        }
        let (params, tols) = id.required();
        for k in params {
            if !self.params.contains_key(*k) {
                return Err(Error::Config(format!("missing parameter `{k}` for {id}")));
            }
        }
        for k in tols {
            if !self.tolerances.contains_key(*k) {
                return Err(Error::Config(format!("missing tolerance `{k}` for {id}")));
            }
        }
        for (k, v) in self.params.iter().chain(&self.tolerances) {
            if !v.is_finite() {
                return Err(Error::Config(format!("`{k}` must be finite")));
            }
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> Result<f64> {
        self.params.get(key).copied().ok_or_else(|| Error::Config(format!("missing parameter `{key}`")))
    }

    pub fn tol(&self, key: &str) -> Result<f64> {
        self.tolerances.get(key).copied().ok_or_else(|| Error::Config(format!("missing tolerance `{key}`")))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("results").join(self.experiment.name()))
    }

    fn collar(&self) -> CollarDiscretization {
        self.collar.clone().unwrap_or_default()
    }
}

fn validate_h(h: &[f64]) -> Result<()> {
    if h.is_empty() {
        return Err(Error::Config("h list must not be empty".into()));
    }
    if h.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Config("every h must lie in (0, 1)".into()));
    }
    let ratios: Vec<f64> = h.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|&r| r > 0.5 * (1.0 + 1e-12)) {
        return Err(Error::Config("h must decrease with ratio at most 1/2".into()));
    }
    if let Some(&r0) = ratios.first() {
        if ratios.iter().any(|&r| (r.ln() - r0.ln()).abs() > 1e-6) {
            return Err(Error::Config("h list must be geometric".into()));
        }
    }
    Ok(())
}

/// Reference configuration for each experiment.
pub fn default_config(id: ExperimentId) -> ExperimentConfig {
    let map = |kv: &[(&str, f64)]| kv.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
    let dyadic = |from: i32, to: i32| (from..=to).map(|k| 2f64.powi(-k)).collect::<Vec<_>>();
    let decades = |n: i32| (0..n).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect::<Vec<_>>();
    let base = ExperimentConfig {
        experiment: id,
        h: Vec::new(),
        t_values: Vec::new(),
        betas: Vec::new(),
        c_search: Vec::new(),
        w_values: Vec::new(),
        domain: None,
        collar: None,
        params: BTreeMap::new(),
        tolerances: BTreeMap::new(),
        output: OutputConfig::default(),
    };
    match id {
        ExperimentId::Model1dLemmas => ExperimentConfig {
            t_values: vec![2.0, 5.0, 10.0],
            params: map(&[("n_max", 10.0)]),
            tolerances: map(&[("ground_t5", 0.05), ("ground_t10", 0.001), ("runtime_s", 1.0)]),
            ..base
        },
        ExperimentId::QuasimodeOrder => ExperimentConfig {
            h: decades(7),
            betas: vec![-1.0, 1.0],
            params: map(&[("beta", 1.0), ("rho", 7.0 / 16.0), ("long_weight_floor", 0.5), ("long_max_length", 40.0), ("long_h_max", 1e-3)]),
            tolerances: map(&[("slope_target", 1.5), ("slope_tol", 0.15), ("bounded_ratio", 3.0), ("runtime_s", 10.0)]),
            ..base
        },
        ExperimentId::Gap => ExperimentConfig {
            h: decades(7),
            betas: vec![-1.0, 1.0],
            params: map(&[("rho", 7.0 / 16.0)]),
            tolerances: map(&[
                ("gap_floor", std::f64::consts::PI.powi(2) / 8.0),
                ("bounded_ratio", 3.0),
                ("runtime_s", 10.0),
            ]),
            ..base
        },
        ExperimentId::EffectiveSandwich => ExperimentConfig {
            h: vec![4e-3, 1e-3],
            c_search: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            domain: Some(Domain::Curve {
                curve: CurveDocument { kappa_fourier: Vec::new(), ..Curve::ellipse(2.0, 1.0).unwrap().to_document() },
            }),
            collar: Some(CollarDiscretization { delta: Some(0.225), fourier_modes: 64, elements: 48, ..Default::default() }),
            params: map(&[("effective_modes", 128.0)]),
            tolerances: map(&[("c_max", 8.0), ("runtime_s", 300.0)]),
            ..base
        },
        ExperimentId::DiskTheoremMain => ExperimentConfig {
            h: dyadic(6, 14),
            params: map(&[("mode_factor", 0.9)]),
            tolerances: map(&[("bounded_ratio", 3.0), ("runtime_s", 30.0)]),
            ..base
        },
        ExperimentId::Weyl => ExperimentConfig {
            h: dyadic(6, 14),
            params: map(&[("threshold_factor", -0.75)]),
            tolerances: map(&[
                ("zero_count_dev", 3.0),
                ("shifted_c_max", 1.0),
                ("slope_target", -0.5),
                ("slope_tol", 0.05),
                ("runtime_s", 30.0),
            ]),
            ..base
        },
        ExperimentId::SteklovCorrespondence => ExperimentConfig {
            h: vec![1e-4],
            params: map(&[("lower_exponent", -0.25), ("mode_factor", 0.9), ("index_window_low", 0.5)]),
            tolerances: map(&[("rel_err", 0.05), ("dtn_level_rel", 1e-8), ("runtime_s", 10.0)]),
            ..base
        },
        ExperimentId::Rozenblum => ExperimentConfig {
            w_values: vec![0.0, -1e2, -1e4],
            params: map(&[("k_max", 50.0)]),
            tolerances: map(&[("pair_gap", 0.0), ("lattice_dev", 1e-12), ("runtime_s", 10.0)]),
            ..base
        },
        ExperimentId::DecaySuite => ExperimentConfig {
            h: vec![1e-2, 1e-3, 1e-4],
            collar: Some(CollarDiscretization { delta: Some(0.45), keep_vectors: true, ..Default::default() }),
            params: map(&[
                ("alpha", 0.81),
                ("M", 0.81),
                ("p", 2.0),
                ("p_alt", 4.0),
                ("epsilon", 0.0),
                ("negative_alpha_factor", 1.2),
                ("pointwise_alpha", 0.8),
                ("eps0", 0.5),
                ("pointwise_shift", -0.2),
            ]),
            tolerances: map(&[
                ("rate_min", 0.9),
                ("rate_max", 1.05),
                ("bounded_ratio", 3.0),
                ("growth_min", 10.0),
                ("collar_rate_rel", 0.01),
                ("runtime_s", 60.0),
            ]),
            ..base
        },
        ExperimentId::Annulus => ExperimentConfig {
            h: vec![1.1e-2, 5.5e-3, 2.75e-3],
            collar: Some(CollarDiscretization { delta: Some(0.2), ..Default::default() }),
            params: map(&[("inner_radius", 0.5), ("modes", 10.0)]),
            tolerances: map(&[("count_dev", 4.0), ("runtime_s", 60.0)]),
            ..base
        },
        ExperimentId::Bracketing => ExperimentConfig {
            h: vec![1e-2, 4e-3],
            collar: Some(CollarDiscretization { delta: Some(0.45), fourier_modes: 32, elements: 400, ..Default::default() }),
            params: map(&[("modes", 10.0)]),
            tolerances: map(&[("gap_over_h", 1e-5), ("runtime_s", 120.0)]),
            ..base
        },
    }
}

/// One pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    #[serde(with = "nonfinite_as_null")]
    pub value: f64,
    #[serde(with = "nonfinite_as_null")]
    pub target: f64,
    #[serde(with = "nonfinite_as_null")]
    pub tol: f64,
    pub pass: bool,
}

impl Criterion {
    /// `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, target: limit, tol: 0.0, pass: value <= limit }
    }

    /// `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, target: limit, tol: 0.0, pass: value >= limit }
    }

    /// `|value - target| <= tol`.
    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, target, tol, pass: (value - target).abs() <= tol }
    }

    fn same_verdict(&self, other: &Criterion) -> bool {
        let eq = |a: f64, b: f64| a == b || (!a.is_finite() && !b.is_finite());
        self.name == other.name
            && self.pass == other.pass
            && eq(self.value, other.value)
            && eq(self.target, other.target)
            && eq(self.tol, other.tol)
    }
}

mod nonfinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Solver failure at one grid point; the run continues without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridError {
    pub index: usize,
    pub point: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentId,
    pub criteria: Vec<Criterion>,
    pub artifacts: Vec<String>,
    pub errors: Vec<GridError>,
    pub partial: bool,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn pass(&self) -> bool {
        !self.partial && self.criteria.iter().all(|c| c.pass)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

/// CSV tables keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableSet {
    tables: BTreeMap<String, String>,
}

impl TableSet {
    pub fn insert<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.tables.insert(name.into(), String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(())
    }

    pub fn rows<T: DeserializeOwned>(&self, name: &str) -> Result<Vec<T>> {
        let text = self.tables.get(name).ok_or_else(|| Error::Config(format!("table `{name}` is missing")))?;
        let mut r = csv::Reader::from_reader(text.as_bytes());
        Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
    }

    pub fn csv(&self, name: &str) -> Option<&str> {
        self.tables.get(name).map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    fn read_dir(dir: &Path, names: &[String]) -> Result<Self> {
        let mut tables = BTreeMap::new();
        for n in names {
            if let Some(stem) = n.strip_suffix(".csv") {
                tables.insert(stem.to_string(), std::fs::read_to_string(dir.join(n))?);
            }
        }
        Ok(Self { tables })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TimingRow {
    experiment: String,
    seconds: f64,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub tables: TableSet,
    /// Extra JSON artifacts `(file name, contents)`.
    pub json: Vec<(String, String)>,
}

pub(crate) struct Computed {
    pub tables: TableSet,
    pub json: Vec<(String, String)>,
    pub errors: Vec<GridError>,
}

impl Computed {
    fn new() -> Self {
        Self { tables: TableSet::default(), json: Vec::new(), errors: Vec::new() }
    }

    /// Keeps successful grid results in order and records failures.
    fn collect<T>(&mut self, points: &[String], results: Vec<Result<T>>) -> Vec<T> {
        let mut ok = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(v) => ok.push(v),
                Err(e) => self.errors.push(GridError { index: i, point: points[i].clone(), message: e.to_string() }),
            }
        }
        ok
    }
}

fn compute(cfg: &ExperimentConfig) -> Result<Computed> {
    match cfg.experiment {
        ExperimentId::Model1dLemmas => one_d::lemmas(cfg),
        ExperimentId::QuasimodeOrder => one_d::quasimode(cfg),
        ExperimentId::Gap => one_d::gap(cfg),
        ExperimentId::DiskTheoremMain => disk::theorem_main(cfg),
        ExperimentId::Weyl => disk::weyl(cfg),
        ExperimentId::Bracketing => disk::bracketing(cfg),
        ExperimentId::Annulus => disk::annulus(cfg),
        ExperimentId::EffectiveSandwich => boundary::sandwich(cfg),
        ExperimentId::SteklovCorrespondence => boundary::steklov(cfg),
        ExperimentId::Rozenblum => boundary::rozenblum(cfg),
        ExperimentId::DecaySuite => decay_suite::compute(cfg),
    }
}

/// Criteria as a pure function of the tables.
pub fn evaluate(cfg: &ExperimentConfig, tables: &TableSet) -> Result<Vec<Criterion>> {
    let mut out = match cfg.experiment {
        ExperimentId::Model1dLemmas => one_d::evaluate_lemmas(cfg, tables),
        ExperimentId::QuasimodeOrder => one_d::evaluate_quasimode(cfg, tables),
        ExperimentId::Gap => one_d::evaluate_gap(cfg, tables),
        ExperimentId::DiskTheoremMain => disk::evaluate_theorem_main(cfg, tables),
        ExperimentId::Weyl => disk::evaluate_weyl(cfg, tables),
        ExperimentId::Bracketing => disk::evaluate_bracketing(cfg, tables),
        ExperimentId::Annulus => disk::evaluate_annulus(cfg, tables),
        ExperimentId::EffectiveSandwich => boundary::evaluate_sandwich(cfg, tables),
        ExperimentId::SteklovCorrespondence => boundary::evaluate_steklov(cfg, tables),
        ExperimentId::Rozenblum => boundary::evaluate_rozenblum(cfg, tables),
        ExperimentId::DecaySuite => decay_suite::evaluate(cfg, tables),
    }?;
    let timing: Vec<TimingRow> = tables.rows(TIMING_TABLE)?;
    let seconds = timing.iter().map(|t| t.seconds).sum::<f64>();
    out.push(Criterion::at_most("runtime_s", seconds, cfg.tol("runtime_s")?));
    Ok(out)
}

/// Runs an experiment without touching the file system.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut computed = compute(cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    computed
        .tables
        .insert(TIMING_TABLE, &[TimingRow { experiment: cfg.experiment.name().into(), seconds }])?;
    let criteria = evaluate(cfg, &computed.tables)?;
    let mut artifacts: Vec<String> = computed.tables.names().map(|n| format!("{n}.csv")).collect();
    artifacts.extend(computed.json.iter().map(|(n, _)| n.clone()));
    let partial = !computed.errors.is_empty();
    Ok(Outcome {
        summary: Summary {
            experiment: cfg.experiment,
            criteria,
            artifacts,
            errors: computed.errors,
            partial,
            config: cfg.clone(),
        },
        tables: computed.tables,
        json: computed.json,
    })
}

/// Runs an experiment and writes tables, JSON artifacts and `summary.json`
/// into `dir` (the configured output directory when `None`).
pub fn run(cfg: &ExperimentConfig, dir: Option<&Path>) -> Result<(Outcome, PathBuf)> {
    let outcome = run_in_memory(cfg)?;
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&dir)?;
    for name in outcome.tables.names() {
        std::fs::write(dir.join(format!("{name}.csv")), outcome.tables.csv(name).unwrap())?;
    }
    for (name, text) in &outcome.json {
        std::fs::write(dir.join(name), text)?;
    }
    let path = dir.join(SUMMARY_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&outcome.summary)?)?;
    Ok((outcome, path))
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub recomputed: Vec<Criterion>,
    /// Names of criteria whose stored verdict differs from the recomputed one.
    pub mismatches: Vec<String>,
    pub summary: Summary,
}

impl CheckReport {
    pub fn consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recomputes every criterion of a written summary from the CSV files next to it.
pub fn check(summary_path: &Path) -> Result<CheckReport> {
    let summary: Summary = serde_json::from_str(&std::fs::read_to_string(summary_path)?)?;
    let dir = summary_path.parent().unwrap_or(Path::new("."));
    let tables = TableSet::read_dir(dir, &summary.artifacts)?;
    let recomputed = evaluate(&summary.config, &tables)?;
    let mut mismatches = Vec::new();
    for c in &recomputed {
        match summary.criterion(&c.name) {
            Some(s) if s.same_verdict(c) => {}
            _ => mismatches.push(c.name.clone()),
        }
    }
    for s in &summary.criteria {
        if !recomputed.iter().any(|c| c.name == s.name) {
            mismatches.push(s.name.clone());
        }
    }
    Ok(CheckReport { recomputed, mismatches, summary })
}

// Helpers shared by the experiment modules.

fn spread(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    crate::numerics::fit::Spread::of(values).ratio
}

/// Largest value, infinite when any entry is not finite or the list is empty.
fn max_strict(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut m = f64::NEG_INFINITY;
    let mut any = false;
    for v in values {
        any = true;
        if !v.is_finite() {
            return f64::INFINITY;
        }
        m = m.max(v);
    }
    if any {
        m
    } else {
        f64::INFINITY
    }
}

fn min_strict(values: impl IntoIterator<Item = f64>) -> f64 {
    -max_strict(values.into_iter().map(|v| -v))
}

fn points<T: fmt::Debug>(label: &str, items: &[T]) -> Vec<String> {
    items.iter().map(|i| format!("{label}={i:?}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        for id in ExperimentId::ALL {
            let cfg = default_config(id);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg, "{id}");
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
    }

    #[test]
    fn h_list_rules() {
        assert!(validate_h(&[]).is_err());
        assert!(validate_h(&[1e-2, 6e-3]).is_err());
        assert!(validate_h(&[1e-2, 5e-3, 1e-3]).is_err());
        validate_h(&[1e-2, 1e-3, 1e-4]).unwrap();
        validate_h(&[0.5]).unwrap();
        let mut cfg = default_config(ExperimentId::Weyl);
        cfg.h.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn missing_tolerance_rejected() {
        let mut cfg = default_config(ExperimentId::Gap);
        cfg.tolerances.remove("gap_floor");
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn criterion_json_handles_infinity() {
        let c = Criterion::at_most("x", f64::INFINITY, 1.0);
        let s = serde_json::to_string(&c).unwrap();
        let back: Criterion = serde_json::from_str(&s).unwrap();
        assert!(back.value.is_nan() && !back.pass);
        assert!(back.same_verdict(&c));
    }

    #[test]
    fn tables_roundtrip_nonfinite() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct R {
            a: f64,
            b: Option<f64>,
        }
        let rows = vec![R { a: f64::NAN, b: None }, R { a: 0.1 + 0.2, b: Some(f64::INFINITY) }];
        let mut t = TableSet::default();
        t.insert("x", &rows).unwrap();
        let back: Vec<R> = t.rows("x").unwrap();
        assert!(back[0].a.is_nan() && back[0].b.is_none());
        assert_eq!(back[1], rows[1]);
    }
}
