//! Spectra of `T_h = -h^2 Laplacian` with `du/dnu = h^{-1/2} u`: exact
//! separated solutions on the disk and annulus, and a boundary collar solver
//! for general smooth curves.

mod annulus;
mod collar;
mod disk;
mod profile;

pub use annulus::{annulus_mode_eigenvalues, annulus_spectrum};
pub use collar::{collar_spectrum, CollarComponent, CollarDiscretization, CollarReport};
pub use disk::{disk_count_below, disk_mode_eig, disk_mode_positive, disk_spectrum};
pub use profile::{mode_profile, EigenMode, ModeSource};

use crate::error::{invalid, Result};
use crate::geometry::{Curve, CurveDocument};
use crate::numerics::bessel::J1_PRIME_FIRST_ZERO;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Disk { radius: f64 },
    /// `{r0 < |x| < 1}`.
    Annulus { inner_radius: f64 },
    /// Interior of a closed curve.
    Curve { curve: CurveDocument },
}

impl Domain {
    pub fn id(&self) -> String {
        match self {
            Domain::Disk { radius } => format!("disk-r{radius}"),
            Domain::Annulus { inner_radius } => format!("annulus-r{inner_radius}"),
            Domain::Curve { curve } => {
                let params: Vec<String> = curve.params.iter().map(|(k, v)| format!("{k}{v}")).collect();
                format!("{}-{}", curve.kind, params.join("-"))
            }
        }
    }

    /// Total boundary length.
    pub fn boundary_length(&self) -> Result<f64> {
        Ok(match self {
            Domain::Disk { radius } => 2.0 * std::f64::consts::PI * radius,
            Domain::Annulus { inner_radius } => 2.0 * std::f64::consts::PI * (1.0 + inner_radius),
            Domain::Curve { curve } => 2.0 * curve.half_length,
        })
    }

    /// Second Neumann eigenvalue of the Laplacian when known in closed form.
    pub fn second_neumann(&self) -> Option<f64> {
        match self {
            Domain::Disk { radius } => Some((J1_PRIME_FIRST_ZERO / radius).powi(2)),
            _ => None,
        }
    }
}

/// Robin eigenvalue problem with a window `lambda < window` on the
/// eigenvalues of `T_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinProblem {
    pub h: f64,
    pub domain: Domain,
    pub window: f64,
}

impl RobinProblem {
    pub fn new(h: f64, domain: Domain, window: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid(format!("h must lie in (0, 1), got {h}")));
        }
        if !window.is_finite() {
            return Err(invalid("window must be finite"));
        }
        match &domain {
            Domain::Disk { radius } if !(*radius > 0.0) => return Err(invalid("disk radius must be positive")),
            Domain::Annulus { inner_radius } if !(*inner_radius > 0.0 && *inner_radius < 1.0) => {
                return Err(invalid("annulus inner radius must lie in (0, 1)"))
            }
            _ => {}
        }
        if let Some(l2) = domain.second_neumann() {
            if window >= h * h * l2 {
                return Err(invalid(format!(
                    "window {window} must stay below h^2 times the second Neumann eigenvalue ({})",
                    h * h * l2
                )));
            }
        }
        Ok(Self { h, domain, window })
    }

    pub fn disk(h: f64, radius: f64, window: f64) -> Result<Self> {
        Self::new(h, Domain::Disk { radius }, window)
    }

    pub fn annulus(h: f64, inner_radius: f64, window: f64) -> Result<Self> {
        Self::new(h, Domain::Annulus { inner_radius }, window)
    }

    pub fn curve(h: f64, curve: &Curve, window: f64) -> Result<Self> {
        Self::new(h, Domain::Curve { curve: curve.to_document() }, window)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BesselExact,
    Collar,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BesselExact => "bessel-exact",
            Method::Collar => "collar",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerBc {
    Dirichlet,
    Neumann,
}

impl fmt::Display for InnerBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InnerBc::Dirichlet => "dirichlet",
            InnerBc::Neumann => "neumann",
        })
    }
}

/// One eigenvalue with its tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub lambda: f64,
    /// Signed angular mode for separated solutions, dominant Fourier index
    /// for collar solutions.
    pub mode: i64,
    /// Boundary component (0 outer, 1 inner for the annulus).
    pub component: usize,
    pub method: Method,
    pub inner_bc: Option<InnerBc>,
    pub err_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub problem: RobinProblem,
    pub records: Vec<EigenRecord>,
    pub collar: Option<CollarReport>,
    /// No eigenvalue below the window can be missing.
    pub complete: bool,
}

impl SpectrumResult {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_below(&self, threshold: f64) -> usize {
        self.records.iter().filter(|r| r.lambda < threshold).count()
    }

    pub fn rows(&self, rho: Option<f64>) -> Vec<RobinRow> {
        let id = self.problem.domain.id();
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| RobinRow {
                domain_id: id.clone(),
                h: self.problem.h,
                rho: rho.unwrap_or(f64::NAN),
                n: i + 1,
                m_or_k: r.mode,
                lambda: r.lambda,
                method: r.method.to_string(),
                inner_bc: r.inner_bc.map_or_else(|| "none".to_string(), |b| b.to_string()),
                ns: self.collar.as_ref().map_or(0, |c| c.fourier_modes),
                nt: self.collar.as_ref().map_or(0, |c| c.elements),
                err_est: r.err_estimate,
            })
            .collect()
    }
}

pub(crate) fn sort_records(records: &mut [EigenRecord]) {
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.mode.cmp(&b.mode)));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinRow {
    pub domain_id: String,
    pub h: f64,
    pub rho: f64,
    pub n: usize,
    pub m_or_k: i64,
    pub lambda: f64,
    pub method: String,
    pub inner_bc: String,
    #[serde(rename = "Ns")]
    pub ns: usize,
    #[serde(rename = "Nt")]
    pub nt: usize,
    pub err_est: f64,
}
