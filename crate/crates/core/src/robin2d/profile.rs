use super::collar::CollarVector;
use super::{Domain, Method, SpectrumResult};
use crate::error::{invalid, Result};
use crate::numerics::bessel::{i_log_derivative, ln_i, J0_FIRST_ZERO};

/// Eigenfunction normalised by `||u||_{L^2(boundary)} = 1`.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub lambda: f64,
    pub h: f64,
    pub source: ModeSource,
}

#[derive(Debug, Clone)]
pub enum ModeSource {
    /// `I_m(xi r) e^{i m theta} / (I_m(xi R) sqrt(2 pi R))` on the disk of radius `R`.
    Radial { radius: f64, m: u32, xi: f64 },
    /// Collar eigenvector of width `delta`.
    Collar { delta: f64, vector: CollarVector },
}

impl EigenMode {
    pub fn disk(h: f64, radius: f64, m: u32, lambda: f64) -> Result<Self> {
        if !(lambda < 0.0) {
            return Err(invalid("radial profiles are available for negative eigenvalues"));
        }
        Ok(Self { lambda, h, source: ModeSource::Radial { radius, m, xi: (-lambda).sqrt() / h } })
    }

    pub fn w(&self) -> f64 {
        self.lambda / (self.h * self.h)
    }

    /// Largest distance from the boundary covered by the mode data.
    pub fn depth(&self) -> f64 {
        match &self.source {
            ModeSource::Radial { radius, .. } => *radius,
            ModeSource::Collar { delta, .. } => *delta,
        }
    }

    pub fn boundary_length(&self) -> f64 {
        match &self.source {
            ModeSource::Radial { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            ModeSource::Collar { vector, .. } => 2.0 * vector.half_length,
        }
    }

    /// First Dirichlet eigenvalue of the Laplacian on the domain, when known.
    pub fn dirichlet_floor(&self) -> Option<f64> {
        match &self.source {
            ModeSource::Radial { radius, .. } => Some((J0_FIRST_ZERO / radius).powi(2)),
            ModeSource::Collar { .. } => None,
        }
    }

    /// `ln` of `||u(., t)||_{L^2(ds)} / ||u(., 0)||_{L^2(ds)}`, the boundary
    /// arc-length measure used at every depth.
    pub fn ln_ray_profile(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.depth()) {
            return Err(invalid(format!("distance {t} outside [0, {}]", self.depth())));
        }
        match &self.source {
            ModeSource::Radial { radius, m, xi } => {
                Ok(ln_i(*m, xi * (radius - t)) - ln_i(*m, xi * radius))
            }
            ModeSource::Collar { vector, .. } => {
                let norms = vector.ray_norms();
                let dt = vector.t_nodes[1] - vector.t_nodes[0];
                let x = t / dt;
                let i = (x.floor() as usize).min(norms.len() - 2);
                let f = x - i as f64;
                let v = norms[i] * (1.0 - f) + norms[i + 1] * f;
                Ok((v / norms[0]).ln())
            }
        }
    }

    /// `|u|` along one inward normal ray (the ray through `s = 0` for collar modes).
    pub fn ray_value(&self, t: f64) -> Result<f64> {
        match &self.source {
            ModeSource::Radial { radius, m, xi } => {
                let r = radius - t;
                Ok((ln_i(*m, xi * r) - ln_i(*m, xi * radius)).exp() / (2.0 * std::f64::consts::PI * radius).sqrt())
            }
            ModeSource::Collar { .. } => Ok(self.ln_ray_profile(t)?.exp() / self.boundary_length().sqrt()),
        }
    }

    /// Radial factor `f(r) = I_m(xi r)/I_m(xi R)` and `f'(r)` for radial modes.
    pub fn radial_factor(&self, r: f64) -> Option<(f64, f64)> {
        match &self.source {
            ModeSource::Radial { radius, m, xi } => {
                let f = (ln_i(*m, xi * r) - ln_i(*m, xi * radius)).exp();
                let df = if r > 0.0 { f * i_log_derivative(*m, xi * r) / r } else { 0.0 };
                Some((f, df))
            }
            ModeSource::Collar { .. } => None,
        }
    }

    /// Profile samples `(t, |u|, ln|u|)` along the ray.
    pub fn profile_rows(&self, ts: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
        ts.iter()
            .map(|&t| {
                let v = self.ray_value(t)?;
                Ok((t, v, v.ln()))
            })
            .collect()
    }
}

/// Eigenfunction for record `index` (0 based) of a spectrum.
pub fn mode_profile(result: &SpectrumResult, index: usize) -> Result<EigenMode> {
    let rec = result
        .records
        .get(index)
        .ok_or_else(|| invalid(format!("mode index {index} out of range ({} records)", result.len())))?;
    let h = result.problem.h;
    match rec.method {
        Method::BesselExact => match result.problem.domain {
            Domain::Disk { radius } => EigenMode::disk(h, radius, rec.mode.unsigned_abs() as u32, rec.lambda),
            _ => Err(invalid("closed-form profiles are provided for the disk")),
        },
        Method::Collar => {
            let report = result.collar.as_ref().ok_or_else(|| invalid("collar record without report"))?;
            let vector = report
                .vectors
                .get(index)
                .ok_or_else(|| invalid("collar eigenvectors were not kept; set keep_vectors"))?
                .clone();
            Ok(EigenMode { lambda: rec.lambda, h, source: ModeSource::Collar { delta: report.delta, vector } })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robin2d::{disk_spectrum, RobinProblem};

    #[test]
    fn disk_ground_profile() {
        let h = 1e-3;
        let s = disk_spectrum(&RobinProblem::disk(h, 1.0, 0.0).unwrap()).unwrap();
        let mode = mode_profile(&s, 0).unwrap();
        assert!(mode.ln_ray_profile(0.0).unwrap().abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let v = mode.ray_value(i as f64 * 0.02).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let r = mode.ln_ray_profile(5.0 * h.sqrt()).unwrap();
        assert!(r < -4.0);
        // Boundary norm: |u|^2 integrated over the circle.
        let b = mode.ray_value(0.0).unwrap();
        assert!((b * b * mode.boundary_length() - 1.0).abs() < 1e-10);
        assert!(mode_profile(&s, 1000).is_err());
    }
}
