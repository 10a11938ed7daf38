//! One-dimensional model operators in the normal variable: the half-line
//! Robin problem, the finite interval with a Dirichlet or Neumann cap, and
//! the weighted operator `-w^{-1} (w u')'` with `w = 1 - sqrt(h) beta tau`.
//!
//! The Robin condition at `tau = 0` is `u'(0) = -u(0)` in every case.

use crate::error::{invalid, Error, Result};
use crate::numerics::eigen::{generalized_dense, TridiagonalPencil};
use crate::numerics::quadrature::GaussLegendre;
use crate::numerics::roots::{bisect, bisect_newton};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// Condition imposed at the far end `tau = T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cap {
    Dirichlet,
    Neumann,
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cap::Dirichlet => "dirichlet",
            Cap::Neumann => "neumann",
        })
    }
}

/// Half-line spectrum: one eigenvalue `-1` below the essential spectrum `[0, inf)`.
pub const HALFLINE_EIGENVALUE: f64 = -1.0;

/// Normalised half-line ground state `sqrt(2) exp(-tau)`.
pub fn halfline_ground_state(tau: f64) -> f64 {
    SQRT_2 * (-tau).exp()
}

/// Ground state of the interval `(0, T)`, returned as `(lambda, lambda + 1)`;
/// the offset is computed without cancellation.
pub fn interval_ground(t: f64, cap: Cap) -> Result<(f64, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("interval length must be positive, got {t}")));
    }
    match cap {
        Cap::Dirichlet => {
            if t <= 1.0 {
                return Err(invalid(format!("no negative Dirichlet eigenvalue for T = {t} <= 1")));
            }
            let mu = bisect_newton(
                |m| (m * t).tanh() - m,
                |m| t / (m * t).cosh().powi(2) - 1.0,
                1e-12 / t,
                1.0,
                1e-16,
            )?;
            let e = (-2.0 * mu * t).exp();
            let one_minus_mu = 2.0 * e / (1.0 + e);
            Ok((-mu * mu, one_minus_mu * (1.0 + mu)))
        }
        Cap::Neumann => {
            let mu = bisect_newton(
                |m| m * (m * t).tanh() - 1.0,
                |m| (m * t).tanh() + m * t / (m * t).cosh().powi(2),
                1.0,
                1.0 / t.tanh().min(1.0) + 1.0,
                1e-16,
            )?;
            let e = (-2.0 * mu * t).exp();
            let mu_minus_one = 2.0 * e / (1.0 - e);
            Ok((-mu * mu, -mu_minus_one * (mu + 1.0)))
        }
    }
}

/// Positive eigenvalue `n >= 2` of the interval `(0, T)`.
pub fn interval_positive(t: f64, cap: Cap, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("positive eigenvalues are indexed from n = 2"));
    }
    let j = (n - 2) as f64;
    let ell = match cap {
        Cap::Dirichlet => bisect(
            |l| (l * t).sin() - l * (l * t).cos(),
            (j + 1.0) * PI / t,
            (j + 1.5) * PI / t,
            1e-16,
        )?,
        Cap::Neumann => bisect(
            |l| (l * t).cos() + l * (l * t).sin(),
            (j + 0.5) * PI / t,
            (j + 1.0) * PI / t,
            1e-16,
        )?,
    };
    Ok(ell * ell)
}

/// Eigenvalue `n >= 1` of the interval `(0, T)` from its transcendental equation.
pub fn interval_eigenvalue(t: f64, cap: Cap, n: usize) -> Result<f64> {
    match n {
        0 => Err(invalid("eigenvalues are indexed from n = 1")),
        1 => interval_ground(t, cap).map(|v| v.0),
        _ => interval_positive(t, cap, n),
    }
}

/// `(((2n-3) pi / 2T)^2, ((n-1) pi / T)^2)`, which contains the Neumann
/// eigenvalue `n`.
pub fn neumann_bracket(n: usize, t: f64) -> (f64, f64) {
    let k = n as f64;
    (((2.0 * k - 3.0) * PI / (2.0 * t)).powi(2), ((k - 1.0) * PI / t).powi(2))
}

/// `(((n-1) pi / T)^2, ((2n-1) pi / 2T)^2)`, which contains the Dirichlet
/// eigenvalue `n`.
pub fn dirichlet_bracket(n: usize, t: f64) -> (f64, f64) {
    let k = n as f64;
    (((k - 1.0) * PI / t).powi(2), ((2.0 * k - 1.0) * PI / (2.0 * t)).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub lambda: f64,
    pub err_estimate: f64,
}

/// Weighted operator `-w^{-1} (w u')'` on `(0, T)` in `L^2(w dtau)`, discretised
/// with linear finite elements on a uniform mesh.
#[derive(Debug, Clone)]
pub struct WeightedModel {
    pub h: f64,
    pub beta: f64,
    pub rho: Option<f64>,
    pub length: f64,
    pub cap: Cap,
    pub elements: usize,
}

impl WeightedModel {
    /// Interval length `T = h^{rho - 1/2}`.
    pub fn new(h: f64, beta: f64, rho: f64, cap: Cap) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(invalid(format!("rho must lie in (0, 1/2), got {rho}")));
        }
        let mut m = Self::with_length(h, beta, h.powf(rho - 0.5), cap)?;
        m.rho = Some(rho);
        Ok(m)
    }

    pub fn with_length(h: f64, beta: f64, length: f64, cap: Cap) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid(format!("h must lie in (0, 1), got {h}")));
        }
        if !(length > 0.0 && length.is_finite()) || !beta.is_finite() {
            return Err(invalid("interval length and beta must be finite, length positive"));
        }
        let eps = h.sqrt() * beta;
        if 1.0 - eps * length <= 0.0 {
            return Err(invalid(format!(
                "weight 1 - sqrt(h) beta tau vanishes on the interval (sqrt(h) beta T = {})",
                eps * length
            )));
        }
        let elements = ((200.0 * length).ceil() as usize).max(400);
        Ok(Self { h, beta, rho: None, length, cap, elements })
    }

    pub fn with_elements(mut self, elements: usize) -> Self {
        self.elements = elements.max(8);
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.h.sqrt() * self.beta
    }

    pub fn weight(&self, tau: f64) -> f64 {
        1.0 - self.epsilon() * tau
    }

    pub fn pencil(&self, elements: usize) -> TridiagonalPencil {
        let n_nodes = elements + 1;
        let dx = self.length / elements as f64;
        let mut ad = vec![0.0; n_nodes];
        let mut ao = vec![0.0; elements];
        let mut bd = vec![0.0; n_nodes];
        let mut bo = vec![0.0; elements];
        let g = GaussLegendre::new(3);
        for e in 0..elements {
            let x0 = e as f64 * dx;
            for (x, w) in g.on(x0, x0 + dx) {
                let wt = self.weight(x) * w;
                let p1 = (x - x0) / dx;
                let p0 = 1.0 - p1;
                let d2 = 1.0 / (dx * dx);
                ad[e] += wt * d2;
                ad[e + 1] += wt * d2;
                ao[e] -= wt * d2;
                bd[e] += wt * p0 * p0;
                bd[e + 1] += wt * p1 * p1;
                bo[e] += wt * p0 * p1;
            }
        }
        ad[0] -= self.weight(0.0);
        if self.cap == Cap::Dirichlet {
            ad.pop();
            bd.pop();
            ao.pop();
            bo.pop();
        }
        TridiagonalPencil { a_diag: ad, a_off: ao, b_diag: bd, b_off: bo }
    }

    /// Lowest `count` eigenvalues, Richardson extrapolated from `N` and `2N`
    /// elements.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<EigenEstimate>> {
        let coarse = self.pencil(self.elements).lowest(count)?;
        let fine = self.pencil(2 * self.elements).lowest(count)?;
        if coarse.len() < count {
            return Err(Error::Eigensolver(format!("only {} eigenvalues available", coarse.len())));
        }
        Ok(coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| EigenEstimate { lambda: f + (f - c) / 3.0, err_estimate: (f - c).abs() / 3.0 })
            .collect())
    }

    /// Nodal values of eigenvector `n` (1 based) on the `N`-element mesh,
    /// normalised in `L^2(w)` and positive at `tau = 0`.
    pub fn eigenvector(&self, n: usize) -> Result<Vec<f64>> {
        let p = self.pencil(self.elements);
        let lambda = p.eigenvalue(n - 1)?;
        let mut v = p.eigenvector(lambda)?;
        if v[0] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        if self.cap == Cap::Dirichlet {
            v.push(0.0);
        }
        Ok(v)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.length / self.elements as f64;
        (0..=self.elements).map(|i| i as f64 * dx).collect()
    }

    /// Approximate ground state energy `-1 - beta sqrt(h) - beta^2 h / 2`.
    pub fn mu_app(&self) -> f64 {
        -1.0 - self.epsilon() - 0.5 * self.beta * self.beta * self.h
    }

    /// `(1 + beta^2 h (tau^2/4 - 1/8)) u_1(tau)` with its first two derivatives.
    fn u_app(&self, tau: f64) -> [f64; 3] {
        let b2h = self.beta * self.beta * self.h;
        let p = 1.0 + b2h * (0.25 * tau * tau - 0.125);
        let dp = b2h * 0.5 * tau;
        let ddp = b2h * 0.5;
        let e = halfline_ground_state(tau);
        [p * e, (dp - p) * e, (ddp - 2.0 * dp + p) * e]
    }

    /// Residual of the cut-off quasimode `c_h chi(tau/T) u_app`.
    pub fn quasimode(&self) -> QuasimodeReport {
        let t = self.length;
        let eps = self.epsilon();
        let mu = self.mu_app();
        let g = GaussLegendre::new(10);
        let panels = ((40.0 * t).ceil() as usize).max(200);
        let f = |tau: f64| {
            let [c0, c1, c2] = cutoff_derivatives(tau / t);
            let [u0, u1, u2] = self.u_app(tau);
            let v0 = c0 * u0;
            let v1 = c1 / t * u0 + c0 * u1;
            let v2 = c2 / (t * t) * u0 + 2.0 * c1 / t * u1 + c0 * u2;
            let hv = -v2 + eps / (1.0 - eps * tau) * v1;
            (v0, hv - mu * v0)
        };
        let norm2 = g.composite(|x| f(x).0.powi(2) * self.weight(x), 0.0, t, panels);
        let res2 = g.composite(|x| f(x).1.powi(2) * self.weight(x), 0.0, t, panels);
        let c_h = 1.0 / norm2.sqrt();
        QuasimodeReport { mu_app: mu, c_h, residual_norm: c_h * res2.sqrt() }
    }

    /// Nodal values of the normalised quasimode on the `elements` mesh.
    pub fn quasimode_nodes(&self, elements: usize) -> Vec<f64> {
        let c = self.quasimode().c_h;
        let dx = self.length / elements as f64;
        (0..=elements)
            .map(|i| {
                let tau = i as f64 * dx;
                c * cutoff(tau / self.length) * self.u_app(tau)[0]
            })
            .collect()
    }

    /// Minimum of the Rayleigh quotient over discrete functions orthogonal in
    /// `L^2(w)` to the quasimode, on a mesh of `elements` elements.
    pub fn deflated_minimum(&self, elements: usize) -> Result<f64> {
        let p = self.pencil(elements);
        let n = p.dim();
        let tri = |d: &[f64], o: &[f64]| {
            DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => d[i],
                1 => o[i.min(j)],
                _ => 0.0,
            })
        };
        let a = tri(&p.a_diag, &p.a_off);
        let b = tri(&p.b_diag, &p.b_off);
        let mut u = self.quasimode_nodes(elements);
        u.truncate(n);
        let l = b
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Eigensolver("mass matrix not definite".into()))?
            .l();
        let mut c = a;
        l.solve_lower_triangular_mut(&mut c);
        let mut c = c.transpose();
        l.solve_lower_triangular_mut(&mut c);
        let c = 0.5 * (&c + c.transpose());
        let u_vec = nalgebra::DVector::from_vec(u);
        let mut y = l.transpose() * u_vec;
        let ny = y.norm();
        y /= ny;
        // Householder reflection sending y to e_1.
        let mut v = y.clone();
        v[0] = y[0] + if y[0] >= 0.0 { 1.0 } else { -1.0 };
        let vv = v.dot(&v);
        let hmat = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
        let d = &hmat * c * &hmat;
        let sub = d.view((1, 1), (n - 1, n - 1)).into_owned();
        let (vals, _) = generalized_dense(&sub, &DMatrix::identity(n - 1, n - 1))?;
        Ok(vals[0])
    }
}

/// Normalisation, energy and `L^2(w)` residual of the cut-off quasimode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeReport {
    pub mu_app: f64,
    pub c_h: f64,
    pub residual_norm: f64,
}

/// Even cut-off equal to 1 on `|x| <= 1/2`, vanishing for `|x| >= 1`, with a
/// quintic smoothstep transition.
pub fn cutoff(x: f64) -> f64 {
    cutoff_derivatives(x)[0]
}

/// `chi(x), chi'(x), chi''(x)` for `x >= 0`.
pub fn cutoff_derivatives(x: f64) -> [f64; 3] {
    let x = x.abs();
    if x <= 0.5 {
        return [1.0, 0.0, 0.0];
    }
    if x >= 1.0 {
        return [0.0, 0.0, 0.0];
    }
    let y = (1.0 - x) / 0.5;
    let v = y * y * y * (10.0 - 15.0 * y + 6.0 * y * y);
    let dv = 30.0 * y * y * (1.0 - y) * (1.0 - y);
    let ddv = 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
    // dy/dx = -2
    [v, -2.0 * dv, 4.0 * ddv]
}

/// One row of the model operator table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model1dRow {
    pub t_or_h: f64,
    pub beta: f64,
    pub rho: f64,
    pub cap: Cap,
    pub n: usize,
    pub lambda: f64,
    pub err_estimate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_equations() {
        for t in [2.0, 5.0, 10.0] {
            let (l, off) = interval_ground(t, Cap::Dirichlet).unwrap();
            let mu = (-l).sqrt();
            assert!(((mu * t).tanh() - mu).abs() < 1e-15);
            assert!((l + 1.0 - off).abs() < 1e-14);
            let (l, off) = interval_ground(t, Cap::Neumann).unwrap();
            let mu = (-l).sqrt();
            assert!((mu * (mu * t).tanh() - 1.0).abs() < 1e-15);
            assert!(off < 0.0);
        }
        assert!(interval_ground(0.9, Cap::Dirichlet).is_err());
    }

    #[test]
    fn finite_elements_match_transcendental_roots() {
        for cap in [Cap::Dirichlet, Cap::Neumann] {
            let m = WeightedModel::with_length(0.01, 0.0, 5.0, cap).unwrap();
            let fe = m.eigenvalues(6).unwrap();
            for (k, e) in fe.iter().enumerate() {
                let exact = interval_eigenvalue(5.0, cap, k + 1).unwrap();
                assert!((e.lambda - exact).abs() < 1e-9 * exact.abs().max(1.0), "{cap} {k}: {} {exact}", e.lambda);
            }
        }
    }

    #[test]
    fn neumann_second_eigenvalue_at_t5() {
        // Root of cot(5 l) = -l in (pi/10, pi/5).
        let l2 = interval_positive(5.0, Cap::Neumann, 2).unwrap();
        assert!((l2 - 0.150716).abs() < 1e-6, "{l2}");
    }

    #[test]
    fn cutoff_is_smooth() {
        let e = 1e-6;
        for x in [0.55, 0.7, 0.9, 0.999] {
            let [_, d, dd] = cutoff_derivatives(x);
            assert!(((cutoff(x + e) - cutoff(x - e)) / (2.0 * e) - d).abs() < 1e-6);
            let [_, d1, _] = cutoff_derivatives(x + e);
            let [_, d0, _] = cutoff_derivatives(x - e);
            assert!(((d1 - d0) / (2.0 * e) - dd).abs() < 1e-4);
        }
        assert_eq!(cutoff_derivatives(0.5)[1], 0.0);
        assert!(cutoff_derivatives(1.0 - 1e-9)[0] < 1e-20);
    }

    #[test]
    fn quasimode_identity_without_cutoff_effect() {
        // Long interval, beta = 0: the quasimode is the exact half-line state.
        let m = WeightedModel::with_length(0.01, 0.0, 60.0, Cap::Neumann).unwrap();
        let q = m.quasimode();
        assert!(q.residual_norm < 1e-10, "{}", q.residual_norm);
        assert!((q.c_h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halfline_state_is_normalised() {
        let g = GaussLegendre::new(20);
        let n = g.composite(|t| halfline_ground_state(t).powi(2), 0.0, 40.0, 40);
        assert!((n - 1.0).abs() < 1e-14);
    }
}
