//! Boundary collar `{0 <= t < delta}` in tubular coordinates. The quadratic
//! form `h^2 int (|d_t psi|^2 + a^{-2} |d_s psi|^2) a - h^{3/2} int |psi(s,0)|^2`
//! with `a = 1 - t kappa(s)` is discretised by a real Fourier basis in `s`
//! and linear elements in `t`; the inner edge `t = delta` carries a
//! Dirichlet or Neumann condition.

use super::{sort_records, Domain, EigenRecord, InnerBc, Method, RobinProblem, SpectrumResult};
use crate::error::{invalid, Error, Result};
use crate::geometry::Curve;
use crate::numerics::eigen::{block_eigen_below, BlockTridiagonal, TridiagonalPencil};
use crate::numerics::fourier::{basis_wavenumber, real_basis_len, real_gram, FourierSeries};
use crate::numerics::quadrature::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SIZE_CAP: usize = 200_000;
const GAUSS_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollarDiscretization {
    pub rho: f64,
    /// Collar width; `h^rho` when absent.
    pub delta: Option<f64>,
    /// Fourier modes `|k| <= Ns`.
    pub fourier_modes: usize,
    /// Linear elements across the collar.
    pub elements: usize,
    pub inner_bc: InnerBc,
    /// Extrapolate from `Nt` and `2 Nt` elements.
    pub richardson: bool,
    /// Fail when the extrapolation estimate exceeds this relative tolerance.
    pub tolerance: Option<f64>,
    pub keep_vectors: bool,
}

impl Default for CollarDiscretization {
    fn default() -> Self {
        Self {
            rho: 7.0 / 16.0,
            delta: None,
            fourier_modes: 32,
            elements: 400,
            inner_bc: InnerBc::Dirichlet,
            richardson: true,
            tolerance: None,
            keep_vectors: false,
        }
    }
}

impl CollarDiscretization {
    pub fn width(&self, h: f64) -> f64 {
        self.delta.unwrap_or_else(|| h.powf(self.rho))
    }

    pub fn with_bc(&self, bc: InnerBc) -> Self {
        Self { inner_bc: bc, ..self.clone() }
    }
}

/// One boundary component seen from the domain: arc length half-period and
/// curvature with respect to the outward normal of the domain.
#[derive(Debug, Clone)]
pub struct CollarComponent {
    pub half_length: f64,
    pub kappa_samples: Vec<f64>,
    pub kappa: FourierSeries,
    pub constant: Option<f64>,
}

impl CollarComponent {
    pub fn from_curve(curve: &Curve) -> Self {
        let constant = curve.is_constant_curvature().then(|| curve.kappa_series().coeff(0).re);
        Self {
            half_length: curve.half_length(),
            kappa_samples: curve.curvature_samples().to_vec(),
            kappa: curve.kappa_series().clone(),
            constant,
        }
    }

    /// Inner circle of an annulus: curvature `-1/r0`.
    pub fn inner_circle(r0: f64) -> Self {
        let samples = vec![-1.0 / r0; 256];
        Self {
            half_length: PI * r0,
            kappa: FourierSeries::from_samples(&samples),
            kappa_samples: samples,
            constant: Some(-1.0 / r0),
        }
    }

    fn kappa_abs_max(&self) -> f64 {
        self.kappa_samples.iter().map(|k| k.abs()).fold(0.0, f64::max)
    }
}

/// Discretisation record attached to collar spectra.
#[derive(Debug, Clone)]
pub struct CollarReport {
    pub delta: f64,
    pub rho: f64,
    pub fourier_modes: usize,
    pub elements: usize,
    pub inner_bc: InnerBc,
    pub richardson: bool,
    pub max_err_estimate: f64,
    /// Largest share of eigenvector energy in the two highest Fourier modes.
    pub fourier_tail: f64,
    pub vectors: Vec<CollarVector>,
}

/// Eigenvector on the collar grid: `coeffs[(node, p)]` multiplies real basis
/// function `p` at node `t_nodes[node]`.
#[derive(Debug, Clone)]
pub struct CollarVector {
    pub component: usize,
    pub half_length: f64,
    pub t_nodes: Vec<f64>,
    pub coeffs: DMatrix<f64>,
    pub kappa_samples: Vec<f64>,
    pub fourier_modes: usize,
}

struct Solved {
    values: Vec<(f64, i64, usize)>,
    vectors: Vec<CollarVector>,
    tail: f64,
    complete: bool,
}

fn element_rule() -> GaussLegendre {
    GaussLegendre::new(GAUSS_POINTS)
}

fn mode_pencil(kappa: f64, half_length: f64, k: usize, h: f64, delta: f64, elements: usize, bc: InnerBc) -> TridiagonalPencil {
    let n = elements + 1;
    let dt = delta / elements as f64;
    let q2 = (PI * k as f64 / half_length).powi(2);
    let (mut ad, mut ao, mut bd, mut bo) = (vec![0.0; n], vec![0.0; elements], vec![0.0; n], vec![0.0; elements]);
    let g = element_rule();
    for e in 0..elements {
        let t0 = e as f64 * dt;
        for (t, w) in g.on(t0, t0 + dt) {
            let a = 1.0 - t * kappa;
            let p1 = (t - t0) / dt;
            let p0 = 1.0 - p1;
            let d = 1.0 / (dt * dt);
            let h2 = h * h;
            ad[e] += w * h2 * (a * d + q2 / a * p0 * p0);
            ad[e + 1] += w * h2 * (a * d + q2 / a * p1 * p1);
            ao[e] += w * h2 * (-a * d + q2 / a * p0 * p1);
            bd[e] += w * a * p0 * p0;
            bd[e + 1] += w * a * p1 * p1;
            bo[e] += w * a * p0 * p1;
        }
    }
    ad[0] -= h.powf(1.5);
    if bc == InnerBc::Dirichlet {
        ad.pop();
        bd.pop();
        ao.pop();
        bo.pop();
    }
    TridiagonalPencil { a_diag: ad, a_off: ao, b_diag: bd, b_off: bo }
}

fn t_nodes(delta: f64, elements: usize) -> Vec<f64> {
    (0..=elements).map(|i| delta * i as f64 / elements as f64).collect()
}

fn solve_constant(
    comp: &CollarComponent,
    index: usize,
    kappa: f64,
    h: f64,
    window: f64,
    disc: &CollarDiscretization,
    elements: usize,
    delta: f64,
) -> Result<Solved> {
    let modes: Vec<usize> = (0..=disc.fourier_modes).collect();
    let per_mode = crate::par::map(&modes, |&k| -> Result<Vec<(f64, Option<Vec<f64>>)>> {
        let p = mode_pencil(kappa, comp.half_length, k, h, delta, elements, disc.inner_bc);
        p.eigenvalues_below(window)?
            .into_iter()
            .map(|l| {
                let v = if disc.keep_vectors { Some(p.eigenvector(l)?) } else { None };
                Ok((l, v))
            })
            .collect()
    });
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    let mut complete = true;
    let basis = real_basis_len(disc.fourier_modes);
    let nodes = t_nodes(delta, elements);
    for (k, res) in per_mode.into_iter().enumerate() {
        let list = res?;
        if k == disc.fourier_modes && !list.is_empty() {
            complete = false;
        }
        for (lambda, vec) in list {
            let variants: &[usize] = if k == 0 { &[0] } else { &[2 * k - 1, 2 * k] };
            for (j, &p) in variants.iter().enumerate() {
                let tag = if j == 0 { k as i64 } else { -(k as i64) };
                values.push((lambda, tag, index));
                if let Some(v) = &vec {
                    let mut c = DMatrix::zeros(elements + 1, basis);
                    for (i, x) in v.iter().enumerate() {
                        c[(i, p)] = *x;
                    }
                    vectors.push(CollarVector {
                        component: index,
                        half_length: comp.half_length,
                        t_nodes: nodes.clone(),
                        coeffs: c,
                        kappa_samples: comp.kappa_samples.clone(),
                        fourier_modes: disc.fourier_modes,
                    });
                }
            }
        }
    }
    Ok(Solved { values, vectors, tail: 0.0, complete })
}

fn assemble_general(
    comp: &CollarComponent,
    h: f64,
    delta: f64,
    ns: usize,
    elements: usize,
    bc: InnerBc,
) -> (BlockTridiagonal, BlockTridiagonal) {
    let nb = real_basis_len(ns);
    let l = comp.half_length;
    let g_kappa = real_gram(&comp.kappa, ns, l, false);
    let id = DMatrix::<f64>::identity(nb, nb);
    let blocks = if bc == InnerBc::Dirichlet { elements } else { elements + 1 };
    let mut a = BlockTridiagonal::zeros(blocks, nb);
    let mut b = BlockTridiagonal::zeros(blocks, nb);
    let dt = delta / elements as f64;
    let rule = element_rule();
    let h2 = h * h;
    for e in 0..elements {
        let t0 = e as f64 * dt;
        // Scalars of the parts linear in t.
        let (mut m0, mut m1) = ([0.0; 3], [0.0; 3]);
        let (mut s0, mut s1) = ([0.0; 3], [0.0; 3]);
        let mut inv = [DMatrix::zeros(nb, nb), DMatrix::zeros(nb, nb), DMatrix::zeros(nb, nb)];
        for (t, w) in rule.on(t0, t0 + dt) {
            let p1 = (t - t0) / dt;
            let p0 = 1.0 - p1;
            let pp = [p0 * p0, p0 * p1, p1 * p1];
            let dd = [1.0 / (dt * dt), -1.0 / (dt * dt), 1.0 / (dt * dt)];
            for j in 0..3 {
                m0[j] += w * pp[j];
                m1[j] += w * t * pp[j];
                s0[j] += w * dd[j];
                s1[j] += w * t * dd[j];
            }
            let samples: Vec<f64> = comp.kappa_samples.iter().map(|k| 1.0 / (1.0 - t * k)).collect();
            let sg = real_gram(&FourierSeries::from_samples(&samples), ns, l, true);
            for j in 0..3 {
                inv[j] += &sg * (w * pp[j]);
            }
        }
        let lin = |c0: f64, c1: f64| &id * c0 - &g_kappa * c1;
        let stiff: Vec<DMatrix<f64>> = (0..3).map(|j| (lin(s0[j], s1[j]) + &inv[j]) * h2).collect();
        let mass: Vec<DMatrix<f64>> = (0..3).map(|j| lin(m0[j], m1[j])).collect();
        if e < blocks {
            a.diag[e] += &stiff[0];
            b.diag[e] += &mass[0];
        }
        if e + 1 < blocks {
            a.diag[e + 1] += &stiff[2];
            b.diag[e + 1] += &mass[2];
            a.off[e] += &stiff[1];
            b.off[e] += &mass[1];
        }
    }
    a.diag[0] -= &id * h.powf(1.5);
    (a, b)
}

fn solve_general(
    comp: &CollarComponent,
    index: usize,
    h: f64,
    window: f64,
    disc: &CollarDiscretization,
    elements: usize,
    delta: f64,
) -> Result<Solved> {
    let ns = disc.fourier_modes;
    let nb = real_basis_len(ns);
    let (a, b) = assemble_general(comp, h, delta, ns, elements, disc.inner_bc);
    let sigma = -1.2 * h * (1.0 + h.sqrt() * comp.kappa_abs_max()).powi(2);
    let eig = block_eigen_below(&a, &b, window, sigma, 1e-11)?;
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    let mut tail: f64 = 0.0;
    let nodes = t_nodes(delta, elements);
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let blocks = v.len() / nb;
        let mut c = DMatrix::zeros(elements + 1, nb);
        for i in 0..blocks {
            for p in 0..nb {
                c[(i, p)] = v[i * nb + p];
            }
        }
        let total: f64 = c.iter().map(|x| x * x).sum();
        let high: f64 = (0..nb)
            .filter(|&p| basis_wavenumber(p) + 1 >= ns)
            .map(|p| c.column(p).iter().map(|x| x * x).sum::<f64>())
            .sum();
        tail = tail.max(high / total);
        let row0 = c.row(0);
        let dominant = (0..nb).max_by(|&x, &y| row0[x].abs().total_cmp(&row0[y].abs())).unwrap_or(0);
        values.push((*lambda, basis_wavenumber(dominant) as i64, index));
        if disc.keep_vectors {
            vectors.push(CollarVector {
                component: index,
                half_length: comp.half_length,
                t_nodes: nodes.clone(),
                coeffs: c,
                kappa_samples: comp.kappa_samples.clone(),
                fourier_modes: ns,
            });
        }
    }
    Ok(Solved { values, vectors, tail, complete: tail < 1e-8 })
}

fn solve_component(
    comp: &CollarComponent,
    index: usize,
    h: f64,
    window: f64,
    disc: &CollarDiscretization,
    elements: usize,
    delta: f64,
) -> Result<Solved> {
    match comp.constant {
        Some(k) => solve_constant(comp, index, k, h, window, disc, elements, delta),
        None => {
            let size = real_basis_len(disc.fourier_modes) * (elements + 1);
            if size > SIZE_CAP {
                return Err(Error::SizeCap { size, cap: SIZE_CAP });
            }
            solve_general(comp, index, h, window, disc, elements, delta)
        }
    }
}

/// Collar eigenvalues below the window for the components of a domain.
pub fn collar_components_spectrum(
    components: &[CollarComponent],
    h: f64,
    window: f64,
    disc: &CollarDiscretization,
) -> Result<(Vec<EigenRecord>, CollarReport, bool)> {
    let delta = disc.width(h);
    if !(delta > 0.0) || disc.elements < 2 || disc.fourier_modes == 0 {
        return Err(invalid("collar needs delta > 0, Nt >= 2 and Ns >= 1"));
    }
    for c in components {
        if delta * c.kappa_abs_max() >= 0.5 {
            return Err(invalid(format!(
                "collar width {delta} violates delta * max|kappa| < 1/2 (max|kappa| = {})",
                c.kappa_abs_max()
            )));
        }
    }
    let mut records = Vec::new();
    let mut vectors = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let mut complete = true;
    for (index, comp) in components.iter().enumerate() {
        let coarse = solve_component(comp, index, h, window, &CollarDiscretization { keep_vectors: false, ..disc.clone() }, disc.elements, delta)?;
        let (vals, solved) = if disc.richardson {
            let fine = solve_component(comp, index, h, window, disc, 2 * disc.elements, delta)?;
            let mut c = coarse.values.clone();
            let mut f = fine.values.clone();
            c.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            f.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let vals: Vec<(f64, i64, f64)> = f
                .iter()
                .enumerate()
                .map(|(i, &(l2, tag, _))| match c.get(i) {
                    Some(&(l1, _, _)) => (l2 + (l2 - l1) / 3.0, tag, (l2 - l1).abs() / 3.0),
                    None => (l2, tag, f64::NAN),
                })
                .collect();
            (vals, fine)
        } else {
            let vals = coarse.values.iter().map(|&(l, tag, _)| (l, tag, f64::NAN)).collect();
            (vals, coarse)
        };
        complete &= solved.complete;
        tail = tail.max(solved.tail);
        vectors.extend(solved.vectors);
        for (lambda, tag, err) in vals {
            if err.is_finite() {
                max_err = max_err.max(err / lambda.abs());
            }
            if let (Some(tol), true) = (disc.tolerance, err.is_finite()) {
                if err > tol * lambda.abs() {
                    return Err(Error::Resolution { estimate: err / lambda.abs(), tolerance: tol });
                }
            }
            records.push(EigenRecord {
                lambda,
                mode: tag,
                component: index,
                method: Method::Collar,
                inner_bc: Some(disc.inner_bc),
                err_estimate: err,
            });
        }
    }
    let report = CollarReport {
        delta,
        rho: disc.rho,
        fourier_modes: disc.fourier_modes,
        elements: disc.elements,
        inner_bc: disc.inner_bc,
        richardson: disc.richardson,
        max_err_estimate: max_err,
        fourier_tail: tail,
        vectors,
    };
    Ok((records, report, complete))
}

/// Collar spectrum for a disk, annulus or curve domain.
pub fn collar_spectrum(prob: &RobinProblem, disc: &CollarDiscretization) -> Result<SpectrumResult> {
    let components = match &prob.domain {
        Domain::Disk { radius } => vec![CollarComponent::from_curve(&Curve::circle(*radius)?)],
        Domain::Annulus { inner_radius } => {
            if disc.width(prob.h) >= 0.5 * (1.0 - inner_radius) {
                return Err(invalid("collar width exceeds half the annulus thickness"));
            }
            vec![
                CollarComponent::from_curve(&Curve::circle(1.0)?),
                CollarComponent::inner_circle(*inner_radius),
            ]
        }
        Domain::Curve { curve } => vec![CollarComponent::from_curve(&Curve::from_document(curve)?)],
    };
    let (mut records, report, complete) = collar_components_spectrum(&components, prob.h, prob.window, disc)?;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| records[i].lambda.total_cmp(&records[j].lambda).then(records[i].mode.cmp(&records[j].mode)));
    let mut report = report;
    if report.vectors.len() == records.len() {
        let vecs = std::mem::take(&mut report.vectors);
        report.vectors = order.iter().map(|&i| vecs[i].clone()).collect();
    }
    sort_records(&mut records);
    Ok(SpectrumResult { problem: prob.clone(), records, collar: Some(report), complete })
}

impl CollarVector {
    /// `psi(s_j, t_i)` on `samples` equispaced points `s_j = 2L j / samples`.
    pub fn sample(&self, samples: usize) -> DMatrix<f64> {
        let nb = self.coeffs.ncols();
        let basis = DMatrix::from_fn(nb, samples, |p, j| {
            let s = 2.0 * self.half_length * j as f64 / samples as f64;
            crate::numerics::fourier::real_basis_eval(p, s, self.half_length)
        });
        &self.coeffs * basis
    }

    /// `L^2` norm in `s` at each node, by Parseval.
    pub fn ray_norms(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.coeffs.nrows(),
            self.coeffs.row_iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robin2d::disk_mode_eig;

    #[test]
    fn constant_path_matches_block_path() {
        // Perturbing the circle's curvature representation by nothing but
        // forcing the block solver must reproduce the per-mode solver.
        let h = 1e-2;
        let circle = Curve::circle(1.0).unwrap();
        let mut comp = CollarComponent::from_curve(&circle);
        let disc = CollarDiscretization { fourier_modes: 6, elements: 40, richardson: false, ..Default::default() };
        let delta = disc.width(h);
        let a = solve_component(&comp, 0, h, -0.0105, &disc, 40, delta).unwrap();
        comp.constant = None;
        let b = solve_component(&comp, 0, h, -0.0105, &disc, 40, delta).unwrap();
        let mut x: Vec<f64> = a.values.iter().map(|v| v.0).collect();
        let mut y: Vec<f64> = b.values.iter().map(|v| v.0).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12 * p.abs(), "{p} {q}");
        }
    }

    #[test]
    fn disk_bracketing() {
        let h = 1e-2;
        let prob = RobinProblem::disk(h, 1.0, 0.0).unwrap();
        let d = collar_spectrum(&prob, &CollarDiscretization::default()).unwrap();
        let n = collar_spectrum(&prob, &CollarDiscretization::default().with_bc(InnerBc::Neumann)).unwrap();
        let exact = disk_mode_eig(h, 0, 1.0).unwrap().unwrap();
        assert!(n.records[0].lambda <= exact && exact <= d.records[0].lambda);
    }

    #[test]
    fn rejects_wide_collar() {
        let prob = RobinProblem::disk(1e-2, 1.0, 0.0).unwrap();
        let disc = CollarDiscretization { delta: Some(0.6), ..Default::default() };
        assert!(collar_spectrum(&prob, &disc).is_err());
    }
}
