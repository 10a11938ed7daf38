//! Smooth closed boundary curves in arc-length parametrisation and the
//! tubular coordinates `(s, t) -> M(s) - t nu(s)` near them.
//!
//! The arc-length variable lives on `[-L, L)` with total length `2L`; `s = 0`
//! is the point `(a, 0)` for circles and ellipses. Orientation is
//! counter-clockwise and `nu` is the outward unit normal.

use crate::error::{invalid, Error, Result};
use crate::numerics::fourier::FourierSeries;
use crate::numerics::quadrature::{adaptive, GaussLegendre};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const DEFAULT_SAMPLES: usize = 4096;
const ARC_PANELS: usize = 4096;
const ARC_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Fourier,
}

#[derive(Debug, Clone)]
struct ArcTable {
    a: f64,
    b: f64,
    rule: GaussLegendre,
    cumulative: Vec<f64>,
}

impl ArcTable {
    fn new(a: f64, b: f64) -> Self {
        let rule = GaussLegendre::new(ARC_ORDER);
        let dth = 2.0 * PI / ARC_PANELS as f64;
        let mut cumulative = vec![0.0; ARC_PANELS + 1];
        for i in 0..ARC_PANELS {
            let lo = i as f64 * dth;
            cumulative[i + 1] = cumulative[i] + rule.integrate(|th| ellipse_speed(a, b, th), lo, lo + dth);
        }
        Self { a, b, rule, cumulative }
    }

    fn perimeter(&self) -> f64 {
        self.cumulative[ARC_PANELS]
    }

    /// Parameter angle for arc length `s` in `[0, perimeter)`.
    fn theta(&self, s: f64) -> f64 {
        let dth = 2.0 * PI / ARC_PANELS as f64;
        let i = match self.cumulative.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => i.min(ARC_PANELS - 1),
            Err(i) => i.saturating_sub(1).min(ARC_PANELS - 1),
        };
        let lo = i as f64 * dth;
        let (s0, s1) = (self.cumulative[i], self.cumulative[i + 1]);
        let mut th = lo + dth * (s - s0) / (s1 - s0);
        for _ in 0..6 {
            let f = s0 + self.rule.integrate(|x| ellipse_speed(self.a, self.b, x), lo, th) - s;
            let step = f / ellipse_speed(self.a, self.b, th);
            th = (th - step).clamp(lo, lo + dth);
            if step.abs() < 1e-16 {
                break;
            }
        }
        th
    }
}

fn ellipse_speed(a: f64, b: f64, th: f64) -> f64 {
    (a * a * th.sin().powi(2) + b * b * th.cos().powi(2)).sqrt()
}

#[derive(Debug, Clone)]
struct TangentSeries {
    cos: FourierSeries,
    sin: FourierSeries,
    origin: [f64; 2],
}

/// Closed curve in arc-length parametrisation.
#[derive(Debug, Clone)]
pub struct Curve {
    kind: CurveKind,
    half_length: f64,
    kappa: Vec<f64>,
    kappa_series: FourierSeries,
    arc: Option<ArcTable>,
    tangent: Option<TangentSeries>,
}

/// Point in tubular coordinates, validated against the admissible collar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubularPoint {
    pub s: f64,
    pub t: f64,
}

/// JSON form of a curve.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveDocument {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "L")]
    pub half_length: f64,
    /// Non-negative curvature coefficients; only read for `fourier` curves.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa_fourier: Vec<[f64; 2]>,
}

impl Curve {
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("circle radius must be positive, got {radius}")));
        }
        let kappa = vec![1.0 / radius; DEFAULT_SAMPLES];
        Ok(Self {
            kind: CurveKind::Circle { radius },
            half_length: PI * radius,
            kappa_series: FourierSeries::from_samples(&kappa),
            kappa,
            arc: None,
            tangent: None,
        })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid(format!("ellipse semi-axes must be positive, got ({a}, {b})")));
        }
        let arc = ArcTable::new(a, b);
        let perimeter = arc.perimeter();
        let (check, _) = adaptive(|th| ellipse_speed(a, b, th), 0.0, 2.0 * PI, 1e-13)?;
        if (check - perimeter).abs() > 1e-12 * perimeter {
            return Err(Error::NoConvergence(format!(
                "arc-length table {perimeter} disagrees with adaptive perimeter {check}"
            )));
        }
        let n = DEFAULT_SAMPLES;
        let kappa: Vec<f64> = (0..n)
            .map(|j| {
                let th = arc.theta(perimeter * j as f64 / n as f64);
                a * b / ellipse_speed(a, b, th).powi(3)
            })
            .collect();
        Ok(Self {
            kind: CurveKind::Ellipse { a, b },
            half_length: 0.5 * perimeter,
            kappa_series: FourierSeries::from_samples(&kappa),
            kappa,
            arc: Some(arc),
            tangent: None,
        })
    }

    /// Curve with curvature `kappa(s) = sum_n k_n exp(i pi n s / L)`, given
    /// `k_n` for `n >= 0`. Total curvature must be `2 pi` and the curve must close.
    pub fn from_curvature_fourier(half_length: f64, coeffs: &[Complex64]) -> Result<Self> {
        if !(half_length > 0.0) || coeffs.is_empty() {
            return Err(invalid("Fourier curve needs L > 0 and at least one coefficient"));
        }
        if coeffs[0].im.abs() > 1e-14 {
            return Err(invalid("mean curvature coefficient must be real"));
        }
        if (2.0 * half_length * coeffs[0].re - 2.0 * PI).abs() > 1e-10 {
            return Err(invalid(format!(
                "total curvature {} differs from 2 pi",
                2.0 * half_length * coeffs[0].re
            )));
        }
        let n = DEFAULT_SAMPLES;
        if coeffs.len() > n / 4 {
            return Err(invalid(format!("at most {} curvature coefficients supported", n / 4)));
        }
        let kappa_series = FourierSeries::from_nonnegative(coeffs, n);
        let kappa = kappa_series.samples();
        let w = PI / half_length;
        let phi: Vec<f64> = (0..n)
            .map(|j| {
                let s = 2.0 * half_length * j as f64 / n as f64;
                let mut v = 0.5 * PI + coeffs[0].re * s;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let kf = k as f64 * w;
                    let e = Complex64::new((kf * s).cos() - 1.0, (kf * s).sin());
                    v += 2.0 * (c * e / Complex64::new(0.0, kf)).re;
                }
                v
            })
            .collect();
        let cos = FourierSeries::from_samples(&phi.iter().map(|p| p.cos()).collect::<Vec<_>>());
        let sin = FourierSeries::from_samples(&phi.iter().map(|p| p.sin()).collect::<Vec<_>>());
        if cos.coeff(0).norm() > 1e-9 || sin.coeff(0).norm() > 1e-9 {
            return Err(invalid("curvature series does not produce a closed curve"));
        }
        let mut curve = Self {
            kind: CurveKind::Fourier,
            half_length,
            kappa,
            kappa_series,
            arc: None,
            tangent: Some(TangentSeries { cos, sin, origin: [0.0, 0.0] }),
        };
        let tan = curve.tangent.as_ref().unwrap();
        let origin_shift = |f: &FourierSeries| -> f64 {
            let mut v = 0.0;
            for k in 1..(n as i64) / 2 {
                let kf = k as f64 * w;
                v -= 2.0 * (f.coeff(k) / Complex64::new(0.0, kf)).re;
            }
            -v
        };
        let origin = [origin_shift(&tan.cos), origin_shift(&tan.sin)];
        curve.tangent.as_mut().unwrap().origin = origin;
        Ok(curve)
    }

    pub fn from_document(doc: &CurveDocument) -> Result<Self> {
        let get = |k: &str| {
            doc.params
                .get(k)
                .copied()
                .ok_or_else(|| invalid(format!("curve parameter `{k}` missing")))
        };
        let curve = match doc.kind.as_str() {
            "circle" => Self::circle(get("radius")?)?,
            "ellipse" => Self::ellipse(get("a")?, get("b")?)?,
            "fourier" => {
                let c: Vec<Complex64> = doc.kappa_fourier.iter().map(|v| Complex64::new(v[0], v[1])).collect();
                Self::from_curvature_fourier(doc.half_length, &c)?
            }
            other => return Err(invalid(format!("unknown curve kind `{other}`"))),
        };
        if (curve.half_length - doc.half_length).abs() > 1e-9 * doc.half_length {
            return Err(invalid(format!(
                "document half-length {} disagrees with computed {}",
                doc.half_length, curve.half_length
            )));
        }
        Ok(curve)
    }

    pub fn to_document(&self) -> CurveDocument {
        let mut params = BTreeMap::new();
        let kind = match self.kind {
            CurveKind::Circle { radius } => {
                params.insert("radius".into(), radius);
                "circle"
            }
            CurveKind::Ellipse { a, b } => {
                params.insert("a".into(), a);
                params.insert("b".into(), b);
                "ellipse"
            }
            CurveKind::Fourier => "fourier",
        };
        let half = self.kappa.len() as i64 / 4;
        let scale = self.kappa_series.coeff(0).norm();
        let mut last = 0;
        for n in 0..half {
            if self.kappa_series.coeff(n).norm() > 1e-15 * scale {
                last = n;
            }
        }
        CurveDocument {
            kind: kind.into(),
            params,
            half_length: self.half_length,
            kappa_fourier: (0..=last)
                .map(|n| {
                    let c = self.kappa_series.coeff(n);
                    [c.re, c.im]
                })
                .collect(),
        }
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Uniform curvature samples at `s_j = 2L j / N`.
    pub fn curvature_samples(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_series(&self) -> &FourierSeries {
        &self.kappa_series
    }

    /// Fourier series of `f(kappa(s))`.
    pub fn series_of(&self, f: impl Fn(f64) -> f64) -> FourierSeries {
        FourierSeries::from_samples(&self.kappa.iter().map(|&k| f(k)).collect::<Vec<_>>())
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn kappa_abs_max(&self) -> f64 {
        self.kappa.iter().map(|k| k.abs()).fold(0.0, f64::max)
    }

    pub fn is_constant_curvature(&self) -> bool {
        let k0 = self.kappa_series.coeff(0).re.abs();
        (1..self.kappa.len() as i64 / 2).all(|n| self.kappa_series.coeff(n).norm() <= 1e-13 * k0)
    }

    /// Wrap `s` into `[-L, L)`.
    pub fn wrap(&self, s: f64) -> f64 {
        (s + self.half_length).rem_euclid(2.0 * self.half_length) - self.half_length
    }

    pub fn curvature(&self, s: f64) -> f64 {
        match self.kind {
            CurveKind::Circle { radius } => 1.0 / radius,
            CurveKind::Ellipse { a, b } => {
                let th = self.ellipse_theta(s);
                a * b / ellipse_speed(a, b, th).powi(3)
            }
            CurveKind::Fourier => self.kappa_series.eval(self.wrap(s), self.half_length),
        }
    }

    fn ellipse_theta(&self, s: f64) -> f64 {
        let arc = self.arc.as_ref().expect("ellipse arc table");
        arc.theta(s.rem_euclid(2.0 * self.half_length))
    }

    pub fn position(&self, s: f64) -> [f64; 2] {
        match self.kind {
            CurveKind::Circle { radius } => {
                let a = s / radius;
                [radius * a.cos(), radius * a.sin()]
            }
            CurveKind::Ellipse { a, b } => {
                let th = self.ellipse_theta(s);
                [a * th.cos(), b * th.sin()]
            }
            CurveKind::Fourier => {
                let tan = self.tangent.as_ref().unwrap();
                let s = s.rem_euclid(2.0 * self.half_length);
                let w = PI / self.half_length;
                let prim = |f: &FourierSeries| {
                    let mut v = 0.0;
                    for k in 1..(self.kappa.len() as i64) / 2 {
                        let kf = k as f64 * w;
                        let e = Complex64::new((kf * s).cos() - 1.0, (kf * s).sin());
                        v += 2.0 * (f.coeff(k) * e / Complex64::new(0.0, kf)).re;
                    }
                    v
                };
                [tan.origin[0] + prim(&tan.cos), tan.origin[1] + prim(&tan.sin)]
            }
        }
    }

    pub fn tangent(&self, s: f64) -> [f64; 2] {
        match self.kind {
            CurveKind::Circle { radius } => {
                let a = s / radius;
                [-a.sin(), a.cos()]
            }
            CurveKind::Ellipse { a, b } => {
                let th = self.ellipse_theta(s);
                let sp = ellipse_speed(a, b, th);
                [-a * th.sin() / sp, b * th.cos() / sp]
            }
            CurveKind::Fourier => {
                let tan = self.tangent.as_ref().unwrap();
                let s = self.wrap(s);
                let (c, d) = (tan.cos.eval(s, self.half_length), tan.sin.eval(s, self.half_length));
                let n = (c * c + d * d).sqrt();
                [c / n, d / n]
            }
        }
    }

    pub fn normal(&self, s: f64) -> [f64; 2] {
        let t = self.tangent(s);
        [t[1], -t[0]]
    }

    /// Validated tubular point with `0 <= t < 1 / max |kappa|`.
    pub fn tubular(&self, s: f64, t: f64) -> Result<TubularPoint> {
        let reach = 1.0 / self.kappa_abs_max();
        if !(t >= 0.0 && t < reach) {
            return Err(invalid(format!("normal coordinate {t} outside [0, {reach})")));
        }
        Ok(TubularPoint { s: self.wrap(s), t })
    }

    pub fn embed(&self, p: TubularPoint) -> [f64; 2] {
        let m = self.position(p.s);
        let nu = self.normal(p.s);
        [m[0] - p.t * nu[0], m[1] - p.t * nu[1]]
    }

    /// Metric factor `a(s, t) = 1 - t kappa(s)`.
    pub fn metric_factor(&self, p: TubularPoint) -> f64 {
        1.0 - p.t * self.curvature(p.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_kummer(a: f64, b: f64) -> f64 {
        let h = ((a - b) / (a + b)).powi(2);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..60 {
            let nf = n as f64;
            let binom_ratio = (0.5 - (nf - 1.0)) / nf;
            term *= binom_ratio * binom_ratio * h;
            sum += term;
        }
        PI * (a + b) * sum
    }

    #[test]
    fn ellipse_perimeter() {
        let e = Curve::ellipse(2.0, 1.0).unwrap();
        assert!((e.length() - 9.688448220547675).abs() < 1e-12);
        assert!((e.length() - gauss_kummer(2.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ellipse_curvature_extremes_and_mean() {
        let e = Curve::ellipse(2.0, 1.0).unwrap();
        assert!((e.curvature(0.0) - 2.0).abs() < 1e-12);
        assert!((e.curvature(0.5 * e.half_length()) - 0.25).abs() < 1e-10);
        assert!((e.kappa_max() - 2.0).abs() < 1e-12);
        assert!((e.kappa_series().coeff(0).re * e.length() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn arc_length_is_unit_speed() {
        let e = Curve::ellipse(2.0, 1.0).unwrap();
        let ds = 1e-6;
        for s in [-3.0, -0.4, 0.1, 1.7, 4.0] {
            let p = e.position(s - ds);
            let q = e.position(s + ds);
            let speed = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt() / (2.0 * ds);
            assert!((speed - 1.0).abs() < 1e-8, "{s} {speed}");
        }
    }

    #[test]
    fn circle_embedding_radius() {
        let c = Curve::circle(1.5).unwrap();
        let p = c.tubular(0.7, 0.3).unwrap();
        let x = c.embed(p);
        assert!(((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.2).abs() < 1e-14);
        assert!(c.tubular(0.0, 1.6).is_err());
    }

    #[test]
    fn fourier_circle_matches_circle() {
        let f = Curve::from_curvature_fourier(PI, &[Complex64::new(1.0, 0.0)]).unwrap();
        for s in [-2.0, 0.0, 1.0, 3.0] {
            let a = f.position(s);
            let b = Curve::circle(1.0).unwrap().position(s);
            assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
        }
        assert!(Curve::from_curvature_fourier(3.0, &[Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let e = Curve::ellipse(2.0, 1.0).unwrap();
        let doc = e.to_document();
        let text = serde_json::to_string(&doc).unwrap();
        let back: CurveDocument = serde_json::from_str(&text).unwrap();
        let e2 = Curve::from_document(&back).unwrap();
        assert!((e2.length() - e.length()).abs() < 1e-14);
        assert!(text.contains("\"L\""));
    }
}
