//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string; the `*_json` functions are the native
//! versions used by the tests.

use robin_core::decay::fit_decay_rate;
use robin_core::effective_op::EffectiveOperator;
use robin_core::geometry::Curve;
use robin_core::robin2d::{disk_mode_eig, disk_spectrum, EigenMode, RobinProblem};
use robin_core::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Negative spectrum of the unit disk with `(lambda + h) / h^{3/2}`.
pub fn disk_spectrum_json(h: f64) -> Result<String> {
    let spec = disk_spectrum(&RobinProblem::disk(h, 1.0, 0.0)?)?;
    let h32 = h.powf(1.5);
    let records: Vec<_> = spec
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "n": i + 1,
                "m": r.mode,
                "lambda": r.lambda,
                "w": r.lambda / (h * h),
                "scaled": (r.lambda + h) / h32,
            })
        })
        .collect();
    Ok(json!({
        "h": h,
        "count": records.len(),
        "weyl_prediction": 2.0 / h.sqrt(),
        "records": records,
    })
    .to_string())
}

/// Radial profile of the disk mode `m` out to ten boundary-layer widths.
pub fn mode_profile_json(h: f64, m: u32, samples: usize) -> Result<String> {
    let lambda = disk_mode_eig(h, m, 1.0)?
        .ok_or_else(|| robin_core::Error::InvalidParameter(format!("mode {m} has no negative eigenvalue")))?;
    let mode = EigenMode::disk(h, 1.0, m, lambda)?;
    let depth = (10.0 * h.sqrt()).min(1.0);
    let n = samples.clamp(2, 4000);
    let mut t = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        let ti = depth * i as f64 / (n - 1) as f64;
        t.push(ti);
        u.push(mode.ray_value(ti)?);
    }
    let fit = fit_decay_rate(&mode).ok();
    Ok(json!({
        "h": h,
        "m": m,
        "lambda": lambda,
        "w": mode.w(),
        "t": t,
        "u": u,
        "normalized_rate": fit.map(|f| f.normalized_rate),
    })
    .to_string())
}

/// Lowest eigenvalues of the effective boundary operators `L^{-c}`, `L^{+c}`
/// on the ellipse `x^2/a^2 + y^2/b^2 = 1`, with the outline for drawing.
pub fn ellipse_effective_json(a: f64, b: f64, h: f64, c: f64, count: usize) -> Result<String> {
    let curve = Curve::ellipse(a, b)?;
    let modes = 96;
    let count = count.clamp(1, 2 * modes);
    let lower = EffectiveOperator::new(&curve, h, -c, modes)?.eigenvalues(count)?;
    let upper = EffectiveOperator::new(&curve, h, c, modes)?.eigenvalues(count)?;
    let l = curve.half_length();
    let outline: Vec<[f64; 3]> = (0..256)
        .map(|i| {
            let s = -l + 2.0 * l * i as f64 / 256.0;
            let p = curve.position(s);
            [p[0], p[1], curve.curvature(s)]
        })
        .collect();
    Ok(json!({
        "a": a,
        "b": b,
        "h": h,
        "c": c,
        "lower": lower,
        "upper": upper,
        "kappa_max": curve.kappa_max(),
        "outline": outline,
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn disk_spectrum_js(h: f64) -> std::result::Result<String, JsError> {
    js(disk_spectrum_json(h))
}

#[wasm_bindgen]
pub fn mode_profile_js(h: f64, m: u32, samples: usize) -> std::result::Result<String, JsError> {
    js(mode_profile_json(h, m, samples))
}

#[wasm_bindgen]
pub fn ellipse_effective_js(a: f64, b: f64, h: f64, c: f64, count: usize) -> std::result::Result<String, JsError> {
    js(ellipse_effective_json(a, b, h, c, count))
}
