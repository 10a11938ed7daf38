use crate::error::{Error, Result};

const MAX_BISECT: usize = 400;

/// Bisection on a sign-changing bracket, stopping when the bracket is
/// below `tol` relative to the midpoint (absolute below 1).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }
    for _ in 0..MAX_BISECT {
        let m = 0.5 * (a + b);
        if b - a <= tol * m.abs().max(1.0) || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection followed by guarded Newton polishing: a Newton step is kept only
/// if it stays inside the final bracket and lowers |f|.
pub fn bisect_newton<F, D>(f: F, df: D, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let x0 = bisect(&f, lo, hi, tol)?;
    let (a, b) = (lo.min(hi), lo.max(hi));
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..4 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let y = x - fx / d;
        if !(y > a && y < b) {
            break;
        }
        let fy = f(y);
        if fy.abs() < fx.abs() {
            x = y;
            fx = fy;
        } else {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = bisect_newton(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, 1e-8).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn missing_sign_change() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::Bracket(_))));
    }
}
