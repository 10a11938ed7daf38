//! Modified Bessel functions in log form, logarithmic derivatives and ratios.
//! Everything is evaluated without overflow for arguments up to about 1e4.

use std::f64::consts::PI;

pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
pub const J1_PRIME_FIRST_ZERO: f64 = 1.841_183_781_340_659_3;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const CF_MAX: usize = 2_000_000;

/// `ln I_m(x)` from the power series summed in log-sum-exp form.
pub fn ln_i(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let lh = (0.5 * x).ln();
    let mut t = m as f64 * lh - (1..=m).map(|j| (j as f64).ln()).sum::<f64>();
    let mut terms = Vec::with_capacity(64);
    let mut peak = t;
    let mut k = 0u64;
    loop {
        terms.push(t);
        peak = peak.max(t);
        let step = 2.0 * lh - ((k + 1) as f64).ln() - ((k + 1 + m as u64) as f64).ln();
        t += step;
        k += 1;
        if step < 0.0 && t < peak - 40.0 {
            break;
        }
    }
    peak + terms.iter().map(|&v| (v - peak).exp()).sum::<f64>().ln()
}

/// Modified Lentz evaluation of `1/(b_1 + a/(b_2 + a/(b_3 + ...)))` with
/// `b_j = 2 (m + j)/x`.
fn lentz_ratio(m: u32, x: f64, a: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..CF_MAX {
        let b = 2.0 * (m as f64 + j as f64) / x;
        let aj = if j == 1 { 1.0 } else { a };
        d = b + aj * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + aj / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return f;
        }
    }
    f
}

/// `I_{m+1}(x) / I_m(x)`.
pub fn i_ratio(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    lentz_ratio(m, x, 1.0)
}

/// `x I_m'(x) / I_m(x)`.
pub fn i_log_derivative(m: u32, x: f64) -> f64 {
    m as f64 + x * i_ratio(m, x)
}

/// `J_{m+1}(x) / J_m(x)`; valid away from the zeros of `J_m`.
pub fn j_ratio(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    lentz_ratio(m, x, -1.0)
}

/// `x J_m'(x) / J_m(x)`.
pub fn j_log_derivative(m: u32, x: f64) -> f64 {
    m as f64 - x * j_ratio(m, x)
}

fn i0_i1_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let (mut t0, mut t1) = (1.0, 0.5 * x);
    let (mut s0, mut s1) = (t0, t1);
    for k in 1..60 {
        let k = k as f64;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 < 1e-17 * s0 {
            break;
        }
    }
    (s0, s1)
}

/// `(ln K_0(x), K_1(x)/K_0(x))`.
fn k0_and_ratio(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (i0, i1) = i0_i1_series(x);
        let q = 0.25 * x * x;
        let mut t = 1.0;
        let mut hk = 0.0;
        let mut s = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            t *= q / (kf * kf);
            hk += 1.0 / kf;
            s += t * hk;
            if t * hk < 1e-18 * s.abs().max(1e-300) {
                break;
            }
        }
        let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + s;
        let k1 = (1.0 / x - i1 * k0) / i0;
        (k0.ln(), k1 / k0)
    } else {
        // Steed's continued fraction for K_0, K_1.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..100_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        let h = a1 * h;
        let ln_k0 = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
        (ln_k0, (x + 0.5 - h) / x)
    }
}

/// `(ln K_m(x), K_m(x)/K_{m-1}(x))`, the second entry meaningful for `m >= 1`.
fn k_forward(m: u32, x: f64) -> (f64, f64) {
    let (mut lk, r0) = k0_and_ratio(x);
    let mut rho = r0;
    let mut prev = r0;
    for j in 0..m {
        if j > 0 {
            rho = 1.0 / rho + 2.0 * j as f64 / x;
        }
        lk += rho.ln();
        prev = rho;
    }
    (lk, prev)
}

/// `ln K_m(x)`.
pub fn ln_k(m: u32, x: f64) -> f64 {
    k_forward(m, x).0
}

/// `x K_m'(x) / K_m(x)`, negative for all `x > 0`.
pub fn k_log_derivative(m: u32, x: f64) -> f64 {
    if m == 0 {
        let (_, r0) = k0_and_ratio(x);
        return -x * r0;
    }
    let (_, rho) = k_forward(m, x);
    -(m as f64) - x / rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    // Reference values from 30-digit arbitrary precision evaluation.
    #[test]
    fn ln_i_and_ratio_reference() {
        let cases = [
            (0, 0.5, 0.06154971918548131, 0.24249961258080194),
            (3, 1.7, -2.1018290853747232, 0.2052566349191991),
            (0, 25.0, 22.476728004999245, 0.9797914534905159),
            (5, 120.0, 116.58377242221363, 0.9550329125645634),
            (40, 50.0, 31.726561458640287, 0.474550456432734),
            (0, 1e4, 9994.475903781433, 0.999949998749875),
            (7, 1e4, 9994.473453659019, 0.9992502437743489),
        ];
        for (m, x, li, r) in cases {
            assert!(close(ln_i(m, x), li, 1e-12), "ln_i {m} {x}: {}", ln_i(m, x));
            assert!(close(i_ratio(m, x), r, 1e-13), "ratio {m} {x}: {}", i_ratio(m, x));
        }
    }

    #[test]
    fn ln_k_reference() {
        let cases = [
            (0, 0.3, 0.316604794192566, -0.6679958392913883),
            (0, 1.9, -2.049137547057892, -2.3543947002967296),
            (0, 2.1, -2.2947782370499974, -2.5576294543560394),
            (1, 7.5, -8.234659134316049, -8.044291396113177),
            (4, 0.8, 4.711111905877043, -4.104057174611528),
            (10, 30.0, -29.85268847414561, -32.07099495137526),
            (3, 300.0, -302.61154089326755, -300.51453461390315),
        ];
        for (m, x, lk, d) in cases {
            assert!(close(ln_k(m, x), lk, 1e-13), "ln_k {m} {x}: {}", ln_k(m, x));
            assert!(close(k_log_derivative(m, x), d, 1e-13), "dk {m} {x}: {}", k_log_derivative(m, x));
        }
    }

    #[test]
    fn j_ratio_reference() {
        for (m, x, r) in [(0, 1.0, 0.5750809150043059), (2, 3.0, 0.6358121351178686), (5, 4.5, 0.4328192942660788)] {
            assert!(close(j_ratio(m, x), r, 1e-13));
        }
    }

    #[test]
    fn riccati_identity_for_i() {
        for m in [0u32, 2, 9] {
            for x in [0.7, 4.0, 33.0] {
                let y = i_log_derivative(m, x);
                let e = 1e-5;
                let num = (i_log_derivative(m, x + e) - i_log_derivative(m, x - e)) / (2.0 * e);
                let exact = (x * x + (m * m) as f64 - y * y) / x;
                assert!((num - exact).abs() < 1e-6 * exact.abs().max(1.0));
            }
        }
    }
}
