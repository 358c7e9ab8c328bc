// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{domain, Result};

const RESCALE_AT: f64 = 1e250;

/// Principal branch of the Lambert W function on `x >= 0`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("lambert_w needs x >= 0, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x <= std::f64::consts::E {
        // Halley on w e^w - x.
        let mut w = x.ln_1p() * 0.8;
        for _ in 0..100 {
            let ew = w.exp();
            let f = w * ew - x;
            let wp1 = w + 1.0;
            let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
            w -= dw;
            if dw.abs() <= 1e-14 * (1.0 + w.abs()) {
                break;
            }
        }
        Ok(w)
    } else {
        // Halley on w + ln w - ln x, which avoids overflow of e^w.
        let lx = x.ln();
        let l2 = lx.ln();
        let mut w = lx - l2 + l2 / lx;
        for _ in 0..100 {
            let g = w + w.ln() - lx;
            let g1 = 1.0 + 1.0 / w;
            let g2 = -1.0 / (w * w);
            let dw = 2.0 * g * g1 / (2.0 * g1 * g1 - g * g2);
            w -= dw;
            if dw.abs() <= 1e-15 * w.abs() {
                break;
            }
        }
        Ok(w)
    }
}

/// Bessel function of the first kind `J_n(x)`, by Miller's backward recurrence
/// normalised with `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    let top = (n as f64).max(x);
    let m = {
        let m = (top + 40.0 + 2.0 * top.sqrt()).ceil() as usize;
        m + m % 2
    };
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1.0; // J_k
    let mut sum = 0.0;
    let mut ans = if n == m { cur } else { 0.0 };
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            next /= RESCALE_AT;
            ans /= RESCALE_AT;
            sum /= RESCALE_AT;
        }
        let idx = k - 1;
        if idx == n {
            ans = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * cur;
        }
    }
    sum += cur;
    ans / sum
}

/// Exponentially scaled modified Bessel function `e^{-x} I_n(x)` for `x >= 0`.
pub fn bessel_i_scaled(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        // e^{-|x|} I_n(|x|) with the parity sign; callers only use x >= 0.
        let v = bessel_i_scaled(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    let m = {
        let m = (n as f64 + (60.0 * x).sqrt() + 40.0).ceil() as usize;
        m.max(n + 20)
    };
    let mut next = 0.0;
    let mut cur = 1.0;
    let mut sum = 0.0;
    let mut ans = 0.0;
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur + next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            next /= RESCALE_AT;
            ans /= RESCALE_AT;
            sum /= RESCALE_AT;
        }
        let idx = k - 1;
        if idx == n {
            ans = cur;
        }
        if idx > 0 {
            sum += 2.0 * cur;
        }
    }
    sum += cur;
    ans / sum
}

/// Modified Bessel function of the first kind `I_n(x)`.
pub fn bessel_i(n: usize, x: f64) -> f64 {
    bessel_i_scaled(n, x) * x.abs().exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 3.0 {
        // erf x = 2x/sqrt(pi) e^{-x^2} sum (2x^2)^k / (2k+1)!!, all terms positive.
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= 2.0 * x2 / (2.0 * k + 1.0);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        2.0 * x / std::f64::consts::PI.sqrt() * (-x2).exp() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function for x >= 3 from its continued fraction
/// `sqrt(pi) e^{x^2} erfc x = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`, modified Lentz.
fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}
