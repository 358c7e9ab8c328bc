// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use super::linalg::C64;
use crate::error::{domain, Result};

/// Clenshaw evaluation of `sum c_k T_k(x)` without a domain check. Uses Reinsch's
/// difference form for `|x| > 1/2`, where the plain recurrence loses accuracy.
pub fn clenshaw(coeffs: &[C64], x: f64) -> C64 {
    let zero = C64::new(0.0, 0.0);
    if coeffs.is_empty() {
        return zero;
    }
    let tail = coeffs[1..].iter().rev();
    if x.abs() <= 0.5 {
        let (mut b1, mut b2) = (zero, zero);
        for c in tail {
            let b0 = c + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        coeffs[0] + b1 * x - b2
    } else if x > 0.0 {
        let (mut b, mut d) = (zero, zero);
        for c in tail {
            d = c + b * (2.0 * (x - 1.0)) + d;
            b += d;
        }
        coeffs[0] + b * (x - 1.0) + d
    } else {
        let (mut b, mut d) = (zero, zero);
        for c in tail {
            d = c + b * (2.0 * (x + 1.0)) - d;
            b = d - b;
        }
        coeffs[0] + b * (x + 1.0) - d
    }
}

/// Evaluate a Chebyshev series at `x` in `[-1, 1]`.
pub fn chebyshev_eval(coeffs: &[C64], x: f64) -> Result<C64> {
    if !(x.abs() <= 1.0) {
        return domain(format!("chebyshev_eval needs |x| <= 1, got {x}"));
    }
    Ok(clenshaw(coeffs, x))
}

/// Product of two Chebyshev series via `T_m T_n = (T_{m+n} + T_{|m-n|}) / 2`.
pub fn chebyshev_multiply(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (m, &am) in a.iter().enumerate() {
        if am == C64::new(0.0, 0.0) {
            continue;
        }
        for (n, &bn) in b.iter().enumerate() {
            let p = am * bn * 0.5;
            out[m + n] += p;
            out[m.abs_diff(n)] += p;
        }
    }
    out
}

/// Antiderivative of a Chebyshev series, with the constant chosen so the result vanishes at 0.
pub fn chebyshev_integrate(c: &[C64]) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![zero; c.len() + 1];
    for (n, &cn) in c.iter().enumerate() {
        match n {
            0 => out[1] += cn,
            1 => {
                out[2] += cn * 0.25;
                out[0] += cn * 0.25;
            }
            _ => {
                let nf = n as f64;
                out[n + 1] += cn * (0.5 / (nf + 1.0));
                out[n - 1] -= cn * (0.5 / (nf - 1.0));
            }
        }
    }
    // T_k(0) is 0 for odd k and (-1)^{k/2} for even k.
    let mut at0 = zero;
    for (k, &v) in out.iter().enumerate().step_by(2) {
        at0 += if (k / 2) % 2 == 0 { v } else { -v };
    }
    out[0] -= at0;
    out
}

/// Chebyshev coefficients of the degree `n-1` interpolant through values at the
/// first-kind nodes `x_j = cos(pi (j + 1/2) / n)`.
pub fn chebyshev_from_samples(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let mut s = C64::new(0.0, 0.0);
            for (j, &v) in values.iter().enumerate() {
                s += v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / nf).cos();
            }
            let w = if k == 0 { 1.0 / nf } else { 2.0 / nf };
            s * w
        })
        .collect()
}

/// First-kind Chebyshev nodes, ordered from +1 towards -1.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos()).collect()
}
