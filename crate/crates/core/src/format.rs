// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

/// Shortest decimal form of `v` after rounding to 12 significant digits.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        return "0".to_string();
    }
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(sig12(0.1), "0.1");
        assert_eq!(sig12(5.0), "5");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(2.0f64.sqrt() * 1e-7), "0.000000141421356237");
        assert_eq!(sig12(f64::NAN), "NaN");
    }
}
