use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_i`]; `I_0(700) ≈ 1.5e302` is close
/// to the top of the `f64` range.
pub const BESSEL_MAX_ARG: f64 = 700.0;

/// Modified Bessel function of the first kind `I_ν(x)` from its power
/// series `Σ (x/2)^{ν+2m} / (m! Γ(ν+m+1))`.
///
/// Terms are accumulated relative to the leading one, whose logarithm is
/// formed separately, so neither large `ν` nor large `x` underflows early.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain {
            name: "order",
            value: nu,
            expected: "nu >= 0",
        });
    }
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::Domain {
            name: "argument",
            value: x,
            expected: "0 <= x <= 700",
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (nu + m));
        sum += term;
        // Terms decrease monotonically once m exceeds the peak near x/2.
        if term < 1e-17 * sum && m > half {
            break;
        }
    }
    Ok((nu * half.ln() - ln_gamma(nu + 1.0) + sum.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_integer_closed_form() {
        let x: f64 = 1.0;
        let closed = (2.0 / (PI * x)).sqrt() * x.sinh();
        assert!(rel(bessel_i(0.5, x).unwrap(), closed) < 1e-14);
        assert!(rel(bessel_i(0.5, 1.0).unwrap(), 0.937_674_888_245_487_6) < 1e-14);
    }

    #[test]
    fn high_precision_reference_values() {
        // 20-digit references from an arbitrary-precision series.
        let cases = [
            (2.0, 3.0, 2.245_212_440_929_951_2),
            (3.5, 2.0, 0.106_905_488_284_633_37),
            (10.0, 0.1, 2.691_756_142_922_143e-20),
            (0.0, 700.0, 1.529_593_347_671_873_7e302),
            (5.5, 50.0, 2.161_071_295_935_335_3e20),
        ];
        for (nu, x, want) in cases {
            let got = bessel_i(nu, x).unwrap();
            assert!(rel(got, want) < 1e-12, "I_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(bessel_i(1.0, 701.0).is_err());
        assert!(bessel_i(1.0, -1.0).is_err());
        assert!(bessel_i(-0.5, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn three_term_recurrence(nu in 1.0f64..20.0, x in 0.05f64..60.0) {
            let lhs = bessel_i(nu - 1.0, x).unwrap() - bessel_i(nu + 1.0, x).unwrap();
            let rhs = 2.0 * nu / x * bessel_i(nu, x).unwrap();
            let scale = bessel_i(nu - 1.0, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{} vs {}", lhs, rhs);
        }
    }
}
