use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Numerical rationality verdict. Not a proof either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    RationalWithinTol,
    /// No `p/q` with `q ≤ Q_max` lies within the tolerance.
    NoRationalQLe(u64),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::RationalWithinTol => write!(f, "rational_within_tol"),
            Verdict::NoRationalQLe(q) => write!(f, "no_rational_q_le_{q}"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Verdict {
    pub fn is_rational(&self) -> bool {
        matches!(self, Verdict::RationalWithinTol)
    }
}

/// A fraction `p/q` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub p: i128,
    pub q: i128,
}

impl Rational {
    pub fn to_f64(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalityVerdict {
    pub value: f64,
    pub best_rational: Rational,
    pub distance: f64,
    pub verdict: Verdict,
}

/// Closest fraction to `x` with denominator at most `q_max`, from the
/// continued-fraction convergents and the last admissible semiconvergent.
pub fn best_rational(x: f64, q_max: u64) -> Result<Rational> {
    if q_max == 0 || !x.is_finite() || x.abs() > 1e15 {
        return Err(Error::Invalid(format!("cannot approximate {x} with q <= {q_max}")));
    }
    let q_max = q_max as i128;
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rest = x;
    loop {
        let a = rest.floor();
        let ai = a as i128;
        let q2 = q0 + ai * q1;
        if q2 > q_max {
            // Semiconvergent with the largest admissible partial quotient.
            let k = (q_max - q0) / q1;
            let semi = Rational {
                p: p0 + k * p1,
                q: q0 + k * q1,
            };
            let conv = Rational { p: p1, q: q1 };
            let closer = if (semi.to_f64() - x).abs() < (conv.to_f64() - x).abs() {
                semi
            } else {
                conv
            };
            return Ok(closer);
        }
        let p2 = p0 + ai * p1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a;
        if frac == 0.0 || (p1 as f64 / q1 as f64) == x {
            return Ok(Rational { p: p1, q: q1 });
        }
        rest = 1.0 / frac;
    }
}

/// Best rational approximation with `q ≤ q_max` and whether it lies within
/// `tol` of `x`.
pub fn rationality_check(x: f64, q_max: u64, tol: f64) -> Result<RationalityVerdict> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let best = best_rational(x, q_max)?;
    let distance = (x - best.to_f64()).abs();
    Ok(RationalityVerdict {
        value: x,
        best_rational: best,
        distance,
        verdict: if distance <= tol {
            Verdict::RationalWithinTol
        } else {
            Verdict::NoRationalQLe(q_max as u64)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_halves() {
        let v = rationality_check(3.5, 1000, 1e-12).unwrap();
        assert_eq!(v.best_rational, Rational { p: 7, q: 2 });
        assert_eq!(v.distance, 0.0);
        assert_eq!(v.verdict.to_string(), "rational_within_tol");
        let v = rationality_check(30.25f64.sqrt(), 1000, 1e-12).unwrap();
        assert_eq!(v.best_rational.to_string(), "11/2");
    }

    #[test]
    fn classic_approximations_of_pi() {
        assert_eq!(best_rational(PI, 7).unwrap(), Rational { p: 22, q: 7 });
        assert_eq!(best_rational(PI, 1000).unwrap(), Rational { p: 355, q: 113 });
        let v = rationality_check(PI, 1000, 1e-9).unwrap();
        assert_eq!(v.verdict.to_string(), "no_rational_q_le_1000");
    }

    #[test]
    fn perturbed_exponent_is_flagged() {
        let v = rationality_check((30.20f64 + 0.25).sqrt() + 1.0, 1000, 1e-9).unwrap();
        assert_eq!(v.verdict, Verdict::NoRationalQLe(1000));
    }

    #[test]
    fn negative_values() {
        assert_eq!(best_rational(-2.5, 10).unwrap(), Rational { p: -5, q: 2 });
    }

    proptest! {
        #[test]
        fn no_fraction_with_small_denominator_is_closer(x in -20.0f64..20.0, q_max in 1u64..60) {
            let best = best_rational(x, q_max).unwrap();
            prop_assert!(best.q >= 1 && best.q as u64 <= q_max);
            let d = (x - best.to_f64()).abs();
            for q in 1..=q_max as i128 {
                let p = (x * q as f64).round() as i128;
                prop_assert!((x - p as f64 / q as f64).abs() >= d - 1e-12);
            }
        }
    }
}
