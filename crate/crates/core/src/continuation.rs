//! Level curves `β = B_c(α)` of the first eigenvalue and the higher branches
//! along them.
//!
//! The curve runs between the two digon degenerations `(α_c, π)` and
//! `(π, α_c)` and is symmetric under `(α, β) ↦ (β, α)`. Samples are traced
//! from the symmetric point `α = β` toward `α = π − δ` by a predictor using
//! the Hadamard slope `−∂_αλ₁/∂_βλ₁` and a Newton corrector in `β`; the
//! other half follows from the symmetry.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{Domain, Grading};
use crate::geometry::{digon_spectrum, Digon, Triangle};
use crate::richardson::{extrapolate_pair_two_level, Discretization, Estimate, ExtrapolatedSpectrum};
use crate::shape_derivative::{hadamard_multiplet_extrapolated, hadamard_simple_extrapolated, DerivativeEstimate};

/// Distance kept from both digon endpoints of the curve.
pub const ENDPOINT_MARGIN: f64 = 0.05;

/// Opening `α_c` of the digon whose first eigenvalue is `c`, inverting
/// `μ(β) = (π/β)(π/β + 1)`.
pub fn level_alpha_c(c: f64) -> Result<f64> {
    if !(c > 2.0) || !c.is_finite() {
        return Err(Error::Domain {
            name: "level",
            value: c,
            expected: "c > 2",
        });
    }
    Ok(PI / (0.5 * (-1.0 + (1.0 + 4.0 * c).sqrt())))
}

/// How samples are placed along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform in `α` on `[α_s, π − δ]` from the symmetric point `α_s`,
    /// mirrored onto the other half. An odd count puts `(α_s, α_s)` in the
    /// middle.
    #[default]
    Symmetric,
    /// Uniform in `α` on `[α_c + δ, π − δ]`.
    Uniform,
}

/// Settings shared by all level-set computations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Continuation {
    pub disc: Discretization,
    /// One grading for every triangle on the curve, so that eigenvalues vary
    /// smoothly along it.
    pub grading: Grading,
    /// Number of eigenvalues tracked.
    pub k: usize,
    pub margin: f64,
    pub sampling: Sampling,
    pub max_newton: usize,
}

impl Default for Continuation {
    fn default() -> Self {
        Self {
            disc: Discretization::new(16),
            grading: Grading::default(),
            k: 3,
            margin: ENDPOINT_MARGIN,
            sampling: Sampling::default(),
            max_newton: 40,
        }
    }
}

/// A point of the curve with its extrapolated spectrum and slope.
#[derive(Debug, Clone, Serialize)]
pub struct CurveSample {
    pub alpha: f64,
    pub beta: f64,
    /// Extrapolated `λ₁, …, λ_k`.
    pub eigenvalues: Vec<Estimate>,
    /// `B'(α) = −∂_αλ₁/∂_βλ₁`.
    pub slope: f64,
    pub multiplets: Vec<std::ops::Range<usize>>,
}

impl CurveSample {
    /// The same spectrum at the mirrored point `(β, α)`.
    fn mirrored(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            slope: 1.0 / self.slope,
            ..self.clone()
        }
    }
}

/// Closed-form data at a digon end of the curve.
#[derive(Debug, Clone, Serialize)]
pub struct Endpoint {
    pub alpha: f64,
    pub beta: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCurve {
    pub c: f64,
    pub alpha_c: f64,
    /// Samples ordered by increasing `α`.
    pub samples: Vec<CurveSample>,
    /// The digon ends `(α_c, π)` and `(π, α_c)`.
    pub endpoints: [Endpoint; 2],
}

/// Result of a corrector solve.
#[derive(Debug, Clone)]
pub struct BetaSolution {
    pub beta: f64,
    pub study: ExtrapolatedSpectrum,
    pub gradient: DerivativeEstimate,
    pub iterations: usize,
}

impl BetaSolution {
    pub fn lambda1(&self) -> f64 {
        self.study.estimates[0].value
    }

    pub fn slope(&self) -> f64 {
        -self.gradient.d_alpha.value / self.gradient.d_beta.value
    }
}

/// The decimal with fewest digits within the spread of a `λ₁` column, or
/// within the default level tolerance of its mean.
fn infer_level(lambda1: &[f64]) -> f64 {
    let mean = lambda1.iter().sum::<f64>() / lambda1.len() as f64;
    let spread = lambda1
        .iter()
        .map(|l| (l - mean).abs())
        .fold(10.0 * Discretization::default().tol * mean.abs(), f64::max);
    (0..=15)
        .map(|digits| {
            let scale = 10f64.powi(digits);
            (mean * scale).round() / scale
        })
        .find(|c| (c - mean).abs() <= spread)
        .unwrap_or(mean)
}

/// Lagrange interpolation through three points, evaluated at `x`.
fn quadratic_through(xs: [f64; 3], ys: [f64; 3], x: f64) -> f64 {
    let mut out = 0.0;
    for i in 0..3 {
        let mut w = ys[i];
        for j in 0..3 {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        out += w;
    }
    out
}

impl Continuation {
    /// Largest admissible `|λ₁ − c|` after correction.
    pub fn level_tolerance(&self, c: f64) -> f64 {
        10.0 * self.disc.tol * c
    }

    fn study(&self, alpha: f64, beta: f64, warm: Option<&ExtrapolatedSpectrum>) -> Result<ExtrapolatedSpectrum> {
        let t = Triangle::new(alpha, beta)?;
        self.disc.solve_graded(Domain::Triangle(t), self.k, self.grading, warm)
    }

    /// Solve `λ₁(α, β) = c` for `β` by Newton steps with the Hadamard
    /// derivative, safeguarded by bisection on the bracket collected so far.
    pub fn solve_beta(
        &self,
        c: f64,
        alpha: f64,
        beta_hint: f64,
        warm: Option<&ExtrapolatedSpectrum>,
    ) -> Result<BetaSolution> {
        let alpha_c = level_alpha_c(c)?;
        if !(alpha > alpha_c && alpha < PI) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                expected: "(alpha_c, pi) for this level",
            });
        }
        let fail = |reason: String| Error::Continuation { alpha, reason };
        // λ₁ decreases in β: f(lo) > 0 > f(hi).
        let (mut lo, mut hi) = (0.02, PI - 0.02);
        let mut beta = beta_hint.clamp(lo, hi);
        let mut previous = warm.cloned();
        for iteration in 1..=self.max_newton {
            let study = self.study(alpha, beta, previous.as_ref())?;
            let f = study.estimates[0].value - c;
            let gradient = hadamard_simple_extrapolated(&study, 0)?;
            if f.abs() <= self.level_tolerance(c) {
                return Ok(BetaSolution {
                    beta,
                    study,
                    gradient,
                    iterations: iteration,
                });
            }
            if f > 0.0 {
                lo = lo.max(beta);
            } else {
                hi = hi.min(beta);
            }
            if hi - lo < 1e-14 {
                return Err(fail(format!("bracket collapsed at beta = {beta} with defect {f:e}")));
            }
            let slope = gradient.d_beta.value;
            let newton = beta - f / slope;
            beta = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            previous = Some(study);
        }
        Err(fail(format!("no convergence in {} corrector steps", self.max_newton)))
    }

    /// The point `α_s` with `B_c(α_s) = α_s`, by Newton along the diagonal.
    pub fn symmetric_point(&self, c: f64) -> Result<BetaSolution> {
        let alpha_c = level_alpha_c(c)?;
        let (mut lo, mut hi) = (alpha_c, PI - 0.02);
        // λ₁(α, α) scales roughly like the octant value 12 at π/2.
        let mut a = (0.5 * PI * (12.0 / c).sqrt()).clamp(lo + 1e-3, hi - 1e-3);
        let mut previous: Option<ExtrapolatedSpectrum> = None;
        for iteration in 1..=self.max_newton {
            let study = self.study(a, a, previous.as_ref())?;
            let f = study.estimates[0].value - c;
            let gradient = hadamard_simple_extrapolated(&study, 0)?;
            if f.abs() <= self.level_tolerance(c) {
                return Ok(BetaSolution {
                    beta: a,
                    study,
                    gradient,
                    iterations: iteration,
                });
            }
            if f > 0.0 {
                lo = lo.max(a);
            } else {
                hi = hi.min(a);
            }
            let slope = gradient.d_alpha.value + gradient.d_beta.value;
            let newton = a - f / slope;
            a = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            previous = Some(study);
        }
        Err(Error::Continuation {
            alpha: a,
            reason: "symmetric point not found".into(),
        })
    }

    fn sample_of(alpha: f64, sol: &BetaSolution) -> CurveSample {
        CurveSample {
            alpha,
            beta: sol.beta,
            eigenvalues: sol.study.estimates.clone(),
            slope: sol.slope(),
            multiplets: sol.study.multiplets.clone(),
        }
    }

    /// A single curve point at `alpha`, corrected from `beta_hint`.
    pub fn sample_at(&self, c: f64, alpha: f64, beta_hint: f64) -> Result<CurveSample> {
        let sol = self.solve_beta(c, alpha, beta_hint, None)?;
        Ok(Self::sample_of(alpha, &sol))
    }

    /// March along increasing `alpha_grid`, starting from a solved point.
    fn march(&self, c: f64, start: &BetaSolution, start_alpha: f64, alpha_grid: &[f64]) -> Result<Vec<CurveSample>> {
        let mut out = Vec::with_capacity(alpha_grid.len());
        let (mut a_prev, mut b_prev, mut slope) = (start_alpha, start.beta, start.slope());
        let mut warm = start.study.clone();
        for &alpha in alpha_grid {
            let predicted = b_prev + slope * (alpha - a_prev);
            let sol = self.solve_beta(c, alpha, predicted, Some(&warm))?;
            out.push(Self::sample_of(alpha, &sol));
            a_prev = alpha;
            b_prev = sol.beta;
            slope = sol.slope();
            warm = sol.study;
        }
        Ok(out)
    }

    /// Trace `n_samples` points of the level curve `λ₁ = c`.
    pub fn trace_curve(&self, c: f64, n_samples: usize) -> Result<LevelCurve> {
        let alpha_c = level_alpha_c(c)?;
        if n_samples < 3 {
            return Err(Error::Invalid(format!("need at least 3 samples, got {n_samples}")));
        }
        let (a_min, a_max) = (alpha_c + self.margin, PI - self.margin);
        if a_min >= a_max {
            return Err(Error::Invalid(format!("level {c} leaves no room inside the margins")));
        }
        let sym = self.symmetric_point(c)?;
        let a_s = sym.beta;
        let samples = match self.sampling {
            Sampling::Symmetric => {
                let half = n_samples / 2;
                let grid: Vec<f64> = if n_samples % 2 == 1 {
                    let h = (a_max - a_s) / half as f64;
                    (1..=half).map(|i| a_s + i as f64 * h).collect()
                } else {
                    let h = (a_max - a_s) / (half as f64 - 0.5);
                    (0..half).map(|i| a_s + (i as f64 + 0.5) * h).collect()
                };
                let right = self.march(c, &sym, a_s, &grid)?;
                let mut all: Vec<CurveSample> = right.iter().rev().map(CurveSample::mirrored).collect();
                if n_samples % 2 == 1 {
                    all.push(Self::sample_of(a_s, &sym));
                }
                all.extend(right);
                all
            }
            Sampling::Uniform => {
                let h = (a_max - a_min) / (n_samples - 1) as f64;
                let grid: Vec<f64> = (0..n_samples).map(|i| a_min + i as f64 * h).collect();
                let split = grid.partition_point(|&a| a < a_s);
                let right = self.march(c, &sym, a_s, &grid[split..])?;
                let left_grid: Vec<f64> = grid[..split].iter().rev().copied().collect();
                let mut left = self.march(c, &sym, a_s, &left_grid)?;
                left.reverse();
                left.extend(right);
                left
            }
        };
        LevelCurve::from_samples(c, samples, self.k)
    }
}

impl LevelCurve {
    /// Curve of level `c` holding `samples`, with closed-form digon ends
    /// carrying `k` eigenvalues.
    pub fn from_samples(c: f64, samples: Vec<CurveSample>, k: usize) -> Result<Self> {
        let alpha_c = level_alpha_c(c)?;
        let digon = digon_spectrum(Digon::new(alpha_c)?, k)?;
        Ok(LevelCurve {
            c,
            alpha_c,
            samples,
            endpoints: [
                Endpoint {
                    alpha: alpha_c,
                    beta: PI,
                    eigenvalues: digon.clone(),
                },
                Endpoint {
                    alpha: PI,
                    beta: alpha_c,
                    eigenvalues: digon,
                },
            ],
        })
    }

    /// Read back the output of [`LevelCurve::write_csv`]. The level is the
    /// mean of the `lambda1` column unless given. Slopes are not stored and
    /// come back as NaN; each eigenvalue is its own multiplet.
    pub fn read_csv<R: std::io::Read>(input: R, c: Option<f64>) -> Result<Self> {
        const HEADER: [&str; 8] = ["alpha", "beta", "lambda1", "lambda2", "lambda3", "err1", "err2", "err3"];
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Invalid(format!("malformed curve CSV: {e}")))?;
        if header.iter().map(str::trim).ne(HEADER) {
            return Err(Error::Invalid(format!("malformed curve CSV header: {header:?}")));
        }
        let mut samples = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(|e| Error::Invalid(format!("malformed curve CSV: {e}")))?;
            let row = record
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Invalid(format!("malformed curve CSV row {}: {e}", line + 2)))?;
            let eigenvalues: Vec<Estimate> = (0..3)
                .filter(|&i| row[2 + i].is_finite())
                .map(|i| Estimate {
                    value: row[2 + i],
                    error: row[5 + i],
                    order: None,
                })
                .collect();
            if eigenvalues.is_empty() {
                return Err(Error::Invalid(format!("curve CSV row {} has no eigenvalues", line + 2)));
            }
            samples.push(CurveSample {
                alpha: row[0],
                beta: row[1],
                multiplets: (0..eigenvalues.len()).map(|i| i..i + 1).collect(),
                eigenvalues,
                slope: f64::NAN,
            });
        }
        let c = match c {
            Some(c) => c,
            None if samples.is_empty() => return Err(Error::Invalid("empty curve CSV needs an explicit level".into())),
            None => infer_level(&samples.iter().map(|s| s.eigenvalues[0].value).collect::<Vec<_>>()),
        };
        let k = samples.first().map_or(3, |s| s.eigenvalues.len());
        Self::from_samples(c, samples, k)
    }

    /// `max |λ₁ − c|` over the samples.
    pub fn level_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.eigenvalues[0].value - self.c).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].alpha > w[0].alpha && w[1].beta < w[0].beta)
    }

    /// Sample closest to `α = β`.
    pub fn symmetric_sample(&self) -> Option<&CurveSample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.alpha - a.beta).abs().total_cmp(&(b.alpha - b.beta).abs()))
    }

    /// Quadratic extrapolation of `B` through the three outermost samples on
    /// each side: `(B(α_c), B(π))`, which should approach `(π, α_c)`.
    pub fn extrapolated_ends(&self) -> Option<(f64, f64)> {
        let n = self.samples.len();
        if n < 3 {
            return None;
        }
        let pick = |idx: [usize; 3]| {
            (
                idx.map(|i| self.samples[i].alpha),
                idx.map(|i| self.samples[i].beta),
            )
        };
        let (xl, yl) = pick([0, 1, 2]);
        let (xr, yr) = pick([n - 3, n - 2, n - 1]);
        Some((quadratic_through(xl, yl, self.alpha_c), quadratic_through(xr, yr, PI)))
    }

    /// Quadratic extrapolation of eigenvalue `index` to `α = π`.
    pub fn extrapolated_at_pi(&self, index: usize) -> Option<f64> {
        let n = self.samples.len();
        if n < 3 || self.samples[0].eigenvalues.len() <= index {
            return None;
        }
        let idx = [n - 3, n - 2, n - 1];
        Some(quadratic_through(
            idx.map(|i| self.samples[i].alpha),
            idx.map(|i| self.samples[i].eigenvalues[index].value),
            PI,
        ))
    }

    /// CSV with header `alpha,beta,lambda1,lambda2,lambda3,err1,err2,err3`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "beta", "lambda1", "lambda2", "lambda3", "err1", "err2", "err3"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for s in &self.samples {
            let val = |i: usize| s.eigenvalues.get(i).map_or(f64::NAN, |e| e.value);
            let err = |i: usize| s.eigenvalues.get(i).map_or(f64::NAN, |e| e.error);
            let row = [s.alpha, s.beta, val(0), val(1), val(2), err(0), err(1), err(2)];
            w.write_record(row.iter().map(|x| format!("{x:.16e}")))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One-sided slope of a branch with its error bar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OneSidedSlope {
    pub value: f64,
    pub error: f64,
}

/// Measured behaviour of `λ₂, λ₃` through the symmetric point of a level
/// curve, parametrized by `α = α_s + t`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitSlope {
    pub c: f64,
    pub alpha_s: f64,
    /// `(t, β, λ₁, λ₂, λ₃)` at each probe, ordered by `t`.
    pub probes: Vec<(f64, f64, f64, f64, f64)>,
    /// `d λ₂ / d|t|` for `t > 0` and `t < 0`.
    pub lambda2: [OneSidedSlope; 2],
    /// `d λ₃ / d|t|` for `t > 0` and `t < 0`.
    pub lambda3: [OneSidedSlope; 2],
    /// Branch derivatives from the boundary form on the eigenspace along
    /// `(1, B'(α_s))`.
    pub predicted: Vec<f64>,
    pub level_defect: f64,
}

/// Probe offsets of [`Continuation::split_slope`].
pub const SPLIT_OFFSETS: [f64; 3] = [1e-3, 2e-3, 4e-3];

/// `2 s₁₂ − s₂₄` from values at `τ, 2τ, 4τ`: the chord slopes drift
/// linearly in `τ`, so this removes the curvature term.
fn chord_slope(tau: f64, f: [f64; 3]) -> (f64, f64) {
    let s12 = (f[1] - f[0]) / tau;
    let s24 = (f[2] - f[1]) / (2.0 * tau);
    (2.0 * s12 - s24, s12)
}

/// One-sided slope from the h⁴-extrapolated values `fine` and the
/// h²-extrapolated values `coarse`. The error bar adds the removed
/// curvature term and the change between the two extrapolations.
fn one_sided(tau: f64, fine: [f64; 3], coarse: [f64; 3]) -> OneSidedSlope {
    let (value, s12) = chord_slope(tau, fine);
    let (value_coarse, _) = chord_slope(tau, coarse);
    OneSidedSlope {
        value,
        error: (value - s12).abs() + (value - value_coarse).abs(),
    }
}

impl Continuation {
    /// Slopes of `λ₂` and `λ₃` on both sides of the symmetric point, from
    /// corrected probes at `t = ±{1, 2, 4}·10⁻³`.
    pub fn split_slope(&self, c: f64) -> Result<SplitSlope> {
        if self.k < 3 {
            return Err(Error::Invalid("split slopes need k >= 3".into()));
        }
        let sym = self.symmetric_point(c)?;
        let a_s = sym.beta;
        let pair = sym
            .study
            .multiplet_of(1)
            .filter(|r| *r == (1..3))
            .ok_or_else(|| Error::Unresolved(format!("lambda2, lambda3 not a double multiplet at alpha = {a_s}")))?;
        let which = sym
            .study
            .multiplets
            .iter()
            .position(|r| *r == pair)
            .expect("multiplet located above");
        let (_, predicted) = hadamard_multiplet_extrapolated(&sym.study, which, (1.0, sym.slope()))?;
        let predicted: Vec<f64> = predicted.iter().map(|e| e.value).collect();

        let mut probes = vec![(0.0, a_s, sym.lambda1(), sym.study.estimates[1].value, sym.study.estimates[2].value)];
        let mut level_defect = (sym.lambda1() - c).abs();
        let mut sides = Vec::new();
        for sign in [1.0, -1.0] {
            let mut vals = Vec::new();
            let mut warm = sym.study.clone();
            for &tau in &SPLIT_OFFSETS {
                let t = sign * tau;
                let alpha = a_s + t;
                let sol = self.solve_beta(c, alpha, a_s + sym.slope() * t, Some(&warm))?;
                level_defect = level_defect.max((sol.lambda1() - c).abs());
                let e = &sol.study.estimates;
                probes.push((t, sol.beta, e[0].value, e[1].value, e[2].value));
                let lv = |l: usize| {
                    let v = &sol.study.levels[l].spectrum.eigenvalues;
                    [v[1], v[2]]
                };
                vals.push(([e[1].value, e[2].value], extrapolate_pair_two_level(lv(1), lv(2))));
                warm = sol.study;
            }
            let branch = |b: usize| {
                one_sided(
                    SPLIT_OFFSETS[0],
                    [vals[0].0[b], vals[1].0[b], vals[2].0[b]],
                    [vals[0].1[b], vals[1].1[b], vals[2].1[b]],
                )
            };
            sides.push((branch(0), branch(1)));
        }
        probes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(SplitSlope {
            c,
            alpha_s: a_s,
            probes,
            lambda2: [sides[0].0, sides[1].0],
            lambda3: [sides[0].1, sides[1].1],
            predicted,
            level_defect,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digon_endpoint_angles() {
        assert!((level_alpha_c(12.0).unwrap() - PI / 3.0).abs() < 1e-14);
        assert!((level_alpha_c(6.0).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!(level_alpha_c(2.0).is_err());
        assert!(level_alpha_c(1.0).is_err());
    }

    #[test]
    fn one_sided_slope_of_quadratic_is_exact() {
        let f = |t: f64| 30.0 - 12.0 * t + 40.0 * t * t;
        let tau = 1e-3;
        let f3 = [f(tau), f(2.0 * tau), f(4.0 * tau)];
        let s = one_sided(tau, f3, f3);
        assert!((s.value + 12.0).abs() < 1e-8, "{s:?}");
        assert!(s.error < 0.2);
    }

    #[test]
    fn quadratic_through_points() {
        let y = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x;
        let xs = [0.1, 0.4, 0.5];
        assert!((quadratic_through(xs, xs.map(y), 2.0) - y(2.0)).abs() < 1e-12);
    }

    fn coarse() -> Continuation {
        Continuation {
            disc: Discretization::new(8),
            ..Continuation::default()
        }
    }

    #[test]
    fn solve_beta_recovers_equirectangle() {
        let cont = coarse();
        let sol = cont.solve_beta(12.0, PI / 2.0, 1.4, None).unwrap();
        // The coarse study carries an O(1e-4) extrapolation error.
        assert!((sol.beta - PI / 2.0).abs() < 1e-3, "{}", sol.beta);
        assert!((sol.lambda1() - 12.0).abs() <= cont.level_tolerance(12.0));
        assert!(cont.solve_beta(12.0, 1.0, 1.5, None).is_err());
    }

    #[test]
    fn solve_beta_is_an_involution() {
        let cont = coarse();
        let b = cont.solve_beta(12.0, 2.0, 1.2, None).unwrap();
        let back = cont.solve_beta(12.0, b.beta, 2.1, None).unwrap();
        // T(α, β) and T(β, α) are meshed differently, so the two solves
        // agree only up to the extrapolation error.
        assert!((back.beta - 2.0).abs() < 1e-4, "{}", back.beta);
    }

    #[test]
    fn short_curve_is_decreasing_and_symmetric() {
        let curve = coarse().trace_curve(12.0, 5).unwrap();
        assert_eq!(curve.samples.len(), 5);
        assert!(curve.is_decreasing());
        let mid = &curve.samples[2];
        assert!((mid.alpha - mid.beta).abs() < 1e-12);
        assert!((curve.samples[0].alpha - curve.samples[4].beta).abs() < 1e-12);
        assert!(curve.level_defect() <= coarse().level_tolerance(12.0));
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,beta,lambda1,lambda2,lambda3,err1,err2,err3\n"));
        assert_eq!(text.lines().count(), 6);
        assert_eq!(curve.endpoints[0].eigenvalues.len(), 3);
        assert!((curve.endpoints[0].eigenvalues[1] - 20.0).abs() < 1e-12);
        let back = LevelCurve::read_csv(text.as_bytes(), None).unwrap();
        assert_eq!(back.c, 12.0);
        assert_eq!(back.samples.len(), 5);
        for (a, b) in back.samples.iter().zip(&curve.samples) {
            assert_eq!((a.alpha, a.beta), (b.alpha, b.beta));
            assert_eq!(a.eigenvalues[2].value, b.eigenvalues[2].value);
        }
    }

    #[test]
    fn level_is_the_simplest_consistent_decimal() {
        assert_eq!(infer_level(&[12.000_000_000_08, 11.999_999_999_99]), 12.0);
        assert_eq!(infer_level(&[12.5 + 3e-9]), 12.5);
        assert_eq!(infer_level(&[12.345_678]), 12.345_678);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let header = "alpha,beta,lambda1,lambda2,lambda3,err1,err2,err3\n";
        assert!(LevelCurve::read_csv("a,b\n1,2\n".as_bytes(), None).is_err());
        assert!(LevelCurve::read_csv(format!("{header}1,2,x,4,5,6,7,8\n").as_bytes(), None).is_err());
        assert!(LevelCurve::read_csv(format!("{header}1,2,3\n").as_bytes(), None).is_err());
        assert!(LevelCurve::read_csv(header.as_bytes(), None).is_err());
        assert!(LevelCurve::read_csv(header.as_bytes(), Some(12.0)).unwrap().samples.is_empty());
    }
}
