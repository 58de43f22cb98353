use serde::Serialize;

use super::heat::ConeSpectrum;
use super::rational::{rationality_check, Rational, RationalityVerdict, Verdict};
use crate::continuation::LevelCurve;
use crate::error::{Error, Result};

/// Ladder entries closer than this are merged.
pub const LADDER_DEDUP: f64 = 1e-9;

/// A candidate decay exponent `√(λ_j + (d/2 − 1)²) + k`. Which candidates
/// carry a nonzero coefficient in the expansion is not known, so every
/// entry is only a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderEntry {
    pub value: f64,
    /// 1-based eigenvalue index.
    pub j: usize,
    /// Positive integer shift.
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentLadder {
    pub dimension: usize,
    pub entries: Vec<LadderEntry>,
}

/// `√(λ + (d/2 − 1)²)`.
pub fn bessel_order(lambda: f64, d: usize) -> f64 {
    (lambda + (d as f64 / 2.0 - 1.0).powi(2)).sqrt()
}

/// All candidates `√(λ_j + (d/2 − 1)²) + k ≤ cutoff`, sorted, with
/// near-duplicates merged into the entry of smallest `j`.
pub fn ladder_candidates(eigenvalues: &[f64], d: usize, cutoff: f64) -> Vec<LadderEntry> {
    let mut all = Vec::new();
    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        let base = bessel_order(lambda, d);
        let mut k = 1u32;
        while base + k as f64 <= cutoff + LADDER_DEDUP {
            all.push(LadderEntry {
                value: base + k as f64,
                j: idx + 1,
                k,
            });
            k += 1;
        }
    }
    all.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.j.cmp(&b.j)));
    let mut out: Vec<LadderEntry> = Vec::with_capacity(all.len());
    for e in all {
        match out.last_mut() {
            Some(prev) if e.value - prev.value <= LADDER_DEDUP => {
                if e.j < prev.j {
                    *prev = e;
                }
            }
            _ => out.push(e),
        }
    }
    out
}

/// The first `depth` candidate exponents of a cone.
///
/// Entries up to `√(λ_max + (d/2 − 1)²) + 1` are complete: any eigenvalue
/// not yet computed only contributes above that bound.
pub fn exponent_ladder(cone: &ConeSpectrum, depth: usize) -> Result<ExponentLadder> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    let d = cone.dimension();
    let eigenvalues = match cone.available() {
        Some(n) => cone.eigenvalues(n)?,
        // Arc spectra are unlimited: the j-th order alone exceeds the first
        // `depth` integers above the first order once j > depth.
        None => cone.eigenvalues(depth + 1)?,
    };
    let Some(&lambda_max) = eigenvalues.last() else {
        return Err(Error::InsufficientEigenvalues { needed: 1, available: 0 });
    };
    let cutoff = bessel_order(lambda_max, d) + 1.0;
    let mut entries = ladder_candidates(&eigenvalues, d, cutoff);
    if entries.len() < depth {
        return Err(Error::InsufficientEigenvalues {
            needed: depth,
            available: entries.len(),
        });
    }
    entries.truncate(depth);
    Ok(ExponentLadder { dimension: d, entries })
}

/// Exponent of the excursion asymptotics, `−√(λ₁ + (d/2 − 1)²) − 1`.
pub fn excursion_exponent(lambda1: f64, d: usize) -> Result<f64> {
    if !(lambda1 > 0.0) || d == 0 {
        return Err(Error::Invalid(format!("need lambda1 > 0 and d >= 1, got {lambda1}, {d}")));
    }
    Ok(-bessel_order(lambda1, d) - 1.0)
}

/// Planar excursion exponent `−π/arccos(−r) − 1` for a wedge of opening
/// `arccos(−r)`.
pub fn arc_exponent(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            expected: "|r| < 1",
        });
    }
    Ok(-std::f64::consts::PI / (-r).acos() - 1.0)
}

/// One ladder entry with its rationality verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub value: f64,
    pub j: usize,
    pub k: u32,
    pub verdict: Verdict,
    pub best_rational: Rational,
    pub distance: f64,
}

/// Rationality report for one curve sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Extrapolation error of `λ₂`; it dwarfs the rationality tolerance.
    pub lambda2_error: f64,
    pub ladder: Vec<ScanEntry>,
    /// Position of the first entry flagged non-rational, if any.
    pub first_non_rational: Option<usize>,
}

/// Settings of [`rationality_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub dimension: usize,
    pub depth: usize,
    pub q_max: u64,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            dimension: 3,
            depth: 6,
            q_max: 1000,
            tol: 1e-9,
        }
    }
}

fn scan_entry(e: &LadderEntry, v: RationalityVerdict) -> ScanEntry {
    ScanEntry {
        value: e.value,
        j: e.j,
        k: e.k,
        verdict: v.verdict,
        best_rational: v.best_rational,
        distance: v.distance,
    }
}

/// For each sample, the two-eigenvalue ladder built from `λ₁ = c` (the
/// level value, exact by construction) and the computed `λ₂`, with a
/// rationality verdict per entry.
pub fn rationality_scan(curve: &LevelCurve, opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    if opts.depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    curve
        .samples
        .iter()
        .map(|s| {
            let lambda2 = s
                .eigenvalues
                .get(1)
                .ok_or(Error::InsufficientEigenvalues {
                    needed: 2,
                    available: s.eigenvalues.len(),
                })?;
            let pair = [curve.c, lambda2.value];
            // Enough rungs of the λ₁ ladder alone to fill `depth`.
            let cutoff = bessel_order(curve.c, opts.dimension) + opts.depth as f64;
            let mut entries = ladder_candidates(&pair, opts.dimension, cutoff);
            entries.truncate(opts.depth);
            let ladder = entries
                .iter()
                .map(|e| Ok(scan_entry(e, rationality_check(e.value, opts.q_max, opts.tol)?)))
                .collect::<Result<Vec<_>>>()?;
            let first_non_rational = ladder.iter().position(|e| !e.verdict.is_rational());
            Ok(ScanRecord {
                alpha: s.alpha,
                beta: s.beta,
                lambda1: s.eigenvalues[0].value,
                lambda2: lambda2.value,
                lambda2_error: lambda2.error,
                ladder,
                first_non_rational,
            })
        })
        .collect()
}
