//! Three-level Richardson extrapolation of eigenvalues on nested meshes.
//!
//! Each study solves the same domain on `N`, `2N` and `4N` elements per
//! direction and removes the `h²` and `h⁴` error terms. The mesh breaks the
//! symmetries that make eigenvalues coincide, so nearly coincident pairs are
//! extrapolated through their symmetric functions `λ + λ'` and `(λ' − λ)²`,
//! which stay smooth in `h` even where the sorted eigenvalues do not.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::{solve_smallest, SolveOptions, Spectrum, MULTIPLET_REL_GAP};
use crate::error::{Error, Result};
use crate::fem::{assemble, Domain, GeneralizedEigenproblem, Grading, MappedMesh};

/// An extrapolated quantity with an error estimate and the observed
/// convergence order of the raw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// `log₂((a − b)/(b − c))`; `None` when the differences do not shrink
    /// monotonically.
    pub order: Option<f64>,
}

/// Extrapolate a sequence on meshes `N`, `2N`, `4N`, assuming an expansion
/// in even powers of `h`.
///
/// The error estimate is the size of the removed `h⁴` correction, which
/// bounds the residual error whenever the expansion is asymptotic.
pub fn extrapolate(a: f64, b: f64, c: f64) -> Estimate {
    let r2 = (4.0 * c - b) / 3.0;
    let r3 = (64.0 * c - 20.0 * b + a) / 45.0;
    let ratio = (a - b) / (b - c);
    let order = (ratio.is_finite() && ratio > 1.0).then(|| ratio.log2());
    Estimate {
        value: r3,
        error: (r3 - r2).abs() + 4.0 * f64::EPSILON * c.abs(),
        order,
    }
}

/// Extrapolate a pair of nearly coincident eigenvalues through the
/// invariants `S = λ + λ'` and `P = (λ' − λ)²`.
pub fn extrapolate_pair(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [Estimate; 2] {
    let sum = |x: [f64; 2]| x[0] + x[1];
    let sq = |x: [f64; 2]| (x[1] - x[0]).powi(2);
    let s = extrapolate(sum(a), sum(b), sum(c));
    let p = extrapolate(sq(a), sq(b), sq(c));
    let half_gap = 0.5 * p.value.max(0.0).sqrt();
    // An error δ in P moves √P by at most √δ, and by at most δ/√P once P ≥ δ.
    let gap_error = if p.value >= p.error {
        p.error / p.value.sqrt()
    } else {
        p.error.sqrt()
    };
    let error = 0.5 * s.error + 0.5 * gap_error;
    let lo = Estimate {
        value: 0.5 * s.value - half_gap,
        error,
        order: s.order,
    };
    [lo, Estimate { value: 0.5 * s.value + half_gap, ..lo }]
}

/// Two-level variant of [`extrapolate_pair`] that removes only the `h²`
/// term from the two finest meshes. Comparing the two gives error bars for
/// quantities derived from pairs.
pub fn extrapolate_pair_two_level(b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let r2 = |x: f64, y: f64| (4.0 * y - x) / 3.0;
    let s = r2(b[0] + b[1], c[0] + c[1]);
    let p = r2((b[1] - b[0]).powi(2), (c[1] - c[0]).powi(2));
    let half_gap = 0.5 * p.max(0.0).sqrt();
    [0.5 * s - half_gap, 0.5 * s + half_gap]
}

/// Pairs `(i, i+1)` whose gap on the finest mesh is below twice the change
/// between the two finest meshes: their sorted labels are not reliable.
fn close_pairs(b: &[f64], c: &[f64]) -> Vec<usize> {
    let mut pairs = Vec::new();
    let mut i = 0;
    while i + 1 < c.len() {
        let drift = (b[i] - c[i]).abs().max((b[i + 1] - c[i + 1]).abs());
        if c[i + 1] - c[i] < 2.0 * drift {
            pairs.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    pairs
}

/// Extrapolate the `k` lowest eigenvalues from three nested levels.
pub fn extrapolate_levels(a: &[f64], b: &[f64], c: &[f64]) -> Vec<Estimate> {
    let mut out: Vec<Estimate> = (0..c.len()).map(|i| extrapolate(a[i], b[i], c[i])).collect();
    for i in close_pairs(b, c) {
        let pick = |x: &[f64]| [x[i], x[i + 1]];
        let [lo, hi] = extrapolate_pair(pick(a), pick(b), pick(c));
        out[i] = lo;
        out[i + 1] = hi;
    }
    out
}

/// Group extrapolated eigenvalues that coincide within their error bars or
/// within the relative multiplet gap.
pub fn group_estimates(est: &[Estimate]) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=est.len() {
        let split = i == est.len() || {
            let gap = est[i].value - est[i - 1].value;
            let scale = est[i].value.abs().max(est[i - 1].value.abs());
            gap > MULTIPLET_REL_GAP * scale && gap > est[i].error + est[i - 1].error
        };
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Mesh family used for a study: levels `base_n · {1, 2, 4}` per direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discretization {
    pub base_n: usize,
    /// Fixed grading; `None` picks [`Grading::for_triangle`] from the domain.
    pub grading: Option<Grading>,
    pub tol: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            base_n: 16,
            grading: None,
            tol: 1e-10,
        }
    }
}

/// One mesh level of a study.
#[derive(Debug, Clone)]
pub struct Level {
    pub problem: GeneralizedEigenproblem,
    pub spectrum: Spectrum,
}

/// Spectra on three nested meshes and their extrapolation.
#[derive(Debug, Clone)]
pub struct ExtrapolatedSpectrum {
    pub domain: Domain,
    pub levels: Vec<Level>,
    pub estimates: Vec<Estimate>,
    /// Groups of estimates that coincide within their error bars. The same
    /// ranges are stored on every level so that eigenspace bases can be
    /// taken level by level.
    pub multiplets: Vec<Range<usize>>,
}

impl ExtrapolatedSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().expect("a study has three levels")
    }

    pub fn multiplet_of(&self, index: usize) -> Option<Range<usize>> {
        self.multiplets.iter().find(|r| r.contains(&index)).cloned()
    }

    /// Extrapolate a per-level scalar computed from each level.
    pub fn extrapolate_with(&self, f: impl Fn(&Level) -> Result<f64> + Sync) -> Result<Estimate> {
        let v: Vec<f64> = self.levels.par_iter().map(&f).collect::<Result<_>>()?;
        Ok(extrapolate(v[0], v[1], v[2]))
    }
}

impl Discretization {
    pub fn new(base_n: usize) -> Self {
        Self {
            base_n,
            ..Self::default()
        }
    }

    pub fn level_sizes(&self) -> [usize; 3] {
        [self.base_n, 2 * self.base_n, 4 * self.base_n]
    }

    pub fn grading_for(&self, domain: &Domain) -> Grading {
        match (self.grading, domain) {
            (Some(g), _) => g,
            (None, Domain::Triangle(t)) => Grading::for_triangle(t),
            (None, Domain::Digon(_)) => Grading::default(),
        }
    }

    /// Solve `domain` on three nested meshes with the grading chosen for it.
    pub fn solve(&self, domain: impl Into<Domain>, k: usize) -> Result<ExtrapolatedSpectrum> {
        let domain = domain.into();
        let grading = self.grading_for(&domain);
        self.solve_graded(domain, k, grading, None)
    }

    /// Solve with an explicit grading, optionally warm-started from a study
    /// of a nearby domain on the same meshes.
    pub fn solve_graded(
        &self,
        domain: Domain,
        k: usize,
        grading: Grading,
        warm: Option<&ExtrapolatedSpectrum>,
    ) -> Result<ExtrapolatedSpectrum> {
        if self.base_n < 4 {
            return Err(Error::Mesh(format!("base resolution {} below 4", self.base_n)));
        }
        let levels: Vec<Level> = self
            .level_sizes()
            .into_par_iter()
            .enumerate()
            .map(|(l, n)| {
                let mesh = MappedMesh::new(domain, n, n, grading)?;
                let problem = assemble(&mesh)?;
                let mut opts = SolveOptions::with_tol(self.tol);
                opts.initial = warm
                    .and_then(|w| w.levels.get(l))
                    .filter(|w| w.problem.dim() == problem.dim())
                    .map(|w| w.spectrum.eigenvectors.clone());
                let spectrum = solve_smallest(&problem, k, &opts)?;
                Ok(Level { problem, spectrum })
            })
            .collect::<Result<_>>()?;
        let vals: Vec<&[f64]> = levels.iter().map(|l| l.spectrum.eigenvalues.as_slice()).collect();
        let estimates = extrapolate_levels(vals[0], vals[1], vals[2]);
        let multiplets = group_estimates(&estimates);
        let mut levels = levels;
        for l in &mut levels {
            l.spectrum.multiplets = multiplets.clone();
        }
        if let Some(finest) = levels.last_mut() {
            finest.spectrum.extrapolated = Some(estimates.clone());
        }
        Ok(ExtrapolatedSpectrum {
            domain,
            levels,
            estimates,
            multiplets,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{digon_spectrum, Digon, Triangle};
    use proptest::prelude::*;

    #[test]
    fn removes_second_and_fourth_order_terms() {
        let f = |h: f64| 7.0 + 3.0 * h * h - 5.0 * h.powi(4) + 0.5 * h.powi(6);
        let e = extrapolate(f(0.1), f(0.05), f(0.025));
        assert!((e.value - 7.0).abs() < 1e-8);
        assert!((e.order.unwrap() - 2.0).abs() < 0.1);
        assert!(e.error >= (e.value - 7.0).abs());
    }

    #[test]
    fn pair_invariants_recover_split_limit() {
        // Two branches 30 ± g with a mesh splitting that flips their order.
        let branch = |h: f64, s: f64| 30.0 + s * 0.01 + 2.0 * h * h + s * 0.8 * h * h;
        let lv = |h: f64| {
            let mut x = [branch(h, -1.0), branch(h, 1.0)];
            x.sort_by(f64::total_cmp);
            x
        };
        let [lo, hi] = extrapolate_pair(lv(0.2), lv(0.1), lv(0.05));
        assert!((lo.value - 29.99).abs() < 1e-6, "{lo:?}");
        assert!((hi.value - 30.01).abs() < 1e-6, "{hi:?}");
    }

    #[test]
    fn octant_spectrum_extrapolates_to_multiplet() {
        let s = Discretization::new(16).solve(Triangle::octant(), 3).unwrap();
        let v = s.values();
        assert!((v[0] - 12.0).abs() < 1e-4, "{v:?}");
        assert!((v[1] - 30.0).abs() < 1e-2 && (v[2] - 30.0).abs() < 1e-2, "{v:?}");
        assert_eq!(s.multiplets, vec![0..1, 1..3]);
        let p = s.estimates[0].order.unwrap();
        assert!((1.7..2.3).contains(&p), "order {p}");
        assert!(s.finest().spectrum.extrapolated.is_some());
    }

    #[test]
    fn digon_matches_closed_form() {
        let d = Digon::new(2.0).unwrap();
        let s = Discretization::new(16).solve(d, 4).unwrap();
        let exact = digon_spectrum(d, 4).unwrap();
        for (e, x) in s.estimates.iter().zip(&exact) {
            assert!((e.value - x).abs() < 1e-3 * x, "{} vs {x}", e.value);
        }
    }

    #[test]
    fn warm_start_reproduces_cold_result() {
        let disc = Discretization::new(8);
        let t = Triangle::new(1.4, 1.7).unwrap();
        let g = Grading::default();
        let near = disc.solve_graded(Triangle::new(1.41, 1.7).unwrap().into(), 2, g, None).unwrap();
        let cold = disc.solve_graded(t.into(), 2, g, None).unwrap();
        let warm = disc.solve_graded(t.into(), 2, g, Some(&near)).unwrap();
        for (a, b) in cold.values().iter().zip(warm.values()) {
            assert!((a - b).abs() < 1e-8 * a);
        }
        assert!(warm.finest().spectrum.iterations < cold.finest().spectrum.iterations);
    }

    proptest! {
        #[test]
        fn exact_quadratic_sequences_are_reproduced(x in -50.0f64..50.0, c2 in -10.0f64..10.0, h in 0.01f64..0.5) {
            let f = |h: f64| x + c2 * h * h;
            let e = extrapolate(f(h), f(h / 2.0), f(h / 4.0));
            prop_assert!((e.value - x).abs() < 1e-9 * (1.0 + x.abs() + c2.abs()));
        }

        #[test]
        fn grouping_is_a_partition(vals in proptest::collection::vec(1.0f64..100.0, 1..8)) {
            let mut v = vals.clone();
            v.sort_by(f64::total_cmp);
            let est: Vec<Estimate> = v.iter().map(|&value| Estimate { value, error: 1e-3, order: None }).collect();
            let g = group_estimates(&est);
            prop_assert_eq!(g.first().unwrap().start, 0);
            prop_assert_eq!(g.last().unwrap().end, v.len());
            for w in g.windows(2) {
                prop_assert_eq!(w[0].end, w[1].start);
            }
        }
    }
}
