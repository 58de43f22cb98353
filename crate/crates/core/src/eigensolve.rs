//! Smallest eigenpairs of `K u = λ M u` by shift-invert block subspace
//! iteration with Rayleigh–Ritz projection.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{Domain, GeneralizedEigenproblem};
use crate::richardson::Estimate;
use crate::sparse::BandCholesky;

/// Relative gap below which consecutive eigenvalues are reported as one
/// multiplet.
pub const MULTIPLET_REL_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative residual `‖Ku − λMu‖ / (λ ‖Mu‖)` required for every pair.
    pub tol: f64,
    /// Block size; defaults to `2k + 2`.
    pub block: Option<usize>,
    pub max_iter: usize,
    /// Seed of the random part of the starting block.
    pub seed: u64,
    /// Optional starting vectors (e.g. eigenvectors of a nearby problem on
    /// the same logical mesh).
    pub initial: Option<Vec<Vec<f64>>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            block: None,
            max_iter: 500,
            seed: 0x5eed_1234,
            initial: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Converged eigenpairs, ascending, with `M`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Index ranges of numerically coincident eigenvalues.
    pub multiplets: Vec<Range<usize>>,
    pub iterations: usize,
    /// Richardson-improved eigenvalues, filled in by a mesh study.
    pub extrapolated: Option<Vec<Estimate>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Multiplet containing eigenvalue `index` (0-based).
    pub fn multiplet_of(&self, index: usize) -> Option<Range<usize>> {
        self.multiplets.iter().find(|r| r.contains(&index)).cloned()
    }

    /// Regroup eigenvalues into multiplets with a coarser relative gap.
    pub fn regroup(&mut self, rel_gap: f64) {
        self.multiplets = group_multiplets(&self.eigenvalues, rel_gap);
    }

    /// `M`-orthonormal basis of multiplet `which`, re-orthonormalized by
    /// modified Gram–Schmidt (two passes).
    pub fn eigenspace_basis(&self, problem: &GeneralizedEigenproblem, which: usize) -> Result<Vec<Vec<f64>>> {
        let range = self
            .multiplets
            .get(which)
            .cloned()
            .ok_or(Error::IndexOutOfRange {
                index: which,
                len: self.multiplets.len(),
            })?;
        let mut basis: Vec<Vec<f64>> = range.map(|i| self.eigenvectors[i].clone()).collect();
        for _ in 0..2 {
            for a in 0..basis.len() {
                for b in 0..a {
                    let c = problem.mass.bilinear(&basis[a], &basis[b]);
                    let (head, tail) = basis.split_at_mut(a);
                    for (x, y) in tail[0].iter_mut().zip(&head[b]) {
                        *x -= c * y;
                    }
                }
                let norm = problem.mass.bilinear(&basis[a], &basis[a]).sqrt();
                basis[a].iter_mut().for_each(|x| *x /= norm);
            }
        }
        Ok(basis)
    }
}

pub(crate) fn group_multiplets(values: &[f64], rel_gap: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i] - values[i - 1]).abs() >= rel_gap * values[i].abs().max(values[i - 1].abs());
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `Σ_k cols[k] · w[k, j]` for each column `j` of `w`.
fn combine(cols: &[Vec<f64>], w: &DMatrix<f64>, take: usize) -> Vec<Vec<f64>> {
    let n = cols[0].len();
    (0..take)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; n];
            for (k, c) in cols.iter().enumerate() {
                let wk = w[(k, j)];
                if wk != 0.0 {
                    for (o, x) in out.iter_mut().zip(c) {
                        *o += wk * x;
                    }
                }
            }
            out
        })
        .collect()
}

/// Solve the small pencil `(A, B)` with `B` symmetric positive definite.
/// Returns ascending eigenvalues and `B`-orthonormal eigenvectors.
fn small_generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Unresolved("Ritz basis lost linear independence".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Unresolved("Ritz basis lost linear independence".into()))?;
    let mut c = &l_inv * a * l_inv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let q = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, l_inv.transpose() * q))
}

/// The `k` smallest eigenpairs of the pencil, shift-inverted at `σ = 0`.
pub fn solve_smallest(problem: &GeneralizedEigenproblem, k: usize, opts: &SolveOptions) -> Result<Spectrum> {
    let n = problem.dim();
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if !(opts.tol > 0.0 && opts.tol <= 1e-4) {
        return Err(Error::Invalid(format!("tolerance {} outside (0, 1e-4]", opts.tol)));
    }
    let p = opts.block.unwrap_or(2 * k + 2).max(k + 2).min(n);
    if k > n || p <= k && p < n {
        return Err(Error::Invalid(format!("k = {k} too large for dimension {n}")));
    }
    let chol = BandCholesky::factor(&problem.stiffness)?;
    let (kmat, mmat) = (&problem.stiffness, &problem.mass);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(p);
    if let Some(init) = &opts.initial {
        for v in init.iter().take(p) {
            if v.len() != n {
                return Err(Error::Invalid("initial vector has wrong length".into()));
            }
            x.push(v.clone());
        }
    }
    while x.len() < p {
        x.push((0..n).map(|_| rng.gen::<f64>() - 0.5).collect());
    }
    let mut mx: Vec<Vec<f64>> = x.par_iter().map(|v| mmat.mul_vec(v)).collect();

    let mut best = vec![f64::INFINITY; k];
    for iter in 1..=opts.max_iter {
        let y: Vec<Vec<f64>> = mx
            .par_iter()
            .map(|b| {
                let mut v = b.clone();
                chol.solve_in_place(&mut v);
                v
            })
            .collect();
        let my: Vec<Vec<f64>> = y.par_iter().map(|v| mmat.mul_vec(v)).collect();
        // K Y = M X, so the projected stiffness is Yᵀ M X.
        let a = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &mx[j]) + dot(&y[j], &mx[i])));
        let b = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let (theta, w) = small_generalized_eigen(&a, &b)?;
        let kx = combine(&mx, &w, p);
        mx = combine(&my, &w, p);
        x = combine(&y, &w, p);

        let residuals: Vec<f64> = (0..k)
            .into_par_iter()
            .map(|i| {
                let r: Vec<f64> = kx[i].iter().zip(&mx[i]).map(|(a, b)| a - theta[i] * b).collect();
                norm(&r) / (theta[i].abs() * norm(&mx[i]))
            })
            .collect();
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = b.min(*r);
        }
        if residuals.iter().all(|&r| r <= opts.tol) {
            let mut vectors: Vec<Vec<f64>> = x.into_iter().take(k).collect();
            for v in vectors.iter_mut() {
                let nrm = mmat.bilinear(v, v).sqrt();
                v.iter_mut().for_each(|c| *c /= nrm);
                normalize_sign(problem, v);
            }
            let eigenvalues: Vec<f64> = theta[..k].to_vec();
            let multiplets = group_multiplets(&eigenvalues, MULTIPLET_REL_GAP);
            // Guard against a factor that silently lost definiteness.
            debug_assert!(kmat.bilinear(&vectors[0], &vectors[0]) > 0.0);
            return Ok(Spectrum {
                eigenvalues,
                eigenvectors: vectors,
                residuals,
                multiplets,
                iterations: iter,
                extrapolated: None,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residuals: best,
    })
}

/// Fix the sign so that the value at the node nearest the incenter is
/// positive. Falls back to the entry of largest magnitude when that node
/// sits on a nodal line.
fn normalize_sign(problem: &GeneralizedEigenproblem, v: &mut [f64]) {
    let mesh = &problem.mesh;
    let target = match mesh.domain {
        Domain::Triangle(t) => t.incenter(),
        Domain::Digon(_) => mesh.node_position(mesh.n_theta / 2, mesh.n_r / 2),
    };
    let mut nearest = 0;
    let mut best = f64::INFINITY;
    for k in 0..v.len() {
        let (i, j) = mesh.node_of_dof(k);
        let p = mesh.node_position(i, j);
        let d = (p.r - target.r).powi(2) + (p.r.sin() * (p.theta - target.theta)).powi(2);
        if d < best {
            best = d;
            nearest = k;
        }
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let pivot = if v[nearest].abs() > 1e-6 * vmax {
        v[nearest]
    } else {
        v.iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m })
    };
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_mesh, Grading, MappedMesh};
    use crate::geometry::Triangle;

    fn dense_generalized(problem: &GeneralizedEigenproblem) -> Vec<f64> {
        let n = problem.dim();
        let kd = problem.stiffness.to_dense();
        let md = problem.mass.to_dense();
        let a = DMatrix::from_fn(n, n, |i, j| kd[i][j]);
        let b = DMatrix::from_fn(n, n, |i, j| md[i][j]);
        small_generalized_eigen(&a, &b).unwrap().0
    }

    #[test]
    fn matches_dense_oracle_on_coarse_mesh() {
        let mesh = build_mesh(Triangle::new(1.3, 2.1).unwrap(), 10, 10, 2.0).unwrap();
        let p = assemble(&mesh).unwrap();
        let s = solve_smallest(&p, 2, &SolveOptions::with_tol(1e-11)).unwrap();
        let dense = dense_generalized(&p);
        for i in 0..2 {
            assert!((s.eigenvalues[i] - dense[i]).abs() < 1e-10 * dense[i], "{} vs {}", s.eigenvalues[i], dense[i]);
        }
        assert!(s.residuals.iter().all(|&r| r <= 1e-11));
    }

    #[test]
    fn eigenvectors_are_mass_orthonormal() {
        let mesh = MappedMesh::new(Triangle::octant(), 16, 16, Grading::default()).unwrap();
        let p = assemble(&mesh).unwrap();
        let s = solve_smallest(&p, 3, &SolveOptions::default()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let g = p.mass.bilinear(&s.eigenvectors[i], &s.eigenvectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10);
            }
        }
        assert!(s.eigenvalues[0] < s.eigenvalues[1]);
        // smallest Ritz value positive: K positive definite
        assert!(s.eigenvalues[0] > 0.0);
    }

    #[test]
    fn deterministic_across_runs() {
        let mesh = build_mesh(Triangle::new(1.1, 1.4).unwrap(), 12, 12, 2.0).unwrap();
        let p = assemble(&mesh).unwrap();
        let a = solve_smallest(&p, 2, &SolveOptions::default()).unwrap();
        let b = solve_smallest(&p, 2, &SolveOptions::default()).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn ground_state_sign_convention() {
        let mesh = build_mesh(Triangle::new(1.2, 1.9).unwrap(), 12, 12, 2.0).unwrap();
        let p = assemble(&mesh).unwrap();
        let s = solve_smallest(&p, 1, &SolveOptions::default()).unwrap();
        let v = &s.eigenvectors[0];
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(*x));
        let vmin = v.iter().fold(0.0f64, |m, x| m.min(*x));
        assert!(vmax > 0.0 && vmin > -1e-3 * vmax, "min {vmin}, max {vmax}");
    }

    #[test]
    fn rejects_bad_requests() {
        let mesh = build_mesh(Triangle::octant(), 6, 6, 1.0).unwrap();
        let p = assemble(&mesh).unwrap();
        assert!(solve_smallest(&p, 0, &SolveOptions::default()).is_err());
        assert!(solve_smallest(&p, 2, &SolveOptions::with_tol(1e-2)).is_err());
        assert!(solve_smallest(&p, 40, &SolveOptions::default()).is_err());
    }

    #[test]
    fn multiplet_grouping() {
        let g = group_multiplets(&[12.0, 30.0, 30.0 + 1e-9, 56.0], 1e-6);
        assert_eq!(g, vec![0..1, 1..3, 3..4]);
        let g = group_multiplets(&[12.0, 30.0, 30.01, 56.0], 1e-6);
        assert_eq!(g.len(), 4);
    }
}
