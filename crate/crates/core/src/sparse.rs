//! Compressed sparse row storage and a banded Cholesky factorization.
//!
//! The assembled problems live on a tensor grid with a nine-point stencil, so
//! with row-major interior numbering the bandwidth equals the number of
//! interior nodes per grid line plus one. A band factorization is exact, has
//! no pivoting and is deterministic.

use crate::error::{Error, Result};

/// Square sparse matrix in CSR format holding both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from a per-row list of (sorted, unique) column indices; values
    /// start at zero.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    /// Add `v` to entry `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[k] * y[self.col_idx[k]];
            }
            acc += xi * row;
        }
        acc
    }

    /// `self + c · other`; both must share the sparsity pattern.
    pub fn add_scaled(&self, c: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.col_idx, other.col_idx, "sparsity patterns differ");
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v += c * w;
        }
        out
    }

    pub fn scale(&self, c: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `max |A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Half bandwidth: `max |i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    /// Dense copy; only meant for small problems and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Lower-triangle entries `(i, j, v)` with `j ≤ i`, row by row.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .filter(move |&(j, _)| j <= i)
                .map(move |(j, v)| (i, j, v))
        })
    }
}

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // Row i holds L[i, i-bw ..= i] at offsets 0..=bw (offset bw is the diagonal).
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for (i, j, v) in a.lower_entries() {
            data[i * w + (j + bw - i)] = v;
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                // L[i,j] = (A[i,j] - Σ_k L[i,k] L[j,k]) / L[j,j], k ∈ [max(i,j)-bw, j)
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = data[i * w + (j + bw - i)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Factorization { pivot: i, value: s });
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + (j + bw - i)] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let base = i * w + bw - i;
            let mut s = x[i];
            for j in j0..i {
                s -= self.data[base + j] * x[j];
            }
            x[i] = s / self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= self.data[i * w + bw];
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            let base = i * w + bw - i;
            for j in j0..i {
                x[j] -= self.data[base + j] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect::<Vec<_>>()
            })
            .collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn band_cholesky_solves_tridiagonal() {
        let a = laplacian_1d(50);
        let chol = BandCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        chol.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = laplacian_1d(10).scale(-1.0);
        assert!(matches!(
            BandCholesky::factor(&a),
            Err(Error::Factorization { pivot: 0, .. })
        ));
    }

    #[test]
    fn wide_band_matches_dense_solution() {
        // 2D five-point Laplacian on a 6x7 grid, row-major
        let (nx, ny) = (6, 7);
        let idx = |i: usize, j: usize| i * ny + j;
        let mut rows = vec![Vec::new(); nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let r = &mut rows[idx(i, j)];
                if i > 0 {
                    r.push(idx(i - 1, j));
                }
                if j > 0 {
                    r.push(idx(i, j - 1));
                }
                r.push(idx(i, j));
                if j + 1 < ny {
                    r.push(idx(i, j + 1));
                }
                if i + 1 < nx {
                    r.push(idx(i + 1, j));
                }
            }
        }
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..nx {
            for j in 0..ny {
                a.add(idx(i, j), idx(i, j), 4.1);
                if i + 1 < nx {
                    a.add(idx(i, j), idx(i + 1, j), -1.0);
                    a.add(idx(i + 1, j), idx(i, j), -1.0);
                }
                if j + 1 < ny {
                    a.add(idx(i, j), idx(i, j + 1), -1.0);
                    a.add(idx(i, j + 1), idx(i, j), -1.0);
                }
            }
        }
        assert_eq!(a.bandwidth(), ny);
        let chol = BandCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..nx * ny).map(|k| 1.0 + k as f64).collect();
        let mut x = b.clone();
        chol.solve_in_place(&mut x);
        let r = a.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
        assert!(a.asymmetry() == 0.0);
    }
}
