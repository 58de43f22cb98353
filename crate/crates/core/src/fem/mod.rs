//! Bilinear finite elements on the polar tensor grid of a spherical triangle
//! or digon.

mod assemble;
mod mesh;
mod trace;

use std::io::Write;

pub use assemble::{assemble, mesh_area, GeneralizedEigenproblem};
pub use mesh::{Domain, Grading, MappedMesh, DEGENERACY_MARGIN};
pub use trace::{boundary_trace_derivatives, AlphaSideSample, BetaSideSample, BoundaryTraces};

use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Build the mapped mesh of a triangle or digon.
pub fn build_mesh(domain: impl Into<Domain>, n_theta: usize, n_r: usize, gamma: f64) -> Result<MappedMesh> {
    MappedMesh::new(domain, n_theta, n_r, Grading::uniform(gamma))
}

/// Write the lower triangle of a symmetric matrix in MatrixMarket
/// coordinate format (1-based indices).
pub fn write_matrix_market<W: Write>(matrix: &CsrMatrix, mut out: W) -> Result<()> {
    let entries: Vec<_> = matrix.lower_entries().collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", matrix.dim(), matrix.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Triangle;

    #[test]
    fn matrix_market_header_and_counts() {
        let mesh = build_mesh(Triangle::octant(), 4, 4, 1.0).unwrap();
        let p = assemble(&mesh).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&p.stiffness, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real symmetric"));
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(dims[0], 9);
        assert_eq!(dims[2], lines.count());
        // 3x3 interior grid, nine-point stencil: 9 diagonal + 20 strictly lower
        assert_eq!(dims[2], 29);
    }
}
