use rayon::prelude::*;

use super::mesh::MappedMesh;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// 3-point Gauss–Legendre rule on `[0, 1]`.
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Discretized Dirichlet problem `K u = λ M u` on the interior nodes.
///
/// `K` discretizes `q(u) = ∫ (|∂_r u|² + |∂_θ u|²/sin²r) sin r dr dθ` and
/// `M` the Riemannian L² form `n(u) = ∫ u² sin r dr dθ`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenproblem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub mesh: MappedMesh,
}

impl GeneralizedEigenproblem {
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// Rayleigh quotient `vᵀKv / vᵀMv`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        self.stiffness.bilinear(v, v) / self.mass.bilinear(v, v)
    }
}

type ElementMatrices = ([[f64; 4]; 4], [[f64; 4]; 4]);

/// Local node order: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
const LOCAL: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

fn element_matrices(mesh: &MappedMesh, i: usize, j: usize) -> Result<ElementMatrices> {
    let alpha = mesh.alpha();
    let (s0, s1) = (mesh.s_nodes[i], mesh.s_nodes[i + 1]);
    let (u0, u1) = (mesh.u_nodes[j], mesh.u_nodes[j + 1]);
    let (ds, du) = (s1 - s0, u1 - u0);
    let mut ke = [[0.0; 4]; 4];
    let mut me = [[0.0; 4]; 4];
    for &(a, wa) in &GAUSS3 {
        for &(b, wb) in &GAUSS3 {
            let s = s0 + a * ds;
            let u = u0 + b * du;
            let p = mesh.map_point(s, u);
            let det = alpha * p.side * ds * du;
            if !(det > 0.0) {
                return Err(Error::SingularJacobian(i, j));
            }
            let w = wa * wb * det;
            let sin_r = p.r.sin();
            // Bilinear shape functions on the unit square and their
            // derivatives with respect to (s, u).
            let phi = [(1.0 - a) * (1.0 - b), a * (1.0 - b), a * b, (1.0 - a) * b];
            let d_s = [-(1.0 - b) / ds, (1.0 - b) / ds, b / ds, -b / ds];
            let d_u = [-(1.0 - a) / du, -a / du, a / du, (1.0 - a) / du];
            let mut d_r = [0.0; 4];
            let mut d_t = [0.0; 4];
            for k in 0..4 {
                d_r[k] = d_u[k] / p.side;
                d_t[k] = d_s[k] / alpha - u * p.side_dtheta * d_u[k] / p.side;
            }
            for k in 0..4 {
                for l in 0..4 {
                    ke[k][l] += w * (d_r[k] * d_r[l] * sin_r + d_t[k] * d_t[l] / sin_r);
                    me[k][l] += w * phi[k] * phi[l] * sin_r;
                }
            }
        }
    }
    Ok((ke, me))
}

fn stencil_pattern(mesh: &MappedMesh) -> Vec<Vec<usize>> {
    (0..mesh.interior_count())
        .map(|k| {
            let (i, j) = mesh.node_of_dof(k);
            let mut cols = Vec::with_capacity(9);
            for ii in i - 1..=i + 1 {
                for jj in j - 1..=j + 1 {
                    if let Some(c) = mesh.dof(ii, jj) {
                        cols.push(c);
                    }
                }
            }
            cols.sort_unstable();
            cols
        })
        .collect()
}

/// Assemble stiffness and mass matrices with Dirichlet conditions imposed by
/// eliminating the boundary nodes.
///
/// Element matrices are computed in parallel and scattered in a fixed
/// element order, so the result does not depend on the thread schedule.
pub fn assemble(mesh: &MappedMesh) -> Result<GeneralizedEigenproblem> {
    let elements: Vec<(usize, usize)> = (0..mesh.n_theta)
        .flat_map(|i| (0..mesh.n_r).map(move |j| (i, j)))
        .collect();
    let locals: Vec<ElementMatrices> = elements
        .par_iter()
        .map(|&(i, j)| element_matrices(mesh, i, j))
        .collect::<Result<_>>()?;

    let pattern = stencil_pattern(mesh);
    let mut k_mat = CsrMatrix::from_pattern(pattern);
    let mut m_mat = k_mat.clone();
    for (&(i, j), (ke, me)) in elements.iter().zip(&locals) {
        let dofs = LOCAL.map(|(di, dj)| mesh.dof(i + di, j + dj));
        for a in 0..4 {
            let Some(ra) = dofs[a] else { continue };
            for b in 0..4 {
                let Some(cb) = dofs[b] else { continue };
                k_mat.add(ra, cb, ke[a][b]);
                m_mat.add(ra, cb, me[a][b]);
            }
        }
    }
    Ok(GeneralizedEigenproblem {
        stiffness: k_mat,
        mass: m_mat,
        mesh: mesh.clone(),
    })
}

/// Riemannian area of the mapped domain by the same element quadrature.
pub fn mesh_area(mesh: &MappedMesh) -> f64 {
    let alpha = mesh.alpha();
    let mut area = 0.0;
    for i in 0..mesh.n_theta {
        for j in 0..mesh.n_r {
            let (s0, ds) = (mesh.s_nodes[i], mesh.s_nodes[i + 1] - mesh.s_nodes[i]);
            let (u0, du) = (mesh.u_nodes[j], mesh.u_nodes[j + 1] - mesh.u_nodes[j]);
            for &(a, wa) in &GAUSS3 {
                for &(b, wb) in &GAUSS3 {
                    let p = mesh.map_point(s0 + a * ds, u0 + b * du);
                    area += wa * wb * alpha * p.side * ds * du * p.r.sin();
                }
            }
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::Grading;
    use crate::geometry::{octant_ground_state, Triangle};
    use std::f64::consts::PI;

    #[test]
    fn matrices_are_symmetric() {
        for t in [Triangle::octant(), Triangle::new(1.3, 2.1).unwrap()] {
            let mesh = MappedMesh::new(t, 12, 10, Grading::default()).unwrap();
            let p = assemble(&mesh).unwrap();
            assert!(p.stiffness.asymmetry() < 1e-13 * p.stiffness.max_abs().max(1.0));
            assert!(p.mass.asymmetry() < 1e-13);
            assert_eq!(p.dim(), mesh.interior_count());
        }
    }

    #[test]
    fn octant_area() {
        let mesh = MappedMesh::new(Triangle::octant(), 64, 64, Grading::default()).unwrap();
        assert!((mesh_area(&mesh) - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_vector_mass_below_area() {
        let mesh = MappedMesh::new(Triangle::octant(), 64, 64, Grading::default()).unwrap();
        let p = assemble(&mesh).unwrap();
        let ones = vec![1.0; p.dim()];
        let m = p.mass.bilinear(&ones, &ones);
        assert!(m < PI / 2.0 && m > 0.9 * PI / 2.0);
    }

    #[test]
    fn ground_state_rayleigh_quotient() {
        let mesh = MappedMesh::new(Triangle::octant(), 128, 128, Grading::default()).unwrap();
        let p = assemble(&mesh).unwrap();
        let v = mesh.interpolate(octant_ground_state);
        let rq = p.rayleigh_quotient(&v);
        assert!((rq - 12.0).abs() < 0.002 * 12.0, "rq = {rq}");
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = MappedMesh::new(Triangle::new(1.1, 1.7).unwrap(), 16, 16, Grading::default()).unwrap();
        let a = assemble(&mesh).unwrap();
        let b = assemble(&mesh).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert_eq!(a.mass, b.mass);
    }
}
