use super::assemble::GAUSS3;
use super::mesh::MappedMesh;
use crate::error::{Error, Result};

/// Samples of `∂_θ u` on the side `θ = α`, at composite Gauss points in `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSideSample {
    pub r: f64,
    /// Quadrature weight for `dr`.
    pub weight: f64,
    pub d_theta: f64,
}

/// Samples of `∂_r u` and `∂_θ u` on the side `r = L_β(θ)`, at composite
/// Gauss points in `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSideSample {
    pub theta: f64,
    /// `L_β(θ)`
    pub r: f64,
    /// Quadrature weight for `dθ`.
    pub weight: f64,
    pub d_r: f64,
    pub d_theta: f64,
    /// `∂_β L_β(θ)`
    pub side_dbeta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTraces {
    pub alpha_side: Vec<AlphaSideSample>,
    pub beta_side: Vec<BetaSideSample>,
}

/// Derivative at `x0` of the quadratic through `(x0,f0), (x1,f1), (x2,f2)`.
fn one_sided_derivative(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[0];
    -(h1 + h2) / (h1 * h2) * f[0] + h2 / (h1 * (h2 - h1)) * f[1] - h1 / (h2 * (h2 - h1)) * f[2]
}

/// One-sided second-order estimates of the first derivatives of the finite
/// element function `v` on the two moving sides of the domain.
///
/// Along `θ = α` the function vanishes, so only the normal difference in `s`
/// contributes and `∂_θ u = ∂_s u / α`. Along `u = 1` the tangential
/// derivative vanishes and both `∂_r u = ∂_u u / L` and
/// `∂_θ u = −L' ∂_u u / L` follow from the normal difference in `u`.
pub fn boundary_trace_derivatives(mesh: &MappedMesh, v: &[f64]) -> Result<BoundaryTraces> {
    if v.len() != mesh.interior_count() {
        return Err(Error::Trace(format!(
            "vector has length {}, mesh has {} interior nodes",
            v.len(),
            mesh.interior_count()
        )));
    }
    if mesh.n_theta < 4 || mesh.n_r < 4 {
        return Err(Error::Trace("mesh too coarse for the boundary stencil".into()));
    }
    let nodal = mesh.nodal_values(v);
    let alpha = mesh.alpha();
    let (nt, nr) = (mesh.n_theta, mesh.n_r);

    // Side θ = α: nodal normal derivatives in s along each radial node.
    let s_stencil = [mesh.s_nodes[nt], mesh.s_nodes[nt - 1], mesh.s_nodes[nt - 2]];
    let ds_nodal: Vec<f64> = (0..=nr)
        .map(|j| one_sided_derivative(s_stencil, [nodal[nt][j], nodal[nt - 1][j], nodal[nt - 2][j]]))
        .collect();
    let side_alpha = mesh.map_point(1.0, 1.0).side;
    let mut alpha_side = Vec::with_capacity(3 * nr);
    for j in 0..nr {
        let (u0, du) = (mesh.u_nodes[j], mesh.u_nodes[j + 1] - mesh.u_nodes[j]);
        for &(a, w) in &GAUSS3 {
            let ds_val = (1.0 - a) * ds_nodal[j] + a * ds_nodal[j + 1];
            alpha_side.push(AlphaSideSample {
                r: (u0 + a * du) * side_alpha,
                weight: w * du * side_alpha,
                d_theta: ds_val / alpha,
            });
        }
    }

    // Side u = 1.
    let u_stencil = [mesh.u_nodes[nr], mesh.u_nodes[nr - 1], mesh.u_nodes[nr - 2]];
    let du_nodal: Vec<f64> = (0..=nt)
        .map(|i| one_sided_derivative(u_stencil, [nodal[i][nr], nodal[i][nr - 1], nodal[i][nr - 2]]))
        .collect();
    let mut beta_side = Vec::with_capacity(3 * nt);
    for i in 0..nt {
        let (s0, ds) = (mesh.s_nodes[i], mesh.s_nodes[i + 1] - mesh.s_nodes[i]);
        for &(a, w) in &GAUSS3 {
            let p = mesh.map_point(s0 + a * ds, 1.0);
            let du_val = (1.0 - a) * du_nodal[i] + a * du_nodal[i + 1];
            beta_side.push(BetaSideSample {
                theta: p.theta,
                r: p.side,
                weight: w * ds * alpha,
                d_r: du_val / p.side,
                d_theta: -p.side_dtheta * du_val / p.side,
                side_dbeta: mesh.side_dbeta(p.theta),
            });
        }
    }
    Ok(BoundaryTraces {
        alpha_side,
        beta_side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::Grading;
    use crate::geometry::{octant_eigenfunction, OctantMode, Triangle};
    use std::f64::consts::PI;

    #[test]
    fn quadratic_stencil_is_exact() {
        let f = |x: f64| 3.0 - 2.0 * x + 5.0 * x * x;
        let x = [1.0, 0.93, 0.81];
        let d = one_sided_derivative(x, x.map(f));
        assert!((d - (-2.0 + 10.0)).abs() < 1e-10);
    }

    #[test]
    fn zero_vector_has_zero_traces() {
        let mesh = MappedMesh::new(Triangle::new(1.2, 1.9).unwrap(), 8, 8, Grading::default()).unwrap();
        let tr = boundary_trace_derivatives(&mesh, &vec![0.0; mesh.interior_count()]).unwrap();
        assert!(tr.alpha_side.iter().all(|s| s.d_theta == 0.0));
        assert!(tr.beta_side.iter().all(|s| s.d_r == 0.0 && s.d_theta == 0.0));
        assert!(boundary_trace_derivatives(&mesh, &[1.0]).is_err());
    }

    fn max_trace_errors(n: usize) -> (f64, f64) {
        let mesh = MappedMesh::new(Triangle::octant(), n, n, Grading::default()).unwrap();
        let c1 = (1155.0 / (8.0 * PI)).sqrt();
        let c2 = (3465.0 / (32.0 * PI)).sqrt();
        let v1 = mesh.interpolate(|p| octant_eigenfunction(OctantMode::U1, p));
        let v2 = mesh.interpolate(|p| octant_eigenfunction(OctantMode::U2, p));
        let t1 = boundary_trace_derivatives(&mesh, &v1).unwrap();
        let t2 = boundary_trace_derivatives(&mesh, &v2).unwrap();
        let e1 = t1
            .alpha_side
            .iter()
            .map(|s| {
                let c = s.r.cos();
                let want = -2.0 * c1 * (3.0 * c.powi(5) - 4.0 * c.powi(3) + c);
                (s.d_theta - want).abs()
            })
            .fold(0.0, f64::max);
        let e2 = t2
            .beta_side
            .iter()
            .map(|s| (s.d_r + c2 * (4.0 * s.theta).sin()).abs())
            .fold(0.0, f64::max);
        (e1, e2)
    }

    #[test]
    fn octant_traces_converge_at_second_order() {
        let (a1, b1) = max_trace_errors(32);
        let (a2, b2) = max_trace_errors(64);
        // amplitudes of the exact traces are about 6.8 and 5.9
        assert!(a2 < 0.02 && b2 < 0.06, "{a2} {b2}");
        assert!(a1 / a2 > 3.5, "alpha side ratio {}", a1 / a2);
        assert!(b1 / b2 > 3.5, "beta side ratio {}", b1 / b2);
    }
}
