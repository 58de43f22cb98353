use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    side_length_dbeta_unchecked, side_length_dtheta_unchecked, side_length_unchecked, Digon,
    PolarPoint, Triangle,
};

/// Angles closer than this to `0` or `π` are rejected for triangles; those
/// degenerations are covered by the closed-form digon path.
pub const DEGENERACY_MARGIN: f64 = 1e-3;

/// A domain that can be meshed in the polar coordinates about `A*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Triangle(Triangle),
    Digon(Digon),
}

impl Domain {
    /// Opening of the `θ` range: `α` for a triangle, `π` for a digon.
    pub fn opening(&self) -> f64 {
        match self {
            Domain::Triangle(t) => t.alpha,
            Domain::Digon(_) => PI,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Domain::Triangle(t) => t.beta,
            Domain::Digon(d) => d.beta,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Domain::Triangle(t) => {
                for (name, v) in [("alpha", t.alpha), ("beta", t.beta)] {
                    if !(v >= DEGENERACY_MARGIN && v <= PI - DEGENERACY_MARGIN) {
                        return Err(Error::Domain {
                            name,
                            value: v,
                            expected: "[1e-3, pi - 1e-3] for meshed triangles",
                        });
                    }
                }
                Ok(())
            }
            Domain::Digon(d) => Digon::new(d.beta).map(|_| ()),
        }
    }

    /// Same domain with the angles moved by `(dα, dβ)`; digons only move in `β`.
    pub fn perturbed(&self, d_alpha: f64, d_beta: f64) -> Domain {
        match self {
            Domain::Triangle(t) => Domain::Triangle(Triangle {
                alpha: t.alpha + d_alpha,
                beta: t.beta + d_beta,
            }),
            Domain::Digon(d) => Domain::Digon(Digon {
                beta: d.beta + d_beta,
            }),
        }
    }
}

impl From<Triangle> for Domain {
    fn from(t: Triangle) -> Self {
        Domain::Triangle(t)
    }
}

impl From<Digon> for Domain {
    fn from(d: Digon) -> Self {
        Domain::Digon(d)
    }
}

/// Grading exponents of the tensor grid.
///
/// The radial lines sit at `u = (i/n)^radial`, refining toward `A*`; the
/// angular lines are graded symmetrically toward both sides `θ = 0` and
/// `θ = α` with exponent `angular`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grading {
    pub radial: f64,
    pub angular: f64,
}

impl Grading {
    pub fn uniform(gamma: f64) -> Self {
        Self {
            radial: gamma,
            angular: gamma,
        }
    }

    /// Default grading for a triangle: exponent 2, raised to 3 toward corners
    /// whose angle exceeds `π/2`. The radial direction serves the corner `A*`
    /// and the angular direction the corners `B*` and `C`.
    pub fn for_triangle(t: &Triangle) -> Self {
        let pick = |angle: f64| if angle > PI / 2.0 + 1e-12 { 3.0 } else { 2.0 };
        Self {
            radial: pick(t.alpha),
            angular: pick(t.beta.max(t.angle_c())),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.radial >= 1.0 && self.angular >= 1.0 && self.radial.is_finite() && self.angular.is_finite() {
            Ok(())
        } else {
            Err(Error::Mesh(format!(
                "grading exponents must be >= 1, got {self:?}"
            )))
        }
    }
}

impl Default for Grading {
    fn default() -> Self {
        Self::uniform(2.0)
    }
}

/// `u = x^γ`.
fn radial_grade(x: f64, gamma: f64) -> f64 {
    x.powf(gamma)
}

fn radial_ungrade(u: f64, gamma: f64) -> f64 {
    u.max(0.0).powf(1.0 / gamma)
}

/// Symmetric grading of `[0, 1]` toward both ends.
fn angular_grade(x: f64, gamma: f64) -> f64 {
    if x <= 0.5 {
        0.5 * (2.0 * x).powf(gamma)
    } else {
        1.0 - 0.5 * (2.0 * (1.0 - x)).powf(gamma)
    }
}

fn angular_ungrade(s: f64, gamma: f64) -> f64 {
    if s <= 0.5 {
        0.5 * (2.0 * s).max(0.0).powf(1.0 / gamma)
    } else {
        1.0 - 0.5 * (2.0 * (1.0 - s)).max(0.0).powf(1.0 / gamma)
    }
}

/// Logically rectangular grid on the reference square `[0,1]²` mapped onto
/// the domain by `(s, u) ↦ (θ, r) = (sα, u · L_β(sα))`.
///
/// Node `(i, j)` has reference coordinates `(s_i, u_j)` with `i` running over
/// the angular direction and `j` over the radial one.
#[derive(Debug, Clone)]
pub struct MappedMesh {
    pub domain: Domain,
    pub n_theta: usize,
    pub n_r: usize,
    pub grading: Grading,
    pub s_nodes: Vec<f64>,
    pub u_nodes: Vec<f64>,
}

/// Pointwise geometry of the map at reference coordinates `(s, u)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MapPoint {
    pub theta: f64,
    pub r: f64,
    /// `L_β(θ)`
    pub side: f64,
    /// `∂_θ L_β(θ)`
    pub side_dtheta: f64,
}

impl MappedMesh {
    pub fn new(domain: impl Into<Domain>, n_theta: usize, n_r: usize, grading: Grading) -> Result<Self> {
        let domain = domain.into();
        domain.validate()?;
        grading.validate()?;
        if n_theta < 4 || n_r < 4 {
            return Err(Error::Mesh(format!(
                "resolution too small: n_theta = {n_theta}, n_r = {n_r} (need >= 4)"
            )));
        }
        let s_nodes = (0..=n_theta)
            .map(|i| angular_grade(i as f64 / n_theta as f64, grading.angular))
            .collect();
        let u_nodes = (0..=n_r)
            .map(|j| radial_grade(j as f64 / n_r as f64, grading.radial))
            .collect();
        Ok(Self {
            domain,
            n_theta,
            n_r,
            grading,
            s_nodes,
            u_nodes,
        })
    }

    /// The same logical mesh mapped onto another domain.
    pub fn remapped(&self, domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            domain,
            ..self.clone()
        })
    }

    pub fn alpha(&self) -> f64 {
        self.domain.opening()
    }

    pub fn beta(&self) -> f64 {
        self.domain.beta()
    }

    pub fn node_count(&self) -> usize {
        (self.n_theta + 1) * (self.n_r + 1)
    }

    pub fn interior_count(&self) -> usize {
        (self.n_theta - 1) * (self.n_r - 1)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n_theta || j == self.n_r
    }

    /// Interior DOF index of node `(i, j)`, if it is not a boundary node.
    pub fn dof(&self, i: usize, j: usize) -> Option<usize> {
        if self.is_boundary(i, j) {
            None
        } else {
            Some((i - 1) * (self.n_r - 1) + (j - 1))
        }
    }

    /// Inverse of [`MappedMesh::dof`].
    pub fn node_of_dof(&self, k: usize) -> (usize, usize) {
        (k / (self.n_r - 1) + 1, k % (self.n_r - 1) + 1)
    }

    pub(crate) fn map_point(&self, s: f64, u: f64) -> MapPoint {
        let theta = s * self.alpha();
        let beta = self.beta();
        let side = side_length_unchecked(beta, theta);
        MapPoint {
            theta,
            r: u * side,
            side,
            side_dtheta: side_length_dtheta_unchecked(beta, theta),
        }
    }

    /// `∂_β L_β(θ)`.
    pub(crate) fn side_dbeta(&self, theta: f64) -> f64 {
        side_length_dbeta_unchecked(self.beta(), theta)
    }

    pub fn node_position(&self, i: usize, j: usize) -> PolarPoint {
        let p = self.map_point(self.s_nodes[i], self.u_nodes[j]);
        PolarPoint::new(p.r, p.theta)
    }

    /// Determinant of `∂(θ, r)/∂(s, u)` over element `(i, j)`, evaluated at
    /// its centre and scaled by the reference element area.
    pub fn element_jacobian(&self, i: usize, j: usize) -> f64 {
        let ds = self.s_nodes[i + 1] - self.s_nodes[i];
        let du = self.u_nodes[j + 1] - self.u_nodes[j];
        let p = self.map_point(0.5 * (self.s_nodes[i] + self.s_nodes[i + 1]), 0.0);
        self.alpha() * p.side * ds * du
    }

    pub fn min_jacobian(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n_theta {
            for j in 0..self.n_r {
                m = m.min(self.element_jacobian(i, j));
            }
        }
        m
    }

    /// Locate a point: returns the element `(i, j)` and local coordinates in
    /// `[0, 1]²`, or `None` if the point is outside the closed domain.
    pub fn locate(&self, p: PolarPoint) -> Option<((usize, usize), (f64, f64))> {
        let alpha = self.alpha();
        if !(p.theta >= 0.0 && p.theta <= alpha && p.r >= 0.0) {
            return None;
        }
        let side = side_length_unchecked(self.beta(), p.theta);
        if p.r > side {
            return None;
        }
        let s = p.theta / alpha;
        let u = p.r / side;
        let xi = angular_ungrade(s, self.grading.angular) * self.n_theta as f64;
        let eta = radial_ungrade(u, self.grading.radial) * self.n_r as f64;
        let i = (xi.floor() as usize).min(self.n_theta - 1);
        let j = (eta.floor() as usize).min(self.n_r - 1);
        let ls = ((s - self.s_nodes[i]) / (self.s_nodes[i + 1] - self.s_nodes[i])).clamp(0.0, 1.0);
        let lu = ((u - self.u_nodes[j]) / (self.u_nodes[j + 1] - self.u_nodes[j])).clamp(0.0, 1.0);
        Some(((i, j), (ls, lu)))
    }

    /// Extend interior DOF values by zero to all nodes, indexed `[i][j]`.
    pub fn nodal_values(&self, v: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(v.len(), self.interior_count());
        let mut out = vec![vec![0.0; self.n_r + 1]; self.n_theta + 1];
        for (k, &x) in v.iter().enumerate() {
            let (i, j) = self.node_of_dof(k);
            out[i][j] = x;
        }
        out
    }

    /// Interpolate a function at the interior nodes.
    pub fn interpolate(&self, f: impl Fn(PolarPoint) -> f64) -> Vec<f64> {
        (0..self.interior_count())
            .map(|k| {
                let (i, j) = self.node_of_dof(k);
                f(self.node_position(i, j))
            })
            .collect()
    }

    /// Evaluate the bilinear finite element function with interior values `v`.
    pub fn evaluate(&self, v: &[f64], p: PolarPoint) -> Option<f64> {
        let ((i, j), (a, b)) = self.locate(p)?;
        let val = |ii: usize, jj: usize| self.dof(ii, jj).map_or(0.0, |k| v[k]);
        Some(
            (1.0 - a) * (1.0 - b) * val(i, j)
                + a * (1.0 - b) * val(i + 1, j)
                + a * b * val(i + 1, j + 1)
                + (1.0 - a) * b * val(i, j + 1),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn octant_mesh_counts() {
        let m = MappedMesh::new(Triangle::octant(), 8, 8, Grading::uniform(1.0)).unwrap();
        assert_eq!(m.node_count(), 81);
        assert_eq!(m.interior_count(), 49);
    }

    #[test]
    fn radial_nodes_follow_power_law() {
        let m = MappedMesh::new(Triangle::octant(), 8, 8, Grading::uniform(2.0)).unwrap();
        for i in 0..=8 {
            for j in 0..=8 {
                let p = m.node_position(i, j);
                let want = (j as f64 / 8.0).powi(2) * FRAC_PI_2;
                assert!((p.r - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobians_positive_on_skewed_triangle() {
        let t = Triangle::new(1.0, 2.5).unwrap();
        let m = MappedMesh::new(t, 64, 64, Grading::uniform(2.0)).unwrap();
        assert!(m.min_jacobian() > 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let t = Triangle::octant();
        assert!(MappedMesh::new(t, 3, 8, Grading::default()).is_err());
        assert!(MappedMesh::new(t, 8, 8, Grading::uniform(0.5)).is_err());
        let thin = Triangle::new(5e-4, 1.0).unwrap();
        assert!(MappedMesh::new(thin, 8, 8, Grading::default()).is_err());
    }

    #[test]
    fn boundary_flags_and_dofs_round_trip() {
        let m = MappedMesh::new(Triangle::new(1.2, 1.9).unwrap(), 6, 5, Grading::default()).unwrap();
        for k in 0..m.interior_count() {
            let (i, j) = m.node_of_dof(k);
            assert!(!m.is_boundary(i, j));
            assert_eq!(m.dof(i, j), Some(k));
        }
        assert_eq!(m.dof(0, 2), None);
        assert_eq!(m.dof(3, 5), None);
    }

    #[test]
    fn grading_inverse() {
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            for g in [1.0, 2.0, 3.0, 2.5] {
                assert!((angular_ungrade(angular_grade(x, g), g) - x).abs() < 1e-12);
                assert!((radial_ungrade(radial_grade(x, g), g) - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolant_is_reproduced_at_nodes() {
        let m = MappedMesh::new(Triangle::new(1.3, 2.1).unwrap(), 10, 12, Grading::default()).unwrap();
        let f = |p: PolarPoint| p.r.sin() * p.theta.cos();
        let v = m.interpolate(f);
        for k in (0..m.interior_count()).step_by(7) {
            let (i, j) = m.node_of_dof(k);
            let p = m.node_position(i, j);
            assert!((m.evaluate(&v, p).unwrap() - v[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grading_rule() {
        let g = Grading::for_triangle(&Triangle::octant());
        assert_eq!(g, Grading::uniform(2.0));
        let g = Grading::for_triangle(&Triangle::new(2.0, 1.0).unwrap());
        assert_eq!(g.radial, 3.0);
    }
}
