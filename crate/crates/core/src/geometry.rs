//! Closed-form geometry of the spherical triangles `T(α, β)`.
//!
//! A triangle is described in polar coordinates `(r, θ)` centred at the
//! vertex `A*`: `r` is the geodesic distance from `A*` and `θ` the angle
//! measured from the side `A*B*`, whose length is fixed to `π/2`. The
//! triangle is then
//!
//! ```text
//! T(α, β) = { (r, θ) : 0 < θ < α, 0 < r < L_β(θ) },   L_β(θ) = arccot(cot β · sin θ)
//! ```
//!
//! and the Riemannian area element is `sin r dr dθ`. Letting `α → π` turns
//! the triangle into the digon (lune) of opening `β`, which is why digons are
//! meshed through the same side function.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// `arccot` with values in `(0, π)`.
#[inline]
pub fn arccot(x: f64) -> f64 {
    FRAC_PI_2 - x.atan()
}

fn check_open_angle(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < PI {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "(0, pi)",
        })
    }
}

/// Spherical triangle with one side of length `π/2` and adjacent angles
/// `alpha` (at `A*`) and `beta` (at `B*`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Triangle {
    pub alpha: f64,
    pub beta: f64,
}

impl Triangle {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open_angle("alpha", alpha)?;
        check_open_angle("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    /// The equirectangle triangle, i.e. one eighth of the sphere.
    pub fn octant() -> Self {
        Self {
            alpha: FRAC_PI_2,
            beta: FRAC_PI_2,
        }
    }

    /// Reflection across the median plane of `A*B*`; isometric to `self`.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Geodesic length of the side `A*C`.
    pub fn side_ac(&self) -> f64 {
        side_length_unchecked(self.beta, self.alpha)
    }

    /// Vertices `A*`, `B*`, `C` embedded in the unit sphere, with `A*` at the
    /// north pole and `B*` on the positive x-axis.
    pub fn vertices(&self) -> [[f64; 3]; 3] {
        let l = self.side_ac();
        [
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [l.sin() * self.alpha.cos(), l.sin() * self.alpha.sin(), l.cos()],
        ]
    }

    /// Interior angle at the third vertex `C`.
    pub fn angle_c(&self) -> f64 {
        // Spherical law of cosines for angles, with the side A*B* = π/2.
        let (a, b) = (self.alpha, self.beta);
        (-a.cos() * b.cos()).acos()
    }

    /// Spherical incenter, in polar coordinates about `A*`.
    pub fn incenter(&self) -> PolarPoint {
        let [a, b, c] = self.vertices();
        let side = |p: [f64; 3], q: [f64; 3]| dot(p, q).clamp(-1.0, 1.0).acos();
        // Weights are the sines of the opposite sides.
        let wa = side(b, c).sin();
        let wb = side(a, c).sin();
        let wc = side(a, b).sin();
        let v = [
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ];
        PolarPoint::from_direction(v)
    }

    pub fn contains(&self, p: PolarPoint) -> bool {
        p.theta > 0.0
            && p.theta < self.alpha
            && p.r > 0.0
            && p.r < side_length_unchecked(self.beta, p.theta)
    }
}

fn dot(p: [f64; 3], q: [f64; 3]) -> f64 {
    p[0] * q[0] + p[1] * q[1] + p[2] * q[2]
}

/// Digon (spherical lune) of opening angle `beta ∈ (0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Digon {
    pub beta: f64,
}

impl Digon {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta <= PI {
            Ok(Self { beta })
        } else {
            Err(Error::Domain {
                name: "beta",
                value: beta,
                expected: "(0, pi]",
            })
        }
    }
}

/// Point in polar coordinates about `A*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    /// Polar coordinates of the direction of a (nonzero) vector of `R³`.
    pub fn from_direction(v: [f64; 3]) -> Self {
        let norm = dot(v, v).sqrt();
        let r = (v[2] / norm).clamp(-1.0, 1.0).acos();
        let mut theta = v[1].atan2(v[0]);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        Self { r, theta }
    }

    pub fn to_direction(self) -> [f64; 3] {
        let s = self.r.sin();
        [s * self.theta.cos(), s * self.theta.sin(), self.r.cos()]
    }
}

/// `L_β(θ) = arccot(cot β sin θ)`, the distance from `A*` to the side `B*C`
/// along the ray of angle `θ`.
pub fn side_length(beta: f64, theta: f64) -> Result<f64> {
    check_open_angle("beta", beta)?;
    Ok(side_length_unchecked(beta, theta))
}

#[inline]
pub(crate) fn side_length_unchecked(beta: f64, theta: f64) -> f64 {
    if beta == PI {
        // Hemisphere boundary limit, used by digons of full opening.
        return PI;
    }
    arccot(cot(beta) * theta.sin())
}

/// `∂_β L_β(θ)`.
pub fn side_length_dbeta(beta: f64, theta: f64) -> Result<f64> {
    check_open_angle("beta", beta)?;
    Ok(side_length_dbeta_unchecked(beta, theta))
}

#[inline]
pub(crate) fn side_length_dbeta_unchecked(beta: f64, theta: f64) -> f64 {
    let sb = beta.sin();
    let x = cot(beta) * theta.sin();
    theta.sin() / (sb * sb * (1.0 + x * x))
}

/// `∂_θ L_β(θ)`.
#[inline]
pub(crate) fn side_length_dtheta_unchecked(beta: f64, theta: f64) -> f64 {
    if beta == PI {
        return 0.0;
    }
    let c = cot(beta);
    let x = c * theta.sin();
    -c * theta.cos() / (1.0 + x * x)
}

#[inline]
fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// `d(T, T') = max(|α − α'|, |β − β'|)`.
pub fn triangle_distance(t: &Triangle, other: &Triangle) -> f64 {
    (t.alpha - other.alpha)
        .abs()
        .max((t.beta - other.beta).abs())
}

/// Which of the two explicit eigenfunctions spanning the `λ = 30` eigenspace
/// of the octant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OctantMode {
    U1,
    U2,
}

impl OctantMode {
    pub fn from_index(which: usize) -> Result<Self> {
        match which {
            1 => Ok(Self::U1),
            2 => Ok(Self::U2),
            _ => Err(Error::Invalid(format!(
                "octant eigenfunction index must be 1 or 2, got {which}"
            ))),
        }
    }
}

/// L²-orthonormal eigenfunctions of the `λ = 30` eigenspace of the octant:
///
/// ```text
/// u₁ = √(1155/8π) (3cos⁵r − 4cos³r + cos r) sin 2θ
/// u₂ = √(3465/32π) cos r sin⁴r sin 4θ
/// ```
pub fn octant_eigenfunction(which: OctantMode, p: PolarPoint) -> f64 {
    let c = p.r.cos();
    match which {
        OctantMode::U1 => {
            let n = (1155.0 / (8.0 * PI)).sqrt();
            n * (3.0 * c.powi(5) - 4.0 * c.powi(3) + c) * (2.0 * p.theta).sin()
        }
        OctantMode::U2 => {
            let n = (3465.0 / (32.0 * PI)).sqrt();
            n * c * p.r.sin().powi(4) * (4.0 * p.theta).sin()
        }
    }
}

/// Normalized ground state of the octant (`λ = 12`): the harmonic `xyz`,
/// i.e. `N sin²r cos r sin 2θ` with `N² = 105/(2π)`.
pub fn octant_ground_state(p: PolarPoint) -> f64 {
    let n = (105.0 / (2.0 * PI)).sqrt();
    n * p.r.sin().powi(2) * p.r.cos() * (2.0 * p.theta).sin()
}

/// First Dirichlet eigenvalue of the digon, `μ(β) = (π/β)(π/β + 1)`.
pub fn digon_eigenvalue_first(d: Digon) -> Result<f64> {
    let d = Digon::new(d.beta)?;
    let x = PI / d.beta;
    Ok(x * (x + 1.0))
}

/// The `count` smallest Dirichlet eigenvalues of the digon, with multiplicity.
///
/// Separation of variables about the axis through the two vertices gives
/// the eigenvalues `ν(ν + 1)` with `ν = kπ/β + m`, `k ≥ 1`, `m ≥ 0`.
pub fn digon_spectrum(d: Digon, count: usize) -> Result<Vec<f64>> {
    let d = Digon::new(d.beta)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let step = PI / d.beta;
    // The k = 1 column alone supplies `count` values up to this bound, so
    // every value below it must be enumerated.
    let nu_max = step + (count - 1) as f64;
    let mut values = Vec::new();
    let mut k = 1usize;
    while k as f64 * step <= nu_max * (1.0 + 1e-15) {
        let mut m = 0usize;
        loop {
            let nu = k as f64 * step + m as f64;
            if nu > nu_max * (1.0 + 1e-15) {
                break;
            }
            values.push(nu * (nu + 1.0));
            m += 1;
        }
        k += 1;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    values.truncate(count);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn side_length_examples() {
        assert!((side_length(FRAC_PI_2, 0.7).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((side_length(1.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-14);
        // mpmath, 40 digits
        let expected = 1.183_199_640_139_715_965_6;
        assert!((side_length(PI / 3.0, FRAC_PI_4).unwrap() - expected).abs() < 1e-14);
        assert!(side_length(0.0, 0.3).is_err());
        assert!(side_length(PI, 0.3).is_err());
    }

    #[test]
    fn side_length_even_about_half_pi() {
        for i in 1..40 {
            let beta = i as f64 * PI / 40.0;
            for j in 0..=40 {
                let theta = j as f64 * PI / 40.0;
                let a = side_length(beta, theta).unwrap();
                let b = side_length(beta, PI - theta).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dbeta_examples_and_fd() {
        assert!((side_length_dbeta(FRAC_PI_2, 0.3).unwrap() - 0.3f64.sin()).abs() < 1e-15);
        assert_eq!(side_length_dbeta(FRAC_PI_2, 0.0).unwrap(), 0.0);
        let h = 1e-5;
        let fd = (side_length(1.2 + h, 0.9).unwrap() - side_length(1.2 - h, 0.9).unwrap()) / (2.0 * h);
        assert!((side_length_dbeta(1.2, 0.9).unwrap() - fd).abs() < 1e-8);
        for i in 1..=20 {
            let beta = 0.1 + 2.9 * i as f64 / 21.0;
            for j in 0..20 {
                let theta = PI * j as f64 / 19.0;
                let fd = (side_length(beta + h, theta).unwrap()
                    - side_length(beta - h, theta).unwrap())
                    / (2.0 * h);
                assert!((side_length_dbeta(beta, theta).unwrap() - fd).abs() < 1e-7);
                let fdt = (side_length_unchecked(beta, theta + h)
                    - side_length_unchecked(beta, theta - h))
                    / (2.0 * h);
                assert!((side_length_dtheta_unchecked(beta, theta) - fdt).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let t = |a, b| Triangle::new(a, b).unwrap();
        assert_eq!(triangle_distance(&t(1.0, 2.0), &t(1.0, 2.0)), 0.0);
        assert!((triangle_distance(&t(1.0, 2.0), &t(1.5, 2.2)) - 0.5).abs() < 1e-15);
        assert!(
            (triangle_distance(&t(FRAC_PI_2, FRAC_PI_2), &t(PI / 3.0, FRAC_PI_2)) - PI / 6.0).abs()
                < 1e-15
        );
    }

    #[test]
    fn octant_eigenfunction_zeros() {
        let v = octant_eigenfunction(OctantMode::U1, PolarPoint::new(FRAC_PI_2, 0.4));
        assert!(v.abs() < 1e-15);
        let v = octant_eigenfunction(OctantMode::U2, PolarPoint::new(0.8, FRAC_PI_4));
        assert!(v.abs() < 1e-14);
        assert!(OctantMode::from_index(3).is_err());
    }

    #[test]
    fn digon_first_eigenvalue() {
        let mu = |b: f64| digon_eigenvalue_first(Digon::new(b).unwrap()).unwrap();
        assert!((mu(PI) - 2.0).abs() < 1e-14);
        assert!((mu(PI / 3.0) - 12.0).abs() < 1e-12);
        assert!((mu(FRAC_PI_2) - 6.0).abs() < 1e-13);
        assert!(Digon::new(0.0).is_err());
        assert!(Digon::new(3.2).is_err());
    }

    #[test]
    fn digon_spectrum_examples() {
        let s = digon_spectrum(Digon::new(PI / 3.0).unwrap(), 2).unwrap();
        assert!((s[0] - 12.0).abs() < 1e-12 && (s[1] - 20.0).abs() < 1e-12);
        let s = digon_spectrum(Digon::new(PI).unwrap(), 1).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-12);
        // hemisphere: ν = k + m gives 2, 6, 6, 12, 12, 12
        let s = digon_spectrum(Digon::new(PI).unwrap(), 6).unwrap();
        let want = [2.0, 6.0, 6.0, 12.0, 12.0, 12.0];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn incenter_of_octant_is_symmetric() {
        let p = Triangle::octant().incenter();
        assert!((p.theta - FRAC_PI_4).abs() < 1e-12);
        // direction (1,1,1)/√3
        assert!((p.r - (1.0f64 / 3.0f64.sqrt()).acos()).abs() < 1e-12);
        assert!((Triangle::octant().angle_c() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn vertex_c_lies_on_both_sides() {
        let t = Triangle::new(1.1, 2.3).unwrap();
        let c = PolarPoint::from_direction(t.vertices()[2]);
        assert!((c.theta - t.alpha).abs() < 1e-12);
        assert!((c.r - side_length(t.beta, t.alpha).unwrap()).abs() < 1e-12);
    }
}
