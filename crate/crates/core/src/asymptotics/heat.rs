use std::f64::consts::PI;

use serde::Serialize;

use super::bessel::{bessel_i, BESSEL_MAX_ARG};
use crate::error::{Error, Result};
use crate::fem::{Domain, MappedMesh};
use crate::geometry::PolarPoint;
use crate::richardson::ExtrapolatedSpectrum;

/// Dirichlet spectrum of the section of a cone by the unit sphere.
#[derive(Debug, Clone)]
pub enum ConeSpectrum {
    /// Planar wedge of opening `β`: `λ_j = (jπ/β)²`, with normalized modes
    /// `√(2/β) sin(jπθ/β)` on the arc.
    Arc { beta: f64 },
    /// Cone over a spherical triangle, from a finite element study.
    /// Eigenfunctions are evaluated by bilinear interpolation on the mesh.
    Spherical {
        eigenvalues: Vec<f64>,
        mesh: MappedMesh,
        eigenvectors: Vec<Vec<f64>>,
    },
}

impl ConeSpectrum {
    pub fn arc(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0 * PI) {
            return Err(Error::Domain {
                name: "beta",
                value: beta,
                expected: "(0, 2 pi]",
            });
        }
        Ok(ConeSpectrum::Arc { beta })
    }

    /// Extrapolated eigenvalues with the eigenvectors of the finest mesh.
    pub fn from_study(study: &ExtrapolatedSpectrum) -> Result<Self> {
        if !matches!(study.domain, Domain::Triangle(_)) {
            return Err(Error::Invalid("three-dimensional cones are built over triangles".into()));
        }
        let finest = study.finest();
        Ok(ConeSpectrum::Spherical {
            eigenvalues: study.values(),
            mesh: finest.problem.mesh.clone(),
            eigenvectors: finest.spectrum.eigenvectors.clone(),
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            ConeSpectrum::Arc { .. } => 2,
            ConeSpectrum::Spherical { .. } => 3,
        }
    }

    /// Number of eigenpairs available; `None` when unlimited.
    pub fn available(&self) -> Option<usize> {
        match self {
            ConeSpectrum::Arc { .. } => None,
            ConeSpectrum::Spherical { eigenvalues, .. } => Some(eigenvalues.len()),
        }
    }

    /// The `count` smallest eigenvalues.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            ConeSpectrum::Arc { beta } => Ok((1..=count).map(|j| (j as f64 * PI / beta).powi(2)).collect()),
            ConeSpectrum::Spherical { eigenvalues, .. } => {
                if count > eigenvalues.len() {
                    return Err(Error::InsufficientEigenvalues {
                        needed: count,
                        available: eigenvalues.len(),
                    });
                }
                Ok(eigenvalues[..count].to_vec())
            }
        }
    }

    /// Angular coordinate of a point on the section, or `OutsideCone`.
    fn section_point(&self, x: &[f64]) -> Result<SectionPoint> {
        if x.len() != self.dimension() {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, cone is {}-dimensional",
                x.len(),
                self.dimension()
            )));
        }
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::OutsideCone);
        }
        match self {
            ConeSpectrum::Arc { beta } => {
                let theta = x[1].atan2(x[0]);
                let theta = if theta < 0.0 { theta + 2.0 * PI } else { theta };
                if theta > 0.0 && theta < *beta {
                    Ok(SectionPoint::Arc(norm, theta))
                } else {
                    Err(Error::OutsideCone)
                }
            }
            ConeSpectrum::Spherical { mesh, .. } => {
                let p = PolarPoint::from_direction([x[0] / norm, x[1] / norm, x[2] / norm]);
                let side = crate::geometry::side_length(mesh.beta(), p.theta.clamp(0.0, PI));
                match side {
                    Ok(l) if p.theta > 0.0 && p.theta < mesh.alpha() && p.r > 0.0 && p.r < l => {
                        Ok(SectionPoint::Sphere(norm, p))
                    }
                    _ => Err(Error::OutsideCone),
                }
            }
        }
    }

    fn mode(&self, j: usize, p: &SectionPoint) -> f64 {
        match (self, p) {
            (ConeSpectrum::Arc { beta }, SectionPoint::Arc(_, theta)) => {
                (2.0 / beta).sqrt() * ((j + 1) as f64 * PI * theta / beta).sin()
            }
            (ConeSpectrum::Spherical { mesh, eigenvectors, .. }, SectionPoint::Sphere(_, q)) => {
                mesh.evaluate(&eigenvectors[j], *q).unwrap_or(0.0)
            }
            _ => unreachable!("section point built for this cone"),
        }
    }
}

enum SectionPoint {
    Arc(f64, f64),
    Sphere(f64, PolarPoint),
}

impl SectionPoint {
    fn radius(&self) -> f64 {
        match self {
            SectionPoint::Arc(r, _) | SectionPoint::Sphere(r, _) => *r,
        }
    }
}

/// Truncated heat kernel value with the magnitude of the last included
/// term as a tail heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatKernelValue {
    pub value: f64,
    pub tail: f64,
}

/// Heat kernel of Brownian motion killed on leaving the cone,
/// `e^{−(|x|²+|y|²)/2t} / (t (|x||y|)^{d/2−1}) Σ_{j≤J} I_{α_j}(|x||y|/t) m_j(x̂) m_j(ŷ)`
/// with `α_j = √(λ_j + (d/2 − 1)²)`.
pub fn heat_kernel(cone: &ConeSpectrum, x: &[f64], y: &[f64], t: f64, terms: usize) -> Result<HeatKernelValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            name: "t",
            value: t,
            expected: "t > 0",
        });
    }
    if terms == 0 {
        return Err(Error::Invalid("need at least one term".into()));
    }
    let px = cone.section_point(x)?;
    let py = cone.section_point(y)?;
    let lambdas = cone.eigenvalues(terms)?;
    let (rx, ry) = (px.radius(), py.radius());
    let z = rx * ry / t;
    if z > BESSEL_MAX_ARG {
        return Err(Error::Domain {
            name: "|x||y|/t",
            value: z,
            expected: "<= 700",
        });
    }
    let shift = (cone.dimension() as f64 / 2.0 - 1.0).powi(2);
    let prefactor = (-(rx * rx + ry * ry) / (2.0 * t)).exp() / (t * (rx * ry).powf(cone.dimension() as f64 / 2.0 - 1.0));
    let mut sum = 0.0;
    let mut last = 0.0;
    for (j, lambda) in lambdas.iter().enumerate() {
        let order = (lambda + shift).sqrt();
        last = prefactor * bessel_i(order, z)? * cone.mode(j, &px) * cone.mode(j, &py);
        sum += last;
    }
    Ok(HeatKernelValue {
        value: sum,
        tail: last.abs(),
    })
}

/// Product of half-line kernels, the reflection-principle form of the
/// quarter-plane heat kernel.
pub fn quarter_plane_reflection(x: [f64; 2], y: [f64; 2], t: f64) -> f64 {
    (0..2)
        .map(|i| {
            let g = |d: f64| (-d * d / (2.0 * t)).exp();
            (g(x[i] - y[i]) - g(x[i] + y[i])) / (2.0 * PI * t).sqrt()
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Triangle;
    use crate::richardson::Discretization;
    use std::f64::consts::FRAC_PI_4;

    fn unit(angle: f64) -> [f64; 2] {
        [angle.cos(), angle.sin()]
    }

    #[test]
    fn quarter_plane_matches_reflection_principle() {
        let cone = ConeSpectrum::arc(PI / 2.0).unwrap();
        let x = unit(FRAC_PI_4);
        for t in [0.5, 1.0, 2.0] {
            let series = heat_kernel(&cone, &x, &x, t, 50).unwrap().value;
            let exact = quarter_plane_reflection(x, x, t);
            assert!(((series - exact) / exact).abs() < 1e-8, "t = {t}: {series} vs {exact}");
        }
        let (a, b) = (unit(0.3), [0.8 * 1.2f64.cos(), 0.8 * 1.2f64.sin()]);
        let series = heat_kernel(&cone, &a, &b, 1.0, 50).unwrap().value;
        let exact = quarter_plane_reflection(a, b, 1.0);
        assert!(((series - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let cone = ConeSpectrum::arc(1.3).unwrap();
        let (a, b) = ([1.0, 0.4], [0.3, 0.7]);
        let p = heat_kernel(&cone, &a, &b, 0.7, 30).unwrap();
        let q = heat_kernel(&cone, &b, &a, 0.7, 30).unwrap();
        assert_eq!(p.value, q.value);
    }

    #[test]
    fn vanishes_toward_the_boundary() {
        let cone = ConeSpectrum::arc(PI / 2.0).unwrap();
        let x = unit(FRAC_PI_4);
        let near = heat_kernel(&cone, &x, &unit(1e-9), 1.0, 50).unwrap().value;
        let inside = heat_kernel(&cone, &x, &unit(0.3), 1.0, 50).unwrap().value;
        assert!(near.abs() < 1e-7 * inside);
        assert!(matches!(heat_kernel(&cone, &x, &unit(0.0), 1.0, 50), Err(Error::OutsideCone)));
        assert!(matches!(heat_kernel(&cone, &x, &unit(2.0), 1.0, 50), Err(Error::OutsideCone)));
    }

    #[test]
    fn doubling_terms_stays_within_tail() {
        let cone = ConeSpectrum::arc(2.0).unwrap();
        let (a, b) = ([1.0, 0.5], [0.2, 1.1]);
        let p = heat_kernel(&cone, &a, &b, 0.8, 12).unwrap();
        let q = heat_kernel(&cone, &a, &b, 0.8, 24).unwrap();
        assert!((p.value - q.value).abs() <= p.tail);
    }

    #[test]
    fn large_time_decay_exponent() {
        // p ~ K t^{-(√λ₁ + 1)} = K t^{-3} for the quarter plane.
        let cone = ConeSpectrum::arc(PI / 2.0).unwrap();
        let x = unit(FRAC_PI_4);
        let p10 = heat_kernel(&cone, &x, &x, 10.0, 50).unwrap().value;
        let p100 = heat_kernel(&cone, &x, &x, 100.0, 50).unwrap().value;
        let slope = (p100.ln() - p10.ln()) / (100f64.ln() - 10f64.ln());
        assert!((slope + 3.0).abs() < 0.06, "slope {slope}");
    }

    #[test]
    fn octant_kernel_matches_product_of_half_lines() {
        // The octant is the product of three half-lines, so its heat kernel
        // is the triple reflection product.
        let study = Discretization::new(8).solve(Triangle::octant(), 12).unwrap();
        let cone = ConeSpectrum::from_study(&study).unwrap();
        let x = [0.6, 0.5, 0.62];
        let y = [0.4, 0.7, 0.55];
        let t = 1.5;
        let series = heat_kernel(&cone, &x, &y, t, 12).unwrap();
        let exact: f64 = (0..3)
            .map(|i| {
                let g = |d: f64| (-d * d / (2.0 * t)).exp();
                (g(x[i] - y[i]) - g(x[i] + y[i])) / (2.0 * PI * t).sqrt()
            })
            .product();
        assert!(((series.value - exact) / exact).abs() < 2e-2, "{series:?} vs {exact}");
        assert!(heat_kernel(&cone, &x, &y, t, 13).is_err());
        assert!(heat_kernel(&cone, &[-1.0, 0.5, 0.5], &y, t, 4).is_err());
    }
}
