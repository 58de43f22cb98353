//! Derivatives of eigenvalues with respect to the angles `(α, β)`.
//!
//! Three independent routes are provided: Hadamard boundary integrals of the
//! eigenfunction traces, the matrix-level Feynman–Hellmann identity on a
//! fixed logical mesh, and central differences of extrapolated eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::fem::{assemble, boundary_trace_derivatives, Domain, GeneralizedEigenproblem};
use crate::geometry::Triangle;
use crate::richardson::{extrapolate, Discretization, Estimate, ExtrapolatedSpectrum};

/// Default step of the finite-difference routes, in radians.
pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hadamard,
    FeynmanHellmann,
    FiniteDifference,
}

/// `(∂_α λ, ∂_β λ)` from one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenDerivative {
    pub d_alpha: f64,
    pub d_beta: f64,
    pub method: Method,
}

impl EigenDerivative {
    pub fn directional(&self, direction: (f64, f64)) -> f64 {
        direction.0 * self.d_alpha + direction.1 * self.d_beta
    }
}

/// Extrapolated counterpart of [`EigenDerivative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub d_alpha: Estimate,
    pub d_beta: Estimate,
    pub method: Method,
}

/// The boundary form on an eigenspace along a direction `(dα, dβ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipletDerivativeMatrix {
    pub matrix: Vec<Vec<f64>>,
    pub direction: (f64, f64),
    /// Branch derivatives, ascending.
    pub eigenvalues: Vec<f64>,
}

fn triangle_of(problem: &GeneralizedEigenproblem) -> Result<Triangle> {
    match problem.mesh.domain {
        Domain::Triangle(t) => Ok(t),
        Domain::Digon(_) => Err(Error::Invalid("shape derivatives are taken on triangles only".into())),
    }
}

/// The two boundary integrals `(∫|∂_θ u|²/sin r dr, ∫|∇u|² ∂_β L sin L dθ)`.
fn side_integrals(problem: &GeneralizedEigenproblem, v: &[f64]) -> Result<(f64, f64)> {
    let tr = boundary_trace_derivatives(&problem.mesh, v)?;
    let a = tr
        .alpha_side
        .iter()
        .map(|s| s.weight * s.d_theta * s.d_theta / s.r.sin())
        .sum();
    let b = tr
        .beta_side
        .iter()
        .map(|s| {
            let sin_l = s.r.sin();
            s.weight * (s.d_r * s.d_r + (s.d_theta / sin_l).powi(2)) * s.side_dbeta * sin_l
        })
        .sum();
    Ok((a, b))
}

fn check_index(spectrum: &Spectrum, which: usize) -> Result<()> {
    if which >= spectrum.len() {
        return Err(Error::IndexOutOfRange {
            index: which,
            len: spectrum.len(),
        });
    }
    Ok(())
}

fn check_simple(spectrum: &Spectrum, which: usize) -> Result<()> {
    check_index(spectrum, which)?;
    let size = spectrum.multiplet_of(which).map_or(1, |r| r.len());
    if size != 1 {
        return Err(Error::NotSimple { index: which, size });
    }
    Ok(())
}

/// Hadamard derivatives of a simple eigenvalue:
/// `∂_α λ = −∫₀^{L_β(α)} |∂_θ u(r, α)|²/sin r dr` and
/// `∂_β λ = −∫₀^α |∇u|² ∂_β L sin L dθ` along `r = L_β(θ)`.
pub fn hadamard_simple(problem: &GeneralizedEigenproblem, spectrum: &Spectrum, which: usize) -> Result<EigenDerivative> {
    triangle_of(problem)?;
    check_simple(spectrum, which)?;
    let v = &spectrum.eigenvectors[which];
    let norm2 = problem.mass.bilinear(v, v);
    let (a, b) = side_integrals(problem, v)?;
    Ok(EigenDerivative {
        d_alpha: -a / norm2,
        d_beta: -b / norm2,
        method: Method::Hadamard,
    })
}

/// Matrix of the boundary form `d(u) = −dα·a(u) − dβ·b(u)` on the
/// eigenspace of multiplet `which`, polarized as `¼[d(u+v) − d(u−v)]`.
pub fn hadamard_multiplet(
    problem: &GeneralizedEigenproblem,
    spectrum: &Spectrum,
    which: usize,
    direction: (f64, f64),
) -> Result<MultipletDerivativeMatrix> {
    triangle_of(problem)?;
    if direction == (0.0, 0.0) || !direction.0.is_finite() || !direction.1.is_finite() {
        return Err(Error::Invalid("direction must be nonzero".into()));
    }
    let basis = spectrum.eigenspace_basis(problem, which)?;
    let m = basis.len();
    if m < 2 {
        return Err(Error::Unresolved(format!("multiplet {which} has dimension {m}")));
    }
    for i in 0..m {
        for j in 0..m {
            let g = problem.mass.bilinear(&basis[i], &basis[j]);
            if (g - if i == j { 1.0 } else { 0.0 }).abs() > 1e-10 {
                return Err(Error::Unresolved("eigenspace basis is not orthonormal".into()));
            }
        }
    }
    let form = |v: &[f64]| -> Result<f64> {
        let (a, b) = side_integrals(problem, v)?;
        Ok(-direction.0 * a - direction.1 * b)
    };
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        d[(i, i)] = form(&basis[i])?;
        for j in 0..i {
            let plus: Vec<f64> = basis[i].iter().zip(&basis[j]).map(|(x, y)| x + y).collect();
            let minus: Vec<f64> = basis[i].iter().zip(&basis[j]).map(|(x, y)| x - y).collect();
            let dij = 0.25 * (form(&plus)? - form(&minus)?);
            d[(i, j)] = dij;
            d[(j, i)] = dij;
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(d.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(MultipletDerivativeMatrix {
        matrix: (0..m).map(|i| (0..m).map(|j| d[(i, j)]).collect()).collect(),
        direction,
        eigenvalues,
    })
}

/// `uᵀ(ΔK − λΔM)u / uᵀMu` with `ΔK`, `ΔM` central differences of the
/// matrices assembled on the same logical mesh mapped to `T ± h·direction`.
pub fn feynman_hellmann_at_step(
    problem: &GeneralizedEigenproblem,
    spectrum: &Spectrum,
    which: usize,
    direction: (f64, f64),
    h: f64,
) -> Result<f64> {
    let t = triangle_of(problem)?;
    check_index(spectrum, which)?;
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("step {h} must be positive")));
    }
    let domain = Domain::Triangle(t);
    let (dx, dy) = (h * direction.0, h * direction.1);
    let plus = assemble(&problem.mesh.remapped(domain.perturbed(dx, dy))?)?;
    let minus = assemble(&problem.mesh.remapped(domain.perturbed(-dx, -dy))?)?;
    let v = &spectrum.eigenvectors[which];
    let lambda = spectrum.eigenvalues[which];
    let dk = plus.stiffness.bilinear(v, v) - minus.stiffness.bilinear(v, v);
    let dm = plus.mass.bilinear(v, v) - minus.mass.bilinear(v, v);
    Ok((dk - lambda * dm) / (2.0 * h * problem.mass.bilinear(v, v)))
}

/// Feynman–Hellmann directional derivative of a simple eigenvalue, checked
/// against the estimate at `h/2`.
pub fn feynman_hellmann(
    problem: &GeneralizedEigenproblem,
    spectrum: &Spectrum,
    which: usize,
    direction: (f64, f64),
    h: f64,
) -> Result<f64> {
    check_simple(spectrum, which)?;
    let coarse = feynman_hellmann_at_step(problem, spectrum, which, direction, h)?;
    let fine = feynman_hellmann_at_step(problem, spectrum, which, direction, 0.5 * h)?;
    if (coarse - fine).abs() > 1e-4 * fine.abs().max(1.0) {
        return Err(Error::StepTooLarge { coarse, fine });
    }
    Ok(coarse)
}

/// Feynman–Hellmann form `uᵢᵀ(ΔK − λ̄ΔM)uⱼ / 2h` on the eigenspace of
/// multiplet `which`, with `λ̄` the multiplet mean. Its eigenvalues are the
/// branch derivatives along `direction`.
pub fn feynman_hellmann_multiplet(
    problem: &GeneralizedEigenproblem,
    spectrum: &Spectrum,
    which: usize,
    direction: (f64, f64),
    h: f64,
) -> Result<MultipletDerivativeMatrix> {
    let t = triangle_of(problem)?;
    if direction == (0.0, 0.0) || !direction.0.is_finite() || !direction.1.is_finite() {
        return Err(Error::Invalid("direction must be nonzero".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("step {h} must be positive")));
    }
    let range = spectrum
        .multiplets
        .get(which)
        .cloned()
        .ok_or(Error::IndexOutOfRange {
            index: which,
            len: spectrum.multiplets.len(),
        })?;
    let basis = spectrum.eigenspace_basis(problem, which)?;
    let m = basis.len();
    if m < 2 {
        return Err(Error::Unresolved(format!("multiplet {which} has dimension {m}")));
    }
    let mean = spectrum.eigenvalues[range].iter().sum::<f64>() / m as f64;
    let domain = Domain::Triangle(t);
    let (dx, dy) = (h * direction.0, h * direction.1);
    let plus = assemble(&problem.mesh.remapped(domain.perturbed(dx, dy))?)?;
    let minus = assemble(&problem.mesh.remapped(domain.perturbed(-dx, -dy))?)?;
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let (u, v) = (&basis[i], &basis[j]);
            let dk = plus.stiffness.bilinear(u, v) - minus.stiffness.bilinear(u, v);
            let dm = plus.mass.bilinear(u, v) - minus.mass.bilinear(u, v);
            let dij = (dk - mean * dm) / (2.0 * h);
            d[(i, j)] = dij;
            d[(j, i)] = dij;
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(d.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(MultipletDerivativeMatrix {
        matrix: (0..m).map(|i| (0..m).map(|j| d[(i, j)]).collect()).collect(),
        direction,
        eigenvalues,
    })
}

/// Extrapolated branch derivatives from [`feynman_hellmann_multiplet`].
pub fn feynman_hellmann_multiplet_extrapolated(
    study: &ExtrapolatedSpectrum,
    which: usize,
    direction: (f64, f64),
    h: f64,
) -> Result<Vec<Estimate>> {
    let per: Vec<MultipletDerivativeMatrix> = study
        .levels
        .par_iter()
        .map(|l| feynman_hellmann_multiplet(&l.problem, &l.spectrum, which, direction, h))
        .collect::<Result<_>>()?;
    Ok((0..per[0].eigenvalues.len())
        .map(|i| extrapolate(per[0].eigenvalues[i], per[1].eigenvalues[i], per[2].eigenvalues[i]))
        .collect())
}

/// Hadamard derivatives on each level of a study, extrapolated.
pub fn hadamard_simple_extrapolated(study: &ExtrapolatedSpectrum, which: usize) -> Result<DerivativeEstimate> {
    let per: Vec<EigenDerivative> = study
        .levels
        .par_iter()
        .map(|l| hadamard_simple(&l.problem, &l.spectrum, which))
        .collect::<Result<_>>()?;
    Ok(DerivativeEstimate {
        d_alpha: extrapolate(per[0].d_alpha, per[1].d_alpha, per[2].d_alpha),
        d_beta: extrapolate(per[0].d_beta, per[1].d_beta, per[2].d_beta),
        method: Method::Hadamard,
    })
}

/// Branch derivatives of a multiplet on each level of a study, extrapolated
/// entry by entry in ascending order. The matrices themselves depend on the
/// basis chosen on each level; their eigenvalues do not.
pub fn hadamard_multiplet_extrapolated(
    study: &ExtrapolatedSpectrum,
    which: usize,
    direction: (f64, f64),
) -> Result<(MultipletDerivativeMatrix, Vec<Estimate>)> {
    let per: Vec<MultipletDerivativeMatrix> = study
        .levels
        .par_iter()
        .map(|l| hadamard_multiplet(&l.problem, &l.spectrum, which, direction))
        .collect::<Result<_>>()?;
    let est = (0..per[0].eigenvalues.len())
        .map(|i| extrapolate(per[0].eigenvalues[i], per[1].eigenvalues[i], per[2].eigenvalues[i]))
        .collect();
    let finest = per.into_iter().next_back().expect("three levels");
    Ok((finest, est))
}

/// Feynman–Hellmann gradient on each level of a study, extrapolated.
pub fn feynman_hellmann_extrapolated(study: &ExtrapolatedSpectrum, which: usize, h: f64) -> Result<DerivativeEstimate> {
    let per: Vec<(f64, f64)> = study
        .levels
        .par_iter()
        .map(|l| {
            Ok((
                feynman_hellmann(&l.problem, &l.spectrum, which, (1.0, 0.0), h)?,
                feynman_hellmann(&l.problem, &l.spectrum, which, (0.0, 1.0), h)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(DerivativeEstimate {
        d_alpha: extrapolate(per[0].0, per[1].0, per[2].0),
        d_beta: extrapolate(per[0].1, per[1].1, per[2].1),
        method: Method::FeynmanHellmann,
    })
}

/// Central difference of eigenvalue `which` along `direction`, taken level
/// by level on a fixed grading and then extrapolated. This equals the
/// central difference of the extrapolated eigenvalues.
pub fn finite_difference(
    disc: &Discretization,
    triangle: Triangle,
    which: usize,
    direction: (f64, f64),
    h: f64,
) -> Result<Estimate> {
    let domain = Domain::Triangle(triangle);
    let grading = disc.grading_for(&domain);
    let k = which + 1;
    let plus = disc.solve_graded(domain.perturbed(h * direction.0, h * direction.1), k, grading, None)?;
    let minus = disc.solve_graded(domain.perturbed(-h * direction.0, -h * direction.1), k, grading, Some(&plus))?;
    let d: Vec<f64> = (0..3)
        .map(|l| {
            (plus.levels[l].spectrum.eigenvalues[which] - minus.levels[l].spectrum.eigenvalues[which]) / (2.0 * h)
        })
        .collect();
    Ok(extrapolate(d[0], d[1], d[2]))
}

/// Finite-difference gradient `(∂_α λ, ∂_β λ)`.
pub fn finite_difference_gradient(
    disc: &Discretization,
    triangle: Triangle,
    which: usize,
    h: f64,
) -> Result<DerivativeEstimate> {
    Ok(DerivativeEstimate {
        d_alpha: finite_difference(disc, triangle, which, (1.0, 0.0), h)?,
        d_beta: finite_difference(disc, triangle, which, (0.0, 1.0), h)?,
        method: Method::FiniteDifference,
    })
}
