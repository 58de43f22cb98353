//! Structural invariants of the discrete and extrapolated spectra, checked
//! on random triangles with coarse meshes.

use proptest::prelude::*;
use sphectra_core::fem::{assemble, Grading, MappedMesh};
use sphectra_core::geometry::{octant_eigenfunction, OctantMode, Triangle};
use sphectra_core::richardson::Discretization;
use sphectra_core::shape_derivative::hadamard_simple_extrapolated;

fn angle() -> impl Strategy<Value = f64> {
    0.7..2.2f64
}

fn coarse() -> Discretization {
    Discretization::new(8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Levels share a grading, so the trial spaces are nested and the raw
    // eigenvalues can only go down under refinement.
    #[test]
    fn refinement_lowers_every_eigenvalue(alpha in angle(), beta in angle()) {
        let study = coarse().solve(Triangle::new(alpha, beta).unwrap(), 3).unwrap();
        for w in study.levels.windows(2) {
            for (fine, rough) in w[1].spectrum.eigenvalues.iter().zip(&w[0].spectrum.eigenvalues) {
                prop_assert!(fine <= &(rough * (1.0 + 1e-10)), "{fine} > {rough}");
            }
        }
    }

    #[test]
    fn exchanging_the_angles_keeps_the_spectrum(alpha in angle(), beta in angle()) {
        let d = coarse();
        let a = d.solve(Triangle::new(alpha, beta).unwrap(), 2).unwrap();
        let b = d.solve(Triangle::new(beta, alpha).unwrap(), 2).unwrap();
        for (x, y) in a.estimates.iter().zip(&b.estimates) {
            let slack = 10.0 * (x.error + y.error) + 1e-6 * x.value;
            prop_assert!((x.value - y.value).abs() <= slack, "{} vs {}", x.value, y.value);
        }
    }

    #[test]
    fn first_eigenvalue_exceeds_the_hemisphere_value(alpha in angle(), beta in angle()) {
        let study = coarse().solve(Triangle::new(alpha, beta).unwrap(), 1).unwrap();
        prop_assert!(study.estimates[0].value > 2.0);
    }

    #[test]
    fn opening_either_angle_lowers_the_ground_state(alpha in angle(), beta in angle()) {
        let study = coarse().solve(Triangle::new(alpha, beta).unwrap(), 1).unwrap();
        let g = hadamard_simple_extrapolated(&study, 0).unwrap();
        prop_assert!(g.d_alpha.value < 0.0 && g.d_beta.value < 0.0, "{g:?}");
    }

    #[test]
    fn nested_triangles_order_the_ground_state(
        alpha in angle(),
        beta in angle(),
        da in 0.05..0.3f64,
        db in 0.0..0.3f64,
    ) {
        let d = coarse();
        let small = d.solve(Triangle::new(alpha, beta).unwrap(), 1).unwrap().estimates[0];
        let large = d.solve(Triangle::new(alpha + da, beta + db).unwrap(), 1).unwrap().estimates[0];
        prop_assert!(large.value < small.value + large.error + small.error, "{large:?} vs {small:?}");
    }
}

/// The closed-form octant eigenfunctions for λ = 30 lie in the computed
/// two-dimensional eigenspace.
#[test]
fn octant_doublet_spans_the_exact_eigenspace() {
    let mesh = MappedMesh::new(Triangle::octant(), 48, 48, Grading::uniform(2.0)).unwrap();
    let problem = assemble(&mesh).unwrap();
    let mut spectrum = sphectra_core::eigensolve::solve_smallest(
        &problem,
        3,
        &sphectra_core::eigensolve::SolveOptions::with_tol(1e-10),
    )
    .unwrap();
    // The mesh is not symmetric under the exchange, so the discrete doublet
    // is split by the discretization error.
    spectrum.regroup(1e-2);
    let which = spectrum.multiplets.iter().position(|r| r.contains(&1)).unwrap();
    assert_eq!(spectrum.multiplets[which], 1..3);
    let basis = spectrum.eigenspace_basis(&problem, which).unwrap();
    for mode in [OctantMode::U1, OctantMode::U2] {
        let u = mesh.interpolate(|p| octant_eigenfunction(mode, p));
        let mu = problem.mass.mul_vec(&u);
        let norm2: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let projected: f64 = basis
            .iter()
            .map(|b| b.iter().zip(&mu).map(|(x, y)| x * y).sum::<f64>().powi(2))
            .sum();
        let captured = projected / norm2;
        assert!(captured > 1.0 - 1e-3, "{mode:?}: captured fraction {captured}");
    }
}
