use approx::assert_abs_diff_eq;
use orbitkit::catalog;
use orbitkit::genfun::{GeneratedMap, GeneratingFunction, Isotopy, Polynomial, SolverOptions};
use orbitkit::geometry::{point, Window};
use proptest::prelude::*;

fn catalog_maps() -> Vec<catalog::CatalogEntry> {
    catalog::all()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobian_has_unit_determinant(map in 0usize..6, u in 0.02f64..0.98, v in 0.02f64..0.98) {
        let e = &catalog_maps()[map];
        let z = e.factorization.domain().lerp(u, v);
        // points near the corners of some windows have no image
        if let Ok(j) = e.factorization.jacobian(z) {
            prop_assert!((j.determinant() - 1.0).abs() <= 1e-9, "{}: det {}", e.name, j.determinant());
        }
    }

    #[test]
    fn isotopy_starts_at_identity_and_ends_at_map(map in 0usize..6, u in 0.1f64..0.9, v in 0.1f64..0.9) {
        let e = &catalog_maps()[map];
        let z = e.factorization.domain().lerp(u, v);
        prop_assert_eq!(e.factorization.eval(0.0, z).unwrap(), z);
        if let Ok(w) = e.factorization.forward(z) {
            prop_assert!((e.factorization.eval(1.0, z).unwrap() - w).norm() == 0.0);
        }
    }

    #[test]
    fn implicit_solution_is_seed_independent(u in 0.1f64..0.9, v in 0.1f64..0.9, t in 0.0f64..=1.0) {
        let g = catalog::degmax();
        let w = *g.window();
        // the residual has slope at least 1 - bound, so roots accepted at the
        // solver tolerance lie within tol / (1 - bound) of the true root
        let spread = 2.0 * SolverOptions::default().tol / (1.0 - g.twist_bound());
        let map = GeneratedMap::new(g);
        let z = w.lerp(u, v);
        let roots: Vec<f64> = [w.x_min, z.x, w.x_max]
            .iter()
            .filter_map(|&seed| map.solve_implicit_x(t, z.x, z.y, seed).ok())
            .collect();
        for r in &roots {
            prop_assert!((r - roots[0]).abs() <= spread, "{roots:?}");
        }
    }
}

#[test]
fn fixed_points_are_critical_points() {
    // critical points at (0, 0) and (+-1/2, 0)
    let poly = Polynomial::new([(4, 0, 0.25), (2, 0, -0.125), (0, 2, 0.5)]);
    let g = GeneratingFunction::polynomial("double-well", poly, Window::centered(1.0)).unwrap();
    let map = GeneratedMap::new(g.clone());
    for z in Window::centered(0.9).grid(19) {
        let Ok(image) = map.forward(z) else { continue };
        let fixed = (image - z).norm() <= 1e-12;
        let critical = g.gradient(z).unwrap().norm() <= 1e-12;
        assert_eq!(fixed, critical, "at ({}, {})", z.x, z.y);
    }
    for x in [-0.5, 0.0, 0.5] {
        let z = point(x, 0.0);
        assert_abs_diff_eq!((map.forward(z).unwrap() - z).norm(), 0.0, epsilon = 1e-14);
    }
}

#[test]
fn every_catalog_entry_passes_its_audits() {
    for e in catalog_maps() {
        for j in 0..e.factorization.len() {
            e.factorization
                .generating_function(j)
                .audit()
                .unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }
}
