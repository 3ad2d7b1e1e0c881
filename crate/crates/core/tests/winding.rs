use std::f64::consts::TAU;

use orbitkit::catalog;
use orbitkit::geometry::{point, Point};
use orbitkit::winding::{brouwer_degree, lefschetz_index, Curve};
use proptest::prelude::*;

/// `(z - a)(z - b)` as complex numbers, optionally conjugating the first
/// factor, which flips that zero's degree.
fn product_field(
    a: Point,
    b: Point,
    conj_a: bool,
) -> impl Fn(Point) -> orbitkit::error::Result<Point> + Sync {
    move |z: Point| {
        let (ux, uy) = (z.x - a.x, if conj_a { -(z.y - a.y) } else { z.y - a.y });
        let (vx, vy) = (z.x - b.x, z.y - b.y);
        Ok(point(ux * vx - uy * vy, ux * vy + uy * vx))
    }
}

fn polygon(center: Point, radius: f64, n: usize) -> Curve {
    let vertices = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            center + point(a.cos(), a.sin()) * radius
        })
        .collect();
    Curve::polyline(vertices).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_is_additive_over_zeros(
        ax in -0.6f64..-0.2, ay in -0.5f64..0.5,
        bx in 0.2f64..0.6, by in -0.5f64..0.5,
        conj in any::<bool>(),
    ) {
        let (a, b) = (point(ax, ay), point(bx, by));
        let field = product_field(a, b, conj);
        let small = 0.15;
        let da = brouwer_degree(&field, &Curve::circle(a, small).unwrap()).unwrap().degree;
        let db = brouwer_degree(&field, &Curve::circle(b, small).unwrap()).unwrap().degree;
        let total = brouwer_degree(&field, &Curve::circle(point(0.0, 0.0), 2.0).unwrap()).unwrap().degree;
        prop_assert_eq!(da, if conj { -1 } else { 1 });
        prop_assert_eq!(db, 1);
        prop_assert_eq!(total, da + db);
    }

    #[test]
    fn degree_is_stable_under_refinement(k in 1i32..12, n in 8usize..64, radius in 0.1f64..2.0) {
        let field = move |z: Point| {
            let (r, a) = (z.norm(), z.y.atan2(z.x));
            Ok(point((k as f64 * a).cos(), (k as f64 * a).sin()) * r.powi(k))
        };
        let circle = brouwer_degree(field, &Curve::circle(point(0.0, 0.0), radius).unwrap()).unwrap().degree;
        let coarse = brouwer_degree(field, &polygon(point(0.0, 0.0), radius, n)).unwrap().degree;
        let fine = brouwer_degree(field, &polygon(point(0.0, 0.0), radius, 2 * n)).unwrap().degree;
        prop_assert_eq!(circle, k as i64);
        prop_assert_eq!(coarse, circle);
        prop_assert_eq!(fine, circle);
    }
}

#[test]
fn lefschetz_index_is_radius_independent() {
    let cases = [
        ("degmax", 1),
        ("degmax-quartic", 1),
        ("saddle", -1),
        ("elliptic(0.1)", 1),
        ("degmax-factored(3)", 1),
    ];
    for (name, expected) in cases {
        let map = catalog::lookup(name).unwrap().factorization;
        for r in [0.04, 0.08, 0.12] {
            let rep = lefschetz_index(&map, point(0.0, 0.0), r).unwrap();
            assert_eq!(rep.value, expected, "{name} at r = {r}");
        }
    }
}
