use std::f64::consts::TAU;

use orbitkit::catalog::{self, RigidTwist};
use orbitkit::genfun::Isotopy;
use orbitkit::geometry::{Point, Window};
use orbitkit::prospector::{
    cross_check_finders, find_pq_orbit, find_pq_orbit_action, property_p_experiment, seed_rings,
    twist_profile, OrbitRecord, PropertyPOptions, SeedRing, RESIDUAL_TOL,
};
use orbitkit::rotation::orbit_rotation_number;

const Z0: Point = Point::new(0.0, 0.0);

fn check_record<M: Isotopy + ?Sized>(map: &M, o: &OrbitRecord) {
    assert!(o.residual < RESIDUAL_TOL, "residual {:e}", o.residual);
    let rho = orbit_rotation_number(map, o.points[0], Z0, o.q).unwrap().rho_n;
    assert!(
        (rho - o.p as f64 / o.q as f64).abs() < 1e-9,
        "rho {rho} for {}/{}",
        o.p,
        o.q
    );
    // forward visits the stored points in order and closes up
    let mut cur = o.points[0];
    for next in o.points.iter().cycle().skip(1).take(o.q - 1) {
        cur = map.forward(cur).unwrap();
        assert!((cur - next).norm() <= 1e-12);
    }
    let back = map.forward(cur).unwrap();
    assert!((back - o.points[0]).norm() <= o.residual * 1.0001 + 1e-15);
}

#[test]
fn rigid_twist_orbits_have_exact_rotation() {
    let map = RigidTwist::new(0.0, 0.5, Window::centered(1.0));
    for (p, q) in [(1, 7), (2, 9), (1, 4)] {
        let r = map.radius_for_rotation(p as f64 / q as f64).unwrap();
        let rings = [SeedRing {
            radius: r * 1.01,
            count: 8,
        }];
        let search = find_pq_orbit(&map, Z0, p, q, &rings).unwrap();
        assert!(!search.orbits.is_empty(), "{p}/{q}");
        for o in &search.orbits {
            check_record(&map, o);
            assert!((o.r_max - r).abs() < 1e-9);
        }
    }
}

/// The same pipeline as the property-P experiment at the periods whose
/// orbits fit inside the window where "degmax" is defined.
#[test]
fn degmax_orbits_concentrate_at_feasible_periods() {
    let fac = catalog::lookup("degmax").unwrap().factorization;
    let qs = [16, 20, 30, 40];
    let report = property_p_experiment(&fac, Z0, &qs, &PropertyPOptions::default()).unwrap();
    assert!(report.hypotheses.satisfied(), "{:?}", report.hypotheses);
    assert!(report.success(), "{:?}", report.concentration);
    let r: Vec<f64> = report.concentration.iter().map(|c| c.r_max).collect();
    assert!(r[3] < r[0] / 1.5, "{r:?}");
    for o in &report.found {
        assert_eq!(o.winding, 1);
        check_record(&fac, o);
    }

    // finders agree where the orbits are well conditioned
    let opts = PropertyPOptions::default();
    let profile = twist_profile(&fac, Z0, &opts.profile_radii, TAU / 8.0, opts.profile_iterates);
    for q in [16, 20] {
        let rings = seed_rings(&fac, Z0, &profile, 1.0 / q as f64, q, opts.ring_spread);
        let direct: Vec<_> = report.found.iter().filter(|o| o.q == q).cloned().collect();
        let action = find_pq_orbit_action(&fac, Z0, 1, q, &rings).unwrap();
        assert!(!action.is_empty());
        let agreement = cross_check_finders(&fac, Z0, &direct, &action);
        assert!(agreement.agrees(), "q = {q}: {agreement:?}");
    }
}

#[test]
fn elliptic_centre_has_no_nearby_fifth_orbits() {
    let map = catalog::lookup("elliptic(0.1)").unwrap().factorization;
    let rings = [0.2, 0.5, 0.9].map(|radius| SeedRing { radius, count: 40 });
    let search = find_pq_orbit(&map, Z0, 1, 5, &rings).unwrap();
    assert!(search.orbits.is_empty());
}
