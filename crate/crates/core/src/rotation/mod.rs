//! Rotation numbers about a fixed point, in turns, counterclockwise positive.
//!
//! Angles are always lifted along the isotopy `t -> f_t`, so every value
//! belongs to the lift selected by the isotopy rather than to an arbitrary
//! branch.

mod farey;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::Isotopy;
use crate::geometry::{min_singular_value, point, rotation_matrix, signed_angle, Mat2, Point, Window};
use crate::winding::{lift_path, trajectory_turns, LiftOptions};

pub use farey::{farey_interval, FareyInterval};

/// Iterations of the projectivised derivative.
pub const BLOWUP_ITERATIONS: usize = 1 << 16;
pub const BLOWUP_SEEDS: usize = 8;
/// `J - I` with smallest singular value at most this is treated as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupRotation {
    /// Turns per iterate.
    pub value: f64,
    /// `Df(z0)` has eigenvalue 1; the value is then exactly 0.
    pub parabolic: bool,
    /// Largest difference between seed estimates.
    pub seed_spread: f64,
    /// Error bar: `2 / N`, widened to the spread when seeds disagree.
    pub error_bar: f64,
    pub seed_disagreement: bool,
}

/// Angle swept by `t -> Df_t(z0) v`, in radians.
fn linearised_sweep<M: Isotopy + ?Sized>(map: &M, z0: Point, v: Point) -> Result<f64> {
    let (lift, _) = lift_path(
        |t| Ok(map.eval_with_jacobian(t, z0)?.1 * v),
        point(0.0, 0.0),
        &LiftOptions::open(0.0),
    )?;
    Ok(lift.turns() * TAU)
}

/// Rotation number of `v -> Df(z0) v / |Df(z0) v|` on the circle of
/// directions, for the lift given by the isotopy.
pub fn blowup_rotation_number<M: Isotopy + ?Sized>(map: &M, z0: Point) -> Result<BlowupRotation> {
    let jac = map.jacobian(z0)?;
    if jac.determinant().abs() < 1e-300 {
        return Err(Error::HypothesisViolated("Df(z0) is singular".into()));
    }
    let nominal = 2.0 / BLOWUP_ITERATIONS as f64;
    if min_singular_value(&(jac - Mat2::identity())) <= PARABOLIC_TOL {
        return Ok(BlowupRotation {
            value: 0.0,
            parabolic: true,
            seed_spread: 0.0,
            error_bar: nominal,
            seed_disagreement: false,
        });
    }
    let reference = linearised_sweep(map, z0, point(1.0, 0.0))?;
    let estimates: Vec<f64> = (0..BLOWUP_SEEDS)
        .into_par_iter()
        .map(|k| {
            let a = TAU * k as f64 / BLOWUP_SEEDS as f64;
            let mut v = point(a.cos(), a.sin());
            let mut total = 0.0;
            for _ in 0..BLOWUP_ITERATIONS {
                let w = (jac * v).normalize();
                let principal = signed_angle(&v, &w);
                // the swept angle varies by less than a half turn over directions
                total += principal + TAU * ((reference - principal) / TAU).round();
                v = w;
            }
            total / (TAU * BLOWUP_ITERATIONS as f64)
        })
        .collect();
    let lo = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let disagreement = spread > nominal;
    Ok(BlowupRotation {
        value: estimates.iter().sum::<f64>() / estimates.len() as f64,
        parabolic: false,
        seed_spread: spread,
        error_bar: if disagreement { spread } else { nominal },
        seed_disagreement: disagreement,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSample {
    pub z: Point,
    pub n: usize,
    /// Turns per iterate.
    pub rho_n: f64,
    /// `2 max_step / n`, with `max_step` the largest single-iterate sweep.
    pub cesaro_bound: f64,
}

fn escape_step(e: Error, step: usize) -> Error {
    match e {
        Error::OutOfWindow { .. } => Error::OrbitEscaped { step },
        Error::PunctureHit { .. } => Error::PunctureHit { step },
        other => other,
    }
}

/// Orbit of `z` with the turns swept about `z0` by each iterate.
fn orbit_sweeps<M: Isotopy + ?Sized>(
    map: &M,
    z: Point,
    z0: Point,
    n: usize,
    stay_in: Option<(Point, f64)>,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let domain = map.domain();
    let mut orbit = Vec::with_capacity(n + 1);
    let mut sweeps = Vec::with_capacity(n);
    let mut cur = z;
    for step in 0..n {
        if !domain.contains(&cur) {
            return Err(Error::OrbitEscaped { step });
        }
        if let Some((c, r)) = stay_in {
            if (cur - c).norm() >= r {
                break;
            }
        }
        if cur == z0 {
            return Err(Error::PunctureHit { step });
        }
        let next = trajectory_turns(map, cur, z0).and_then(|s| Ok((s, map.forward(cur)?)));
        match next {
            Ok((sweep, image)) => {
                orbit.push(cur);
                sweeps.push(sweep);
                cur = image;
            }
            // inside U, an iterate that cannot be continued ends the segment
            Err(_) if stay_in.is_some() => break,
            Err(e) => return Err(escape_step(e, step)),
        }
    }
    orbit.push(cur);
    Ok((orbit, sweeps))
}

/// Average turns per iterate about `z0` over `n` iterates of `z`, with angles
/// lifted along the isotopy trajectories.
pub fn orbit_rotation_number<M: Isotopy + ?Sized>(
    map: &M,
    z: Point,
    z0: Point,
    n: usize,
) -> Result<RotationSample> {
    if n == 0 {
        return Err(Error::invalid("orbit length must be positive"));
    }
    let (_, sweeps) = orbit_sweeps(map, z, z0, n, None)?;
    let max_step = sweeps.iter().map(|s| s.abs()).fold(0.0, f64::max);
    Ok(RotationSample {
        z,
        n,
        rho_n: sweeps.iter().sum::<f64>() / n as f64,
        cesaro_bound: 2.0 * max_step / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSetEstimate {
    pub u_radius: f64,
    pub v_radius: f64,
    pub n_range: [usize; 2],
    pub observed: Vec<RotationSample>,
    pub hull: [f64; 2],
}

impl RotationSetEstimate {
    pub fn width(&self) -> f64 {
        self.hull[1] - self.hull[0]
    }
}

/// Seeds of a `grid x grid` lattice on the square around `z0` lying in the
/// annulus `v_radius < |z - z0| < u_radius`.
fn annulus_seeds(z0: Point, u_radius: f64, v_radius: f64, grid: usize) -> Vec<Point> {
    let sq = Window::new(z0.x - u_radius, z0.x + u_radius, z0.y - u_radius, z0.y + u_radius);
    sq.grid(grid)
        .into_iter()
        .filter(|z| {
            let d = (z - z0).norm();
            v_radius < d && d < u_radius
        })
        .collect()
}

/// Finite snapshot of the local rotation set relative to the discs `U` and
/// `V` about `z0`.
///
/// A seed `z` contributes the sample `(z, n)` for the largest `n` in
/// `[n_max / 2, n_max]` such that `z` and `f^n(z)` lie outside `V` and
/// `f^i(z)` lies in `U` for `0 <= i <= n`. The hull is a heuristic outer
/// estimate of these samples only.
pub fn local_rotation_set<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    u_radius: f64,
    v_radius: f64,
    n_max: usize,
    grid: usize,
) -> Result<RotationSetEstimate> {
    if !(0.0 < v_radius && v_radius < u_radius) {
        return Err(Error::invalid("local rotation set needs 0 < V < U"));
    }
    if !map.domain().contains_disc(&z0, u_radius) {
        return Err(Error::invalid("U leaves the window"));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be positive"));
    }
    let n_min = (n_max / 2).max(1);
    let seeds = annulus_seeds(z0, u_radius, v_radius, grid);
    let observed: Vec<Option<RotationSample>> = seeds
        .par_iter()
        .map(|&z| {
            let (orbit, sweeps) = orbit_sweeps(map, z, z0, n_max, Some((z0, u_radius))).ok()?;
            // orbit[i] is in U for i < sweeps.len(); the last point may not be
            let in_u = |i: usize| (orbit[i] - z0).norm() < u_radius;
            let best = (n_min..=sweeps.len())
                .rev()
                .find(|&n| in_u(n) && (orbit[n] - z0).norm() > v_radius)?;
            let partial = &sweeps[..best];
            let max_step = partial.iter().map(|s| s.abs()).fold(0.0, f64::max);
            Some(RotationSample {
                z,
                n: best,
                rho_n: partial.iter().sum::<f64>() / best as f64,
                cesaro_bound: 2.0 * max_step / best as f64,
            })
        })
        .collect();
    let observed: Vec<RotationSample> = observed.into_iter().flatten().collect();
    if observed.is_empty() {
        return Err(Error::EmptySample);
    }
    let lo = observed.iter().map(|s| s.rho_n).fold(f64::INFINITY, f64::min);
    let hi = observed.iter().map(|s| s.rho_n).fold(f64::NEG_INFINITY, f64::max);
    Ok(RotationSetEstimate {
        u_radius,
        v_radius,
        n_range: [n_min, n_max],
        observed,
        hull: [lo, hi],
    })
}

/// Qualitative behaviour of hulls over shrinking neighbourhoods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    /// Hull widths and distances to the limit candidate shrink monotonically.
    Shrinking,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSetSequence {
    pub estimates: Vec<RotationSetEstimate>,
    pub convergence: Convergence,
}

/// Local rotation sets for the nested neighbourhoods `U_k` with
/// `V_k = v_ratio U_k`, listed from largest to smallest.
pub fn nested_rotation_sets<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    u_radii: &[f64],
    v_ratio: f64,
    n_max: usize,
    grid: usize,
) -> Result<RotationSetSequence> {
    let mut radii = u_radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let estimates = radii
        .iter()
        .map(|&u| local_rotation_set(map, z0, u, v_ratio * u, n_max, grid))
        .collect::<Result<Vec<_>>>()?;
    let last = estimates
        .last()
        .map(|e| 0.5 * (e.hull[0] + e.hull[1]))
        .unwrap_or(0.0);
    let reach = |e: &RotationSetEstimate| (e.hull[0] - last).abs().max((e.hull[1] - last).abs());
    let shrinking = estimates
        .windows(2)
        .all(|w| reach(&w[1]) <= reach(&w[0]) + 1.0 / n_max as f64);
    let convergence = if shrinking && estimates.len() > 1 {
        Convergence::Shrinking
    } else {
        Convergence::Inconclusive
    };
    Ok(RotationSetSequence {
        estimates,
        convergence,
    })
}

/// The isotopy `t -> R(2 pi turns t) (f_t(z) - center) + center`: the same
/// time-one map, with `turns` extra full turns about `center`.
#[derive(Clone, Copy, Debug)]
pub struct TurnedIsotopy<M> {
    pub inner: M,
    pub center: Point,
    pub turns: i64,
}

impl<M: Isotopy> Isotopy for TurnedIsotopy<M> {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        let w = self.inner.eval(t, z)?;
        Ok(self.center + rotation_matrix(TAU * self.turns as f64 * t) * (w - self.center))
    }

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        let (w, j) = self.inner.eval_with_jacobian(t, z)?;
        let rot = rotation_matrix(TAU * self.turns as f64 * t);
        Ok((self.center + rot * (w - self.center), rot * j))
    }

    fn domain(&self) -> Window {
        self.inner.domain()
    }
}

/// `times` copies of an isotopy run one after another, an isotopy from the
/// identity to `f^times`.
#[derive(Clone, Copy, Debug)]
pub struct IteratedIsotopy<M> {
    pub inner: M,
    pub times: usize,
}

impl<M: Isotopy> IteratedIsotopy<M> {
    fn slot(&self, t: f64) -> (usize, f64) {
        let s = t.clamp(0.0, 1.0) * self.times as f64;
        let j = (s.floor() as usize).min(self.times - 1);
        (j, s - j as f64)
    }
}

impl<M: Isotopy> Isotopy for IteratedIsotopy<M> {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        let (j, local) = self.slot(t);
        let mut cur = z;
        for _ in 0..j {
            cur = self.inner.forward(cur)?;
        }
        self.inner.eval(local, cur)
    }

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        let (j, local) = self.slot(t);
        let mut cur = z;
        let mut jac = Mat2::identity();
        for _ in 0..j {
            let (w, dj) = self.inner.forward_with_jacobian(cur)?;
            cur = w;
            jac = dj * jac;
        }
        let (w, dj) = self.inner.eval_with_jacobian(local, cur)?;
        Ok((w, dj * jac))
    }

    fn domain(&self) -> Window {
        self.inner.domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::genfun::GeneratedMap;

    #[test]
    fn rigid_rotation_blowup() {
        let map = GeneratedMap::new(catalog::rigid_rotation(0.1).unwrap());
        let b = blowup_rotation_number(&map, point(0.0, 0.0)).unwrap();
        assert!(!b.parabolic);
        assert!((b.value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_maximum_is_parabolic() {
        let map = GeneratedMap::new(catalog::degmax());
        let b = blowup_rotation_number(&map, point(0.0, 0.0)).unwrap();
        assert!(b.parabolic);
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn saddle_blowup_is_zero() {
        let map = GeneratedMap::new(catalog::saddle());
        let b = blowup_rotation_number(&map, point(0.0, 0.0)).unwrap();
        assert!(b.value.abs() <= b.error_bar, "{b:?}");
    }

    #[test]
    fn rigid_rotation_orbit() {
        let map = GeneratedMap::new(catalog::rigid_rotation(0.1).unwrap());
        let s = orbit_rotation_number(&map, point(0.3, 0.1), point(0.0, 0.0), 10).unwrap();
        assert!((s.rho_n - 0.1).abs() < 1e-12);
    }

    #[test]
    fn turned_isotopy_shifts_by_one() {
        let map = GeneratedMap::new(catalog::degmax());
        let z0 = point(0.0, 0.0);
        let z = point(0.2, 0.1);
        let base = orbit_rotation_number(&map, z, z0, 7).unwrap().rho_n;
        let turned = TurnedIsotopy {
            inner: &map,
            center: z0,
            turns: 1,
        };
        let shifted = orbit_rotation_number(&turned, z, z0, 7).unwrap().rho_n;
        assert!((shifted - base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn escaping_orbit_is_reported() {
        let map = GeneratedMap::new(catalog::shear());
        assert!(matches!(
            orbit_rotation_number(&map, point(0.0, 0.3), point(0.0, 0.0), 20),
            Err(Error::OrbitEscaped { .. })
        ));
    }
}
