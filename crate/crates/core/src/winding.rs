//! Angle lifting, Brouwer degrees and fixed-point indices.
//!
//! Every winding computation goes through [`lift_path`], which bisects a
//! parametrised path until consecutive samples turn by less than a quarter
//! turn about the puncture. Summing principal angle differences is then exact.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::Isotopy;
use crate::geometry::{point, signed_angle, Point};
use crate::solve::{levenberg_marquardt, NewtonOptions};

/// Total sample budget for one curve.
pub const SAMPLE_BUDGET: usize = 1 << 20;
/// Samples placed uniformly before refinement starts.
pub const INITIAL_SAMPLES: usize = 64;
/// Relative displacement below which a field counts as vanishing.
pub const VANISHING_RTOL: f64 = 1e-10;

/// Samples along a path with continuously lifted angles about `puncture`,
/// in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPath {
    pub samples: Vec<Point>,
    pub angles: Vec<f64>,
    pub puncture: Point,
}

impl LiftedPath {
    /// Lifts an already refined sample sequence. Fails with `Aliased` if two
    /// consecutive samples turn by a quarter turn or more, and with
    /// `PunctureHit` if a sample is the puncture.
    pub fn from_samples(samples: Vec<Point>, puncture: Point) -> Result<Self> {
        let mut angles = Vec::with_capacity(samples.len());
        for (i, z) in samples.iter().enumerate() {
            let v = z - puncture;
            if v.norm() == 0.0 {
                return Err(Error::PunctureHit { step: i });
            }
            let theta = match (i, angles.last()) {
                (0, _) | (_, None) => v.y.atan2(v.x),
                (_, Some(&prev)) => {
                    let step = signed_angle(&(samples[i - 1] - puncture), &v);
                    if step.abs() >= FRAC_PI_2 {
                        return Err(Error::Aliased {
                            budget: samples.len(),
                        });
                    }
                    prev + step
                }
            };
            angles.push(theta);
        }
        Ok(Self {
            samples,
            angles,
            puncture,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Angle swept from the first to the last sample, in turns.
    pub fn turns(&self) -> f64 {
        match (self.angles.first(), self.angles.last()) {
            (Some(a), Some(b)) => (b - a) / TAU,
            _ => 0.0,
        }
    }

    pub fn max_step(&self) -> f64 {
        self.angles
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation between the sample directions and the lifted angles.
    pub fn exp_map_defect(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.angles)
            .map(|(z, &theta)| {
                let v = (z - self.puncture).normalize();
                (v - point(theta.cos(), theta.sin())).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LiftOptions {
    pub initial: usize,
    pub budget: usize,
    /// Largest accepted angle between consecutive samples.
    pub step_guard: f64,
    /// Samples closer than this to the puncture count as vanishing.
    pub threshold: f64,
    /// The path value at parameter 1 equals the value at 0.
    pub closed: bool,
}

impl LiftOptions {
    pub fn closed(threshold: f64) -> Self {
        Self {
            initial: INITIAL_SAMPLES,
            budget: SAMPLE_BUDGET,
            step_guard: FRAC_PI_2,
            threshold,
            closed: true,
        }
    }

    pub fn open(threshold: f64) -> Self {
        Self {
            initial: 16,
            budget: 1 << 14,
            step_guard: FRAC_PI_4,
            threshold,
            closed: false,
        }
    }
}

/// Adaptive lift of `s -> path(s) - puncture` for `s` in `[0, 1]`.
///
/// Returns the refined lift and the smallest distance to the puncture seen.
pub fn lift_path<F>(path: F, puncture: Point, opts: &LiftOptions) -> Result<(LiftedPath, f64)>
where
    F: Fn(f64) -> Result<Point> + Sync,
{
    let n = opts.initial.max(2);
    let params: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let mut values: Vec<Point> = params.par_iter().map(|&s| path(s)).collect::<Result<Vec<_>>>()?;
    let mut min_norm = f64::INFINITY;
    let check = |v: &Point, min_norm: &mut f64| -> Result<()> {
        let d = (v - puncture).norm();
        *min_norm = min_norm.min(d);
        if d < opts.threshold {
            return Err(Error::VanishingField {
                min_norm: d,
                threshold: opts.threshold,
            });
        }
        Ok(())
    };
    for v in &values {
        check(v, &mut min_norm)?;
    }
    let last = if opts.closed { values[0] } else { path(1.0)? };
    check(&last, &mut min_norm)?;

    let mut pending: Vec<(f64, Point)> = std::iter::once((1.0, last))
        .chain(params.iter().copied().zip(values.iter().copied()).skip(1).rev())
        .collect();
    let mut done: Vec<(f64, Point)> = vec![(0.0, values[0])];
    let mut used = n + usize::from(!opts.closed);
    while let Some(&(s, v)) = pending.last() {
        let (sa, va) = *done.last().expect("nonempty");
        if signed_angle(&(va - puncture), &(v - puncture)).abs() < opts.step_guard {
            done.push((s, v));
            pending.pop();
            continue;
        }
        if used >= opts.budget || s - sa < 1e-15 {
            return Err(Error::Aliased { budget: opts.budget });
        }
        let mid = 0.5 * (sa + s);
        let vm = path(mid)?;
        check(&vm, &mut min_norm)?;
        used += 1;
        pending.push((mid, vm));
    }
    values.clear();
    values.extend(done.into_iter().map(|(_, v)| v));
    Ok((LiftedPath::from_samples(values, puncture)?, min_norm))
}

/// Closed planar curve parametrised on `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Curve {
    Circle { center: Point, radius: f64 },
    Polyline { vertices: Vec<Point> },
}

impl Curve {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("circle radius {radius} must be positive")));
        }
        Ok(Curve::Circle { center, radius })
    }

    /// Closed polyline through `vertices`; the last vertex joins the first.
    pub fn polyline(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::invalid("a closed polyline needs at least 3 vertices"));
        }
        Ok(Curve::Polyline { vertices })
    }

    pub fn point_at(&self, s: f64) -> Point {
        match self {
            Curve::Circle { center, radius } => {
                let a = TAU * s;
                center + point(a.cos(), a.sin()) * *radius
            }
            Curve::Polyline { vertices } => {
                let n = vertices.len();
                let u = s.rem_euclid(1.0) * n as f64;
                let i = (u.floor() as usize).min(n - 1);
                let frac = u - i as f64;
                vertices[i] * (1.0 - frac) + vertices[(i + 1) % n] * frac
            }
        }
    }

    /// Length scale used for vanishing thresholds.
    pub fn scale(&self) -> f64 {
        match self {
            Curve::Circle { radius, .. } => *radius,
            Curve::Polyline { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((a - b).norm());
                    }
                }
                0.5 * d
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub samples: usize,
    pub min_norm: f64,
}

fn integer_turns(turns: f64) -> Result<i64> {
    let k = turns.round();
    if (turns - k).abs() > 1e-6 {
        return Err(Error::InvariantBreach(format!(
            "closed-loop winding {turns} is not an integer"
        )));
    }
    Ok(k as i64)
}

/// Winding number of `field` along `curve`.
pub fn brouwer_degree<F>(field: F, curve: &Curve) -> Result<DegreeReport>
where
    F: Fn(Point) -> Result<Point> + Sync,
{
    let threshold = VANISHING_RTOL * curve.scale();
    let (lift, min_norm) = lift_path(
        |s| field(curve.point_at(s)),
        point(0.0, 0.0),
        &LiftOptions::closed(threshold),
    )?;
    Ok(DegreeReport {
        degree: integer_turns(lift.turns())?,
        samples: lift.len(),
        min_norm,
    })
}

/// Angle swept by `t -> f_t(z)` about `puncture`, in turns.
pub fn trajectory_turns<M: Isotopy + ?Sized>(map: &M, z: Point, puncture: Point) -> Result<f64> {
    let threshold = 1e-14 * (1.0 + puncture.norm());
    let (lift, _) =
        lift_path(|t| map.eval(t, z), puncture, &LiftOptions::open(threshold)).map_err(|e| match e {
            Error::VanishingField { .. } => Error::PunctureHit { step: 0 },
            other => other,
        })?;
    Ok(lift.turns())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub value: i64,
    pub curve_radius: f64,
    pub samples_used: usize,
    /// Smallest `|f(z) - z|` on the curve.
    pub min_displacement: f64,
}

const SCREEN_RADII: usize = 16;
const SCREEN_ANGLES: usize = 64;
const SCREEN_MAX_STARTS: usize = 16;

fn check_fixed<M: Isotopy + ?Sized>(map: &M, z0: Point) -> Result<()> {
    let d = (map.forward(z0)? - z0).norm();
    if d > 1e-10 {
        return Err(Error::HypothesisViolated(format!(
            "({}, {}) is not fixed: |f(z0) - z0| = {d:e}",
            z0.x, z0.y
        )));
    }
    Ok(())
}

/// Looks for fixed points other than `z0` in the closed disc of radius
/// `2 radius`: Newton is started from the local minima of `|f(z) - z|` on a
/// polar grid over `(radius / 8, 2 radius]`.
pub fn screen_isolation<M: Isotopy + ?Sized>(map: &M, z0: Point, radius: f64) -> Result<()> {
    let r_min = radius / 8.0;
    let r_max = 2.0 * radius;
    let grid: Vec<(usize, usize, Point)> = (0..SCREEN_RADII)
        .flat_map(|i| (0..SCREEN_ANGLES).map(move |j| (i, j)))
        .map(|(i, j)| {
            let r = r_min + (r_max - r_min) * i as f64 / (SCREEN_RADII - 1) as f64;
            let a = TAU * j as f64 / SCREEN_ANGLES as f64;
            (i, j, z0 + point(a.cos(), a.sin()) * r)
        })
        .collect();
    let disp: Vec<f64> = grid
        .par_iter()
        .map(|(_, _, z)| map.forward(*z).map(|w| (w - z).norm()).unwrap_or(f64::INFINITY))
        .collect();
    let at = |i: usize, j: usize| disp[i * SCREEN_ANGLES + j % SCREEN_ANGLES];
    let mut minima: Vec<(f64, Point)> = Vec::new();
    for &(i, j, z) in &grid {
        let d = at(i, j);
        if !d.is_finite() {
            continue;
        }
        let mut is_min = true;
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                let ii = i as i64 + di;
                if (di, dj) == (0, 0) || ii < 0 || ii >= SCREEN_RADII as i64 {
                    continue;
                }
                let jj = (j as i64 + dj).rem_euclid(SCREEN_ANGLES as i64) as usize;
                if at(ii as usize, jj) < d {
                    is_min = false;
                }
            }
        }
        if is_min {
            minima.push((d, z));
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(SCREEN_MAX_STARTS);
    let near = radius / 16.0;
    let opts = NewtonOptions {
        tol: 1e-12 * radius.max(1e-300),
        ..NewtonOptions::default()
    };
    let found: Vec<Option<Point>> = minima
        .par_iter()
        .map(|&(_, start)| {
            let eval = |z: Point| {
                let (w, j) = map.forward_with_jacobian(z)?;
                Ok((w - z, j - crate::geometry::Mat2::identity()))
            };
            levenberg_marquardt(eval, start, &opts, |z| (z - z0).norm() < near)
                .ok()
                .map(|out| out.z)
                .filter(|z| {
                    let d = (z - z0).norm();
                    d >= near && d <= r_max * (1.0 + 1e-9)
                })
        })
        .collect();
    match found.into_iter().flatten().next() {
        Some(other) => Err(Error::NotIsolated { other }),
        None => Ok(()),
    }
}

fn displacement_degree<M: Isotopy + ?Sized>(map: &M, z0: Point, radius: f64) -> Result<DegreeReport> {
    let curve = Curve::circle(z0, radius)?;
    brouwer_degree(|z| Ok(map.forward(z)? - z), &curve).map_err(|e| match e {
        Error::VanishingField { min_norm, .. } => Error::FixedPointOnCurve {
            min_displacement: min_norm,
        },
        other => other,
    })
}

/// Lefschetz index of the fixed point `z0`, computed on the circle of the
/// given radius and confirmed on the circle of half that radius.
pub fn lefschetz_index<M: Isotopy + ?Sized>(map: &M, z0: Point, radius: f64) -> Result<IndexReport> {
    check_fixed(map, z0)?;
    if !map.domain().contains_disc(&z0, 2.0 * radius) {
        return Err(Error::invalid(format!(
            "disc of radius {} about z0 leaves the window",
            2.0 * radius
        )));
    }
    screen_isolation(map, z0, radius)?;
    let outer = displacement_degree(map, z0, radius)?;
    let inner = displacement_degree(map, z0, 0.5 * radius)?;
    if outer.degree != inner.degree {
        return Err(Error::IndexUnstable {
            outer: outer.degree,
            inner: inner.degree,
        });
    }
    Ok(IndexReport {
        value: outer.degree,
        curve_radius: radius,
        samples_used: outer.samples + inner.samples,
        min_displacement: outer.min_norm,
    })
}

/// Displacement of the lifted time-one map in the covering coordinates
/// `(theta, y) -> z0 - y e^{2 pi i theta}`: the angle swept along the isotopy
/// (turns) and the change of `y`.
pub fn lifted_displacement<M: Isotopy + ?Sized>(map: &M, z: Point, z0: Point) -> Result<Point> {
    let turns = trajectory_turns(map, z, z0)?;
    let image = map.forward(z)?;
    Ok(point(turns, (z - z0).norm() - (image - z0).norm()))
}

/// Index of the isotopy at `z0`: degree of the lifted displacement as `theta`
/// runs over one fundamental segment of the circle of the given radius.
pub fn isotopy_index<M: Isotopy + ?Sized>(map: &M, z0: Point, radius: f64) -> Result<IndexReport> {
    check_fixed(map, z0)?;
    let curve = Curve::circle(z0, radius)?;
    let threshold = VANISHING_RTOL * radius;
    let (lift, min_norm) = lift_path(
        |s| lifted_displacement(map, curve.point_at(s), z0),
        point(0.0, 0.0),
        &LiftOptions::closed(threshold),
    )?;
    Ok(IndexReport {
        value: integer_turns(lift.turns())?,
        curve_radius: radius,
        samples_used: lift.len(),
        min_displacement: min_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::genfun::{GeneratedMap, MapFactorization};

    #[test]
    fn identity_and_reflection_fields() {
        let circle = Curve::circle(point(0.0, 0.0), 1.0).unwrap();
        assert_eq!(brouwer_degree(Ok, &circle).unwrap().degree, 1);
        assert_eq!(
            brouwer_degree(|z| Ok(point(z.x, -z.y)), &circle).unwrap().degree,
            -1
        );
    }

    #[test]
    fn high_frequency_field_is_refined() {
        // z^40 winds 40 times; 64 initial samples alias without refinement
        let circle = Curve::circle(point(0.0, 0.0), 1.0).unwrap();
        let report = brouwer_degree(
            |z| {
                let a = 40.0 * z.y.atan2(z.x);
                Ok(point(a.cos(), a.sin()))
            },
            &circle,
        )
        .unwrap();
        assert_eq!(report.degree, 40);
        assert!(report.samples > INITIAL_SAMPLES);
    }

    #[test]
    fn vanishing_field_is_rejected() {
        let circle = Curve::circle(point(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            brouwer_degree(Ok, &circle),
            Err(Error::VanishingField { .. })
        ));
    }

    #[test]
    fn polyline_square() {
        let square = Curve::polyline(vec![
            point(-1.0, -1.0),
            point(1.0, -1.0),
            point(1.0, 1.0),
            point(-1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(brouwer_degree(Ok, &square).unwrap().degree, 1);
        assert_eq!(
            brouwer_degree(|z| Ok(z - point(3.0, 0.0)), &square)
                .unwrap()
                .degree,
            0
        );
    }

    #[test]
    fn lifted_path_detects_aliasing() {
        let samples = vec![point(1.0, 0.0), point(-1.0, 0.1)];
        assert!(matches!(
            LiftedPath::from_samples(samples, point(0.0, 0.0)),
            Err(Error::Aliased { .. })
        ));
    }

    #[test]
    fn lefschetz_saddle_and_elliptic() {
        let saddle = GeneratedMap::new(catalog::saddle());
        assert_eq!(lefschetz_index(&saddle, point(0.0, 0.0), 0.1).unwrap().value, -1);
        let elliptic = GeneratedMap::new(catalog::elliptic(0.1).unwrap());
        assert_eq!(
            lefschetz_index(&elliptic, point(0.0, 0.0), 0.05).unwrap().value,
            1
        );
    }

    #[test]
    fn shear_fixed_line_is_not_isolated() {
        let shear = GeneratedMap::new(catalog::shear());
        assert!(matches!(
            lefschetz_index(&shear, point(0.0, 0.0), 0.1),
            Err(Error::NotIsolated { .. })
        ));
    }

    #[test]
    fn isotopy_index_identity_is_degenerate() {
        let zero = crate::genfun::GeneratingFunction::polynomial(
            "zero",
            crate::genfun::Polynomial::zero(),
            crate::geometry::Window::centered(1.0),
        )
        .unwrap();
        let id = MapFactorization::single(zero);
        assert!(matches!(
            isotopy_index(&id, point(0.0, 0.0), 0.1),
            Err(Error::VanishingField { .. })
        ));
    }

    #[test]
    fn degenerate_maximum_indices() {
        let degmax = GeneratedMap::new(catalog::degmax());
        let z0 = point(0.0, 0.0);
        assert_eq!(lefschetz_index(&degmax, z0, 0.1).unwrap().value, 1);
        assert_eq!(isotopy_index(&degmax, z0, 0.1).unwrap().value, 0);
    }

    #[test]
    fn saddle_isotopy_index() {
        let saddle = GeneratedMap::new(catalog::saddle());
        assert_eq!(isotopy_index(&saddle, point(0.0, 0.0), 0.1).unwrap().value, -2);
    }
}
