//! Search for periodic orbits of type `(p, q)` about a fixed point.
//!
//! An orbit has type `(p, q)` when it has period `q` and the isotopy
//! trajectory of any of its points, followed for `q` iterates, turns `p` times
//! about the fixed point.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{find_critical_point, ActionChain, CriticalOptions};
use crate::error::{Error, Result};
use crate::genfun::{Isotopy, MapFactorization};
use crate::geometry::{min_singular_value, point, Mat2, Point};
use crate::rotation::{blowup_rotation_number, orbit_rotation_number};
use crate::solve::{levenberg_marquardt, NewtonOptions};
use crate::winding::lefschetz_index;

/// Largest accepted `|f^q(z) - z|` for a returned orbit.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Smallest gap between distinct points of one orbit.
pub const MIN_GAP: f64 = 1e-8;
/// Hausdorff distance below which two point sets are the same orbit.
pub const SAME_ORBIT_TOL: f64 = 1e-7;
/// Seeds per ring for period `q`.
pub const SEEDS_PER_PERIOD: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finder {
    Direct,
    Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub p: i64,
    pub q: usize,
    /// The orbit in iteration order, starting from its lexicographically
    /// smallest point.
    pub points: Vec<Point>,
    pub residual: f64,
    pub winding: i64,
    pub r_max: f64,
    pub r_mean: f64,
    /// Smallest singular value of `Df^q - I` at the first point; position
    /// errors are roughly `residual / conditioning`.
    pub conditioning: f64,
    pub finder: Finder,
}

fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// Largest distance from a point of one set to the other set.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

impl OrbitRecord {
    pub fn same_orbit(&self, other: &OrbitRecord) -> bool {
        self.q == other.q && hausdorff_distance(&self.points, &other.points) <= SAME_ORBIT_TOL
    }

    /// Recomputes `|f^q(z) - z|` from the first stored point.
    pub fn recompute_residual<M: Isotopy + ?Sized>(&self, map: &M) -> Result<f64> {
        let z = self.points[0];
        Ok((iterate(map, z, self.q)? - z).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureStats {
    pub r_max: f64,
    pub r_mean: f64,
    /// Wasserstein-1 distance from the uniform measure on the orbit to the
    /// Dirac mass at `z0`.
    pub first_moment: f64,
}

pub fn orbit_measure_stats(points: &[Point], z0: Point) -> MeasureStats {
    if points.is_empty() {
        return MeasureStats {
            r_max: 0.0,
            r_mean: 0.0,
            first_moment: 0.0,
        };
    }
    let radii: Vec<f64> = points.iter().map(|z| (z - z0).norm()).collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    MeasureStats {
        r_max: radii.iter().copied().fold(0.0, f64::max),
        r_mean: mean,
        first_moment: mean,
    }
}

fn iterate<M: Isotopy + ?Sized>(map: &M, z: Point, n: usize) -> Result<Point> {
    (0..n).try_fold(z, |cur, _| map.forward(cur))
}

fn iterate_with_jacobian<M: Isotopy + ?Sized>(map: &M, z: Point, n: usize) -> Result<(Point, Mat2)> {
    (0..n).try_fold((z, Mat2::identity()), |(cur, jac), _| {
        let (w, j) = map.forward_with_jacobian(cur)?;
        Ok((w, j * jac))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRing {
    pub radius: f64,
    pub count: usize,
}

impl SeedRing {
    pub fn seeds(&self, z0: Point) -> Vec<Point> {
        // half-step phase offset keeps seeds off the coordinate axes
        (0..self.count)
            .map(|i| {
                let a = TAU * (i as f64 + 0.5) / self.count as f64;
                z0 + point(a.cos(), a.sin()) * self.radius
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub wrong_winding: usize,
    /// Smallest final residual over all seeds, converged or not.
    pub best_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSearch {
    pub orbits: Vec<OrbitRecord>,
    pub diagnostics: SearchDiagnostics,
}

enum SeedOutcome {
    Orbit(OrbitRecord),
    WrongWinding,
    Failed(f64),
}

/// Builds the record of the periodic orbit through `z`, or `None` if `z` is
/// not an honest period-`q` point away from `z0`.
fn classify<M: Isotopy + ?Sized>(
    map: &M,
    z: Point,
    z0: Point,
    q: usize,
) -> Result<Option<(OrbitRecord, f64)>> {
    let mut points = Vec::with_capacity(q);
    let mut cur = z;
    for _ in 0..q {
        points.push(cur);
        cur = map.forward(cur)?;
    }
    for (i, a) in points.iter().enumerate() {
        if (a - z0).norm() <= MIN_GAP {
            return Ok(None);
        }
        if points[i + 1..].iter().any(|b| (a - b).norm() <= MIN_GAP) {
            return Ok(None);
        }
    }
    let start = (0..q)
        .min_by(|&i, &j| lex_cmp(&points[i], &points[j]))
        .expect("q >= 1");
    points.rotate_left(start);
    let (image, jac) = iterate_with_jacobian(map, points[0], q)?;
    let residual = (image - points[0]).norm();
    if residual >= RESIDUAL_TOL {
        return Ok(None);
    }
    let sample = orbit_rotation_number(map, points[0], z0, q)?;
    let turns = sample.rho_n * q as f64;
    let winding = turns.round();
    let stats = orbit_measure_stats(&points, z0);
    Ok(Some((
        OrbitRecord {
            p: winding as i64,
            q,
            points,
            residual,
            winding: winding as i64,
            r_max: stats.r_max,
            r_mean: stats.r_mean,
            conditioning: min_singular_value(&(jac - Mat2::identity())),
            finder: Finder::Direct,
        },
        (turns - winding).abs(),
    )))
}

fn merge_orbits(candidates: impl IntoIterator<Item = OrbitRecord>) -> Vec<OrbitRecord> {
    let mut out: Vec<OrbitRecord> = Vec::new();
    for c in candidates {
        if !out.iter().any(|o| o.same_orbit(&c)) {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.q.cmp(&b.q).then(lex_cmp(&a.points[0], &b.points[0])));
    out
}

fn check_pq(p: i64, q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::invalid("period must be positive"));
    }
    if p.gcd(&(q as i64)) != 1 {
        return Err(Error::NotIrreducible { p, q: q as i64 });
    }
    Ok(())
}

/// Newton on `f^q(z) - z` from every seed of every ring, keeping the roots
/// whose orbits wind exactly `p` times about `z0`.
pub fn find_pq_orbit<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    p: i64,
    q: usize,
    rings: &[SeedRing],
) -> Result<OrbitSearch> {
    let seeds: Vec<Point> = rings.iter().flat_map(|r| r.seeds(z0)).collect();
    find_pq_orbit_from(map, z0, p, q, &seeds)
}

/// [`find_pq_orbit`] from an explicit list of seeds.
pub fn find_pq_orbit_from<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    p: i64,
    q: usize,
    seeds: &[Point],
) -> Result<OrbitSearch> {
    check_pq(p, q)?;
    let opts = NewtonOptions {
        tol: 1e-13,
        max_iter: 60,
        ..NewtonOptions::default()
    };
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|&seed| {
            let eval = |z: Point| {
                let (w, j) = iterate_with_jacobian(map, z, q)?;
                Ok((w - z, j - Mat2::identity()))
            };
            let out = match levenberg_marquardt(eval, seed, &opts, |_| false) {
                Ok(out) => out,
                Err(Error::NonConvergence { residual, .. }) => return SeedOutcome::Failed(residual),
                Err(_) => return SeedOutcome::Failed(f64::INFINITY),
            };
            match classify(map, out.z, z0, q) {
                Ok(Some((rec, _))) if rec.winding == p => SeedOutcome::Orbit(rec),
                Ok(Some(_)) => SeedOutcome::WrongWinding,
                _ => SeedOutcome::Failed(out.residual),
            }
        })
        .collect();
    let mut diagnostics = SearchDiagnostics {
        seeds: seeds.len(),
        best_residual: f64::INFINITY,
        ..SearchDiagnostics::default()
    };
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            SeedOutcome::Orbit(rec) => {
                diagnostics.converged += 1;
                diagnostics.best_residual = diagnostics.best_residual.min(rec.residual);
                found.push(rec);
            }
            SeedOutcome::WrongWinding => {
                diagnostics.converged += 1;
                diagnostics.wrong_winding += 1;
            }
            SeedOutcome::Failed(r) => diagnostics.best_residual = diagnostics.best_residual.min(r),
        }
    }
    Ok(OrbitSearch {
        orbits: merge_orbits(found),
        diagnostics,
    })
}

/// Gradient norm demanded of action critical points used as orbits; tighter
/// than the generic criticality tolerance so that the `f^q` residual of the
/// recovered orbit stays below [`RESIDUAL_TOL`].
pub const ACTION_ORBIT_TOL: f64 = 1e-13;

fn action_orbit(
    factorization: &MapFactorization,
    z0: Point,
    p: i64,
    q: usize,
    chain: Vec<Point>,
) -> Option<OrbitRecord> {
    let opts = CriticalOptions {
        tol: ACTION_ORBIT_TOL,
        puncture: Some(z0),
        ..CriticalOptions::default()
    };
    let report = match find_critical_point(factorization, q, chain, &opts) {
        Ok(r) => r,
        Err(_) => return None,
    };
    let (mut rec, _) = classify(factorization, report.orbit_point, z0, q).ok()??;
    (rec.winding == p).then(|| {
        rec.finder = Finder::Action;
        rec
    })
}

/// Critical points of the action from the same seed rings. Each seed is
/// turned into a chain by following its factor steps.
pub fn find_pq_orbit_action(
    factorization: &MapFactorization,
    z0: Point,
    p: i64,
    q: usize,
    rings: &[SeedRing],
) -> Result<Vec<OrbitRecord>> {
    check_pq(p, q)?;
    let seeds: Vec<Point> = rings.iter().flat_map(|r| r.seeds(z0)).collect();
    let found: Vec<Option<OrbitRecord>> = seeds
        .par_iter()
        .map(|&seed| {
            let chain = ActionChain::from_orbit(factorization.clone(), q, seed).ok()?;
            action_orbit(factorization, z0, p, q, chain.points().to_vec())
        })
        .collect();
    Ok(merge_orbits(found.into_iter().flatten()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinderAgreement {
    /// Largest Hausdorff distance between an orbit and its re-solved copy.
    pub max_distance: f64,
    pub unmatched_direct: usize,
    pub unmatched_action: usize,
}

impl FinderAgreement {
    pub fn agrees(&self) -> bool {
        self.unmatched_direct == 0 && self.unmatched_action == 0 && self.max_distance <= SAME_ORBIT_TOL
    }
}

/// Relative size of the perturbation applied before re-solving an orbit with
/// the other finder.
pub const CROSS_CHECK_PERTURBATION: f64 = 1e-5;

fn perturb(z: Point, z0: Point, i: usize) -> Point {
    let r = (z - z0).norm().max(1e-3);
    let a = 0.7 + i as f64;
    z + point(a.cos(), a.sin()) * (CROSS_CHECK_PERTURBATION * r)
}

/// Re-solves every direct orbit with the action finder and every action
/// orbit with the direct finder, each from a perturbed copy of the orbit, and
/// measures how far the re-solved orbit lands from the original.
pub fn cross_check_finders(
    factorization: &MapFactorization,
    z0: Point,
    direct: &[OrbitRecord],
    action: &[OrbitRecord],
) -> FinderAgreement {
    let direct_hits: Vec<Option<f64>> = direct
        .par_iter()
        .map(|o| {
            let n = factorization.len() * o.q;
            let mut chain = ActionChain::from_orbit(factorization.clone(), o.q, o.points[0])
                .ok()?
                .points()
                .to_vec();
            for (i, z) in chain.iter_mut().enumerate().take(n) {
                *z = perturb(*z, z0, i);
            }
            let rec = action_orbit(factorization, z0, o.p, o.q, chain)?;
            Some(hausdorff_distance(&rec.points, &o.points))
        })
        .collect();
    let action_hits: Vec<Option<f64>> = action
        .par_iter()
        .map(|o| {
            let seed = perturb(o.points[0], z0, 0);
            let search = find_pq_orbit_from(factorization, z0, o.p, o.q, &[seed]).ok()?;
            search
                .orbits
                .iter()
                .map(|r| hausdorff_distance(&r.points, &o.points))
                .reduce(f64::min)
        })
        .collect();
    let mut agreement = FinderAgreement {
        max_distance: 0.0,
        unmatched_direct: 0,
        unmatched_action: 0,
    };
    for (hits, unmatched) in [
        (direct_hits, &mut agreement.unmatched_direct),
        (action_hits, &mut agreement.unmatched_action),
    ] {
        for h in hits {
            match h {
                Some(d) if d <= SAME_ORBIT_TOL => agreement.max_distance = agreement.max_distance.max(d),
                _ => *unmatched += 1,
            }
        }
    }
    agreement
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistSample {
    pub radius: f64,
    pub rotation: f64,
}

/// Orbit rotation numbers of the points `z0 + r (cos a, sin a)` over `n`
/// iterates. Radii whose orbits leave the window are skipped.
pub fn twist_profile<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    radii: &[f64],
    direction: f64,
    n: usize,
) -> Vec<TwistSample> {
    let dir = point(direction.cos(), direction.sin());
    let samples: Vec<Option<TwistSample>> = radii
        .par_iter()
        .map(|&r| {
            orbit_rotation_number(map, z0 + dir * r, z0, n)
                .ok()
                .map(|s| TwistSample {
                    radius: r,
                    rotation: s.rho_n,
                })
        })
        .collect();
    samples.into_iter().flatten().collect()
}

/// Least-squares `c` in `rotation = c r^2`.
pub fn fit_quadratic_twist(profile: &[TwistSample]) -> Option<f64> {
    let num: f64 = profile.iter().map(|s| s.rotation * s.radius.powi(2)).sum();
    let den: f64 = profile.iter().map(|s| s.radius.powi(4)).sum();
    (den > 0.0 && num != 0.0).then(|| num / den)
}

/// Radius at which the profile reaches `target`: interpolated inside the
/// sampled range, extrapolated by the quadratic fit outside it.
pub fn radius_for_rotation(profile: &[TwistSample], target: f64) -> Option<f64> {
    for w in profile.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.rotation - target) * (b.rotation - target) <= 0.0 && a.rotation != b.rotation {
            let u = (target - a.rotation) / (b.rotation - a.rotation);
            return Some(a.radius + u * (b.radius - a.radius));
        }
    }
    let c = fit_quadratic_twist(profile)?;
    let r2 = target / c;
    (r2 > 0.0).then(|| r2.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Positive => 1,
            Side::Negative => -1,
        }
    }

    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Negative
        } else {
            Side::Positive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyPOptions {
    /// `None` takes the side of the twist profile.
    pub side: Option<Side>,
    pub index_radius: f64,
    /// Radii sampled for the twist profile.
    pub profile_radii: Vec<f64>,
    pub profile_iterates: usize,
    /// Relative offsets of the three seed rings around the fitted radius.
    pub ring_spread: f64,
}

impl Default for PropertyPOptions {
    fn default() -> Self {
        Self {
            side: None,
            index_radius: 0.1,
            profile_radii: (1..=12).map(|i| 0.05 * i as f64).collect(),
            profile_iterates: 64,
            ring_spread: 0.03,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub index: Option<i64>,
    pub parabolic: bool,
    pub note: Option<String>,
}

impl Hypotheses {
    pub fn satisfied(&self) -> bool {
        self.index == Some(1) && self.parabolic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub p: i64,
    pub q: usize,
    pub r_max: f64,
    pub r_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyPReport {
    pub k: i64,
    pub side: Side,
    pub hypotheses: Hypotheses,
    pub twist_fit: Option<f64>,
    pub tested: Vec<(i64, usize)>,
    pub found: Vec<OrbitRecord>,
    /// One row per tested `(p, q)` with an orbit: the orbit nearest to `z0`.
    pub concentration: Vec<ConcentrationRow>,
    pub diagnostics: Vec<SearchDiagnostics>,
}

impl PropertyPReport {
    /// An orbit for every tested `(p, q)` and `r_max` strictly decreasing
    /// in `q`.
    pub fn success(&self) -> bool {
        self.concentration.len() == self.tested.len()
            && self.concentration.windows(2).all(|w| w[1].r_max < w[0].r_max)
    }

    pub fn check_hypotheses(&self) -> Result<()> {
        if self.hypotheses.satisfied() {
            Ok(())
        } else {
            Err(Error::HypothesisViolated(format!(
                "index {:?}, parabolic {}{}",
                self.hypotheses.index,
                self.hypotheses.parabolic,
                self.hypotheses
                    .note
                    .as_ref()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default()
            )))
        }
    }
}

pub fn check_hypotheses<M: Isotopy + ?Sized>(map: &M, z0: Point, index_radius: f64) -> Hypotheses {
    let mut notes = Vec::new();
    let index = match lefschetz_index(map, z0, index_radius) {
        Ok(r) => Some(r.value),
        Err(e) => {
            notes.push(format!("index: {e}"));
            None
        }
    };
    let parabolic = match blowup_rotation_number(map, z0) {
        Ok(b) => b.parabolic,
        Err(e) => {
            notes.push(format!("blow-up: {e}"));
            false
        }
    };
    Hypotheses {
        index,
        parabolic,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

/// Seed rings for rotation `target`: three rings around the fitted radius,
/// or three geometric radii filling the domain when no fit is available.
pub fn seed_rings<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    profile: &[TwistSample],
    target: f64,
    q: usize,
    spread: f64,
) -> Vec<SeedRing> {
    let dom = map.domain();
    let reach = (z0.x - dom.x_min)
        .min(dom.x_max - z0.x)
        .min(z0.y - dom.y_min)
        .min(dom.y_max - z0.y);
    let count = SEEDS_PER_PERIOD * q;
    let radii: Vec<f64> = match radius_for_rotation(profile, target) {
        Some(r) if r < reach => vec![r * (1.0 - spread), r, r * (1.0 + spread)],
        _ => vec![0.225 * reach, 0.45 * reach, 0.9 * reach],
    };
    radii
        .into_iter()
        .filter(|&r| r < reach)
        .map(|radius| SeedRing { radius, count })
        .collect()
}

/// Looks for `(±1, q)` orbits for every `q` and tabulates how close they come
/// to `z0`. Failed hypotheses are recorded, not fatal.
pub fn property_p_experiment<M: Isotopy + ?Sized>(
    map: &M,
    z0: Point,
    q_list: &[usize],
    opts: &PropertyPOptions,
) -> Result<PropertyPReport> {
    let hypotheses = check_hypotheses(map, z0, opts.index_radius);
    let profile = twist_profile(map, z0, &opts.profile_radii, TAU / 8.0, opts.profile_iterates);
    let twist_fit = fit_quadratic_twist(&profile);
    let side = opts.side.unwrap_or_else(|| Side::of(twist_fit.unwrap_or(1.0)));
    let p = side.sign();
    let mut qs = q_list.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let mut report = PropertyPReport {
        k: 0,
        side,
        hypotheses,
        twist_fit,
        tested: Vec::new(),
        found: Vec::new(),
        concentration: Vec::new(),
        diagnostics: Vec::new(),
    };
    for q in qs {
        check_pq(p, q)?;
        let rings = seed_rings(map, z0, &profile, p as f64 / q as f64, q, opts.ring_spread);
        let search = find_pq_orbit(map, z0, p, q, &rings)?;
        report.tested.push((p, q));
        report.diagnostics.push(search.diagnostics);
        if let Some(nearest) = search.orbits.iter().min_by(|a, b| a.r_max.total_cmp(&b.r_max)) {
            report.concentration.push(ConcentrationRow {
                p,
                q,
                r_max: nearest.r_max,
                r_mean: nearest.r_mean,
            });
        }
        report.found.extend(search.orbits);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremumProbe {
    pub factor_kinds: Vec<ExtremumKind>,
    /// (a) the same strict extremum for every factor.
    pub extremum: bool,
    pub trace: f64,
    pub determinant: f64,
    /// (b) the composed Jacobian has 1 as its only eigenvalue.
    pub parabolic: bool,
    pub index: Option<i64>,
    /// (c) Lefschetz index 1.
    pub index_one: bool,
    pub note: Option<String>,
}

impl ExtremumProbe {
    pub fn all_hold(&self) -> bool {
        self.extremum && self.parabolic && self.index_one
    }
}

const PROBE_RADII: [f64; 3] = [0.01, 0.02, 0.04];
const PROBE_ANGLES: usize = 64;

fn extremum_kind(g: &crate::genfun::GeneratingFunction, z0: Point) -> ExtremumKind {
    let Ok(center) = g.value(z0) else {
        return ExtremumKind::Neither;
    };
    let (mut above, mut below) = (false, false);
    for r in PROBE_RADII {
        for i in 0..PROBE_ANGLES {
            let a = TAU * i as f64 / PROBE_ANGLES as f64;
            match g.value(z0 + point(a.cos(), a.sin()) * r) {
                Ok(v) if v > center => above = true,
                Ok(v) if v < center => below = true,
                _ => return ExtremumKind::Neither,
            }
        }
    }
    match (above, below) {
        (false, true) => ExtremumKind::Maximum,
        (true, false) => ExtremumKind::Minimum,
        _ => ExtremumKind::Neither,
    }
}

/// Proxy checks for a symplectically degenerate extremum at `z0`.
pub fn degenerate_extremum_probe(
    factorization: &MapFactorization,
    z0: Point,
    index_radius: f64,
) -> ExtremumProbe {
    let factor_kinds: Vec<ExtremumKind> = (0..factorization.len())
        .map(|j| extremum_kind(factorization.generating_function(j), z0))
        .collect();
    let extremum =
        factor_kinds[0] != ExtremumKind::Neither && factor_kinds.iter().all(|&k| k == factor_kinds[0]);
    let mut notes = Vec::new();
    let (trace, determinant) = match factorization.jacobian(z0) {
        Ok(j) => (j.trace(), j.determinant()),
        Err(e) => {
            notes.push(format!("jacobian: {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    let parabolic = (trace - 2.0).abs() <= 1e-8 && (determinant - 1.0).abs() <= 1e-8;
    let index = match lefschetz_index(factorization, z0, index_radius) {
        Ok(r) => Some(r.value),
        Err(e) => {
            notes.push(format!("index: {e}"));
            None
        }
    };
    ExtremumProbe {
        factor_kinds,
        extremum,
        trace,
        determinant,
        parabolic,
        index,
        index_one: index == Some(1),
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, RigidTwist};
    use crate::genfun::GeneratedMap;
    use crate::geometry::Window;

    #[test]
    fn measure_stats_of_collapsed_orbit() {
        let s = orbit_measure_stats(&[point(0.0, 0.0); 4], point(0.0, 0.0));
        assert_eq!((s.r_max, s.r_mean, s.first_moment), (0.0, 0.0, 0.0));
    }

    #[test]
    fn twist_map_orbit_on_invariant_circle() {
        let tw = RigidTwist::new(0.0, 1.0, Window::centered(1.0));
        let r = tw.radius_for_rotation(1.0 / 7.0).unwrap();
        let search = find_pq_orbit(
            &tw,
            point(0.0, 0.0),
            1,
            7,
            &[SeedRing {
                radius: r * 1.02,
                count: 56,
            }],
        )
        .unwrap();
        assert!(!search.orbits.is_empty());
        for o in &search.orbits {
            assert_eq!(o.winding, 1);
            assert!((o.r_max - r).abs() < 1e-9 && (o.r_mean - r).abs() < 1e-9);
        }
    }

    #[test]
    fn no_other_fixed_points() {
        let map = GeneratedMap::new(catalog::elliptic(0.1).unwrap());
        let s = find_pq_orbit(
            &map,
            point(0.0, 0.0),
            1,
            1,
            &[SeedRing {
                radius: 0.3,
                count: 8,
            }],
        )
        .unwrap();
        assert!(s.orbits.is_empty());
        assert_eq!(s.diagnostics.seeds, 8);
    }

    #[test]
    fn reducible_type_is_rejected() {
        let map = GeneratedMap::new(catalog::degmax());
        assert!(matches!(
            find_pq_orbit(&map, point(0.0, 0.0), 2, 4, &[]),
            Err(Error::NotIrreducible { .. })
        ));
    }

    #[test]
    fn probe_of_factored_maximum() {
        let fac = catalog::degmax_factored(2).unwrap();
        let probe = degenerate_extremum_probe(&fac, point(0.0, 0.0), 0.1);
        assert!(probe.all_hold(), "{probe:?}");
        let saddle = MapFactorization::new(vec![catalog::degmax(), catalog::saddle()]).unwrap();
        assert!(!degenerate_extremum_probe(&saddle, point(0.0, 0.0), 0.1).extremum);
    }
}
