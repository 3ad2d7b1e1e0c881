//! The subcommands. Each reads a merged configuration, writes its table and
//! optional JSON summary, and reports failures through [`CliError`].

use std::f64::consts::TAU;
use std::path::Path;

use orbitkit::action::{find_critical_points, CriticalOptions};
use orbitkit::genfun::{Isotopy, MapFactorization};
use orbitkit::geometry::{point, Point};
use orbitkit::prospector::{
    find_pq_orbit, property_p_experiment, seed_rings, twist_profile, PropertyPOptions, SeedRing,
    SEEDS_PER_PERIOD,
};
use orbitkit::rotation::{blowup_rotation_number, local_rotation_set, orbit_rotation_number};
use orbitkit::winding::{isotopy_index, lefschetz_index};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{at_least, positive, ExperimentConfig};
use crate::error::CliError;
use crate::output::{emit, emit_json, num, orbit_table, read_orbit_table, Table};

pub const DEFAULT_ITERATES: usize = 100;
pub const DEFAULT_RANDOM_STARTS: usize = 4;
pub const DEFAULT_INDEX_RADIUS: f64 = 0.1;
pub const DEFAULT_U_RADIUS: f64 = 0.2;
pub const DEFAULT_V_RADIUS: f64 = 0.05;
pub const DEFAULT_N_MAX: usize = 200;
pub const DEFAULT_GRID: usize = 20;
pub const DEFAULT_ACTION_SEEDS: usize = 8;
pub const DEFAULT_SEED_RADIUS: f64 = 0.1;
pub const DEFAULT_Q_LIST: [usize; 4] = [5, 8, 12, 20];

/// Turns farther than this from an integer make a stored orbit suspect.
const WINDING_TOL: f64 = 1e-6;
/// Allowed mismatch between a stored point's image and the next stored point.
const STEP_TOL: f64 = 1e-9;

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    label: String,
    map: MapFactorization,
    z0: Point,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        let spec = cfg.map_spec()?;
        let map = spec.resolve()?;
        let z0 = cfg.fixed_point()?;
        if !map.domain().contains(&z0) {
            return Err(CliError::config("fixed_point", "lies outside the map window"));
        }
        Ok(Self {
            cfg,
            label: spec.label(),
            map,
            z0,
        })
    }

    fn table(&self, t: &Table) -> Result<(), CliError> {
        emit(&t.to_bytes()?, self.cfg.output.table.as_deref())
    }

    fn summary(&self, value: serde_json::Value) -> Result<(), CliError> {
        match self.cfg.output.summary.as_deref() {
            Some(p) => emit_json(&value, Some(p)),
            None => Ok(()),
        }
    }
}

pub fn map_eval(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let me = &cfg.map_eval;
    let iterates = me.iterates.unwrap_or(DEFAULT_ITERATES);
    let random = me.random_starts.unwrap_or(if me.start.is_some() {
        0
    } else {
        DEFAULT_RANDOM_STARTS
    });
    let mut starts: Vec<Point> = me.start.map(|[x, y]| point(x, y)).into_iter().collect();
    let w = run.map.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    for _ in 0..random {
        starts.push(w.lerp(rng.random::<f64>(), rng.random::<f64>()));
    }
    if starts.is_empty() {
        return Err(CliError::config(
            "map_eval",
            "no starts: give `start` or `random_starts`",
        ));
    }

    let mut t = Table::new(&["start", "step", "x", "y"]);
    let mut stops = Vec::new();
    for (s, &z) in starts.iter().enumerate() {
        let mut cur = z;
        let mut stop = None;
        for step in 0..=iterates {
            t.push(vec![s.to_string(), step.to_string(), num(cur.x), num(cur.y)]);
            if step == iterates {
                break;
            }
            match run.map.forward(cur) {
                Ok(next) => cur = next,
                Err(e) => {
                    stop = Some(json!({"start": s, "step": step, "reason": e.to_string()}));
                    break;
                }
            }
        }
        stops.extend(stop);
    }
    run.table(&t)?;
    run.summary(json!({
        "map": run.label,
        "starts": starts.iter().map(|z| [z.x, z.y]).collect::<Vec<_>>(),
        "iterates": iterates,
        "seed": cfg.seed(),
        "stopped": stops,
    }))
}

pub fn index(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let radius = positive("index.radius", cfg.index.radius.unwrap_or(DEFAULT_INDEX_RADIUS))?;
    let lefschetz = lefschetz_index(&run.map, run.z0, radius)?;
    let isotopy = isotopy_index(&run.map, run.z0, radius);

    let mut t = Table::new(&["name", "kind", "value", "radius", "samples", "min_displacement"]);
    let mut row = |kind: &str, r: &orbitkit::winding::IndexReport| {
        t.push(vec![
            run.label.clone(),
            kind.to_string(),
            r.value.to_string(),
            num(r.curve_radius),
            r.samples_used.to_string(),
            num(r.min_displacement),
        ])
    };
    row("lefschetz", &lefschetz);
    if let Ok(r) = &isotopy {
        row("isotopy", r);
    }
    run.table(&t)?;
    run.summary(json!({
        "map": run.label,
        "fixed_point": [run.z0.x, run.z0.y],
        "lefschetz": lefschetz,
        "isotopy": isotopy.as_ref().ok(),
        "isotopy_error": isotopy.as_ref().err().map(|e| e.to_string()),
    }))
}

pub fn rotation(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let rc = &cfg.rotation;
    let u = positive("rotation.u_radius", rc.u_radius.unwrap_or(DEFAULT_U_RADIUS))?;
    let v = positive("rotation.v_radius", rc.v_radius.unwrap_or(DEFAULT_V_RADIUS))?;
    if v >= u {
        return Err(CliError::config(
            "rotation.v_radius",
            "must be smaller than u_radius",
        ));
    }
    let n_max = at_least("rotation.n_max", rc.n_max.unwrap_or(DEFAULT_N_MAX), 1)?;
    let grid = at_least("rotation.grid", rc.grid.unwrap_or(DEFAULT_GRID), 2)?;

    let blowup = blowup_rotation_number(&run.map, run.z0)?;
    let set = local_rotation_set(&run.map, run.z0, u, v, n_max, grid)?;
    let mut t = Table::new(&["seed_x", "seed_y", "n", "rho_n", "cesaro_bound"]);
    for s in &set.observed {
        t.push(vec![
            num(s.z.x),
            num(s.z.y),
            s.n.to_string(),
            num(s.rho_n),
            num(s.cesaro_bound),
        ]);
    }
    run.table(&t)?;
    run.summary(json!({
        "map": run.label,
        "fixed_point": [run.z0.x, run.z0.y],
        "blowup": blowup,
        "u_radius": u,
        "v_radius": v,
        "n_range": set.n_range,
        "samples": set.observed.len(),
        "hull": set.hull,
    }))
}

pub fn orbits(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let oc = &cfg.orbits;
    let p = oc.p.unwrap_or(1);
    let q =
        oc.q.ok_or_else(|| CliError::config("orbits.q", "a period is required"))?;
    let q = at_least("orbits.q", q, 1)?;
    let count = at_least(
        "orbits.ring_count",
        oc.ring_count.unwrap_or(SEEDS_PER_PERIOD * q),
        1,
    )?;
    let rings = match oc.ring_radius {
        Some(r) => vec![SeedRing {
            radius: positive("orbits.ring_radius", r)?,
            count,
        }],
        None => {
            let opts = PropertyPOptions::default();
            let profile = twist_profile(
                &run.map,
                run.z0,
                &opts.profile_radii,
                TAU / 8.0,
                opts.profile_iterates,
            );
            seed_rings(
                &run.map,
                run.z0,
                &profile,
                p as f64 / q as f64,
                q,
                opts.ring_spread,
            )
            .into_iter()
            .map(|r| SeedRing { count, ..r })
            .collect()
        }
    };
    let search = find_pq_orbit(&run.map, run.z0, p, q, &rings)?;
    run.table(&orbit_table(&search.orbits, run.z0))?;
    run.summary(json!({
        "map": run.label,
        "fixed_point": [run.z0.x, run.z0.y],
        "p": p,
        "q": q,
        "rings": rings,
        "diagnostics": search.diagnostics,
        "orbits": search.orbits.iter().map(|o| json!({
            "winding": o.winding,
            "residual": o.residual,
            "r_max": o.r_max,
            "r_mean": o.r_mean,
            "conditioning": o.conditioning,
        })).collect::<Vec<_>>(),
    }))
}

pub fn action(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let ac = &cfg.action;
    let q = at_least("action.q", ac.q.unwrap_or(1), 1)?;
    let radius = positive(
        "action.seed_radius",
        ac.seed_radius.unwrap_or(DEFAULT_SEED_RADIUS),
    )?;
    let count = at_least("action.seeds", ac.seeds.unwrap_or(DEFAULT_ACTION_SEEDS), 1)?;
    let ring = SeedRing { radius, count };
    let n = run.map.len() * q;
    // a seed follows its own factor steps; where that leaves the window the
    // chain is held constant instead
    let seeds: Vec<Vec<Point>> = ring
        .seeds(run.z0)
        .into_iter()
        .map(|z| {
            orbitkit::action::ActionChain::from_orbit(run.map.clone(), q, z)
                .map(|c| c.points().to_vec())
                .unwrap_or_else(|_| vec![z; n])
        })
        .collect();
    let opts = CriticalOptions {
        puncture: Some(run.z0),
        ..CriticalOptions::default()
    };
    let reports = find_critical_points(&run.map, q, &seeds, &opts);
    let mut t = Table::new(&[
        "q",
        "p",
        "x0",
        "y0",
        "grad_norm",
        "morse_index",
        "nullity",
        "finder",
    ]);
    for r in reports.iter().map(|r| r.record()) {
        t.push(vec![
            r.q.to_string(),
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            num(r.x0),
            num(r.y0),
            num(r.grad_norm),
            r.morse_index.to_string(),
            r.nullity.to_string(),
            r.finder,
        ]);
    }
    run.table(&t)?;
    run.summary(json!({
        "map": run.label,
        "fixed_point": [run.z0.x, run.z0.y],
        "q": q,
        "seeds": count,
        "seed_radius": radius,
        "critical_points": reports.len(),
    }))
}

pub fn property_p(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let pc = &cfg.property_p;
    let q_list = pc.q_list.clone().unwrap_or_else(|| DEFAULT_Q_LIST.to_vec());
    if q_list.is_empty() {
        return Err(CliError::config("property_p.q_list", "must not be empty"));
    }
    for &q in &q_list {
        at_least("property_p.q_list", q, 2)?;
    }
    let opts = PropertyPOptions {
        side: pc.side,
        index_radius: positive(
            "property_p.index_radius",
            pc.index_radius
                .unwrap_or(PropertyPOptions::default().index_radius),
        )?,
        ..PropertyPOptions::default()
    };
    let report = property_p_experiment(&run.map, run.z0, &q_list, &opts)?;

    let mut t = Table::new(&["p", "q", "r_max", "r_mean"]);
    for row in &report.concentration {
        t.push(vec![
            row.p.to_string(),
            row.q.to_string(),
            num(row.r_max),
            num(row.r_mean),
        ]);
    }
    run.table(&t)?;
    if let Some(path) = cfg.output.orbits.as_deref() {
        emit(&orbit_table(&report.found, run.z0).to_bytes()?, Some(path))?;
    }
    run.summary(json!({
        "map": run.label,
        "fixed_point": [run.z0.x, run.z0.y],
        "success": report.success(),
        "report": report,
    }))?;
    let missing: Vec<usize> = report
        .tested
        .iter()
        .map(|&(_, q)| q)
        .filter(|q| !report.concentration.iter().any(|r| r.q == *q))
        .collect();
    if !missing.is_empty() {
        eprintln!("note: no orbit found for q in {missing:?}");
    }
    report.check_hypotheses()?;
    Ok(())
}

pub fn validate(cfg: &ExperimentConfig, table: &Path) -> Result<(), CliError> {
    let run = Run::new(cfg)?;
    let stored = read_orbit_table(table)?;
    let mut failures = Vec::new();
    let mut checked = Vec::new();
    for o in &stored {
        let mut problems = Vec::new();
        let mut cur = o.points[0];
        for (i, next) in o.points.iter().cycle().skip(1).take(o.q).enumerate() {
            cur = run.map.forward(cur)?;
            let gap = (cur - next).norm();
            // the closing step is bounded by the residual instead
            if i + 1 < o.q && gap > STEP_TOL {
                problems.push(format!("iterate {} is {gap:e} from stored point", i + 1));
            }
        }
        let residual = (cur - o.points[0]).norm();
        if !(residual < 2.0 * o.residual || residual == 0.0) {
            problems.push(format!(
                "residual {residual:e} not below twice the stored {:e}",
                o.residual
            ));
        }
        let turns = orbit_rotation_number(&run.map, o.points[0], run.z0, o.q)?.rho_n * o.q as f64;
        if (turns - o.p as f64).abs() > WINDING_TOL {
            problems.push(format!("winding {turns} does not match p = {}", o.p));
        }
        checked.push(json!({
            "orbit": o.id,
            "q": o.q,
            "p": o.p,
            "stored_residual": o.residual,
            "residual": residual,
            "turns": turns,
            "problems": problems,
        }));
        if !problems.is_empty() {
            failures.push(format!("orbit {}: {}", o.id, problems.join("; ")));
        }
    }
    run.summary(json!({
        "map": run.label,
        "table": table,
        "orbits": checked,
        "valid": failures.is_empty(),
    }))?;
    if failures.is_empty() {
        eprintln!("{} orbits valid", stored.len());
        Ok(())
    } else {
        Err(CliError::Validation(failures.join("\n")))
    }
}
