//! Command-line flags. Every flag mirrors a config key and wins over it.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use orbitkit::prospector::Side;

use crate::config::{ExperimentConfig, MapSpec};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "orbitkit",
    version,
    about = "Periodic orbits near degenerate fixed points of area-preserving maps"
)]
pub struct Cli {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the map from given or random starts.
    MapEval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true, value_name = "X,Y")]
        start: Option<[f64; 2]>,
        #[arg(long)]
        random_starts: Option<usize>,
        #[arg(long)]
        iterates: Option<usize>,
    },
    /// Lefschetz and isotopy indices at the fixed point.
    Index {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Blow-up rotation number and a local rotation set estimate.
    Rotation {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u_radius: Option<f64>,
        #[arg(long)]
        v_radius: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Search for (p, q) periodic orbits winding about the fixed point.
    Orbits {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<i64>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        ring_radius: Option<f64>,
        #[arg(long)]
        ring_count: Option<usize>,
    },
    /// Critical points of the discrete action.
    Action {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        seed_radius: Option<f64>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Concentration of (1, q) orbits on the fixed point as q grows.
    PropertyP {
        #[command(flatten)]
        common: Common,
        #[arg(long = "q", value_delimiter = ',', value_name = "Q,...")]
        q_list: Option<Vec<usize>>,
        #[arg(long, value_parser = parse_side, allow_hyphen_values = true)]
        side: Option<Side>,
        #[arg(long)]
        index_radius: Option<f64>,
        /// Table of every orbit found.
        #[arg(long, value_name = "FILE")]
        orbits_out: Option<PathBuf>,
    },
    /// Re-ingest an orbit table and recheck it against the map.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        orbits: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Catalog name, e.g. `degmax` or `elliptic(0.1)`.
    #[arg(long, conflicts_with = "definition")]
    pub map: Option<String>,
    /// TOML generating-function definition.
    #[arg(long, value_name = "FILE")]
    pub definition: Option<PathBuf>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, value_name = "X,Y")]
    pub fixed_point: Option<[f64; 2]>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Table destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// JSON summary destination.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => {
            let x: f64 = x.parse().map_err(|e| format!("{x}: {e}"))?;
            let y: f64 = y.parse().map_err(|e| format!("{y}: {e}"))?;
            Ok([x, y])
        }
        _ => Err(format!("expected X,Y, got `{s}`")),
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s {
        "+" | "positive" => Ok(Side::Positive),
        "-" | "negative" => Ok(Side::Negative),
        _ => Err(format!("side must be + or -, got `{s}`")),
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl Common {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(path) = &self.definition {
            cfg.set_definition_file(path)?;
        }
        set(&mut cfg.map, self.map.map(MapSpec::Name));
        set(&mut cfg.fixed_point, self.fixed_point);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.output.table, self.out);
        set(&mut cfg.output.summary, self.summary);
        Ok(())
    }
}

/// What to run once the configuration is merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    MapEval,
    Index,
    Rotation,
    Orbits,
    Action,
    PropertyP,
    Validate(PathBuf),
}

impl Command {
    /// Folds the flags into `cfg`.
    pub fn merge(self, cfg: &mut ExperimentConfig) -> Result<Task, CliError> {
        Ok(match self {
            Command::MapEval {
                common,
                start,
                random_starts,
                iterates,
            } => {
                common.apply(cfg)?;
                set(&mut cfg.map_eval.start, start);
                set(&mut cfg.map_eval.random_starts, random_starts);
                set(&mut cfg.map_eval.iterates, iterates);
                Task::MapEval
            }
            Command::Index { common, radius } => {
                common.apply(cfg)?;
                set(&mut cfg.index.radius, radius);
                Task::Index
            }
            Command::Rotation {
                common,
                u_radius,
                v_radius,
                n_max,
                grid,
            } => {
                common.apply(cfg)?;
                set(&mut cfg.rotation.u_radius, u_radius);
                set(&mut cfg.rotation.v_radius, v_radius);
                set(&mut cfg.rotation.n_max, n_max);
                set(&mut cfg.rotation.grid, grid);
                Task::Rotation
            }
            Command::Orbits {
                common,
                p,
                q,
                ring_radius,
                ring_count,
            } => {
                common.apply(cfg)?;
                set(&mut cfg.orbits.p, p);
                set(&mut cfg.orbits.q, q);
                set(&mut cfg.orbits.ring_radius, ring_radius);
                set(&mut cfg.orbits.ring_count, ring_count);
                Task::Orbits
            }
            Command::Action {
                common,
                q,
                seed_radius,
                seeds,
            } => {
                common.apply(cfg)?;
                set(&mut cfg.action.q, q);
                set(&mut cfg.action.seed_radius, seed_radius);
                set(&mut cfg.action.seeds, seeds);
                Task::Action
            }
            Command::PropertyP {
                common,
                q_list,
                side,
                index_radius,
                orbits_out,
            } => {
                common.apply(cfg)?;
                set(&mut cfg.property_p.q_list, q_list);
                set(&mut cfg.property_p.side, side);
                set(&mut cfg.property_p.index_radius, index_radius);
                set(&mut cfg.output.orbits, orbits_out);
                Task::PropertyP
            }
            Command::Validate { common, orbits } => {
                common.apply(cfg)?;
                Task::Validate(orbits)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn merged(args: &[&str], cfg: &str) -> (ExperimentConfig, Task) {
        let cli = Cli::try_parse_from(args).unwrap();
        let mut c = ExperimentConfig::from_toml(cfg).unwrap();
        let task = cli.command.merge(&mut c).unwrap();
        (c, task)
    }

    #[test]
    fn flags_win_over_config() {
        let (c, task) = merged(
            &["orbitkit", "index", "--map", "saddle", "--radius", "0.05"],
            "map = \"degmax\"\n[index]\nradius = 0.1\n",
        );
        assert_eq!(task, Task::Index);
        assert_eq!(c.map, Some(MapSpec::Name("saddle".into())));
        assert_eq!(c.index.radius, Some(0.05));
    }

    #[test]
    fn config_survives_absent_flags() {
        let (c, _) = merged(
            &["orbitkit", "index"],
            "map = \"degmax\"\n[index]\nradius = 0.1\n",
        );
        assert_eq!(c.map, Some(MapSpec::Name("degmax".into())));
        assert_eq!(c.index.radius, Some(0.1));
    }

    #[test]
    fn list_point_and_side_flags_parse() {
        let (c, _) = merged(
            &[
                "orbitkit",
                "property-p",
                "--q",
                "5,8,12,20",
                "--side",
                "-",
                "--fixed-point",
                "-0.5,0.25",
            ],
            "",
        );
        assert_eq!(c.property_p.q_list, Some(vec![5, 8, 12, 20]));
        assert_eq!(c.property_p.side, Some(Side::Negative));
        assert_eq!(c.fixed_point, Some([-0.5, 0.25]));
        assert!(Cli::try_parse_from(["orbitkit", "index", "--fixed-point", "1"]).is_err());
    }
}
