//! Run configuration: one TOML file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use orbitkit::catalog;
use orbitkit::genfun::{GeneratingFunctionDef, MapFactorization};
use orbitkit::geometry::{point, Point};
use orbitkit::prospector::Side;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Name(String),
    Definition(GeneratingFunctionDef),
}

impl MapSpec {
    pub fn resolve(&self) -> Result<MapFactorization, CliError> {
        match self {
            MapSpec::Name(name) => catalog::lookup(name)
                .map(|e| e.factorization)
                .map_err(|e| CliError::config("map", e.to_string())),
            MapSpec::Definition(def) => def.resolve().map_err(|e| CliError::config("map", e.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            MapSpec::Name(n) => n.clone(),
            MapSpec::Definition(d) => d.name.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEvalConfig {
    pub start: Option<[f64; 2]>,
    /// Additional uniformly random starts in the window, drawn from `seed`.
    pub random_starts: Option<usize>,
    pub iterates: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationConfig {
    pub u_radius: Option<f64>,
    pub v_radius: Option<f64>,
    pub n_max: Option<usize>,
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitsConfig {
    pub p: Option<i64>,
    pub q: Option<usize>,
    pub ring_radius: Option<f64>,
    pub ring_count: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    pub q: Option<usize>,
    pub seed_radius: Option<f64>,
    pub seeds: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyPConfig {
    pub q_list: Option<Vec<usize>>,
    pub side: Option<Side>,
    pub index_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub table: Option<PathBuf>,
    pub orbits: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

/// Everything a run can be configured with. Every field is optional in the
/// file; defaults apply after flags are merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: Option<MapSpec>,
    pub fixed_point: Option<[f64; 2]>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub map_eval: MapEvalConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub rotation: RotationConfig,
    #[serde(default)]
    pub orbits: OrbitsConfig,
    #[serde(default)]
    pub action: ActionConfig,
    #[serde(default)]
    pub property_p: PropertyPConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_toml(&read(path)?)
    }

    /// Reads a generating-function definition file into the `map` field.
    pub fn set_definition_file(&mut self, path: &Path) -> Result<(), CliError> {
        let def: GeneratingFunctionDef =
            toml::from_str(&read(path)?).map_err(|e| CliError::config("definition", e.to_string()))?;
        self.map = Some(MapSpec::Definition(def));
        Ok(())
    }

    pub fn map_spec(&self) -> Result<&MapSpec, CliError> {
        self.map
            .as_ref()
            .ok_or_else(|| CliError::config("map", "no map given (use --map, --definition or `map = ...`)"))
    }

    pub fn fixed_point(&self) -> Result<Point, CliError> {
        let [x, y] = self.fixed_point.unwrap_or([0.0, 0.0]);
        if !(x.is_finite() && y.is_finite()) {
            return Err(CliError::config("fixed_point", "coordinates must be finite"));
        }
        Ok(point(x, y))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

pub fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(
            key,
            format!("{v} must be a positive finite number"),
        ))
    }
}

pub fn at_least(key: &str, v: usize, min: usize) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("{v} must be at least {min}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_and_defined_maps() {
        let c = ExperimentConfig::from_toml("map = \"degmax\"\n[index]\nradius = 0.1\n").unwrap();
        assert_eq!(c.map, Some(MapSpec::Name("degmax".into())));
        assert_eq!(c.index.radius, Some(0.1));
        let c = ExperimentConfig::from_toml(
            "[map]\nname = \"q\"\nkind = \"polynomial\"\ncoefficients = [[0, 2, 0.5]]\nwindow = [-1.0, 1.0, -1.0, 1.0]\n",
        )
        .unwrap();
        assert!(matches!(c.map, Some(MapSpec::Definition(_))));
        assert_eq!(c.map_spec().unwrap().resolve().unwrap().len(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("map = \"degmax\"\n[index]\nradus = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("radus"), "{err}");
        assert!(ExperimentConfig::from_toml("colour = 1\n").is_err());
    }

    #[test]
    fn unknown_catalog_name_is_a_config_error() {
        let c = ExperimentConfig::from_toml("map = \"nope\"\n").unwrap();
        assert!(matches!(
            c.map_spec().unwrap().resolve(),
            Err(CliError::Config { .. })
        ));
    }
}
