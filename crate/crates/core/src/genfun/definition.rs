use serde::{Deserialize, Serialize};

use super::{GeneratingFunction, MapFactorization, Polynomial};
use crate::catalog;
use crate::error::{Error, Result};
use crate::geometry::Window;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefinitionKind {
    Polynomial,
    Catalog,
}

/// On-disk description of a generating function.
///
/// `coefficients` lists `(i, j, c)` triples meaning `c * x^i * y^j`; the
/// window is `[x_min, x_max, y_min, y_max]`. For `kind = "catalog"` the name
/// selects a catalog entry and the window, if given, overrides its default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratingFunctionDef {
    pub name: String,
    pub kind: DefinitionKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<(u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_bound: Option<f64>,
}

impl GeneratingFunctionDef {
    pub fn from_generating_function(g: &GeneratingFunction) -> Result<Self> {
        let poly = g
            .as_polynomial()
            .ok_or_else(|| Error::invalid("only polynomial generating functions serialize"))?;
        Ok(Self {
            name: g.name().to_string(),
            kind: DefinitionKind::Polynomial,
            coefficients: poly.terms().iter().map(|t| (t.i, t.j, t.coeff)).collect(),
            window: Some(g.window().to_array()),
            twist_bound: Some(g.twist_bound()),
        })
    }

    fn window(&self) -> Result<Option<Window>> {
        match self.window {
            None => Ok(None),
            Some(bounds) => {
                let w = Window::from_array(bounds);
                if w.is_valid() {
                    Ok(Some(w))
                } else {
                    Err(Error::invalid(format!(
                        "window {bounds:?} is empty or not finite"
                    )))
                }
            }
        }
    }

    /// Builds the map this definition describes. Catalog entries may be
    /// multi-factor.
    pub fn resolve(&self) -> Result<MapFactorization> {
        match self.kind {
            DefinitionKind::Polynomial => Ok(MapFactorization::single(self.polynomial()?)),
            DefinitionKind::Catalog => {
                let entry = catalog::lookup(&self.name)?;
                match self.window()? {
                    Some(w) => entry.with_window(w),
                    None => Ok(entry.factorization),
                }
            }
        }
    }

    fn polynomial(&self) -> Result<GeneratingFunction> {
        let window = self
            .window()?
            .ok_or_else(|| Error::invalid("polynomial definition needs a window"))?;
        let poly = Polynomial::new(self.coefficients.iter().copied());
        match self.twist_bound {
            Some(c) => GeneratingFunction::polynomial_with_bound(&self.name, poly, window, c),
            None => GeneratingFunction::polynomial(&self.name, poly, window),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_definition_round_trips() {
        let def = GeneratingFunctionDef {
            name: "degmax".into(),
            kind: DefinitionKind::Polynomial,
            coefficients: vec![(4, 0, -0.25), (2, 2, -0.5), (0, 4, -0.25)],
            window: Some([-0.65, 0.65, -0.65, 0.65]),
            twist_bound: Some(0.845),
        };
        let fac = def.resolve().unwrap();
        let back = GeneratingFunctionDef::from_generating_function(fac.generating_function(0)).unwrap();
        assert_eq!(back, def);
    }

    #[test]
    fn polynomial_without_window_is_rejected() {
        let def = GeneratingFunctionDef {
            name: "p".into(),
            kind: DefinitionKind::Polynomial,
            coefficients: vec![(0, 2, 0.5)],
            window: None,
            twist_bound: None,
        };
        assert!(def.resolve().is_err());
    }

    #[test]
    fn catalog_definition_resolves() {
        let def = GeneratingFunctionDef {
            name: "degmax-factored(2)".into(),
            kind: DefinitionKind::Catalog,
            coefficients: vec![],
            window: None,
            twist_bound: None,
        };
        assert_eq!(def.resolve().unwrap().len(), 2);
    }
}
