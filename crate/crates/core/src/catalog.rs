//! Named example maps.
//!
//! | name                  | generating function               | window          |
//! |-----------------------|-----------------------------------|-----------------|
//! | `shear`               | `y^2 / 2`                         | `[-1, 1]^2`     |
//! | `elliptic(a)`         | `a (x^2 + y^2) / 2`               | `[-1, 1]^2`     |
//! | `saddle`              | `(x^2 - y^2) / 2`                 | `[-1, 1]^2`     |
//! | `degmax`              | `-(x^2 + y^2)^2 / 4`              | `[-0.65, 0.65]^2` |
//! | `degmax-quartic`      | `-x^4 - y^4`                      | `[-0.5, 0.5]^2` |
//! | `degmax-factored(k)`  | `k` factors `-(x^2 + y^2)^2 / 4k` | `[-0.65, 0.65]^2` |
//!
//! All entries fix the origin. `elliptic` defaults to `a = 0.1` and
//! `degmax-factored` to `k = 3` when the argument is omitted.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::genfun::{GeneratingFunction, Isotopy, MapFactorization, Polynomial};
use crate::geometry::{point, rotation_matrix, Mat2, Point, Window};

pub const NAMES: [&str; 6] = [
    "shear",
    "elliptic",
    "saddle",
    "degmax",
    "degmax-quartic",
    "degmax-factored",
];

pub const DEFAULT_ELLIPTIC_A: f64 = 0.1;
pub const DEFAULT_FACTORS: usize = 3;

/// The `degmax` map is only defined where `1 + 4xy - 4y^4 > 0`; on
/// `[-0.65, 0.65]^2` this fails only near the corners of the second and
/// fourth quadrants, and the disc of this radius is safe.
pub const DEGMAX_WORKING_RADIUS: f64 = 0.6;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub factorization: MapFactorization,
    pub fixed_point: Point,
}

impl CatalogEntry {
    fn single(name: String, g: GeneratingFunction) -> Self {
        Self {
            name,
            factorization: MapFactorization::single(g),
            fixed_point: point(0.0, 0.0),
        }
    }

    /// Rebuilds every factor on another window.
    pub fn with_window(&self, window: Window) -> Result<MapFactorization> {
        let factors = (0..self.factorization.len())
            .map(|j| {
                let g = self.factorization.generating_function(j);
                let poly = g
                    .as_polynomial()
                    .ok_or_else(|| Error::invalid("catalog factor is not polynomial"))?
                    .clone();
                GeneratingFunction::polynomial(g.name(), poly, window)
            })
            .collect::<Result<Vec<_>>>()?;
        MapFactorization::new(factors)
    }
}

pub fn shear() -> GeneratingFunction {
    GeneratingFunction::polynomial("shear", Polynomial::new([(0, 2, 0.5)]), Window::centered(1.0))
        .expect("catalog twist bound")
}

pub fn elliptic(a: f64) -> Result<GeneratingFunction> {
    GeneratingFunction::polynomial(
        format!("elliptic({a})"),
        Polynomial::new([(2, 0, a / 2.0), (0, 2, a / 2.0)]),
        Window::centered(1.0),
    )
}

pub fn saddle() -> GeneratingFunction {
    GeneratingFunction::polynomial(
        "saddle",
        Polynomial::new([(2, 0, 0.5), (0, 2, -0.5)]),
        Window::centered(1.0),
    )
    .expect("catalog twist bound")
}

fn radial_quartic(scale: f64) -> Polynomial {
    // -scale (x^2 + y^2)^2 / 4
    Polynomial::new([(4, 0, -scale / 4.0), (2, 2, -scale / 2.0), (0, 4, -scale / 4.0)])
}

pub fn degmax() -> GeneratingFunction {
    GeneratingFunction::polynomial("degmax", radial_quartic(1.0), Window::centered(0.65))
        .expect("catalog twist bound")
}

pub fn degmax_quartic() -> GeneratingFunction {
    GeneratingFunction::polynomial(
        "degmax-quartic",
        Polynomial::new([(4, 0, -1.0), (0, 4, -1.0)]),
        Window::centered(0.5),
    )
    .expect("catalog twist bound")
}

pub fn degmax_factored(k: usize) -> Result<MapFactorization> {
    if k == 0 {
        return Err(Error::invalid("degmax-factored needs k >= 1"));
    }
    let factor = GeneratingFunction::polynomial(
        format!("degmax/{k}"),
        radial_quartic(1.0 / k as f64),
        Window::centered(0.65),
    )?;
    MapFactorization::new(vec![factor; k])
}

/// Quadratic generating function whose map is the rigid rotation by
/// `alpha` turns. Requires `|alpha| < 1/6` for the twist bound.
pub fn rigid_rotation(alpha: f64) -> Result<GeneratingFunction> {
    let (s, c) = (TAU * alpha).sin_cos();
    if c <= 0.5 {
        return Err(Error::invalid(format!(
            "rotation by {alpha} turns has no generating function with twist bound below 1"
        )));
    }
    let sigma = 1.0 - 1.0 / c;
    let diag = -s / c;
    GeneratingFunction::polynomial(
        format!("rotation({alpha})"),
        Polynomial::new([(2, 0, diag / 2.0), (1, 1, sigma), (0, 2, diag / 2.0)]),
        Window::centered(1.0),
    )
}

fn split_args(name: &str) -> Result<(&str, Option<&str>)> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, None)),
        Some(open) => {
            let inner = name[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::invalid(format!("unbalanced parentheses in {name:?}")))?;
            Ok((name[..open].trim(), Some(inner.trim())))
        }
    }
}

/// Resolves a catalog name such as `degmax`, `elliptic(0.1)` or
/// `degmax-factored(3)`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let (base, arg) = split_args(name)?;
    let no_arg = |entry: CatalogEntry| -> Result<CatalogEntry> {
        match arg {
            None => Ok(entry),
            Some(_) => Err(Error::invalid(format!("{base} takes no argument"))),
        }
    };
    match base {
        "shear" => no_arg(CatalogEntry::single(base.into(), shear())),
        "saddle" => no_arg(CatalogEntry::single(base.into(), saddle())),
        "degmax" => no_arg(CatalogEntry::single(base.into(), degmax())),
        "degmax-quartic" => no_arg(CatalogEntry::single(base.into(), degmax_quartic())),
        "elliptic" => {
            let a = match arg {
                None => DEFAULT_ELLIPTIC_A,
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad elliptic parameter {s:?}")))?,
            };
            Ok(CatalogEntry::single(format!("elliptic({a})"), elliptic(a)?))
        }
        "degmax-factored" => {
            let k = match arg {
                None => DEFAULT_FACTORS,
                Some(s) => s
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad factor count {s:?}")))?,
            };
            Ok(CatalogEntry {
                name: format!("degmax-factored({k})"),
                factorization: degmax_factored(k)?,
                fixed_point: point(0.0, 0.0),
            })
        }
        _ => Err(Error::invalid(format!(
            "unknown catalog map {name:?}; known: {}",
            NAMES.join(", ")
        ))),
    }
}

/// The six catalog maps with default parameters.
pub fn all() -> Vec<CatalogEntry> {
    [
        "shear",
        "elliptic(0.1)",
        "saddle",
        "degmax",
        "degmax-quartic",
        "degmax-factored(3)",
    ]
    .iter()
    .map(|n| lookup(n).expect("catalog entry"))
    .collect()
}

/// Twist map preserving circles about the origin:
/// `f_t(z) = R(2 pi t (base + twist |z|^2)) z`.
///
/// With `twist = 0` this is the rigid rotation by `base` turns. Every circle
/// of radius `r` is invariant with rotation number `base + twist r^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTwist {
    pub base: f64,
    pub twist: f64,
    pub window: Window,
}

impl RigidTwist {
    pub fn new(base: f64, twist: f64, window: Window) -> Self {
        Self { base, twist, window }
    }

    /// Radius of the invariant circle with the given rotation number.
    pub fn radius_for_rotation(&self, rotation: f64) -> Option<f64> {
        let r2 = (rotation - self.base) / self.twist;
        (self.twist != 0.0 && r2 > 0.0).then(|| r2.sqrt())
    }
}

impl Isotopy for RigidTwist {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        if !self.window.contains(&z) {
            return Err(Error::OutOfWindow { point: z });
        }
        let angle = TAU * t * (self.base + self.twist * z.norm_squared());
        Ok(rotation_matrix(angle) * z)
    }

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        let image = self.eval(t, z)?;
        let angle = TAU * t * (self.base + self.twist * z.norm_squared());
        let rot = rotation_matrix(angle);
        let grad_angle = 2.0 * TAU * t * self.twist * z;
        // d/d angle of R(angle) z is the image turned by a quarter
        let turned = point(-image.y, image.x);
        Ok((image, rot + turned * grad_angle.transpose()))
    }

    fn domain(&self) -> Window {
        self.window
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_parses_arguments() {
        assert_eq!(lookup("elliptic(0.25)").unwrap().name, "elliptic(0.25)");
        assert_eq!(lookup("degmax-factored(4)").unwrap().factorization.len(), 4);
        assert_eq!(
            lookup("degmax-factored").unwrap().factorization.len(),
            DEFAULT_FACTORS
        );
        assert!(lookup("degmax(2)").is_err());
        assert!(lookup("unknown").is_err());
        assert!(lookup("elliptic(abc)").is_err());
    }

    #[test]
    fn every_entry_passes_the_audit() {
        for entry in all() {
            for j in 0..entry.factorization.len() {
                let g = entry.factorization.generating_function(j);
                g.audit().unwrap_or_else(|e| panic!("{}: {e}", entry.name));
                assert!(g.twist_bound() < 1.0);
                assert!(g.gradient(entry.fixed_point).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rigid_rotation_jacobian_is_a_rotation() {
        let g = rigid_rotation(0.1).unwrap();
        let map = crate::genfun::GeneratedMap::new(g);
        let jac = map.jacobian(point(0.0, 0.0)).unwrap();
        assert!((jac - rotation_matrix(TAU * 0.1)).abs().max() < 1e-14);
        assert!(rigid_rotation(0.2).is_err());
    }

    #[test]
    fn twist_jacobian_matches_finite_differences() {
        let tw = RigidTwist::new(0.0, 0.7, Window::centered(1.0));
        let z = point(0.3, -0.4);
        let (_, jac) = tw.eval_with_jacobian(0.8, z).unwrap();
        let h = 1e-6;
        for col in 0..2 {
            let mut dz = point(0.0, 0.0);
            dz[col] = h;
            let fd = (tw.eval(0.8, z + dz).unwrap() - tw.eval(0.8, z - dz).unwrap()) / (2.0 * h);
            assert!((jac.column(col) - fd).norm() < 1e-8);
        }
        assert!((jac.determinant() - 1.0).abs() < 1e-12);
    }
}
