//! Damped Newton iteration for zeros of planar maps.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Absolute residual at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Levenberg-Marquardt damping.
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            damping: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub z: Point,
    pub residual: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt on `F(z) = 0`, where `eval` returns `F(z)` and `DF(z)`.
///
/// A step is accepted only if the residual decreases; failed evaluations
/// (for instance leaving the window) count as rejected steps. `stop` can end
/// the iteration early; its point is returned as converged.
pub fn levenberg_marquardt<F, S>(
    eval: F,
    start: Point,
    opts: &NewtonOptions,
    stop: S,
) -> Result<NewtonOutcome>
where
    F: Fn(Point) -> Result<(Point, Mat2)>,
    S: Fn(Point) -> bool,
{
    let (mut r, mut jac) = eval(start)?;
    let mut z = start;
    let mut lambda = opts.damping;
    for iter in 0..opts.max_iter {
        let norm = r.norm();
        if norm <= opts.tol || stop(z) {
            return Ok(NewtonOutcome {
                z,
                residual: norm,
                iterations: iter,
            });
        }
        let jt = jac.transpose();
        let mut accepted = false;
        while lambda < 1e12 {
            let jtj = jt * jac;
            let scale = jtj.diagonal().max().max(f64::MIN_POSITIVE);
            let lhs = jtj + Mat2::identity() * (lambda * scale);
            let Some(step) = lhs.lu().solve(&(-(jt * r))) else {
                lambda *= 8.0;
                continue;
            };
            let candidate = z + step;
            match eval(candidate) {
                Ok((rc, jc)) if rc.norm() < norm => {
                    z = candidate;
                    r = rc;
                    jac = jc;
                    lambda = (lambda / 4.0).max(1e-15);
                    accepted = true;
                    break;
                }
                _ => lambda *= 8.0,
            }
        }
        if !accepted {
            return Err(Error::NonConvergence {
                solver: "Levenberg-Marquardt",
                iterations: iter,
                residual: norm,
            });
        }
    }
    let norm = r.norm();
    if norm <= opts.tol || stop(z) {
        return Ok(NewtonOutcome {
            z,
            residual: norm,
            iterations: opts.max_iter,
        });
    }
    Err(Error::NonConvergence {
        solver: "Levenberg-Marquardt",
        iterations: opts.max_iter,
        residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    #[test]
    fn finds_simple_root() {
        let f = |z: Point| {
            Ok((
                point(z.x * z.x - 2.0, z.y - z.x),
                Mat2::new(2.0 * z.x, 0.0, -1.0, 1.0),
            ))
        };
        let out = levenberg_marquardt(f, point(1.0, 0.0), &NewtonOptions::default(), |_| false).unwrap();
        assert!((out.z.x - 2f64.sqrt()).abs() < 1e-12);
        assert!((out.z.y - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cubic_root() {
        let f = |z: Point| {
            Ok((
                point(z.x.powi(3), z.y.powi(3)),
                Mat2::new(3.0 * z.x * z.x, 0.0, 0.0, 3.0 * z.y * z.y),
            ))
        };
        let out = levenberg_marquardt(f, point(0.1, -0.05), &NewtonOptions::default(), |_| false).unwrap();
        assert!(out.z.norm() < 1e-4);
    }

    #[test]
    fn no_root_is_reported() {
        let f = |z: Point| Ok((point(z.x * z.x + 1.0, z.y), Mat2::new(2.0 * z.x, 0.0, 0.0, 1.0)));
        assert!(levenberg_marquardt(f, point(0.5, 0.0), &NewtonOptions::default(), |_| false).is_err());
    }
}
