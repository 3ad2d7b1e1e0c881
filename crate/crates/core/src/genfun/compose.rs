use std::sync::Arc;

use super::{GeneratingFunction, ScalarField, TWIST_GRID};
use crate::error::{Error, Result};
use crate::geometry::{point, Mat2, Point, Window};

const NORMAL_FORM_TOL: f64 = 1e-10;
const PHI_TOL: f64 = 1e-14;
const PHI_MAX_ITER: usize = 64;

/// Generating function of `f1 o f0` built from generating functions of the
/// two factors:
///
/// ```text
/// g(x2, y0) = g0(x1, y0) + g1(x2, y1) + (x2 - x1)(y0 - y1)
/// ```
///
/// where `(x1, y1) = phi(x2, y0)` solves
/// `y1 - y0 + d1 g0(x1, y0) = 0` and `x1 - x2 + d2 g1(x2, y1) = 0`.
#[derive(Debug, Clone)]
pub struct ComposedField {
    g0: GeneratingFunction,
    g1: GeneratingFunction,
}

struct PhiSolution {
    x1: f64,
    y1: f64,
    /// Hessians of g0 at (x1, y0) and g1 at (x2, y1).
    h0: Mat2,
    h1: Mat2,
}

impl ComposedField {
    pub fn new(g0: GeneratingFunction, g1: GeneratingFunction) -> Self {
        Self { g0, g1 }
    }

    fn phi(&self, x2: f64, y0: f64) -> Result<PhiSolution> {
        let (mut x1, mut y1) = (x2, y0);
        for _ in 0..PHI_MAX_ITER {
            let p0 = point(x1, y0);
            let p1 = point(x2, y1);
            if !self.g0.window().contains(&p0) {
                return Err(Error::OutOfWindow { point: p0 });
            }
            if !self.g1.window().contains(&p1) {
                return Err(Error::OutOfWindow { point: p1 });
            }
            let grad0 = self.g0.gradient(p0)?;
            let grad1 = self.g1.gradient(p1)?;
            let h0 = self.g0.hessian(p0)?;
            let h1 = self.g1.hessian(p1)?;
            let f1 = y1 - y0 + grad0.x;
            let f2 = x1 - x2 + grad1.y;
            if f1.abs().max(f2.abs()) < PHI_TOL {
                return Ok(PhiSolution { x1, y1, h0, h1 });
            }
            let a = Mat2::new(h0[(0, 0)], 1.0, 1.0, h1[(1, 1)]);
            let Some(inv) = a.try_inverse() else {
                return Err(Error::NonConvergence {
                    solver: "composition phi",
                    iterations: 0,
                    residual: f1.abs().max(f2.abs()),
                });
            };
            let step = inv * point(f1, f2);
            x1 -= step.x;
            y1 -= step.y;
        }
        Err(Error::NonConvergence {
            solver: "composition phi",
            iterations: PHI_MAX_ITER,
            residual: f64::NAN,
        })
    }
}

impl ScalarField for ComposedField {
    fn value(&self, p: Point) -> Result<f64> {
        let (x2, y0) = (p.x, p.y);
        let s = self.phi(x2, y0)?;
        Ok(self.g0.value(point(s.x1, y0))? + self.g1.value(point(x2, s.y1))? + (x2 - s.x1) * (y0 - s.y1))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        let (x2, y0) = (p.x, p.y);
        let s = self.phi(x2, y0)?;
        Ok(self.g0.gradient(point(s.x1, y0))? + self.g1.gradient(point(x2, s.y1))?)
    }

    fn hessian(&self, p: Point) -> Result<Mat2> {
        let s = self.phi(p.x, p.y)?;
        let (h0, h1) = (s.h0, s.h1);
        let a = Mat2::new(h0[(0, 0)], 1.0, 1.0, h1[(1, 1)]);
        let b = Mat2::new(0.0, h0[(0, 1)] - 1.0, h1[(0, 1)] - 1.0, 0.0);
        let inv = a.try_inverse().ok_or(Error::NonConvergence {
            solver: "composition phi",
            iterations: 0,
            residual: f64::NAN,
        })?;
        // columns: d/dx2, d/dy0; rows: x1, y1
        let dphi = -(inv * b);
        let (x1_x2, x1_y0) = (dphi[(0, 0)], dphi[(0, 1)]);
        let (y1_x2, y1_y0) = (dphi[(1, 0)], dphi[(1, 1)]);
        let h11 = h0[(0, 0)] * x1_x2 + h1[(0, 0)] + h1[(0, 1)] * y1_x2;
        let h12 = h0[(0, 0)] * x1_y0 + h0[(0, 1)] + h1[(0, 1)] * y1_y0;
        let h21 = h0[(0, 1)] * x1_x2 + h1[(0, 1)] + h1[(1, 1)] * y1_x2;
        let h22 = h0[(0, 1)] * x1_y0 + h0[(1, 1)] + h1[(1, 1)] * y1_y0;
        let off = 0.5 * (h12 + h21);
        Ok(Mat2::new(h11, off, off, h22))
    }
}

fn check_normal_form(g: &GeneratingFunction, label: &str) -> Result<f64> {
    let origin = point(0.0, 0.0);
    let grad = g.gradient(origin)?;
    if grad.norm() > NORMAL_FORM_TOL {
        return Err(Error::NormalFormViolated(format!(
            "{label}: origin is not critical (|grad| = {:e})",
            grad.norm()
        )));
    }
    let h = g.hessian(origin)?;
    if h[(0, 0)].abs() > NORMAL_FORM_TOL || h[(0, 1)].abs() > NORMAL_FORM_TOL {
        return Err(Error::NormalFormViolated(format!(
            "{label}: Hessian at 0 is not diag(0, c)"
        )));
    }
    if h[(1, 1)] > NORMAL_FORM_TOL {
        return Err(Error::NormalFormViolated(format!(
            "{label}: c = {} is positive",
            h[(1, 1)]
        )));
    }
    Ok(h[(1, 1)])
}

/// Generating function of `f1 o f0` on `window`, for factors whose Hessians at
/// the origin are `diag(0, c_i)` with `c_i <= 0`.
pub fn compose(
    g0: &GeneratingFunction,
    g1: &GeneratingFunction,
    window: Window,
) -> Result<GeneratingFunction> {
    check_normal_form(g0, "g0")?;
    check_normal_form(g1, "g1")?;
    if !window.contains(&point(0.0, 0.0)) {
        return Err(Error::invalid("composition window must contain the origin"));
    }
    let field = ComposedField::new(g0.clone(), g1.clone());
    let mut max_mixed: f64 = 0.0;
    for p in window.grid(TWIST_GRID) {
        max_mixed = max_mixed.max(field.hessian(p)?[(0, 1)].abs());
    }
    let bound = max_mixed * 1.05 + 1e-12;
    if bound >= 1.0 {
        return Err(Error::TwistBound(format!(
            "composed generating function reaches |d12 g| = {max_mixed} on the window"
        )));
    }
    GeneratingFunction::from_field(
        format!("{} * {}", g1.name(), g0.name()),
        Arc::new(field),
        window,
        bound,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{GeneratedMap, Polynomial};

    fn normal_form(c: f64) -> GeneratingFunction {
        GeneratingFunction::polynomial(
            format!("nf({c})"),
            Polynomial::new([(0, 2, c / 2.0), (4, 0, -0.1)]),
            Window::centered(1.0),
        )
        .unwrap()
    }

    #[test]
    fn hessian_of_composition_adds_c() {
        let g = compose(&normal_form(-0.2), &normal_form(-0.3), Window::centered(0.2)).unwrap();
        let h = g.hessian(point(0.0, 0.0)).unwrap();
        assert!((h - Mat2::new(0.0, 0.0, 0.0, -0.5)).abs().max() < 1e-12);
    }

    #[test]
    fn zero_functions_compose_to_zero() {
        let zero = GeneratingFunction::polynomial("0", Polynomial::zero(), Window::centered(1.0)).unwrap();
        let g = compose(&zero, &zero, Window::centered(0.5)).unwrap();
        let m = GeneratedMap::new(g.clone());
        for p in Window::centered(0.4).grid(5) {
            assert_eq!(g.value(p).unwrap(), 0.0);
            assert!((m.forward(p).unwrap() - p).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_normal_form() {
        let tilted =
            GeneratingFunction::polynomial("tilted", Polynomial::new([(2, 0, -0.5)]), Window::centered(1.0))
                .unwrap();
        assert!(matches!(
            compose(&tilted, &normal_form(-1.0), Window::centered(0.2)),
            Err(Error::NormalFormViolated(_))
        ));
        let positive = normal_form(0.5);
        assert!(matches!(
            compose(&positive, &normal_form(-1.0), Window::centered(0.2)),
            Err(Error::NormalFormViolated(_))
        ));
    }
}
