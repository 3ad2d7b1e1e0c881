//! Generating functions and the area-preserving maps they define.
//!
//! A function `g` with `d12 g < 1` defines a map `(x, y) -> (X, Y)` through
//!
//! ```text
//! X - x =  t * d2 g(X, y)
//! Y - y = -t * d1 g(X, y)
//! ```
//!
//! where `t` in `[0, 1]` is the isotopy time (`t = 1` is the map itself,
//! `t = 0` the identity). The `X` equation is scalar and strictly monotone
//! because `1 - t d12 g >= 1 - twist_bound > 0` on the window.

mod compose;
mod definition;
mod map;
mod polynomial;

use std::fmt;
use std::sync::Arc;

pub use compose::{compose, ComposedField};
pub use definition::{DefinitionKind, GeneratingFunctionDef};
pub use map::{GeneratedMap, Isotopy, MapFactorization, SolverOptions};
pub use polynomial::{Polynomial, Term};

use crate::error::{Error, Result};
use crate::geometry::{point, Mat2, Point, Window};

/// Value, gradient and Hessian of a C^2 planar function.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn value(&self, p: Point) -> Result<f64>;
    fn gradient(&self, p: Point) -> Result<Point>;
    fn hessian(&self, p: Point) -> Result<Mat2>;
}

type ValueFn = dyn Fn(Point) -> f64 + Send + Sync;
type GradFn = dyn Fn(Point) -> Point + Send + Sync;
type HessFn = dyn Fn(Point) -> Mat2 + Send + Sync;

/// A scalar field given by user closures. Must pass [`GeneratingFunction::audit`].
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    hessian: Arc<HessFn>,
}

impl FnField {
    pub fn new(
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
        hessian: impl Fn(Point) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
        }
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnField")
    }
}

impl ScalarField for FnField {
    fn value(&self, p: Point) -> Result<f64> {
        Ok((self.value)(p))
    }
    fn gradient(&self, p: Point) -> Result<Point> {
        Ok((self.gradient)(p))
    }
    fn hessian(&self, p: Point) -> Result<Mat2> {
        Ok((self.hessian)(p))
    }
}

/// Grid resolution of the twist-bound spot check.
pub const TWIST_GRID: usize = 32;
/// Relative tolerance of the finite-difference gradient audit.
pub const GRADIENT_AUDIT_RTOL: f64 = 1e-6;
/// Absolute floor of the gradient audit, for points where `grad g` is tiny.
pub const GRADIENT_AUDIT_ATOL: f64 = 1e-9;
/// Symmetry tolerance of the Hessian.
pub const HESSIAN_SYMMETRY_TOL: f64 = 1e-10;

/// Outcome of the derivative and twist audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub points_checked: usize,
    pub max_gradient_error: f64,
    pub max_hessian_asymmetry: f64,
    pub max_mixed_partial: f64,
}

/// A generating function restricted to a window where `|d12 g| <= twist_bound < 1`.
#[derive(Clone, Debug)]
pub struct GeneratingFunction {
    name: String,
    field: Arc<dyn ScalarField>,
    polynomial: Option<Polynomial>,
    window: Window,
    twist_bound: f64,
}

impl GeneratingFunction {
    /// Polynomial generating function with a certified twist bound.
    pub fn polynomial(name: impl Into<String>, poly: Polynomial, window: Window) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::invalid("degenerate window"));
        }
        let bound = poly.mixed_partial_bound(&window);
        if bound >= 1.0 {
            return Err(Error::TwistBound(format!(
                "sup |d12 g| <= {bound} is not below 1 on the window"
            )));
        }
        Ok(Self {
            name: name.into(),
            field: Arc::new(poly.clone()),
            polynomial: Some(poly),
            window,
            twist_bound: bound,
        })
    }

    /// Polynomial generating function with a declared twist bound; the bound
    /// must dominate the certified one or at least the grid spot check.
    pub fn polynomial_with_bound(
        name: impl Into<String>,
        poly: Polynomial,
        window: Window,
        twist_bound: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&twist_bound) {
            return Err(Error::TwistBound(format!(
                "declared bound {twist_bound} not in [0, 1)"
            )));
        }
        let gf = Self {
            name: name.into(),
            field: Arc::new(poly.clone()),
            polynomial: Some(poly),
            window,
            twist_bound,
        };
        gf.check_twist_grid()?;
        Ok(gf)
    }

    /// Generating function from an arbitrary field. Runs the full audit.
    pub fn from_field(
        name: impl Into<String>,
        field: Arc<dyn ScalarField>,
        window: Window,
        twist_bound: f64,
    ) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::invalid("degenerate window"));
        }
        if !(0.0..1.0).contains(&twist_bound) {
            return Err(Error::TwistBound(format!(
                "declared bound {twist_bound} not in [0, 1)"
            )));
        }
        let gf = Self {
            name: name.into(),
            field,
            polynomial: None,
            window,
            twist_bound,
        };
        gf.audit()?;
        Ok(gf)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn twist_bound(&self) -> f64 {
        self.twist_bound
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    pub fn field(&self) -> &Arc<dyn ScalarField> {
        &self.field
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        self.field.value(p)
    }

    pub fn gradient(&self, p: Point) -> Result<Point> {
        self.field.gradient(p)
    }

    pub fn hessian(&self, p: Point) -> Result<Mat2> {
        self.field.hessian(p)
    }

    fn check_twist_grid(&self) -> Result<f64> {
        let mut max_mixed: f64 = 0.0;
        for p in self.window.grid(TWIST_GRID) {
            let h = self.hessian(p)?;
            max_mixed = max_mixed.max(h[(0, 1)].abs());
        }
        // rounding slack for bounds attained exactly at grid points
        if max_mixed > self.twist_bound * (1.0 + 1e-12) {
            return Err(Error::TwistBound(format!(
                "|d12 g| reaches {max_mixed} on the grid, above the declared bound {}",
                self.twist_bound
            )));
        }
        Ok(max_mixed)
    }

    /// Finite-difference gradient audit, Hessian symmetry check and twist
    /// spot check on a deterministic interior point set.
    pub fn audit(&self) -> Result<AuditReport> {
        let max_mixed = self.check_twist_grid()?;
        let scale = self.window.width().max(self.window.height());
        let h = 1e-5 * scale;
        let mut max_grad_err: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        let mut n = 0;
        // interior points of a 9x9 grid, shifted off the symmetry axes
        for j in 1..9 {
            for i in 1..9 {
                let u = (i as f64 + 0.137) / 9.5;
                let v = (j as f64 + 0.291) / 9.5;
                let p = self.window.lerp(u, v);
                let grad = self.gradient(p)?;
                let fd = point(
                    (self.value(p + point(h, 0.0))? - self.value(p - point(h, 0.0))?) / (2.0 * h),
                    (self.value(p + point(0.0, h))? - self.value(p - point(0.0, h))?) / (2.0 * h),
                );
                let err = (grad - fd).norm();
                let allowed = GRADIENT_AUDIT_RTOL * grad.norm() + GRADIENT_AUDIT_ATOL;
                if err > allowed {
                    return Err(Error::AuditFailed(format!(
                        "gradient mismatch {err:e} at ({}, {})",
                        p.x, p.y
                    )));
                }
                max_grad_err = max_grad_err.max(err);
                let hess = self.hessian(p)?;
                let asym = (hess[(0, 1)] - hess[(1, 0)]).abs();
                if asym > HESSIAN_SYMMETRY_TOL * hess.abs().max().max(1.0) {
                    return Err(Error::AuditFailed(format!(
                        "Hessian asymmetry {asym:e} at ({}, {})",
                        p.x, p.y
                    )));
                }
                max_asym = max_asym.max(asym);
                n += 1;
            }
        }
        Ok(AuditReport {
            points_checked: n,
            max_gradient_error: max_grad_err,
            max_hessian_asymmetry: max_asym,
            max_mixed_partial: max_mixed,
        })
    }
}

/// Tolerance below which `grad g(0)` counts as zero.
pub const CRITICAL_TOL: f64 = 1e-10;
/// Tolerance on `J_{f_t}(0) v = v`.
pub const TRANSPORT_TOL: f64 = 1e-9;

/// If `Hess g(0)` is singular, returns its unit kernel vector `v` after
/// checking that `v` is an eigenvector of eigenvalue 1 of `J_{f_t}(0)` for
/// `t` in `{0, 1/4, 1/2, 3/4, 1}`. Returns `None` for a nondegenerate Hessian.
///
/// The kernel vector is normalized so that its first nonzero coordinate is
/// positive. When the Hessian vanishes, `(1, 0)` is returned.
pub fn eigenvector_transport_check(g: &GeneratingFunction) -> Result<Option<Point>> {
    let origin = point(0.0, 0.0);
    let grad = g.gradient(origin)?;
    if grad.norm() > CRITICAL_TOL {
        return Err(Error::NotCritical {
            gradient_norm: grad.norm(),
        });
    }
    let hess = g.hessian(origin)?;
    let (rho, sigma, tau) = (hess[(0, 0)], hess[(0, 1)], hess[(1, 1)]);
    let scale = hess.abs().max();
    let kernel_tol = 1e-12 * scale.max(1.0);
    let v = if scale == 0.0 {
        point(1.0, 0.0)
    } else {
        // eigenvalue of smallest magnitude of a symmetric 2x2 matrix
        let half_tr = 0.5 * (rho + tau);
        let disc = (0.25 * (rho - tau) * (rho - tau) + sigma * sigma).sqrt();
        let (l1, l2) = (half_tr - disc, half_tr + disc);
        let lambda = if l1.abs() <= l2.abs() { l1 } else { l2 };
        if lambda.abs() > kernel_tol {
            return Ok(None);
        }
        // rows of (H - lambda I) are orthogonal to the kernel
        let r0 = point(rho - lambda, sigma);
        let r1 = point(sigma, tau - lambda);
        let row = if r0.norm() >= r1.norm() { r0 } else { r1 };
        let mut v = point(-row.y, row.x).normalize();
        if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
            v = -v;
        }
        v
    };
    let map = GeneratedMap::new(g.clone());
    for &t in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let (_, jac) = map.eval_with_jacobian(t, origin)?;
        let moved = jac * v;
        if (moved - v).norm() > TRANSPORT_TOL {
            return Err(Error::InvariantBreach(format!(
                "kernel vector of Hess g(0) not fixed by J_f_t(0) at t = {t}"
            )));
        }
    }
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(rho: f64, sigma: f64, tau: f64) -> GeneratingFunction {
        let poly = Polynomial::new([(2, 0, rho / 2.0), (1, 1, sigma), (0, 2, tau / 2.0)]);
        GeneratingFunction::polynomial("quad", poly, Window::centered(0.5)).unwrap()
    }

    #[test]
    fn kernel_of_diag_zero_c() {
        let v = eigenvector_transport_check(&quad(0.0, 0.0, -1.5))
            .unwrap()
            .unwrap();
        assert!((v - point(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn nondegenerate_hessian_has_no_kernel() {
        assert!(eigenvector_transport_check(&quad(2.0, 0.0, 2.0))
            .unwrap()
            .is_none());
    }

    #[test]
    fn kernel_of_rank_one_all_ones() {
        // oracle: [[1,1],[1,1]] has eigenpairs (2, (1,1)/sqrt2) and (0, (1,-1)/sqrt2)
        // sigma = 1 would break the twist bound, so scale down and check direction
        let g = quad(0.5, 0.5, 0.5);
        let v = eigenvector_transport_check(&g).unwrap().unwrap();
        let expected = point(1.0, -1.0) / 2f64.sqrt();
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_critical_origin() {
        let poly = Polynomial::new([(1, 0, 0.1), (0, 2, -0.5)]);
        let g = GeneratingFunction::polynomial("tilt", poly, Window::centered(0.5)).unwrap();
        assert!(matches!(
            eigenvector_transport_check(&g),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn polynomial_twist_bound_must_be_below_one() {
        let poly = Polynomial::new([(1, 1, 1.2)]);
        assert!(matches!(
            GeneratingFunction::polynomial("steep", poly, Window::centered(1.0)),
            Err(Error::TwistBound(_))
        ));
    }

    #[test]
    fn declared_bound_below_grid_maximum_is_rejected() {
        let poly = Polynomial::new([(2, 2, -0.5)]);
        let res = GeneratingFunction::polynomial_with_bound("degmax", poly, Window::centered(0.65), 0.5);
        assert!(matches!(res, Err(Error::TwistBound(_))));
    }

    #[test]
    fn audit_rejects_inconsistent_closures() {
        let field = FnField::new(
            |p| p.x * p.x,
            |p| point(p.x, 0.0), // wrong by a factor of 2
            |_| Mat2::new(2.0, 0.0, 0.0, 0.0),
        );
        let res = GeneratingFunction::from_field("bad", Arc::new(field), Window::centered(0.5), 0.1);
        assert!(matches!(res, Err(Error::AuditFailed(_))));
    }

    #[test]
    fn audit_accepts_exact_closures() {
        let field = FnField::new(
            |p| (p.x * p.y).sin() * 0.3,
            |p| point(0.3 * p.y * (p.x * p.y).cos(), 0.3 * p.x * (p.x * p.y).cos()),
            |p| {
                let (s, c) = (p.x * p.y).sin_cos();
                let h12 = 0.3 * (c - p.x * p.y * s);
                Mat2::new(-0.3 * p.y * p.y * s, h12, h12, -0.3 * p.x * p.x * s)
            },
        );
        let gf = GeneratingFunction::from_field("sin", Arc::new(field), Window::centered(0.5), 0.31).unwrap();
        let report = gf.audit().unwrap();
        assert_eq!(report.points_checked, 64);
        assert!(report.max_mixed_partial <= 0.31);
    }
}
