use serde::{Deserialize, Serialize};

use super::GeneratingFunction;
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point, Window};

/// Implicit-equation solver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 64,
        }
    }
}

/// A planar map together with an identity isotopy `t -> f_t` ending at it.
///
/// `eval(0, z) = z` and `eval(1, z) = f(z)`. Implementations are pure and
/// shareable across threads.
pub trait Isotopy: Send + Sync {
    fn eval(&self, t: f64, z: Point) -> Result<Point>;

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)>;

    /// Rectangle where the map may be evaluated.
    fn domain(&self) -> Window;

    fn forward(&self, z: Point) -> Result<Point> {
        self.eval(1.0, z)
    }

    fn forward_with_jacobian(&self, z: Point) -> Result<(Point, Mat2)> {
        self.eval_with_jacobian(1.0, z)
    }

    fn jacobian(&self, z: Point) -> Result<Mat2> {
        Ok(self.eval_with_jacobian(1.0, z)?.1)
    }
}

impl<T: Isotopy + ?Sized> Isotopy for &T {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        (**self).eval(t, z)
    }
    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        (**self).eval_with_jacobian(t, z)
    }
    fn domain(&self) -> Window {
        (**self).domain()
    }
}

/// The diffeomorphism `f_t` generated by `t g`.
#[derive(Clone, Debug)]
pub struct GeneratedMap {
    g: GeneratingFunction,
    t: f64,
    solver: SolverOptions,
}

impl GeneratedMap {
    pub fn new(g: GeneratingFunction) -> Self {
        Self {
            g,
            t: 1.0,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_time(mut self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("isotopy time {t} outside [0, 1]")));
        }
        self.t = t;
        Ok(self)
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn generating_function(&self) -> &GeneratingFunction {
        &self.g
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn solver(&self) -> SolverOptions {
        self.solver
    }

    pub fn window(&self) -> &Window {
        self.g.window()
    }

    /// Solves `X - x - s d2 g(X, y) = 0` for `X`, starting from `seed`.
    ///
    /// Newton with the analytic derivative `1 - s d12 g` first; if an iterate
    /// leaves the window or the budget runs out, the contraction
    /// `X <- x + s d2 g(X, y)` takes over and Newton polishes its result.
    pub fn solve_implicit_x(&self, s: f64, x: f64, y: f64, seed: f64) -> Result<f64> {
        let w = self.g.window();
        let residual = |xx: f64| -> Result<(f64, f64)> {
            let grad = self.g.gradient(Point::new(xx, y))?;
            let hess = self.g.hessian(Point::new(xx, y))?;
            Ok((xx - x - s * grad.y, 1.0 - s * hess[(0, 1)]))
        };
        let newton = |start: f64, budget: usize| -> Result<Option<f64>> {
            let mut xx = start;
            for _ in 0..budget {
                let (r, dr) = residual(xx)?;
                if r.abs() < self.solver.tol {
                    return Ok(Some(xx));
                }
                xx -= r / dr;
                if !xx.is_finite() || !w.contains_x(xx) {
                    return Ok(None);
                }
            }
            let (r, _) = residual(xx)?;
            Ok((r.abs() < self.solver.tol).then_some(xx))
        };
        if let Some(xx) = newton(seed, self.solver.max_iter)? {
            return Ok(xx);
        }
        // contraction fallback; linear rate twist_bound * s
        let mut xx = x;
        let mut last = f64::INFINITY;
        for _ in 0..8 * self.solver.max_iter {
            let next = x + s * self.g.gradient(Point::new(xx, y))?.y;
            if !next.is_finite() || !w.contains_x(next) {
                return Err(Error::OutOfWindow {
                    point: Point::new(next, y),
                });
            }
            last = (next - xx).abs();
            xx = next;
            if last < self.solver.tol {
                break;
            }
        }
        match newton(xx, self.solver.max_iter)? {
            Some(root) => Ok(root),
            None => Err(Error::NonConvergence {
                solver: "implicit map equation",
                iterations: 9 * self.solver.max_iter,
                residual: last,
            }),
        }
    }

    fn check_input(&self, z: Point) -> Result<()> {
        if !z.x.is_finite() || !z.y.is_finite() || !self.g.window().contains(&z) {
            return Err(Error::OutOfWindow { point: z });
        }
        Ok(())
    }

    /// `f_s` at absolute generating time `s` (the map uses `s = t`).
    fn apply(&self, s: f64, z: Point) -> Result<Point> {
        self.check_input(z)?;
        if s == 0.0 {
            return Ok(z);
        }
        let big_x = self.solve_implicit_x(s, z.x, z.y, z.x)?;
        let grad = self.g.gradient(Point::new(big_x, z.y))?;
        Ok(Point::new(big_x, z.y - s * grad.x))
    }

    fn apply_with_jacobian(&self, s: f64, z: Point) -> Result<(Point, Mat2)> {
        let image = self.apply(s, z)?;
        let hess = self.g.hessian(Point::new(image.x, z.y))?;
        Ok((image, jacobian_formula(s, &hess)))
    }

    pub fn forward(&self, z: Point) -> Result<Point> {
        self.apply(self.t, z)
    }

    /// Closed-form Jacobian evaluated at `(X, y)`.
    pub fn jacobian(&self, z: Point) -> Result<Mat2> {
        Ok(self.apply_with_jacobian(self.t, z)?.1)
    }

    /// Preimage: solves `y - Y - t d1 g(X, y) = 0` for `y` (monotone in `y`),
    /// then `x = X - t d2 g(X, y)`.
    pub fn inverse(&self, z: Point) -> Result<Point> {
        let s = self.t;
        let (big_x, big_y) = (z.x, z.y);
        if s == 0.0 {
            self.check_input(z)?;
            return Ok(z);
        }
        let w = self.g.window();
        if !w.contains_x(big_x) {
            return Err(Error::OutOfWindow { point: z });
        }
        let residual = |y: f64| -> Result<(f64, f64)> {
            let p = Point::new(big_x, y);
            let grad = self.g.gradient(p)?;
            let hess = self.g.hessian(p)?;
            Ok((y - big_y - s * grad.x, 1.0 - s * hess[(0, 1)]))
        };
        let mut y = if w.contains_y(big_y) {
            big_y
        } else {
            big_y.clamp(w.y_min, w.y_max)
        };
        let mut converged = false;
        for _ in 0..self.solver.max_iter {
            let (r, dr) = residual(y)?;
            if r.abs() < self.solver.tol {
                converged = true;
                break;
            }
            y -= r / dr;
            if !y.is_finite() || !w.contains_y(y) {
                break;
            }
        }
        if !converged {
            // contraction y <- Y + s d1 g(X, y)
            y = big_y.clamp(w.y_min, w.y_max);
            for _ in 0..8 * self.solver.max_iter {
                let next = big_y + s * self.g.gradient(Point::new(big_x, y))?.x;
                if !next.is_finite() || !w.contains_y(next) {
                    return Err(Error::OutOfWindow {
                        point: Point::new(big_x, next),
                    });
                }
                let step = (next - y).abs();
                y = next;
                if step < self.solver.tol {
                    break;
                }
            }
            let (r, _) = residual(y)?;
            if r.abs() >= self.solver.tol * 10.0 {
                return Err(Error::NonConvergence {
                    solver: "inverse map equation",
                    iterations: 9 * self.solver.max_iter,
                    residual: r.abs(),
                });
            }
        }
        let x = big_x - s * self.g.gradient(Point::new(big_x, y))?.y;
        let pre = Point::new(x, y);
        self.check_input(pre)?;
        Ok(pre)
    }
}

/// Jacobian of the map generated by `s g`, from the Hessian of `g` at `(X, y)`:
///
/// ```text
/// 1/(1 - s g12) * [[1, s g22], [-s g11, -s^2 g11 g22 + (1 - s g12)^2]]
/// ```
pub fn jacobian_formula(s: f64, hess: &Mat2) -> Mat2 {
    let (g11, g12, g22) = (hess[(0, 0)], hess[(0, 1)], hess[(1, 1)]);
    let d = 1.0 - s * g12;
    Mat2::new(
        1.0 / d,
        s * g22 / d,
        -s * g11 / d,
        (-s * s * g11 * g22 + d * d) / d,
    )
}

impl Isotopy for GeneratedMap {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        self.apply(t * self.t, z)
    }

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        self.apply_with_jacobian(t * self.t, z)
    }

    fn domain(&self) -> Window {
        *self.g.window()
    }
}

/// An ordered product `f_{k-1} o ... o f_0` of generated maps. Its isotopy
/// runs the factor isotopies one after another, each on a time slot of
/// length `1/k`.
#[derive(Clone, Debug)]
pub struct MapFactorization {
    factors: Vec<GeneratedMap>,
}

impl MapFactorization {
    pub fn new(factors: Vec<GeneratingFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factorization needs at least one factor"));
        }
        Ok(Self {
            factors: factors.into_iter().map(GeneratedMap::new).collect(),
        })
    }

    pub fn single(g: GeneratingFunction) -> Self {
        Self {
            factors: vec![GeneratedMap::new(g)],
        }
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.factors = self.factors.into_iter().map(|f| f.with_solver(solver)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[GeneratedMap] {
        &self.factors
    }

    pub fn generating_function(&self, j: usize) -> &GeneratingFunction {
        self.factors[j % self.factors.len()].generating_function()
    }

    /// True when every factor window contains the closed disc `|z - z0| <= radius`.
    pub fn covers_neighborhood(&self, z0: &Point, radius: f64) -> bool {
        self.factors.iter().all(|f| f.window().contains_disc(z0, radius))
    }

    /// Applies factor `j mod k` to `z`.
    pub fn step(&self, j: usize, z: Point) -> Result<Point> {
        self.factors[j % self.factors.len()].forward(z)
    }

    fn slot(&self, t: f64) -> (usize, f64) {
        let k = self.factors.len();
        let u = t.clamp(0.0, 1.0) * k as f64;
        let j = (u.floor() as usize).min(k - 1);
        (j, u - j as f64)
    }
}

impl Isotopy for MapFactorization {
    fn eval(&self, t: f64, z: Point) -> Result<Point> {
        let (slot, frac) = self.slot(t);
        let mut w = z;
        for f in &self.factors[..slot] {
            w = f.forward(w)?;
        }
        self.factors[slot].eval(frac, w)
    }

    fn eval_with_jacobian(&self, t: f64, z: Point) -> Result<(Point, Mat2)> {
        let (slot, frac) = self.slot(t);
        let mut w = z;
        let mut jac = Mat2::identity();
        for f in &self.factors[..slot] {
            let (next, j) = f.eval_with_jacobian(1.0, w)?;
            w = next;
            jac = j * jac;
        }
        let (image, j) = self.factors[slot].eval_with_jacobian(frac, w)?;
        Ok((image, j * jac))
    }

    fn domain(&self) -> Window {
        self.factors
            .iter()
            .skip(1)
            .fold(*self.factors[0].window(), |acc, f| acc.intersect(f.window()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::Polynomial;
    use crate::geometry::point;

    fn shear() -> GeneratedMap {
        let g =
            GeneratingFunction::polynomial("shear", Polynomial::new([(0, 2, 0.5)]), Window::centered(1.0))
                .unwrap();
        GeneratedMap::new(g)
    }

    fn degmax() -> GeneratedMap {
        let g = GeneratingFunction::polynomial(
            "degmax",
            Polynomial::new([(4, 0, -0.25), (2, 2, -0.5), (0, 4, -0.25)]),
            Window::centered(0.65),
        )
        .unwrap();
        GeneratedMap::new(g)
    }

    #[test]
    fn shear_forward_and_inverse() {
        let m = shear();
        let out = m.forward(point(0.3, 0.5)).unwrap();
        assert!((out - point(0.8, 0.5)).norm() < 1e-15);
        let back = m.inverse(point(0.8, 0.5)).unwrap();
        assert!((back - point(0.3, 0.5)).norm() < 1e-15);
        let jac = m.jacobian(point(-0.2, 0.1)).unwrap();
        assert!((jac - Mat2::new(1.0, 1.0, 0.0, 1.0)).abs().max() < 1e-15);
    }

    #[test]
    fn time_zero_is_identity() {
        let m = degmax().with_time(0.0).unwrap();
        let z = point(0.31, -0.12);
        assert_eq!(m.forward(z).unwrap(), z);
        assert_eq!(m.inverse(z).unwrap(), z);
        assert!((m.jacobian(z).unwrap() - Mat2::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn rejects_time_outside_unit_interval() {
        assert!(degmax().with_time(1.5).is_err());
    }

    #[test]
    fn out_of_window_input_is_an_error() {
        assert!(matches!(
            degmax().forward(point(0.7, 0.0)),
            Err(Error::OutOfWindow { .. })
        ));
    }

    #[test]
    fn implicit_root_independent_of_seed() {
        let m = degmax();
        let (x, y) = (0.21, 0.33);
        let roots: Vec<f64> = [x, -0.5, 0.6]
            .iter()
            .map(|&seed| m.solve_implicit_x(1.0, x, y, seed).unwrap())
            .collect();
        assert!((roots[0] - roots[1]).abs() < 1e-12);
        assert!((roots[0] - roots[2]).abs() < 1e-12);
    }

    #[test]
    fn factorization_slots_compose_factors() {
        let g = degmax().generating_function().clone();
        let fac = MapFactorization::new(vec![g.clone(), g.clone()]).unwrap();
        let z = point(0.2, 0.1);
        let single = GeneratedMap::new(g);
        let two = single.forward(single.forward(z).unwrap()).unwrap();
        assert!((fac.forward(z).unwrap() - two).norm() < 1e-15);
        let half = fac.eval(0.5, z).unwrap();
        assert!((half - single.forward(z).unwrap()).norm() < 1e-15);
        assert_eq!(fac.eval(0.0, z).unwrap(), z);
        let (_, jac) = fac.forward_with_jacobian(z).unwrap();
        assert!((jac.determinant() - 1.0).abs() < 1e-12);
    }
}
