//! Discrete symplectic action of a factorised map.
//!
//! For a chain `z_0, ..., z_{n-1}` with `n = k q` and indices mod `n`,
//!
//! ```text
//! A(z) = sum_j  y_j (x_j - x_{j+1}) + g_{j mod k}(x_{j+1}, y_j)
//! ```
//!
//! Critical chains are exactly the cyclic orbit segments
//! `z_{j+1} = f_{j mod k}(z_j)`. Variables are ordered
//! `[x_0, y_0, x_1, y_1, ...]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::MapFactorization;
use crate::geometry::{point, Point};
use crate::rotation::orbit_rotation_number;

/// Gradient norm at which a chain counts as critical.
pub const CRITICAL_TOL: f64 = 1e-10;
/// Cyclic orbit defect accepted when checking a critical chain.
pub const ORBIT_TOL: f64 = 1e-8;
/// Relative eigenvalue size counted as zero.
pub const NULL_RTOL: f64 = 1e-6;
/// Distance to the studied fixed point that counts as converging onto it.
pub const PUNCTURE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ActionChain {
    factorization: MapFactorization,
    q: usize,
    points: Vec<Point>,
}

impl ActionChain {
    pub fn new(factorization: MapFactorization, q: usize, points: Vec<Point>) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q must be positive"));
        }
        let n = factorization.len() * q;
        if points.len() != n {
            return Err(Error::invalid(format!(
                "chain has {} points, expected k q = {n}",
                points.len()
            )));
        }
        Ok(Self {
            factorization,
            q,
            points,
        })
    }

    /// Chain with every point equal to `z`.
    pub fn constant(factorization: MapFactorization, q: usize, z: Point) -> Result<Self> {
        let n = factorization.len() * q;
        Self::new(factorization, q, vec![z; n])
    }

    /// Chain of the first `k q` factor steps of the orbit of `z`. It is
    /// critical exactly when `z` has period `q` under the composed map.
    pub fn from_orbit(factorization: MapFactorization, q: usize, z: Point) -> Result<Self> {
        let n = factorization.len() * q;
        let mut points = Vec::with_capacity(n);
        let mut cur = z;
        for j in 0..n {
            points.push(cur);
            if j + 1 < n {
                cur = factorization.step(j, cur)?;
            }
        }
        Self::new(factorization, q, points)
    }

    pub fn factorization(&self) -> &MapFactorization {
        &self.factorization
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.len(), self.points.iter().flat_map(|p| [p.x, p.y]))
    }

    pub fn with_vector(&self, v: &DVector<f64>) -> Self {
        let points = (0..self.len()).map(|j| point(v[2 * j], v[2 * j + 1])).collect();
        Self {
            factorization: self.factorization.clone(),
            q: self.q,
            points,
        }
    }

    /// `(x_{j+1}, y_j)`, the argument of the `j`-th generating function term.
    fn term_point(&self, j: usize) -> Point {
        let n = self.len();
        point(self.points[(j + 1) % n].x, self.points[j].y)
    }

    /// Largest `|f_j(z_j) - z_{j+1}|` over the cycle.
    pub fn orbit_defect(&self) -> Result<f64> {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let image = self.factorization.step(j, self.points[j])?;
            worst = worst.max((image - self.points[(j + 1) % n]).norm());
        }
        Ok(worst)
    }
}

pub fn action_value(chain: &ActionChain) -> Result<f64> {
    let n = chain.len();
    let mut total = 0.0;
    for j in 0..n {
        let zj = chain.points[j];
        let next_x = chain.points[(j + 1) % n].x;
        let g = chain.factorization.generating_function(j);
        total += zj.y * (zj.x - next_x) + g.value(chain.term_point(j))?;
    }
    Ok(total)
}

pub fn action_gradient(chain: &ActionChain) -> Result<DVector<f64>> {
    let n = chain.len();
    let mut grad = DVector::zeros(2 * n);
    for j in 0..n {
        let next = (j + 1) % n;
        let zj = chain.points[j];
        let dg = chain
            .factorization
            .generating_function(j)
            .gradient(chain.term_point(j))?;
        grad[2 * j] += zj.y;
        grad[2 * next] += -zj.y + dg.x;
        grad[2 * j + 1] += zj.x - chain.points[next].x + dg.y;
    }
    Ok(grad)
}

/// Analytic Hessian, assembled term by term so that short cycles (where
/// `x_{j+1}` and `x_j` coincide) come out right.
pub fn action_hessian(chain: &ActionChain) -> Result<DMatrix<f64>> {
    let n = chain.len();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    let mut add = |a: usize, b: usize, v: f64| {
        h[(a, b)] += v;
        if a != b {
            h[(b, a)] += v;
        }
    };
    for j in 0..n {
        let (xj, yj, xn) = (2 * j, 2 * j + 1, 2 * ((j + 1) % n));
        let hg = chain
            .factorization
            .generating_function(j)
            .hessian(chain.term_point(j))?;
        add(xj, yj, 1.0);
        add(xn, yj, -1.0 + hg[(0, 1)]);
        add(xn, xn, hg[(0, 0)]);
        add(yj, yj, hg[(1, 1)]);
    }
    Ok(h)
}

/// Central-difference Hessian from the analytic gradient, symmetrised.
pub fn action_hessian_fd(chain: &ActionChain, h: f64) -> Result<DMatrix<f64>> {
    let v = chain.to_vector();
    let m = v.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut plus = v.clone();
        let mut minus = v.clone();
        plus[i] += h;
        minus[i] -= h;
        let col = (action_gradient(&chain.with_vector(&plus))?
            - action_gradient(&chain.with_vector(&minus))?)
            / (2.0 * h);
        out.set_column(i, &col);
    }
    Ok((&out + out.transpose()) * 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseData {
    pub morse_index: usize,
    pub nullity: usize,
    pub eigenvalues: Vec<f64>,
}

/// Morse index and nullity of the action Hessian at a critical chain.
pub fn morse_data(chain: &ActionChain) -> Result<MorseData> {
    let grad_norm = action_gradient(chain)?.norm();
    if grad_norm >= 1e-8 {
        return Err(Error::NotCritical {
            gradient_norm: grad_norm,
        });
    }
    morse_data_of(&action_hessian(chain)?)
}

pub fn morse_data_of(hess: &DMatrix<f64>) -> Result<MorseData> {
    let eig = SymmetricEigen::new(hess.clone());
    let scale = eig.eigenvalues.amax();
    let residual = (0..eig.eigenvalues.len())
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            (hess * v - v * eig.eigenvalues[i]).norm()
        })
        .fold(0.0, f64::max);
    if residual > 1e-6 * scale.max(1.0) {
        return Err(Error::IllConditioned { residual });
    }
    let eps = NULL_RTOL * scale;
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(MorseData {
        morse_index: eigenvalues.iter().filter(|&&l| l < -eps).count(),
        nullity: eigenvalues.iter().filter(|&&l| l.abs() <= eps).count(),
        eigenvalues,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Studied fixed point; a chain converging onto it is rejected, and
    /// windings are measured about it.
    pub puncture: Option<Point>,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            tol: CRITICAL_TOL,
            max_iter: 200,
            puncture: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriticalReport {
    pub chain: ActionChain,
    pub grad_norm: f64,
    pub morse_index: usize,
    pub nullity: usize,
    pub orbit_point: Point,
    /// Turns about the puncture over one period, when a puncture is given.
    pub winding: Option<i64>,
    pub iterations: usize,
}

/// Flat record of a critical chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub q: usize,
    pub p: Option<i64>,
    pub x0: f64,
    pub y0: f64,
    pub grad_norm: f64,
    pub morse_index: usize,
    pub nullity: usize,
    pub finder: String,
}

impl CriticalReport {
    pub fn record(&self) -> CriticalRecord {
        CriticalRecord {
            q: self.chain.q(),
            p: self.winding,
            x0: self.orbit_point.x,
            y0: self.orbit_point.y,
            grad_norm: self.grad_norm,
            morse_index: self.morse_index,
            nullity: self.nullity,
            finder: "action".into(),
        }
    }
}

/// Levenberg-Marquardt on `grad A = 0` with the action Hessian as Jacobian.
pub fn find_critical_point(
    factorization: &MapFactorization,
    q: usize,
    seed: Vec<Point>,
    opts: &CriticalOptions,
) -> Result<CriticalReport> {
    let mut chain = ActionChain::new(factorization.clone(), q, seed)?;
    let mut grad = action_gradient(&chain)?;
    let mut lambda = 1e-6;
    let mut iterations = 0;
    while grad.norm() >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(stalled(&chain, iterations, grad.norm()));
        }
        iterations += 1;
        let hess = action_hessian(&chain)?;
        let normal = &hess * &hess;
        let rhs = -(&hess * &grad);
        let scale = normal.diagonal().amax().max(f64::MIN_POSITIVE);
        let v = chain.to_vector();
        let mut accepted = false;
        while lambda < 1e12 {
            let mut lhs = normal.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += lambda * scale;
            }
            let step = lhs.cholesky().map(|c| c.solve(&rhs));
            let Some(step) = step else {
                lambda *= 8.0;
                continue;
            };
            let candidate = chain.with_vector(&(&v + step));
            match action_gradient(&candidate) {
                Ok(g) if g.norm() < grad.norm() => {
                    chain = candidate;
                    grad = g;
                    lambda = (lambda / 4.0).max(1e-15);
                    accepted = true;
                    break;
                }
                _ => lambda *= 8.0,
            }
        }
        if !accepted {
            return Err(stalled(&chain, iterations, grad.norm()));
        }
    }
    let orbit_point = chain.points()[0];
    if let Some(p) = opts.puncture {
        if (orbit_point - p).norm() < PUNCTURE_TOL {
            return Err(Error::ConvergedToPuncture);
        }
    }
    let defect = chain.orbit_defect()?;
    if defect > ORBIT_TOL {
        return Err(Error::InvariantBreach(format!(
            "critical chain is not an orbit (defect {defect:e})"
        )));
    }
    let winding = match opts.puncture {
        Some(p) => {
            let s = orbit_rotation_number(factorization, orbit_point, p, q)?;
            Some((s.rho_n * q as f64).round() as i64)
        }
        None => None,
    };
    let morse = morse_data(&chain)?;
    Ok(CriticalReport {
        grad_norm: grad.norm(),
        morse_index: morse.morse_index,
        nullity: morse.nullity,
        orbit_point,
        winding,
        iterations,
        chain,
    })
}

fn stalled(chain: &ActionChain, iterations: usize, grad_norm: f64) -> Error {
    Error::CriticalPointNotFound {
        iterations,
        grad_norm,
        best: chain.to_vector().iter().copied().collect(),
    }
}

/// Runs [`find_critical_point`] from every seed in parallel and keeps the
/// successes whose first points are pairwise more than `1e-6` apart, in seed
/// order.
pub fn find_critical_points(
    factorization: &MapFactorization,
    q: usize,
    seeds: &[Vec<Point>],
    opts: &CriticalOptions,
) -> Vec<CriticalReport> {
    let found: Vec<Option<CriticalReport>> = seeds
        .par_iter()
        .map(|s| find_critical_point(factorization, q, s.clone(), opts).ok())
        .collect();
    let mut distinct: Vec<CriticalReport> = Vec::new();
    for r in found.into_iter().flatten() {
        if distinct
            .iter()
            .all(|d| (d.orbit_point - r.orbit_point).norm() > 1e-6)
        {
            distinct.push(r);
        }
    }
    distinct
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::genfun::{GeneratingFunction, Polynomial};
    use crate::geometry::Window;

    fn zero_map(k: usize) -> MapFactorization {
        let z = GeneratingFunction::polynomial("0", Polynomial::zero(), Window::centered(1.0)).unwrap();
        MapFactorization::new(vec![z; k]).unwrap()
    }

    #[test]
    fn zero_action_on_constant_chain() {
        let chain = ActionChain::constant(zero_map(2), 3, point(0.2, -0.3)).unwrap();
        assert_eq!(action_value(&chain).unwrap(), 0.0);
        assert_eq!(action_gradient(&chain).unwrap().norm(), 0.0);
    }

    #[test]
    fn single_point_action_is_generating_function() {
        let fac = MapFactorization::single(catalog::degmax());
        let z = point(0.1, 0.2);
        let chain = ActionChain::constant(fac.clone(), 1, z).unwrap();
        let g = fac.generating_function(0).value(z).unwrap();
        assert_eq!(action_value(&chain).unwrap(), g);
    }

    #[test]
    fn perturbed_entry_touches_four_components() {
        let fac = zero_map(1);
        let mut pts = vec![point(0.1, 0.1); 5];
        pts[2] += point(0.01, -0.02);
        let chain = ActionChain::new(fac, 5, pts).unwrap();
        let g = action_gradient(&chain).unwrap();
        let nonzero: Vec<usize> = (0..g.len()).filter(|&i| g[i] != 0.0).collect();
        // d/dx_2, d/dy_2, d/dx_3 and d/dy_1
        assert_eq!(nonzero, vec![3, 4, 5, 6]);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let fac = catalog::degmax_factored(2).unwrap();
        let pts = vec![
            point(0.1, 0.2),
            point(-0.15, 0.05),
            point(0.3, -0.1),
            point(0.0, 0.25),
        ];
        let chain = ActionChain::new(fac, 2, pts).unwrap();
        let an = action_hessian(&chain).unwrap();
        let fd = action_hessian_fd(&chain, 1e-5).unwrap();
        assert!((an - fd).amax() < 1e-7);
    }

    #[test]
    fn morse_data_of_small_cycles() {
        let m = morse_data(&ActionChain::constant(zero_map(1), 1, point(0.0, 0.0)).unwrap()).unwrap();
        assert_eq!((m.morse_index, m.nullity), (0, 2));
        let max = GeneratingFunction::polynomial(
            "max",
            Polynomial::new([(2, 0, -0.5), (0, 2, -0.5)]),
            Window::centered(1.0),
        )
        .unwrap();
        let chain = ActionChain::constant(MapFactorization::single(max), 1, point(0.0, 0.0)).unwrap();
        let m = morse_data(&chain).unwrap();
        assert_eq!((m.morse_index, m.nullity), (2, 0));
        let chain =
            ActionChain::constant(MapFactorization::single(catalog::degmax()), 1, point(0.0, 0.0)).unwrap();
        assert!(morse_data(&chain).unwrap().nullity >= 1);
    }

    #[test]
    fn fixed_point_seed_converges_immediately() {
        let fac = MapFactorization::single(catalog::saddle());
        let r = find_critical_point(&fac, 1, vec![point(0.0, 0.0)], &CriticalOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.grad_norm, 0.0);
        let opts = CriticalOptions {
            puncture: Some(point(0.0, 0.0)),
            ..CriticalOptions::default()
        };
        assert!(matches!(
            find_critical_point(&fac, 1, vec![point(0.3, -0.2)], &opts),
            Err(Error::ConvergedToPuncture)
        ));
    }
}
