use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::Result;
use crate::geometry::{Mat2, Point, Window};

/// One monomial `coeff * x^i * y^j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub coeff: f64,
}

/// Bivariate polynomial given by a coefficient table. Derivatives are exact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    terms: Vec<Term>,
}

fn powi(base: f64, exp: u32) -> f64 {
    base.powi(exp as i32)
}

impl Polynomial {
    pub fn new(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for (i, j, coeff) in terms {
            if let Some(t) = merged.iter_mut().find(|t| t.i == i && t.j == j) {
                t.coeff += coeff;
            } else {
                merged.push(Term { i, j, coeff });
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Self { terms: merged }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.terms.iter().map(|t| (t.i, t.j, t.coeff * factor)))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * powi(x, t.i) * powi(y, t.j))
            .sum()
    }

    pub fn d1(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.i > 0)
            .map(|t| t.coeff * t.i as f64 * powi(x, t.i - 1) * powi(y, t.j))
            .sum()
    }

    pub fn d2(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.j > 0)
            .map(|t| t.coeff * t.j as f64 * powi(x, t.i) * powi(y, t.j - 1))
            .sum()
    }

    pub fn d11(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.i > 1)
            .map(|t| t.coeff * (t.i * (t.i - 1)) as f64 * powi(x, t.i - 2) * powi(y, t.j))
            .sum()
    }

    pub fn d12(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.i > 0 && t.j > 0)
            .map(|t| t.coeff * (t.i * t.j) as f64 * powi(x, t.i - 1) * powi(y, t.j - 1))
            .sum()
    }

    pub fn d22(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.j > 1)
            .map(|t| t.coeff * (t.j * (t.j - 1)) as f64 * powi(x, t.i) * powi(y, t.j - 2))
            .sum()
    }

    /// Upper bound on `|d12|` over the window from the triangle inequality.
    pub fn mixed_partial_bound(&self, window: &Window) -> f64 {
        let (ax, ay) = window.abs_extent();
        self.terms
            .iter()
            .filter(|t| t.i > 0 && t.j > 0)
            .map(|t| t.coeff.abs() * (t.i * t.j) as f64 * powi(ax, t.i - 1) * powi(ay, t.j - 1))
            .sum()
    }
}

impl ScalarField for Polynomial {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.eval(p.x, p.y))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        Ok(Point::new(self.d1(p.x, p.y), self.d2(p.x, p.y)))
    }

    fn hessian(&self, p: Point) -> Result<Mat2> {
        let h12 = self.d12(p.x, p.y);
        Ok(Mat2::new(self.d11(p.x, p.y), h12, h12, self.d22(p.x, p.y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_derivatives() {
        // -(x^2 + y^2)^2 / 4
        let p = Polynomial::new([(4, 0, -0.25), (2, 2, -0.5), (0, 4, -0.25)]);
        let (x, y) = (0.3, -0.2);
        let r2 = x * x + y * y;
        assert!((p.eval(x, y) + r2 * r2 / 4.0).abs() < 1e-15);
        assert!((p.d1(x, y) + r2 * x).abs() < 1e-15);
        assert!((p.d2(x, y) + r2 * y).abs() < 1e-15);
        assert!((p.d12(x, y) + 2.0 * x * y).abs() < 1e-15);
        assert!((p.d11(x, y) + 3.0 * x * x + y * y).abs() < 1e-15);
        assert!((p.d22(x, y) + x * x + 3.0 * y * y).abs() < 1e-15);
    }

    #[test]
    fn merges_duplicate_monomials() {
        let p = Polynomial::new([(1, 1, 0.5), (1, 1, 0.25), (2, 0, 0.0)]);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].coeff, 0.75);
    }

    #[test]
    fn mixed_bound_is_attained_for_xy_monomial() {
        let p = Polynomial::new([(2, 2, -0.5)]);
        let w = Window::centered(0.65);
        assert!((p.mixed_partial_bound(&w) - 2.0 * 0.65 * 0.65).abs() < 1e-15);
    }
}
