use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The largest interval around `p/q` containing no fraction with denominator
/// below `q`; its endpoints are the Farey parents of `p/q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyInterval {
    pub p: i64,
    pub q: i64,
    pub lo: Ratio<i64>,
    pub hi: Ratio<i64>,
}

impl FareyInterval {
    pub fn contains(&self, x: Ratio<i64>) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let lo = *self.lo.numer() as f64 / *self.lo.denom() as f64;
        let hi = *self.hi.numer() as f64 / *self.hi.denom() as f64;
        lo <= x && x <= hi
    }
}

/// Farey interval of `p/q` for `p, q >= 1` coprime and `q >= 2`.
///
/// With `b = p^{-1} mod q` and `a = (p b - 1) / q` the parents are `a/b` and
/// `(p - a)/(q - b)`.
pub fn farey_interval(p: i64, q: i64) -> Result<FareyInterval> {
    if p <= 0 || q <= 0 {
        return Err(Error::invalid(format!("{p}/{q} must be a positive fraction")));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::NotIrreducible { p, q });
    }
    if q == 1 {
        return Err(Error::invalid(
            "an integer has no fraction of smaller denominator on either side",
        ));
    }
    let ext = p.extended_gcd(&q);
    let b = ext.x.rem_euclid(q);
    let a = (p * b - 1) / q;
    Ok(FareyInterval {
        p,
        q,
        lo: Ratio::new(a, b),
        hi: Ratio::new(p - a, q - b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let r = |a, b| Ratio::new(a, b);
        let i = farey_interval(1, 3).unwrap();
        assert_eq!((i.lo, i.hi), (r(0, 1), r(1, 2)));
        let i = farey_interval(1, 2).unwrap();
        assert_eq!((i.lo, i.hi), (r(0, 1), r(1, 1)));
        let i = farey_interval(7, 5).unwrap();
        assert_eq!((i.lo, i.hi), (r(4, 3), r(3, 2)));
    }

    #[test]
    fn errors() {
        assert!(matches!(farey_interval(2, 4), Err(Error::NotIrreducible { .. })));
        assert!(farey_interval(3, 1).is_err());
        assert!(farey_interval(-1, 3).is_err());
    }
}
