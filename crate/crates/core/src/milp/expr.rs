//! Sparse linear expressions with operator overloading, so constraints can be
//! written close to their mathematical form:
//! `model.add_constraint(x + 2.0 * y - 1.0, Sense::Le, 0.0)`.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::model::VarId;

/// `sum coeff_j * x_j + constant`. Coefficients are merged exactly on
/// combination; a coefficient that cancels to exactly 0.0 is dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self { terms: BTreeMap::new(), constant: value }
    }

    pub fn term(var: VarId, coeff: f64) -> Self {
        let mut e = Self::new();
        e.add_term(var, coeff);
        e
    }

    pub fn var(var: VarId) -> Self {
        Self::term(var, 1.0)
    }

    pub fn add_term(&mut self, var: VarId, coeff: f64) {
        let c = self.terms.entry(var).or_insert(0.0);
        *c += coeff;
        if *c == 0.0 {
            self.terms.remove(&var);
        }
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn coeff(&self, var: VarId) -> f64 {
        self.terms.get(&var).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates the expression at the given point (indexed by `VarId`).
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&v, &c)| c * values[v]).sum::<f64>()
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= rhs;
        self
    }
}

impl SubAssign for LinExpr {
    fn sub_assign(&mut self, rhs: LinExpr) {
        for (v, c) in rhs.terms {
            self.add_term(v, -c);
        }
        self.constant -= rhs.constant;
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: f64) -> LinExpr {
        self.constant -= rhs;
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        if rhs == 0.0 {
            return LinExpr::new();
        }
        for c in self.terms.values_mut() {
            *c *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

impl Mul<LinExpr> for f64 {
    type Output = LinExpr;
    fn mul(self, rhs: LinExpr) -> LinExpr {
        rhs * self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_merges_coefficients_exactly() {
        let x = LinExpr::var(0);
        let y = LinExpr::var(1);
        let e = x.clone() + 2.0 * y.clone() + x.clone() - y + 3.0;
        assert_eq!(e.coeff(0), 2.0);
        assert_eq!(e.coeff(1), 1.0);
        assert_eq!(e.constant_part(), 3.0);
    }

    #[test]
    fn cancelled_terms_are_dropped() {
        let e = LinExpr::var(0) - LinExpr::var(0);
        assert!(e.is_constant());
        assert_eq!(e.num_terms(), 0);
    }

    #[test]
    fn associativity() {
        let (x, y, z) = (LinExpr::var(0), LinExpr::var(1), LinExpr::var(2));
        let a = (x.clone() + y.clone()) + z.clone();
        let b = x + (y + z);
        assert_eq!(a, b);
    }

    #[test]
    fn eval() {
        let e = 2.0 * LinExpr::var(0) + LinExpr::var(2) + 1.0;
        assert_eq!(e.eval(&[3.0, 99.0, 4.0]), 11.0);
    }
}
