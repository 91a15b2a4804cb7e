//! Sparse polynomials in commuting variables with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::terms::{accumulate, fmt_coefficient};
use crate::Rational;

/// A monomial as the sorted multiset of its variable indices.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

fn merge(a: &[u32], b: &[u32]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([(Vec::new(), c)])
    }

    pub fn var(v: u32) -> Self {
        Self::from_terms([(vec![v], Rational::one())])
    }

    /// Sums the given terms; monomials need not be sorted.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (mut m, c) in terms {
            m.sort_unstable();
            accumulate(&mut map, m, c);
        }
        Self { terms: map }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    pub fn coefficient(&self, m: &[u32]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Polynomial, s: &Rational) {
        for (m, c) in &other.terms {
            accumulate(&mut self.terms, m.clone(), c * s);
        }
    }

    /// `∂/∂v`.
    pub fn derivative(&self, v: u32) -> Polynomial {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let Some(first) = m.iter().position(|&u| u == v) else { continue };
            let count = m[first..].iter().take_while(|&&u| u == v).count();
            let mut rest = m.clone();
            rest.remove(first);
            accumulate(&mut out, rest, c * Rational::from_integer(count.into()));
        }
        Polynomial { terms: out }
    }

    /// Variables that occur, in increasing order.
    pub fn variables(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = self.terms.keys().flatten().copied().collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn evaluate(&self, value: impl Fn(u32) -> Rational) -> Rational {
        let mut cache: BTreeMap<u32, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for v in m {
                let x = cache.entry(*v).or_insert_with(|| value(*v));
                t *= &*x;
            }
            total += t;
        }
        total
    }

    pub fn display_with<'a>(&'a self, name: &'a dyn Fn(u32) -> String) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, name }
    }
}

struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    name: &'a dyn Fn(u32) -> String,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            fmt_coefficient(f, i == 0, c, !m.is_empty())?;
            let mut k = 0;
            let mut first = true;
            while k < m.len() {
                let run = m[k..].iter().take_while(|&&u| u == m[k]).count();
                if !first {
                    write!(f, "*")?;
                }
                write!(f, "{}", (self.name)(m[k]))?;
                if run > 1 {
                    write!(f, "^{run}")?;
                }
                first = false;
                k += run;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: u32| format!("v{v}");
        PolyDisplay { poly: self, name: &name }.fmt(f)
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &-Rational::one());
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = BTreeMap::new();
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                accumulate(&mut out, merge(a, b), c * d);
            }
        }
        Polynomial { terms: out }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;

    #[test]
    fn arithmetic() {
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let s = &x + &y;
        let sq = &s * &s;
        assert_eq!(sq.coefficient(&[0, 1]), int(2));
        assert_eq!(sq.coefficient(&[0, 0]), int(1));
        assert!((&sq - &sq).is_zero());
        assert_eq!(sq.to_string(), "v0^2 + 2 v0*v1 + v1^2");
    }

    #[test]
    fn derivative_counts_multiplicity() {
        let x = Polynomial::var(3);
        let cube = &(&x * &x) * &x;
        assert_eq!(cube.derivative(3), (&x * &x).scale(&int(3)));
        assert!(cube.derivative(4).is_zero());
    }

    #[test]
    fn evaluation() {
        let p = &(&Polynomial::var(0) * &Polynomial::var(1)) + &Polynomial::constant(int(5));
        assert_eq!(p.evaluate(|v| int(v as i64 + 2)), int(11));
    }
}
