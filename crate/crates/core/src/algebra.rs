//! The path algebra `A = T_B E` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::path::Path;
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::terms::{accumulate, fmt_coefficient};
use crate::Rational;

pub(crate) fn same_quiver(a: &Arc<Quiver>, b: &Arc<Quiver>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A finite linear combination of paths; zero coefficients are never stored.
#[derive(Clone, Debug)]
pub struct PathAlgebraElement {
    quiver: Arc<Quiver>,
    terms: BTreeMap<Path, Rational>,
}

impl PartialEq for PathAlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        same_quiver(&self.quiver, &other.quiver) && self.terms == other.terms
    }
}

impl Eq for PathAlgebraElement {}

impl PathAlgebraElement {
    pub fn zero(quiver: &Arc<Quiver>) -> Self {
        Self {
            quiver: quiver.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The unit `Σ_i 1_i`.
    pub fn one(quiver: &Arc<Quiver>) -> Self {
        Self::from_terms(
            quiver,
            quiver.vertices().map(|v| (Path::idempotent(v), Rational::one())),
        )
    }

    pub fn idempotent(quiver: &Arc<Quiver>, v: VertexId) -> Self {
        Self::from_path(quiver, Path::idempotent(v))
    }

    pub fn arrow(quiver: &Arc<Quiver>, a: ArrowId) -> Self {
        Self::from_path(quiver, Path::arrow(quiver, a))
    }

    pub fn from_path(quiver: &Arc<Quiver>, path: Path) -> Self {
        Self::from_terms(quiver, [(path, Rational::one())])
    }

    pub fn from_terms(quiver: &Arc<Quiver>, terms: impl IntoIterator<Item = (Path, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, c) in terms {
            accumulate(&mut map, p, c);
        }
        Self {
            quiver: quiver.clone(),
            terms: map,
        }
    }

    pub(crate) fn from_map(quiver: &Arc<Quiver>, terms: BTreeMap<Path, Rational>) -> Self {
        debug_assert!(terms.values().all(|c| !c.is_zero()));
        Self {
            quiver: quiver.clone(),
            terms,
        }
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn terms(&self) -> &BTreeMap<Path, Rational> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Path, Rational> {
        self.terms
    }

    pub fn coefficient(&self, p: &Path) -> Rational {
        self.terms.get(p).cloned().unwrap_or_else(Rational::zero)
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

    /// Largest path length among the terms, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).max()
    }

    /// Terms of path length exactly `d`.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        self.filter(|p| p.len() == d)
    }

    /// Drops every term of path length greater than `max`.
    pub fn truncate(&self, max: usize) -> Self {
        self.filter(|p| p.len() <= max)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Path) -> bool) -> Self {
        Self {
            quiver: self.quiver.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| keep(p))
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_quiver(&self.quiver, &other.quiver) {
            Ok(())
        } else {
            Err(Error::QuiverMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (p, c) in &other.terms {
            accumulate(&mut terms, p.clone(), c.clone());
        }
        Ok(Self::from_map(&self.quiver, terms))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (p, c) in &other.terms {
            accumulate(&mut terms, p.clone(), -c.clone());
        }
        Ok(Self::from_map(&self.quiver, terms))
    }

    /// Bilinear extension of path composition; non-composable pairs vanish.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.mul_truncated(other, usize::MAX)
    }

    /// The product with every path longer than `max_len` dropped.
    pub fn mul_truncated(&self, other: &Self, max_len: usize) -> Result<Self> {
        self.check(other)?;
        let mut terms = BTreeMap::new();
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                if p.len() + q.len() > max_len {
                    continue;
                }
                if let Some(pq) = p.compose(q) {
                    accumulate(&mut terms, pq, c * d);
                }
            }
        }
        Ok(Self::from_map(&self.quiver, terms))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(&self.quiver);
        }
        Self {
            quiver: self.quiver.clone(),
            terms: self.terms.iter().map(|(p, c)| (p.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(&self.quiver), |acc, _| &acc * self)
    }

    /// `1_i · self · 1_j`.
    pub fn corner(&self, head: VertexId, tail: VertexId) -> Self {
        self.filter(|p| p.head() == head && p.tail() == tail)
    }
}

/// `compose_paths`: the single-term product `p·q`, or zero when `tail(p) ≠ head(q)`.
pub fn compose_paths(quiver: &Arc<Quiver>, p: &Path, q: &Path) -> PathAlgebraElement {
    match p.compose(q) {
        Some(pq) => PathAlgebraElement::from_path(quiver, pq),
        None => PathAlgebraElement::zero(quiver),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $call:ident) => {
        impl $trait<&PathAlgebraElement> for &PathAlgebraElement {
            type Output = PathAlgebraElement;

            /// Panics if the operands live over different quivers.
            fn $method(self, rhs: &PathAlgebraElement) -> PathAlgebraElement {
                self.$call(rhs).expect("operands over different quivers")
            }
        }

        impl $trait for PathAlgebraElement {
            type Output = PathAlgebraElement;

            fn $method(self, rhs: PathAlgebraElement) -> PathAlgebraElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &PathAlgebraElement {
    type Output = PathAlgebraElement;

    fn neg(self) -> PathAlgebraElement {
        self.scale(&-Rational::one())
    }
}

impl Neg for PathAlgebraElement {
    type Output = PathAlgebraElement;

    fn neg(self) -> PathAlgebraElement {
        -&self
    }
}

impl fmt::Display for PathAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            fmt_coefficient(f, i == 0, c, true)?;
            write!(f, "{}", p.display(&self.quiver))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::DoubledQuiver;

    fn two_loops() -> Arc<Quiver> {
        Arc::new(Quiver::loops(&["x", "y"]).unwrap())
    }

    fn a2() -> Arc<Quiver> {
        let base = Quiver::new(["1", "2"], [("a".to_owned(), "1".to_owned(), "2".to_owned())]).unwrap();
        DoubledQuiver::new(base).unwrap().quiver().clone()
    }

    fn gen(q: &Arc<Quiver>, name: &str) -> PathAlgebraElement {
        PathAlgebraElement::arrow(q, q.find_arrow(name).unwrap())
    }

    #[test]
    fn compose_follows_right_to_left_convention() {
        let q = a2();
        let a = Path::arrow(&q, q.find_arrow("a").unwrap());
        let astar = Path::arrow(&q, q.find_arrow("a*").unwrap());
        let loop1 = compose_paths(&q, &astar, &a);
        let (p, _) = loop1.terms().iter().next().unwrap();
        assert!(p.is_closed());
        assert_eq!(p.head(), q.find_vertex("1").unwrap());
        assert!(compose_paths(&q, &a, &a).is_zero());
    }

    #[test]
    fn loop_squared() {
        let q = two_loops();
        let x = gen(&q, "x");
        assert_eq!((&x * &x).to_string(), "x x");
    }

    #[test]
    fn difference_of_squares_is_noncommutative() {
        let q = two_loops();
        let (x, y) = (gen(&q, "x"), gen(&q, "y"));
        let lhs = &(&x + &y) * &(&x - &y);
        assert_eq!(lhs.to_string(), "x x - x y + y x - y y");
    }

    #[test]
    fn scaling_by_zero_gives_zero() {
        let q = two_loops();
        assert!(gen(&q, "x").scale(&Rational::zero()).is_zero());
    }

    #[test]
    fn idempotents_act_by_endpoints() {
        let q = a2();
        let a = gen(&q, "a");
        let e1 = PathAlgebraElement::idempotent(&q, q.find_vertex("1").unwrap());
        let e2 = PathAlgebraElement::idempotent(&q, q.find_vertex("2").unwrap());
        assert!((&e1 * &a).is_zero());
        assert_eq!(&e2 * &a, a);
        assert_eq!(&a * &e1, a);
    }

    #[test]
    fn mismatched_quivers_are_rejected() {
        let x = gen(&two_loops(), "x");
        let a = gen(&a2(), "a");
        assert_eq!(x.try_add(&a).unwrap_err(), Error::QuiverMismatch);
        assert_eq!(x.try_mul(&a).unwrap_err(), Error::QuiverMismatch);
    }
}
