//! Calogero-Moser matrix pairs: `[X, Y] + Id` of rank one.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::necklace::{necklace_basis, Necklace};
use crate::quiver::{ArrowId, Quiver};
use crate::rep::{DimensionVector, RepPoint};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmPoint {
    pub x: Matrix,
    pub y: Matrix,
}

impl CmPoint {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    /// `[X, Y] + Id`.
    pub fn shifted_commutator(&self) -> Matrix {
        &self.x.commutator(&self.y) + &Matrix::identity(self.n())
    }

    /// `(X, Y) ↦ (g X g⁻¹, g Y g⁻¹)`.
    pub fn conjugate(&self, g: &Matrix) -> Result<CmPoint> {
        let inv = g
            .inverse()
            .ok_or_else(|| Error::Input("conjugating matrix is singular".into()))?;
        Ok(CmPoint {
            x: &(g * &self.x) * &inv,
            y: &(g * &self.y) * &inv,
        })
    }

    /// The point as a representation of the doubled one-loop quiver `q`:
    /// arrow 0 acts by `X`, arrow 1 by `Y`.
    pub fn rep_point(&self, q: &Arc<Quiver>) -> Result<RepPoint> {
        check_one_loop(q)?;
        let dims = DimensionVector::uniform(q, self.n())?;
        RepPoint::new(q, dims, vec![self.x.clone(), self.y.clone()])
    }
}

fn check_one_loop(q: &Quiver) -> Result<()> {
    if q.vertex_count() != 1 || q.arrow_count() != 2 {
        return Err(Error::Input("expected the doubled one-loop quiver".into()));
    }
    Ok(())
}

/// `X = diag(x)`, `Y_ii = p_i`, `Y_ij = 1/(x_i − x_j)`.
pub fn cm_point(x: &[Rational], p: &[Rational]) -> Result<CmPoint> {
    if x.len() != p.len() {
        return Err(Error::Input(format!(
            "{} positions but {} momenta",
            x.len(),
            p.len()
        )));
    }
    for (i, xi) in x.iter().enumerate() {
        if x[..i].contains(xi) {
            return Err(Error::RepeatedPosition(xi.to_string()));
        }
    }
    let n = x.len();
    let y = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            p[i].clone()
        } else {
            (&x[i] - &x[j]).recip()
        }
    });
    let pt = CmPoint {
        x: Matrix::diagonal(x),
        y,
    };
    if !cm_membership(&pt.x, &pt.y)? {
        return Err(Error::Input("constructed pair fails the rank-one condition".into()));
    }
    Ok(pt)
}

/// Whether `[X, Y] + Id` has rank one and trace `n`.
pub fn cm_membership(x: &Matrix, y: &Matrix) -> Result<bool> {
    let n = x.rows();
    for (what, m) in [("X", x), ("Y", y)] {
        if m.shape() != (n, n) {
            return Err(Error::Shape {
                what: what.into(),
                expected_rows: n,
                expected_cols: n,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
    }
    let s = &x.commutator(y) + &Matrix::identity(n);
    Ok(s.rank() == 1 && s.trace() == Rational::from_integer(n.into()))
}

/// `⟨ev(pt), f⟩ = tr f(X, Y)`.
pub fn coadjoint_eval(f: &Necklace, pt: &CmPoint) -> Result<Rational> {
    crate::rep::trace_evaluate(f, &pt.rep_point(f.quiver())?)
}

/// `d/dt|₀ tr f(X, Y + 2tX)`, the derivative along the Hamiltonian flow of
/// `tr x²`. Each occurrence of `y` in turn is replaced by `2X`.
pub fn flow_derivative(f: &Necklace, pt: &CmPoint) -> Result<Rational> {
    check_one_loop(f.quiver())?;
    let two_x = pt.x.scale(&Rational::from_integer(2.into()));
    let mats = [&pt.x, &pt.y];
    let n = pt.n();
    let mut total = Rational::zero();
    for (p, c) in f.cycles() {
        for (k, a) in p.arrows().iter().enumerate() {
            if *a != ArrowId(1) {
                continue;
            }
            let mut acc = Matrix::identity(n);
            for (j, b) in p.arrows().iter().enumerate() {
                let m = if j == k { &two_x } else { mats[b.index()] };
                acc = &acc * m;
            }
            total += c * acc.trace();
        }
    }
    Ok(total)
}

/// A necklace of degree at most `max_degree` on which the two points differ.
pub fn separating_necklace(
    q: &Arc<Quiver>,
    a: &CmPoint,
    b: &CmPoint,
    max_degree: usize,
) -> Result<Option<Necklace>> {
    check_one_loop(q)?;
    for d in 0..=max_degree {
        for p in necklace_basis(q, d) {
            let f = Necklace::from_terms(q, [(p, Rational::one())]);
            if coadjoint_eval(&f, a)? != coadjoint_eval(&f, b)? {
                return Ok(Some(f));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;
    use crate::necklace::SymplecticData;
    use crate::path::Path;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&k| int(k)).collect()
    }

    #[test]
    fn small_points() {
        let one = cm_point(&ints(&[0]), &ints(&[0])).unwrap();
        assert_eq!(one.shifted_commutator(), Matrix::identity(1));
        let two = cm_point(&ints(&[0, 1]), &ints(&[0, 0])).unwrap();
        let s = two.shifted_commutator();
        assert_eq!(s, Matrix::from_rows(vec![ints(&[1, 1]), ints(&[1, 1])]).unwrap());
        assert_eq!(s.rank(), 1);
        assert_eq!(s.trace(), int(2));
    }

    #[test]
    fn repeated_positions_are_rejected() {
        assert!(matches!(
            cm_point(&ints(&[1, 1]), &ints(&[0, 0])),
            Err(Error::RepeatedPosition(_))
        ));
    }

    #[test]
    fn membership_examples() {
        assert!(cm_membership(&Matrix::zeros(1, 1), &Matrix::zeros(1, 1)).unwrap());
        assert!(!cm_membership(&Matrix::zeros(2, 2), &Matrix::zeros(2, 2)).unwrap());
        assert!(cm_membership(&Matrix::zeros(2, 2), &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn evaluation_and_conjugation() {
        let omega = SymplecticData::one_loop();
        let q = omega.quiver();
        let pt = cm_point(&ints(&[0, 1]), &ints(&[2, -1])).unwrap();
        let xy = Necklace::cycle(q, Path::from_arrows(q, vec![ArrowId(0), ArrowId(1)]).unwrap());
        // tr(XY) = Σ x_i p_i
        assert_eq!(coadjoint_eval(&xy, &pt).unwrap(), int(-1));
        let g = Matrix::from_rows(vec![ints(&[2, 1]), ints(&[1, 1])]).unwrap();
        let moved = pt.conjugate(&g).unwrap();
        assert_eq!(coadjoint_eval(&xy, &moved).unwrap(), int(-1));
        assert!(cm_membership(&moved.x, &moved.y).unwrap());
    }

    #[test]
    fn flow_of_trace_xy() {
        // d/dt tr(X(Y + 2tX)) = 2 tr X²
        let omega = SymplecticData::one_loop();
        let q = omega.quiver();
        let pt = cm_point(&ints(&[1, 3]), &ints(&[0, 5])).unwrap();
        let xy = Necklace::cycle(q, Path::from_arrows(q, vec![ArrowId(0), ArrowId(1)]).unwrap());
        assert_eq!(flow_derivative(&xy, &pt).unwrap(), int(20));
    }

    #[test]
    fn points_are_separated() {
        let omega = SymplecticData::one_loop();
        let a = cm_point(&ints(&[0, 1]), &ints(&[0, 0])).unwrap();
        let b = cm_point(&ints(&[0, 2]), &ints(&[0, 0])).unwrap();
        let f = separating_necklace(omega.quiver(), &a, &b, 4).unwrap().unwrap();
        assert_eq!(f.degree(), Some(1));
    }
}
