//! Formal Darboux normalization of symplectic 2-forms on a free algebra.
//!
//! Everything is graded by Euler weight: a path has its length, a form word
//! its number of letters. A symplectic form `ω` on a one-vertex quiver splits
//! as `ω₀ + ω'` with `ω₀` its constant part (weight 2). Moser's trick along
//! `ω_t = ω₀ + t·ω'` produces `Φ` with `Φ*ω = ω₀`, and everything is exact
//! once truncated at a weight `N`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{same_quiver, PathAlgebraElement};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::forms::{Form, FormWord, OmegaElement};
use crate::matrix::Matrix;
use crate::necklace::{project_to_necklace, Necklace};
use crate::path::Path;
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::terms::accumulate;
use crate::Rational;

/// A polynomial in a formal parameter `t` with coefficients of type `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries<T> {
    coefficients: BTreeMap<usize, T>,
}

impl<T> Default for TSeries<T> {
    fn default() -> Self {
        Self {
            coefficients: BTreeMap::new(),
        }
    }
}

impl<T> TSeries<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, power: usize) -> Option<&T> {
        self.coefficients.get(&power)
    }

    pub fn insert(&mut self, power: usize, value: T) {
        self.coefficients.insert(power, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.coefficients.iter().map(|(k, v)| (*k, v))
    }

    pub fn max_power(&self) -> Option<usize> {
        self.coefficients.keys().next_back().copied()
    }
}

/// An automorphism of the free algebra with identity linear part, known
/// through paths of length `truncation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalAutomorphism {
    quiver: Arc<Quiver>,
    images: BTreeMap<ArrowId, PathAlgebraElement>,
    truncation: usize,
}

impl FormalAutomorphism {
    pub fn identity(quiver: &Arc<Quiver>, truncation: usize) -> Self {
        let images = quiver
            .arrow_ids()
            .map(|a| (a, PathAlgebraElement::arrow(quiver, a)))
            .collect();
        Self {
            quiver: quiver.clone(),
            images,
            truncation,
        }
    }

    /// Arrows without an image are fixed. Every image must be `a` plus
    /// paths of length ≥ 2 from `tail(a)` to `head(a)`.
    pub fn new(
        quiver: &Arc<Quiver>,
        images: impl IntoIterator<Item = (ArrowId, PathAlgebraElement)>,
        truncation: usize,
    ) -> Result<Self> {
        let mut out = Self::identity(quiver, truncation);
        for (a, img) in images {
            if a.index() >= quiver.arrow_count() {
                return Err(Error::UnknownArrow(format!("#{}", a.0)));
            }
            if !same_quiver(img.quiver(), quiver) {
                return Err(Error::QuiverMismatch);
            }
            let arrow = Path::arrow(quiver, a);
            let linear_ok = img.homogeneous_part(1) == PathAlgebraElement::from_path(quiver, arrow)
                && img.homogeneous_part(0).is_zero()
                && img
                    .terms()
                    .keys()
                    .all(|p| p.head() == quiver.head(a) && p.tail() == quiver.tail(a));
            if !linear_ok {
                return Err(Error::LinearPart(quiver.arrow_name(a).to_owned()));
            }
            out.images.insert(a, img.truncate(truncation));
        }
        Ok(out)
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn image(&self, a: ArrowId) -> &PathAlgebraElement {
        &self.images[&a]
    }

    pub fn images(&self) -> &BTreeMap<ArrowId, PathAlgebraElement> {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .all(|(&a, img)| img.len() == 1 && img.homogeneous_part(1) == PathAlgebraElement::arrow(&self.quiver, a))
    }

    /// `Φ*f`: substitute `Φ(a)` for every arrow, keeping paths of length ≤ `max_len`.
    pub fn apply(&self, f: &PathAlgebraElement, max_len: usize) -> PathAlgebraElement {
        assert!(same_quiver(f.quiver(), &self.quiver), "operands over different quivers");
        let q = &self.quiver;
        let mut out = BTreeMap::new();
        for (p, c) in f.terms() {
            if p.len() > max_len {
                continue;
            }
            let mut acc = PathAlgebraElement::from_path(q, Path::idempotent(p.head()));
            for a in p.arrows() {
                acc = acc.mul_truncated(&self.images[a], max_len).expect("same quiver");
            }
            for (r, d) in acc.into_terms() {
                accumulate(&mut out, r, c * d);
            }
        }
        PathAlgebraElement::from_map(q, out)
    }

    /// `(Φ∘Ψ)(a) = Ψ*(Φ(a))`, so that `(Φ∘Ψ)* = Ψ*∘Φ*`.
    pub fn compose(&self, other: &FormalAutomorphism) -> Result<FormalAutomorphism> {
        if !same_quiver(&self.quiver, &other.quiver) {
            return Err(Error::QuiverMismatch);
        }
        let n = self.truncation.min(other.truncation);
        let images = self.images.iter().map(|(&a, img)| (a, other.apply(img, n)));
        FormalAutomorphism::new(&self.quiver, images, n)
    }

    /// The compositional inverse, checked on both sides.
    pub fn inverse(&self) -> Result<FormalAutomorphism> {
        let n = self.truncation;
        let q = &self.quiver;
        let higher: BTreeMap<ArrowId, PathAlgebraElement> = self
            .images
            .iter()
            .map(|(&a, img)| (a, img.filter(|p| p.len() >= 2)))
            .collect();
        let mut inv = FormalAutomorphism::identity(q, n);
        // each pass fixes one more length
        for _ in 0..n {
            let images: Vec<_> = higher
                .iter()
                .map(|(&a, h)| (a, &PathAlgebraElement::arrow(q, a) - &inv.apply(h, n)))
                .collect();
            inv = FormalAutomorphism::new(q, images, n)?;
        }
        let identity = FormalAutomorphism::identity(q, n);
        if self.compose(&inv)? != identity || inv.compose(self)? != identity {
            return Err(Error::Input("truncated automorphism failed to invert".into()));
        }
        Ok(inv)
    }

    /// `Φ*` on forms, keeping words of weight ≤ `max_weight`.
    pub fn pullback(&self, form: &Form, max_weight: usize) -> Result<Form> {
        if !same_quiver(form.quiver(), &self.quiver) {
            return Err(Error::QuiverMismatch);
        }
        let q = &self.quiver;
        let even: BTreeMap<ArrowId, OmegaElement> = self
            .images
            .iter()
            .map(|(&a, img)| (a, OmegaElement::from_element(&img.truncate(max_weight))))
            .collect();
        let odd: BTreeMap<ArrowId, OmegaElement> = even.iter().map(|(&a, e)| (a, e.d())).collect();
        let mut words: Vec<(FormWord, Rational)> = Vec::new();
        for (w, c) in form.terms() {
            if w.weight() > max_weight {
                continue;
            }
            let unit = PathAlgebraElement::from_path(q, Path::idempotent(w.head()));
            let mut acc = OmegaElement::from_element(&unit);
            for l in w.letters() {
                let factor = if l.exterior { &odd[&l.arrow] } else { &even[&l.arrow] };
                acc = acc.mul_truncated(factor, Some(max_weight))?;
            }
            words.extend(acc.terms().iter().map(|(u, d)| (u.clone(), c * d)));
        }
        Form::from_words(q, form.degree(), words)
    }

    pub fn pullback_necklace(&self, f: &Necklace, max_weight: usize) -> Necklace {
        project_to_necklace(&self.apply(&f.to_element(), max_weight))
    }
}

impl fmt::Display for FormalAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, img)) in self.images.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} -> {}", self.quiver.arrow_name(*a), img)?;
        }
        Ok(())
    }
}

/// Solves `i_θ ω₀ = α` for a constant nondegenerate 2-form `ω₀`.
struct ConstantSolver {
    quiver: Arc<Quiver>,
    arrows: Vec<ArrowId>,
    inverse: Matrix,
}

impl ConstantSolver {
    fn new(omega0: &Form) -> Result<Self> {
        let q = omega0.quiver().clone();
        let arrows: Vec<ArrowId> = q.arrow_ids().collect();
        let m = arrows.len();
        let unit = Path::idempotent(VertexId(0));
        let mut mat = Matrix::zeros(m, m);
        for (j, &b) in arrows.iter().enumerate() {
            let theta = Derivation::new(&q, [(b, PathAlgebraElement::one(&q))])?;
            let coords = omega0.contract(&theta)?.coordinates()?;
            for (i, e) in arrows.iter().enumerate() {
                if let Some(f) = coords.get(e) {
                    mat[(i, j)] = f.coefficient(&unit);
                }
            }
        }
        let inverse = mat.inverse().ok_or(Error::DegenerateForm)?;
        Ok(Self {
            quiver: q,
            arrows,
            inverse,
        })
    }

    fn solve(&self, alpha: &Form) -> Result<Derivation> {
        let coords = alpha.coordinates()?;
        let q = &self.quiver;
        let images = self.arrows.iter().enumerate().map(|(b, &arrow)| {
            let mut img = PathAlgebraElement::zero(q);
            for (e, arrow_e) in self.arrows.iter().enumerate() {
                let k = &self.inverse[(b, e)];
                if let (false, Some(f)) = (k.is_zero(), coords.get(arrow_e)) {
                    img = &img + &f.scale(k);
                }
            }
            (arrow, img)
        });
        Derivation::new(q, images)
    }
}

/// Substitutes the `t`-series `Φ_t(b) = Σ_i t^i phi[i](b)` into `f`, returning
/// the coefficients of `t^0..=t^max_t`.
fn substitute_series(
    f: &PathAlgebraElement,
    phi: &[BTreeMap<ArrowId, PathAlgebraElement>],
    max_t: usize,
    max_len: usize,
) -> Vec<PathAlgebraElement> {
    let q = f.quiver();
    let mut out = vec![PathAlgebraElement::zero(q); max_t + 1];
    for (p, c) in f.terms() {
        let unit = PathAlgebraElement::from_path(q, Path::idempotent(p.head()));
        let mut acc: Vec<PathAlgebraElement> = vec![unit];
        for a in p.arrows() {
            let mut next = vec![PathAlgebraElement::zero(q); max_t + 1];
            for (i, left) in acc.iter().enumerate() {
                if left.is_zero() {
                    continue;
                }
                for (j, layer) in phi.iter().enumerate().take(max_t + 1 - i) {
                    if let Some(img) = layer.get(a) {
                        let prod = left.mul_truncated(img, max_len).expect("same quiver");
                        next[i + j] = &next[i + j] + &prod;
                    }
                }
            }
            acc = next;
        }
        for (k, part) in acc.iter().enumerate() {
            out[k] = &out[k] + &part.scale(c);
        }
    }
    out
}

/// `Φ*ω − ω₀` through weight `n`; zero exactly when `Φ` normalizes `ω`.
pub fn darboux_residual(phi: &FormalAutomorphism, omega: &Form, n: usize) -> Result<Form> {
    let pulled = phi.pullback(omega, n)?;
    pulled.try_sub(&omega.weight_component(2))
}

/// A formal automorphism `Φ` with `Φ*ω = ω₀` through Euler weight `n`.
pub fn darboux_normalize(omega: &Form, n: usize) -> Result<FormalAutomorphism> {
    let q = omega.quiver().clone();
    if q.vertex_count() != 1 {
        return Err(Error::NotOneVertex);
    }
    if omega.degree() != 2 {
        return Err(Error::FormDegree {
            expected: 2,
            found: omega.degree(),
        });
    }
    if n < 2 {
        return Err(Error::Input("truncation weight must be at least 2".into()));
    }
    let w = omega.truncate(n);
    let residual = w.d().truncate(n);
    if !residual.is_zero() {
        return Err(Error::FormNotClosed {
            residual: residual.to_string(),
        });
    }
    let omega0 = w.weight_component(2);
    let solver = ConstantSolver::new(&omega0)?;
    let omega1 = w.try_sub(&omega0)?;
    if omega1.is_zero() {
        return Ok(FormalAutomorphism::identity(&q, n));
    }

    // θ_t = Σ t^k θ_k with i_{θ_0} ω₀ = α and i_{θ_k} ω₀ = −i_{θ_{k−1}} ω'.
    let alpha = -&omega1.euler_homotopy_unchecked();
    let mut theta: TSeries<Derivation> = TSeries::new();
    let mut current = solver.solve(&alpha)?.truncate(n);
    for k in 0..n {
        if current.is_zero() {
            break;
        }
        let next_rhs = -&omega1.contract(&current)?.truncate(n);
        theta.insert(k, current);
        current = solver.solve(&next_rhs)?.truncate(n);
    }

    // dΦ_t(a)/dt = θ_t(a) with Φ_t substituted, Φ_0 = id.
    let mut phi: Vec<BTreeMap<ArrowId, PathAlgebraElement>> =
        vec![q.arrow_ids().map(|a| (a, PathAlgebraElement::arrow(&q, a))).collect()];
    for k in 0..n {
        let mut layer = BTreeMap::new();
        for a in q.arrow_ids() {
            let mut acc = PathAlgebraElement::zero(&q);
            for (j, th) in theta.iter().filter(|(j, _)| *j <= k) {
                let img = th.image(a);
                if img.is_zero() {
                    continue;
                }
                let sub = substitute_series(&img, &phi, k - j, n);
                acc = &acc + &sub[k - j];
            }
            let scaled = acc.scale(&Rational::new(1.into(), ((k + 1) as i64).into()));
            if !scaled.is_zero() {
                layer.insert(a, scaled);
            }
        }
        phi.push(layer);
    }
    let images = q.arrow_ids().map(|a| {
        let total = phi
            .iter()
            .filter_map(|layer| layer.get(&a))
            .fold(PathAlgebraElement::zero(&q), |acc, x| &acc + x);
        (a, total)
    });
    let result = FormalAutomorphism::new(&q, images, n)?;
    let residual = darboux_residual(&result, &w, n)?;
    if !residual.is_zero() {
        return Err(Error::Certificate {
            residual: residual.to_string(),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;
    use crate::necklace::SymplecticData;

    fn setup() -> (Arc<Quiver>, PathAlgebraElement, PathAlgebraElement, Form) {
        let q = SymplecticData::one_loop().quiver().clone();
        let x = PathAlgebraElement::arrow(&q, ArrowId(0));
        let y = PathAlgebraElement::arrow(&q, ArrowId(1));
        let e = Path::idempotent(VertexId(0));
        let dxdy = Form::two_form_term(&q, &e, ArrowId(0), &e, ArrowId(1));
        (q, x, y, dxdy)
    }

    fn path(f: &PathAlgebraElement) -> Path {
        f.terms().keys().next().unwrap().clone()
    }

    #[test]
    fn identity_pullback_is_trivial() {
        let (q, _, _, dxdy) = setup();
        let id = FormalAutomorphism::identity(&q, 4);
        assert_eq!(id.pullback(&dxdy, 4).unwrap(), dxdy);
    }

    #[test]
    fn pullback_by_hand() {
        // Φ(x) = x + x²: d(x + x²)·dy = dx dy + dx x dy + x dx dy
        let (q, x, _, dxdy) = setup();
        let phi = FormalAutomorphism::new(&q, [(ArrowId(0), &x + &x.pow(2))], 4).unwrap();
        let e = Path::idempotent(VertexId(0));
        let px = path(&x);
        let expected = &(&dxdy + &Form::two_form_term(&q, &e, ArrowId(0), &px, ArrowId(1)))
            + &Form::two_form_term(&q, &px, ArrowId(0), &e, ArrowId(1));
        assert_eq!(phi.pullback(&dxdy, 4).unwrap(), expected);
        assert_eq!(phi.pullback(&dxdy, 2).unwrap(), dxdy);
    }

    #[test]
    fn linear_part_is_enforced() {
        let (q, x, y, _) = setup();
        assert!(FormalAutomorphism::new(&q, [(ArrowId(0), y.clone())], 3).is_err());
        assert!(FormalAutomorphism::new(&q, [(ArrowId(0), x.scale(&int(2)))], 3).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let (q, x, y, _) = setup();
        let phi = FormalAutomorphism::new(&q, [(ArrowId(0), &x + &(&x * &y)), (ArrowId(1), &y - &x.pow(2))], 5).unwrap();
        let inv = phi.inverse().unwrap();
        assert!(phi.compose(&inv).unwrap().is_identity());
    }

    #[test]
    fn constant_form_gives_identity() {
        let (_, _, _, dxdy) = setup();
        assert!(darboux_normalize(&dxdy, 4).unwrap().is_identity());
    }

    #[test]
    fn perturbed_form_is_normalized() {
        let (q, x, y, dxdy) = setup();
        // β = x y x dy, ω = dx dy + dβ
        let beta = Form::one_form_term(&q, &path(&(&(&x * &y) * &x)), ArrowId(1));
        let omega = &dxdy + &beta.d();
        let phi = darboux_normalize(&omega, 5).unwrap();
        assert!(!phi.is_identity());
        assert_eq!(phi.pullback(&omega, 5).unwrap(), dxdy);
        assert!(darboux_residual(&phi, &omega, 5).unwrap().is_zero());
        phi.inverse().unwrap();
    }

    #[test]
    fn degenerate_and_open_forms_are_rejected() {
        let (q, x, _, dxdy) = setup();
        let e = Path::idempotent(VertexId(0));
        let cubic = Form::two_form_term(&q, &path(&x), ArrowId(0), &e, ArrowId(1));
        assert!(matches!(darboux_normalize(&Form::zero(&q, 2), 4), Err(Error::DegenerateForm)));
        let open = &dxdy + &cubic;
        assert!(matches!(darboux_normalize(&open, 4), Err(Error::FormNotClosed { .. })));
    }
}
