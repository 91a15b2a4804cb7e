//! `B`-linear derivations of the path algebra, given by their arrow images.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::One;

use crate::algebra::{same_quiver, PathAlgebraElement};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::quiver::{ArrowId, Quiver};
use crate::terms::accumulate;
use crate::Rational;

/// A derivation `θ` with `θ(1_i) = 0`, determined by `θ(a)` for each arrow.
///
/// Each image `θ(a)` lies in `1_head(a) · A · 1_tail(a)`, so replacing a letter
/// of a path by its image keeps the path composable.
#[derive(Clone, Debug)]
pub struct Derivation {
    quiver: Arc<Quiver>,
    images: BTreeMap<ArrowId, PathAlgebraElement>,
}

impl PartialEq for Derivation {
    fn eq(&self, other: &Self) -> bool {
        same_quiver(&self.quiver, &other.quiver) && self.images == other.images
    }
}

impl Eq for Derivation {}

impl Derivation {
    pub fn new(
        quiver: &Arc<Quiver>,
        images: impl IntoIterator<Item = (ArrowId, PathAlgebraElement)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<ArrowId, PathAlgebraElement> = BTreeMap::new();
        for (a, img) in images {
            if a.index() >= quiver.arrow_count() {
                return Err(Error::UnknownArrow(format!("#{}", a.0)));
            }
            if !same_quiver(img.quiver(), quiver) {
                return Err(Error::QuiverMismatch);
            }
            let (head, tail) = (quiver.head(a), quiver.tail(a));
            if img.terms().keys().any(|p| p.head() != head || p.tail() != tail) {
                return Err(Error::DerivationEndpoints {
                    arrow: quiver.arrow_name(a).to_owned(),
                    tail: quiver.vertex_name(tail).to_owned(),
                    head: quiver.vertex_name(head).to_owned(),
                });
            }
            let slot = map.entry(a).or_insert_with(|| PathAlgebraElement::zero(quiver));
            *slot = &*slot + &img;
        }
        map.retain(|_, img| !img.is_zero());
        Ok(Self {
            quiver: quiver.clone(),
            images: map,
        })
    }

    pub fn zero(quiver: &Arc<Quiver>) -> Self {
        Self {
            quiver: quiver.clone(),
            images: BTreeMap::new(),
        }
    }

    /// The Euler derivation `eu(a) = a`, which multiplies a path by its length.
    pub fn euler(quiver: &Arc<Quiver>) -> Self {
        Self {
            quiver: quiver.clone(),
            images: quiver
                .arrow_ids()
                .map(|a| (a, PathAlgebraElement::arrow(quiver, a)))
                .collect(),
        }
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn image(&self, a: ArrowId) -> PathAlgebraElement {
        self.images
            .get(&a)
            .cloned()
            .unwrap_or_else(|| PathAlgebraElement::zero(&self.quiver))
    }

    pub(crate) fn image_ref(&self, a: ArrowId) -> Option<&PathAlgebraElement> {
        self.images.get(&a)
    }

    pub fn images(&self) -> &BTreeMap<ArrowId, PathAlgebraElement> {
        &self.images
    }

    pub fn is_zero(&self) -> bool {
        self.images.is_empty()
    }

    /// Leibniz rule on a single path, accumulated into `out` with factor `coeff`.
    pub(crate) fn apply_path_into(&self, path: &Path, coeff: &Rational, out: &mut BTreeMap<Path, Rational>) {
        let arrows = path.arrows();
        for (k, a) in arrows.iter().enumerate() {
            let Some(img) = self.images.get(a) else { continue };
            for (p, c) in img.terms() {
                let mut word = Vec::with_capacity(arrows.len() + p.len());
                word.extend_from_slice(&arrows[..k]);
                word.extend_from_slice(p.arrows());
                word.extend_from_slice(&arrows[k + 1..]);
                accumulate(
                    out,
                    Path::from_parts(path.head(), path.tail(), word),
                    coeff * c,
                );
            }
        }
    }

    pub fn apply(&self, f: &PathAlgebraElement) -> PathAlgebraElement {
        assert!(same_quiver(f.quiver(), &self.quiver), "operands over different quivers");
        let mut out = BTreeMap::new();
        for (p, c) in f.terms() {
            self.apply_path_into(p, c, &mut out);
        }
        PathAlgebraElement::from_map(&self.quiver, out)
    }

    /// `[θ, γ] = θ∘γ − γ∘θ`.
    pub fn commutator(&self, other: &Derivation) -> Derivation {
        assert!(same_quiver(&other.quiver, &self.quiver), "operands over different quivers");
        let images = self.quiver.arrow_ids().map(|a| {
            let img = &self.apply(&other.image(a)) - &other.apply(&self.image(a));
            (a, img)
        });
        Derivation::new(&self.quiver, images).expect("commutator preserves endpoints")
    }

    pub fn scale(&self, s: &Rational) -> Derivation {
        Derivation::new(
            &self.quiver,
            self.images.iter().map(|(a, img)| (*a, img.scale(s))),
        )
        .expect("scaling preserves endpoints")
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        assert!(same_quiver(&other.quiver, &self.quiver), "operands over different quivers");
        Derivation::new(
            &self.quiver,
            self.images
                .iter()
                .chain(other.images.iter())
                .map(|(a, img)| (*a, img.clone())),
        )
        .expect("sum preserves endpoints")
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Drops image terms longer than `max`.
    pub fn truncate(&self, max: usize) -> Derivation {
        Derivation::new(
            &self.quiver,
            self.images.iter().map(|(a, img)| (*a, img.truncate(max))),
        )
        .expect("truncation preserves endpoints")
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theta{{")?;
        for (i, (a, img)) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {}", self.quiver.arrow_name(*a), img)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::DoubledQuiver;

    #[test]
    fn euler_scales_by_length() {
        let dq = DoubledQuiver::one_loop();
        let q = dq.quiver();
        let x = PathAlgebraElement::arrow(q, ArrowId(0));
        let y = PathAlgebraElement::arrow(q, ArrowId(1));
        let w = &(&x * &y) * &x;
        let eu = Derivation::euler(q);
        assert_eq!(eu.apply(&w), w.scale(&Rational::from_integer(3.into())));
        assert!(eu.apply(&PathAlgebraElement::one(q)).is_zero());
    }

    #[test]
    fn rejects_images_with_wrong_endpoints() {
        let base = Quiver::new(["1", "2"], [("a".to_owned(), "1".to_owned(), "2".to_owned())]).unwrap();
        let dq = DoubledQuiver::new(base).unwrap();
        let q = dq.quiver();
        let a = q.find_arrow("a").unwrap();
        let astar = q.find_arrow("a*").unwrap();
        let bad = Derivation::new(q, [(a, PathAlgebraElement::arrow(q, astar))]);
        assert!(matches!(bad, Err(Error::DerivationEndpoints { .. })));
        let loop_at_2 = &PathAlgebraElement::arrow(q, a) * &PathAlgebraElement::arrow(q, astar);
        let ok = Derivation::new(q, [(a, &loop_at_2 * &PathAlgebraElement::arrow(q, a))]);
        assert!(ok.is_ok());
    }

    #[test]
    fn commutator_is_antisymmetric() {
        let dq = DoubledQuiver::one_loop();
        let q = dq.quiver();
        let x = PathAlgebraElement::arrow(q, ArrowId(0));
        let y = PathAlgebraElement::arrow(q, ArrowId(1));
        let t = Derivation::new(q, [(ArrowId(0), &y * &y)]).unwrap();
        let g = Derivation::new(q, [(ArrowId(1), &x * &y)]).unwrap();
        assert_eq!(t.commutator(&g), g.commutator(&t).scale(&-Rational::one()));
        assert!(t.commutator(&t).is_zero());
    }
}
