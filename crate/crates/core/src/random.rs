//! Seeded generators for random test data.
//!
//! Every trial draws from its own ChaCha8 stream: the generator is seeded
//! with the run's 64-bit seed and switched to stream `(check << 32) | trial`,
//! so a trial can be replayed alone and trials can run in any order.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::PathAlgebraElement;
use crate::derivation::Derivation;
use crate::forms::{Form, FormWord, Letter};
use crate::matrix::Matrix;
use crate::necklace::Necklace;
use crate::path::Path;
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::terms::accumulate;
use crate::Rational;

/// The generator for one trial: ChaCha8 keyed by `seed`, on stream `check << 32 | trial`.
pub fn trial_rng(seed: u64, check: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(check) << 32) | u64::from(trial));
    rng
}

/// A nonzero integer in `-3..=3`.
pub fn coefficient<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let k = *[-3i64, -2, -1, 1, 2, 3].choose(rng).expect("nonempty");
    Rational::from_integer(k.into())
}

pub fn integer_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| Rational::from_integer(rng.random_range(-bound..=bound).into()))
}

/// A random invertible integer matrix.
pub fn invertible_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: i64) -> Matrix {
    loop {
        let m = integer_matrix(rng, n, n, bound);
        if m.rank() == n {
            return m;
        }
    }
}

/// A path of length `len` from `head` to `tail`, if a random walk finds one.
pub fn path_between<R: Rng + ?Sized>(
    rng: &mut R,
    q: &Quiver,
    head: VertexId,
    tail: VertexId,
    len: usize,
) -> Option<Path> {
    if len == 0 {
        return (head == tail).then(|| Path::idempotent(head));
    }
    for _ in 0..64 {
        let mut word: Vec<ArrowId> = Vec::with_capacity(len);
        let mut at = head;
        for _ in 0..len {
            let choices: Vec<ArrowId> = q.arrow_ids().filter(|&a| q.head(a) == at).collect();
            let Some(&a) = choices.choose(rng) else { break };
            word.push(a);
            at = q.tail(a);
        }
        if word.len() == len && at == tail {
            return Some(Path::from_parts(head, tail, word));
        }
    }
    None
}

fn random_vertex<R: Rng + ?Sized>(rng: &mut R, q: &Quiver) -> VertexId {
    VertexId(rng.random_range(0..q.vertex_count() as u32))
}

/// A closed path of length exactly `len`, if the walk finds one.
pub fn closed_path<R: Rng + ?Sized>(rng: &mut R, q: &Quiver, len: usize) -> Option<Path> {
    for _ in 0..8 {
        let v = random_vertex(rng, q);
        if let Some(p) = path_between(rng, q, v, v, len) {
            return Some(p);
        }
    }
    None
}

/// Up to `max_terms` cycles of length `min_degree..=max_degree`.
pub fn necklace<R: Rng + ?Sized>(
    rng: &mut R,
    q: &Arc<Quiver>,
    min_degree: usize,
    max_degree: usize,
    max_terms: usize,
) -> Necklace {
    let count = rng.random_range(1..=max_terms.max(1));
    let mut terms = Vec::new();
    for _ in 0..count {
        let len = rng.random_range(min_degree..=max_degree);
        if let Some(p) = closed_path(rng, q, len) {
            terms.push((p, coefficient(rng)));
        }
    }
    Necklace::from_terms(q, terms)
}

/// A nonzero necklace, retrying until one appears.
pub fn nonzero_necklace<R: Rng + ?Sized>(
    rng: &mut R,
    q: &Arc<Quiver>,
    min_degree: usize,
    max_degree: usize,
    max_terms: usize,
) -> Necklace {
    loop {
        let f = necklace(rng, q, min_degree, max_degree, max_terms);
        if !f.is_zero() {
            return f;
        }
    }
}

/// A combination of arbitrary (possibly open) paths.
pub fn element<R: Rng + ?Sized>(rng: &mut R, q: &Arc<Quiver>, max_degree: usize, max_terms: usize) -> PathAlgebraElement {
    let count = rng.random_range(1..=max_terms.max(1));
    let mut terms = Vec::new();
    for _ in 0..count {
        let len = rng.random_range(0..=max_degree);
        let (h, t) = (random_vertex(rng, q), random_vertex(rng, q));
        if let Some(p) = path_between(rng, q, h, t, len) {
            terms.push((p, coefficient(rng)));
        }
    }
    PathAlgebraElement::from_terms(q, terms)
}

/// Images of length `0..=max_degree` with the right endpoints for every arrow.
pub fn derivation<R: Rng + ?Sized>(rng: &mut R, q: &Arc<Quiver>, max_degree: usize, max_terms: usize) -> Derivation {
    let images = q.arrow_ids().map(|a| {
        let count = rng.random_range(0..=max_terms);
        let mut terms = Vec::new();
        for _ in 0..count {
            let len = rng.random_range(0..=max_degree);
            if let Some(p) = path_between(rng, q, q.head(a), q.tail(a), len) {
                terms.push((p, coefficient(rng)));
            }
        }
        (a, PathAlgebraElement::from_terms(q, terms))
    });
    Derivation::new(q, images).expect("endpoints respected")
}

/// A random `degree`-form whose words have `min_weight..=max_weight` letters.
pub fn form<R: Rng + ?Sized>(
    rng: &mut R,
    q: &Arc<Quiver>,
    degree: usize,
    min_weight: usize,
    max_weight: usize,
    max_terms: usize,
) -> Form {
    let count = rng.random_range(1..=max_terms.max(1));
    let mut words = Vec::new();
    for _ in 0..count {
        let len = rng.random_range(min_weight.max(degree)..=max_weight.max(degree));
        let Some(p) = closed_path(rng, q, len) else { continue };
        let mut letters: Vec<Letter> = p.arrows().iter().map(|&a| Letter::even(a)).collect();
        let positions = rand::seq::index::sample(rng, len, degree);
        for k in positions {
            letters[k].exterior = true;
        }
        words.push((FormWord::new(q, letters, p.head()), coefficient(rng)));
    }
    Form::from_words(q, degree, words).expect("degree matches")
}

/// A 1-form `Σ p·db` with coefficient paths of length `min_len..=max_len`
/// on a one-vertex quiver.
pub fn one_form<R: Rng + ?Sized>(
    rng: &mut R,
    q: &Arc<Quiver>,
    min_len: usize,
    max_len: usize,
    max_terms: usize,
) -> Form {
    let mut terms: BTreeMap<FormWord, Rational> = BTreeMap::new();
    let count = rng.random_range(1..=max_terms.max(1));
    for _ in 0..count {
        let b = ArrowId(rng.random_range(0..q.arrow_count() as u32));
        let len = rng.random_range(min_len..=max_len);
        let Some(p) = path_between(rng, q, q.tail(b), q.head(b), len) else { continue };
        let mut letters: Vec<Letter> = p.arrows().iter().map(|&a| Letter::even(a)).collect();
        letters.push(Letter::odd(b));
        accumulate(&mut terms, FormWord::new(q, letters, p.head()), coefficient(rng));
    }
    Form::from_words(q, 1, terms).expect("degree one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::necklace::SymplecticData;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let q = SymplecticData::one_loop().quiver().clone();
        let a = necklace(&mut trial_rng(7, 1, 3), &q, 1, 5, 3);
        let b = necklace(&mut trial_rng(7, 1, 3), &q, 1, 5, 3);
        assert_eq!(a, b);
        let draws: Vec<u64> = (0..4).map(|t| trial_rng(7, 1, t).random()).collect();
        let mut sorted = draws.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), draws.len());
    }

    #[test]
    fn generated_forms_have_requested_degree() {
        let q = SymplecticData::one_loop().quiver().clone();
        let mut rng = trial_rng(1, 0, 0);
        for degree in 0..3 {
            let f = form(&mut rng, &q, degree, 1, 4, 3);
            assert_eq!(f.degree(), degree);
        }
        let d = derivation(&mut rng, &q, 3, 2);
        assert!(d.images().keys().all(|a| a.index() < 2));
    }
}
