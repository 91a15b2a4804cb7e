//! Helpers for sparse term maps with exact coefficients.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::Rational;

/// Adds `coeff` to the entry for `key`, removing the entry if it cancels.
pub(crate) fn accumulate<K: Ord>(terms: &mut BTreeMap<K, Rational>, key: K, coeff: Rational) {
    if coeff.is_zero() {
        return;
    }
    match terms.entry(key) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            *slot.get_mut() += coeff;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

/// Index of the lexicographically least rotation among `candidates`.
pub(crate) fn least_rotation<T: Ord>(word: &[T], candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in candidates {
        match best {
            None => best = Some(r),
            Some(b) => {
                let rot = word[r..].iter().chain(&word[..r]);
                let cur = word[b..].iter().chain(&word[..b]);
                if rot.lt(cur) {
                    best = Some(r);
                }
            }
        }
    }
    best
}

pub(crate) fn rotated<T: Clone>(word: &[T], r: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(word.len());
    out.extend_from_slice(&word[r..]);
    out.extend_from_slice(&word[..r]);
    out
}

pub(crate) fn fmt_coefficient(
    f: &mut std::fmt::Formatter<'_>,
    first: bool,
    coeff: &Rational,
    has_body: bool,
) -> std::fmt::Result {
    use num_traits::{One, Signed};
    let negative = coeff.is_negative();
    if first {
        if negative {
            write!(f, "-")?;
        }
    } else if negative {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let abs = coeff.abs();
    if !has_body {
        write!(f, "{abs}")
    } else if !abs.is_one() {
        write!(f, "{abs} ")
    } else {
        Ok(())
    }
}
