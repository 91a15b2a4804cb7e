//! The noncommutative de Rham complex of a path algebra.
//!
//! `Ω_B A` is the free graded algebra on letters `a` (even) and `da` (odd),
//! and `DR_B A = Ω_B A / [Ω, Ω]` is spanned by closed super-words read
//! cyclically, where rotating a block `P` past `S` costs `(−1)^{|P||S|}`.
//! A class is stored as its least rotation ending in an odd letter (or the
//! least rotation overall for 0-forms), with every sign folded into the
//! coefficient. Words equal to minus themselves, such as `da·da`, are zero.
//!
//! The Euler weight of a word is its number of letters, counting `a` and `da`
//! alike.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::{same_quiver, PathAlgebraElement};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::necklace::{Necklace, SymplecticData};
use crate::path::Path;
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::terms::{accumulate, fmt_coefficient, rotated};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub arrow: ArrowId,
    /// `true` for `da`, `false` for `a`.
    pub exterior: bool,
}

impl Letter {
    pub fn even(arrow: ArrowId) -> Self {
        Self { arrow, exterior: false }
    }

    pub fn odd(arrow: ArrowId) -> Self {
        Self { arrow, exterior: true }
    }
}

/// `(u, a, v, b, c)` standing for `c · u da v db`.
pub type TwoFormTerm = (Path, ArrowId, Path, ArrowId, Rational);

/// A composable word in the letters `a`, `da`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormWord {
    head: VertexId,
    tail: VertexId,
    letters: Vec<Letter>,
}

impl Ord for FormWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.head.cmp(&other.head))
            .then_with(|| self.tail.cmp(&other.tail))
    }
}

impl PartialOrd for FormWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FormWord {
    pub(crate) fn new(q: &Quiver, letters: Vec<Letter>, empty_vertex: VertexId) -> Self {
        match (letters.first(), letters.last()) {
            (Some(f), Some(l)) => Self {
                head: q.head(f.arrow),
                tail: q.tail(l.arrow),
                letters,
            },
            _ => Self {
                head: empty_vertex,
                tail: empty_vertex,
                letters,
            },
        }
    }

    pub fn from_path(p: &Path) -> Self {
        Self {
            head: p.head(),
            tail: p.tail(),
            letters: p.arrows().iter().map(|&a| Letter::even(a)).collect(),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn head(&self) -> VertexId {
        self.head
    }

    pub fn tail(&self) -> VertexId {
        self.tail
    }

    /// Number of `da` letters.
    pub fn form_degree(&self) -> usize {
        self.letters.iter().filter(|l| l.exterior).count()
    }

    /// Euler weight: number of letters.
    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    /// `self · other` in `Ω`, if composable.
    pub fn concat(&self, other: &FormWord) -> Option<FormWord> {
        if self.tail != other.head {
            return None;
        }
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Some(FormWord {
            head: self.head,
            tail: other.tail,
            letters,
        })
    }

    pub fn display<'a>(&'a self, q: &'a Quiver) -> impl fmt::Display + 'a {
        WordDisplay { word: self, quiver: q }
    }
}

struct WordDisplay<'a> {
    word: &'a FormWord,
    quiver: &'a Quiver,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.letters.is_empty() {
            return write!(f, "e({})", self.quiver.vertex_name(self.word.head));
        }
        for (i, l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = self.quiver.arrow_name(l.arrow);
            if l.exterior {
                write!(f, "d({name})")?;
            } else {
                write!(f, "{name}")?;
            }
        }
        Ok(())
    }
}

/// The class of a closed word: its canonical rotation and whether the
/// coefficient flips sign, or `None` if the class is zero (open word, or a
/// word equal to minus itself).
pub(crate) fn canonical_class(q: &Quiver, word: &FormWord) -> Option<(FormWord, bool)> {
    if word.head != word.tail {
        return None;
    }
    let letters = &word.letters;
    let n = letters.len();
    if n == 0 {
        return Some((word.clone(), false));
    }
    let total = word.form_degree();
    // prefix_odd[r] = number of odd letters in letters[..r]
    let mut prefix_odd = Vec::with_capacity(n + 1);
    prefix_odd.push(0usize);
    for l in letters {
        prefix_odd.push(prefix_odd.last().unwrap() + usize::from(l.exterior));
    }
    let is_candidate = |r: usize| total == 0 || letters[(r + n - 1) % n].exterior;
    let sign_of = |r: usize| {
        let p = prefix_odd[r];
        (p * (total - p)) % 2 == 1
    };
    let cmp_rot = |r: usize, s: usize| {
        letters[r..]
            .iter()
            .chain(&letters[..r])
            .cmp(letters[s..].iter().chain(&letters[..s]))
    };
    let mut best: Option<usize> = None;
    for r in (0..n).filter(|&r| is_candidate(r)) {
        match best {
            Some(b) if cmp_rot(r, b) != Ordering::Less => {}
            _ => best = Some(r),
        }
    }
    let best = best?;
    let negate = sign_of(best);
    for r in (0..n).filter(|&r| is_candidate(r) && r != best) {
        if cmp_rot(r, best) == Ordering::Equal && sign_of(r) != negate {
            return None;
        }
    }
    let canon = if best == 0 { letters.clone() } else { rotated(letters, best) };
    Some((FormWord::new(q, canon, word.head), negate))
}

/// A homogeneous element of `DR^k_B A` in canonical form.
#[derive(Clone, Debug)]
pub struct Form {
    quiver: Arc<Quiver>,
    degree: usize,
    terms: BTreeMap<FormWord, Rational>,
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        same_quiver(&self.quiver, &other.quiver) && self.degree == other.degree && self.terms == other.terms
    }
}

impl Eq for Form {}

impl Form {
    pub fn zero(quiver: &Arc<Quiver>, degree: usize) -> Self {
        Self {
            quiver: quiver.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Sums the classes of arbitrary closed words of form degree `degree`.
    pub fn from_words(
        quiver: &Arc<Quiver>,
        degree: usize,
        words: impl IntoIterator<Item = (FormWord, Rational)>,
    ) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (w, c) in words {
            if w.form_degree() != degree {
                return Err(Error::FormDegree {
                    expected: degree,
                    found: w.form_degree(),
                });
            }
            push_class(quiver, &mut terms, &w, c);
        }
        Ok(Self {
            quiver: quiver.clone(),
            degree,
            terms,
        })
    }

    /// `p · da`, the basic 1-form.
    pub fn one_form_term(quiver: &Arc<Quiver>, p: &Path, a: ArrowId) -> Self {
        let mut letters: Vec<Letter> = p.arrows().iter().map(|&b| Letter::even(b)).collect();
        letters.push(Letter::odd(a));
        let w = FormWord::new(quiver, letters, p.head());
        Self::from_words(quiver, 1, [(w, Rational::one())]).expect("degree one")
    }

    /// `u · da · v · db`.
    pub fn two_form_term(quiver: &Arc<Quiver>, u: &Path, a: ArrowId, v: &Path, b: ArrowId) -> Self {
        let mut letters: Vec<Letter> = u.arrows().iter().map(|&c| Letter::even(c)).collect();
        letters.push(Letter::odd(a));
        letters.extend(v.arrows().iter().map(|&c| Letter::even(c)));
        letters.push(Letter::odd(b));
        let w = FormWord::new(quiver, letters, u.head());
        Self::from_words(quiver, 2, [(w, Rational::one())]).expect("degree two")
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<FormWord, Rational> {
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

    /// Largest Euler weight among the terms.
    pub fn max_weight(&self) -> Option<usize> {
        self.terms.keys().map(FormWord::weight).max()
    }

    pub fn min_weight(&self) -> Option<usize> {
        self.terms.keys().map(FormWord::weight).min()
    }

    pub fn weight_component(&self, w: usize) -> Form {
        self.filter(|word| word.weight() == w)
    }

    pub fn truncate(&self, max_weight: usize) -> Form {
        self.filter(|word| word.weight() <= max_weight)
    }

    fn filter(&self, mut keep: impl FnMut(&FormWord) -> bool) -> Form {
        Form {
            quiver: self.quiver.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    fn check(&self, other: &Form) -> Result<()> {
        if !same_quiver(&self.quiver, &other.quiver) {
            return Err(Error::QuiverMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::FormDegree {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Form) -> Result<Form> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            accumulate(&mut terms, w.clone(), c.clone());
        }
        Ok(Form {
            quiver: self.quiver.clone(),
            degree: self.degree,
            terms,
        })
    }

    pub fn try_sub(&self, other: &Form) -> Result<Form> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Form {
        if s.is_zero() {
            return Form::zero(&self.quiver, self.degree);
        }
        Form {
            quiver: self.quiver.clone(),
            degree: self.degree,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    /// Applies a letter-wise (super)derivation: every position `k` of every
    /// word is replaced by each word of `replace(letter, odd letters before k)`.
    fn derive(
        &self,
        degree: usize,
        replace: impl Fn(Letter, usize) -> Vec<(Vec<Letter>, Rational)>,
    ) -> Form {
        let q = &self.quiver;
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut odd_before = 0;
            for (k, &l) in w.letters.iter().enumerate() {
                for (ins, f) in replace(l, odd_before) {
                    let mut letters = Vec::with_capacity(w.letters.len() + ins.len());
                    letters.extend_from_slice(&w.letters[..k]);
                    letters.extend_from_slice(&ins);
                    letters.extend_from_slice(&w.letters[k + 1..]);
                    let word = FormWord::new(q, letters, w.head);
                    push_class(q, &mut terms, &word, c * f);
                }
                odd_before += usize::from(l.exterior);
            }
        }
        Form {
            quiver: q.clone(),
            degree,
            terms,
        }
    }

    /// The de Rham differential.
    pub fn d(&self) -> Form {
        self.derive(self.degree + 1, |l, odd_before| {
            if l.exterior {
                Vec::new()
            } else {
                vec![(vec![Letter::odd(l.arrow)], parity(odd_before))]
            }
        })
    }

    /// `i_θ`, the odd derivation with `i_θ(a) = 0`, `i_θ(da) = θ(a)`.
    pub fn contract(&self, theta: &Derivation) -> Result<Form> {
        if !same_quiver(theta.quiver(), &self.quiver) {
            return Err(Error::QuiverMismatch);
        }
        if self.degree == 0 {
            return Err(Error::FormDegree { expected: 1, found: 0 });
        }
        Ok(self.derive(self.degree - 1, |l, odd_before| {
            if !l.exterior {
                return Vec::new();
            }
            let sign = parity(odd_before);
            theta
                .image_ref(l.arrow)
                .map(|img| {
                    img.terms()
                        .iter()
                        .map(|(p, c)| (even_letters(p), c * &sign))
                        .collect()
                })
                .unwrap_or_default()
        }))
    }

    /// `L_θ`, the even derivation with `L_θ(a) = θ(a)`, `L_θ(da) = d(θ(a))`.
    pub fn lie_derivative(&self, theta: &Derivation) -> Result<Form> {
        if !same_quiver(theta.quiver(), &self.quiver) {
            return Err(Error::QuiverMismatch);
        }
        Ok(self.derive(self.degree, |l, _| {
            let Some(img) = theta.image_ref(l.arrow) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            for (p, c) in img.terms() {
                let base = even_letters(p);
                if !l.exterior {
                    out.push((base, c.clone()));
                } else {
                    for j in 0..base.len() {
                        let mut w = base.clone();
                        w[j].exterior = true;
                        out.push((w, c.clone()));
                    }
                }
            }
            out
        }))
    }

    /// A primitive `h(α)` with `d h(α) = α`, for closed `α` of degree ≥ 1:
    /// `h = Σ_p (1/p) i_eu(α_p)` over Euler-weight components `α_p`.
    pub fn euler_homotopy(&self) -> Result<Form> {
        if self.degree == 0 {
            return Err(Error::FormDegree { expected: 1, found: 0 });
        }
        if self.terms.keys().any(|w| w.weight() == 0) {
            return Err(Error::WeightZero);
        }
        let residual = self.d();
        if !residual.is_zero() {
            return Err(Error::FormNotClosed {
                residual: residual.to_string(),
            });
        }
        Ok(self.euler_homotopy_unchecked())
    }

    pub(crate) fn euler_homotopy_unchecked(&self) -> Form {
        let eu = Derivation::euler(&self.quiver);
        let mut out = Form::zero(&self.quiver, self.degree - 1);
        let weights: std::collections::BTreeSet<usize> = self.terms.keys().map(FormWord::weight).collect();
        for w in weights {
            let part = self.weight_component(w).contract(&eu).expect("degree ≥ 1");
            out = &out + &part.scale(&Rational::new(1.into(), (w as i64).into()));
        }
        out
    }

    pub fn to_necklace(&self) -> Result<Necklace> {
        if self.degree != 0 {
            return Err(Error::FormDegree {
                expected: 0,
                found: self.degree,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| {
                let arrows = w.letters.iter().map(|l| l.arrow).collect();
                (Path::from_parts(w.head, w.tail, arrows), c.clone())
            })
            .collect();
        Ok(Necklace::from_canonical(&self.quiver, terms))
    }

    /// The terms `p · da` of a 1-form.
    pub fn one_form_terms(&self) -> Result<Vec<(Path, ArrowId, Rational)>> {
        if self.degree != 1 {
            return Err(Error::FormDegree {
                expected: 1,
                found: self.degree,
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(w, c)| {
                let (last, body) = w.letters.split_last().expect("1-forms have a letter");
                let p = path_of(&self.quiver, body, self.quiver.head(last.arrow));
                (p, last.arrow, c.clone())
            })
            .collect())
    }

    /// The terms `u · da · v · db` of a 2-form.
    pub fn two_form_terms(&self) -> Result<Vec<TwoFormTerm>> {
        if self.degree != 2 {
            return Err(Error::FormDegree {
                expected: 2,
                found: self.degree,
            });
        }
        let q = &self.quiver;
        Ok(self
            .terms
            .iter()
            .map(|(w, c)| {
                let letters = &w.letters;
                let i = letters.iter().position(|l| l.exterior).expect("two odd letters");
                let last = letters.len() - 1;
                let (a, b) = (letters[i].arrow, letters[last].arrow);
                let u = path_of(q, &letters[..i], q.head(a));
                let v = path_of(q, &letters[i + 1..last], q.head(b));
                (u, a, v, b, c.clone())
            })
            .collect())
    }

    /// `F_b(α)` for each arrow `b`, where `α = Σ_b F_b(α) · db`.
    pub fn coordinates(&self) -> Result<BTreeMap<ArrowId, PathAlgebraElement>> {
        let mut out: BTreeMap<ArrowId, BTreeMap<Path, Rational>> = BTreeMap::new();
        for (p, a, c) in self.one_form_terms()? {
            accumulate(out.entry(a).or_default(), p, c);
        }
        Ok(out
            .into_iter()
            .map(|(a, t)| (a, PathAlgebraElement::from_map(&self.quiver, t)))
            .collect())
    }
}

fn parity(n: usize) -> Rational {
    if n.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

fn even_letters(p: &Path) -> Vec<Letter> {
    p.arrows().iter().map(|&a| Letter::even(a)).collect()
}

/// The path spelled by even letters, ending at `tail` when empty.
fn path_of(q: &Quiver, letters: &[Letter], tail: VertexId) -> Path {
    debug_assert!(letters.iter().all(|l| !l.exterior));
    let arrows: Vec<ArrowId> = letters.iter().map(|l| l.arrow).collect();
    match (arrows.first(), arrows.last()) {
        (Some(&f), Some(&l)) => Path::from_parts(q.head(f), q.tail(l), arrows),
        _ => Path::idempotent(tail),
    }
}

pub(crate) fn push_class(q: &Quiver, terms: &mut BTreeMap<FormWord, Rational>, w: &FormWord, c: Rational) {
    if let Some((canon, negate)) = canonical_class(q, w) {
        accumulate(terms, canon, if negate { -c } else { c });
    }
}

impl From<&Necklace> for Form {
    fn from(f: &Necklace) -> Self {
        Form {
            quiver: f.quiver().clone(),
            degree: 0,
            terms: f
                .terms()
                .iter()
                .map(|(p, c)| (FormWord::from_path(p), c.clone()))
                .collect(),
        }
    }
}

impl Necklace {
    /// `d0`: the exact 1-form `df = Σ_a (∂f/∂a) · da`.
    pub fn d(&self) -> Form {
        Form::from(self).d()
    }
}

/// `ω_DR = Σ_a da · da*`.
pub fn symplectic_form(omega: &SymplecticData) -> Form {
    let q = omega.quiver();
    let dq = omega.doubled();
    let words = dq.base_arrows().map(|a| {
        let w = FormWord::new(q, vec![Letter::odd(a), Letter::odd(dq.star(a))], q.head(a));
        (w, Rational::one())
    });
    Form::from_words(q, 2, words).expect("degree two")
}

/// The unique `θ` with `i_θ ω_DR = α`: `θ(a) = F_{a*}(α)`, `θ(a*) = −F_a(α)`.
pub fn derivation_from_oneform(alpha: &Form, omega: &SymplecticData) -> Result<Derivation> {
    if !same_quiver(alpha.quiver(), omega.quiver()) {
        return Err(Error::QuiverMismatch);
    }
    let coords = alpha.coordinates()?;
    let q = omega.quiver();
    let dq = omega.doubled();
    let zero = PathAlgebraElement::zero(q);
    let mut images = Vec::new();
    for a in dq.base_arrows() {
        let s = dq.star(a);
        images.push((a, coords.get(&s).cloned().unwrap_or_else(|| zero.clone())));
        images.push((s, -coords.get(&a).cloned().unwrap_or_else(|| zero.clone())));
    }
    Derivation::new(q, images)
}

impl Add<&Form> for &Form {
    type Output = Form;

    fn add(self, rhs: &Form) -> Form {
        self.try_add(rhs).expect("forms of different quivers or degrees")
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;

    fn sub(self, rhs: &Form) -> Form {
        self.try_sub(rhs).expect("forms of different quivers or degrees")
    }
}

impl Neg for &Form {
    type Output = Form;

    fn neg(self) -> Form {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            fmt_coefficient(f, i == 0, c, true)?;
            if w.letters.is_empty() {
                write!(f, "{}", w.display(&self.quiver))?;
            } else {
                write!(f, "cyc({})", w.display(&self.quiver))?;
            }
        }
        Ok(())
    }
}

/// A non-projected element of `Ω_B A`: a combination of composable words.
/// Used to build forms by products before taking classes.
#[derive(Clone, Debug)]
pub struct OmegaElement {
    quiver: Arc<Quiver>,
    terms: BTreeMap<FormWord, Rational>,
}

impl PartialEq for OmegaElement {
    fn eq(&self, other: &Self) -> bool {
        same_quiver(&self.quiver, &other.quiver) && self.terms == other.terms
    }
}

impl OmegaElement {
    pub fn zero(quiver: &Arc<Quiver>) -> Self {
        Self {
            quiver: quiver.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_element(f: &PathAlgebraElement) -> Self {
        Self {
            quiver: f.quiver().clone(),
            terms: f
                .terms()
                .iter()
                .map(|(p, c)| (FormWord::from_path(p), c.clone()))
                .collect(),
        }
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn terms(&self) -> &BTreeMap<FormWord, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &OmegaElement) -> Result<OmegaElement> {
        if !same_quiver(&self.quiver, &other.quiver) {
            return Err(Error::QuiverMismatch);
        }
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            accumulate(&mut terms, w.clone(), c.clone());
        }
        Ok(OmegaElement {
            quiver: self.quiver.clone(),
            terms,
        })
    }

    pub fn scale(&self, s: &Rational) -> OmegaElement {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            accumulate(&mut terms, w.clone(), c * s);
        }
        OmegaElement {
            quiver: self.quiver.clone(),
            terms,
        }
    }

    /// Product in `Ω`, keeping only words of weight at most `max_weight`.
    pub fn mul_truncated(&self, other: &OmegaElement, max_weight: Option<usize>) -> Result<OmegaElement> {
        if !same_quiver(&self.quiver, &other.quiver) {
            return Err(Error::QuiverMismatch);
        }
        let mut terms = BTreeMap::new();
        for (u, c) in &self.terms {
            for (v, d) in &other.terms {
                if max_weight.is_some_and(|m| u.weight() + v.weight() > m) {
                    continue;
                }
                if let Some(uv) = u.concat(v) {
                    accumulate(&mut terms, uv, c * d);
                }
            }
        }
        Ok(OmegaElement {
            quiver: self.quiver.clone(),
            terms,
        })
    }

    pub fn mul(&self, other: &OmegaElement) -> Result<OmegaElement> {
        self.mul_truncated(other, None)
    }

    /// The differential on `Ω` (before taking classes).
    pub fn d(&self) -> OmegaElement {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut odd_before = 0;
            for (k, l) in w.letters.iter().enumerate() {
                if !l.exterior {
                    let mut letters = w.letters.clone();
                    letters[k].exterior = true;
                    let word = FormWord {
                        head: w.head,
                        tail: w.tail,
                        letters,
                    };
                    accumulate(&mut terms, word, c * parity(odd_before));
                }
                odd_before += usize::from(l.exterior);
            }
        }
        OmegaElement {
            quiver: self.quiver.clone(),
            terms,
        }
    }

    /// The underlying path algebra element, if no `da` occurs.
    pub fn to_element(&self) -> Option<PathAlgebraElement> {
        if self.terms.keys().any(|w| w.form_degree() > 0) {
            return None;
        }
        let terms = self.terms.iter().map(|(w, c)| {
            let arrows = w.letters.iter().map(|l| l.arrow).collect();
            (Path::from_parts(w.head, w.tail, arrows), c.clone())
        });
        Some(PathAlgebraElement::from_terms(&self.quiver, terms))
    }

    /// Form degrees present.
    pub fn degrees(&self) -> std::collections::BTreeSet<usize> {
        self.terms.keys().map(FormWord::form_degree).collect()
    }

    /// The class in `DR`, which requires a single form degree (a zero
    /// element takes `default_degree`).
    pub fn class(&self, default_degree: usize) -> Result<Form> {
        let degrees = self.degrees();
        let degree = match degrees.len() {
            0 => default_degree,
            1 => *degrees.iter().next().unwrap(),
            _ => {
                return Err(Error::Input(
                    "expression mixes forms of different degrees".into(),
                ))
            }
        };
        Form::from_words(&self.quiver, degree, self.terms.iter().map(|(w, c)| (w.clone(), c.clone())))
    }
}

impl fmt::Display for OmegaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            fmt_coefficient(f, i == 0, c, true)?;
            write!(f, "{}", w.display(&self.quiver))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;
    use crate::necklace::project_to_necklace;

    struct Ctx {
        omega: SymplecticData,
        q: Arc<Quiver>,
        x: PathAlgebraElement,
        y: PathAlgebraElement,
    }

    fn ctx() -> Ctx {
        let omega = SymplecticData::one_loop();
        let q = omega.quiver().clone();
        let x = PathAlgebraElement::arrow(&q, ArrowId(0));
        let y = PathAlgebraElement::arrow(&q, ArrowId(1));
        Ctx { omega, q, x, y }
    }

    fn p(_: &Ctx, f: &PathAlgebraElement) -> Path {
        f.terms().keys().next().unwrap().clone()
    }

    fn dy(c: &Ctx) -> Form {
        Form::one_form_term(&c.q, &Path::idempotent(VertexId(0)), ArrowId(1))
    }

    #[test]
    fn d_of_idempotent_vanishes() {
        let c = ctx();
        assert!(Necklace::vertex(&c.q, VertexId(0)).d().is_zero());
    }

    #[test]
    fn d_of_xy() {
        let c = ctx();
        let xy = project_to_necklace(&(&c.x * &c.y));
        let expected = &Form::one_form_term(&c.q, &p(&c, &c.y), ArrowId(0))
            + &Form::one_form_term(&c.q, &p(&c, &c.x), ArrowId(1));
        assert_eq!(xy.d(), expected);
    }

    #[test]
    fn d_of_x_squared_merges_rotations() {
        let c = ctx();
        let x2 = project_to_necklace(&c.x.pow(2));
        let expected = Form::one_form_term(&c.q, &p(&c, &c.x), ArrowId(0)).scale(&int(2));
        assert_eq!(x2.d(), expected);
        assert!(x2.d().d().is_zero());
    }

    #[test]
    fn dx_wedge_dx_is_zero() {
        let c = ctx();
        let e = Path::idempotent(VertexId(0));
        assert!(Form::two_form_term(&c.q, &e, ArrowId(0), &e, ArrowId(0)).is_zero());
    }

    #[test]
    fn swapping_odd_blocks_costs_a_sign() {
        let c = ctx();
        let e = Path::idempotent(VertexId(0));
        let xy = Form::two_form_term(&c.q, &e, ArrowId(0), &e, ArrowId(1));
        let yx = Form::two_form_term(&c.q, &e, ArrowId(1), &e, ArrowId(0));
        assert_eq!(xy, -&yx);
    }

    #[test]
    fn d_of_y_dx() {
        let c = ctx();
        let ydx = Form::one_form_term(&c.q, &p(&c, &c.y), ArrowId(0));
        let e = Path::idempotent(VertexId(0));
        let dydx = Form::two_form_term(&c.q, &e, ArrowId(1), &e, ArrowId(0));
        assert_eq!(ydx.d(), dydx);
    }

    #[test]
    fn d_of_x2_dx_by_leibniz() {
        // d(x x dx) = dx x dx + x dx dx; both rotate to x dx dx with opposite
        // signs relative to each other only through the block swap.
        let c = ctx();
        let x2dx = Form::one_form_term(&c.q, &p(&c, &c.x.pow(2)), ArrowId(0));
        let e = Path::idempotent(VertexId(0));
        let a = Form::two_form_term(&c.q, &e, ArrowId(0), &p(&c, &c.x), ArrowId(0));
        let b = Form::two_form_term(&c.q, &p(&c, &c.x), ArrowId(0), &e, ArrowId(0));
        assert_eq!(x2dx.d(), &a + &b);
        // x·dx·dx ≡ −dx·x·dx, so the two Leibniz terms cancel
        assert!(x2dx.d().is_zero());
    }

    #[test]
    fn contraction_examples() {
        let c = ctx();
        let eu = Derivation::euler(&c.q);
        let x2 = project_to_necklace(&c.x.pow(2));
        assert_eq!(x2.d().contract(&eu).unwrap(), Form::from(&x2).scale(&int(2)));
        let zero = Derivation::zero(&c.q);
        assert!(x2.d().contract(&zero).unwrap().is_zero());
        let theta = Derivation::new(&c.q, [(ArrowId(0), PathAlgebraElement::one(&c.q))]).unwrap();
        let e = Path::idempotent(VertexId(0));
        let dxdy = Form::two_form_term(&c.q, &e, ArrowId(0), &e, ArrowId(1));
        assert_eq!(dxdy.contract(&theta).unwrap(), dy(&c));
        assert!(Form::from(&x2).contract(&eu).is_err());
    }

    #[test]
    fn lie_derivative_examples() {
        let c = ctx();
        let eu = Derivation::euler(&c.q);
        let w = project_to_necklace(&(&(&c.x * &c.y) * &c.x));
        let lw = Form::from(&w).lie_derivative(&eu).unwrap();
        assert_eq!(lw, Form::from(&w).scale(&int(3)));
        let unit = Form::from(&Necklace::vertex(&c.q, VertexId(0)));
        assert!(unit.lie_derivative(&eu).unwrap().is_zero());
        let xy = project_to_necklace(&(&c.x * &c.y));
        let x2 = project_to_necklace(&c.x.pow(2));
        let th = c.omega.hamiltonian_derivation(&xy);
        let lhs = Form::from(&x2).lie_derivative(&th).unwrap().to_necklace().unwrap();
        assert_eq!(lhs, c.omega.bracket(&xy, &x2));
    }

    #[test]
    fn euler_homotopy_examples() {
        let c = ctx();
        let two_x_dx = Form::one_form_term(&c.q, &p(&c, &c.x), ArrowId(0)).scale(&int(2));
        let h = two_x_dx.euler_homotopy().unwrap();
        assert_eq!(h.to_necklace().unwrap(), project_to_necklace(&c.x.pow(2)));
        let e = Path::idempotent(VertexId(0));
        let dxdy = Form::two_form_term(&c.q, &e, ArrowId(0), &e, ArrowId(1));
        let alpha = dxdy.euler_homotopy().unwrap();
        assert_eq!(alpha.d(), dxdy);
        // α = ½(x dy − y dx)
        let half = Rational::new(1.into(), 2.into());
        let expected = (&Form::one_form_term(&c.q, &p(&c, &c.x), ArrowId(1))
            - &Form::one_form_term(&c.q, &p(&c, &c.y), ArrowId(0)))
            .scale(&half);
        assert_eq!(alpha, expected);
    }

    #[test]
    fn euler_homotopy_rejects_open_forms() {
        let c = ctx();
        let ydx = Form::one_form_term(&c.q, &p(&c, &c.y), ArrowId(0));
        assert!(matches!(ydx.euler_homotopy(), Err(Error::FormNotClosed { .. })));
        let unit = Form::from(&Necklace::vertex(&c.q, VertexId(0)));
        assert!(unit.euler_homotopy().is_err());
    }

    #[test]
    fn derivation_from_oneform_examples() {
        let c = ctx();
        let th = derivation_from_oneform(&dy(&c), &c.omega).unwrap();
        assert_eq!(th.image(ArrowId(0)), PathAlgebraElement::one(&c.q));
        assert!(th.image(ArrowId(1)).is_zero());
        assert!(derivation_from_oneform(&Form::zero(&c.q, 1), &c.omega).unwrap().is_zero());
        let back = symplectic_form(&c.omega).contract(&th).unwrap();
        assert_eq!(back, dy(&c));
    }

    #[test]
    fn hamiltonian_is_inverse_of_minus_df() {
        let c = ctx();
        let f = project_to_necklace(&(&(&c.x * &c.x) * &c.y));
        let th = derivation_from_oneform(&-&f.d(), &c.omega).unwrap();
        assert_eq!(th, c.omega.hamiltonian_derivation(&f));
    }

    #[test]
    fn omega_products_project() {
        let c = ctx();
        let x = OmegaElement::from_element(&c.x);
        let dxo = x.d();
        let prod = x.mul(&dxo).unwrap();
        let cls = prod.class(1).unwrap();
        assert_eq!(cls, Form::one_form_term(&c.q, &p(&c, &c.x), ArrowId(0)));
        let mixed = x.add(&dxo).unwrap();
        assert!(mixed.class(0).is_err());
    }
}
