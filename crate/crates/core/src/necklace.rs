//! Cyclic words `DR⁰ = A/[A,A]`, cyclic derivatives, the necklace Lie bracket
//! and Hamiltonian derivations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::{same_quiver, PathAlgebraElement};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::path::Path;
use crate::quiver::{ArrowId, DoubledQuiver, Quiver, VertexId};
use crate::matrix::Matrix;
use crate::terms::{accumulate, fmt_coefficient, least_rotation, rotated};
use crate::Rational;

/// The canonical representative of the cyclic class of `path`: its least
/// rotation under the path order. Open paths have no class (they are
/// commutators with idempotents) and give `None`.
pub fn canonical_cycle(q: &Quiver, path: &Path) -> Option<Path> {
    if !path.is_closed() {
        return None;
    }
    if path.is_empty() {
        return Some(path.clone());
    }
    let arrows = path.arrows();
    let r = least_rotation(arrows, 0..arrows.len()).expect("nonempty word");
    let word = rotated(arrows, r);
    let v = q.head(word[0]);
    Some(Path::from_parts(v, v, word))
}

/// A word known to close up, read cyclically.
pub(crate) fn canonical_closed_word(q: &Quiver, word: Vec<ArrowId>, empty_vertex: VertexId) -> Path {
    if word.is_empty() {
        return Path::idempotent(empty_vertex);
    }
    let r = least_rotation(&word, 0..word.len()).expect("nonempty word");
    let word = if r == 0 { word } else { rotated(&word, r) };
    let v = q.head(word[0]);
    Path::from_parts(v, v, word)
}

/// The canonical cycles of length `degree`, a basis of that graded piece of
/// `A/[A,A]`. Degree 0 gives the vertex classes.
pub fn necklace_basis(q: &Quiver, degree: usize) -> Vec<Path> {
    if degree == 0 {
        return q.vertices().map(Path::idempotent).collect();
    }
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(degree);
    for a in q.arrow_ids() {
        word.push(a);
        extend_cycles(q, degree, &mut word, &mut out);
        word.pop();
    }
    out.sort();
    out
}

fn extend_cycles(q: &Quiver, degree: usize, word: &mut Vec<ArrowId>, out: &mut Vec<Path>) {
    let last = *word.last().expect("nonempty");
    if word.len() == degree {
        if q.tail(last) == q.head(word[0]) && least_rotation(word, 0..word.len()) == Some(0) {
            let v = q.head(word[0]);
            out.push(Path::from_parts(v, v, word.clone()));
        }
        return;
    }
    for b in q.arrow_ids().filter(|&b| q.head(b) == q.tail(last)) {
        if b < word[0] {
            continue;
        }
        word.push(b);
        extend_cycles(q, degree, word, out);
        word.pop();
    }
}

/// An element of `A/[A,A]` in canonical form.
///
/// Terms are keyed by canonical closed paths; the empty path at `i` is the
/// class of the idempotent `1_i`, so the degree-0 part is one coefficient per
/// vertex.
#[derive(Clone, Debug)]
pub struct Necklace {
    quiver: Arc<Quiver>,
    terms: BTreeMap<Path, Rational>,
}

impl PartialEq for Necklace {
    fn eq(&self, other: &Self) -> bool {
        same_quiver(&self.quiver, &other.quiver) && self.terms == other.terms
    }
}

impl Eq for Necklace {}

impl Necklace {
    pub fn zero(quiver: &Arc<Quiver>) -> Self {
        Self {
            quiver: quiver.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn vertex(quiver: &Arc<Quiver>, v: VertexId) -> Self {
        Self::from_terms(quiver, [(Path::idempotent(v), Rational::one())])
    }

    /// `project_to_necklace`: sums the classes of the given terms.
    pub fn from_terms(quiver: &Arc<Quiver>, terms: impl IntoIterator<Item = (Path, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, c) in terms {
            if let Some(cyc) = canonical_cycle(quiver, &p) {
                accumulate(&mut map, cyc, c);
            }
        }
        Self {
            quiver: quiver.clone(),
            terms: map,
        }
    }

    pub(crate) fn from_canonical(quiver: &Arc<Quiver>, terms: BTreeMap<Path, Rational>) -> Self {
        Self {
            quiver: quiver.clone(),
            terms,
        }
    }

    /// The class of a single word, e.g. `cyc(x x*)`.
    pub fn cycle(quiver: &Arc<Quiver>, path: Path) -> Self {
        Self::from_terms(quiver, [(path, Rational::one())])
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn terms(&self) -> &BTreeMap<Path, Rational> {
        &self.terms
    }

    /// Coefficients of the idempotent classes, i.e. the image of `B`.
    pub fn degree_zero(&self) -> BTreeMap<VertexId, Rational> {
        self.terms
            .iter()
            .filter(|(p, _)| p.is_empty())
            .map(|(p, c)| (p.head(), c.clone()))
            .collect()
    }

    /// Nonempty canonical cycles with their coefficients.
    pub fn cycles(&self) -> impl Iterator<Item = (&Path, &Rational)> {
        self.terms.iter().filter(|(p, _)| !p.is_empty())
    }

    pub fn coefficient(&self, p: &Path) -> Rational {
        canonical_cycle(&self.quiver, p)
            .and_then(|c| self.terms.get(&c).cloned())
            .unwrap_or_else(Rational::zero)
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

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).max()
    }

    pub fn homogeneous_part(&self, d: usize) -> Self {
        Self {
            quiver: self.quiver.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.len() == d)
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    /// The sum of canonical representatives, as an element of `A`.
    pub fn to_element(&self) -> PathAlgebraElement {
        PathAlgebraElement::from_map(&self.quiver, self.terms.clone())
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
        Ok(Self::from_canonical(&self.quiver, terms))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&-Rational::one()))
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

    /// `∂f/∂a`: for every occurrence of `a` in a cycle, the path running from
    /// just after that occurrence around to just before it. The result lies in
    /// `1_tail(a) · A · 1_head(a)`.
    pub fn cyclic_derivative(&self, a: ArrowId) -> Result<PathAlgebraElement> {
        if a.index() >= self.quiver.arrow_count() {
            return Err(Error::UnknownArrow(format!("#{}", a.0)));
        }
        let mut out = BTreeMap::new();
        for (p, c) in self.cycles() {
            cyclic_derivative_into(&self.quiver, p, c, a, &mut out);
        }
        Ok(PathAlgebraElement::from_map(&self.quiver, out))
    }

    /// All cyclic derivatives at once, indexed by arrow id.
    pub(crate) fn all_cyclic_derivatives(&self) -> Vec<BTreeMap<Path, Rational>> {
        let mut out = vec![BTreeMap::new(); self.quiver.arrow_count()];
        for (p, c) in self.cycles() {
            let w = p.arrows();
            for (k, &a) in w.iter().enumerate() {
                accumulate(&mut out[a.index()], remainder(&self.quiver, w, k), c.clone());
            }
        }
        out
    }

    /// `L_θ f`: apply `θ` to one letter at a time and take classes.
    pub fn lie_derivative(&self, theta: &Derivation) -> Necklace {
        assert!(same_quiver(theta.quiver(), &self.quiver), "operands over different quivers");
        let mut raw = BTreeMap::new();
        for (p, c) in self.cycles() {
            theta.apply_path_into(p, c, &mut raw);
        }
        Necklace::from_terms(&self.quiver, raw)
    }
}

/// `w_{k+1} … w_L w_1 … w_{k-1}` for a closed word `w`.
fn remainder(q: &Quiver, w: &[ArrowId], k: usize) -> Path {
    let mut r = Vec::with_capacity(w.len() - 1);
    r.extend_from_slice(&w[k + 1..]);
    r.extend_from_slice(&w[..k]);
    Path::from_parts(q.tail(w[k]), q.head(w[k]), r)
}

fn cyclic_derivative_into(
    q: &Quiver,
    p: &Path,
    c: &Rational,
    a: ArrowId,
    out: &mut BTreeMap<Path, Rational>,
) {
    let w = p.arrows();
    for (k, &b) in w.iter().enumerate() {
        if b == a {
            accumulate(out, remainder(q, w, k), c.clone());
        }
    }
}

impl From<&PathAlgebraElement> for Necklace {
    fn from(f: &PathAlgebraElement) -> Self {
        Necklace::from_terms(f.quiver(), f.terms().iter().map(|(p, c)| (p.clone(), c.clone())))
    }
}

/// `project_to_necklace`.
pub fn project_to_necklace(f: &PathAlgebraElement) -> Necklace {
    Necklace::from(f)
}

impl Add<&Necklace> for &Necklace {
    type Output = Necklace;

    fn add(self, rhs: &Necklace) -> Necklace {
        self.try_add(rhs).expect("operands over different quivers")
    }
}

impl Sub<&Necklace> for &Necklace {
    type Output = Necklace;

    fn sub(self, rhs: &Necklace) -> Necklace {
        self.try_sub(rhs).expect("operands over different quivers")
    }
}

impl Neg for &Necklace {
    type Output = Necklace;

    fn neg(self) -> Necklace {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            fmt_coefficient(f, i == 0, c, true)?;
            if p.is_empty() {
                write!(f, "{}", p.display(&self.quiver))?;
            } else {
                write!(f, "cyc({})", p.display(&self.quiver))?;
            }
        }
        Ok(())
    }
}

/// The constant symplectic structure on a doubled quiver:
/// `ω(a, a*) = 1`, `ω(a*, a) = −1` for base arrows `a`, zero otherwise.
/// As a 2-form this is `ω_DR = Σ_a da·da*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticData {
    doubled: Arc<DoubledQuiver>,
}

impl SymplecticData {
    pub fn new(doubled: DoubledQuiver) -> Self {
        Self {
            doubled: Arc::new(doubled),
        }
    }

    pub fn one_loop() -> Self {
        Self::new(DoubledQuiver::one_loop())
    }

    pub fn doubled(&self) -> &DoubledQuiver {
        &self.doubled
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        self.doubled.quiver()
    }

    pub fn pairing(&self, b: ArrowId, c: ArrowId) -> i32 {
        if self.doubled.star(b) != c {
            0
        } else if self.doubled.is_base(b) {
            1
        } else {
            -1
        }
    }

    fn check(&self, f: &Necklace) {
        assert!(
            same_quiver(f.quiver(), self.quiver()),
            "necklace does not live over the symplectic quiver"
        );
    }

    /// `{f, g} = Σ_a ∂f/∂a · ∂g/∂a* − ∂f/∂a* · ∂g/∂a  mod [A,A]`.
    ///
    /// # Panics
    /// If `f` or `g` lives over a different quiver.
    pub fn bracket(&self, f: &Necklace, g: &Necklace) -> Necklace {
        self.check(f);
        self.check(g);
        let q = self.quiver();
        let df = f.all_cyclic_derivatives();
        let dg = g.all_cyclic_derivatives();
        let mut out = BTreeMap::new();
        let mut pair = |left: &BTreeMap<Path, Rational>, right: &BTreeMap<Path, Rational>, sign: bool| {
            for (p, c) in left {
                for (r, d) in right {
                    let mut word = Vec::with_capacity(p.len() + r.len());
                    word.extend_from_slice(p.arrows());
                    word.extend_from_slice(r.arrows());
                    let key = canonical_closed_word(q, word, p.head());
                    let coeff = c * d;
                    accumulate(&mut out, key, if sign { coeff } else { -coeff });
                }
            }
        };
        for a in self.doubled.base_arrows() {
            let s = self.doubled.star(a);
            pair(&df[a.index()], &dg[s.index()], true);
            pair(&df[s.index()], &dg[a.index()], false);
        }
        Necklace::from_canonical(q, out)
    }

    /// The letter-pair double sum: for words `u`, `v` and each pair of
    /// positions `(i, j)`, `ω(u_i, v_j)` times the rotation of `u` starting
    /// after `u_i` followed by the rotation of `v` starting after `v_j`.
    /// Computed straight from the words, with no cyclic derivatives.
    pub fn bracket_tensor_oracle(&self, f: &Necklace, g: &Necklace) -> Necklace {
        self.check(f);
        self.check(g);
        let q = self.quiver();
        let mut raw: Vec<(Path, Rational)> = Vec::new();
        for (u, c) in f.cycles() {
            for (v, d) in g.cycles() {
                let (uw, vw) = (u.arrows(), v.arrows());
                for i in 0..uw.len() {
                    for j in 0..vw.len() {
                        let w = self.pairing(uw[i], vw[j]);
                        if w == 0 {
                            continue;
                        }
                        let word: Vec<ArrowId> = uw[i + 1..]
                            .iter()
                            .chain(&uw[..i])
                            .chain(&vw[j + 1..])
                            .chain(&vw[..j])
                            .copied()
                            .collect();
                        let v0 = q.tail(uw[i]);
                        let path = match (word.first(), word.last()) {
                            (Some(&first), Some(&last)) => Path::from_parts(q.head(first), q.tail(last), word),
                            _ => Path::idempotent(v0),
                        };
                        raw.push((path, c * d * Rational::from_integer(w.into())));
                    }
                }
            }
        }
        Necklace::from_terms(q, raw)
    }

    /// `θ_f`, normalized so that `L_{θ_f} g = {f, g}`:
    /// `θ_f(a) = −∂f/∂a*` and `θ_f(a*) = ∂f/∂a` for base arrows `a`.
    /// Equivalently `i_{θ_f} ω_DR = −df`.
    pub fn hamiltonian_derivation(&self, f: &Necklace) -> Derivation {
        self.check(f);
        let q = self.quiver();
        let df = f.all_cyclic_derivatives();
        let mut images = Vec::new();
        for a in self.doubled.base_arrows() {
            let s = self.doubled.star(a);
            let da = PathAlgebraElement::from_map(q, df[a.index()].clone());
            let ds = PathAlgebraElement::from_map(q, df[s.index()].clone());
            images.push((a, -ds));
            images.push((s, da));
        }
        Derivation::new(q, images).expect("cyclic derivatives have derivation endpoints")
    }

    /// A basis of the kernel of `f ↦ θ_f` on necklaces of length `degree`,
    /// found by exact linear algebra on the cycle basis.
    pub fn hamiltonian_kernel(&self, degree: usize) -> Vec<Necklace> {
        let q = self.quiver();
        let basis = necklace_basis(q, degree);
        let mut rows: BTreeMap<(ArrowId, Path), usize> = BTreeMap::new();
        let mut columns = Vec::with_capacity(basis.len());
        for p in &basis {
            let theta = self.hamiltonian_derivation(&Necklace::cycle(q, p.clone()));
            let mut col = Vec::new();
            for (a, img) in theta.images() {
                for (path, c) in img.terms() {
                    let next = rows.len();
                    let r = *rows.entry((*a, path.clone())).or_insert(next);
                    col.push((r, c.clone()));
                }
            }
            columns.push(col);
        }
        let mut m = Matrix::zeros(rows.len(), basis.len());
        for (j, col) in columns.into_iter().enumerate() {
            for (i, c) in col {
                m[(i, j)] = c;
            }
        }
        m.kernel()
            .into_iter()
            .map(|v| Necklace::from_terms(q, basis.iter().cloned().zip(v)))
            .collect()
    }
}

/// Free-function form of [`SymplecticData::bracket`].
pub fn necklace_bracket(f: &Necklace, g: &Necklace, omega: &SymplecticData) -> Necklace {
    omega.bracket(f, g)
}

/// Free-function form of [`SymplecticData::bracket_tensor_oracle`].
pub fn bracket_tensor_oracle(f: &Necklace, g: &Necklace, omega: &SymplecticData) -> Necklace {
    omega.bracket_tensor_oracle(f, g)
}

/// Free-function form of [`SymplecticData::hamiltonian_derivation`].
pub fn hamiltonian_derivation(f: &Necklace, omega: &SymplecticData) -> Derivation {
    omega.hamiltonian_derivation(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SymplecticData, PathAlgebraElement, PathAlgebraElement) {
        let omega = SymplecticData::one_loop();
        let q = omega.quiver().clone();
        let x = PathAlgebraElement::arrow(&q, ArrowId(0));
        let y = PathAlgebraElement::arrow(&q, ArrowId(1));
        (omega, x, y)
    }

    fn int(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn commutator_projects_to_zero() {
        let (_, x, y) = setup();
        let c = &(&x * &y) - &(&y * &x);
        assert!(project_to_necklace(&c).is_zero());
    }

    #[test]
    fn rotations_share_a_class() {
        let (_, x, y) = setup();
        let w1 = &(&(&x * &x) * &y) * &x;
        let w2 = &(&(&x * &x) * &x) * &y;
        let n = project_to_necklace(&w1);
        assert_eq!(n, project_to_necklace(&w2));
        // the least rotation of x x y x is x x x y
        let (p, c) = n.terms().iter().next().unwrap();
        assert_eq!(p.arrows(), &[ArrowId(0), ArrowId(0), ArrowId(0), ArrowId(1)]);
        assert!(c.is_one());
    }

    #[test]
    fn open_paths_vanish() {
        let base = Quiver::new(["1", "2"], [("a".to_owned(), "1".to_owned(), "2".to_owned())]).unwrap();
        let dq = DoubledQuiver::new(base).unwrap();
        let q = dq.quiver();
        let a = PathAlgebraElement::arrow(q, q.find_arrow("a").unwrap());
        assert!(project_to_necklace(&a).is_zero());
    }

    #[test]
    fn cyclic_derivative_examples() {
        let (_, x, y) = setup();
        let xy = project_to_necklace(&(&x * &y));
        assert_eq!(xy.cyclic_derivative(ArrowId(0)).unwrap(), y);
        let x3 = project_to_necklace(&x.pow(3));
        assert_eq!(x3.cyclic_derivative(ArrowId(0)).unwrap(), x.pow(2).scale(&int(3)));
        let y2 = project_to_necklace(&y.pow(2));
        assert!(y2.cyclic_derivative(ArrowId(0)).unwrap().is_zero());
        assert!(matches!(y2.cyclic_derivative(ArrowId(7)), Err(Error::UnknownArrow(_))));
    }

    #[test]
    fn bracket_examples() {
        let (omega, x, y) = setup();
        let q = omega.quiver().clone();
        let xn = project_to_necklace(&x);
        let yn = project_to_necklace(&y);
        let unit = Necklace::vertex(&q, VertexId(0));
        assert_eq!(omega.bracket(&xn, &yn), unit);
        let x2 = project_to_necklace(&x.pow(2));
        let y2 = project_to_necklace(&y.pow(2));
        let four_xy = project_to_necklace(&(&x * &y)).scale(&int(4));
        assert_eq!(omega.bracket(&x2, &y2), four_xy);
        assert!(omega.bracket(&x2, &unit).is_zero());
    }

    #[test]
    fn oracle_examples() {
        let (omega, x, y) = setup();
        let q = omega.quiver().clone();
        let xn = project_to_necklace(&x);
        let yn = project_to_necklace(&y);
        assert_eq!(omega.bracket_tensor_oracle(&xn, &yn), Necklace::vertex(&q, VertexId(0)));
        let xy = project_to_necklace(&(&x * &y));
        assert!(omega.bracket_tensor_oracle(&xy, &xy).is_zero());
        let x2 = project_to_necklace(&x.pow(2));
        let y2 = project_to_necklace(&y.pow(2));
        assert_eq!(omega.bracket_tensor_oracle(&x2, &y2), xy.scale(&int(4)));
    }

    #[test]
    fn hamiltonian_examples() {
        let (omega, x, y) = setup();
        let q = omega.quiver().clone();
        let unit = Necklace::vertex(&q, VertexId(0)).scale(&int(5));
        assert!(omega.hamiltonian_derivation(&unit).is_zero());
        let xy = project_to_necklace(&(&x * &y));
        let th = omega.hamiltonian_derivation(&xy);
        assert_eq!(th.image(ArrowId(0)), -&x);
        assert_eq!(th.image(ArrowId(1)), y);
        let x2 = project_to_necklace(&x.pow(2));
        let th = omega.hamiltonian_derivation(&x2);
        assert!(th.image(ArrowId(0)).is_zero());
        assert_eq!(th.image(ArrowId(1)), x.scale(&int(2)));
    }

    #[test]
    fn lie_derivative_of_hamiltonian_is_bracket() {
        let (omega, x, y) = setup();
        let xy = project_to_necklace(&(&x * &y));
        let x2 = project_to_necklace(&x.pow(2));
        let th = omega.hamiltonian_derivation(&xy);
        assert_eq!(x2.lie_derivative(&th), omega.bracket(&xy, &x2));
        assert_eq!(omega.bracket(&xy, &x2), x2.scale(&int(-2)));
    }

    #[test]
    fn display_round_trips_visually() {
        let (_, x, y) = setup();
        let f = &(&x * &y).scale(&int(2)) - &PathAlgebraElement::one(x.quiver());
        assert_eq!(project_to_necklace(&f).to_string(), "-e(0) + 2 cyc(x x*)");
    }
}
