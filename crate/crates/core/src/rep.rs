//! The representation functor: necklaces as trace functions on matrix data.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::algebra::{same_quiver, PathAlgebraElement};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::necklace::{canonical_cycle, project_to_necklace, Necklace, SymplecticData};
use crate::path::Path;
use crate::poly::Polynomial;
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::terms::accumulate;
use crate::Rational;

/// Reads a rational from `"p/q"`, `"p"` or a JSON integer.
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n
            .as_i64()
            .map(|k| Rational::from_integer(k.into()))
            .ok_or_else(|| Error::Input(format!("`{n}` is not an integer; write fractions as \"p/q\""))),
        other => Err(Error::Input(format!("expected a rational, got {other}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let r: Rational = t
        .parse()
        .map_err(|_| Error::Input(format!("`{s}` is not a rational number")))?;
    Ok(r)
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn matrix_from_json(v: &Value, what: &str) -> Result<Matrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Input(format!("`{what}` must be an array of rows")))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Input(format!("rows of `{what}` must be arrays")))?
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows).ok_or_else(|| Error::Input(format!("`{what}` has rows of different lengths")))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(rational_to_json).collect()))
            .collect(),
    )
}

/// One nonnegative dimension per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimensionVector(Vec<usize>);

impl DimensionVector {
    pub fn new(q: &Quiver, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != q.vertex_count() {
            return Err(Error::Input(format!(
                "dimension vector has {} entries, quiver has {} vertices",
                dims.len(),
                q.vertex_count()
            )));
        }
        if dims.iter().all(|&n| n == 0) {
            return Err(Error::Input("dimension vector must have a positive entry".into()));
        }
        Ok(Self(dims))
    }

    pub fn uniform(q: &Quiver, n: usize) -> Result<Self> {
        Self::new(q, vec![n; q.vertex_count()])
    }

    pub fn get(&self, v: VertexId) -> usize {
        self.0[v.index()]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Shape `n_head × n_tail` of the matrix of `a`.
    pub fn shape(&self, q: &Quiver, a: ArrowId) -> (usize, usize) {
        (self.get(q.head(a)), self.get(q.tail(a)))
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A matrix for every arrow, `ρ(a) : V_tail(a) → V_head(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepPoint {
    quiver: Arc<Quiver>,
    dims: DimensionVector,
    mats: Vec<Matrix>,
}

impl RepPoint {
    pub fn new(quiver: &Arc<Quiver>, dims: DimensionVector, mats: Vec<Matrix>) -> Result<Self> {
        if mats.len() != quiver.arrow_count() {
            return Err(Error::Input(format!(
                "expected {} matrices, got {}",
                quiver.arrow_count(),
                mats.len()
            )));
        }
        for (a, m) in quiver.arrow_ids().zip(&mats) {
            let (rows, cols) = dims.shape(quiver, a);
            if m.shape() != (rows, cols) {
                return Err(Error::Shape {
                    what: quiver.arrow_name(a).to_owned(),
                    expected_rows: rows,
                    expected_cols: cols,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
        }
        Ok(Self {
            quiver: quiver.clone(),
            dims,
            mats,
        })
    }

    pub fn zero(quiver: &Arc<Quiver>, dims: DimensionVector) -> Self {
        let mats = quiver
            .arrow_ids()
            .map(|a| {
                let (r, c) = dims.shape(quiver, a);
                Matrix::zeros(r, c)
            })
            .collect();
        Self {
            quiver: quiver.clone(),
            dims,
            mats,
        }
    }

    /// Entries drawn uniformly from `-bound..=bound`.
    pub fn random<R: Rng + ?Sized>(quiver: &Arc<Quiver>, dims: DimensionVector, rng: &mut R, bound: i64) -> Self {
        let mats = quiver
            .arrow_ids()
            .map(|a| {
                let (r, c) = dims.shape(quiver, a);
                Matrix::from_fn(r, c, |_, _| Rational::from_integer(rng.random_range(-bound..=bound).into()))
            })
            .collect();
        Self {
            quiver: quiver.clone(),
            dims,
            mats,
        }
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn matrix(&self, a: ArrowId) -> &Matrix {
        &self.mats[a.index()]
    }

    pub fn set_matrix(&mut self, a: ArrowId, m: Matrix) -> Result<()> {
        let (rows, cols) = self.dims.shape(&self.quiver, a);
        if m.shape() != (rows, cols) {
            return Err(Error::Shape {
                what: self.quiver.arrow_name(a).to_owned(),
                expected_rows: rows,
                expected_cols: cols,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        self.mats[a.index()] = m;
        Ok(())
    }

    /// `ρ(a) ↦ g_head(a) ρ(a) g_tail(a)⁻¹`.
    pub fn conjugate(&self, g: &[Matrix]) -> Result<RepPoint> {
        if g.len() != self.quiver.vertex_count() {
            return Err(Error::Input("need one matrix per vertex".into()));
        }
        let mut inverses = Vec::with_capacity(g.len());
        for (v, gv) in g.iter().enumerate() {
            let n = self.dims.0[v];
            if gv.shape() != (n, n) {
                return Err(Error::Shape {
                    what: format!("g at vertex {}", self.quiver.vertex_name(VertexId(v as u32))),
                    expected_rows: n,
                    expected_cols: n,
                    rows: gv.rows(),
                    cols: gv.cols(),
                });
            }
            inverses.push(gv.inverse().ok_or_else(|| Error::Input("conjugating matrix is singular".into()))?);
        }
        let q = &self.quiver;
        let mats = q
            .arrow_ids()
            .map(|a| &(&g[q.head(a).index()] * self.matrix(a)) * &inverses[q.tail(a).index()])
            .collect();
        RepPoint::new(q, self.dims.clone(), mats)
    }

    /// `ρ(p)`, the product along the path, of shape `n_head × n_tail`.
    pub fn path_matrix(&self, p: &Path) -> Matrix {
        let mut acc = Matrix::identity(self.dims.get(p.head()));
        for a in p.arrows() {
            acc = &acc * self.matrix(*a);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let q = &self.quiver;
        let dims: Map<String, Value> = q
            .vertices()
            .map(|v| (q.vertex_name(v).to_owned(), json!(self.dims.get(v))))
            .collect();
        let mats: Map<String, Value> = q
            .arrow_ids()
            .map(|a| (q.arrow_name(a).to_owned(), matrix_to_json(self.matrix(a))))
            .collect();
        json!({ "dims": dims, "mats": mats })
    }

    /// Arrows missing from `mats` are zero.
    pub fn from_json(quiver: &Arc<Quiver>, v: &Value) -> Result<Self> {
        let dims_obj = v
            .get("dims")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Input("rep point needs a `dims` object".into()))?;
        let mut dims = vec![0; quiver.vertex_count()];
        for (name, n) in dims_obj {
            let vid = quiver.find_vertex(name)?;
            dims[vid.index()] = n
                .as_u64()
                .ok_or_else(|| Error::Input(format!("dimension at `{name}` must be a nonnegative integer")))?
                as usize;
        }
        let dims = DimensionVector::new(quiver, dims)?;
        let mut point = RepPoint::zero(quiver, dims);
        if let Some(mats) = v.get("mats") {
            let mats = mats
                .as_object()
                .ok_or_else(|| Error::Input("`mats` must be an object".into()))?;
            for (name, m) in mats {
                let a = quiver.find_arrow(name)?;
                point.set_matrix(a, matrix_from_json(m, name)?)?;
            }
        }
        Ok(point)
    }
}

fn check_point(q: &Arc<Quiver>, rho: &RepPoint) -> Result<()> {
    if same_quiver(q, &rho.quiver) {
        Ok(())
    } else {
        Err(Error::QuiverMismatch)
    }
}

/// `tr f(ρ)`: traces of cycle products, plus `Σ c_i n_i` for the degree-0 part.
pub fn trace_evaluate(f: &Necklace, rho: &RepPoint) -> Result<Rational> {
    check_point(f.quiver(), rho)?;
    let mut total = Rational::zero();
    for (p, c) in f.terms() {
        total += c * rho.path_matrix(p).trace();
    }
    Ok(total)
}

/// The trace of the closed-path part of `f`, computed term by term without
/// reducing to necklaces first. Open paths contribute nothing.
pub fn trace_evaluate_element(f: &PathAlgebraElement, rho: &RepPoint) -> Result<Rational> {
    check_point(f.quiver(), rho)?;
    let mut total = Rational::zero();
    for (p, c) in f.terms().iter().filter(|(p, _)| p.is_closed()) {
        total += c * rho.path_matrix(p).trace();
    }
    Ok(total)
}

/// One commuting variable per matrix entry of every arrow.
#[derive(Clone, Debug)]
pub struct EntryLayout {
    quiver: Arc<Quiver>,
    dims: DimensionVector,
    offsets: Vec<u32>,
    count: u32,
}

impl EntryLayout {
    pub fn new(quiver: &Arc<Quiver>, dims: &DimensionVector) -> Self {
        let mut offsets = Vec::with_capacity(quiver.arrow_count());
        let mut count = 0u32;
        for a in quiver.arrow_ids() {
            offsets.push(count);
            let (r, c) = dims.shape(quiver, a);
            count += (r * c) as u32;
        }
        Self {
            quiver: quiver.clone(),
            dims: dims.clone(),
            offsets,
            count,
        }
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn variable_count(&self) -> u32 {
        self.count
    }

    pub fn var(&self, a: ArrowId, i: usize, j: usize) -> u32 {
        let (_, cols) = self.dims.shape(&self.quiver, a);
        self.offsets[a.index()] + (i * cols + j) as u32
    }

    /// `(arrow, row, column)` of a variable.
    pub fn entry(&self, v: u32) -> (ArrowId, usize, usize) {
        let k = self.offsets.partition_point(|&o| o <= v) - 1;
        // skip arrows with empty matrices that share the offset
        let k = (k..self.offsets.len())
            .rev()
            .find(|&k| self.offsets[k] <= v && {
                let (r, c) = self.dims.shape(&self.quiver, ArrowId(k as u32));
                v < self.offsets[k] + (r * c) as u32
            })
            .expect("variable out of range");
        let a = ArrowId(k as u32);
        let (_, cols) = self.dims.shape(&self.quiver, a);
        let local = (v - self.offsets[k]) as usize;
        (a, local / cols, local % cols)
    }

    /// `x[i,j]` with 1-based indices.
    pub fn name(&self, v: u32) -> String {
        let (a, i, j) = self.entry(v);
        format!("{}[{},{}]", self.quiver.arrow_name(a), i + 1, j + 1)
    }

    pub fn value_at(&self, rho: &RepPoint, v: u32) -> Rational {
        let (a, i, j) = self.entry(v);
        rho.matrix(a)[(i, j)].clone()
    }

    /// The matrix of indeterminates of `a`.
    pub fn entry_matrix(&self, a: ArrowId) -> Vec<Vec<Polynomial>> {
        let (r, c) = self.dims.shape(&self.quiver, a);
        (0..r)
            .map(|i| (0..c).map(|j| Polynomial::var(self.var(a, i, j))).collect())
            .collect()
    }
}

/// `f` as a polynomial in matrix entries: `Σ_{i_0..i_{L-1}} Π ρ(a_k)_{i_k i_{k+1}}`.
pub fn trace_polynomial(f: &Necklace, dims: &DimensionVector) -> Result<Polynomial> {
    let q = f.quiver();
    if dims.as_slice().len() != q.vertex_count() {
        return Err(Error::Input("dimension vector does not match the quiver".into()));
    }
    let layout = EntryLayout::new(q, dims);
    let mut terms: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for (p, c) in f.terms() {
        if p.is_empty() {
            let n = Rational::from_integer(dims.get(p.head()).into());
            accumulate(&mut terms, Vec::new(), c * n);
            continue;
        }
        let start_dim = dims.get(p.head());
        let mut vars = Vec::with_capacity(p.len());
        for i0 in 0..start_dim {
            index_cycles(&layout, p.arrows(), 0, i0, i0, &mut vars, &mut |m| {
                let mut m = m.to_vec();
                m.sort_unstable();
                accumulate(&mut terms, m, c.clone());
            });
        }
    }
    Ok(Polynomial::from_terms(terms))
}

fn index_cycles(
    layout: &EntryLayout,
    word: &[ArrowId],
    k: usize,
    row: usize,
    first: usize,
    vars: &mut Vec<u32>,
    emit: &mut dyn FnMut(&[u32]),
) {
    let a = word[k];
    let (_, cols) = layout.dims.shape(&layout.quiver, a);
    if k + 1 == word.len() {
        vars.push(layout.var(a, row, first));
        emit(vars);
        vars.pop();
        return;
    }
    for col in 0..cols {
        vars.push(layout.var(a, row, col));
        index_cycles(layout, word, k + 1, col, first, vars, emit);
        vars.pop();
    }
}

/// The canonical Poisson bracket on `T*R(Q,V)`:
/// `{a_ij, (a*)_kl} = δ_il δ_jk` for base arrows `a`, as a biderivation.
pub fn poisson_oracle(f: &Polynomial, g: &Polynomial, dims: &DimensionVector, omega: &SymplecticData) -> Polynomial {
    let layout = EntryLayout::new(omega.quiver(), dims);
    let dq = omega.doubled();
    let mut out = Polynomial::zero();
    let g_vars = g.variables();
    for u in f.variables() {
        let (a, i, j) = layout.entry(u);
        let partner = layout.var(dq.star(a), j, i);
        if g_vars.binary_search(&partner).is_err() {
            continue;
        }
        let sign = if dq.is_base(a) { Rational::one() } else { -Rational::one() };
        let term = &f.derivative(u) * &g.derivative(partner);
        out.add_assign_scaled(&term, &sign);
    }
    out
}

/// Both sides of `{tr f, tr g} = tr {f, g}` and their difference.
#[derive(Clone, Debug)]
pub struct HomomorphismCheck {
    pub equal: bool,
    pub lhs: Polynomial,
    pub rhs: Polynomial,
    pub residual: Polynomial,
}

pub fn verify_homomorphism(
    f: &Necklace,
    g: &Necklace,
    dims: &DimensionVector,
    omega: &SymplecticData,
) -> Result<HomomorphismCheck> {
    verify_homomorphism_with(f, g, dims, omega, &poisson_oracle)
}

/// Runs the check against an arbitrary coordinate bracket.
pub fn verify_homomorphism_with(
    f: &Necklace,
    g: &Necklace,
    dims: &DimensionVector,
    omega: &SymplecticData,
    oracle: &dyn Fn(&Polynomial, &Polynomial, &DimensionVector, &SymplecticData) -> Polynomial,
) -> Result<HomomorphismCheck> {
    if !same_quiver(f.quiver(), omega.quiver()) || !same_quiver(g.quiver(), omega.quiver()) {
        return Err(Error::QuiverMismatch);
    }
    let tf = trace_polynomial(f, dims)?;
    let tg = trace_polynomial(g, dims)?;
    let lhs = oracle(&tf, &tg, dims, omega);
    let rhs = trace_polynomial(&omega.bracket(f, g), dims)?;
    let residual = &lhs - &rhs;
    Ok(HomomorphismCheck {
        equal: residual.is_zero(),
        lhs,
        rhs,
        residual,
    })
}

/// The value of the moment map: one square matrix per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentValue(pub Vec<Matrix>);

impl MomentValue {
    pub fn component(&self, v: VertexId) -> &Matrix {
        &self.0[v.index()]
    }

    /// `Σ_i tr μ_i`, always zero.
    pub fn trace_sum(&self) -> Rational {
        self.0.iter().map(Matrix::trace).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Matrix::is_zero)
    }
}

/// `μ_i = Σ_{head(a)=i} ρ(a)ρ(a*) − Σ_{tail(a)=i} ρ(a*)ρ(a)` over base arrows.
pub fn moment_map(rho: &RepPoint, omega: &SymplecticData) -> Result<MomentValue> {
    check_point(omega.quiver(), rho)?;
    let q = omega.quiver();
    let dq = omega.doubled();
    let mut comps: Vec<Matrix> = q
        .vertices()
        .map(|v| Matrix::zeros(rho.dims.get(v), rho.dims.get(v)))
        .collect();
    for a in dq.base_arrows() {
        let (x, y) = (rho.matrix(a), rho.matrix(dq.star(a)));
        let h = q.head(a).index();
        comps[h] = &comps[h] + &(x * y);
        let t = q.tail(a).index();
        comps[t] = &comps[t] - &(y * x);
    }
    Ok(MomentValue(comps))
}

type PolyMatrix = Vec<Vec<Polynomial>>;

fn poly_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Polynomial::zero(), |acc, (x, brow)| &acc + &(x * &brow[j]))
                })
                .collect()
        })
        .collect()
}

/// `H_ξ = Σ_i tr(ξ_i μ_i)` as a polynomial in the entries.
pub fn moment_hamiltonian(xi: &[Matrix], dims: &DimensionVector, omega: &SymplecticData) -> Result<Polynomial> {
    let q = omega.quiver();
    let dq = omega.doubled();
    check_xi(q, xi, dims)?;
    let layout = EntryLayout::new(q, dims);
    let mut h = Polynomial::zero();
    let mut add_trace = |xi_v: &Matrix, m: &PolyMatrix, sign: &Rational| {
        for (r, row) in m.iter().enumerate() {
            for (s, entry) in row.iter().enumerate() {
                let k = &xi_v[(s, r)] * sign;
                if !k.is_zero() {
                    h.add_assign_scaled(entry, &k);
                }
            }
        }
    };
    for a in dq.base_arrows() {
        let x = layout.entry_matrix(a);
        let y = layout.entry_matrix(dq.star(a));
        add_trace(&xi[q.head(a).index()], &poly_mul(&x, &y), &Rational::one());
        add_trace(&xi[q.tail(a).index()], &poly_mul(&y, &x), &-Rational::one());
    }
    Ok(h)
}

fn check_xi(q: &Quiver, xi: &[Matrix], dims: &DimensionVector) -> Result<()> {
    if xi.len() != q.vertex_count() {
        return Err(Error::Input("need one matrix per vertex".into()));
    }
    for v in q.vertices() {
        let n = dims.get(v);
        let m = &xi[v.index()];
        if m.shape() != (n, n) {
            return Err(Error::Shape {
                what: format!("xi at vertex {}", q.vertex_name(v)),
                expected_rows: n,
                expected_cols: n,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
    }
    Ok(())
}

/// Entries where `{b, H_ξ}` differs from the infinitesimal conjugation
/// `ξ_head(b) B − B ξ_tail(b)`, with the difference. Empty means the action is
/// generated by `H_ξ`.
pub fn moment_hamiltonian_residuals(
    xi: &[Matrix],
    dims: &DimensionVector,
    omega: &SymplecticData,
) -> Result<Vec<(String, Polynomial)>> {
    let q = omega.quiver();
    let h = moment_hamiltonian(xi, dims, omega)?;
    let layout = EntryLayout::new(q, dims);
    let mut out = Vec::new();
    for b in q.arrow_ids() {
        let (rows, cols) = dims.shape(q, b);
        let xh = &xi[q.head(b).index()];
        let xt = &xi[q.tail(b).index()];
        for r in 0..rows {
            for s in 0..cols {
                let var = layout.var(b, r, s);
                let lhs = poisson_oracle(&Polynomial::var(var), &h, dims, omega);
                let mut expected = Polynomial::zero();
                for k in 0..rows {
                    expected.add_assign_scaled(&Polynomial::var(layout.var(b, k, s)), &xh[(r, k)]);
                }
                for k in 0..cols {
                    expected.add_assign_scaled(&Polynomial::var(layout.var(b, r, k)), &-xt[(k, s)].clone());
                }
                let diff = &lhs - &expected;
                if !diff.is_zero() {
                    out.push((layout.name(var), diff));
                }
            }
        }
    }
    Ok(out)
}

/// A multilinear necklace over a quiver in which each arrow has been split
/// into copies, together with the map back to the original arrows.
#[derive(Clone, Debug)]
pub struct Polarization {
    pub original: Arc<Quiver>,
    pub quiver: Arc<Quiver>,
    pub necklace: Necklace,
    /// `origin[c]` is the original arrow of copy `c`.
    pub origin: Vec<ArrowId>,
}

impl Polarization {
    /// Replaces every copy by its original arrow.
    pub fn reidentify(&self) -> Necklace {
        let terms = self.necklace.terms().iter().map(|(p, c)| {
            let arrows = p.arrows().iter().map(|a| self.origin[a.index()]).collect();
            let path = Path::from_arrows(&self.original, arrows).unwrap_or_else(|_| p.clone());
            (path, c.clone())
        });
        Necklace::from_terms(&self.original, terms)
    }
}

/// Full multilinearization of `f`, which must contain each arrow `a` exactly
/// `multiplicities[a]` times in every term. Copies of `x` are `x_1, x_2, …`
/// (and `x_1*, …` for starred arrows).
pub fn polarize(f: &Necklace, multiplicities: &[usize]) -> Result<Polarization> {
    let q = f.quiver();
    if multiplicities.len() != q.arrow_count() {
        return Err(Error::Input(format!(
            "expected {} multiplicities, got {}",
            q.arrow_count(),
            multiplicities.len()
        )));
    }
    for p in f.terms().keys() {
        if p.multidegree(q.arrow_count()) != multiplicities {
            return Err(Error::NotHomogeneous(format!(
                "term {} does not have the requested multiplicities",
                p.display(q)
            )));
        }
    }
    let mut arrows = Vec::new();
    let mut origin = Vec::new();
    let mut copies: Vec<Vec<ArrowId>> = Vec::new();
    for a in q.arrow_ids() {
        let arrow = q.arrow(a);
        let (stem, star) = match arrow.name.strip_suffix(crate::quiver::STAR) {
            Some(s) => (s, "*"),
            None => (arrow.name.as_str(), ""),
        };
        let m = multiplicities[a.index()];
        let names: Vec<String> = if m == 0 {
            vec![arrow.name.clone()]
        } else {
            (1..=m).map(|k| format!("{stem}_{k}{star}")).collect()
        };
        let mut ids = Vec::new();
        for name in names {
            ids.push(ArrowId(arrows.len() as u32));
            origin.push(a);
            arrows.push((
                name,
                q.vertex_name(arrow.tail).to_owned(),
                q.vertex_name(arrow.head).to_owned(),
            ));
        }
        copies.push(ids);
    }
    let vertices = q.vertices().map(|v| q.vertex_name(v).to_owned()).collect();
    let expanded = Arc::new(Quiver::build(vertices, arrows, true)?);
    let mut terms: BTreeMap<Path, Rational> = BTreeMap::new();
    for (p, c) in f.terms() {
        if p.is_empty() {
            accumulate(&mut terms, p.clone(), c.clone());
            continue;
        }
        let mut word = vec![ArrowId(0); p.len()];
        let mut used: Vec<Vec<bool>> = multiplicities.iter().map(|&m| vec![false; m]).collect();
        assign_copies(p.arrows(), 0, &copies, &mut used, &mut word, &mut |w| {
            let path = Path::from_parts(p.head(), p.tail(), w.to_vec());
            let canon = canonical_cycle(&expanded, &path).expect("closed");
            accumulate(&mut terms, canon, c.clone());
        });
    }
    let necklace = Necklace::from_terms(&expanded, terms);
    Ok(Polarization {
        original: q.clone(),
        quiver: expanded,
        necklace,
        origin,
    })
}

fn assign_copies(
    word: &[ArrowId],
    k: usize,
    copies: &[Vec<ArrowId>],
    used: &mut [Vec<bool>],
    out: &mut [ArrowId],
    emit: &mut dyn FnMut(&[ArrowId]),
) {
    if k == word.len() {
        emit(out);
        return;
    }
    let a = word[k].index();
    for slot in 0..used[a].len() {
        if used[a][slot] {
            continue;
        }
        used[a][slot] = true;
        out[k] = copies[a][slot];
        assign_copies(word, k + 1, copies, used, out, emit);
        used[a][slot] = false;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeVerdict {
    /// `f` lies in `[A, A]` and vanished at every sampled point.
    Kernel,
    /// A point with nonzero trace.
    Witness { n: usize, point: RepPoint, value: Rational },
    Inconclusive,
}

/// Searches for a matrix point where `tr f ≠ 0`, trying sizes `1..=max_n`
/// with `trials` random points each (entries in `-3..=3`). Elements of
/// `[A, A]` are instead checked to vanish everywhere sampled.
pub fn trace_vanishing_probe(f: &PathAlgebraElement, max_n: usize, trials: usize, seed: u64) -> Result<ProbeVerdict> {
    let q = f.quiver();
    if q.vertex_count() != 1 {
        return Err(Error::NotOneVertex);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_kernel = project_to_necklace(f).is_zero();
    for n in 1..=max_n {
        let dims = DimensionVector::uniform(q, n)?;
        for _ in 0..trials {
            let point = RepPoint::random(q, dims.clone(), &mut rng, 3);
            let value = trace_evaluate_element(f, &point)?;
            match (in_kernel, value.is_zero()) {
                (true, false) => return Err(Error::KernelViolation),
                (false, false) => return Ok(ProbeVerdict::Witness { n, point, value }),
                _ => {}
            }
        }
    }
    Ok(if in_kernel {
        ProbeVerdict::Kernel
    } else {
        ProbeVerdict::Inconclusive
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;
    use crate::quiver::DoubledQuiver;

    fn one_loop() -> (SymplecticData, Arc<Quiver>) {
        let omega = SymplecticData::one_loop();
        let q = omega.quiver().clone();
        (omega, q)
    }

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    fn cyc(q: &Arc<Quiver>, word: &[u32]) -> Necklace {
        let p = Path::from_arrows(q, word.iter().map(|&a| ArrowId(a)).collect()).unwrap();
        Necklace::cycle(q, p)
    }

    fn nilpotent_pair(q: &Arc<Quiver>) -> RepPoint {
        let dims = DimensionVector::uniform(q, 2).unwrap();
        RepPoint::new(q, dims, vec![m(&[&[0, 1], &[0, 0]]), m(&[&[0, 0], &[1, 0]])]).unwrap()
    }

    #[test]
    fn trace_evaluate_examples() {
        let (_, q) = one_loop();
        let rho = nilpotent_pair(&q);
        assert_eq!(trace_evaluate(&cyc(&q, &[0, 1]), &rho).unwrap(), int(1));
        let x = PathAlgebraElement::arrow(&q, ArrowId(0));
        let y = PathAlgebraElement::arrow(&q, ArrowId(1));
        let comm = &(&x * &y) - &(&y * &x);
        assert_eq!(trace_evaluate_element(&comm, &rho).unwrap(), int(0));
        let dims3 = DimensionVector::uniform(&q, 3).unwrap();
        let unit = Necklace::vertex(&q, VertexId(0));
        assert_eq!(trace_evaluate(&unit, &RepPoint::zero(&q, dims3)).unwrap(), int(3));
    }

    #[test]
    fn shape_errors_are_reported() {
        let (_, q) = one_loop();
        let dims = DimensionVector::uniform(&q, 2).unwrap();
        let err = RepPoint::new(&q, dims, vec![m(&[&[1]]), m(&[&[1, 0], &[0, 1]])]).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn trace_polynomial_examples() {
        let (_, q) = one_loop();
        let d2 = DimensionVector::uniform(&q, 2).unwrap();
        let layout = EntryLayout::new(&q, &d2);
        let x = |i, j| Polynomial::var(layout.var(ArrowId(0), i, j));
        let tx = trace_polynomial(&cyc(&q, &[0]), &d2).unwrap();
        assert_eq!(tx, &x(0, 0) + &x(1, 1));
        let tx2 = trace_polynomial(&cyc(&q, &[0, 0]), &d2).unwrap();
        let expected = &(&(&x(0, 0) * &x(0, 0)) + &(&x(0, 1) * &x(1, 0)).scale(&int(2))) + &(&x(1, 1) * &x(1, 1));
        assert_eq!(tx2, expected);
        let d1 = DimensionVector::uniform(&q, 1).unwrap();
        let txy = trace_polynomial(&cyc(&q, &[0, 1]), &d1).unwrap();
        assert_eq!(txy, &Polynomial::var(0) * &Polynomial::var(1));
    }

    #[test]
    fn moment_map_examples() {
        let (omega, q) = one_loop();
        let mu = moment_map(&nilpotent_pair(&q), &omega).unwrap();
        assert_eq!(mu.0[0], m(&[&[1, 0], &[0, -1]]));
        assert_eq!(mu.trace_sum(), int(0));
        let zero = RepPoint::zero(&q, DimensionVector::uniform(&q, 2).unwrap());
        assert!(moment_map(&zero, &omega).unwrap().is_zero());

        let a2 = Quiver::new(["1", "2"], [("a", "1", "2")]).unwrap();
        let omega = SymplecticData::new(DoubledQuiver::new(a2).unwrap());
        let q = omega.quiver().clone();
        let dims = DimensionVector::new(&q, vec![1, 1]).unwrap();
        let rho = RepPoint::new(&q, dims, vec![m(&[&[2]]), m(&[&[3]])]).unwrap();
        let mu = moment_map(&rho, &omega).unwrap();
        assert_eq!(mu.0, vec![m(&[&[-6]]), m(&[&[6]])]);
    }

    #[test]
    fn poisson_oracle_examples() {
        let (omega, q) = one_loop();
        for n in 1..=3 {
            let d = DimensionVector::uniform(&q, n).unwrap();
            let tx = trace_polynomial(&cyc(&q, &[0]), &d).unwrap();
            let ty = trace_polynomial(&cyc(&q, &[1]), &d).unwrap();
            assert_eq!(poisson_oracle(&tx, &ty, &d, &omega), Polynomial::constant(int(n as i64)));
            assert!(poisson_oracle(&tx, &tx, &d, &omega).is_zero());
        }
        let d = DimensionVector::uniform(&q, 2).unwrap();
        let tx2 = trace_polynomial(&cyc(&q, &[0, 0]), &d).unwrap();
        let ty2 = trace_polynomial(&cyc(&q, &[1, 1]), &d).unwrap();
        let txy = trace_polynomial(&cyc(&q, &[0, 1]), &d).unwrap();
        assert_eq!(poisson_oracle(&tx2, &ty2, &d, &omega), txy.scale(&int(4)));
    }

    #[test]
    fn homomorphism_examples() {
        let (omega, q) = one_loop();
        let d = DimensionVector::uniform(&q, 2).unwrap();
        let check = verify_homomorphism(&cyc(&q, &[0, 0]), &cyc(&q, &[1, 1]), &d, &omega).unwrap();
        assert!(check.equal);
        let unit = Necklace::vertex(&q, VertexId(0));
        let check = verify_homomorphism(&cyc(&q, &[0, 1, 1]), &unit, &d, &omega).unwrap();
        assert!(check.equal && check.lhs.is_zero());
        let flipped = |f: &Polynomial, g: &Polynomial, d: &DimensionVector, o: &SymplecticData| -&poisson_oracle(f, g, d, o);
        let bad = verify_homomorphism_with(&cyc(&q, &[0]), &cyc(&q, &[1]), &d, &omega, &flipped).unwrap();
        assert!(!bad.equal);
    }

    #[test]
    fn moment_map_generates_conjugation() {
        let (omega, q) = one_loop();
        let d = DimensionVector::uniform(&q, 2).unwrap();
        let xi = vec![m(&[&[1, 2], &[-1, 3]])];
        assert!(moment_hamiltonian_residuals(&xi, &d, &omega).unwrap().is_empty());
    }

    #[test]
    fn polarize_examples() {
        let (_, q) = one_loop();
        let pol = polarize(&cyc(&q, &[0, 1]), &[1, 1]).unwrap();
        assert_eq!(pol.necklace.to_string(), "cyc(x_1 x_1*)");
        let pol = polarize(&cyc(&q, &[0, 0]), &[2, 0]).unwrap();
        assert_eq!(pol.necklace.to_string(), "2 cyc(x_1 x_2)");
        assert_eq!(pol.reidentify(), cyc(&q, &[0, 0]).scale(&int(2)));
        assert!(matches!(polarize(&cyc(&q, &[0, 0]), &[1, 1]), Err(Error::NotHomogeneous(_))));
    }

    #[test]
    fn probe_examples() {
        let (_, q) = one_loop();
        let x = PathAlgebraElement::arrow(&q, ArrowId(0));
        let y = PathAlgebraElement::arrow(&q, ArrowId(1));
        let comm = &(&x * &y) - &(&y * &x);
        assert_eq!(trace_vanishing_probe(&comm, 3, 5, 1).unwrap(), ProbeVerdict::Kernel);
        assert!(matches!(
            trace_vanishing_probe(&x, 2, 20, 1).unwrap(),
            ProbeVerdict::Witness { n: 1, .. }
        ));
        let x2y2 = &(&x * &x) * &(&y * &y);
        let xyxy = &(&x * &y) * &(&x * &y);
        match trace_vanishing_probe(&(&x2y2 - &xyxy), 2, 50, 7).unwrap() {
            ProbeVerdict::Witness { n, point, value } => {
                assert_eq!(n, 2);
                assert_eq!(trace_evaluate_element(&(&x2y2 - &xyxy), &point).unwrap(), value);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn rep_point_json_round_trip() {
        let (_, q) = one_loop();
        let mut rho = nilpotent_pair(&q);
        rho.set_matrix(ArrowId(0), m(&[&[1, -2], &[0, 5]]).scale(&Rational::new(1.into(), 3.into()))).unwrap();
        let back = RepPoint::from_json(&q, &rho.to_json()).unwrap();
        assert_eq!(back, rho);
    }
}
