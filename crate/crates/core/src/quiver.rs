//! Quivers and their doubles.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved suffix marking the reverse arrow `a*` of a base arrow `a`.
pub const STAR: char = '*';

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ArrowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
}

/// A finite quiver with a stable ordering of vertices and arrows.
///
/// Arrow `a` goes from `tail(a)` to `head(a)`; the orderings are used as the
/// basis order for every normal form built on top of the quiver.
#[derive(Clone, Debug)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    vertex_index: HashMap<String, VertexId>,
    arrow_index: HashMap<String, ArrowId>,
}

impl PartialEq for Quiver {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.arrows == other.arrows
    }
}

impl Eq for Quiver {}

fn check_vertex_name(name: &str) -> Result<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "vertex names are nonempty and use [A-Za-z0-9_]",
        });
    }
    Ok(())
}

fn check_arrow_name(name: &str, allow_star: bool) -> Result<()> {
    let body = if allow_star { name.strip_suffix(STAR).unwrap_or(name) } else { name };
    if name.contains(STAR) && !allow_star {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "`*` is reserved for reverse arrows",
        });
    }
    let mut chars = body.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => false,
    };
    if !ok {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "arrow names are identifiers [A-Za-z_][A-Za-z0-9_]*",
        });
    }
    // `e` is the idempotent keyword of the expression language.
    if matches!(body, "e" | "cyc" | "d" | "i" | "L" | "theta") {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "name is a keyword of the expression language",
        });
    }
    Ok(())
}

impl Quiver {
    /// Builds a quiver from vertex names and `(name, tail, head)` triples.
    pub fn new<V, A, N, T, H>(vertices: V, arrows: A) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        A: IntoIterator<Item = (N, T, H)>,
        N: Into<String>,
        T: Into<String>,
        H: Into<String>,
    {
        let arrows = arrows.into_iter().map(|(n, t, h)| (n.into(), t.into(), h.into()));
        Self::build(vertices.into_iter().map(Into::into).collect(), arrows, false)
    }

    pub(crate) fn build(
        vertices: Vec<String>,
        arrows: impl IntoIterator<Item = (String, String, String)>,
        allow_star: bool,
    ) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            check_vertex_name(v)?;
            if vertex_index.insert(v.clone(), VertexId(i as u32)).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let mut arrow_list = Vec::new();
        let mut arrow_index = HashMap::new();
        for (name, tail, head) in arrows {
            check_arrow_name(&name, allow_star)?;
            let tail = *vertex_index.get(&tail).ok_or(Error::UnknownVertex(tail))?;
            let head = *vertex_index.get(&head).ok_or(Error::UnknownVertex(head))?;
            let id = ArrowId(arrow_list.len() as u32);
            if arrow_index.insert(name.clone(), id).is_some() {
                return Err(Error::DuplicateArrow(name));
            }
            arrow_list.push(Arrow { name, tail, head });
        }
        Ok(Self {
            vertices,
            arrows: arrow_list,
            vertex_index,
            arrow_index,
        })
    }

    /// One vertex `0` carrying the given loops.
    pub fn loops(names: &[&str]) -> Result<Self> {
        Self::new(
            ["0"],
            names.iter().map(|n| (n.to_string(), "0".to_owned(), "0".to_owned())),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn arrow_ids(&self) -> impl ExactSizeIterator<Item = ArrowId> + '_ {
        (0..self.arrows.len() as u32).map(ArrowId)
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.index()]
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn head(&self, a: ArrowId) -> VertexId {
        self.arrows[a.index()].head
    }

    pub fn tail(&self, a: ArrowId) -> VertexId {
        self.arrows[a.index()].tail
    }

    pub fn arrow_name(&self, a: ArrowId) -> &str {
        &self.arrows[a.index()].name
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.index()]
    }

    pub fn find_arrow(&self, name: &str) -> Result<ArrowId> {
        self.arrow_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownArrow(name.to_owned()))
    }

    pub fn find_vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_owned()))
    }

    /// Arrows whose head is `v`.
    pub fn arrows_into(&self, v: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.head(a) == v)
    }

    pub fn to_json(&self) -> QuiverJson {
        QuiverJson {
            vertices: self.vertices.iter().cloned().map(VertexName::Name).collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    name: a.name.clone(),
                    tail: VertexName::Name(self.vertex_name(a.tail).to_owned()),
                    head: VertexName::Name(self.vertex_name(a.head).to_owned()),
                })
                .collect(),
        }
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        let raw: QuiverJson = serde_json::from_str(src).map_err(|e| Error::Input(e.to_string()))?;
        raw.into_quiver()
    }
}

/// The double `Q̄` of a quiver: every base arrow `a` gets a reverse arrow `a*`.
///
/// Base arrows keep their ids `0..m` in the doubled quiver; the reverse of
/// base arrow `k` has id `m + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubledQuiver {
    base: Quiver,
    doubled: Arc<Quiver>,
}

impl DoubledQuiver {
    pub fn new(base: Quiver) -> Result<Self> {
        for a in base.arrows() {
            check_arrow_name(&a.name, false)?;
        }
        let names: Vec<String> = base.vertices.clone();
        let mut arrows: Vec<(String, String, String)> = base
            .arrows()
            .iter()
            .map(|a| {
                (
                    a.name.clone(),
                    base.vertex_name(a.tail).to_owned(),
                    base.vertex_name(a.head).to_owned(),
                )
            })
            .collect();
        arrows.extend(base.arrows().iter().map(|a| {
            (
                format!("{}{STAR}", a.name),
                base.vertex_name(a.head).to_owned(),
                base.vertex_name(a.tail).to_owned(),
            )
        }));
        let doubled = Quiver::build(names, arrows, true)?;
        Ok(Self {
            base,
            doubled: Arc::new(doubled),
        })
    }

    /// The one-loop quiver doubled: two loops `x`, `x*` at vertex `0`.
    pub fn one_loop() -> Self {
        Self::new(Quiver::loops(&["x"]).expect("valid quiver")).expect("valid quiver")
    }

    pub fn base(&self) -> &Quiver {
        &self.base
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.doubled
    }

    pub fn base_arrows(&self) -> impl ExactSizeIterator<Item = ArrowId> + '_ {
        self.base.arrow_ids()
    }

    pub fn is_base(&self, a: ArrowId) -> bool {
        a.index() < self.base.arrow_count()
    }

    pub fn star(&self, a: ArrowId) -> ArrowId {
        let m = self.base.arrow_count() as u32;
        if a.0 < m {
            ArrowId(a.0 + m)
        } else {
            ArrowId(a.0 - m)
        }
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices {{{}}}", self.vertices.join(", "))?;
        for a in &self.arrows {
            write!(
                f,
                "; {}: {} -> {}",
                a.name,
                self.vertex_name(a.tail),
                self.vertex_name(a.head)
            )?;
        }
        Ok(())
    }
}

/// Vertex identifiers in JSON may be strings or integers.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum VertexName {
    Number(i64),
    Name(String),
}

impl VertexName {
    fn into_string(self) -> String {
        match self {
            VertexName::Number(n) => n.to_string(),
            VertexName::Name(s) => s,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ArrowJson {
    pub name: String,
    pub tail: VertexName,
    pub head: VertexName,
}

/// `{"vertices": [...], "arrows": [{"name", "tail", "head"}]}`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuiverJson {
    pub vertices: Vec<VertexName>,
    #[serde(default)]
    pub arrows: Vec<ArrowJson>,
}

impl QuiverJson {
    pub fn into_quiver(self) -> Result<Quiver> {
        Quiver::new(
            self.vertices.into_iter().map(VertexName::into_string),
            self.arrows
                .into_iter()
                .map(|a| (a.name, a.tail.into_string(), a.head.into_string())),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> Quiver {
        Quiver::new(["1", "2"], [("a".to_owned(), "1".to_owned(), "2".to_owned())]).unwrap()
    }

    #[test]
    fn one_loop_doubles_to_two_loops() {
        let dq = DoubledQuiver::one_loop();
        let q = dq.quiver();
        assert_eq!(q.arrow_count(), 2);
        assert_eq!(q.arrow_name(ArrowId(1)), "x*");
        assert_eq!(q.head(ArrowId(1)), q.tail(ArrowId(1)));
    }

    #[test]
    fn reverse_arrow_swaps_endpoints() {
        let dq = DoubledQuiver::new(a2()).unwrap();
        let q = dq.quiver();
        let a = q.find_arrow("a").unwrap();
        let astar = q.find_arrow("a*").unwrap();
        assert_eq!(dq.star(a), astar);
        assert_eq!(dq.star(astar), a);
        assert_eq!(q.tail(astar), q.head(a));
        assert_eq!(q.head(astar), q.tail(a));
    }

    #[test]
    fn star_is_fixed_point_free_involution() {
        let q = Quiver::new(
            ["1", "2"],
            [
                ("a".to_owned(), "1".to_owned(), "2".to_owned()),
                ("b".to_owned(), "2".to_owned(), "2".to_owned()),
            ],
        )
        .unwrap();
        let dq = DoubledQuiver::new(q).unwrap();
        for a in dq.quiver().arrow_ids() {
            assert_ne!(dq.star(a), a);
            assert_eq!(dq.star(dq.star(a)), a);
        }
    }

    #[test]
    fn empty_quiver_doubles_to_empty() {
        let q = Quiver::new(["v"], std::iter::empty::<(&str, &str, &str)>()).unwrap();
        let dq = DoubledQuiver::new(q).unwrap();
        assert_eq!(dq.quiver().arrow_count(), 0);
    }

    #[test]
    fn rejects_bad_names() {
        let dup = Quiver::new(
            ["1"],
            [
                ("a".to_owned(), "1".to_owned(), "1".to_owned()),
                ("a".to_owned(), "1".to_owned(), "1".to_owned()),
            ],
        );
        assert_eq!(dup.unwrap_err(), Error::DuplicateArrow("a".into()));
        let star = Quiver::new(["1"], [("a*".to_owned(), "1".to_owned(), "1".to_owned())]);
        assert!(matches!(star, Err(Error::InvalidName { .. })));
        let missing = Quiver::new(["1"], [("a".to_owned(), "1".to_owned(), "2".to_owned())]);
        assert_eq!(missing.unwrap_err(), Error::UnknownVertex("2".into()));
    }

    #[test]
    fn json_accepts_numeric_vertices() {
        let q = Quiver::from_json_str(
            r#"{"vertices":[1,2],"arrows":[{"name":"a","tail":1,"head":2}]}"#,
        )
        .unwrap();
        assert_eq!(q, a2());
        let back = serde_json::to_string(&q.to_json()).unwrap();
        assert_eq!(Quiver::from_json_str(&back).unwrap(), q);
    }
}
