//! Paths in a quiver.
//!
//! Paths compose like functions, right to left: the written word `b a` means
//! "first `a`, then `b`" and requires `head(a) = tail(b)`. With this
//! convention a representation is multiplicative, `ρ(p·q) = ρ(p)·ρ(q)`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::quiver::{ArrowId, Quiver, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    head: VertexId,
    tail: VertexId,
    arrows: Vec<ArrowId>,
}

/// Shorter paths first, then lexicographic on arrow ids, then endpoints.
impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arrows
            .len()
            .cmp(&other.arrows.len())
            .then_with(|| self.arrows.cmp(&other.arrows))
            .then_with(|| self.head.cmp(&other.head))
            .then_with(|| self.tail.cmp(&other.tail))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Path {
    /// The empty path at `v`, i.e. the idempotent `1_v`.
    pub fn idempotent(v: VertexId) -> Self {
        Self {
            head: v,
            tail: v,
            arrows: Vec::new(),
        }
    }

    pub fn arrow(q: &Quiver, a: ArrowId) -> Self {
        Self {
            head: q.head(a),
            tail: q.tail(a),
            arrows: vec![a],
        }
    }

    /// A nonempty path from its written word, checking composability.
    pub fn from_arrows(q: &Quiver, arrows: Vec<ArrowId>) -> Result<Self> {
        let (Some(&first), Some(&last)) = (arrows.first(), arrows.last()) else {
            return Err(Error::Input("a path needs at least one arrow".into()));
        };
        for w in arrows.windows(2) {
            if q.tail(w[0]) != q.head(w[1]) {
                return Err(Error::NotComposable {
                    left: q.arrow_name(w[0]).to_owned(),
                    right: q.arrow_name(w[1]).to_owned(),
                });
            }
        }
        Ok(Self {
            head: q.head(first),
            tail: q.tail(last),
            arrows,
        })
    }

    /// Caller guarantees composability and matching endpoints.
    pub(crate) fn from_parts(head: VertexId, tail: VertexId, arrows: Vec<ArrowId>) -> Self {
        Self { head, tail, arrows }
    }

    pub fn head(&self) -> VertexId {
        self.head
    }

    pub fn tail(&self) -> VertexId {
        self.tail
    }

    pub fn arrows(&self) -> &[ArrowId] {
        &self.arrows
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.head == self.tail
    }

    /// `self · other`, defined when `other` ends where `self` starts.
    pub fn compose(&self, other: &Path) -> Option<Path> {
        if self.tail != other.head {
            return None;
        }
        let mut arrows = Vec::with_capacity(self.arrows.len() + other.arrows.len());
        arrows.extend_from_slice(&self.arrows);
        arrows.extend_from_slice(&other.arrows);
        Some(Path {
            head: self.head,
            tail: other.tail,
            arrows,
        })
    }

    /// Number of occurrences of each arrow, indexed by arrow id.
    pub fn multidegree(&self, arrow_count: usize) -> Vec<usize> {
        let mut m = vec![0; arrow_count];
        for a in &self.arrows {
            m[a.index()] += 1;
        }
        m
    }

    pub fn display<'a>(&'a self, q: &'a Quiver) -> impl fmt::Display + 'a {
        PathDisplay { path: self, quiver: q }
    }
}

struct PathDisplay<'a> {
    path: &'a Path,
    quiver: &'a Quiver,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.arrows.is_empty() {
            return write!(f, "e({})", self.quiver.vertex_name(self.path.head));
        }
        for (i, a) in self.path.arrows.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.quiver.arrow_name(*a))?;
        }
        Ok(())
    }
}
