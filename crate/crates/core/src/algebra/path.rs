use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::quiver::{ArrowId, GradedQuiver, VertexId};
use super::{coeff_to_string, Coeff};
use crate::error::{Error, Result};

/// A path in a quiver. The empty path at `v` is the idempotent `e_v`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub arrows: Vec<ArrowId>,
    pub start: VertexId,
    pub end: VertexId,
}

impl Path {
    pub fn idempotent(v: VertexId) -> Path {
        Path { arrows: Vec::new(), start: v, end: v }
    }

    pub fn arrow(q: &GradedQuiver, a: ArrowId) -> Path {
        let ar = q.arrow(a);
        Path { arrows: vec![a], start: ar.src, end: ar.tgt }
    }

    /// Build a path from arrows, checking composability.
    pub fn from_arrows(q: &GradedQuiver, arrows: &[ArrowId]) -> Result<Path> {
        let (first, rest) = arrows
            .split_first()
            .ok_or_else(|| Error::NotComposable("empty arrow list".into()))?;
        let mut p = Path::arrow(q, *first);
        for &a in rest {
            p = p.compose(&Path::arrow(q, a)).ok_or_else(|| {
                Error::NotComposable(format!("{} does not start where the path ends", q.name(a)))
            })?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn degree(&self, q: &GradedQuiver) -> i64 {
        self.arrows.iter().map(|&a| q.deg(a)).sum()
    }

    pub fn is_cycle(&self) -> bool {
        !self.arrows.is_empty() && self.start == self.end
    }

    pub fn compose(&self, other: &Path) -> Option<Path> {
        if self.end != other.start {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&other.arrows);
        Some(Path { arrows, start: self.start, end: other.end })
    }

    pub fn contains(&self, a: ArrowId) -> bool {
        self.arrows.contains(&a)
    }

    pub fn display(&self, q: &GradedQuiver) -> String {
        if self.arrows.is_empty() {
            format!("e_{}", q.vertices[self.start])
        } else {
            self.arrows.iter().map(|&a| q.name(a)).collect::<Vec<_>>().join("·")
        }
    }
}

/// A finite linear combination of paths with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PathSum {
    terms: BTreeMap<Path, Coeff>,
}

impl PathSum {
    pub fn zero() -> PathSum {
        PathSum::default()
    }

    pub fn from_path(p: Path) -> PathSum {
        PathSum::term(p, Coeff::one())
    }

    pub fn term(p: Path, c: Coeff) -> PathSum {
        let mut s = PathSum::zero();
        s.add_term(p, c);
        s
    }

    pub fn arrow(q: &GradedQuiver, a: ArrowId) -> PathSum {
        PathSum::from_path(Path::arrow(q, a))
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

    pub fn terms(&self) -> impl Iterator<Item = (&Path, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff_of(&self, p: &Path) -> Coeff {
        self.terms.get(p).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, p: Path, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &PathSum) {
        for (p, c) in &other.terms {
            self.add_term(p.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &PathSum) -> PathSum {
        let mut s = self.clone();
        s.add_assign(other);
        s
    }

    pub fn sub(&self, other: &PathSum) -> PathSum {
        self.add(&other.scale(&-Coeff::one()))
    }

    pub fn scale(&self, c: &Coeff) -> PathSum {
        if c.is_zero() {
            return PathSum::zero();
        }
        PathSum { terms: self.terms.iter().map(|(p, v)| (p.clone(), v * c)).collect() }
    }

    pub fn neg(&self) -> PathSum {
        self.scale(&-Coeff::one())
    }

    /// Product in the path algebra; non-composable pairs vanish.
    pub fn mul(&self, other: &PathSum) -> PathSum {
        let mut out = PathSum::zero();
        for (p, a) in &self.terms {
            for (r, b) in &other.terms {
                if let Some(pr) = p.compose(r) {
                    out.add_term(pr, a * b);
                }
            }
        }
        out
    }

    /// Keep only the terms satisfying a predicate.
    pub fn filter(&self, mut keep: impl FnMut(&Path) -> bool) -> PathSum {
        PathSum { terms: self.terms.iter().filter(|(p, _)| keep(p)).map(|(p, c)| (p.clone(), c.clone())).collect() }
    }

    /// Whether every term has the given degree.
    pub fn is_homogeneous(&self, q: &GradedQuiver, deg: i64) -> bool {
        self.terms.keys().all(|p| p.degree(q) == deg)
    }

    /// Rename arrows through `f`; terms with an arrow mapped to `None` vanish.
    pub fn map_arrows(&self, f: impl Fn(ArrowId) -> Option<ArrowId>) -> PathSum {
        let mut out = PathSum::zero();
        'terms: for (p, c) in self.terms() {
            let mut arrows = Vec::with_capacity(p.len());
            for &a in &p.arrows {
                match f(a) {
                    Some(b) => arrows.push(b),
                    None => continue 'terms,
                }
            }
            out.add_term(Path { arrows, start: p.start, end: p.end }, c.clone());
        }
        out
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|p| p.len()).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.terms.keys().map(|p| p.len()).min().unwrap_or(0)
    }

    pub fn display(&self, q: &GradedQuiver) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let neg = c < &Coeff::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&coeff_to_string(&abs));
                out.push(' ');
            }
            out.push_str(&p.display(q));
        }
        out
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.arrows)
    }
}
