use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{sign, Coeff};
use crate::error::{Error, Result};

pub type VertexId = usize;
pub type ArrowId = usize;

/// Where an arrow came from. Used for display names and for recognising
/// superfluous pairs after mutation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Plain,
    /// Pre-quiver arrow between two occurrences inside one face.
    Face { face: usize, src: String, tgt: String },
    /// Ginzburg loop.
    Loop,
    Star { alpha: String },
    StarOp { alpha: String },
    /// The formal composite `alpha phi`.
    Comp { alpha: String, phi: String },
    /// The formal composite `psi alpha^{-1}`.
    CompInv { psi: String, alpha: String },
    /// The formal composite `alpha phi beta^{-1}`.
    Sandwich { alpha: String, phi: String, beta: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub id: String,
    pub src: VertexId,
    pub tgt: VertexId,
    pub deg: i64,
    pub origin: Origin,
}

/// One end of an opposite pairing. The designated end stores the sign
/// `s` with `op(x) = s * partner`; the other end derives its sign so that
/// `op(op(x)) = -(-1)^{|x||op x|} x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpLink {
    pub partner: ArrowId,
    pub designated: bool,
    pub sign: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedQuiver {
    pub d: usize,
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub op: Vec<Option<OpLink>>,
}

impl GradedQuiver {
    pub fn new(d: usize) -> Self {
        GradedQuiver { d, vertices: Vec::new(), arrows: Vec::new(), op: Vec::new() }
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> VertexId {
        let name = name.into();
        if let Some(v) = self.vertex(&name) {
            return v;
        }
        self.vertices.push(name);
        self.vertices.len() - 1
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn add_arrow(&mut self, id: impl Into<String>, src: VertexId, tgt: VertexId, deg: i64, origin: Origin) -> ArrowId {
        self.arrows.push(Arrow { id: id.into(), src, tgt, deg, origin });
        self.op.push(None);
        self.arrows.len() - 1
    }

    pub fn arrow_id(&self, id: &str) -> Option<ArrowId> {
        self.arrows.iter().position(|a| a.id == id)
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a]
    }

    pub fn name(&self, a: ArrowId) -> &str {
        &self.arrows[a].id
    }

    pub fn deg(&self, a: ArrowId) -> i64 {
        self.arrows[a].deg
    }

    /// Pair `a` (designated) with `b`, so that `op(a) = s * b`.
    pub fn pair(&mut self, a: ArrowId, b: ArrowId, s: i64) {
        self.op[a] = Some(OpLink { partner: b, designated: true, sign: s });
        self.op[b] = Some(OpLink { partner: a, designated: false, sign: s });
    }

    /// `op(x) = (partner, scalar)`.
    pub fn op_apply(&self, x: ArrowId) -> Option<(ArrowId, Coeff)> {
        let link = self.op[x]?;
        let s = sign(if link.sign < 0 { 1 } else { 0 });
        if link.designated {
            Some((link.partner, s))
        } else {
            // op(op(p)) = s * op(x) must equal -(-1)^{|p||x|} p
            let e = self.deg(x) * self.deg(link.partner);
            Some((link.partner, -(sign(e) * s)))
        }
    }

    /// Arrows leaving a vertex, in index order.
    pub fn out_arrows(&self, v: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].src == v)
    }

    pub fn in_arrows(&self, v: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].tgt == v)
    }

    /// Check the pairing axioms of a quiver with superpotential.
    pub fn check_pairing(&self) -> Result<()> {
        let lo = 2 - self.d as i64;
        for (k, a) in self.arrows.iter().enumerate() {
            if a.deg > 0 || a.deg < lo {
                return Err(Error::InvalidQuiver(format!("arrow {} has degree {} outside [{lo}, 0]", a.id, a.deg)));
            }
            let Some(link) = self.op[k] else {
                return Err(Error::InvalidQuiver(format!("arrow {} has no opposite", a.id)));
            };
            let p = &self.arrows[link.partner];
            if p.src != a.tgt || p.tgt != a.src {
                return Err(Error::InvalidQuiver(format!("{} and its opposite {} are not reversed", a.id, p.id)));
            }
            if a.deg + p.deg != lo {
                return Err(Error::InvalidQuiver(format!("|{}| + |{}| != {lo}", a.id, p.id)));
            }
            let back = self.op[link.partner].map(|l| l.partner);
            if back != Some(k) || self.op[link.partner].unwrap().designated == link.designated {
                return Err(Error::InvalidQuiver(format!("pairing of {} is not symmetric", a.id)));
            }
        }
        Ok(())
    }

    /// The quiver without `drop`, and the old-to-new arrow index map.
    /// Pairings whose partner is dropped are cleared.
    pub fn without_arrows(&self, drop: &BTreeSet<ArrowId>) -> (GradedQuiver, Vec<Option<ArrowId>>) {
        let mut map = vec![None; self.arrows.len()];
        let mut out = GradedQuiver { d: self.d, vertices: self.vertices.clone(), arrows: Vec::new(), op: Vec::new() };
        for (k, a) in self.arrows.iter().enumerate() {
            if !drop.contains(&k) {
                map[k] = Some(out.arrows.len());
                out.arrows.push(a.clone());
            }
        }
        out.op = (0..self.arrows.len())
            .filter(|k| !drop.contains(k))
            .map(|k| {
                let link = self.op[k]?;
                Some(OpLink { partner: map[link.partner]?, ..link })
            })
            .collect();
        (out, map)
    }

    pub fn has_degree_zero_loop(&self, v: VertexId) -> bool {
        self.arrows.iter().any(|a| a.src == v && a.tgt == v && a.deg == 0)
    }

    /// Multiset of (source, target, degree) triples; a cheap iso invariant.
    pub fn arrow_signature(&self) -> BTreeMap<(usize, usize, i64), usize> {
        let mut m = BTreeMap::new();
        for a in &self.arrows {
            *m.entry((a.src, a.tgt, a.deg)).or_default() += 1;
        }
        m
    }
}
