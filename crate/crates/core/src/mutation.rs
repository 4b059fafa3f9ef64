//! Oppermann mutation of a quiver with superpotential and its surface
//! variant, which additionally removes superfluous arrow pairs.
//!
//! Formal inverses `α^{-1}` only ever occur inside composite arrows of the
//! mutated quiver. Decoration works on words of [`Tok`]ens which are then
//! rebracketed into mutated arrows; a word that cannot be rebracketed is a
//! hard error rather than a guess.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::potential::rotate;
use crate::algebra::{
    ginzburg, repair_op_signs, sign, ArrowId, Coeff, DgQuiverAlgebra, GradedQuiver, Origin, Path, PathSum, Potential,
    VertexId,
};
use crate::error::{Error, Result};
use crate::qsp::Qsp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MutationMode {
    Oppermann,
    Surface,
}

impl std::str::FromStr for MutationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oppermann" => Ok(MutationMode::Oppermann),
            "surface" => Ok(MutationMode::Surface),
            other => Err(Error::Parse { message: format!("unknown mutation mode {other}"), context: "mode".into() }),
        }
    }
}

/// Vertex `i` together with `A`, the degree-0 arrows ending at `i`.
#[derive(Clone, Debug)]
pub struct MutationContext<'a> {
    pub quiver: &'a GradedQuiver,
    pub vertex: VertexId,
    pub a: Vec<ArrowId>,
}

impl<'a> MutationContext<'a> {
    pub fn new(quiver: &'a GradedQuiver, vertex: VertexId) -> Result<Self> {
        if quiver.has_degree_zero_loop(vertex) {
            return Err(Error::DegreeZeroLoop(quiver.vertices[vertex].clone()));
        }
        let a = quiver.in_arrows(vertex).filter(|&x| quiver.deg(x) == 0).collect();
        Ok(MutationContext { quiver, vertex, a })
    }

    pub fn chi(&self, v: VertexId) -> i64 {
        i64::from(v == self.vertex)
    }

    /// Arrows `φ` with `s(φ) = i` and `|φ| >= 3 - d`, which compose with `A`.
    pub fn composable(&self) -> Vec<ArrowId> {
        let lo = 3 - self.quiver.d as i64;
        self.quiver.out_arrows(self.vertex).filter(|&x| self.quiver.deg(x) >= lo).collect()
    }

    pub fn loops(&self) -> Vec<ArrowId> {
        self.quiver.out_arrows(self.vertex).filter(|&x| self.quiver.arrow(x).tgt == self.vertex).collect()
    }
}

/// Drop every path whose last arrow lies in `A`.
pub fn red(x: &PathSum, a: &[ArrowId]) -> PathSum {
    x.filter(|p| p.arrows.last().is_none_or(|l| !a.contains(l)))
}

/// Paths ending in `alpha`, with that last arrow removed.
pub fn slash(q: &GradedQuiver, x: &PathSum, alpha: ArrowId) -> PathSum {
    let mut out = PathSum::zero();
    for (p, c) in x.terms() {
        if p.arrows.last() == Some(&alpha) {
            let arrows = p.arrows[..p.len() - 1].to_vec();
            let path = if arrows.is_empty() {
                Path::idempotent(p.start)
            } else {
                Path { arrows, start: p.start, end: q.arrow(alpha).src }
            };
            out.add_term(path, c.clone());
        }
    }
    out
}

/// A letter of a decorated word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tok {
    /// An arrow of the original quiver.
    Q(ArrowId),
    /// The formal inverse of an arrow in `A`.
    Inv(ArrowId),
    /// An arrow of the mutated quiver.
    M(ArrowId),
}

/// The mutated quiver with the bookkeeping needed to translate words.
#[derive(Clone, Debug)]
pub struct Mutated {
    pub quiver: GradedQuiver,
    pub vertex: VertexId,
    pub a: Vec<ArrowId>,
    pub kept: Vec<Option<ArrowId>>,
    pub star: BTreeMap<ArrowId, (ArrowId, ArrowId)>,
    pub comp: BTreeMap<(ArrowId, ArrowId), ArrowId>,
    pub comp_inv: BTreeMap<(ArrowId, ArrowId), ArrowId>,
    pub sandwich: BTreeMap<(ArrowId, ArrowId, ArrowId), ArrowId>,
}

fn star_name(q: &GradedQuiver, x: ArrowId) -> String {
    format!("{}*", q.name(x))
}

/// Build `Q_M` (items 1 to 4 of the mutation rule).
pub fn mutate_quiver(ctx: &MutationContext) -> Result<Mutated> {
    let q = ctx.quiver;
    let i = ctx.vertex;
    let mut m = GradedQuiver::new(q.d);
    for v in &q.vertices {
        m.add_vertex(v.clone());
    }
    let removed: BTreeSet<ArrowId> = ctx
        .a
        .iter()
        .flat_map(|&al| {
            let (op, _) = q.op_apply(al).expect("paired");
            [al, op]
        })
        .collect();
    let mut kept = vec![None; q.arrows.len()];
    for (k, a) in q.arrows.iter().enumerate() {
        if removed.contains(&k) {
            continue;
        }
        let shift = -i64::from(a.src == i) + i64::from(a.tgt == i);
        kept[k] = Some(m.add_arrow(a.id.clone(), a.src, a.tgt, a.deg + shift, a.origin.clone()));
    }
    for (k, link) in q.op.iter().enumerate() {
        if let (Some(link), Some(mk)) = (link, kept[k]) {
            if link.designated {
                // Degrees at i shift, which can flip the parity of |φ||φ^op|.
                // The end that does not start at i keeps its opposite sign.
                let p = link.partner;
                let mut s = link.sign;
                if q.arrow(k).src == i && q.arrow(p).src != i {
                    let before = q.deg(k) * q.deg(p);
                    let after = m.deg(mk) * (q.deg(p) - i64::from(q.arrow(p).src == i) + i64::from(q.arrow(p).tgt == i));
                    if (before - after).rem_euclid(2) == 1 {
                        s = -s;
                    }
                }
                m.pair(mk, kept[p].expect("kept pair"), s);
            }
        }
    }
    let d = q.d as i64;
    let mut star = BTreeMap::new();
    for &al in &ctx.a {
        let (op, _) = q.op_apply(al).expect("paired");
        let j = q.arrow(al).src;
        let s = m.add_arrow(star_name(q, al), i, j, 0, Origin::Star { alpha: q.name(al).to_string() });
        let so = m.add_arrow(star_name(q, op), j, i, 2 - d, Origin::StarOp { alpha: q.name(al).to_string() });
        // (α*)^op maps to +α*, so α* carries the sign -1
        m.pair(s, so, -1);
        star.insert(al, (s, so));
    }
    let mut comp = BTreeMap::new();
    let mut comp_inv = BTreeMap::new();
    for &al in &ctx.a {
        for phi in ctx.composable() {
            let (psi, sigma) = q.op_apply(phi).expect("paired");
            let (an, pn, sn) = (q.name(al).to_string(), q.name(phi).to_string(), q.name(psi).to_string());
            let j = q.arrow(al).src;
            // the shift rule applied to the composite: a loop φ gives an arrow into i
            let c = m.add_arrow(
                format!("[{an} {pn}]"),
                j,
                q.arrow(phi).tgt,
                q.deg(phi) + i64::from(q.arrow(phi).tgt == i),
                Origin::Comp { alpha: an.clone(), phi: pn },
            );
            let ci = m.add_arrow(
                format!("[{sn} {an}^-1]"),
                q.arrow(psi).src,
                j,
                q.deg(psi) - i64::from(q.arrow(psi).src == i),
                Origin::CompInv { psi: sn, alpha: an },
            );
            // (αφ)^op = -φ^op α^{-1} = -σ [ψ α^{-1}]
            let s: Coeff = -sigma;
            m.pair(c, ci, if s.is_one() { 1 } else { -1 });
            comp.insert((al, phi), c);
            comp_inv.insert((psi, al), ci);
        }
    }
    let mut sandwich = BTreeMap::new();
    for &al in &ctx.a {
        for &be in &ctx.a {
            for phi in ctx.loops() {
                let (an, pn, bn) = (q.name(al), q.name(phi), q.name(be));
                let x = m.add_arrow(
                    format!("[{an} {pn} {bn}^-1]"),
                    q.arrow(al).src,
                    q.arrow(be).src,
                    q.deg(phi),
                    Origin::Sandwich { alpha: an.to_string(), phi: pn.to_string(), beta: bn.to_string() },
                );
                sandwich.insert((al, phi, be), x);
            }
        }
    }
    // (αφβ^{-1})^op = β φ^op α^{-1}, designated where φ is
    for (&(al, phi, be), &x) in &sandwich {
        let link = q.op[phi].expect("paired");
        if link.designated {
            let y = sandwich[&(be, link.partner, al)];
            m.pair(x, y, link.sign);
        }
    }
    Ok(Mutated { quiver: m, vertex: i, a: ctx.a.clone(), kept, star, comp, comp_inv, sandwich })
}

impl Mutated {
    /// Rebracket a word into a path of `Q_M`. `Ok(None)` is never returned
    /// for well-formed words; failures are errors naming the word.
    pub fn rebracket(&self, q: &GradedQuiver, word: &[Tok]) -> Result<Path> {
        let fail = |why: &str| {
            let w: Vec<String> = word
                .iter()
                .map(|t| match *t {
                    Tok::Q(x) => q.name(x).to_string(),
                    Tok::Inv(x) => format!("{}^-1", q.name(x)),
                    Tok::M(x) => self.quiver.name(x).to_string(),
                })
                .collect();
            Error::Decoration(format!("{why} in {}", w.join(" ")))
        };
        let mut out: Vec<ArrowId> = Vec::new();
        let mut k = 0;
        while k < word.len() {
            match word[k] {
                Tok::Q(x) if self.a.contains(&x) => {
                    let Some(&Tok::Q(phi)) = word.get(k + 1) else {
                        return Err(fail("arrow of A without a continuation"));
                    };
                    let is_loop = q.arrow(phi).src == self.vertex && q.arrow(phi).tgt == self.vertex;
                    if let (true, Some(&Tok::Inv(be))) = (is_loop, word.get(k + 2)) {
                        out.push(*self.sandwich.get(&(x, phi, be)).ok_or_else(|| fail("no sandwich arrow"))?);
                        k += 3;
                    } else {
                        out.push(*self.comp.get(&(x, phi)).ok_or_else(|| fail("no composite arrow"))?);
                        k += 2;
                    }
                }
                Tok::Q(x) => {
                    if let Some(&Tok::Inv(be)) = word.get(k + 1) {
                        out.push(*self.comp_inv.get(&(x, be)).ok_or_else(|| fail("no inverse composite"))?);
                        k += 2;
                    } else {
                        out.push(self.kept[x].ok_or_else(|| fail("arrow removed by mutation"))?);
                        k += 1;
                    }
                }
                Tok::Inv(_) => return Err(fail("inverse without a preceding arrow")),
                Tok::M(y) => {
                    out.push(y);
                    k += 1;
                }
            }
        }
        Path::from_arrows(&self.quiver, &out).map_err(|_| fail("rebracketed word is not composable"))
    }

    /// Tokens of a `Q_M` path, undoing the bracketing.
    pub fn unbracket(&self, p: &Path) -> Vec<Tok> {
        let mut inv_kept = BTreeMap::new();
        for (k, m) in self.kept.iter().enumerate() {
            if let Some(m) = m {
                inv_kept.insert(*m, k);
            }
        }
        let mut out = Vec::new();
        for &x in &p.arrows {
            if let Some(&k) = inv_kept.get(&x) {
                out.push(Tok::Q(k));
            } else if let Some((&(al, phi), _)) = self.comp.iter().find(|(_, &v)| v == x) {
                out.extend([Tok::Q(al), Tok::Q(phi)]);
            } else if let Some((&(psi, al), _)) = self.comp_inv.iter().find(|(_, &v)| v == x) {
                out.extend([Tok::Q(psi), Tok::Inv(al)]);
            } else if let Some((&(al, phi, be), _)) = self.sandwich.iter().find(|(_, &v)| v == x) {
                out.extend([Tok::Q(al), Tok::Q(phi), Tok::Inv(be)]);
            } else {
                out.push(Tok::M(x));
            }
        }
        out
    }

    /// Decorated expansions of a path: `Δ = 1 - Σ α^{-1} α` is inserted at
    /// every interior visit of `i` that does not follow an arrow of `A`.
    pub fn decorate(&self, q: &GradedQuiver, arrows: &[ArrowId]) -> Vec<(Vec<Tok>, Coeff)> {
        let mut words: Vec<(Vec<Tok>, Coeff)> = vec![(Vec::new(), Coeff::one())];
        for (k, &x) in arrows.iter().enumerate() {
            for w in &mut words {
                w.0.push(Tok::Q(x));
            }
            let interior = k + 1 < arrows.len();
            if interior && q.arrow(x).tgt == self.vertex && !self.a.contains(&x) {
                let mut next = Vec::with_capacity(words.len() * (1 + self.a.len()));
                for (w, c) in words {
                    for &al in &self.a {
                        let mut v = w.clone();
                        v.extend([Tok::Inv(al), Tok::Q(al)]);
                        next.push((v, -c.clone()));
                    }
                    next.push((w, c));
                }
                words = next;
            }
        }
        words
    }

    /// `prefix · dec(x) · suffix`, rebracketed into `Q_M`.
    pub fn dec_with(&self, q: &GradedQuiver, prefix: &[Tok], x: &PathSum, suffix: &[Tok]) -> Result<PathSum> {
        let mut out = PathSum::zero();
        for (p, c) in x.terms() {
            if p.is_empty() {
                let mut w = prefix.to_vec();
                w.extend_from_slice(suffix);
                if w.is_empty() {
                    out.add_term(Path::idempotent(p.start), c.clone());
                } else {
                    out.add_term(self.rebracket(q, &w)?, c.clone());
                }
                continue;
            }
            for (w, e) in self.decorate(q, &p.arrows) {
                let mut full = prefix.to_vec();
                full.extend(w);
                full.extend_from_slice(suffix);
                out.add_term(self.rebracket(q, &full)?, c * e);
            }
        }
        Ok(out)
    }

    /// `φ φ^{op_M}` as a path sum over `Q`, with the sign taken in `Q_M`.
    pub fn phi_phi_op(&self, q: &GradedQuiver, phi: ArrowId) -> Result<PathSum> {
        let mphi = self.kept[phi].ok_or_else(|| Error::Decoration(format!("{} not kept", q.name(phi))))?;
        let (psi, _) = q.op_apply(phi).expect("paired");
        let (_, sigma) = self.quiver.op_apply(mphi).expect("paired");
        Ok(PathSum::from_path(Path::from_arrows(q, &[phi, psi])?).scale(&sigma))
    }

    pub fn dec(&self, q: &GradedQuiver, x: &PathSum) -> Result<PathSum> {
        self.dec_with(q, &[], x, &[])
    }

    /// Right multiplication of a `Q_M` path sum by `α^{-1}`.
    pub fn times_inverse(&self, q: &GradedQuiver, x: &PathSum, alpha: ArrowId) -> Result<PathSum> {
        let mut out = PathSum::zero();
        for (p, c) in x.terms() {
            let mut w = self.unbracket(p);
            w.push(Tok::Inv(alpha));
            out.add_term(self.rebracket(q, &w)?, c.clone());
        }
        Ok(out)
    }

    /// `dec_cyc` of a cycle with coefficient, as potential terms over `Q_M`.
    pub fn dec_cyc(&self, q: &GradedQuiver, cycle: &[ArrowId], c: &Coeff, out: &mut Potential) -> Result<()> {
        let i = self.vertex;
        let start = (0..cycle.len()).find(|&r| q.arrow(cycle[r]).src != i);
        match start {
            Some(r) => {
                let (rot, e) = rotate(q, cycle, r);
                let x = PathSum::from_path(Path::from_arrows(q, &rot)?);
                let dx = self.dec(q, &x)?;
                out.add_pathsum(&self.quiver, &dx.scale(&(c * sign(e))))?;
            }
            None => {
                // c starts and ends in i: (-1)^d dec c - Σ α (dec c) α^{-1}
                let x = PathSum::from_path(Path::from_arrows(q, cycle)?);
                let dx = self.dec(q, &x)?;
                out.add_pathsum(&self.quiver, &dx.scale(&(c * sign(q.d as i64))))?;
                for &al in &self.a {
                    let y = self.dec_with(q, &[Tok::Q(al)], &x, &[Tok::Inv(al)])?;
                    out.add_pathsum(&self.quiver, &y.scale(&-c.clone()))?;
                }
            }
        }
        Ok(())
    }
}

/// Oppermann mutation `μ_i(Q, W)`.
pub fn mutate_qsp(qsp: &Qsp, vertex: VertexId) -> Result<(Mutated, Potential)> {
    let q = &qsp.quiver;
    let ctx = MutationContext::new(q, vertex)?;
    let mut m = mutate_quiver(&ctx)?;
    let mut w = Potential::zero();
    for (cycle, c) in qsp.potential.terms() {
        m.dec_cyc(q, cycle, c, &mut w)?;
    }
    for &al in &ctx.a {
        let (star, _) = m.star[&al];
        for phi in ctx.composable() {
            let x = m.phi_phi_op(q, phi)?;
            let y = m.dec_with(q, &[Tok::Q(al)], &x, &[Tok::M(star)])?;
            w.add_pathsum(&m.quiver, &y)?;
        }
    }
    // Loops at i bend the inherited signs out of a cancelling choice.
    repair_op_signs(&mut m.quiver, &w)?;
    Ok((m, w))
}

/// The Ginzburg algebra of `μ_i(Q, W)` assembled from the original
/// differential, arrow by arrow.
///
/// The arrow formulas pass through `α` itself whenever a loop sits at the
/// vertex, so there the algebra is the Ginzburg algebra of `μ_i(Q, W)`.
pub fn mutated_differential(qsp: &Qsp, vertex: VertexId) -> Result<DgQuiverAlgebra> {
    let q = &qsp.quiver;
    let ctx = MutationContext::new(q, vertex)?;
    if !ctx.loops().is_empty() {
        let (m, w) = mutate_qsp(qsp, vertex)?;
        return ginzburg(&m.quiver, &w);
    }
    let m = mutate_quiver(&ctx)?;
    let gamma = ginzburg(q, &qsp.potential)?;
    let dq = |x: ArrowId| gamma.diff[x].clone();
    let a = &ctx.a;
    let i = vertex;
    let mq = &m.quiver;
    let mut diff: Vec<Option<PathSum>> = vec![None; mq.arrows.len()];

    for (x, mx) in m.kept.iter().enumerate() {
        let Some(mx) = *mx else { continue };
        let v = if q.arrow(x).src != i {
            m.dec(q, &red(&dq(x), a))?
        } else {
            let mut v = m.dec(q, &dq(x))?.neg();
            for &al in a {
                if let Some(&c) = m.comp.get(&(al, x)) {
                    v.add_term(Path::from_arrows(mq, &[m.star[&al].0, c])?, Coeff::one());
                }
            }
            v
        };
        diff[mx] = Some(v);
    }
    for &al in a {
        let (star, star_op) = m.star[&al];
        diff[star] = Some(PathSum::zero());
        let mut v = PathSum::zero();
        for phi in ctx.composable() {
            let x = m.phi_phi_op(q, phi)?;
            v.add_assign(&m.dec_with(q, &[Tok::Q(al)], &x, &[])?);
        }
        diff[star_op] = Some(v);
    }
    for (&(al, phi), &c) in &m.comp {
        diff[c] = Some(m.dec_with(q, &[Tok::Q(al)], &red(&dq(phi), a), &[])?);
    }
    for (&(psi, al), &ci) in &m.comp_inv {
        let mpsi = m.kept[psi].ok_or_else(|| Error::Decoration(format!("{} not kept", q.name(psi))))?;
        let first = m.times_inverse(q, diff[mpsi].as_ref().expect("kept arrows done"), al)?;
        let mut v = first;
        v.add_term(Path::from_arrows(mq, &[mpsi, m.star[&al].0])?, sign(mq.deg(mpsi)));
        let tail = m.dec(q, &slash(q, &dq(psi), al))?;
        v.add_assign(&tail.scale(&-sign(ctx.chi(q.arrow(psi).src))));
        diff[ci] = Some(v);
    }
    for (&(al, phi, be), &x) in &m.sandwich {
        let c = m.comp[&(al, phi)];
        let mut v = m.times_inverse(q, diff[c].as_ref().expect("composites done"), be)?;
        v.add_term(Path::from_arrows(mq, &[c, m.star[&be].0])?, sign(mq.deg(c)));
        let tail = m.dec_with(q, &[Tok::Q(al)], &slash(q, &dq(phi), be), &[])?;
        v.add_assign(&tail.neg());
        diff[x] = Some(v);
    }

    let base = ginzburg(mq, &Potential::zero())?;
    let mut alg = DgQuiverAlgebra::new(base.quiver.clone());
    for (k, v) in diff.into_iter().enumerate() {
        alg.set_diff(k, v.unwrap_or_else(PathSum::zero));
    }
    for k in mq.arrows.len()..alg.arrow_count() {
        alg.set_diff(k, base.diff[k].clone());
    }
    Ok(alg)
}

/// One superfluous set: a composite pair and the pair it duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperfluousSet {
    pub composite: [String; 2],
    pub duplicate: [String; 2],
}

fn face_origin(q: &GradedQuiver, x: ArrowId) -> Option<(usize, &str, &str)> {
    match &q.arrow(x).origin {
        Origin::Face { face, src, tgt } => Some((*face, src, tgt)),
        _ => None,
    }
}

/// Superfluous pairs of a surface mutation, located through the face
/// occurrences recorded on the original arrows.
///
/// With `α = a_{k x}` in `A` (`x` an occurrence of `i`): the composite
/// `α a_{x j}` duplicates `a_{k j}`, and the sandwich `α a_{x y} β^{-1}`
/// duplicates `a_{k y} β^{-1}`.
pub fn superfluous_pairs(q: &GradedQuiver, m: &Mutated) -> Vec<SuperfluousSet> {
    let mq = &m.quiver;
    let find_face = |face: usize, src: &str, tgt: &str| {
        (0..q.arrows.len()).find(|&y| face_origin(q, y) == Some((face, src, tgt)))
    };
    let partner = |x: ArrowId| mq.op[x].map(|l| l.partner).expect("paired");
    let pair_names = |x: ArrowId| [mq.name(x).to_string(), mq.name(partner(x)).to_string()];
    let mut out = Vec::new();
    for (&(al, phi), &c) in &m.comp {
        let (Some((f, k, x)), Some((_, x2, j))) = (face_origin(q, al), face_origin(q, phi)) else { continue };
        if x2 != x {
            continue;
        }
        if let Some(dup) = find_face(f, k, j).and_then(|y| m.kept[y]) {
            out.push(SuperfluousSet { composite: pair_names(c), duplicate: pair_names(dup) });
        }
    }
    for (&(al, phi, be), &s) in &m.sandwich {
        let (Some((f, k, x)), Some((_, x2, y))) = (face_origin(q, al), face_origin(q, phi)) else { continue };
        if x2 != x {
            continue;
        }
        if let Some(&dup) = find_face(f, k, y).and_then(|psi| m.comp_inv.get(&(psi, be))) {
            out.push(SuperfluousSet { composite: pair_names(s), duplicate: pair_names(dup) });
        }
    }
    out
}

/// Result of mutating a quiver with superpotential at a vertex.
#[derive(Clone, Debug)]
pub struct MutationResult {
    pub mode: MutationMode,
    pub vertex: String,
    pub qsp: Qsp,
    pub superfluous: Vec<SuperfluousSet>,
}

/// Oppermann mutation packaged as a quiver with superpotential.
pub fn oppermann(qsp: &Qsp, vertex: VertexId) -> Result<MutationResult> {
    let (m, w) = mutate_qsp(qsp, vertex)?;
    Ok(MutationResult {
        mode: MutationMode::Oppermann,
        vertex: qsp.quiver.vertices[vertex].clone(),
        qsp: Qsp { quiver: m.quiver, potential: w },
        superfluous: Vec::new(),
    })
}

/// Surface mutation `μ'_i`: Oppermann mutation, then removal of the
/// superfluous pairs and of every potential term through them.
pub fn surface_mutate(qsp: &Qsp, vertex: VertexId) -> Result<MutationResult> {
    let (m, w) = mutate_qsp(qsp, vertex)?;
    let sets = superfluous_pairs(&qsp.quiver, &m);
    let drop: BTreeSet<ArrowId> = sets
        .iter()
        .flat_map(|s| s.composite.iter().chain(&s.duplicate))
        .map(|n| m.quiver.arrow_id(n).expect("named arrow"))
        .collect();
    let drop_vec: Vec<ArrowId> = drop.iter().copied().collect();
    let w = w.without_arrows(&drop_vec);
    let (mut quiver, map) = m.quiver.without_arrows(&drop);
    let potential = w.map_arrows(&quiver, &|x| map[x].expect("surviving arrow"))?;
    repair_op_signs(&mut quiver, &potential)?;
    Ok(MutationResult {
        mode: MutationMode::Surface,
        vertex: qsp.quiver.vertices[vertex].clone(),
        qsp: Qsp { quiver, potential },
        superfluous: sets,
    })
}

pub fn mutate(qsp: &Qsp, vertex: VertexId, mode: MutationMode) -> Result<MutationResult> {
    match mode {
        MutationMode::Oppermann => oppermann(qsp, vertex),
        MutationMode::Surface => surface_mutate(qsp, vertex),
    }
}

/// Vertex index by name.
pub fn vertex_of(q: &GradedQuiver, name: &str) -> Result<VertexId> {
    q.vertex(name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::coeff;
    use crate::fixtures;
    use crate::qsp::build_qsp;
    use proptest::prelude::*;

    fn qsp(name: &str) -> Qsp {
        build_qsp(&fixtures::surface(name).unwrap()).unwrap()
    }

    fn all_cases() -> Vec<(&'static str, Qsp, VertexId)> {
        let mut out = Vec::new();
        for (name, s) in fixtures::surfaces() {
            let q = build_qsp(&s).unwrap();
            for v in 0..q.quiver.vertices.len() {
                out.push((name, q.clone(), v));
            }
        }
        out
    }

    fn id(q: &GradedQuiver, name: &str) -> ArrowId {
        q.arrow_id(name).unwrap_or_else(|| panic!("no arrow {name}"))
    }

    /// A walk from `start` choosing out-arrows by the given indices.
    fn walk(q: &GradedQuiver, start: VertexId, choices: &[usize]) -> Path {
        let mut p = Path::idempotent(start);
        for &c in choices {
            let outs: Vec<ArrowId> = q.out_arrows(p.end).collect();
            if outs.is_empty() {
                break;
            }
            p = p.compose(&Path::arrow(q, outs[c % outs.len()])).unwrap();
        }
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn red_plus_slashes_recover_the_sum(
            case in 0usize..14,
            walks in proptest::collection::vec((0usize..8, proptest::collection::vec(0usize..8, 0..6), -3i64..4), 1..6),
        ) {
            let cases = all_cases();
            let (_, base, v) = &cases[case % cases.len()];
            let q = &base.quiver;
            let ctx = MutationContext::new(q, *v).unwrap();
            let mut x = PathSum::zero();
            for (start, choices, c) in walks {
                x.add_term(walk(q, start % q.vertices.len(), &choices), coeff(c));
            }
            let mut rebuilt = red(&x, &ctx.a);
            for &al in &ctx.a {
                rebuilt.add_assign(&slash(q, &x, al).mul(&PathSum::arrow(q, al)));
            }
            prop_assert_eq!(rebuilt, x);
        }
    }

    #[test]
    fn a3_oppermann_potential_matches_the_worked_example() {
        // b32 = [a31 a12]; W_M = b32 a23 + b32 a21 a31*
        let (m, w) = mutate_qsp(&qsp("a3"), 0).unwrap();
        let q = &m.quiver;
        let b32 = id(q, "[a_{3+,1+} a_{1+,2+}]");
        let mut expected = Potential::zero();
        expected.add_cycle(q, &[b32, id(q, "a_{2+,3+}")], coeff(1)).unwrap();
        expected.add_cycle(q, &[b32, id(q, "a_{2+,1+}"), id(q, "a_{3+,1+}*")], coeff(1)).unwrap();
        assert_eq!(w, expected);
        let b23 = q.op[b32].unwrap().partner;
        assert_eq!(q.name(b23), "[a_{2+,1+} a_{3+,1+}^-1]");
    }

    #[test]
    fn mutated_degrees_pair_up_and_potential_is_homogeneous() {
        for (name, base, v) in all_cases() {
            let (m, w) = mutate_qsp(&base, v).unwrap();
            m.quiver.check_pairing().unwrap_or_else(|e| panic!("{name} {v}: {e}"));
            w.check_homogeneous(&m.quiver, 3 - base.quiver.d as i64).unwrap();
        }
    }

    #[test]
    fn mutated_differential_squares_to_zero_everywhere() {
        for (name, base, v) in all_cases() {
            let g = mutated_differential(&base, v).unwrap();
            g.check_well_formed().unwrap();
            g.check_d_squared().unwrap_or_else(|e| panic!("{name} {v}: {e}"));
        }
    }

    #[test]
    fn star_arrows_are_closed() {
        for (_, base, v) in all_cases() {
            let (m, _) = mutate_qsp(&base, v).unwrap();
            let g = mutated_differential(&base, v).unwrap();
            for (star, _) in m.star.values() {
                assert!(g.diff[*star].is_zero());
            }
        }
    }

    #[test]
    fn arrow_formulas_agree_with_the_ginzburg_algebra_of_the_mutation() {
        let mut checked = 0;
        for (name, base, v) in all_cases() {
            if !MutationContext::new(&base.quiver, v).unwrap().loops().is_empty() {
                continue;
            }
            let (m, w) = mutate_qsp(&base, v).unwrap();
            let g = ginzburg(&m.quiver, &w).unwrap();
            assert_eq!(mutated_differential(&base, v).unwrap(), g, "{name} {v}");
            checked += 1;
        }
        assert_eq!(checked, 11);
    }

    #[test]
    fn vertex_without_incoming_degree_zero_arrows_only_shifts_degrees() {
        let base = qsp("pent5");
        let (m, w) = mutate_qsp(&base, 0).unwrap();
        let names = |q: &GradedQuiver| q.arrows.iter().map(|a| a.id.clone()).collect::<Vec<_>>();
        assert_eq!(names(&m.quiver), names(&base.quiver));
        assert!(w.is_zero() && base.potential.is_zero());
    }

    #[test]
    fn degree_zero_loop_blocks_mutation() {
        let mut q = GradedQuiver::new(4);
        let v = q.add_vertex("1");
        let x = q.add_arrow("x", v, v, 0, Origin::Plain);
        let y = q.add_arrow("y", v, v, -2, Origin::Plain);
        q.pair(x, y, 1);
        let bad = Qsp { quiver: q, potential: Potential::zero() };
        assert_eq!(mutate_qsp(&bad, v).unwrap_err().code(), "degree_zero_loop");
        assert_eq!(surface_mutate(&bad, v).unwrap_err().code(), "degree_zero_loop");
    }

    #[test]
    fn a3_superfluous_pairs() {
        let r = surface_mutate(&qsp("a3"), 0).unwrap();
        let got: BTreeSet<String> = r.superfluous.iter().flat_map(|s| s.composite.iter().chain(&s.duplicate).cloned()).collect();
        let want: BTreeSet<String> = ["a_{2+,3+}", "a_{3+,2+}", "[a_{3+,1+} a_{1+,2+}]", "[a_{2+,1+} a_{3+,1+}^-1]"]
            .map(String::from)
            .into();
        assert_eq!(got, want);
    }

    #[test]
    fn a3_surface_mutation_leaves_two_pairs_and_no_potential() {
        let r = surface_mutate(&qsp("a3"), 0).unwrap();
        let q = &r.qsp.quiver;
        assert!(r.qsp.potential.is_zero());
        assert_eq!(q.arrows.len(), 4);
        let partner = |n: &str| q.name(q.op[id(q, n)].unwrap().partner).to_string();
        assert_eq!(partner("a_{2+,1+}"), "a_{1+,2+}");
        assert_eq!(partner("a_{3+,1+}*"), "a_{1+,3+}*");
    }

    #[test]
    fn self_folded_vertex_has_the_three_composite_pair_shapes() {
        // α = a_{2+,1+}, φ = a_{1+,1-}
        let (m, _) = mutate_qsp(&qsp("self4"), 0).unwrap();
        let q = &m.quiver;
        let partner = |n: &str| q.name(q.op[id(q, n)].unwrap().partner).to_string();
        assert_eq!(partner("[a_{2+,1+} a_{1+,1-}]"), "[a_{1-,1+} a_{2+,1+}^-1]");
        assert_eq!(partner("[a_{2+,1+} a_{1-,1+}]"), "[a_{1+,1-} a_{2+,1+}^-1]");
        assert_eq!(partner("[a_{2+,1+} a_{1+,1-} a_{2+,1+}^-1]"), "[a_{2+,1+} a_{1-,1+} a_{2+,1+}^-1]");
    }

    #[test]
    fn surface_mutations_have_no_two_cycles_or_degree_zero_loops() {
        for (name, base, v) in all_cases() {
            let r = surface_mutate(&base, v).unwrap();
            let q = &r.qsp.quiver;
            assert!(r.qsp.potential.terms().all(|(c, _)| c.len() >= 3), "{name} {v}");
            assert!((0..q.vertices.len()).all(|x| !q.has_degree_zero_loop(x)), "{name} {v}");
            ginzburg(q, &r.qsp.potential).unwrap().check_d_squared().unwrap();
        }
    }

    #[test]
    fn superfluous_sets_are_empty_without_incoming_degree_zero_arrows() {
        assert!(surface_mutate(&qsp("pent5"), 0).unwrap().superfluous.is_empty());
    }

    #[test]
    fn mode_names_parse() {
        assert_eq!("surface".parse::<MutationMode>().unwrap(), MutationMode::Surface);
        assert_eq!("oppermann".parse::<MutationMode>().unwrap(), MutationMode::Oppermann);
        assert!("other".parse::<MutationMode>().is_err());
    }
}
