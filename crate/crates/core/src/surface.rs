//! Marked surfaces with a d-angulation, encoded by polygon gluing.
//!
//! A surface is a list of faces. Each face is the clockwise cyclic list of
//! its edge-sides. An arc appears exactly twice (once per side), a boundary
//! segment exactly once. Gluing the two sides of every arc with opposite
//! orientations recovers the oriented surface.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Side::Plus => '+',
            Side::Minus => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Arc,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeSide {
    pub label: String,
    pub kind: EdgeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

impl EdgeSide {
    pub fn arc(label: impl Into<String>, side: Side) -> Self {
        EdgeSide { label: label.into(), kind: EdgeKind::Arc, side: Some(side) }
    }

    pub fn boundary(label: impl Into<String>) -> Self {
        EdgeSide { label: label.into(), kind: EdgeKind::Boundary, side: None }
    }

    pub fn is_arc(&self) -> bool {
        self.kind == EdgeKind::Arc
    }

    /// Occurrence name such as `1+`; boundary edges keep their bare label.
    pub fn occurrence(&self) -> String {
        match self.side {
            Some(s) => format!("{}{}", self.label, s.symbol()),
            None => self.label.clone(),
        }
    }

    /// Whether a clockwise walk around the face traverses the edge forwards.
    /// Plus sides and boundary segments run forwards, minus sides backwards.
    fn forward(&self) -> bool {
        self.side != Some(Side::Minus)
    }
}

impl fmt::Display for EdgeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.occurrence())
    }
}

/// A d-angulated marked surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Surface {
    pub d: usize,
    pub faces: Vec<Vec<EdgeSide>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub g: usize,
    pub b: usize,
    pub c: usize,
    pub m: usize,
    pub n: usize,
    pub self_folded: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitResult {
    Period(usize),
    NoReturnWithin(usize),
}

/// Number of faces and arcs of any d-angulation of a surface of genus `g`
/// with `b` boundary components and `c` marked points.
pub fn counts(g: usize, b: usize, c: usize, d: usize) -> Result<(usize, usize)> {
    if d < 3 {
        return Err(Error::NoDAngulation(format!("d = {d} < 3")));
    }
    let (g, b, c, d) = (g as i64, b as i64, c as i64, d as i64);
    let m_num = 4 * g + 2 * b + c - 4;
    let n_num = 2 * d * g + d * b + c - 2 * d;
    if m_num < 0 || n_num < 0 || m_num % (d - 2) != 0 || n_num % (d - 2) != 0 {
        return Err(Error::NoDAngulation(format!(
            "(g, b, c, d) = ({g}, {b}, {c}, {d}) gives non-integral counts"
        )));
    }
    Ok(((m_num / (d - 2)) as usize, (n_num / (d - 2)) as usize))
}

/// Base label of an arc, dropping the flip generation suffix `@t`.
pub fn base_label(label: &str) -> &str {
    label.split('@').next().unwrap_or(label)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Endpoints of every edge, identified by marked-point class.
struct Corners {
    /// label -> (tail class, head class) along the forward direction
    ends: BTreeMap<String, (usize, usize)>,
    points: usize,
}

impl Surface {
    /// Parse and structurally check a surface file.
    pub fn from_json(text: &str) -> Result<Surface> {
        let s: Surface = serde_json::from_str(text).map_err(|e| Error::Parse {
            message: e.to_string(),
            context: format!("line {}, column {}", e.line(), e.column()),
        })?;
        s.check_structure()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.canonical()).expect("surface serializes")
    }

    fn check_structure(&self) -> Result<()> {
        let perr = |context: String, message: String| Error::Parse { message, context };
        if self.d < 3 {
            return Err(perr("d".into(), format!("d must be at least 3, got {}", self.d)));
        }
        let mut arcs: BTreeMap<&str, Vec<Side>> = BTreeMap::new();
        let mut bounds: BTreeMap<&str, usize> = BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            if face.len() != self.d {
                return Err(perr(
                    format!("faces[{fi}]"),
                    format!("face length {} differs from d = {}", face.len(), self.d),
                ));
            }
            for (k, e) in face.iter().enumerate() {
                match (e.kind, e.side) {
                    (EdgeKind::Arc, Some(s)) => arcs.entry(&e.label).or_default().push(s),
                    (EdgeKind::Arc, None) => {
                        return Err(perr(format!("faces[{fi}][{k}]"), format!("arc {} has no side", e.label)))
                    }
                    (EdgeKind::Boundary, None) => *bounds.entry(&e.label).or_default() += 1,
                    (EdgeKind::Boundary, Some(_)) => {
                        return Err(perr(
                            format!("faces[{fi}][{k}]"),
                            format!("boundary edge {} carries a side", e.label),
                        ))
                    }
                }
            }
        }
        for (label, sides) in &arcs {
            if bounds.contains_key(label) {
                return Err(perr(format!("label {label}"), "duplicate label used as arc and boundary".into()));
            }
            if sides.len() != 2 {
                return Err(perr(
                    format!("arc {label}"),
                    format!("arc side count {} (expected 2)", sides.len()),
                ));
            }
            if sides[0] == sides[1] {
                return Err(perr(
                    format!("arc {label}"),
                    "orientation inconsistency: both sides carry the same sign".into(),
                ));
            }
        }
        for (label, n) in &bounds {
            if *n != 1 {
                return Err(perr(format!("boundary {label}"), format!("duplicate label: appears {n} times")));
            }
        }
        Ok(())
    }

    pub fn arcs(&self) -> BTreeSet<String> {
        self.faces.iter().flatten().filter(|e| e.is_arc()).map(|e| e.label.clone()).collect()
    }

    fn boundary_count(&self) -> usize {
        self.faces.iter().flatten().filter(|e| !e.is_arc()).count()
    }

    /// Position (face, index) of a given arc side.
    pub fn locate(&self, arc: &str, side: Side) -> Option<(usize, usize)> {
        self.faces.iter().enumerate().find_map(|(fi, f)| {
            f.iter()
                .position(|e| e.is_arc() && e.label == arc && e.side == Some(side))
                .map(|k| (fi, k))
        })
    }

    pub fn is_self_folded(&self, arc: &str) -> Result<bool> {
        let p = self.locate(arc, Side::Plus).ok_or_else(|| Error::UnknownArc(arc.to_string()))?;
        let m = self.locate(arc, Side::Minus).ok_or_else(|| Error::UnknownArc(arc.to_string()))?;
        Ok(p.0 == m.0)
    }

    fn corners(&self) -> Corners {
        let labels: Vec<String> = {
            let mut v: Vec<String> = self.faces.iter().flatten().map(|e| e.label.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        // token 2k = tail of edge k, 2k+1 = head of edge k
        let mut uf = UnionFind::new(2 * labels.len());
        let start = |e: &EdgeSide| 2 * index[e.label.as_str()] + usize::from(!e.forward());
        let end = |e: &EdgeSide| 2 * index[e.label.as_str()] + usize::from(e.forward());
        for face in &self.faces {
            for k in 0..face.len() {
                let next = &face[(k + 1) % face.len()];
                uf.union(end(&face[k]), start(next));
            }
        }
        let mut class_of = BTreeMap::new();
        let mut ends = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            let mut cls = |t: usize| {
                let r = uf.find(t);
                let n = class_of.len();
                *class_of.entry(r).or_insert(n)
            };
            let tail = cls(2 * i);
            let head = cls(2 * i + 1);
            ends.insert(l.clone(), (tail, head));
        }
        Corners { ends, points: class_of.len() }
    }

    /// Derive (g, b, c, m, n) and check them against the closed formulas.
    pub fn validate(&self) -> Result<TopologyReport> {
        self.check_structure()?;
        let m = self.faces.len();
        let n = self.arcs().len();
        if m == 0 {
            return Err(Error::InvalidSurface("no faces".into()));
        }
        // connectivity through shared arcs
        let mut uf = UnionFind::new(m);
        let mut first_face: BTreeMap<&str, usize> = BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            for e in face.iter().filter(|e| e.is_arc()) {
                if let Some(&other) = first_face.get(e.label.as_str()) {
                    uf.union(fi, other);
                } else {
                    first_face.insert(&e.label, fi);
                }
            }
        }
        if (0..m).any(|f| uf.find(f) != uf.find(0)) {
            return Err(Error::InvalidSurface("disconnected surface".into()));
        }
        let corners = self.corners();
        // every marked point sits on the boundary with one outgoing segment
        let mut out_seg: BTreeMap<usize, &str> = BTreeMap::new();
        let mut in_count: BTreeMap<usize, usize> = BTreeMap::new();
        for e in self.faces.iter().flatten().filter(|e| !e.is_arc()) {
            let (tail, head) = corners.ends[&e.label];
            if out_seg.insert(tail, &e.label).is_some() {
                return Err(Error::InvalidSurface(format!(
                    "marked point at the tail of {} has two outgoing boundary segments",
                    e.label
                )));
            }
            *in_count.entry(head).or_default() += 1;
        }
        if out_seg.len() != corners.points || in_count.values().any(|&c| c != 1) {
            return Err(Error::InvalidSurface(
                "some marked point is not on the boundary (punctures are not supported)".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut b = 0;
        for &start in out_seg.keys() {
            if seen.contains(&start) {
                continue;
            }
            b += 1;
            let mut p = start;
            while seen.insert(p) {
                p = corners.ends[out_seg[&p]].1;
            }
        }
        if b == 0 {
            return Err(Error::InvalidSurface("surface has empty boundary".into()));
        }
        let c = corners.points;
        let e = n + self.boundary_count();
        let chi = c as i64 - e as i64 + m as i64;
        let two_g = 2 - b as i64 - chi;
        if two_g < 0 || two_g % 2 != 0 {
            return Err(Error::InvalidSurface(format!("Euler characteristic {chi} with {b} boundary components")));
        }
        let g = (two_g / 2) as usize;
        let (mf, nf) = counts(g, b, c, self.d)?;
        if (mf, nf) != (m, n) {
            return Err(Error::InvalidSurface(format!(
                "formula mismatch: counted (m, n) = ({m}, {n}), formulas give ({mf}, {nf})"
            )));
        }
        let mut self_folded = BTreeSet::new();
        for arc in self.arcs() {
            if self.is_self_folded(&arc)? {
                self_folded.insert(arc);
            }
        }
        Ok(TopologyReport { g, b, c, m, n, self_folded })
    }

    fn rotated(face: &[EdgeSide], start: usize) -> Vec<EdgeSide> {
        face[start..].iter().chain(face[..start].iter()).cloned().collect()
    }

    fn next_generation(&self, arc: &str) -> String {
        let base = base_label(arc);
        let t = self
            .arcs()
            .iter()
            .filter(|l| base_label(l) == base)
            .filter_map(|l| l.split_once('@').and_then(|(_, t)| t.parse::<usize>().ok()))
            .max()
            .unwrap_or(0);
        let t = t.max(arc.split_once('@').and_then(|(_, t)| t.parse().ok()).unwrap_or(0));
        format!("{base}@{}", t + 1)
    }

    /// Flip an arc. Returns the new surface and the label of the new arc.
    pub fn flip(&self, arc: &str) -> Result<(Surface, String)> {
        let (fp, kp) = self.locate(arc, Side::Plus).ok_or_else(|| Error::UnknownArc(arc.to_string()))?;
        let (fm, km) = self.locate(arc, Side::Minus).ok_or_else(|| Error::UnknownArc(arc.to_string()))?;
        let d = self.d;
        let new = self.next_generation(arc);
        let star = EdgeSide::arc(new.clone(), Side::Plus);
        let star_op = EdgeSide::arc(new.clone(), Side::Minus);
        let mut faces: Vec<Vec<EdgeSide>> = Vec::with_capacity(self.faces.len());
        if fp == fm {
            if d == 3 {
                return Err(Error::SelfFoldedTriangle(arc.to_string()));
            }
            // F = [i, e1..ep, i', g1..gq]
            let f = Self::rotated(&self.faces[fp], kp);
            let pos_m = f.iter().position(|e| e.is_arc() && e.label == arc && e.side == Some(Side::Minus)).unwrap();
            let es = &f[1..pos_m];
            let gs = &f[pos_m + 1..];
            let mut nf = vec![star_op];
            if let Some((last, init)) = gs.split_last() {
                nf.push(last.clone());
                nf.extend(init.iter().cloned());
            }
            nf.push(star);
            if let Some((last, init)) = es.split_last() {
                nf.push(last.clone());
                nf.extend(init.iter().cloned());
            }
            for (fi, face) in self.faces.iter().enumerate() {
                faces.push(if fi == fp { nf.clone() } else { face.clone() });
            }
        } else {
            // F1 = [i, e1..e_{d-1}], F2 = [i', f1..f_{d-1}]
            let f1 = Self::rotated(&self.faces[fp], kp);
            let f2 = Self::rotated(&self.faces[fm], km);
            let mut x = vec![star, f1[d - 1].clone()];
            x.extend(f2[1..d - 1].iter().cloned());
            let mut y = vec![star_op, f2[d - 1].clone()];
            y.extend(f1[1..d - 1].iter().cloned());
            for (fi, face) in self.faces.iter().enumerate() {
                if fi == fp {
                    faces.push(x.clone());
                } else if fi == fm {
                    faces.push(y.clone());
                } else {
                    faces.push(face.clone());
                }
            }
        }
        Ok((Surface { d, faces }, new))
    }

    /// Faces rotated to their lexicographically minimal rotation, then sorted.
    pub fn canonical(&self) -> Surface {
        let mut faces: Vec<Vec<EdgeSide>> = self
            .faces
            .iter()
            .map(|f| (0..f.len()).map(|s| Self::rotated(f, s)).min().unwrap_or_default())
            .collect();
        faces.sort();
        Surface { d: self.d, faces }
    }

    /// The same surface with every arc label reduced to its base label.
    pub fn strip_generations(&self) -> Surface {
        let faces = self
            .faces
            .iter()
            .map(|f| {
                f.iter()
                    .map(|e| EdgeSide { label: base_label(&e.label).to_string(), ..e.clone() })
                    .collect()
            })
            .collect();
        Surface { d: self.d, faces }
    }

    /// Replace generation labels `i@t` by fresh plain labels, keeping the
    /// surface valid as an input file.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Surface {
        let faces = self
            .faces
            .iter()
            .map(|f| {
                f.iter()
                    .map(|e| EdgeSide { label: map.get(&e.label).cloned().unwrap_or_else(|| e.label.clone()), ..e.clone() })
                    .collect()
            })
            .collect();
        Surface { d: self.d, faces }
    }
}

/// A letter of the free groupoid on the spine edges: (edge index, inverted).
type Letter = (usize, bool);

fn reduce_word(w: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for l in w {
        match out.last() {
            Some(&(g, inv)) if g == l.0 && inv != l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

fn invert(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&(g, inv)| (g, !inv)).collect()
}

/// Homotopy classes (rel endpoints) of edges, written as reduced words in
/// the free fundamental groupoid of a reference cell structure.
///
/// Faces are disks, so their boundary words are trivial. A surface with
/// nonempty boundary collapses face by face through free edges onto a
/// graph whose edges freely generate the groupoid. Two arcs with the same
/// reduced word are isotopic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeWords {
    words: BTreeMap<String, Vec<Letter>>,
}

impl EdgeWords {
    pub fn new(s: &Surface) -> Result<EdgeWords> {
        let labels: Vec<String> = {
            let mut v: Vec<String> = s.faces.iter().flatten().map(|e| e.label.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        let idx: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut live: Vec<bool> = vec![true; s.faces.len()];
        // (edge, face) in collapse order
        let mut eliminated: Vec<(usize, usize)> = Vec::new();
        loop {
            let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
            for f in s.faces.iter().zip(&live).filter(|(_, l)| **l).map(|(f, _)| f) {
                for e in f {
                    *uses.entry(idx[e.label.as_str()]).or_default() += 1;
                }
            }
            let pick = s.faces.iter().enumerate().filter(|(fi, _)| live[*fi]).find_map(|(fi, f)| {
                f.iter().map(|e| idx[e.label.as_str()]).find(|k| uses[k] == 1).map(|k| (k, fi))
            });
            match pick {
                Some((k, fi)) => {
                    live[fi] = false;
                    eliminated.push((k, fi));
                }
                None => break,
            }
        }
        if live.iter().any(|&l| l) {
            return Err(Error::InvalidSurface("cell structure does not collapse onto a graph".into()));
        }
        let removed: BTreeSet<usize> = eliminated.iter().map(|&(k, _)| k).collect();
        let mut word: BTreeMap<usize, Vec<Letter>> =
            (0..labels.len()).filter(|k| !removed.contains(k)).map(|k| (k, vec![(k, false)])).collect();
        for &(k, fi) in eliminated.iter().rev() {
            let f = &s.faces[fi];
            let pos = f.iter().position(|e| idx[e.label.as_str()] == k).unwrap();
            let mut rest = Vec::new();
            for t in 1..f.len() {
                let e = &f[(pos + t) % f.len()];
                let w = &word[&idx[e.label.as_str()]];
                rest.extend(if e.forward() { w.clone() } else { invert(w) });
            }
            let w = invert(&reduce_word(rest));
            word.insert(k, if f[pos].forward() { w } else { invert(&w) });
        }
        let words = labels.iter().enumerate().map(|(k, l)| (l.clone(), word.remove(&k).unwrap())).collect();
        Ok(EdgeWords { words })
    }

    fn side_word(&self, e: &EdgeSide) -> Vec<Letter> {
        let w = &self.words[&e.label];
        if e.forward() {
            w.clone()
        } else {
            invert(w)
        }
    }

    /// Words after `old` on `before` was flipped into `new` on `after`.
    pub fn after_flip(&self, before: &Surface, after: &Surface, old: &str, new: &str) -> EdgeWords {
        let (fp, kp) = before.locate(old, Side::Plus).expect("flipped arc present");
        let word = if before.is_self_folded(old).unwrap_or(false) {
            // old face [i, e1..ep, i', g1..gq]; the new arc is g_q i e_p^{-1}
            let f = Surface::rotated(&before.faces[fp], kp);
            let pos_m = f.iter().position(|e| e.label == old && e.side == Some(Side::Minus)).unwrap();
            let mut w = self.side_word(f.last().unwrap());
            w.extend(self.side_word(&f[0]));
            w.extend(invert(&self.side_word(&f[pos_m - 1])));
            reduce_word(w)
        } else {
            // the face carrying the new plus side reads it off as a product
            let (fi, k) = after.locate(new, Side::Plus).expect("new arc present");
            let f = &after.faces[fi];
            let mut rest = Vec::new();
            for t in 1..f.len() {
                rest.extend(self.side_word(&f[(k + t) % f.len()]));
            }
            invert(&reduce_word(rest))
        };
        let mut words = self.words.clone();
        words.remove(old);
        words.insert(new.to_string(), word);
        EdgeWords { words }
    }

    /// Whether every face boundary reads as the trivial word.
    pub fn faces_contractible(&self, s: &Surface) -> bool {
        s.faces.iter().all(|f| {
            let w: Vec<Letter> = f.iter().flat_map(|e| self.side_word(e)).collect();
            let mut r = reduce_word(w);
            // cyclic reduction
            while r.len() >= 2 && r[0].0 == r[r.len() - 1].0 && r[0].1 != r[r.len() - 1].1 {
                r.pop();
                r.remove(0);
            }
            r.is_empty()
        })
    }

    pub fn word(&self, label: &str) -> Option<&[Letter]> {
        self.words.get(label).map(|w| w.as_slice())
    }

}

/// Surface and words with every arc oriented so its word is at most its
/// inverse, generation suffixes dropped. Arcs carry no intrinsic
/// orientation, so this is the form compared by orbit detection.
fn orientation_free(s: &Surface, words: &EdgeWords) -> (Surface, BTreeMap<String, Vec<Letter>>) {
    let mut flipped = BTreeSet::new();
    let mut key = BTreeMap::new();
    for (label, w) in &words.words {
        let inv = invert(w);
        let arc = s.faces.iter().flatten().any(|e| e.is_arc() && &e.label == label);
        if arc && inv < *w {
            flipped.insert(label.clone());
            key.insert(base_label(label).to_string(), inv);
        } else {
            key.insert(base_label(label).to_string(), w.clone());
        }
    }
    let faces = s
        .faces
        .iter()
        .map(|f| {
            f.iter()
                .map(|e| {
                    let side = if flipped.contains(&e.label) { e.side.map(Side::flip) } else { e.side };
                    EdgeSide { label: base_label(&e.label).to_string(), kind: e.kind, side }
                })
                .collect()
        })
        .collect();
    (Surface { d: s.d, faces }.canonical(), key)
}

/// Iterate flips of the most recently created arc until the surface returns
/// to its starting isotopy class.
///
/// Equality means: same faces once generation suffixes are dropped, and
/// every edge in the same homotopy class as at the start, both taken up
/// to reversing arcs.
pub fn flip_orbit(s: &Surface, arc: &str, max_steps: usize) -> Result<OrbitResult> {
    let mut words = EdgeWords::new(s)?;
    let start = orientation_free(s, &words);
    let mut cur = s.clone();
    let mut label = arc.to_string();
    for step in 1..=max_steps {
        let (next, new) = cur.flip(&label)?;
        words = words.after_flip(&cur, &next, &label, &new);
        cur = next;
        label = new;
        if base_label(&label) == base_label(arc) && orientation_free(&cur, &words) == start {
            return Ok(OrbitResult::Period(step));
        }
    }
    Ok(OrbitResult::NoReturnWithin(max_steps))
}
