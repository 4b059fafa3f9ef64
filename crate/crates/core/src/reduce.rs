//! Arrow-pair cancellation in dg quiver algebras, isomorphism search, and
//! the check that flipping an arc and mutating its vertex agree.
//!
//! A pair `(a, b)` is cancellable when `d(a) = k₁ b + p` with `k₁ ≠ 0` and no
//! term of `p` containing `b`. Cancelling substitutes `b ↦ -(1/k₁) p` in every
//! other differential and drops `a` and everything through it.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    coeff_to_string, ginzburg, solve_gf2, ArrowId, Coeff, DgQuiverAlgebra, GradedQuiver, Path, PathSum, Potential,
    VertexId,
};
use crate::error::{Error, Result};
use crate::mutation::{mutated_differential, surface_mutate, vertex_of};
use crate::qsp::build_qsp;
use crate::surface::Surface;

/// Arrow cap for [`iso_check`], overridable through this variable.
pub const CAP_ENV: &str = "DGONLAB_CAP_ARROWS";
pub const DEFAULT_CAP: usize = 40;

pub fn arrow_cap() -> usize {
    std::env::var(CAP_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CancellablePair {
    pub a: ArrowId,
    pub b: ArrowId,
    pub k1: Coeff,
    /// `d(a) - k₁ b`; never mentions `b`.
    pub p: PathSum,
}

/// Candidate pairs, or a reason why none may be used.
#[derive(Clone, Debug, Default)]
pub struct Cancellables {
    pub pairs: Vec<CancellablePair>,
    pub diagnostic: Option<String>,
}

/// A cycle of degree-0 arrows, if any.
pub fn degree_zero_cycle(alg: &DgQuiverAlgebra) -> Option<Vec<ArrowId>> {
    let q = &alg.quiver;
    let n = q.vertices.len();
    // 0 unvisited, 1 on stack, 2 done
    let mut state = vec![0u8; n];
    let mut via: Vec<Option<ArrowId>> = vec![None; n];
    fn dfs(
        alg: &DgQuiverAlgebra,
        v: VertexId,
        state: &mut [u8],
        via: &mut [Option<ArrowId>],
    ) -> Option<Vec<ArrowId>> {
        let q = &alg.quiver;
        state[v] = 1;
        for a in q.out_arrows(v).filter(|&a| q.deg(a) == 0) {
            let t = q.arrow(a).tgt;
            if state[t] == 1 {
                let mut cycle = vec![a];
                let mut u = v;
                while u != t {
                    let b = via[u].expect("on the stack");
                    cycle.push(b);
                    u = q.arrow(b).src;
                }
                cycle.reverse();
                return Some(cycle);
            }
            if state[t] == 0 {
                via[t] = Some(a);
                if let Some(c) = dfs(alg, t, state, via) {
                    return Some(c);
                }
            }
        }
        state[v] = 2;
        None
    }
    (0..n).find_map(|v| if state[v] == 0 { dfs(alg, v, &mut state, &mut via) } else { None })
}

/// Why cancellation is not justified on `alg`, if it is not.
pub fn precondition_failure(alg: &DgQuiverAlgebra) -> Option<String> {
    let q = &alg.quiver;
    for (a, x) in alg.diff.iter().enumerate() {
        if x.terms().any(|(p, _)| p.is_empty()) {
            return Some(format!("d({}) leaves the arrow ideal", q.name(a)));
        }
    }
    degree_zero_cycle(alg).map(|c| {
        let names: Vec<&str> = c.iter().map(|&a| q.name(a)).collect();
        format!("degree-0 cycle {}", names.join(" "))
    })
}

/// Every pair `(a, b)` with `b` a linear term of `d(a)` that appears nowhere
/// else in `d(a)`. Empty with a diagnostic when the preconditions fail,
/// unless `complete` is set.
pub fn find_cancellable(alg: &DgQuiverAlgebra, complete: bool) -> Cancellables {
    if !complete {
        if let Some(why) = precondition_failure(alg) {
            return Cancellables { pairs: Vec::new(), diagnostic: Some(why) };
        }
    }
    let mut pairs = Vec::new();
    for a in 0..alg.arrow_count() {
        let da = &alg.diff[a];
        for (path, k1) in da.terms().filter(|(p, _)| p.len() == 1) {
            let b = path.arrows[0];
            if b == a {
                continue;
            }
            let p = da.filter(|x| x != path);
            if p.terms().any(|(x, _)| x.contains(b)) {
                continue;
            }
            pairs.push(CancellablePair { a, b, k1: k1.clone(), p });
        }
    }
    let diagnostic = pairs.is_empty().then(|| "no arrow has a cancellable linear term".to_string());
    Cancellables { pairs, diagnostic }
}

/// Replace every occurrence of `b` in `x` by `sub`.
pub fn substitute(alg: &DgQuiverAlgebra, x: &PathSum, b: ArrowId, sub: &PathSum) -> PathSum {
    let q = &alg.quiver;
    let mut out = PathSum::zero();
    for (p, c) in x.terms() {
        if !p.contains(b) {
            out.add_term(p.clone(), c.clone());
            continue;
        }
        let mut acc = PathSum::from_path(Path::idempotent(p.start));
        for &a in &p.arrows {
            let f = if a == b { sub.clone() } else { PathSum::arrow(q, a) };
            acc = acc.mul(&f);
        }
        out.add_assign(&acc.scale(c));
    }
    out
}

/// Cancel one pair. Arrows keep their relative order.
pub fn cancel_pair(alg: &DgQuiverAlgebra, pair: &CancellablePair) -> Result<DgQuiverAlgebra> {
    let q = &alg.quiver;
    let stale = || Error::StalePair { a: q.name(pair.a).to_string(), b: q.name(pair.b).to_string() };
    let n = alg.arrow_count();
    if pair.a >= n || pair.b >= n || pair.a == pair.b || pair.k1.is_zero() {
        return Err(stale());
    }
    let expected = pair.p.add(&PathSum::arrow(q, pair.b).scale(&pair.k1));
    if alg.diff[pair.a] != expected || pair.p.terms().any(|(x, _)| x.contains(pair.b)) {
        return Err(stale());
    }
    let sub = pair.p.scale(&-(Coeff::one() / &pair.k1));
    let drop: BTreeSet<ArrowId> = [pair.a, pair.b].into();
    let (quiver, map) = q.without_arrows(&drop);
    let mut out = DgQuiverAlgebra::new(quiver);
    for x in 0..n {
        let Some(nx) = map[x] else { continue };
        let v = substitute(alg, &alg.diff[x], pair.b, &sub);
        out.set_diff(nx, v.map_arrows(|y| map[y]));
    }
    out.check_well_formed()?;
    out.check_d_squared()?;
    Ok(out)
}

/// Order in which [`reduce_to_fixpoint`] picks among cancellable pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Smallest `(|a|, name of a, name of b)`.
    #[default]
    SmallestDegree,
    /// Largest `(|a|, name of a, name of b)`.
    LargestDegree,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    pub strategy: Strategy,
    /// Skip the degree-0 acyclicity precondition. The algebra is then read
    /// as a completed path algebra, where the substitutions remain valid.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub a: String,
    pub b: String,
    pub k1: String,
    /// The value substituted for `b`.
    pub substitution: String,
    pub arrows_after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
    pub final_arrows: usize,
    /// Set when no step was attempted because the preconditions failed.
    pub diagnostic: Option<String>,
}

fn pick(alg: &DgQuiverAlgebra, pairs: Vec<CancellablePair>, strategy: Strategy) -> Option<CancellablePair> {
    let q = &alg.quiver;
    let key = |c: &CancellablePair| (q.deg(c.a), q.name(c.a).to_string(), q.name(c.b).to_string());
    match strategy {
        Strategy::SmallestDegree => pairs.into_iter().min_by_key(key),
        Strategy::LargestDegree => pairs.into_iter().max_by_key(key),
    }
}

/// Cancel pairs until none is left.
pub fn reduce_to_fixpoint(alg: &DgQuiverAlgebra, opts: ReduceOptions) -> Result<(DgQuiverAlgebra, ReductionTrace)> {
    let mut cur = alg.clone();
    let mut trace = ReductionTrace::default();
    if !opts.complete {
        trace.diagnostic = precondition_failure(&cur);
        if trace.diagnostic.is_some() {
            trace.final_arrows = cur.arrow_count();
            return Ok((cur, trace));
        }
    }
    // Cancelling never creates a degree-0 cycle, so the check is done once.
    while let Some(pair) = pick(&cur, find_cancellable(&cur, true).pairs, opts.strategy) {
        let q = &cur.quiver;
        let sub = pair.p.scale(&-(Coeff::one() / &pair.k1));
        let mut step = TraceStep {
            a: q.name(pair.a).to_string(),
            b: q.name(pair.b).to_string(),
            k1: coeff_to_string(&pair.k1),
            substitution: sub.display(q),
            arrows_after: 0,
        };
        cur = cancel_pair(&cur, &pair)?;
        step.arrows_after = cur.arrow_count();
        trace.steps.push(step);
    }
    trace.final_arrows = cur.arrow_count();
    Ok((cur, trace))
}

/// Re-run a trace by arrow names.
pub fn replay(alg: &DgQuiverAlgebra, trace: &ReductionTrace) -> Result<DgQuiverAlgebra> {
    let mut cur = alg.clone();
    for step in &trace.steps {
        let q = &cur.quiver;
        let stale = || Error::StalePair { a: step.a.clone(), b: step.b.clone() };
        let (a, b) = (q.arrow_id(&step.a).ok_or_else(stale)?, q.arrow_id(&step.b).ok_or_else(stale)?);
        let pair = find_cancellable(&cur, true).pairs.into_iter().find(|c| c.a == a && c.b == b).ok_or_else(stale)?;
        cur = cancel_pair(&cur, &pair)?;
    }
    Ok(cur)
}

/// How closely two differentials must agree under an arrow bijection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoMode {
    /// Some rescaling of arrows by `±1` carries one differential onto the other.
    #[default]
    Strict,
    /// Coefficients agree up to sign, term by term.
    SignRelaxed,
    /// Only the monomial supports agree.
    Support,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoWitness {
    pub mode: IsoMode,
    pub vertices: Vec<(String, String)>,
    /// `(arrow, image, scalar)`; the scalar is `±1`, and `1` outside strict mode.
    pub arrows: Vec<(String, String, i64)>,
}

/// Cheap per-vertex invariant: sorted (direction, degree) incidences.
fn vertex_signature(alg: &DgQuiverAlgebra, v: VertexId) -> Vec<(u8, i64)> {
    let mut sig: Vec<(u8, i64)> = alg
        .quiver
        .arrows
        .iter()
        .filter_map(|a| match (a.src == v, a.tgt == v) {
            (true, true) => Some((0, a.deg)),
            (true, false) => Some((1, a.deg)),
            (false, true) => Some((2, a.deg)),
            _ => None,
        })
        .collect();
    sig.sort();
    sig
}

struct IsoSearch<'a> {
    a1: &'a DgQuiverAlgebra,
    a2: &'a DgQuiverAlgebra,
    mode: IsoMode,
    vmap: Vec<VertexId>,
    order: Vec<ArrowId>,
    candidates: Vec<Vec<ArrowId>>,
    amap: Vec<Option<ArrowId>>,
    used: Vec<bool>,
    /// Arrows whose differential can be compared once arrow `k` of `order` is placed.
    checks_at: Vec<Vec<ArrowId>>,
}

impl IsoSearch<'_> {
    fn map_path(&self, p: &Path) -> Path {
        Path {
            arrows: p.arrows.iter().map(|&a| self.amap[a].expect("assigned")).collect(),
            start: self.vmap[p.start],
            end: self.vmap[p.end],
        }
    }

    fn differential_matches(&self, x: ArrowId) -> bool {
        let d1 = &self.a1.diff[x];
        let d2 = &self.a2.diff[self.amap[x].expect("assigned")];
        if d1.len() != d2.len() {
            return false;
        }
        d1.terms().all(|(p, c)| {
            let c2 = d2.coeff_of(&self.map_path(p));
            !c2.is_zero() && (self.mode == IsoMode::Support || c2.abs() == c.abs())
        })
    }

    /// Scalars `±1` per arrow making the bijection a strict isomorphism.
    fn strict_signs(&self) -> Option<Vec<bool>> {
        let n = self.a1.arrow_count();
        let mut rows = Vec::new();
        for x in 0..n {
            let d2 = &self.a2.diff[self.amap[x].expect("assigned")];
            for (p, c) in self.a1.diff[x].terms() {
                let c2 = d2.coeff_of(&self.map_path(p));
                if c2 != *c && c2 != -c.clone() {
                    return None;
                }
                let mut row = vec![false; n + 1];
                row[x] ^= true;
                for &a in &p.arrows {
                    row[a] ^= true;
                }
                row[n] = c2 != *c;
                rows.push(row);
            }
        }
        solve_gf2(rows, n)
    }

    fn assign(&mut self, k: usize) -> Option<Vec<bool>> {
        if k == self.order.len() {
            return match self.mode {
                IsoMode::Strict => self.strict_signs(),
                _ => Some(vec![false; self.a1.arrow_count()]),
            };
        }
        let x = self.order[k];
        for c in self.candidates[x].clone() {
            if self.used[c] {
                continue;
            }
            self.amap[x] = Some(c);
            self.used[c] = true;
            if self.checks_at[k].iter().all(|&y| self.differential_matches(y)) {
                if let Some(s) = self.assign(k + 1) {
                    return Some(s);
                }
            }
            self.used[c] = false;
            self.amap[x] = None;
        }
        None
    }
}

fn vertex_bijections(a1: &DgQuiverAlgebra, a2: &DgQuiverAlgebra) -> Vec<Vec<VertexId>> {
    let n = a1.quiver.vertices.len();
    let s1: Vec<_> = (0..n).map(|v| vertex_signature(a1, v)).collect();
    let s2: Vec<_> = (0..n).map(|v| vertex_signature(a2, v)).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(
        s1: &[Vec<(u8, i64)>],
        s2: &[Vec<(u8, i64)>],
        cur: &mut Vec<VertexId>,
        used: &mut [bool],
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let k = cur.len();
        if k == s1.len() {
            out.push(cur.clone());
            return;
        }
        for w in 0..s2.len() {
            if !used[w] && s1[k] == s2[w] {
                used[w] = true;
                cur.push(w);
                go(s1, s2, cur, used, out);
                cur.pop();
                used[w] = false;
            }
        }
    }
    go(&s1, &s2, &mut cur, &mut used, &mut out);
    out
}

/// Search for an isomorphism of dg quiver algebras that maps arrows to
/// arrows. Errors when either side exceeds the arrow cap.
pub fn iso_check(a1: &DgQuiverAlgebra, a2: &DgQuiverAlgebra, mode: IsoMode) -> Result<Option<IsoWitness>> {
    iso_check_capped(a1, a2, mode, arrow_cap())
}

pub fn iso_check_capped(a1: &DgQuiverAlgebra, a2: &DgQuiverAlgebra, mode: IsoMode, cap: usize) -> Result<Option<IsoWitness>> {
    for a in [a1, a2] {
        if a.arrow_count() > cap {
            return Err(Error::TooLarge { found: a.arrow_count(), cap });
        }
    }
    let (q1, q2) = (&a1.quiver, &a2.quiver);
    if q1.vertices.len() != q2.vertices.len() || q1.arrows.len() != q2.arrows.len() {
        return Ok(None);
    }
    let degs = |q: &GradedQuiver| {
        let mut d: Vec<i64> = q.arrows.iter().map(|a| a.deg).collect();
        d.sort();
        d
    };
    if degs(q1) != degs(q2) {
        return Ok(None);
    }
    let n = q1.arrows.len();
    for vmap in vertex_bijections(a1, a2) {
        let key1 = |a: ArrowId| (vmap[q1.arrow(a).src], vmap[q1.arrow(a).tgt], q1.deg(a));
        let candidates: Vec<Vec<ArrowId>> = (0..n)
            .map(|a| (0..n).filter(|&b| (q2.arrow(b).src, q2.arrow(b).tgt, q2.deg(b)) == key1(a)).collect())
            .collect();
        if candidates.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut order: Vec<ArrowId> = (0..n).collect();
        order.sort_by_key(|&a| (candidates[a].len(), a));
        let pos: BTreeMap<ArrowId, usize> = order.iter().enumerate().map(|(k, &a)| (a, k)).collect();
        let mut checks_at = vec![Vec::new(); n];
        for x in 0..n {
            let last = a1.diff[x].terms().flat_map(|(p, _)| p.arrows.iter().map(|a| pos[a])).chain([pos[&x]]).max();
            checks_at[last.expect("contains x")].push(x);
        }
        let mut search = IsoSearch {
            a1,
            a2,
            mode,
            vmap: vmap.clone(),
            order,
            candidates,
            amap: vec![None; n],
            used: vec![false; n],
            checks_at,
        };
        if let Some(signs) = search.assign(0) {
            return Ok(Some(IsoWitness {
                mode,
                vertices: (0..vmap.len()).map(|v| (q1.vertices[v].clone(), q2.vertices[vmap[v]].clone())).collect(),
                arrows: (0..n)
                    .map(|a| {
                        let b = search.amap[a].expect("complete");
                        (q1.name(a).to_string(), q2.name(b).to_string(), if signs[a] { -1 } else { 1 })
                    })
                    .collect(),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub ok: bool,
    pub arrows: Option<usize>,
    pub detail: Option<String>,
    pub millis: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub arc: String,
    pub mode: IsoMode,
    pub passed: bool,
    pub stages: Vec<Stage>,
    pub traces: Vec<ReductionTrace>,
    pub iso_witnesses: Vec<IsoWitness>,
}

impl VerifyReport {
    /// Zero the stage timings so that repeated runs serialize identically.
    pub fn without_timings(mut self) -> Self {
        for s in &mut self.stages {
            s.millis = 0;
        }
        self
    }
}

struct Recorder {
    stages: Vec<Stage>,
}

impl Recorder {
    fn run<T>(&mut self, name: &str, count: impl Fn(&T) -> usize, f: impl FnOnce() -> Result<T>) -> Option<T> {
        let t = Instant::now();
        let r = f();
        let millis = t.elapsed().as_millis();
        let (ok, arrows, detail, v) = match r {
            Ok(v) => (true, Some(count(&v)), None, Some(v)),
            Err(e) => (false, None, Some(e.to_string()), None),
        };
        self.stages.push(Stage { name: name.into(), ok, arrows, detail, millis });
        v
    }
}

/// Check that reducing the mutated Ginzburg algebra, mutating the surface
/// quiver with superpotential, and flipping the arc all give isomorphic
/// algebras. Stage failures are recorded in the report, not returned;
/// an algebra above the arrow cap is an error.
pub fn verify_commute(s: &Surface, arc: &str, mode: IsoMode) -> Result<VerifyReport> {
    verify_commute_capped(s, arc, mode, arrow_cap())
}

pub fn verify_commute_capped(s: &Surface, arc: &str, mode: IsoMode, cap: usize) -> Result<VerifyReport> {
    let base = build_qsp(s)?;
    let i = vertex_of(&base.quiver, arc)?;
    let mut rec = Recorder { stages: Vec::new() };
    let mut report =
        VerifyReport { arc: arc.into(), mode, passed: false, stages: Vec::new(), traces: Vec::new(), iso_witnesses: Vec::new() };
    let count = |a: &DgQuiverAlgebra| a.arrow_count();
    let g1 = rec.run("mutated_differential", count, || mutated_differential(&base, i));
    let g1r = g1.and_then(|g1| {
        rec.run(
            "reduce",
            |r: &(DgQuiverAlgebra, ReductionTrace)| r.0.arrow_count(),
            || reduce_to_fixpoint(&g1, ReduceOptions { complete: true, ..Default::default() }),
        )
    });
    let g1r = g1r.map(|(alg, trace)| {
        report.traces.push(trace);
        alg
    });
    let g2 = rec.run("surface_mutate", count, || {
        let m = surface_mutate(&base, i)?;
        ginzburg(&m.qsp.quiver, &m.qsp.potential)
    });
    let g3 = rec.run("flip", count, || {
        let (flipped, _) = s.flip(arc)?;
        let q = build_qsp(&flipped)?;
        ginzburg(&q.quiver, &q.potential)
    });
    if let Some(found) = [&g1r, &g2, &g3].into_iter().flatten().map(|a| a.arrow_count()).find(|&n| n > cap) {
        return Err(Error::TooLarge { found, cap });
    }
    let mut legs_ok = 0;
    for (name, x, y) in [("iso reduced~surface", &g1r, &g2), ("iso surface~flip", &g2, &g3)] {
        let (Some(x), Some(y)) = (x, y) else { continue };
        let w = rec.run(name, |w: &IsoWitness| w.arrows.len(), || {
            iso_check_capped(x, y, mode, cap)?.ok_or_else(|| Error::InvalidQuiver("no isomorphism found".into()))
        });
        if let Some(w) = w {
            report.iso_witnesses.push(w);
            legs_ok += 1;
        }
    }
    report.passed = legs_ok == 2;
    report.stages = rec.stages;
    Ok(report)
}

/// An arrow correspondence carrying one potential onto another term by
/// term, up to the sign of each term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialMatch {
    /// `(arrow, image, scalar)`, restricted to arrows occurring in the potentials.
    pub arrows: Vec<(String, String, i64)>,
    /// Whether the scalars make every coefficient agree exactly.
    pub strict: bool,
}

/// Search for a degree- and incidence-preserving injection of the arrows of
/// `w1` into those of `w2` that carries terms onto terms, cyclic rotation
/// signs included. Prefers a correspondence that is exact after rescaling
/// arrows by `±1`.
pub fn match_potentials(q1: &GradedQuiver, w1: &Potential, q2: &GradedQuiver, w2: &Potential) -> Option<PotentialMatch> {
    let support = |w: &Potential| -> Vec<ArrowId> {
        let s: BTreeSet<ArrowId> = w.terms().flat_map(|(c, _)| c.iter().copied()).collect();
        s.into_iter().collect()
    };
    let (s1, s2) = (support(w1), support(w2));
    if s1.len() != s2.len() || w1.len() != w2.len() {
        return None;
    }
    struct M<'a> {
        q1: &'a GradedQuiver,
        q2: &'a GradedQuiver,
        w1: &'a Potential,
        w2: &'a Potential,
        s1: Vec<ArrowId>,
        s2: Vec<ArrowId>,
        amap: BTreeMap<ArrowId, ArrowId>,
        vmap: BTreeMap<VertexId, VertexId>,
        first: Option<PotentialMatch>,
    }
    impl M<'_> {
        fn finish(&mut self) -> bool {
            let n = self.s1.len();
            let col: BTreeMap<ArrowId, usize> = self.s1.iter().enumerate().map(|(k, &a)| (a, k)).collect();
            let mut rows = Vec::new();
            for (c, v1) in self.w1.terms() {
                let mapped: Vec<ArrowId> = c.iter().map(|a| self.amap[a]).collect();
                let v2 = self.w2.coeff_of(self.q2, &mapped);
                if v2.is_zero() || v2.abs() != v1.abs() {
                    return false;
                }
                let mut row = vec![false; n + 1];
                for a in c {
                    row[col[a]] ^= true;
                }
                row[n] = v2 != *v1;
                rows.push(row);
            }
            let signs = solve_gf2(rows, n);
            let found = PotentialMatch {
                arrows: self
                    .s1
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| {
                        let s = signs.as_ref().map_or(1, |x| if x[k] { -1 } else { 1 });
                        (self.q1.name(a).to_string(), self.q2.name(self.amap[&a]).to_string(), s)
                    })
                    .collect(),
                strict: signs.is_some(),
            };
            let strict = found.strict;
            if self.first.is_none() || strict {
                self.first = Some(found);
            }
            strict
        }

        fn bind(&mut self, v: VertexId, w: VertexId) -> Option<bool> {
            match self.vmap.get(&v) {
                Some(&x) => (x == w).then_some(false),
                None if self.vmap.values().any(|&x| x == w) => None,
                None => {
                    self.vmap.insert(v, w);
                    Some(true)
                }
            }
        }

        fn go(&mut self, k: usize) -> bool {
            if k == self.s1.len() {
                return self.finish();
            }
            let a = self.s1[k];
            let (src, tgt, deg) = (self.q1.arrow(a).src, self.q1.arrow(a).tgt, self.q1.deg(a));
            for b in self.s2.clone() {
                if self.q2.deg(b) != deg || self.amap.values().any(|&x| x == b) {
                    continue;
                }
                let Some(new_s) = self.bind(src, self.q2.arrow(b).src) else { continue };
                let Some(new_t) = self.bind(tgt, self.q2.arrow(b).tgt) else {
                    if new_s {
                        self.vmap.remove(&src);
                    }
                    continue;
                };
                self.amap.insert(a, b);
                if self.go(k + 1) {
                    return true;
                }
                self.amap.remove(&a);
                if new_t {
                    self.vmap.remove(&tgt);
                }
                if new_s {
                    self.vmap.remove(&src);
                }
            }
            false
        }
    }
    let mut m = M { q1, q2, w1, w2, s1, s2, amap: BTreeMap::new(), vmap: BTreeMap::new(), first: None };
    m.go(0);
    m.first
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{coeff, Origin};
    use crate::fixtures;
    use crate::mutation::mutate_qsp;

    fn gamma(name: &str) -> DgQuiverAlgebra {
        let q = build_qsp(&fixtures::surface(name).unwrap()).unwrap();
        ginzburg(&q.quiver, &q.potential).unwrap()
    }

    fn names(alg: &DgQuiverAlgebra) -> Vec<String> {
        alg.quiver.arrows.iter().map(|a| a.id.clone()).collect()
    }

    fn complete() -> ReduceOptions {
        ReduceOptions { complete: true, ..Default::default() }
    }

    #[test]
    fn counterexamples_have_no_cancellable_pairs() {
        for alg in [fixtures::counterexample_1(), fixtures::counterexample_2()] {
            let c = find_cancellable(&alg, false);
            assert!(c.pairs.is_empty());
            assert!(c.diagnostic.is_some());
            let (out, trace) = reduce_to_fixpoint(&alg, ReduceOptions::default()).unwrap();
            assert_eq!(out, alg);
            assert!(trace.steps.is_empty());
        }
    }

    #[test]
    fn degree_zero_cycle_is_reported() {
        let c = find_cancellable(&fixtures::counterexample_2(), false);
        assert!(c.diagnostic.unwrap().starts_with("degree-0 cycle"));
        assert!(degree_zero_cycle(&fixtures::counterexample_1()).is_none());
    }

    #[test]
    fn cancellation_example_reduces_to_two_arrows() {
        let alg = fixtures::cancellation_example();
        let c = find_cancellable(&alg, false);
        assert_eq!(c.pairs.len(), 1);
        let pair = &c.pairs[0];
        assert_eq!((alg.quiver.name(pair.a), alg.quiver.name(pair.b)), ("alpha", "a"));
        assert_eq!(pair.k1, coeff(-1));
        assert_eq!(pair.p.display(&alg.quiver), "b·c");
        let out = cancel_pair(&alg, pair).unwrap();
        assert_eq!(names(&out), ["b", "c"]);
        assert!(out.diff.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn stale_pairs_are_rejected() {
        let alg = fixtures::cancellation_example();
        let mut pair = find_cancellable(&alg, false).pairs.remove(0);
        pair.k1 = coeff(2);
        assert_eq!(cancel_pair(&alg, &pair).unwrap_err().code(), "stale_pair");
    }

    /// u: 1→3, v: 3→2, and degree -1 arrows a1, a2, z: 1→2 over b1, b2: 1→2
    /// with d(a1) = b1 - uv, d(a2) = b2 - b1, d(z) = b2 - b1.
    fn chained() -> DgQuiverAlgebra {
        let mut q = GradedQuiver::new(3);
        for v in ["1", "2", "3"] {
            q.add_vertex(v);
        }
        let u = q.add_arrow("u", 0, 2, 0, Origin::Plain);
        let v = q.add_arrow("v", 2, 1, 0, Origin::Plain);
        let b1 = q.add_arrow("b1", 0, 1, 0, Origin::Plain);
        let b2 = q.add_arrow("b2", 0, 1, 0, Origin::Plain);
        let a1 = q.add_arrow("a1", 0, 1, -1, Origin::Plain);
        let a2 = q.add_arrow("a2", 0, 1, -1, Origin::Plain);
        let z = q.add_arrow("z", 0, 1, -1, Origin::Plain);
        let mut alg = DgQuiverAlgebra::new(q);
        let path = |alg: &DgQuiverAlgebra, xs: &[ArrowId]| PathSum::from_path(Path::from_arrows(&alg.quiver, xs).unwrap());
        let uv = path(&alg, &[u, v]);
        let (pb1, pb2) = (path(&alg, &[b1]), path(&alg, &[b2]));
        alg.set_diff(a1, pb1.sub(&uv));
        alg.set_diff(a2, pb2.sub(&pb1));
        alg.set_diff(z, pb2.sub(&pb1));
        alg.check_d_squared().unwrap();
        alg
    }

    #[test]
    fn second_cancellation_sees_the_first_substitution() {
        let alg = chained();
        let (out, trace) = reduce_to_fixpoint(&alg, ReduceOptions::default()).unwrap();
        assert_eq!(trace.steps.iter().map(|s| (s.a.as_str(), s.b.as_str())).collect::<Vec<_>>(), [("a1", "b1"), ("a2", "b2")]);
        // One-shot oracle: b1 ↦ uv, then b2 ↦ b1 ↦ uv, so d(z) = uv - uv = 0.
        assert_eq!(names(&out), ["u", "v", "z"]);
        assert!(out.diff.iter().all(|x| x.is_zero()));
        assert_eq!(trace.steps[1].substitution, "u·v");
    }

    #[test]
    fn trace_replays_to_the_same_algebra() {
        let base = build_qsp(&fixtures::surface("ann4").unwrap()).unwrap();
        let g = mutated_differential(&base, 0).unwrap();
        let (out, trace) = reduce_to_fixpoint(&g, complete()).unwrap();
        assert_eq!(replay(&g, &trace).unwrap(), out);
        for w in trace.steps.windows(2) {
            assert_eq!(w[0].arrows_after, w[1].arrows_after + 2);
        }
    }

    #[test]
    fn minimal_algebra_is_left_alone() {
        let g = gamma("pent5");
        assert!(g.is_minimal());
        let (out, trace) = reduce_to_fixpoint(&g, complete()).unwrap();
        assert_eq!(out, g);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn ginzburg_algebras_with_degree_zero_cycles_need_complete_mode() {
        let g = gamma("a3");
        let (_, trace) = reduce_to_fixpoint(&mutated_differential(&build_qsp(&fixtures::surface("a3").unwrap()).unwrap(), 0).unwrap(), ReduceOptions::default()).unwrap();
        assert!(trace.diagnostic.is_some() && trace.steps.is_empty());
        assert!(degree_zero_cycle(&g).is_some());
    }

    #[test]
    fn a3_reduction_cancels_the_superfluous_pairs() {
        let base = build_qsp(&fixtures::surface("a3").unwrap()).unwrap();
        let (_, trace) = reduce_to_fixpoint(&mutated_differential(&base, 0).unwrap(), complete()).unwrap();
        let mut cancelled: Vec<&str> = trace.steps.iter().flat_map(|s| [s.a.as_str(), s.b.as_str()]).collect();
        cancelled.sort();
        assert_eq!(cancelled, ["[a_{2+,1+} a_{3+,1+}^-1]", "[a_{3+,1+} a_{1+,2+}]", "a_{2+,3+}", "a_{3+,2+}"]);
    }

    #[test]
    fn reduction_removes_exactly_the_superfluous_pairs() {
        for (name, s) in fixtures::surfaces() {
            let base = build_qsp(&s).unwrap();
            for v in 0..base.quiver.vertices.len() {
                let r = surface_mutate(&base, v).unwrap();
                let pairs: BTreeSet<&String> = r.superfluous.iter().flat_map(|x| x.composite.iter().chain(&x.duplicate)).collect();
                let (_, trace) = reduce_to_fixpoint(&mutated_differential(&base, v).unwrap(), complete()).unwrap();
                assert_eq!(trace.steps.len() * 2, pairs.len(), "{name} {v}");
            }
        }
    }

    #[test]
    fn reduction_is_strategy_independent_up_to_iso() {
        for (name, s) in fixtures::surfaces() {
            let base = build_qsp(&s).unwrap();
            for v in 0..base.quiver.vertices.len() {
                let g = mutated_differential(&base, v).unwrap();
                let (x, _) = reduce_to_fixpoint(&g, complete()).unwrap();
                let (y, _) =
                    reduce_to_fixpoint(&g, ReduceOptions { strategy: Strategy::LargestDegree, complete: true }).unwrap();
                assert!(iso_check(&x, &y, IsoMode::SignRelaxed).unwrap().is_some(), "{name} {v}");
            }
        }
    }

    #[test]
    fn algebra_is_strictly_isomorphic_to_itself() {
        let g = gamma("disk4");
        let w = iso_check(&g, &g, IsoMode::Strict).unwrap().unwrap();
        assert_eq!(w.arrows.len(), g.arrow_count());
    }

    #[test]
    fn different_degrees_are_never_isomorphic() {
        assert!(iso_check(&gamma("a3"), &gamma("disk4"), IsoMode::Support).unwrap().is_none());
    }

    /// Two parallel degree -1 arrows over the squares 1→2→4 and 1→3→4,
    /// with the sign of one term chosen by `flip`.
    fn squares(flip: bool) -> DgQuiverAlgebra {
        let mut q = GradedQuiver::new(3);
        for v in ["1", "2", "3", "4"] {
            q.add_vertex(v);
        }
        let a = q.add_arrow("a", 0, 1, 0, Origin::Plain);
        let b = q.add_arrow("b", 1, 3, 0, Origin::Plain);
        let c = q.add_arrow("c", 0, 2, 0, Origin::Plain);
        let e = q.add_arrow("e", 2, 3, 0, Origin::Plain);
        let x = q.add_arrow("x", 0, 3, -1, Origin::Plain);
        let y = q.add_arrow("y", 0, 3, -1, Origin::Plain);
        let mut alg = DgQuiverAlgebra::new(q);
        let p = |alg: &DgQuiverAlgebra, xs: &[ArrowId]| Path::from_arrows(&alg.quiver, xs).unwrap();
        let mut dx = PathSum::from_path(p(&alg, &[a, b]));
        dx.add_term(p(&alg, &[c, e]), coeff(1));
        let mut dy = PathSum::from_path(p(&alg, &[a, b]));
        dy.add_term(p(&alg, &[c, e]), coeff(if flip { -1 } else { 1 }));
        alg.set_diff(x, dx);
        alg.set_diff(y, dy);
        alg
    }

    #[test]
    fn strict_mode_sees_signs_that_rescaling_cannot_fix() {
        let (plain, twisted) = (squares(false), squares(true));
        assert!(iso_check(&plain, &twisted, IsoMode::Strict).unwrap().is_none());
        assert!(iso_check(&plain, &twisted, IsoMode::SignRelaxed).unwrap().is_some());
        assert!(iso_check(&plain, &twisted, IsoMode::Support).unwrap().is_some());
    }

    #[test]
    fn oversize_input_is_refused() {
        let mut q = GradedQuiver::new(3);
        q.add_vertex("1");
        for k in 0..=DEFAULT_CAP {
            q.add_arrow(format!("x{k}"), 0, 0, -1, Origin::Plain);
        }
        let alg = DgQuiverAlgebra::new(q);
        let err = iso_check(&alg, &alg, IsoMode::Support).unwrap_err();
        assert_eq!(err.code(), "too_large");
    }

    #[test]
    fn a3_commutes_strictly() {
        let r = verify_commute(&fixtures::surface("a3").unwrap(), "1", IsoMode::Strict).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.iso_witnesses.len(), 2);
        assert_eq!(r.traces[0].steps.len(), 2);
    }

    #[test]
    fn self_folded_arc_commutes() {
        let r = verify_commute(&fixtures::surface("self4").unwrap(), "1", IsoMode::SignRelaxed).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(serde_json::to_value(&r).unwrap()["stages"].as_array().unwrap().iter().all(|s| s["ok"] == true));
    }

    #[test]
    fn disk_commutes_at_every_arc() {
        let s = fixtures::surface("disk4").unwrap();
        for arc in s.arcs() {
            assert!(verify_commute(&s, &arc, IsoMode::SignRelaxed).unwrap().passed, "{arc}");
        }
    }

    #[test]
    fn verification_above_the_cap_is_an_error() {
        let err = verify_commute_capped(&fixtures::surface("disk4").unwrap(), "1", IsoMode::Strict, 3).unwrap_err();
        assert_eq!(err.code(), "too_large");
    }

    #[test]
    fn unknown_arc_is_an_error() {
        let err = verify_commute(&fixtures::surface("a3").unwrap(), "99", IsoMode::Strict).unwrap_err();
        assert_eq!(err.code(), "unknown_vertex");
    }

    #[test]
    fn self4_surface_potential_matches_the_worked_example() {
        // W' = a31- a1-1+ a1+3 - c32 c21+ a1+3 + c21+ a1+1- a*21+ + c23 a31- a*21+
        // on the glued vertices 1, 2, 3 with degrees read off the flipped face.
        let base = build_qsp(&fixtures::surface("self4").unwrap()).unwrap();
        let r = surface_mutate(&base, 0).unwrap();
        let mut q = GradedQuiver::new(4);
        for v in ["1", "2", "3"] {
            q.add_vertex(v);
        }
        let mut add = |n: &str, s: usize, t: usize, d: i64| q.add_arrow(n, s, t, d, Origin::Plain);
        let a31 = add("a31-", 2, 0, 0);
        let lm = add("a1-1+", 0, 0, -1);
        let a13 = add("a1+3", 0, 2, 0);
        let c32 = add("c32", 2, 1, -1);
        let c21 = add("c21+", 1, 0, 0);
        let lp = add("a1+1-", 0, 0, -1);
        let st = add("a*21+", 0, 1, 0);
        let c23 = add("c23", 1, 2, -1);
        let mut w = Potential::zero();
        w.add_cycle(&q, &[a31, lm, a13], coeff(1)).unwrap();
        w.add_cycle(&q, &[c32, c21, a13], coeff(-1)).unwrap();
        w.add_cycle(&q, &[c21, lp, st], coeff(1)).unwrap();
        w.add_cycle(&q, &[c23, a31, st], coeff(1)).unwrap();
        let m = match_potentials(&q, &w, &r.qsp.quiver, &r.qsp.potential).expect("match");
        assert!(m.strict);
        assert_eq!(m.arrows.len(), 8);
    }

    #[test]
    fn potentials_with_different_term_counts_do_not_match() {
        let (m, w) = mutate_qsp(&build_qsp(&fixtures::surface("a3").unwrap()).unwrap(), 0).unwrap();
        assert!(match_potentials(&m.quiver, &w, &m.quiver, &Potential::zero()).is_none());
        assert!(match_potentials(&m.quiver, &w, &m.quiver, &w).unwrap().strict);
    }
}
