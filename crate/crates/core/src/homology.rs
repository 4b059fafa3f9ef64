//! Truncated cohomology of dg quiver algebras and certified nonzero classes.
//!
//! Cochains of degree `k` are spanned by paths of degree `k`. When every
//! `d(arrow)` consists of paths of one common length `1 + δ`, the differential
//! maps length `ℓ` to length `ℓ + δ`, so the complex splits into finite
//! pieces and the dimension is exact. Otherwise the window is a heuristic
//! and the report carries the dimensions at `L - 1`, `L` and `L + 1`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{Coeff, DgQuiverAlgebra, Path, PathSum};
use crate::error::{Error, Result};
use crate::io::{pathsum_to_json, TermJson};

pub const LENGTH_CAP_ENV: &str = "DGONLAB_CAP_LENGTH";
pub const DEFAULT_LENGTH: usize = 8;
pub const DEFAULT_LENGTH_CAP: usize = 14;
/// Largest number of basis paths enumerated for one degree.
pub const BASIS_CAP: usize = 200_000;

pub fn length_cap() -> usize {
    std::env::var(LENGTH_CAP_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_LENGTH_CAP)
}

/// Row echelon form over the rationals, built one vector at a time.
/// Every stored row has leading entry 1 at a distinct column.
#[derive(Default)]
struct Echelon {
    rows: BTreeMap<usize, BTreeMap<usize, Coeff>>,
}

impl Echelon {
    fn reduce(&self, mut v: BTreeMap<usize, Coeff>, stop: usize) -> BTreeMap<usize, Coeff> {
        while let Some((&c, x)) = v.iter().next() {
            if c >= stop {
                break;
            }
            let Some(row) = self.rows.get(&c) else { break };
            let x = x.clone();
            for (&k, y) in row {
                let e = v.entry(k).or_insert_with(Coeff::zero);
                *e -= &x * y;
                if e.is_zero() {
                    v.remove(&k);
                }
            }
        }
        v
    }

    /// Add a vector; returns whether it was independent of the rows so far.
    fn insert(&mut self, v: BTreeMap<usize, Coeff>) -> bool {
        let v = self.reduce(v, usize::MAX);
        let Some((&c, lead)) = v.iter().next() else { return false };
        let inv = Coeff::from_integer(1.into()) / lead;
        self.rows.insert(c, v.into_iter().map(|(k, x)| (k, x * &inv)).collect());
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Paths of degree `deg` and length at most `max_len`, idempotents included.
pub fn basis(alg: &DgQuiverAlgebra, deg: i64, max_len: usize) -> Result<Vec<Path>> {
    let q = &alg.quiver;
    let nonpositive = alg.is_non_positive();
    let mut out = Vec::new();
    let mut stack: Vec<Path> = (0..q.vertices.len()).map(Path::idempotent).collect();
    while let Some(p) = stack.pop() {
        let pd = p.degree(q);
        if pd == deg {
            out.push(p.clone());
            if out.len() > BASIS_CAP {
                return Err(Error::Homology(format!("more than {BASIS_CAP} paths of degree {deg} up to length {max_len}")));
            }
        }
        if p.len() == max_len {
            continue;
        }
        for a in q.out_arrows(p.end) {
            let nd = pd + q.deg(a);
            if nonpositive && nd < deg {
                continue;
            }
            let mut arrows = p.arrows.clone();
            arrows.push(a);
            stack.push(Path { arrows, start: p.start, end: q.arrow(a).tgt });
        }
    }
    out.sort();
    Ok(out)
}

/// The common length increment `δ` of the differential, if there is one.
pub fn length_increment(alg: &DgQuiverAlgebra) -> Option<usize> {
    let mut lens = alg.diff.iter().flat_map(|x| x.terms().map(|(p, _)| p.len()));
    let first = lens.next().unwrap_or(1);
    if first == 0 || lens.any(|l| l != first) {
        return None;
    }
    Some(first - 1)
}

struct Indexer {
    index: BTreeMap<Path, usize>,
}

impl Indexer {
    fn new() -> Self {
        Indexer { index: BTreeMap::new() }
    }

    fn col(&mut self, p: &Path) -> usize {
        let n = self.index.len();
        *self.index.entry(p.clone()).or_insert(n)
    }

    fn vector(&mut self, x: &PathSum) -> BTreeMap<usize, Coeff> {
        x.terms().map(|(p, c)| (self.col(p), c.clone())).collect()
    }
}

fn rank_of(alg: &DgQuiverAlgebra, paths: &[Path], keep: impl Fn(&Path) -> bool) -> usize {
    let mut idx = Indexer::new();
    let mut e = Echelon::default();
    for p in paths {
        let v = alg.d_path(p).filter(&keep);
        e.insert(idx.vector(&v));
    }
    e.rank()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub degree: i64,
    pub max_len: usize,
    pub dim: usize,
    /// Whether the differential has a uniform length increment.
    pub exact: bool,
    /// Number of basis paths in degrees `k - 1`, `k`, `k + 1` up to length `L`.
    pub basis_sizes: [usize; 3],
    /// Dimensions for windows `L - 1`, `L`, `L + 1`.
    pub stabilization: [usize; 3],
    pub stable: bool,
}

/// `dim H^k` restricted to paths of length at most `max_len`.
pub fn cohomology_dim(alg: &DgQuiverAlgebra, k: i64, max_len: usize) -> Result<CohomologyReport> {
    let cap = length_cap();
    if max_len > cap || max_len == 0 {
        return Err(Error::Homology(format!("length window {max_len} outside 1..={cap}")));
    }
    for x in &alg.diff {
        if x.terms().any(|(p, _)| p.is_empty()) {
            return Err(Error::Homology("differential leaves the arrow ideal".into()));
        }
    }
    let delta = length_increment(alg);
    let top = max_len + 1;
    let lower = basis(alg, k - 1, top)?;
    let middle = basis(alg, k, top)?;
    let sizes = [
        lower.iter().filter(|p| p.len() <= max_len).count(),
        middle.iter().filter(|p| p.len() <= max_len).count(),
        basis(alg, k + 1, max_len)?.len(),
    ];
    let stabilization = match delta {
        Some(delta) => {
            // H^k at length ℓ is the homology of C^{k-1}_{ℓ-δ} → C^k_ℓ → C^{k+1}_{ℓ+δ}.
            let mut per_len = vec![0usize; top + 1];
            for (l, slot) in per_len.iter_mut().enumerate() {
                let here: Vec<Path> = middle.iter().filter(|p| p.len() == l).cloned().collect();
                let kernel = here.len() - rank_of(alg, &here, |_| true);
                let image = match l.checked_sub(delta) {
                    Some(l0) => {
                        let from: Vec<Path> = lower.iter().filter(|p| p.len() == l0).cloned().collect();
                        rank_of(alg, &from, |_| true)
                    }
                    None => 0,
                };
                *slot = kernel - image;
            }
            let upto = |l: usize| per_len[..=l].iter().sum::<usize>();
            [upto(max_len - 1), upto(max_len), upto(top)]
        }
        None => {
            let window = |l: usize| {
                let mid: Vec<Path> = middle.iter().filter(|p| p.len() <= l).cloned().collect();
                let low: Vec<Path> = lower.iter().filter(|p| p.len() <= l).cloned().collect();
                let kernel = mid.len() - rank_of(alg, &mid, |_| true);
                // The part of the image lying inside the window.
                let image = rank_of(alg, &low, |_| true) - rank_of(alg, &low, |p| p.len() > l);
                kernel - image
            };
            [window(max_len - 1), window(max_len), window(top)]
        }
    };
    Ok(CohomologyReport {
        degree: k,
        max_len,
        dim: stabilization[1],
        exact: delta.is_some(),
        basis_sizes: sizes,
        stabilization,
        stable: stabilization[0] == stabilization[1] && stabilization[1] == stabilization[2],
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassVerdict {
    /// No preimage exists.
    Certified,
    /// `d(preimage) = z`.
    Refuted(PathSum),
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preimage: Option<Vec<TermJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub unknowns: usize,
}

impl ClassVerdict {
    pub fn report(&self, alg: &DgQuiverAlgebra, unknowns: usize) -> ClassReport {
        match self {
            ClassVerdict::Certified => ClassReport { verdict: "certified", preimage: None, reason: None, unknowns },
            ClassVerdict::Refuted(x) => ClassReport {
                verdict: "refuted",
                preimage: Some(pathsum_to_json(&alg.quiver, x)),
                reason: None,
                unknowns,
            },
            ClassVerdict::Inconclusive(r) => {
                ClassReport { verdict: "inconclusive", preimage: None, reason: Some(r.clone()), unknowns }
            }
        }
    }
}

/// Decide whether the cocycle `z` is a coboundary.
///
/// On a minimal algebra `d` raises length, so the terms of `d(x)` up to the
/// length of `z` only involve the part of `x` of length below it. If that
/// finite system has no solution, `z` is not a coboundary. Returns the
/// verdict and the number of unknowns in the system.
pub fn verify_nonzero_class(alg: &DgQuiverAlgebra, z: &PathSum) -> Result<(ClassVerdict, usize)> {
    let q = &alg.quiver;
    if z.is_zero() {
        return Ok((ClassVerdict::Refuted(PathSum::zero()), 0));
    }
    let deg = z.terms().next().map(|(p, _)| p.degree(q)).expect("nonzero");
    if !z.is_homogeneous(q, deg) {
        return Err(Error::Homology(format!("{} is not homogeneous", z.display(q))));
    }
    let dz = alg.apply(z);
    if !dz.is_zero() {
        return Err(Error::Homology(format!("d({}) = {} is not zero", z.display(q), dz.display(q))));
    }
    if !alg.is_minimal() {
        return Ok((ClassVerdict::Inconclusive("some differential has a linear term".into()), 0));
    }
    let m = z.max_len();
    if m == 0 {
        return Ok((ClassVerdict::Certified, 0));
    }
    let unknowns = basis(alg, deg - 1, m - 1)?;
    let n = unknowns.len();
    // Target columns come first; tag column `BIG + j` records unknown `j`.
    const BIG: usize = usize::MAX / 2;
    let mut idx = Indexer::new();
    let mut e = Echelon::default();
    for (j, p) in unknowns.iter().enumerate() {
        let mut v = idx.vector(&alg.d_path(p).filter(|x| x.len() <= m));
        v.insert(BIG + j, Coeff::from_integer(1.into()));
        e.insert(v);
    }
    let target = idx.vector(z);
    let rest = e.reduce(target, BIG);
    if rest.keys().any(|&c| c < BIG) {
        return Ok((ClassVerdict::Certified, n));
    }
    let mut x = PathSum::zero();
    for (c, v) in rest {
        x.add_term(unknowns[c - BIG].clone(), -v);
    }
    if alg.apply(&x) == *z {
        Ok((ClassVerdict::Refuted(x), n))
    } else {
        Ok((ClassVerdict::Inconclusive("a truncated preimage exists but does not lift".into()), n))
    }
}
