use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use super::path::{Path, PathSum};
use super::potential::{cyclic_derivative, Potential};
use super::quiver::{ArrowId, GradedQuiver, Origin};
use super::{sign, Coeff};
use crate::error::{Error, Result};

/// A free graded path algebra with a degree +1 differential given on arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgQuiverAlgebra {
    pub quiver: GradedQuiver,
    pub diff: Vec<PathSum>,
}

impl DgQuiverAlgebra {
    pub fn new(quiver: GradedQuiver) -> Self {
        let n = quiver.arrows.len();
        DgQuiverAlgebra { quiver, diff: vec![PathSum::zero(); n] }
    }

    pub fn set_diff(&mut self, a: ArrowId, x: PathSum) {
        self.diff[a] = x;
    }

    pub fn arrow_count(&self) -> usize {
        self.quiver.arrows.len()
    }

    /// Differential of a single path by the graded Leibniz rule.
    pub fn d_path(&self, p: &Path) -> PathSum {
        let q = &self.quiver;
        let mut out = PathSum::zero();
        let mut prefix_deg = 0i64;
        for (k, &a) in p.arrows.iter().enumerate() {
            let da = &self.diff[a];
            if !da.is_zero() {
                let left = if k == 0 {
                    PathSum::from_path(Path::idempotent(p.start))
                } else {
                    PathSum::from_path(Path::from_arrows(q, &p.arrows[..k]).expect("subpath"))
                };
                let right = if k + 1 == p.arrows.len() {
                    PathSum::from_path(Path::idempotent(p.end))
                } else {
                    PathSum::from_path(Path::from_arrows(q, &p.arrows[k + 1..]).expect("subpath"))
                };
                out.add_assign(&left.mul(da).mul(&right).scale(&sign(prefix_deg)));
            }
            prefix_deg += q.deg(a);
        }
        out
    }

    pub fn apply(&self, x: &PathSum) -> PathSum {
        let mut out = PathSum::zero();
        for (p, c) in x.terms() {
            out.add_assign(&self.d_path(p).scale(c));
        }
        out
    }

    /// First arrow (ordered by name) with `d²(arrow) != 0`, with the value.
    pub fn d_squared_witness(&self) -> Option<(ArrowId, PathSum)> {
        let mut order: Vec<ArrowId> = (0..self.arrow_count()).collect();
        order.sort_by(|&a, &b| self.quiver.name(a).cmp(self.quiver.name(b)));
        order.into_iter().find_map(|a| {
            let dd = self.apply(&self.diff[a]);
            (!dd.is_zero()).then_some((a, dd))
        })
    }

    pub fn check_d_squared(&self) -> Result<()> {
        match self.d_squared_witness() {
            None => Ok(()),
            Some((a, v)) => Err(Error::DSquared { arrow: self.quiver.name(a).to_string(), value: v.display(&self.quiver) }),
        }
    }

    /// Whether every differential avoids idempotents and raises degree by one.
    pub fn check_well_formed(&self) -> Result<()> {
        let q = &self.quiver;
        for (a, x) in self.diff.iter().enumerate() {
            let ar = q.arrow(a);
            for (p, _) in x.terms() {
                if p.is_empty() {
                    return Err(Error::InvalidQuiver(format!("d({}) has an idempotent term", ar.id)));
                }
                if p.start != ar.src || p.end != ar.tgt || p.degree(q) != ar.deg + 1 {
                    return Err(Error::InvalidQuiver(format!(
                        "d({}) contains {} of the wrong shape",
                        ar.id,
                        p.display(q)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether every differential lies in the square of the arrow ideal.
    pub fn is_minimal(&self) -> bool {
        self.diff.iter().all(|x| x.terms().all(|(p, _)| p.len() >= 2))
    }

    pub fn is_non_positive(&self) -> bool {
        self.quiver.arrows.iter().all(|a| a.deg <= 0)
    }
}

/// The Ginzburg dg algebra of a quiver with superpotential.
///
/// Adds a loop `l_v` of degree `1 - d` at each vertex, with
/// `d φ = ∂_{φ^op} W` and `d l_v = Σ_{s(φ) = v} φ φ^op`.
pub fn ginzburg(q: &GradedQuiver, w: &Potential) -> Result<DgQuiverAlgebra> {
    let d = q.d as i64;
    w.check_homogeneous(q, 3 - d)?;
    let mut bar = q.clone();
    let n = q.arrows.len();
    let loops: Vec<ArrowId> = (0..q.vertices.len())
        .map(|v| bar.add_arrow(format!("l_{}", q.vertices[v]), v, v, 1 - d, Origin::Loop))
        .collect();
    let mut alg = DgQuiverAlgebra::new(bar);
    for phi in 0..n {
        let (partner, s) = q
            .op_apply(phi)
            .ok_or_else(|| Error::InvalidQuiver(format!("arrow {} has no opposite", q.name(phi))))?;
        let x = cyclic_derivative(&alg.quiver, w, partner).scale(&s);
        alg.set_diff(phi, x);
    }
    for (v, &l) in loops.iter().enumerate() {
        let mut x = PathSum::zero();
        for phi in q.out_arrows(v).collect::<Vec<_>>() {
            let (partner, s) = q.op_apply(phi).expect("checked above");
            let p = Path::from_arrows(&alg.quiver, &[phi, partner])?;
            x.add_term(p, s);
        }
        alg.set_diff(l, x);
    }
    Ok(alg)
}

/// Re-choose opposite-pair signs so that the Ginzburg differential squares
/// to zero, flipping as few pairs as the elimination order allows.
///
/// Flipping the sign of a pair negates `d` on both of its arrows and the
/// matching terms of `d l_v`. Every coefficient of `d²` is a sum of
/// contributions, each carrying a set of pair flips; contributions that
/// cancel in pairs give one linear equation over GF(2).
pub fn repair_op_signs(q: &mut GradedQuiver, w: &Potential) -> Result<()> {
    let gamma = ginzburg(q, w)?;
    if gamma.d_squared_witness().is_none() {
        return Ok(());
    }
    let n = q.arrows.len();
    let var = |a: ArrowId| -> usize {
        let link = q.op[a].expect("ginzburg checked pairing");
        if link.designated { a } else { link.partner }
    };
    let bq = &gamma.quiver;
    // (outer arrow, resulting path) -> contributions (coefficient, flip set)
    // (outer arrow, path) -> contributions with their flip variables
    type Contributions = Vec<(Coeff, BTreeSet<usize>)>;
    let mut groups: BTreeMap<(ArrowId, Path), Contributions> = BTreeMap::new();
    for x in 0..gamma.arrow_count() {
        for (p, c) in gamma.diff[x].terms() {
            let mut prefix_deg = 0i64;
            for (k, &a) in p.arrows.iter().enumerate() {
                for (r, e) in gamma.diff[a].terms() {
                    let mut vars = BTreeSet::new();
                    for v in [var(if x < n { x } else { p.arrows[0] }), var(if a < n { a } else { r.arrows[0] })] {
                        if !vars.remove(&v) {
                            vars.insert(v);
                        }
                    }
                    let mut arrows = p.arrows[..k].to_vec();
                    arrows.extend_from_slice(&r.arrows);
                    arrows.extend_from_slice(&p.arrows[k + 1..]);
                    let path = Path::from_arrows(bq, &arrows)?;
                    groups.entry((x, path)).or_default().push((c * e * sign(prefix_deg), vars));
                }
                prefix_deg += bq.deg(a);
            }
        }
    }
    let vars: Vec<usize> = (0..n).filter(|&a| q.op[a].is_some_and(|l| l.designated)).collect();
    let col: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for ((x, path), contribs) in &groups {
        let fail = || Error::DSquared { arrow: bq.name(*x).to_string(), value: path.display(bq) };
        if contribs.iter().all(|(_, v)| *v == contribs[0].1) {
            let total: Coeff = contribs.iter().map(|(c, _)| c.clone()).sum();
            if !total.is_zero() {
                return Err(fail());
            }
            continue;
        }
        let [(c1, v1), (c2, v2)] = contribs.as_slice() else { return Err(fail()) };
        if c1.abs() != c2.abs() {
            return Err(fail());
        }
        let mut row = vec![false; vars.len() + 1];
        for v in v1.symmetric_difference(v2) {
            row[col[v]] = true;
        }
        row[vars.len()] = c1 == c2;
        rows.push(row);
    }
    let flips = solve_gf2(rows, vars.len()).ok_or_else(|| Error::DSquared {
        arrow: "opposite signs".into(),
        value: "no consistent sign choice".into(),
    })?;
    for (k, &a) in vars.iter().enumerate() {
        if flips[k] {
            let link = q.op[a].expect("designated");
            q.pair(a, link.partner, -link.sign);
        }
    }
    ginzburg(q, w)?.check_d_squared()
}

/// Solve a GF(2) system whose rows carry the right-hand side in the last
/// column. Free variables are set to zero.
pub(crate) fn solve_gf2(mut rows: Vec<Vec<bool>>, nvars: usize) -> Option<Vec<bool>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&k| rows[k][c]) else { continue };
        rows.swap(r, p);
        for k in 0..rows.len() {
            if k != r && rows[k][c] {
                let pivot = rows[r].clone();
                for (x, y) in rows[k].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[nvars]) {
        return None;
    }
    let mut out = vec![false; nvars];
    for (k, &c) in pivots.iter().enumerate() {
        out[c] = rows[k][nvars];
    }
    Some(out)
}
