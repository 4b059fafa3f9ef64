//! The quiver with superpotential of a d-angulation.
//!
//! Every face contributes the complete directed graph on its arc sides.
//! An arrow from side `s` to side `t` has degree minus the number of edges
//! strictly between them clockwise. The potential is a signed sum of the
//! clockwise 3-cycles of each face; signs are found by search so that the
//! Ginzburg differential squares to zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{coeff, ginzburg, ArrowId, GradedQuiver, Origin, Potential};
use crate::error::{Error, Result};
use crate::surface::Surface;

/// A graded quiver together with a superpotential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qsp {
    pub quiver: GradedQuiver,
    pub potential: Potential,
}

/// A clockwise 3-cycle inside one face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceCycle {
    pub face: usize,
    pub occurrences: [String; 3],
    pub arrows: [ArrowId; 3],
}

pub fn arrow_name(src: &str, tgt: &str) -> String {
    format!("a_{{{src},{tgt}}}")
}

/// The pre-quiver: vertices are arc sides, arrows stay inside faces.
pub fn build_prequiver(s: &Surface) -> GradedQuiver {
    let d = s.d;
    let mut q = GradedQuiver::new(d);
    for face in &s.faces {
        for e in face.iter().filter(|e| e.is_arc()) {
            q.add_vertex(e.occurrence());
        }
    }
    for (fi, face) in s.faces.iter().enumerate() {
        let pos: Vec<usize> = (0..d).filter(|&k| face[k].is_arc()).collect();
        for &ps in &pos {
            for &pt in &pos {
                if ps == pt {
                    continue;
                }
                let between = (pt as i64 - ps as i64 - 1).rem_euclid(d as i64);
                let (so, to) = (face[ps].occurrence(), face[pt].occurrence());
                let src = q.vertex(&so).unwrap();
                let tgt = q.vertex(&to).unwrap();
                q.add_arrow(arrow_name(&so, &to), src, tgt, -between, Origin::Face { face: fi, src: so, tgt: to });
            }
        }
    }
    pair_reverse_arrows(&mut q);
    q
}

/// Pair `a_{XY}` with `a_{YX}`. The designated end is the arrow of higher
/// degree, ties broken by name.
fn pair_reverse_arrows(q: &mut GradedQuiver) {
    for a in 0..q.arrows.len() {
        let Origin::Face { face, src, tgt } = q.arrows[a].origin.clone() else { continue };
        let b = q
            .arrows
            .iter()
            .position(|x| x.origin == Origin::Face { face, src: tgt.clone(), tgt: src.clone() })
            .expect("reverse arrow exists");
        let key = |x: ArrowId| (-q.deg(x), q.name(x).to_string());
        if key(a) < key(b) {
            q.pair(a, b, 1);
        }
    }
}

/// Glue the two sides of every arc. Arrow indices are unchanged.
pub fn glue_prequiver(s: &Surface, pre: &GradedQuiver) -> GradedQuiver {
    let mut q = GradedQuiver::new(pre.d);
    let mut labels: Vec<(usize, String)> = Vec::new();
    for face in &s.faces {
        for e in face.iter().filter(|e| e.is_arc()) {
            if !labels.iter().any(|(_, l)| *l == e.label) {
                labels.push((labels.len(), e.label.clone()));
            }
        }
    }
    labels.sort_by_key(|a| natural_key(&a.1));
    for (_, l) in &labels {
        q.add_vertex(l.clone());
    }
    let vertex_of = |occ: &str| -> usize {
        let label = &occ[..occ.len() - 1];
        q.vertex(label).expect("arc vertex")
    };
    let mut arrows = Vec::new();
    for a in &pre.arrows {
        let src = vertex_of(&pre.vertices[a.src]);
        let tgt = vertex_of(&pre.vertices[a.tgt]);
        arrows.push((a.id.clone(), src, tgt, a.deg, a.origin.clone()));
    }
    for (id, src, tgt, deg, origin) in arrows {
        q.add_arrow(id, src, tgt, deg, origin);
    }
    q.op = pre.op.clone();
    q
}

/// Sort key putting numeric labels in numeric order.
pub fn natural_key(s: &str) -> (Vec<(u64, String)>, String) {
    let mut parts = Vec::new();
    let mut num = String::new();
    let mut text = String::new();
    for ch in s.chars() {
        if ch.is_ascii_digit() {
            if !text.is_empty() {
                parts.push((u64::MAX, std::mem::take(&mut text)));
            }
            num.push(ch);
        } else {
            if !num.is_empty() {
                parts.push((num.parse().unwrap_or(u64::MAX - 1), String::new()));
                num.clear();
            }
            text.push(ch);
        }
    }
    if !num.is_empty() {
        parts.push((num.parse().unwrap_or(u64::MAX - 1), String::new()));
    }
    if !text.is_empty() {
        parts.push((u64::MAX, text));
    }
    (parts, s.to_string())
}

/// All clockwise 3-cycles of each face, ordered by face and position.
pub fn enumerate_potential_cycles(s: &Surface, q: &GradedQuiver) -> Vec<FaceCycle> {
    let mut out = Vec::new();
    for (fi, face) in s.faces.iter().enumerate() {
        let pos: Vec<usize> = (0..s.d).filter(|&k| face[k].is_arc()).collect();
        for x in 0..pos.len() {
            for y in x + 1..pos.len() {
                for z in y + 1..pos.len() {
                    let occ = [face[pos[x]].occurrence(), face[pos[y]].occurrence(), face[pos[z]].occurrence()];
                    let find = |a: &str, b: &str| q.arrow_id(&arrow_name(a, b)).expect("face arrow");
                    let arrows = [find(&occ[0], &occ[1]), find(&occ[1], &occ[2]), find(&occ[2], &occ[0])];
                    out.push(FaceCycle { face: fi, occurrences: occ, arrows });
                }
            }
        }
    }
    out
}

/// Potential with the given sign per cycle.
pub fn potential_from_signs(q: &GradedQuiver, cycles: &[FaceCycle], signs: &[i64]) -> Result<Potential> {
    let mut w = Potential::zero();
    for (c, &s) in cycles.iter().zip(signs) {
        w.add_cycle(q, &c.arrows, coeff(s))?;
    }
    Ok(w)
}

/// All valid sign vectors for the cycles of one face, in lexicographic
/// order with `+1` before `-1`.
pub fn face_sign_assignments(q: &GradedQuiver, cycles: &[FaceCycle], limit: usize) -> Result<Vec<Vec<i64>>> {
    let k = cycles.len();
    if k > 24 {
        return Err(Error::NoSignAssignment { face: format!("{} cycles exceed the search bound", k) });
    }
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << k) {
        // bit (k-1-j) set means cycle j gets -1, so the scan is lexicographic
        let signs: Vec<i64> = (0..k).map(|j| if mask >> (k - 1 - j) & 1 == 1 { -1 } else { 1 }).collect();
        let w = potential_from_signs(q, cycles, &signs)?;
        if ginzburg(q, &w)?.d_squared_witness().is_none() {
            found.push(signs);
            if found.len() >= limit {
                break;
            }
        }
    }
    Ok(found)
}

/// Per-face search for the lexicographically smallest valid sign vector.
pub fn solve_signs(q: &GradedQuiver, cycles: &[FaceCycle]) -> Result<Vec<i64>> {
    let mut faces: Vec<usize> = cycles.iter().map(|c| c.face).collect();
    faces.dedup();
    let per_face: Vec<Result<Vec<i64>>> = faces
        .par_iter()
        .map(|&f| {
            let cs: Vec<FaceCycle> = cycles.iter().filter(|c| c.face == f).cloned().collect();
            face_sign_assignments(q, &cs, 1)?.into_iter().next().ok_or_else(|| Error::NoSignAssignment {
                face: cs.iter().map(|c| c.occurrences.join(" ")).collect::<Vec<_>>().join(" | "),
            })
        })
        .collect();
    let mut out = Vec::with_capacity(cycles.len());
    for r in per_face {
        out.extend(r?);
    }
    Ok(out)
}

/// The quiver with superpotential of a validated d-angulation.
pub fn build_qsp(s: &Surface) -> Result<Qsp> {
    s.validate()?;
    let pre = build_prequiver(s);
    let quiver = glue_prequiver(s, &pre);
    let cycles = enumerate_potential_cycles(s, &quiver);
    let signs = solve_signs(&quiver, &cycles)?;
    let potential = potential_from_signs(&quiver, &cycles, &signs)?;
    ginzburg(&quiver, &potential)?.check_d_squared()?;
    Ok(Qsp { quiver, potential })
}

/// Every valid potential of a surface, up to `limit` choices, as the
/// product of per-face choices.
pub fn all_sign_choices(s: &Surface, limit: usize) -> Result<Vec<Qsp>> {
    s.validate()?;
    let pre = build_prequiver(s);
    let quiver = glue_prequiver(s, &pre);
    let cycles = enumerate_potential_cycles(s, &quiver);
    let mut faces: Vec<usize> = cycles.iter().map(|c| c.face).collect();
    faces.dedup();
    let mut combos: Vec<Vec<i64>> = vec![Vec::new()];
    for f in faces {
        let cs: Vec<FaceCycle> = cycles.iter().filter(|c| c.face == f).cloned().collect();
        let opts = face_sign_assignments(&quiver, &cs, limit)?;
        combos = combos
            .iter()
            .flat_map(|p| opts.iter().map(move |o| p.iter().chain(o).copied().collect::<Vec<_>>()))
            .take(limit)
            .collect();
    }
    combos
        .into_iter()
        .map(|signs| Ok(Qsp { quiver: quiver.clone(), potential: potential_from_signs(&quiver, &cycles, &signs)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{coeff, DgQuiverAlgebra};
    use crate::fixtures;

    fn surface(name: &str) -> Surface {
        fixtures::surface(name).unwrap()
    }

    fn deg(q: &GradedQuiver, s: &str, t: &str) -> i64 {
        q.deg(q.arrow_id(&arrow_name(s, t)).unwrap_or_else(|| panic!("no arrow {s}->{t}")))
    }

    #[test]
    fn annulus_degrees() {
        let s = surface("ann4");
        let pre = build_prequiver(&s);
        for (a, b) in [("1+", "2+"), ("2+", "1-"), ("1-", "3+"), ("3+", "1+")] {
            assert_eq!(deg(&pre, a, b), 0);
            assert_eq!(deg(&pre, b, a), -2);
        }
        for (a, b) in [("1-", "1+"), ("1+", "1-"), ("2+", "3+"), ("3+", "2+")] {
            assert_eq!(deg(&pre, a, b), -1);
        }
        assert_eq!(pre.arrows.len(), 12);
        let iso: Vec<usize> = ["2-", "3-"].iter().map(|v| pre.vertex(v).unwrap()).collect();
        assert!(pre.arrows.iter().all(|a| !iso.contains(&a.src) && !iso.contains(&a.tgt)));

        let q = glue_prequiver(&s, &pre);
        assert_eq!(q.vertices, vec!["1", "2", "3"]);
        let v1 = q.vertex("1").unwrap();
        let loops: Vec<i64> = q.arrows.iter().filter(|a| a.src == v1 && a.tgt == v1).map(|a| a.deg).collect();
        assert_eq!(loops, vec![-1, -1]);
        q.check_pairing().unwrap();
    }

    #[test]
    fn pentagon_prequiver() {
        let pre = build_prequiver(&surface("pent5"));
        let degs: Vec<(String, i64)> = pre.arrows.iter().map(|a| (a.id.clone(), a.deg)).collect();
        assert_eq!(degs, vec![(arrow_name("1+", "1-"), -1), (arrow_name("1-", "1+"), -2)]);
        let qsp = build_qsp(&surface("pent5")).unwrap();
        assert!(qsp.potential.is_zero());
    }

    #[test]
    fn cycles_have_degree_three_minus_d() {
        for (_, s) in fixtures::surfaces() {
            let q = glue_prequiver(&s, &build_prequiver(&s));
            for c in enumerate_potential_cycles(&s, &q) {
                let total: i64 = c.arrows.iter().map(|&a| q.deg(a)).sum();
                assert_eq!(total, 3 - s.d as i64);
            }
        }
    }

    fn disk_with_signs(signs: &[(&[&str; 3], i64)]) -> DgQuiverAlgebra {
        let s = surface("disk4");
        let q = glue_prequiver(&s, &build_prequiver(&s));
        let mut w = Potential::zero();
        for (tri, sg) in signs {
            let occ: Vec<String> = tri.iter().map(|t| format!("{t}+")).collect();
            let ids: Vec<ArrowId> =
                (0..3).map(|k| q.arrow_id(&arrow_name(&occ[k], &occ[(k + 1) % 3])).unwrap()).collect();
            w.add_cycle(&q, &ids, coeff(*sg)).unwrap();
        }
        ginzburg(&q, &w).unwrap()
    }

    #[test]
    fn disk_sign_examples() {
        let good = disk_with_signs(&[(&["1", "3", "2"], 1), (&["1", "4", "2"], 1), (&["2", "3", "4"], 1), (&["1", "3", "4"], -1)]);
        assert!(good.d_squared_witness().is_none());
        let bad = disk_with_signs(&[(&["1", "3", "2"], 1), (&["1", "4", "2"], 1), (&["2", "3", "4"], 1), (&["1", "3", "4"], 1)]);
        let (w, _) = bad.d_squared_witness().unwrap();
        assert_eq!(bad.quiver.name(w), arrow_name("1+", "2+"));
    }

    #[test]
    fn disk_solver_uses_odd_number_of_minus_signs() {
        let s = surface("disk4");
        let q = glue_prequiver(&s, &build_prequiver(&s));
        let cycles = enumerate_potential_cycles(&s, &q);
        let inner: Vec<FaceCycle> = cycles.iter().filter(|c| c.face == 0).cloned().collect();
        let all = face_sign_assignments(&q, &inner, usize::MAX).unwrap();
        assert!(!all.is_empty());
        for signs in &all {
            assert_eq!(signs.iter().filter(|&&x| x < 0).count() % 2, 1);
        }
        let chosen = solve_signs(&q, &cycles).unwrap();
        assert_eq!(chosen, all[0]);
    }

    #[test]
    fn a3_potential_is_one_triangle() {
        let qsp = build_qsp(&surface("a3")).unwrap();
        let q = &qsp.quiver;
        assert_eq!(qsp.potential.len(), 1);
        let ids: Vec<ArrowId> = [("3+", "1+"), ("1+", "2+"), ("2+", "3+")]
            .iter()
            .map(|(a, b)| q.arrow_id(&arrow_name(a, b)).unwrap())
            .collect();
        assert_eq!(qsp.potential.coeff_of(q, &ids), coeff(1));
    }

    #[test]
    fn corpus_invariants() {
        for (name, s) in fixtures::surfaces() {
            let qsp = build_qsp(&s).unwrap();
            let q = &qsp.quiver;
            q.check_pairing().unwrap();
            for v in 0..q.vertices.len() {
                assert!(!q.has_degree_zero_loop(v), "{name}");
                let a = q.in_arrows(v).filter(|&x| q.deg(x) == 0).count();
                assert!(a <= 2, "{name}");
            }
            ginzburg(q, &qsp.potential).unwrap().check_d_squared().unwrap();
        }
    }

    #[test]
    fn self_folded_potential_has_four_terms() {
        let qsp = build_qsp(&surface("self4")).unwrap();
        assert_eq!(qsp.potential.len(), 4);
    }
}
