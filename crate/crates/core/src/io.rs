//! JSON file formats for quivers with superpotential and dg quiver algebras.
//!
//! Arrows and vertices are referenced by name. Coefficients are strings of
//! the form `p/q` (or `p`), so they stay exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    coeff_from_str, coeff_to_string, ArrowId, DgQuiverAlgebra, GradedQuiver, Origin, Path, PathSum, Potential,
};
use crate::error::{Error, Result};
use crate::qsp::Qsp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpJson {
    pub partner: String,
    pub sign: i64,
    pub designated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowJson {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub deg: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<OpJson>,
    #[serde(default = "plain", skip_serializing_if = "is_plain")]
    pub origin: Origin,
}

fn plain() -> Origin {
    Origin::Plain
}

fn is_plain(o: &Origin) -> bool {
    *o == Origin::Plain
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub path: Vec<String>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleJson {
    pub cycle: Vec<String>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QspJson {
    pub d: usize,
    pub vertices: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    pub potential: Vec<CycleJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgaJson {
    pub d: usize,
    pub vertices: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    #[serde(default)]
    pub potential: Vec<CycleJson>,
    pub differential: BTreeMap<String, Vec<TermJson>>,
}

fn parse_err(message: impl Into<String>, context: impl Into<String>) -> Error {
    Error::Parse { message: message.into(), context: context.into() }
}

fn arrows_to_json(q: &GradedQuiver) -> Vec<ArrowJson> {
    q.arrows
        .iter()
        .zip(&q.op)
        .map(|(a, link)| ArrowJson {
            id: a.id.clone(),
            src: q.vertices[a.src].clone(),
            tgt: q.vertices[a.tgt].clone(),
            deg: a.deg,
            op: link.map(|l| OpJson { partner: q.name(l.partner).to_string(), sign: l.sign, designated: l.designated }),
            origin: a.origin.clone(),
        })
        .collect()
}

fn quiver_from_json(d: usize, vertices: &[String], arrows: &[ArrowJson]) -> Result<GradedQuiver> {
    let mut q = GradedQuiver::new(d);
    for v in vertices {
        if q.vertex(v).is_some() {
            return Err(parse_err(format!("duplicate vertex {v}"), "vertices"));
        }
        q.add_vertex(v.clone());
    }
    for a in arrows {
        if q.arrow_id(&a.id).is_some() {
            return Err(parse_err(format!("duplicate arrow {}", a.id), "arrows"));
        }
        let v = |name: &str| q.vertex(name).ok_or_else(|| parse_err(format!("unknown vertex {name}"), format!("arrow {}", a.id)));
        let (s, t) = (v(&a.src)?, v(&a.tgt)?);
        q.add_arrow(a.id.clone(), s, t, a.deg, a.origin.clone());
    }
    for (k, a) in arrows.iter().enumerate() {
        let Some(op) = &a.op else { continue };
        let p = q.arrow_id(&op.partner).ok_or_else(|| parse_err(format!("unknown opposite {}", op.partner), format!("arrow {}", a.id)))?;
        if op.sign.abs() != 1 {
            return Err(parse_err("opposite sign must be 1 or -1", format!("arrow {}", a.id)));
        }
        let back = arrows[p].op.as_ref().map(|o| (o.partner.as_str(), o.sign, o.designated));
        if back != Some((a.id.as_str(), op.sign, !op.designated)) {
            return Err(parse_err("opposite pairing is not symmetric", format!("arrow {}", a.id)));
        }
        if op.designated {
            q.pair(k, p, op.sign);
        }
    }
    Ok(q)
}

fn arrow_ids(q: &GradedQuiver, names: &[String], context: &str) -> Result<Vec<ArrowId>> {
    names.iter().map(|n| q.arrow_id(n).ok_or_else(|| parse_err(format!("unknown arrow {n}"), context))).collect()
}

fn coeff(s: &str, context: &str) -> Result<crate::algebra::Coeff> {
    coeff_from_str(s).ok_or_else(|| parse_err(format!("bad coefficient {s:?}"), context))
}

fn potential_to_json(q: &GradedQuiver, w: &Potential) -> Vec<CycleJson> {
    w.terms()
        .map(|(c, v)| CycleJson { cycle: c.iter().map(|&a| q.name(a).to_string()).collect(), coeff: coeff_to_string(v) })
        .collect()
}

fn potential_from_json(q: &GradedQuiver, terms: &[CycleJson]) -> Result<Potential> {
    let mut w = Potential::zero();
    for t in terms {
        let c = arrow_ids(q, &t.cycle, "potential")?;
        w.add_cycle(q, &c, coeff(&t.coeff, "potential")?)?;
    }
    Ok(w)
}

pub fn qsp_to_json(qsp: &Qsp) -> QspJson {
    let q = &qsp.quiver;
    QspJson {
        d: q.d,
        vertices: q.vertices.clone(),
        arrows: arrows_to_json(q),
        potential: potential_to_json(q, &qsp.potential),
    }
}

pub fn qsp_from_json(j: &QspJson) -> Result<Qsp> {
    let quiver = quiver_from_json(j.d, &j.vertices, &j.arrows)?;
    let potential = potential_from_json(&quiver, &j.potential)?;
    Ok(Qsp { quiver, potential })
}

pub fn pathsum_to_json(q: &GradedQuiver, x: &PathSum) -> Vec<TermJson> {
    x.terms()
        .map(|(p, c)| TermJson { path: p.arrows.iter().map(|&a| q.name(a).to_string()).collect(), coeff: coeff_to_string(c) })
        .collect()
}

pub fn pathsum_from_json(q: &GradedQuiver, terms: &[TermJson], context: &str) -> Result<PathSum> {
    let mut x = PathSum::zero();
    for t in terms {
        let arrows = arrow_ids(q, &t.path, context)?;
        if arrows.is_empty() {
            return Err(parse_err("empty path", context));
        }
        x.add_term(Path::from_arrows(q, &arrows)?, coeff(&t.coeff, context)?);
    }
    Ok(x)
}

pub fn dga_to_json(alg: &DgQuiverAlgebra) -> DgaJson {
    dga_to_json_with(alg, &Potential::zero())
}

/// Dg-algebra JSON that also records the potential it came from.
pub fn dga_to_json_with(alg: &DgQuiverAlgebra, w: &Potential) -> DgaJson {
    let q = &alg.quiver;
    DgaJson {
        d: q.d,
        vertices: q.vertices.clone(),
        arrows: arrows_to_json(q),
        potential: potential_to_json(q, w),
        differential: (0..alg.arrow_count())
            .filter(|&a| !alg.diff[a].is_zero())
            .map(|a| (q.name(a).to_string(), pathsum_to_json(q, &alg.diff[a])))
            .collect(),
    }
}

pub fn dga_from_json(j: &DgaJson) -> Result<DgQuiverAlgebra> {
    let quiver = quiver_from_json(j.d, &j.vertices, &j.arrows)?;
    let mut alg = DgQuiverAlgebra::new(quiver);
    for (name, terms) in &j.differential {
        let a = alg.quiver.arrow_id(name).ok_or_else(|| parse_err(format!("unknown arrow {name}"), "differential"))?;
        let x = pathsum_from_json(&alg.quiver, terms, &format!("d({name})"))?;
        alg.set_diff(a, x);
    }
    alg.check_well_formed()?;
    Ok(alg)
}

pub fn parse_qsp(text: &str) -> Result<Qsp> {
    let j: QspJson = serde_json::from_str(text).map_err(|e| parse_err(e.to_string(), "qsp"))?;
    qsp_from_json(&j)
}

pub fn parse_dga(text: &str) -> Result<DgQuiverAlgebra> {
    let j: DgaJson = serde_json::from_str(text).map_err(|e| parse_err(e.to_string(), "dg algebra"))?;
    dga_from_json(&j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ginzburg;
    use crate::fixtures;
    use crate::mutation::surface_mutate;
    use crate::qsp::build_qsp;

    #[test]
    fn qsp_round_trip_on_fixtures() {
        for (name, s) in fixtures::surfaces() {
            let qsp = build_qsp(&s).unwrap();
            let text = serde_json::to_string(&qsp_to_json(&qsp)).unwrap();
            assert_eq!(parse_qsp(&text).unwrap(), qsp, "{name}");
        }
    }

    #[test]
    fn dga_round_trip_keeps_differential() {
        let qsp = build_qsp(&fixtures::surface("self4").unwrap()).unwrap();
        let m = surface_mutate(&qsp, 0).unwrap();
        let g = ginzburg(&m.qsp.quiver, &m.qsp.potential).unwrap();
        let text = serde_json::to_string(&dga_to_json(&g)).unwrap();
        assert_eq!(parse_dga(&text).unwrap(), g);
    }

    #[test]
    fn rational_coefficients_survive() {
        let text = r#"{"d":3,"vertices":["1","2"],"arrows":[
            {"id":"x","src":"1","tgt":"2","deg":-1},
            {"id":"y","src":"1","tgt":"2","deg":0}],
            "differential":{"x":[{"path":["y"],"coeff":"-3/4"}]}}"#;
        let g = parse_dga(text).unwrap();
        assert_eq!(dga_to_json(&g).differential["x"][0].coeff, "-3/4");
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        let bad_coeff = r#"{"d":3,"vertices":["1"],"arrows":[],"potential":[{"cycle":[],"coeff":"1/0"}]}"#;
        assert_eq!(parse_qsp(bad_coeff).unwrap_err().code(), "parse");
        let bad_vertex = r#"{"d":3,"vertices":["1"],"arrows":[{"id":"x","src":"1","tgt":"9","deg":0}],"potential":[]}"#;
        assert_eq!(parse_qsp(bad_vertex).unwrap_err().code(), "parse");
        assert_eq!(parse_qsp("{").unwrap_err().code(), "parse");
    }
}
