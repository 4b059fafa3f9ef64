//! JSON payloads shared by the command line and the HTTP service, so that
//! both front ends emit byte-identical documents for the same request.

use dgonlab::io::{dga_to_json, dga_to_json_with, qsp_to_json, DgaJson, QspJson};
use dgonlab::mutation::SuperfluousSet;
use dgonlab::{DgQuiverAlgebra, MutationMode, MutationResult, Potential, Qsp, ReductionTrace};
use serde::Serialize;
use serde_json::Value;

/// A quiver with superpotential plus a readable rendering of `W`.
///
/// Extra keys are ignored on input, so the document still parses as a
/// quiver with superpotential.
#[derive(Serialize)]
pub struct QspView {
    #[serde(flatten)]
    pub qsp: QspJson,
    pub potential_display: String,
}

#[derive(Serialize)]
pub struct MutationView {
    pub mode: MutationMode,
    pub vertex: String,
    #[serde(flatten)]
    pub qsp: QspJson,
    pub potential_display: String,
    pub superfluous: Vec<SuperfluousSet>,
}

#[derive(Serialize)]
pub struct ReductionView {
    #[serde(flatten)]
    pub algebra: DgaJson,
    pub trace: ReductionTrace,
}

#[derive(Serialize)]
pub struct LoopView {
    pub id: String,
    pub vertex: String,
    pub deg: i64,
}

/// Shape of a Ginzburg algebra without its differential.
#[derive(Serialize)]
pub struct GinzburgSummary {
    pub vertices: usize,
    pub arrows: usize,
    pub loops: Vec<LoopView>,
    pub d_squared_zero: bool,
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("views serialize")
}

pub fn qsp_view(qsp: &Qsp) -> Value {
    to_value(&QspView { qsp: qsp_to_json(qsp), potential_display: qsp.potential.display(&qsp.quiver) })
}

pub fn mutation_view(r: &MutationResult) -> Value {
    to_value(&MutationView {
        mode: r.mode,
        vertex: r.vertex.clone(),
        qsp: qsp_to_json(&r.qsp),
        potential_display: r.qsp.potential.display(&r.qsp.quiver),
        superfluous: r.superfluous.clone(),
    })
}

pub fn ginzburg_view(alg: &DgQuiverAlgebra, w: &Potential) -> Value {
    to_value(&dga_to_json_with(alg, w))
}

pub fn reduction_view(alg: &DgQuiverAlgebra, trace: &ReductionTrace) -> Value {
    to_value(&ReductionView { algebra: dga_to_json(alg), trace: trace.clone() })
}

pub fn ginzburg_summary(alg: &DgQuiverAlgebra) -> GinzburgSummary {
    let q = &alg.quiver;
    GinzburgSummary {
        vertices: q.vertices.len(),
        arrows: q.arrows.len(),
        loops: q
            .arrows
            .iter()
            .filter(|a| a.origin == dgonlab::algebra::Origin::Loop)
            .map(|a| LoopView { id: a.id.clone(), vertex: q.vertices[a.src].clone(), deg: a.deg })
            .collect(),
        d_squared_zero: alg.d_squared_witness().is_none(),
    }
}

/// Render a pretty JSON document with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}
