use serde_json::Value;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors. Every variant maps to a stable machine-readable code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {context}: {message}")]
    Parse { message: String, context: String },
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("unknown arc {0}")]
    UnknownArc(String),
    #[error("cannot flip self-folded arc {0} when d = 3")]
    SelfFoldedTriangle(String),
    #[error("no d-angulation: {0}")]
    NoDAngulation(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex {0} carries a degree-0 loop")]
    DegreeZeroLoop(String),
    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),
    #[error("paths not composable: {0}")]
    NotComposable(String),
    #[error("potential is not homogeneous of degree {expected}: {found}")]
    Inhomogeneous { expected: i64, found: String },
    #[error("no valid sign assignment for face {face}")]
    NoSignAssignment { face: String },
    #[error("decoration failed: {0}")]
    Decoration(String),
    #[error("d^2 != 0 on {arrow}")]
    DSquared { arrow: String, value: String },
    #[error("stale cancellation pair ({a}, {b})")]
    StalePair { a: String, b: String },
    #[error("input has {found} arrows, above the cap of {cap}")]
    TooLarge { found: usize, cap: usize },
    #[error("{0}")]
    Homology(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidSurface(_) => "invalid_surface",
            Error::UnknownArc(_) => "unknown_arc",
            Error::SelfFoldedTriangle(_) => "self_folded_triangle",
            Error::NoDAngulation(_) => "no_d_angulation",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::DegreeZeroLoop(_) => "degree_zero_loop",
            Error::InvalidQuiver(_) => "invalid_quiver",
            Error::NotComposable(_) => "not_composable",
            Error::Inhomogeneous { .. } => "inhomogeneous",
            Error::NoSignAssignment { .. } => "no_sign_assignment",
            Error::Decoration(_) => "decoration",
            Error::DSquared { .. } => "d_squared",
            Error::StalePair { .. } => "stale_pair",
            Error::TooLarge { .. } => "too_large",
            Error::Homology(_) => "homology",
        }
    }

    /// Extra structured detail for error reports.
    pub fn context(&self) -> Value {
        match self {
            Error::Parse { context, .. } => serde_json::json!({ "at": context }),
            Error::UnknownArc(a) => serde_json::json!({ "arc": a }),
            Error::UnknownVertex(v) | Error::DegreeZeroLoop(v) => serde_json::json!({ "vertex": v }),
            Error::DSquared { arrow, value } => serde_json::json!({ "arrow": arrow, "d2": value }),
            Error::TooLarge { found, cap } => serde_json::json!({ "arrows": found, "cap": cap }),
            Error::NoSignAssignment { face } => serde_json::json!({ "face": face }),
            _ => Value::Null,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "code": self.code(),
            "message": self.to_string(),
            "context": self.context(),
        })
    }
}
