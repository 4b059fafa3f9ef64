//! Input files and the structured failure type shared by both front ends.

use std::path::Path;

use dgonlab::algebra::ginzburg;
use dgonlab::io::{parse_dga, parse_qsp};
use dgonlab::qsp::build_qsp;
use dgonlab::{DgQuiverAlgebra, Potential, Qsp, Surface};
use serde_json::{json, Value};

/// A failure rendered as `{code, message, context}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: String,
    pub message: String,
    pub context: Value,
}

impl Failure {
    pub fn new(code: &str, message: impl Into<String>, context: Value) -> Self {
        Failure { code: code.into(), message: message.into(), context }
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "context": self.context })
    }
}

impl From<dgonlab::Error> for Failure {
    fn from(e: dgonlab::Error) -> Self {
        Failure { code: e.code().into(), message: e.to_string(), context: e.context() }
    }
}

/// Any of the three file formats, recognised by its keys.
pub enum Input {
    Surface(Surface),
    Qsp(Qsp),
    Dga(DgQuiverAlgebra),
}

impl Input {
    pub fn parse(text: &str) -> Result<Input, Failure> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            Failure::new("parse", e.to_string(), json!({ "at": format!("line {}, column {}", e.line(), e.column()) }))
        })?;
        if v.get("faces").is_some() {
            Ok(Input::Surface(Surface::from_json(text)?))
        } else if v.get("differential").is_some() {
            Ok(Input::Dga(parse_dga(text)?))
        } else if v.get("arrows").is_some() {
            Ok(Input::Qsp(parse_qsp(text)?))
        } else {
            Err(Failure::new("parse", "expected a surface, quiver with superpotential or dg algebra", Value::Null))
        }
    }

    pub fn load(path: &Path) -> Result<Input, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new("io", e.to_string(), json!({ "path": path.display().to_string() })))?;
        Input::parse(&text)
    }

    fn kind(&self) -> &'static str {
        match self {
            Input::Surface(_) => "surface",
            Input::Qsp(_) => "quiver with superpotential",
            Input::Dga(_) => "dg algebra",
        }
    }

    fn wrong(&self, wanted: &str) -> Failure {
        Failure::new("parse", format!("expected {wanted}, got a {}", self.kind()), Value::Null)
    }

    pub fn surface(self) -> Result<Surface, Failure> {
        match self {
            Input::Surface(s) => Ok(s),
            other => Err(other.wrong("a surface")),
        }
    }

    pub fn qsp(self) -> Result<Qsp, Failure> {
        match self {
            Input::Surface(s) => Ok(build_qsp(&s)?),
            Input::Qsp(q) => Ok(q),
            other => Err(other.wrong("a surface or quiver with superpotential")),
        }
    }

    /// The dg algebra itself, or the Ginzburg algebra with its potential.
    pub fn dga(self) -> Result<(DgQuiverAlgebra, Potential), Failure> {
        match self {
            Input::Dga(a) => Ok((a, Potential::zero())),
            other => {
                let q = other.qsp()?;
                Ok((ginzburg(&q.quiver, &q.potential)?, q.potential))
            }
        }
    }
}
