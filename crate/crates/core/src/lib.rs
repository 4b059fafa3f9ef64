//! Graded quivers with superpotential attached to d-angulated marked surfaces.
//!
//! The crate covers the whole pipeline: surfaces and flips ([`surface`]),
//! graded path algebras and Ginzburg dg algebras ([`algebra`]), the quiver
//! with superpotential of a d-angulation ([`qsp`]), Oppermann mutation and
//! its surface variant ([`mutation`]), arrow-pair cancellation and the
//! flip/mutation commutativity check ([`reduce`]), and truncated cohomology
//! ([`homology`]).

pub mod algebra;
pub mod error;
pub mod fixtures;
pub mod homology;
pub mod io;
pub mod mutation;
pub mod qsp;
pub mod reduce;
pub mod surface;

pub use algebra::{
    Arrow, ArrowId, Coeff, DgQuiverAlgebra, GradedQuiver, Path, PathSum, Potential, VertexId,
};
pub use error::{Error, Result};
pub use mutation::{MutationMode, MutationResult};
pub use qsp::Qsp;
pub use reduce::{IsoMode, ReductionTrace, VerifyReport};
pub use surface::{EdgeKind, EdgeSide, Side, Surface, TopologyReport};
