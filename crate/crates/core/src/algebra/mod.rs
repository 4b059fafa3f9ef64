//! Graded path algebras over the rationals.
//!
//! Paths compose left to right: `pq` traverses `p` then `q`, so
//! `s(pq) = s(p)` and `t(pq) = t(q)`. Differentials obey
//! `d(pq) = d(p) q + (-1)^{|p|} p d(q)`.

mod dga;
mod path;
pub(crate) mod potential;
mod quiver;

pub use dga::{ginzburg, repair_op_signs, DgQuiverAlgebra};
pub(crate) use dga::solve_gf2;
pub use path::{Path, PathSum};
pub use potential::{cyclic_derivative, Potential};
pub use quiver::{Arrow, ArrowId, GradedQuiver, OpLink, Origin, VertexId};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact coefficient field.
pub type Coeff = BigRational;

pub fn coeff(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^e`.
pub fn sign(e: i64) -> Coeff {
    if e.rem_euclid(2) == 0 {
        Coeff::one()
    } else {
        -Coeff::one()
    }
}

pub fn is_zero(c: &Coeff) -> bool {
    c.is_zero()
}

/// Render a coefficient as `p/q` (or `p` when integral).
pub fn coeff_to_string(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn coeff_from_str(s: &str) -> Option<Coeff> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}
