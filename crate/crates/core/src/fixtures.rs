//! The worked examples shipped with the crate.

use crate::algebra::{coeff, ArrowId, DgQuiverAlgebra, GradedQuiver, Origin, Path, PathSum};
use crate::surface::Surface;

pub const A3: &str = include_str!("../fixtures/a3.json");
pub const ANN4: &str = include_str!("../fixtures/ann4.json");
pub const PENT5: &str = include_str!("../fixtures/pent5.json");
pub const DISK4: &str = include_str!("../fixtures/disk4.json");
pub const SELF4: &str = include_str!("../fixtures/self4.json");

/// All surface fixtures by name.
pub fn surfaces() -> Vec<(&'static str, Surface)> {
    [("a3", A3), ("ann4", ANN4), ("pent5", PENT5), ("disk4", DISK4), ("self4", SELF4)]
        .into_iter()
        .map(|(n, t)| (n, Surface::from_json(t).expect("fixture parses")))
        .collect()
}

pub fn surface(name: &str) -> Option<Surface> {
    surfaces().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}

/// `(arrow, [(path, coefficient)])`
type DiffSpec<'a> = (&'a str, &'a [(&'a [&'a str], i64)]);

fn algebra(vertices: &[&str], arrows: &[(&str, usize, usize, i64)], diff: &[DiffSpec]) -> DgQuiverAlgebra {
    let mut q = GradedQuiver::new(3);
    for v in vertices {
        q.add_vertex(*v);
    }
    for &(id, s, t, deg) in arrows {
        q.add_arrow(id, s, t, deg, Origin::Plain);
    }
    let mut alg = DgQuiverAlgebra::new(q);
    for &(a, terms) in diff {
        let mut x = PathSum::zero();
        for &(path, c) in terms {
            let ids: Vec<ArrowId> = path.iter().map(|n| alg.quiver.arrow_id(n).expect("known arrow")).collect();
            x.add_term(Path::from_arrows(&alg.quiver, &ids).expect("composable"), coeff(c));
        }
        let a = alg.quiver.arrow_id(a).expect("known arrow");
        alg.set_diff(a, x);
    }
    alg
}

/// `1 → 2 → 3 → 4` with `α: 1 → 3` of degree -1 and `d(α) = ab`. The
/// relation `bc = 0` of the original example is not modelled.
pub fn counterexample_1() -> DgQuiverAlgebra {
    algebra(
        &["1", "2", "3", "4"],
        &[("a", 0, 1, 0), ("b", 1, 2, 0), ("c", 2, 3, 0), ("alpha", 0, 2, -1)],
        &[("alpha", &[(&["a", "b"], 1)])],
    )
}

/// `a: 1 → 2`, `b: 2 → 1` and `α: 1 → 2` of degree -1 with `d(α) = aba`.
pub fn counterexample_2() -> DgQuiverAlgebra {
    algebra(
        &["1", "2"],
        &[("a", 0, 1, 0), ("b", 1, 0, 0), ("alpha", 0, 1, -1)],
        &[("alpha", &[(&["a", "b", "a"], 1)])],
    )
}

/// `a, α: 1 → 2`, `b: 1 → 3`, `c: 3 → 2` with `d(α) = bc - a`.
pub fn cancellation_example() -> DgQuiverAlgebra {
    algebra(
        &["1", "2", "3"],
        &[("a", 0, 1, 0), ("alpha", 0, 1, -1), ("b", 0, 2, 0), ("c", 2, 1, 0)],
        &[("alpha", &[(&["b", "c"], 1), (&["a"], -1)])],
    )
}
