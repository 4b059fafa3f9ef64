use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::path::{Path, PathSum};
use super::quiver::{ArrowId, GradedQuiver};
use super::{coeff_to_string, sign, Coeff};
use crate::error::{Error, Result};

/// A linear combination of cycles modulo signed cyclic permutation.
///
/// Each cycle is stored by its canonical rotation: the rotation whose
/// sequence of arrow names is lexicographically smallest. Rotating
/// `c = x y` to `y x` multiplies the coefficient by `(-1)^{|x||y|}`.
/// A cycle that is rotation-equivalent to its own negative is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Potential {
    terms: BTreeMap<Vec<ArrowId>, Coeff>,
}

/// Rotate `c` left by `r` positions, returning the rotation sign.
pub(crate) fn rotate(q: &GradedQuiver, c: &[ArrowId], r: usize) -> (Vec<ArrowId>, i64) {
    let (x, y) = c.split_at(r);
    let dx: i64 = x.iter().map(|&a| q.deg(a)).sum();
    let dy: i64 = y.iter().map(|&a| q.deg(a)).sum();
    let mut out = y.to_vec();
    out.extend_from_slice(x);
    (out, dx * dy)
}

/// Canonical rotation of a cycle and the sign relating it to the input,
/// or `None` when the cycle vanishes modulo signed rotation.
pub(crate) fn canonical_rotation(q: &GradedQuiver, c: &[ArrowId]) -> Option<(Vec<ArrowId>, i64)> {
    let mut best: Option<(Vec<&str>, Vec<ArrowId>, i64)> = None;
    let mut conflict = false;
    for r in 0..c.len() {
        let (rot, e) = rotate(q, c, r);
        let key: Vec<&str> = rot.iter().map(|&a| q.name(a)).collect();
        match &best {
            Some((bk, _, be)) if *bk == key => {
                if (be - e).rem_euclid(2) != 0 {
                    conflict = true;
                }
            }
            Some((bk, _, _)) if *bk < key => {}
            _ => {
                best = Some((key, rot, e));
                conflict = false;
            }
        }
    }
    if conflict {
        return None;
    }
    best.map(|(_, rot, e)| (rot, e))
}

impl Potential {
    pub fn zero() -> Self {
        Potential::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<ArrowId>, &Coeff)> {
        self.terms.iter()
    }

    /// Add `c * cycle`, where `cycle` is any rotation.
    pub fn add_cycle(&mut self, q: &GradedQuiver, cycle: &[ArrowId], c: Coeff) -> Result<()> {
        let p = Path::from_arrows(q, cycle)?;
        if !p.is_cycle() {
            return Err(Error::NotComposable(format!("{} is not a cycle", p.display(q))));
        }
        if c.is_zero() {
            return Ok(());
        }
        let Some((rot, e)) = canonical_rotation(q, cycle) else {
            return Ok(());
        };
        let v = self.terms.entry(rot.clone()).or_insert_with(Coeff::zero);
        *v += c * sign(e);
        if v.is_zero() {
            self.terms.remove(&rot);
        }
        Ok(())
    }

    pub fn add_pathsum(&mut self, q: &GradedQuiver, x: &PathSum) -> Result<()> {
        for (p, c) in x.terms() {
            self.add_cycle(q, &p.arrows, c.clone())?;
        }
        Ok(())
    }

    pub fn coeff_of(&self, q: &GradedQuiver, cycle: &[ArrowId]) -> Coeff {
        match canonical_rotation(q, cycle) {
            Some((rot, e)) => self.terms.get(&rot).map(|c| c * sign(e)).unwrap_or_else(Coeff::zero),
            None => Coeff::zero(),
        }
    }

    pub fn check_homogeneous(&self, q: &GradedQuiver, deg: i64) -> Result<()> {
        for c in self.terms.keys() {
            let d: i64 = c.iter().map(|&a| q.deg(a)).sum();
            if d != deg {
                return Err(Error::Inhomogeneous { expected: deg, found: Path::from_arrows(q, c)?.display(q) });
            }
        }
        Ok(())
    }

    /// Drop every term containing one of the given arrows.
    pub fn without_arrows(&self, drop: &[ArrowId]) -> Potential {
        Potential {
            terms: self.terms.iter().filter(|(c, _)| !c.iter().any(|a| drop.contains(a))).map(|(c, v)| (c.clone(), v.clone())).collect(),
        }
    }

    /// Re-express the potential over another quiver through an arrow map.
    pub fn map_arrows(&self, target: &GradedQuiver, map: &dyn Fn(ArrowId) -> ArrowId) -> Result<Potential> {
        let mut out = Potential::zero();
        for (c, v) in &self.terms {
            let mapped: Vec<ArrowId> = c.iter().map(|&a| map(a)).collect();
            out.add_cycle(target, &mapped, v.clone())?;
        }
        Ok(out)
    }

    pub fn display(&self, q: &GradedQuiver) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (c, v)) in self.terms.iter().enumerate() {
            let neg = v < &Coeff::zero();
            let abs = if neg { -v.clone() } else { v.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&coeff_to_string(&abs));
                out.push(' ');
            }
            out.push_str(&c.iter().map(|&a| q.name(a)).collect::<Vec<_>>().join("·"));
        }
        out
    }
}

/// `∂_φ c = Σ_{c = p φ r} (-1)^{|p||φ r|} r p`, extended linearly.
pub fn cyclic_derivative(q: &GradedQuiver, w: &Potential, phi: ArrowId) -> PathSum {
    let mut out = PathSum::zero();
    for (c, v) in w.terms() {
        for (k, &a) in c.iter().enumerate() {
            if a != phi {
                continue;
            }
            let p = &c[..k];
            let r = &c[k + 1..];
            let dp: i64 = p.iter().map(|&x| q.deg(x)).sum();
            let dphir: i64 = c[k..].iter().map(|&x| q.deg(x)).sum();
            let mut arrows = r.to_vec();
            arrows.extend_from_slice(p);
            let path = if arrows.is_empty() {
                Path::idempotent(q.arrow(phi).tgt)
            } else {
                Path::from_arrows(q, &arrows).expect("rotation of a cycle is composable")
            };
            out.add_term(path, v * sign(dp * dphir));
        }
    }
    out
}

impl Potential {
    pub fn one_term(q: &GradedQuiver, cycle: &[ArrowId]) -> Result<Potential> {
        let mut w = Potential::zero();
        w.add_cycle(q, cycle, Coeff::one())?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{coeff, Origin};
    use proptest::prelude::*;

    /// One vertex with four loops of the given degrees.
    fn bouquet(degs: &[i64]) -> GradedQuiver {
        let mut q = GradedQuiver::new(5);
        q.add_vertex("v");
        for (k, &d) in degs.iter().enumerate() {
            q.add_arrow(format!("x{k}"), 0, 0, d, Origin::Plain);
        }
        q
    }

    /// Rotation sign built one arrow at a time.
    fn stepwise_sign(q: &GradedQuiver, c: &[ArrowId], r: usize) -> i64 {
        let total: i64 = c.iter().map(|&a| q.deg(a)).sum();
        c[..r].iter().map(|&a| q.deg(a) * (total - q.deg(a))).sum()
    }

    fn cycles() -> impl Strategy<Value = (Vec<i64>, Vec<usize>)> {
        (prop::collection::vec(-3i64..=0, 4), prop::collection::vec(0usize..4, 1..7))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_changes_the_coefficient_by_the_koszul_sign((degs, c) in cycles(), r in 0usize..7) {
            let q = bouquet(&degs);
            let r = r % c.len();
            let (rot, e) = rotate(&q, &c, r);
            prop_assert_eq!(&rot[..c.len() - r], &c[r..]);
            let mut w = Potential::zero();
            w.add_cycle(&q, &c, coeff(1)).unwrap();
            w.add_cycle(&q, &rot, -sign(stepwise_sign(&q, &c, r))).unwrap();
            prop_assert!(w.is_zero());
            prop_assert_eq!((e - stepwise_sign(&q, &c, r)).rem_euclid(2), 0);
            let w1 = Potential::one_term(&q, &c).unwrap();
            prop_assert_eq!(w1.coeff_of(&q, &rot), sign(e) * w1.coeff_of(&q, &c));
        }

        #[test]
        fn euler_identity_for_cyclic_derivatives(degs in prop::collection::vec(-3i64..=0, 4), terms in prop::collection::vec((prop::collection::vec(0usize..4, 1..6), -3i64..=3), 1..5)) {
            let q = bouquet(&degs);
            let mut w = Potential::zero();
            let mut expected = Potential::zero();
            for (c, v) in &terms {
                w.add_cycle(&q, c, coeff(*v)).unwrap();
                expected.add_cycle(&q, c, coeff(*v * c.len() as i64)).unwrap();
            }
            let mut euler = Potential::zero();
            for phi in 0..q.arrows.len() {
                let x = PathSum::arrow(&q, phi).mul(&cyclic_derivative(&q, &w, phi));
                euler.add_pathsum(&q, &x).unwrap();
            }
            prop_assert_eq!(euler, expected);
        }
    }

    #[test]
    fn odd_square_vanishes() {
        let q = bouquet(&[-1, 0, 0, 0]);
        assert!(Potential::one_term(&q, &[0, 0]).unwrap().is_zero());
        assert!(!Potential::one_term(&q, &[1, 1]).unwrap().is_zero());
    }

    #[test]
    fn non_cycles_are_rejected() {
        let mut q = GradedQuiver::new(3);
        q.add_vertex("1");
        q.add_vertex("2");
        q.add_arrow("a", 0, 1, 0, Origin::Plain);
        assert!(Potential::one_term(&q, &[0]).is_err());
    }

    #[test]
    fn derivative_of_a_triangle() {
        let mut q = GradedQuiver::new(3);
        for v in ["1", "2", "3"] {
            q.add_vertex(v);
        }
        let a = q.add_arrow("a", 0, 1, 0, Origin::Plain);
        let b = q.add_arrow("b", 1, 2, 0, Origin::Plain);
        let c = q.add_arrow("c", 2, 0, 0, Origin::Plain);
        let w = Potential::one_term(&q, &[a, b, c]).unwrap();
        assert_eq!(cyclic_derivative(&q, &w, b).display(&q), "c·a");
        assert_eq!(w.display(&q), "a·b·c");
        assert!(w.without_arrows(&[c]).is_zero());
    }
}
