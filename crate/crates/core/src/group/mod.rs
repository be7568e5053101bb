//! Group actions on complex vector spaces, subgroups, cosets, stabilizers
//! and coset-leader selection.

mod matrix;

pub use matrix::{ElemId, FiniteUnitaryGroup, GroupSpec, NamedVector, DEFAULT_MAX_ORDER};

use std::collections::{HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c64, dist, CMatrix, CVector, C64};

/// Largest group the generic algorithms will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// A finite group acting unitarily on `C^dim`.
///
/// Elements are exact values (ids, permutations with exponents) so
/// equality and hashing never involve floating point.
pub trait GroupAction: Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn dim(&self) -> usize;
    fn identity(&self) -> Self::Elem;
    fn compose(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;

    /// `out = a v`. Both slices have length `dim()`.
    fn act_into(&self, a: &Self::Elem, v: &[C64], out: &mut [C64]);

    fn order(&self) -> u128;

    /// Every element, identity first. Fails above [`ENUMERATION_LIMIT`].
    fn elements(&self) -> Result<Vec<Self::Elem>>;

    fn label(&self, a: &Self::Elem) -> String;

    fn parse_label(&self, _s: &str) -> Option<Self::Elem> {
        None
    }

    fn act(&self, a: &Self::Elem, v: &CVector) -> CVector {
        let mut out = vec![c64(0.0, 0.0); self.dim()];
        self.act_into(a, v.as_slice(), &mut out);
        CVector::new(out)
    }

    fn to_matrix(&self, a: &Self::Elem) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.act(a, &CVector::basis(n, j));
            for i in 0..n {
                m.set(i, j, col[i]);
            }
        }
        m
    }

    fn power(&self, a: &Self::Elem, k: usize) -> Self::Elem {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.compose(&acc, a);
        }
        acc
    }

    fn product(&self, factors: &[Self::Elem]) -> Self::Elem {
        factors
            .iter()
            .fold(self.identity(), |acc, f| self.compose(&acc, f))
    }
}

impl<A: GroupAction + ?Sized> GroupAction for &A {
    type Elem = A::Elem;

    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn identity(&self) -> A::Elem {
        (**self).identity()
    }
    fn compose(&self, a: &A::Elem, b: &A::Elem) -> A::Elem {
        (**self).compose(a, b)
    }
    fn inverse(&self, a: &A::Elem) -> A::Elem {
        (**self).inverse(a)
    }
    fn act_into(&self, a: &A::Elem, v: &[C64], out: &mut [C64]) {
        (**self).act_into(a, v, out)
    }
    fn order(&self) -> u128 {
        (**self).order()
    }
    fn elements(&self) -> Result<Vec<A::Elem>> {
        (**self).elements()
    }
    fn label(&self, a: &A::Elem) -> String {
        (**self).label(a)
    }
    fn parse_label(&self, s: &str) -> Option<A::Elem> {
        (**self).parse_label(s)
    }
    fn to_matrix(&self, a: &A::Elem) -> CMatrix {
        (**self).to_matrix(a)
    }
}

pub(crate) fn check_dim<A: GroupAction + ?Sized>(action: &A, v: &CVector) -> Result<()> {
    if v.dim() != action.dim() {
        return Err(Error::DimensionMismatch {
            expected: action.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// `||a x - y||` using a scratch buffer.
#[inline]
pub(crate) fn moved_dist<A: GroupAction + ?Sized>(
    action: &A,
    a: &A::Elem,
    x: &[C64],
    y: &[C64],
    scratch: &mut [C64],
) -> f64 {
    action.act_into(a, x, scratch);
    dist(scratch, y)
}

/// `||a x0 - x0||`.
pub fn displacement<A: GroupAction + ?Sized>(action: &A, a: &A::Elem, x0: &CVector) -> f64 {
    let mut s = vec![c64(0.0, 0.0); action.dim()];
    moved_dist(action, a, x0.as_slice(), x0.as_slice(), &mut s)
}

/// A subgroup stored as an explicit element list, identity first.
#[derive(Clone, Debug)]
pub struct Subgroup<E: Eq + Hash> {
    elements: Vec<E>,
    members: HashSet<E>,
}

impl<E: Clone + Eq + Hash + Debug> Subgroup<E> {
    /// Closure of `generators` under composition.
    pub fn generated<A: GroupAction<Elem = E>>(action: &A, generators: &[E]) -> Self {
        let id = action.identity();
        let mut elements = vec![id.clone()];
        let mut members: HashSet<E> = HashSet::from([id]);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let p = action.compose(&elements[i], g);
                if members.insert(p.clone()) {
                    elements.push(p);
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        Subgroup { elements, members }
    }

    pub fn whole<A: GroupAction<Elem = E>>(action: &A) -> Result<Self> {
        let elements = action.elements()?;
        Ok(Self::from_elements_unchecked(elements))
    }

    pub fn trivial<A: GroupAction<Elem = E>>(action: &A) -> Self {
        Self::from_elements_unchecked(vec![action.identity()])
    }

    /// Validates identity membership and closure.
    pub fn from_elements<A: GroupAction<Elem = E>>(action: &A, elements: Vec<E>) -> Result<Self> {
        let s = Self::from_elements_unchecked(elements);
        if !s.contains(&action.identity()) {
            return Err(Error::InvalidParameter(
                "subgroup lacks the identity".into(),
            ));
        }
        for a in &s.elements {
            for b in &s.elements {
                if !s.contains(&action.compose(a, b)) {
                    return Err(Error::InvalidParameter("element set is not closed".into()));
                }
            }
        }
        Ok(s)
    }

    pub(crate) fn from_elements_unchecked(mut elements: Vec<E>) -> Self {
        let mut members = HashSet::with_capacity(elements.len());
        elements.retain(|e| members.insert(e.clone()));
        Subgroup { elements, members }
    }

    pub fn contains(&self, e: &E) -> bool {
        self.members.contains(e)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn is_subgroup_of(&self, other: &Subgroup<E>) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }
}

/// Left cosets `aH` partitioning `K`, in order of first appearance in `K`.
pub fn left_cosets<A: GroupAction>(
    action: &A,
    k: &Subgroup<A::Elem>,
    h: &Subgroup<A::Elem>,
) -> Result<Vec<Vec<A::Elem>>> {
    if !h.is_subgroup_of(k) {
        return Err(Error::NotSubgroup);
    }
    let mut seen: HashSet<A::Elem> = HashSet::with_capacity(k.order());
    let mut cosets = Vec::with_capacity(k.order() / h.order().max(1));
    for a in k.elements() {
        if seen.contains(a) {
            continue;
        }
        let coset: Vec<A::Elem> = h.elements().iter().map(|x| action.compose(a, x)).collect();
        seen.extend(coset.iter().cloned());
        cosets.push(coset);
    }
    Ok(cosets)
}

/// Elements of `within` fixing `x0` to within `tol`.
pub fn stabilizer<A: GroupAction>(
    action: &A,
    within: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<Subgroup<A::Elem>> {
    check_dim(action, x0)?;
    let mut s = vec![c64(0.0, 0.0); action.dim()];
    let fixers = within
        .elements()
        .iter()
        .filter(|g| moved_dist(action, g, x0.as_slice(), x0.as_slice(), &mut s) <= tol)
        .cloned()
        .collect();
    Ok(Subgroup::from_elements_unchecked(fixers))
}

/// Orbit of `x0`, one point per coset of the stabilizer.
pub fn orbit<A: GroupAction>(action: &A, x0: &CVector, tol: f64) -> Result<Vec<CVector>> {
    let g = Subgroup::whole(action)?;
    let s = stabilizer(action, &g, x0, tol)?;
    let cosets = left_cosets(action, &g, &s)?;
    Ok(cosets.iter().map(|c| action.act(&c[0], x0)).collect())
}

pub fn has_full_orbit<A: GroupAction>(action: &A, x0: &CVector, tol: f64) -> Result<bool> {
    let g = Subgroup::whole(action)?;
    Ok(stabilizer(action, &g, x0, tol)?.order() == 1)
}

/// Coset leaders for `H <= K`, identity first, one per left coset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetLeaderSet<E> {
    pub leaders: Vec<E>,
}

/// A coset containing two minimizers of `||c^-1 x0 - x0||` that are not
/// related by the stabilizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieReport<E> {
    pub coset_index: usize,
    pub coset: Vec<E>,
    pub tied: Vec<E>,
    pub distance: f64,
}

/// Leaders chosen by smallest `||c^-1 x0 - x0||`, with any ties recorded.
#[derive(Clone, Debug)]
pub struct LeaderSelection<E> {
    pub leaders: Vec<E>,
    pub ties: Vec<TieReport<E>>,
}

/// Picks the closest member of every coset. Among equivalent minimizers
/// (differing by an element of `Stab_H(x0)`) the first in coset order wins
/// and the identity coset always yields `I`.
pub fn closest_coset_leaders<A: GroupAction>(
    action: &A,
    k: &Subgroup<A::Elem>,
    h: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<LeaderSelection<A::Elem>> {
    check_dim(action, x0)?;
    let cosets = left_cosets(action, k, h)?;
    let stab_h = stabilizer(action, h, x0, tol)?;
    let id = action.identity();
    let mut leaders = Vec::with_capacity(cosets.len());
    let mut ties = Vec::new();
    for (ci, coset) in cosets.iter().enumerate() {
        let d: Vec<f64> = coset
            .iter()
            .map(|c| displacement(action, &action.inverse(c), x0))
            .collect();
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let minimizers: Vec<&A::Elem> = coset
            .iter()
            .zip(&d)
            .filter(|(_, &x)| x <= min + tol)
            .map(|(c, _)| c)
            .collect();
        let chosen = if minimizers.contains(&&id) {
            id.clone()
        } else {
            minimizers[0].clone()
        };
        let chosen_inv = action.inverse(&chosen);
        let tied: Vec<A::Elem> = minimizers
            .iter()
            .filter(|&&c| !stab_h.contains(&action.compose(&chosen_inv, c)))
            .map(|&c| c.clone())
            .collect();
        if !tied.is_empty() {
            let mut all = vec![chosen.clone()];
            all.extend(tied);
            ties.push(TieReport {
                coset_index: ci,
                coset: coset.clone(),
                tied: all,
                distance: min,
            });
        }
        leaders.push(chosen);
    }
    Ok(LeaderSelection { leaders, ties })
}

/// Minimal coset leaders, or the first tie that prevents them.
pub fn minimal_coset_leaders<A: GroupAction>(
    action: &A,
    k: &Subgroup<A::Elem>,
    h: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<std::result::Result<CosetLeaderSet<A::Elem>, TieReport<A::Elem>>> {
    let sel = closest_coset_leaders(action, k, h, x0, tol)?;
    Ok(match sel.ties.into_iter().next() {
        Some(t) => Err(t),
        None => Ok(CosetLeaderSet {
            leaders: sel.leaders,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gr1n::{Gr1n, MonomialElement};
    use crate::numerics::DEFAULT_TOL;

    fn g312() -> Gr1n {
        Gr1n::new(3, 2).unwrap()
    }

    #[test]
    fn orbit_of_zero_vector() {
        let g = g312();
        let z = CVector::zeros(2);
        let all = Subgroup::whole(&g).unwrap();
        assert_eq!(stabilizer(&g, &all, &z, DEFAULT_TOL).unwrap().order(), 18);
        assert_eq!(orbit(&g, &z, DEFAULT_TOL).unwrap().len(), 1);
    }

    #[test]
    fn full_orbit_for_distinct_moduli() {
        let g = g312();
        let x0 = CVector::from_real(&[0.6, 0.8]);
        let pts = orbit(&g, &x0, DEFAULT_TOL).unwrap();
        assert_eq!(pts.len(), 18);
        // brute-force pairwise distinctness
        for i in 0..pts.len() {
            for j in 0..i {
                assert!(dist(pts[i].as_slice(), pts[j].as_slice()) > 1e-6);
            }
        }
        assert!(has_full_orbit(&g, &x0, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn zero_slot_is_fixed_by_its_phases() {
        let g = g312();
        let x0 = CVector::from_real(&[0.0, 1.0]);
        let all = Subgroup::whole(&g).unwrap();
        let s = stabilizer(&g, &all, &x0, DEFAULT_TOL).unwrap();
        // brute force: elements mapping (0,1) to itself
        let count = all
            .elements()
            .iter()
            .filter(|e| e.sigma()[1] == 1 && e.exponents()[1] == 0)
            .count();
        assert_eq!(count, 3);
        assert_eq!(s.order(), 3);
        assert!(!has_full_orbit(&g, &x0, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn coset_partitions() {
        let g = g312();
        let all = Subgroup::whole(&g).unwrap();
        let triv = Subgroup::trivial(&g);
        assert_eq!(left_cosets(&g, &all, &all).unwrap().len(), 1);
        let singles = left_cosets(&g, &all, &triv).unwrap();
        assert_eq!(singles.len(), 18);
        assert!(singles.iter().all(|c| c.len() == 1));
        let a1 = MonomialElement::phase(3, 2, 0, 1);
        let h = Subgroup::generated(&g, &[a1]);
        let cs = left_cosets(&g, &all, &h).unwrap();
        assert_eq!(cs.len() * h.order(), all.order());
        assert!(left_cosets(&g, &h, &all).is_err());
    }

    #[test]
    fn leaders_of_h_in_h_is_identity() {
        let g = g312();
        let all = Subgroup::whole(&g).unwrap();
        let x0 = CVector::from_real(&[0.6, 0.8]);
        let set = minimal_coset_leaders(&g, &all, &all, &x0, DEFAULT_TOL)
            .unwrap()
            .unwrap();
        assert_eq!(set.leaders, vec![g.identity()]);
    }

    #[test]
    fn subgroup_validation() {
        let g = g312();
        let a1 = MonomialElement::phase(3, 2, 0, 1);
        assert!(Subgroup::from_elements(&g, vec![g.identity(), a1.clone()]).is_err());
        let h = Subgroup::generated(&g, &[a1]);
        assert_eq!(h.order(), 3);
        assert!(Subgroup::from_elements(&g, h.elements().to_vec()).is_ok());
    }
}
