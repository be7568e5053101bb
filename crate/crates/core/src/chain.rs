//! Nested subgroup chains `{I} = G_0 < G_1 < ... < G_m = G` described by
//! per-stage coset leaders and generating sets.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::group::{GroupAction, Subgroup, ENUMERATION_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage<E> {
    /// Leaders of `G_k / G_{k-1}`, identity first, in tie-breaking order.
    pub leaders: Vec<E>,
    /// Generating set of `G_k`.
    pub generators: Vec<E>,
}

/// Stage `k` (1-based) holds `CL(G_k/G_{k-1})` and `X_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupChain<E> {
    stages: Vec<Stage<E>>,
}

impl<E: Clone + Eq + Hash + std::fmt::Debug> SubgroupChain<E> {
    pub fn new(stages: Vec<Stage<E>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Empty("chain stages"));
        }
        if stages.iter().any(|s| s.leaders.is_empty()) {
            return Err(Error::Empty("stage leaders"));
        }
        Ok(SubgroupChain { stages })
    }

    /// Checks that every stage starts with the identity.
    pub fn validate<A: GroupAction<Elem = E>>(&self, action: &A) -> Result<()> {
        let id = action.identity();
        for (k, s) in self.stages.iter().enumerate() {
            if s.leaders[0] != id {
                return Err(Error::InvalidParameter(format!(
                    "stage {} does not start with the identity",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stages(&self) -> &[Stage<E>] {
        &self.stages
    }

    /// 1-based stage accessor.
    pub fn stage(&self, k: usize) -> &Stage<E> {
        &self.stages[k - 1]
    }

    pub fn leaders(&self, k: usize) -> &[E] {
        &self.stages[k - 1].leaders
    }

    pub fn generators(&self, k: usize) -> &[E] {
        &self.stages[k - 1].generators
    }

    /// `[G_k : G_{k-1}]` for each stage.
    pub fn indices(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.leaders.len()).collect()
    }

    pub fn order(&self) -> u128 {
        self.stages
            .iter()
            .map(|s| s.leaders.len() as u128)
            .product()
    }

    pub fn subgroup_order(&self, k: usize) -> u128 {
        self.stages[..k]
            .iter()
            .map(|s| s.leaders.len() as u128)
            .product()
    }

    /// `c_m ... c_1` for the given leader positions (`digits[0]` is stage 1).
    pub fn compose_digits<A: GroupAction<Elem = E>>(&self, action: &A, digits: &[usize]) -> E {
        assert_eq!(digits.len(), self.len(), "one digit per stage");
        let mut acc = action.identity();
        for k in (0..self.len()).rev() {
            acc = action.compose(&acc, &self.stages[k].leaders[digits[k]]);
        }
        acc
    }

    /// Products `c_l ... c_{k+1}` over all leader choices, i.e. the induced
    /// leaders of `G_l / G_k`, in mixed-radix order with stage `k+1` fastest.
    pub fn induced_leaders<A: GroupAction<Elem = E>>(
        &self,
        action: &A,
        k: usize,
        l: usize,
    ) -> Result<Vec<E>> {
        if k > l || l > self.len() {
            return Err(Error::InvalidParameter(format!(
                "invalid stage range {k}..{l}"
            )));
        }
        let count: u128 = self.stages[k..l]
            .iter()
            .map(|s| s.leaders.len() as u128)
            .product();
        if count > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                order: count,
                limit: ENUMERATION_LIMIT,
            });
        }
        // build from the top stage down: out = c_l * (c_{l-1} ... )
        let mut out = vec![action.identity()];
        for s in self.stages[k..l].iter() {
            let mut next = Vec::with_capacity(out.len() * s.leaders.len());
            for c in &s.leaders {
                for prefix in &out {
                    next.push(action.compose(c, prefix));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// `G_k` as products of the first `k` stages.
    pub fn subgroup<A: GroupAction<Elem = E>>(&self, action: &A, k: usize) -> Result<Subgroup<E>> {
        Ok(Subgroup::from_elements_unchecked(
            self.induced_leaders(action, 0, k)?,
        ))
    }
}

/// Exhaustive factorization table for a chain: element -> stage digits.
#[derive(Clone, Debug)]
pub struct ChainIndex<E: Eq + Hash> {
    digits: HashMap<E, Vec<u32>>,
}

impl<E: Clone + Eq + Hash + std::fmt::Debug> ChainIndex<E> {
    /// Fails when two digit strings give the same element (the leaders do not
    /// form transversals).
    pub fn build<A: GroupAction<Elem = E>>(action: &A, chain: &SubgroupChain<E>) -> Result<Self> {
        let order = chain.order();
        if order > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                order,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut digits: HashMap<E, Vec<u32>> = HashMap::with_capacity(order as usize);
        let mut layer: Vec<(E, Vec<u32>)> = vec![(action.identity(), vec![])];
        for s in chain.stages() {
            let mut next = Vec::with_capacity(layer.len() * s.leaders.len());
            for (ci, c) in s.leaders.iter().enumerate() {
                for (e, d) in &layer {
                    let mut dd = d.clone();
                    dd.push(ci as u32);
                    next.push((action.compose(c, e), dd));
                }
            }
            layer = next;
        }
        for (e, d) in layer {
            if digits.insert(e, d).is_some() {
                return Err(Error::InvalidParameter(
                    "leader products are not distinct".into(),
                ));
            }
        }
        Ok(ChainIndex { digits })
    }

    pub fn factorize(&self, g: &E) -> Option<&[u32]> {
        self.digits.get(g).map(|d| d.as_slice())
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `g in G_k`: all digits above stage `k` are zero.
    pub fn in_subgroup(&self, g: &E, k: usize) -> bool {
        self.factorize(g)
            .map(|d| d[k..].iter().all(|&x| x == 0))
            .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gr1n::{table1_chain, Gr1n};

    #[test]
    fn digits_round_trip() {
        let g = Gr1n::new(3, 3).unwrap();
        let chain = table1_chain(3, 3).unwrap();
        let idx = ChainIndex::build(&g, &chain).unwrap();
        assert_eq!(idx.len(), 162);
        for (e, d) in idx.digits.iter() {
            let dd: Vec<usize> = d.iter().map(|&x| x as usize).collect();
            assert_eq!(&chain.compose_digits(&g, &dd), e);
        }
    }

    #[test]
    fn induced_leaders_cover_quotient() {
        let g = Gr1n::new(3, 2).unwrap();
        let chain = table1_chain(3, 2).unwrap();
        let top = chain.induced_leaders(&g, 1, 3).unwrap();
        assert_eq!(top.len(), 6);
        let g1 = chain.subgroup(&g, 1).unwrap();
        assert_eq!(g1.order(), 3);
        // distinct cosets
        let mut seen = std::collections::HashSet::new();
        for c in &top {
            let coset: std::collections::BTreeSet<String> = g1
                .elements()
                .iter()
                .map(|h| format!("{:?}", g.compose(c, h)))
                .collect();
            assert!(seen.insert(coset));
        }
        assert!(chain.induced_leaders(&g, 2, 1).is_err());
    }

    #[test]
    fn non_transversal_is_rejected() {
        let g = Gr1n::new(2, 1).unwrap();
        let a = crate::gr1n::MonomialElement::phase(2, 1, 0, 1);
        let chain = SubgroupChain::new(vec![
            Stage {
                leaders: vec![g.identity(), a.clone()],
                generators: vec![a.clone()],
            },
            Stage {
                leaders: vec![g.identity(), a.clone()],
                generators: vec![a],
            },
        ])
        .unwrap();
        assert!(ChainIndex::build(&g, &chain).is_err());
    }
}
