//! Wreath products `H wr Sym_n` of a finite unitary group `H` acting
//! blockwise on `(C^m)^n`.
//!
//! An element is a permutation `sigma` with blocks `B_1..B_n` from `H`,
//! acting as `(g x)_i = B_i x_{sigma(i)}`.

use std::fmt;

use crate::chain::{Stage, SubgroupChain};
use crate::error::{Error, Result};
use crate::group::{ElemId, FiniteUnitaryGroup, GroupAction, Subgroup, ENUMERATION_LIMIT};
use crate::numerics::{c64, inner_unchecked, CMatrix, CVector, C64};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    sigma: Vec<usize>,
    blocks: Vec<ElemId>,
}

impl WreathElement {
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn blocks(&self) -> &[ElemId] {
        &self.blocks
    }
}

impl fmt::Debug for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "perm={:?};blocks={:?}", self.sigma, self.blocks)
    }
}

/// Which copies of `H` the even-stage generating sets add in the new slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SlotGenerators {
    /// Every non-identity element of `H`.
    #[default]
    AllOfH,
    /// Only the supplied generators of `H`.
    GeneratorsOnly,
}

#[derive(Clone, Debug)]
pub struct WreathProduct {
    h: FiniteUnitaryGroup,
    n: usize,
    m: usize,
}

impl WreathProduct {
    pub fn new(h: FiniteUnitaryGroup, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let m = h.dim();
        Ok(WreathProduct { h, n, m })
    }

    pub fn base(&self) -> &FiniteUnitaryGroup {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn element(&self, sigma: Vec<usize>, blocks: Vec<ElemId>) -> Result<WreathElement> {
        if sigma.len() != self.n || blocks.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: sigma.len().min(blocks.len()),
            });
        }
        let mut seen = vec![false; self.n];
        for &s in &sigma {
            if s >= self.n || seen[s] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[s] = true;
        }
        if blocks.iter().any(|b| b.index() >= self.h.len()) {
            return Err(Error::InvalidParameter("block id outside H".into()));
        }
        Ok(WreathElement { sigma, blocks })
    }

    /// `h` in 0-based `slot`, identity elsewhere.
    pub fn slot(&self, slot: usize, h: ElemId) -> WreathElement {
        let mut e = self.identity();
        e.blocks[slot] = h;
        e
    }

    /// Transposition of blocks `j` and `j+1` (0-based).
    pub fn transposition(&self, j: usize) -> WreathElement {
        let mut e = self.identity();
        e.sigma.swap(j, j + 1);
        e
    }

    pub fn checked_mul(&self, g: &WreathElement, h: &WreathElement) -> Result<WreathElement> {
        for e in [g, h] {
            if e.sigma.len() != self.n || e.blocks.iter().any(|b| b.index() >= self.h.len()) {
                return Err(Error::Mismatch("element of another wreath product".into()));
            }
        }
        Ok(self.compose(g, h))
    }

    /// Standard chain with `2n - 1` stages. Odd-stage leaders are the cycles
    /// `b_j ... b_l` ordered by length; even-stage leaders insert each
    /// element of `H` in slot `l+1`.
    pub fn standard_chain(
        &self,
        generators_h: &[ElemId],
        slot_gens: SlotGenerators,
    ) -> Result<SubgroupChain<WreathElement>> {
        let gens = self.standard_generators(generators_h, slot_gens)?;
        let h_elems = self.h.elements()?;
        let slot_leaders =
            |s: usize| -> Vec<WreathElement> { h_elems.iter().map(|&h| self.slot(s, h)).collect() };
        let mut stages = vec![Stage {
            leaders: slot_leaders(0),
            generators: gens[0].clone(),
        }];
        for l in 1..self.n {
            stages.push(Stage {
                leaders: slot_leaders(l),
                generators: gens[2 * l - 1].clone(),
            });
            let mut cycles = vec![self.identity()];
            for j in (1..=l).rev() {
                let c = (j..=l).fold(self.identity(), |acc, t| {
                    self.compose(&acc, &self.transposition(t - 1))
                });
                cycles.push(c);
            }
            stages.push(Stage {
                leaders: cycles,
                generators: gens[2 * l].clone(),
            });
        }
        SubgroupChain::new(stages)
    }

    /// `X_1 .. X_{2n-1}`.
    pub fn standard_generators(
        &self,
        generators_h: &[ElemId],
        slot_gens: SlotGenerators,
    ) -> Result<Vec<Vec<WreathElement>>> {
        if Subgroup::generated(&self.h, generators_h).order() != self.h.len() {
            return Err(Error::InvalidParameter(
                "supplied elements do not generate H".into(),
            ));
        }
        let id = self.h.identity();
        let odd = |l: usize| -> Vec<WreathElement> {
            let mut x: Vec<WreathElement> = generators_h.iter().map(|&h| self.slot(0, h)).collect();
            x.extend((0..l - 1).map(|j| self.transposition(j)));
            x
        };
        let new_slot: Vec<ElemId> = match slot_gens {
            SlotGenerators::AllOfH => (0..self.h.len() as u32)
                .map(ElemId)
                .filter(|&h| h != id)
                .collect(),
            SlotGenerators::GeneratorsOnly => generators_h.to_vec(),
        };
        let mut out = vec![odd(1)];
        for l in 1..self.n {
            let mut even = odd(l);
            even.extend(new_slot.iter().map(|&h| self.slot(l, h)));
            out.push(even);
            out.push(odd(l + 1));
        }
        Ok(out)
    }

    /// Block matrix of `g`.
    pub fn matrix_of(&self, g: &WreathElement) -> CMatrix {
        let d = self.n * self.m;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..self.n {
            let b = self.h.matrix(g.blocks[i]);
            let j = g.sigma[i];
            for r in 0..self.m {
                for c in 0..self.m {
                    out.set(i * self.m + r, j * self.m + c, b.get(r, c));
                }
            }
        }
        out
    }

    /// `max_h Re(v0^H h x)` over `H`, with the first maximizing `h`.
    pub fn best_block(&self, v0: &[C64], x: &[C64]) -> (ElemId, f64) {
        let mut buf = vec![c64(0.0, 0.0); self.m];
        let mut best = (ElemId(0), f64::NEG_INFINITY);
        for id in 0..self.h.len() as u32 {
            self.h.act_into(&ElemId(id), x, &mut buf);
            let v = inner_unchecked(v0, &buf).re;
            if v > best.1 {
                best = (ElemId(id), v);
            }
        }
        best
    }
}

/// `(u_1 v0, ..., u_n v0)` scaled to unit norm.
pub fn extend_initial_vector(v0: &CVector, u: &[f64]) -> Result<CVector> {
    if u.is_empty() {
        return Err(Error::Empty("slot weights"));
    }
    if v0.norm() == 0.0 {
        return Err(Error::InvalidParameter("zero base vector".into()));
    }
    if u[0] <= 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "slot weights must be positive and strictly increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(u.len() * v0.dim());
    for &w in u {
        out.extend(v0.iter().map(|z| z * w));
    }
    CVector::new(out)
        .normalized()
        .ok_or_else(|| Error::InvalidParameter("degenerate vector".into()))
}

/// `v0` is usable in every slot when only the identity of `H` fixes it.
pub fn is_suitable(h: &FiniteUnitaryGroup, v0: &CVector, tol: f64) -> Result<bool> {
    crate::group::has_full_orbit(h, v0, tol)
}

impl GroupAction for WreathProduct {
    type Elem = WreathElement;

    fn dim(&self) -> usize {
        self.n * self.m
    }

    fn identity(&self) -> WreathElement {
        WreathElement {
            sigma: (0..self.n).collect(),
            blocks: vec![self.h.identity(); self.n],
        }
    }

    fn compose(&self, g: &WreathElement, h: &WreathElement) -> WreathElement {
        let mut sigma = Vec::with_capacity(self.n);
        let mut blocks = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let s = g.sigma[i];
            sigma.push(h.sigma[s]);
            blocks.push(self.h.compose(&g.blocks[i], &h.blocks[s]));
        }
        WreathElement { sigma, blocks }
    }

    fn inverse(&self, g: &WreathElement) -> WreathElement {
        let mut sigma = vec![0; self.n];
        for i in 0..self.n {
            sigma[g.sigma[i]] = i;
        }
        let blocks = (0..self.n)
            .map(|j| self.h.inverse(&g.blocks[sigma[j]]))
            .collect();
        WreathElement { sigma, blocks }
    }

    fn act_into(&self, g: &WreathElement, v: &[C64], out: &mut [C64]) {
        let m = self.m;
        for i in 0..self.n {
            let j = g.sigma[i];
            self.h.act_into(
                &g.blocks[i],
                &v[j * m..(j + 1) * m],
                &mut out[i * m..(i + 1) * m],
            );
        }
    }

    fn order(&self) -> u128 {
        let f: u128 = (1..=self.n as u128).product();
        f * (self.h.len() as u128).pow(self.n as u32)
    }

    fn elements(&self) -> Result<Vec<WreathElement>> {
        let order = self.order();
        if order > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                order,
                limit: ENUMERATION_LIMIT,
            });
        }
        let perms = permutations(self.n);
        let hn = self.h.len();
        let mut out = Vec::with_capacity(order as usize);
        for p in &perms {
            let mut digits = vec![0usize; self.n];
            loop {
                out.push(WreathElement {
                    sigma: p.clone(),
                    blocks: digits.iter().map(|&d| ElemId(d as u32)).collect(),
                });
                let mut i = 0;
                while i < self.n {
                    digits[i] += 1;
                    if digits[i] < hn {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == self.n {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// `perm=[images];blocks=[h-labels]`, 1-based images.
    fn label(&self, g: &WreathElement) -> String {
        let perm: Vec<String> = g.sigma.iter().map(|s| (s + 1).to_string()).collect();
        let blocks: Vec<String> = g.blocks.iter().map(|b| self.h.label(b)).collect();
        format!("perm=[{}];blocks=[{}]", perm.join(","), blocks.join(","))
    }

    fn parse_label(&self, s: &str) -> Option<WreathElement> {
        let (p, b) = s.trim().split_once(";blocks=")?;
        let p = p.strip_prefix("perm=[")?.strip_suffix(']')?;
        let b = b.strip_prefix('[')?.strip_suffix(']')?;
        let sigma = p
            .split(',')
            .map(|x| x.trim().parse::<usize>().ok()?.checked_sub(1))
            .collect::<Option<Vec<_>>>()?;
        let blocks = b
            .split(',')
            .map(|x| self.h.parse_label(x))
            .collect::<Option<Vec<_>>>()?;
        self.element(sigma, blocks).ok()
    }

    fn to_matrix(&self, g: &WreathElement) -> CMatrix {
        self.matrix_of(g)
    }
}

// identity first, then lexicographic
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gr1n::{table1_chain, Gr1n, MonomialElement};
    use crate::numerics::{mat_mul, root_of_unity, DEFAULT_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyclic(r: u32) -> FiniteUnitaryGroup {
        FiniteUnitaryGroup::generate(&[CMatrix::diag(&[root_of_unity(1, r)])], DEFAULT_TOL, 64)
            .unwrap()
    }

    fn dihedral4() -> FiniteUnitaryGroup {
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        let swap = CMatrix::from_rows(vec![vec![zero, one], vec![one, zero]]).unwrap();
        let flip = CMatrix::diag(&[c64(-1.0, 0.0), one]);
        FiniteUnitaryGroup::generate(&[swap, flip], DEFAULT_TOL, 64).unwrap()
    }

    fn random_element(w: &WreathProduct, rng: &mut ChaCha8Rng) -> WreathElement {
        let mut sigma: Vec<usize> = (0..w.n()).collect();
        for i in (1..sigma.len()).rev() {
            sigma.swap(i, rng.gen_range(0..=i));
        }
        let blocks = (0..w.n())
            .map(|_| ElemId(rng.gen_range(0..w.base().len() as u32)))
            .collect();
        w.element(sigma, blocks).unwrap()
    }

    fn as_monomial(w: &WreathElement, r: u32) -> MonomialElement {
        MonomialElement::new(
            r,
            w.sigma().to_vec(),
            w.blocks().iter().map(|b| b.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn matrix_homomorphism_and_associativity() {
        let w = WreathProduct::new(dihedral4(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b, c) = (
                random_element(&w, &mut rng),
                random_element(&w, &mut rng),
                random_element(&w, &mut rng),
            );
            assert_eq!(
                w.compose(&w.compose(&a, &b), &c),
                w.compose(&a, &w.compose(&b, &c))
            );
            let lhs = w.matrix_of(&w.compose(&a, &b));
            let rhs = mat_mul(&w.matrix_of(&a), &w.matrix_of(&b)).unwrap();
            assert!(lhs.approx_eq(&rhs, DEFAULT_TOL));
            assert_eq!(w.compose(&a, &w.inverse(&a)), w.identity());
        }
    }

    #[test]
    fn symbolic_action_matches_matrix() {
        let w = WreathProduct::new(dihedral4(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = random_element(&w, &mut rng);
            let x = CVector::new((0..6).map(|_| c64(rng.gen(), rng.gen())).collect());
            let a = w.act(&g, &x);
            let b = crate::numerics::apply(&w.matrix_of(&g), &x).unwrap();
            assert!(crate::numerics::distance(&a, &b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn cyclic_base_specializes_to_monomial() {
        let r = 4;
        let w = WreathProduct::new(cyclic(r), 3).unwrap();
        let g = Gr1n::new(r, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let e = random_element(&w, &mut rng);
            assert!(w
                .matrix_of(&e)
                .approx_eq(&as_monomial(&e, r).to_matrix(), DEFAULT_TOL));
        }
        let gen = w.base().generator(0);
        let chain = w
            .standard_chain(&[gen], SlotGenerators::GeneratorsOnly)
            .unwrap();
        let t1 = table1_chain(r, 3).unwrap();
        assert_eq!(chain.len(), t1.len());
        for k in 1..=chain.len() {
            let a: Vec<_> = chain.leaders(k).iter().map(|e| as_monomial(e, r)).collect();
            assert_eq!(a, t1.leaders(k), "stage {k} leaders");
            let x: Vec<_> = chain
                .generators(k)
                .iter()
                .map(|e| as_monomial(e, r))
                .collect();
            assert_eq!(x, t1.generators(k), "stage {k} generators");
        }
        assert_eq!(g.order(), w.order());
    }

    #[test]
    fn chain_indices() {
        let w = WreathProduct::new(cyclic(3), 2).unwrap();
        let gen = w.base().generator(0);
        let chain = w.standard_chain(&[gen], SlotGenerators::AllOfH).unwrap();
        assert_eq!(chain.indices(), vec![3, 3, 2]);
        assert_eq!(chain.order(), w.order());
        let one = WreathProduct::new(dihedral4(), 1).unwrap();
        let gens = one.base().generators().to_vec();
        let c1 = one.standard_chain(&gens, SlotGenerators::AllOfH).unwrap();
        assert_eq!(c1.len(), 1);
        assert_eq!(c1.leaders(1).len(), 8);
        let x = one
            .standard_generators(&gens, SlotGenerators::AllOfH)
            .unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x[0].len(), 2);
    }

    #[test]
    fn generating_sets_generate() {
        let w = WreathProduct::new(dihedral4(), 3).unwrap();
        let gens = w.base().generators().to_vec();
        let chain = w
            .standard_chain(&gens, SlotGenerators::GeneratorsOnly)
            .unwrap();
        for k in 1..=chain.len() {
            let from_gens = Subgroup::generated(&w, chain.generators(k));
            assert_eq!(
                from_gens.order() as u128,
                chain.subgroup_order(k),
                "stage {k}"
            );
            let members = chain.subgroup(&w, k).unwrap();
            assert!(from_gens.elements().iter().all(|e| members.contains(e)));
        }
        // a single reflection does not generate the dihedral group
        let bad = [w.base().generator(1)];
        assert!(w.standard_generators(&bad, SlotGenerators::AllOfH).is_err());
    }

    #[test]
    fn enumeration_is_complete() {
        let w = WreathProduct::new(dihedral4(), 2).unwrap();
        let all = w.elements().unwrap();
        assert_eq!(all.len(), 128);
        assert_eq!(all[0], w.identity());
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 128);
        for e in all.iter().take(20) {
            assert_eq!(w.parse_label(&w.label(e)).as_ref(), Some(e));
        }
    }

    #[test]
    fn initial_vector_extension() {
        let v0 = CVector::new(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        assert_eq!(extend_initial_vector(&v0, &[1.0]).unwrap(), v0);
        let x = extend_initial_vector(&v0, &[1.0, 2.0, 3.5]).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!(extend_initial_vector(&v0, &[2.0, 1.0]).is_err());
        assert!(extend_initial_vector(&v0, &[0.0, 1.0]).is_err());
        assert!(extend_initial_vector(&CVector::zeros(2), &[1.0]).is_err());
        // cyclic base with v0 = (1) gives the arithmetic progression vector
        let beta = (1.0 - (std::f64::consts::TAU / 5.0).cos()).sqrt();
        let u: Vec<f64> = (0..3).map(|i| 1.0 + i as f64 * beta).collect();
        let x = extend_initial_vector(&CVector::from_real(&[1.0]), &u).unwrap();
        assert_eq!(x, crate::code::standard_initial_vector(5, 3).unwrap());
    }

    #[test]
    fn suitability() {
        let d = dihedral4();
        assert!(is_suitable(&d, &CVector::from_real(&[0.6, 0.8]), DEFAULT_TOL).unwrap());
        assert!(!is_suitable(&d, &CVector::from_real(&[1.0, 0.0]), DEFAULT_TOL).unwrap());
    }
}
