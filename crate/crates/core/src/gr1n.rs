//! Exact arithmetic for the monomial groups `G(r,1,n)`: elements are a
//! permutation together with a vector of exponents of `xi = e^{2 pi i/r}`.
//!
//! The action is `(g v)_i = xi^{k_i} v_{sigma(i)}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{Stage, SubgroupChain};
use crate::error::{Error, Result};
use crate::group::{GroupAction, ENUMERATION_LIMIT};
use crate::numerics::{root_of_unity, CMatrix, C64};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialElement {
    r: u32,
    // 0-based images
    sigma: Vec<usize>,
    k: Vec<u32>,
}

impl MonomialElement {
    pub fn new(r: u32, sigma: Vec<usize>, k: Vec<u32>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("r must be positive".into()));
        }
        let n = sigma.len();
        if n == 0 || k.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.len(),
            });
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::InvalidParameter(format!(
                    "{sigma:?} is not a permutation"
                )));
            }
            seen[s] = true;
        }
        let k = k.into_iter().map(|x| x % r).collect();
        Ok(MonomialElement { r, sigma, k })
    }

    pub fn identity(r: u32, n: usize) -> Self {
        MonomialElement {
            r,
            sigma: (0..n).collect(),
            k: vec![0; n],
        }
    }

    /// `a_{slot+1}^power`, multiplying coordinate `slot` by `xi^power`.
    pub fn phase(r: u32, n: usize, slot: usize, power: u32) -> Self {
        let mut e = Self::identity(r, n);
        e.k[slot] = power % r;
        e
    }

    /// `b_{j+1}`, swapping coordinates `j` and `j+1` (0-based).
    pub fn transposition(r: u32, n: usize, j: usize) -> Self {
        let mut e = Self::identity(r, n);
        e.sigma.swap(j, j + 1);
        e
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// 0-based images.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn exponents(&self) -> &[u32] {
        &self.k
    }

    pub fn is_identity(&self) -> bool {
        self.k.iter().all(|&x| x == 0) && self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.r != other.r || self.n() != other.n() {
            return Err(Error::Mismatch(format!(
                "G({},1,{}) vs G({},1,{})",
                self.r,
                self.n(),
                other.r,
                other.n()
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, h: &Self) -> Self {
        let n = self.n();
        let mut sigma = Vec::with_capacity(n);
        let mut k = Vec::with_capacity(n);
        for i in 0..n {
            let s = self.sigma[i];
            sigma.push(h.sigma[s]);
            k.push((self.k[i] + h.k[s]) % self.r);
        }
        MonomialElement {
            r: self.r,
            sigma,
            k,
        }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut sigma = vec![0; n];
        let mut k = vec![0; n];
        for i in 0..n {
            sigma[self.sigma[i]] = i;
        }
        for j in 0..n {
            k[j] = (self.r - self.k[sigma[j]]) % self.r;
        }
        MonomialElement {
            r: self.r,
            sigma,
            k,
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.n();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, self.sigma[i], root_of_unity(self.k[i] as i64, self.r));
        }
        m
    }

    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for i in 0..self.n() {
            out[i] = root_of_unity(self.k[i] as i64, self.r) * v[self.sigma[i]];
        }
    }
}

impl std::ops::Mul for &MonomialElement {
    type Output = MonomialElement;

    /// Panics on mismatched `(r, n)`; see [`MonomialElement::checked_mul`].
    fn mul(self, rhs: &MonomialElement) -> MonomialElement {
        self.checked_mul(rhs).expect("mismatched monomial groups")
    }
}

impl fmt::Display for MonomialElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        write!(
            f,
            "perm=[{}];k=[{}];r={}",
            join(self.sigma.iter().map(|s| (s + 1).to_string()).collect()),
            join(self.k.iter().map(|k| k.to_string()).collect()),
            self.r
        )
    }
}

impl fmt::Debug for MonomialElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MonomialElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad element `{s}`"));
        let mut perm = None;
        let mut k = None;
        let mut r = None;
        for part in s.trim().split(';') {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            let list = |v: &str| -> Result<Vec<u64>> {
                let inner = v
                    .trim()
                    .strip_prefix('[')
                    .and_then(|x| x.strip_suffix(']'))
                    .ok_or_else(bad)?;
                if inner.trim().is_empty() {
                    return Ok(vec![]);
                }
                inner
                    .split(',')
                    .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
                    .collect()
            };
            match key.trim() {
                "perm" => perm = Some(list(val)?),
                "k" => k = Some(list(val)?),
                "r" => r = Some(val.trim().parse::<u32>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (perm, k, r) = (
            perm.ok_or_else(bad)?,
            k.ok_or_else(bad)?,
            r.ok_or_else(bad)?,
        );
        if perm.iter().any(|&p| p == 0) || k.iter().any(|&x| x >= r as u64) {
            return Err(bad());
        }
        MonomialElement::new(
            r,
            perm.into_iter().map(|p| p as usize - 1).collect(),
            k.into_iter().map(|x| x as u32).collect(),
        )
    }
}

impl Serialize for MonomialElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonomialElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `G(r,1,n)` acting on `C^n`.
#[derive(Clone, Debug)]
pub struct Gr1n {
    r: u32,
    n: usize,
    roots: Vec<C64>,
    chain: SubgroupChain<MonomialElement>,
}

impl Gr1n {
    pub fn new(r: u32, n: usize) -> Result<Self> {
        Ok(Gr1n {
            r,
            n,
            roots: (0..r).map(|k| root_of_unity(k as i64, r)).collect(),
            chain: table1_chain(r, n)?,
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize) -> MonomialElement {
        MonomialElement::phase(self.r, self.n, i - 1, 1)
    }

    /// `b_j` for `1 <= j < n`.
    pub fn b(&self, j: usize) -> MonomialElement {
        MonomialElement::transposition(self.r, self.n, j - 1)
    }

    /// `b_from b_{from+1} ... b_to` (1-based, `from <= to`), the cycle moving
    /// coordinate `to+1` to position `from`.
    pub fn cycle(&self, from: usize, to: usize) -> MonomialElement {
        (from..=to).fold(MonomialElement::identity(self.r, self.n), |acc, j| {
            &acc * &self.b(j)
        })
    }

    pub fn root(&self, k: u32) -> C64 {
        self.roots[(k % self.r) as usize]
    }

    /// `n! r^n`, saturating at `u128::MAX`.
    pub fn group_order(r: u32, n: usize) -> u128 {
        (1..=n as u128)
            .chain(std::iter::repeat(r as u128).take(n))
            .try_fold(1u128, |acc, x| acc.checked_mul(x))
            .unwrap_or(u128::MAX)
    }

    fn check(&self, g: &MonomialElement) -> Result<()> {
        if g.r != self.r || g.n() != self.n {
            return Err(Error::Mismatch(format!(
                "element of G({},1,{}) in G({},1,{})",
                g.r,
                g.n(),
                self.r,
                self.n
            )));
        }
        Ok(())
    }

    /// Membership in the `k`-th subgroup of the standard chain (`0..=2n-1`).
    pub fn in_chain_subgroup(&self, g: &MonomialElement, k: usize) -> bool {
        if k == 0 {
            return g.is_identity();
        }
        let l = k.div_ceil(2); // G_{2l-1} or G_{2l}
        let moves = (l..self.n).any(|i| g.sigma[i] != i);
        let phase_limit = if k % 2 == 1 { l } else { l + 1 };
        let phases = (phase_limit..self.n).any(|i| g.k[i] != 0);
        !moves && !phases
    }

    pub fn factorize(&self, g: &MonomialElement) -> Result<CanonicalForm> {
        self.check(g)?;
        let digits = peel(self, &self.chain, g);
        Ok(CanonicalForm::from_stage_digits(self.r, self.n, &digits))
    }

    pub fn compose_form(&self, form: &CanonicalForm) -> Result<MonomialElement> {
        form.validate(self.r, self.n)?;
        let digits = form.stage_digits();
        Ok(self.chain.compose_digits(self, &digits))
    }

    /// The standard chain, see [`table1_chain`].
    pub fn chain(&self) -> &SubgroupChain<MonomialElement> {
        &self.chain
    }

    pub fn index_to_element(&self, i: u128) -> Result<MonomialElement> {
        let order = self.order();
        if i >= order {
            return Err(Error::IndexOutOfRange { index: i, order });
        }
        let form = CanonicalForm::from_index(self.r, self.n, i);
        self.compose_form(&form)
    }

    pub fn element_to_index(&self, g: &MonomialElement) -> Result<u128> {
        Ok(self.factorize(g)?.to_index(self.r))
    }
}

fn peel(group: &Gr1n, chain: &SubgroupChain<MonomialElement>, g: &MonomialElement) -> Vec<usize> {
    let m = chain.len();
    let mut digits = vec![0; m];
    let mut rest = g.clone();
    for k in (1..=m).rev() {
        let (d, next) = chain
            .leaders(k)
            .iter()
            .enumerate()
            .map(|(d, c)| (d, &c.inverse() * &rest))
            .find(|(_, x)| group.in_chain_subgroup(x, k - 1))
            .expect("leaders form a transversal");
        digits[k - 1] = d;
        rest = next;
    }
    digits
}

impl GroupAction for Gr1n {
    type Elem = MonomialElement;

    fn dim(&self) -> usize {
        self.n
    }

    fn identity(&self) -> MonomialElement {
        MonomialElement::identity(self.r, self.n)
    }

    fn compose(&self, a: &MonomialElement, b: &MonomialElement) -> MonomialElement {
        a * b
    }

    fn inverse(&self, a: &MonomialElement) -> MonomialElement {
        a.inverse()
    }

    #[inline]
    fn act_into(&self, a: &MonomialElement, v: &[C64], out: &mut [C64]) {
        for i in 0..self.n {
            out[i] = self.roots[a.k[i] as usize] * v[a.sigma[i]];
        }
    }

    fn order(&self) -> u128 {
        Self::group_order(self.r, self.n)
    }

    /// Elements in message-index order.
    fn elements(&self) -> Result<Vec<MonomialElement>> {
        let order = self.order();
        if order > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                order,
                limit: ENUMERATION_LIMIT,
            });
        }
        let chain = &self.chain;
        Ok((0..order)
            .map(|i| {
                let form = CanonicalForm::from_index(self.r, self.n, i);
                chain.compose_digits(self, &form.stage_digits())
            })
            .collect())
    }

    fn label(&self, a: &MonomialElement) -> String {
        a.to_string()
    }

    fn parse_label(&self, s: &str) -> Option<MonomialElement> {
        s.parse::<MonomialElement>()
            .ok()
            .filter(|g| g.r == self.r && g.n() == self.n)
    }

    fn to_matrix(&self, a: &MonomialElement) -> CMatrix {
        a.to_matrix()
    }
}

/// `g = tau_{l_n} a_n^{k_n} ... tau_{l_2} a_2^{k_2} a_1^{k_1}` where
/// `tau_l` is the cycle `(l ... j)` and `l_j = j` means no cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub exponents: Vec<u32>,
    /// `l_2 .. l_n`, each in `1..=j`.
    pub cycles: Vec<usize>,
}

impl CanonicalForm {
    pub fn identity(n: usize) -> Self {
        CanonicalForm {
            exponents: vec![0; n],
            cycles: (2..=n).collect(),
        }
    }

    fn validate(&self, r: u32, n: usize) -> Result<()> {
        if self.exponents.len() != n || self.cycles.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.exponents.len(),
            });
        }
        if self.exponents.iter().any(|&k| k >= r) {
            return Err(Error::InvalidParameter("exponent out of range".into()));
        }
        for (i, &l) in self.cycles.iter().enumerate() {
            let j = i + 2;
            if l < 1 || l > j {
                return Err(Error::InvalidParameter(format!("l_{j} = {l} out of range")));
            }
        }
        Ok(())
    }

    /// Leader positions per chain stage (stage 1 first).
    pub fn stage_digits(&self) -> Vec<usize> {
        let n = self.exponents.len();
        let mut d = Vec::with_capacity(2 * n - 1);
        d.push(self.exponents[0] as usize);
        for j in 2..=n {
            d.push(self.exponents[j - 1] as usize);
            d.push(j - self.cycles[j - 2]);
        }
        d
    }

    pub fn from_stage_digits(_r: u32, n: usize, digits: &[usize]) -> Self {
        let mut exponents = vec![digits[0] as u32];
        let mut cycles = Vec::with_capacity(n.saturating_sub(1));
        for j in 2..=n {
            exponents.push(digits[2 * j - 3] as u32);
            cycles.push(j - digits[2 * j - 2]);
        }
        CanonicalForm { exponents, cycles }
    }

    /// Mixed radix: `k_1` least significant, then `k_2..k_n`, then the
    /// cycle lengths `j - l_j` for `j = 2..n`.
    pub fn to_index(&self, r: u32) -> u128 {
        let n = self.exponents.len();
        let mut idx: u128 = 0;
        let mut place: u128 = 1;
        for &k in &self.exponents {
            idx += k as u128 * place;
            place *= r as u128;
        }
        for j in 2..=n {
            idx += (j - self.cycles[j - 2]) as u128 * place;
            place *= j as u128;
        }
        idx
    }

    pub fn from_index(r: u32, n: usize, mut i: u128) -> Self {
        let mut exponents = Vec::with_capacity(n);
        for _ in 0..n {
            exponents.push((i % r as u128) as u32);
            i /= r as u128;
        }
        let mut cycles = Vec::with_capacity(n.saturating_sub(1));
        for j in 2..=n {
            let d = (i % j as u128) as usize;
            i /= j as u128;
            cycles.push(j - d);
        }
        CanonicalForm { exponents, cycles }
    }
}

/// The standard chain of `G(r,1,n)` with `2n - 1` stages.
///
/// Odd stage `2l+1` has leaders `I, b_l, b_{l-1} b_l, ..., b_1 ... b_l`
/// (increasing cycle length); even stage `2l` has the powers of `a_{l+1}`.
pub fn table1_chain(r: u32, n: usize) -> Result<SubgroupChain<MonomialElement>> {
    if r < 2 || n < 1 {
        return Err(Error::InvalidParameter(format!("G({r},1,{n})")));
    }
    let a = |i: usize| MonomialElement::phase(r, n, i - 1, 1);
    let b = |j: usize| MonomialElement::transposition(r, n, j - 1);
    let id = MonomialElement::identity(r, n);
    let cycle = |from: usize, to: usize| (from..=to).fold(id.clone(), |acc, j| &acc * &b(j));
    let powers = |slot: usize| -> Vec<MonomialElement> {
        (0..r)
            .map(|p| MonomialElement::phase(r, n, slot - 1, p))
            .collect()
    };
    let odd_gens = |l: usize| -> Vec<MonomialElement> {
        // X_{2l-1} = {a_1, b_1 .. b_{l-1}}
        let mut x = vec![a(1)];
        x.extend((1..l).map(b));
        x
    };
    let mut stages = vec![Stage {
        leaders: powers(1),
        generators: odd_gens(1),
    }];
    for l in 1..n {
        let mut even = odd_gens(l);
        even.push(a(l + 1));
        stages.push(Stage {
            leaders: powers(l + 1),
            generators: even,
        });
        let mut cycles = vec![id.clone()];
        cycles.extend((1..=l).rev().map(|j| cycle(j, l)));
        stages.push(Stage {
            leaders: cycles,
            generators: odd_gens(l + 1),
        });
    }
    SubgroupChain::new(stages)
}
