//! Partial codes over `G(r,1,n)`: only elements whose canonical exponents
//! satisfy `m_j | k_j` are used as messages. The message set is not a
//! subgroup; decoding restricts the phase stages to the allowed exponents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{Stage, SubgroupChain};
use crate::code::random_direction;
use crate::decode::{DecodeResult, Decoder, SubgroupDecoder};
use crate::error::{Error, Result};
use crate::gr1n::{CanonicalForm, Gr1n, MonomialElement};
use crate::group::{check_dim, GroupAction};
use crate::numerics::{c64, dist, CVector};
use crate::par::Execution;

/// Largest message set the pairwise distance scan accepts.
pub const PAIRWISE_LIMIT: u128 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialCodeSpec {
    pub r: u32,
    pub n: usize,
    /// `m_1 .. m_n`.
    pub m: Vec<u32>,
}

impl PartialCodeSpec {
    /// Requires `m_n = 1`, `m_{j+1} | m_j` and `m_1 | r`.
    pub fn new(r: u32, n: usize, m: Vec<u32>) -> Result<Self> {
        let s = PartialCodeSpec { r, n, m };
        s.validate()?;
        Ok(s)
    }

    pub fn full(r: u32, n: usize) -> Self {
        PartialCodeSpec {
            r,
            n,
            m: vec![1; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.r < 2 || self.n < 1 {
            return bad(format!("G({},1,{})", self.r, self.n));
        }
        if self.m.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.m.len(),
            });
        }
        if self.m.contains(&0) {
            return bad("divisors must be positive".into());
        }
        if self.m[self.n - 1] != 1 {
            return bad("m_n must be 1".into());
        }
        for j in 0..self.n - 1 {
            if self.m[j] % self.m[j + 1] != 0 {
                return bad(format!("m_{} does not divide m_{}", j + 2, j + 1));
            }
        }
        if self.r % self.m[0] != 0 {
            return bad("m_1 does not divide r".into());
        }
        Ok(())
    }
}

/// `n! r^n / prod m_j`.
pub fn partial_size(spec: &PartialCodeSpec) -> Result<u128> {
    spec.validate()?;
    let full = Gr1n::group_order(spec.r, spec.n);
    if full == u128::MAX {
        return Err(Error::TooLarge {
            order: full,
            limit: u128::MAX,
        });
    }
    Ok(full / spec.m.iter().map(|&m| m as u128).product::<u128>())
}

pub fn form_allowed(spec: &PartialCodeSpec, form: &CanonicalForm) -> bool {
    form.exponents
        .iter()
        .zip(&spec.m)
        .all(|(&k, &m)| k % m == 0)
}

pub fn partial_contains(group: &Gr1n, g: &MonomialElement, spec: &PartialCodeSpec) -> Result<bool> {
    Ok(form_allowed(spec, &group.factorize(g)?))
}

/// Standard chain with each phase stage cut down to the powers `a_j^p`,
/// `m_j | p`.
pub fn restricted_chain(spec: &PartialCodeSpec) -> Result<SubgroupChain<MonomialElement>> {
    spec.validate()?;
    let full = crate::gr1n::table1_chain(spec.r, spec.n)?;
    let stages = full
        .stages()
        .iter()
        .enumerate()
        .map(|(k, s)| match phase_slot(k) {
            Some(j) => Stage {
                leaders: s
                    .leaders
                    .iter()
                    .step_by(spec.m[j] as usize)
                    .cloned()
                    .collect(),
                generators: s.generators.clone(),
            },
            None => s.clone(),
        })
        .collect();
    SubgroupChain::new(stages)
}

/// Slot (0-based) of a phase stage, for 0-based stage index `k`.
fn phase_slot(k: usize) -> Option<usize> {
    match k {
        0 => Some(0),
        k if k % 2 == 1 => Some(k.div_ceil(2)),
        _ => None,
    }
}

/// Greedy decoder over the restricted chain. Digits are reported in
/// full-chain positions, so they are the canonical stage digits.
pub struct PartialDecoder {
    group: Gr1n,
    spec: PartialCodeSpec,
    chain: SubgroupChain<MonomialElement>,
    x0: CVector,
}

impl PartialDecoder {
    pub fn new(spec: &PartialCodeSpec, x0: &CVector) -> Result<Self> {
        let group = Gr1n::new(spec.r, spec.n)?;
        check_dim(&group, x0)?;
        Ok(PartialDecoder {
            chain: restricted_chain(spec)?,
            group,
            spec: spec.clone(),
            x0: x0.clone(),
        })
    }

    pub fn group(&self) -> &Gr1n {
        &self.group
    }

    pub fn spec(&self) -> &PartialCodeSpec {
        &self.spec
    }
}

impl Decoder for PartialDecoder {
    type Elem = MonomialElement;

    fn decode(&self, r: &CVector) -> Result<DecodeResult<MonomialElement>> {
        let mut res = SubgroupDecoder::new(&self.group, &self.chain, &self.x0)?.decode(r)?;
        for (k, d) in res.digits.iter_mut().enumerate() {
            if let Some(j) = phase_slot(k) {
                *d *= self.spec.m[j] as usize;
            }
        }
        Ok(res)
    }
}

pub fn partial_decode(
    r: &CVector,
    spec: &PartialCodeSpec,
    x0: &CVector,
) -> Result<DecodeResult<MonomialElement>> {
    PartialDecoder::new(spec, x0)?.decode(r)
}

/// All members of the message set, in message-index order of the full group.
pub fn partial_elements(spec: &PartialCodeSpec) -> Result<Vec<MonomialElement>> {
    let size = partial_size(spec)?;
    if size > crate::group::ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            order: size,
            limit: crate::group::ENUMERATION_LIMIT,
        });
    }
    let g = Gr1n::new(spec.r, spec.n)?;
    let mut out = Vec::with_capacity(size as usize);
    for i in 0..g.order() {
        let form = CanonicalForm::from_index(spec.r, spec.n, i);
        if form_allowed(spec, &form) {
            out.push(g.compose_form(&form)?);
        }
    }
    Ok(out)
}

/// Minimum distance between distinct codewords `g^-1 x0` of the message set.
pub fn partial_dmin_exhaustive(spec: &PartialCodeSpec, x0: &CVector) -> Result<f64> {
    let size = partial_size(spec)?;
    if size > PAIRWISE_LIMIT {
        return Err(Error::TooLarge {
            order: size,
            limit: PAIRWISE_LIMIT,
        });
    }
    let g = Gr1n::new(spec.r, spec.n)?;
    check_dim(&g, x0)?;
    let words: Vec<CVector> = partial_elements(spec)?
        .iter()
        .map(|e| g.act(&e.inverse(), x0))
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = dist(words[i].as_slice(), words[j].as_slice());
            if d > 1e-12 {
                best = best.min(d);
            }
        }
    }
    Ok(best)
}

/// Nearest member of the message set, or `None` on a tie.
pub fn nearest_partial_codeword(
    group: &Gr1n,
    elements: &[MonomialElement],
    r: &CVector,
    x0: &CVector,
    tol: f64,
) -> Option<MonomialElement> {
    let mut scratch = vec![c64(0.0, 0.0); group.dim()];
    let mut best: Option<(usize, f64)> = None;
    let mut tie = false;
    for (i, e) in elements.iter().enumerate() {
        group.act_into(e, r.as_slice(), &mut scratch);
        let d = dist(&scratch, x0.as_slice());
        match best {
            Some((_, b)) if d < b - tol => {
                best = Some((i, d));
                tie = false;
            }
            Some((_, b)) if d <= b + tol => tie = true,
            None => best = Some((i, d)),
            _ => {}
        }
    }
    match (best, tie) {
        (Some((i, _)), false) => Some(elements[i].clone()),
        _ => None,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleComparison {
    pub trials: u64,
    /// Trials where the nearest codeword was unique.
    pub unique: u64,
    /// Unique-oracle trials where the greedy decoder disagreed.
    pub disagreements: u64,
}

/// Greedy restricted decoding against the exhaustive nearest-codeword
/// oracle, on messages drawn from the set with noise of norm below `radius`.
pub fn compare_with_oracle(
    spec: &PartialCodeSpec,
    x0: &CVector,
    radius: f64,
    trials: u64,
    seed: u64,
) -> Result<OracleComparison> {
    let dec = PartialDecoder::new(spec, x0)?;
    let elems = partial_elements(spec)?;
    let g = dec.group();
    let mut out = OracleComparison::default();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t);
        let e = &elems[rng.gen_range(0..elems.len())];
        let noise = random_direction(g.dim(), &mut rng).scale(c64(radius * rng.gen::<f64>(), 0.0));
        let r = &g.act(&e.inverse(), x0) + &noise;
        out.trials += 1;
        if let Some(best) = nearest_partial_codeword(g, &elems, &r, x0, 1e-12) {
            out.unique += 1;
            if dec.decode(&r)?.element != best {
                out.disagreements += 1;
            }
        }
    }
    Ok(out)
}

/// How a quoted `beta/alpha` ratio becomes the step of `(1, 1+s, 1+2s, ...)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioConvention {
    /// `s = ratio`.
    Stated,
    /// `s = sqrt(2) * ratio`, so the transposition distance is `2 * ratio`.
    Scaled,
}

impl RatioConvention {
    pub fn step(self, ratio: f64) -> f64 {
        match self {
            RatioConvention::Stated => ratio,
            RatioConvention::Scaled => std::f64::consts::SQRT_2 * ratio,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RatioConvention::Stated => "stated",
            RatioConvention::Scaled => "scaled",
        }
    }
}

/// Unnormalized `(1, 1+s, ..., 1+(n-1)s)`.
pub fn arithmetic_vector(n: usize, step: f64) -> CVector {
    CVector::from_real(&(0..n).map(|i| 1.0 + i as f64 * step).collect::<Vec<_>>())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceEntry {
    pub generator: String,
    pub distance: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceTable {
    pub convention: RatioConvention,
    pub ratio: f64,
    pub step: f64,
    pub entries: Vec<DistanceEntry>,
    pub max_over_min: f64,
    pub min_normalized: f64,
    /// `sqrt(2) s / |x|`, the transposition distance after normalizing.
    pub transposition_normalized: f64,
}

/// Distances `|g x - x|` for `g in {a_k^{m_k}} ∪ {b_j}` on the unnormalized
/// vector `x`, plus the same divided by `|x|`. Powers equal to the identity
/// are left out.
pub fn generator_distance_table(
    spec: &PartialCodeSpec,
    ratio: f64,
    convention: RatioConvention,
) -> Result<DistanceTable> {
    spec.validate()?;
    let g = Gr1n::new(spec.r, spec.n)?;
    let step = convention.step(ratio);
    let x = arithmetic_vector(spec.n, step);
    let norm = x.norm();
    let mut entries = Vec::with_capacity(2 * spec.n - 1);
    let mut push = |name: String, e: &MonomialElement| {
        let d = dist(g.act(e, &x).as_slice(), x.as_slice());
        entries.push(DistanceEntry {
            generator: name,
            distance: d,
            normalized: d / norm,
        });
    };
    for k in 1..=spec.n {
        let m = spec.m[k - 1];
        if m == spec.r {
            // a_k^r is the identity
            continue;
        }
        let name = if m == 1 {
            format!("a{k}")
        } else {
            format!("a{k}^{m}")
        };
        push(name, &g.power(&g.a(k), m as usize));
    }
    for j in 1..spec.n {
        push(format!("b{j}"), &g.b(j));
    }
    let max = entries.iter().map(|e| e.distance).fold(0.0, f64::max);
    let min = entries
        .iter()
        .map(|e| e.distance)
        .fold(f64::INFINITY, f64::min);
    Ok(DistanceTable {
        convention,
        ratio,
        step,
        max_over_min: max / min,
        min_normalized: min / norm,
        transposition_normalized: std::f64::consts::SQRT_2 * step / norm,
        entries,
    })
}

impl DistanceTable {
    /// `generator,distance,normalized` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("convention,generator,distance,normalized\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{:.6},{:.6}\n",
                self.convention.name(),
                e.generator,
                e.distance,
                e.normalized
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: Vec<u32>,
    pub ratio: f64,
    pub size: u128,
    pub max_over_min: f64,
    pub min_normalized: f64,
}

/// Every valid divisor chain for `(r, n)`.
pub fn divisor_chains(r: u32, n: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            let mut m = prefix.clone();
            m.push(1);
            out.push(m);
            return;
        }
        let prev = *prefix.last().expect("seeded");
        for d in 1..=prev {
            if prev % d == 0 {
                prefix.push(d);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    if n == 1 {
        return vec![vec![1]];
    }
    let mut out = Vec::new();
    for m1 in 1..=r {
        if r % m1 == 0 {
            rec(&mut vec![m1], n, &mut out);
        }
    }
    out
}

/// Grid of divisor chains and ratios, one row per cell in grid order.
pub fn sweep(
    r: u32,
    n: usize,
    chains: &[Vec<u32>],
    ratios: &[f64],
    convention: RatioConvention,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let cells = chains.len() * ratios.len();
    exec.map_indexed(cells, |i| {
        let m = &chains[i / ratios.len()];
        let ratio = ratios[i % ratios.len()];
        let spec = PartialCodeSpec::new(r, n, m.clone())?;
        let t = generator_distance_table(&spec, ratio, convention)?;
        Ok(SweepRow {
            m: m.clone(),
            ratio,
            size: partial_size(&spec)?,
            max_over_min: t.max_over_min,
            min_normalized: t.min_normalized,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{standard_initial_vector, Code};

    fn g82() -> PartialCodeSpec {
        PartialCodeSpec::new(8, 2, vec![2, 1]).unwrap()
    }

    #[test]
    fn sizes() {
        let s = PartialCodeSpec::new(16, 4, vec![4, 2, 1, 1]).unwrap();
        assert_eq!(partial_size(&s).unwrap(), 196_608);
        assert_eq!(partial_size(&s).unwrap(), (1 << 13) * 24);
        assert_eq!(partial_size(&PartialCodeSpec::full(5, 3)).unwrap(), 6 * 125);
        assert_eq!(partial_size(&g82()).unwrap(), 64);
    }

    #[test]
    fn invalid_specs() {
        assert!(PartialCodeSpec::new(8, 2, vec![2, 2]).is_err());
        assert!(PartialCodeSpec::new(8, 3, vec![2, 4, 1]).is_err());
        assert!(PartialCodeSpec::new(6, 2, vec![4, 1]).is_err());
        assert!(PartialCodeSpec::new(6, 2, vec![3]).is_err());
    }

    #[test]
    fn membership_and_enumeration() {
        let spec = PartialCodeSpec::new(8, 2, vec![4, 1]).unwrap();
        let g = Gr1n::new(8, 2).unwrap();
        assert!(partial_contains(&g, &g.identity(), &spec).unwrap());
        assert!(!partial_contains(&g, &g.a(1), &spec).unwrap());
        assert!(partial_contains(&g, &g.power(&g.a(1), 4), &spec).unwrap());
        for spec in [
            g82(),
            spec,
            PartialCodeSpec::new(8, 3, vec![4, 2, 1]).unwrap(),
        ] {
            let g = Gr1n::new(spec.r, spec.n).unwrap();
            let filtered = g
                .elements()
                .unwrap()
                .into_iter()
                .filter(|e| partial_contains(&g, e, &spec).unwrap())
                .count() as u128;
            assert_eq!(filtered, partial_size(&spec).unwrap());
            assert_eq!(partial_elements(&spec).unwrap().len() as u128, filtered);
        }
    }

    #[test]
    fn not_a_subgroup() {
        let spec = g82();
        let g = Gr1n::new(8, 2).unwrap();
        let a2 = g.a(2);
        let b1 = g.b(1);
        assert!(partial_contains(&g, &a2, &spec).unwrap());
        assert!(partial_contains(&g, &b1, &spec).unwrap());
        let p = g.compose(&a2, &b1);
        assert_eq!(p, g.compose(&b1, &g.a(1)));
        assert!(!partial_contains(&g, &p, &spec).unwrap());
    }

    #[test]
    fn zero_noise_and_membership_of_output() {
        let spec = g82();
        let x0 = standard_initial_vector(8, 2).unwrap();
        let dec = PartialDecoder::new(&spec, &x0).unwrap();
        let g = dec.group().clone();
        let elems = partial_elements(&spec).unwrap();
        for e in &elems {
            let res = dec.decode(&g.act(&e.inverse(), &x0)).unwrap();
            assert_eq!(&res.element, e);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let r = random_direction(2, &mut rng).scale(c64(rng.gen::<f64>() * 2.0, 0.0));
            let res = dec.decode(&r).unwrap();
            assert!(partial_contains(&g, &res.element, &spec).unwrap());
            let form = g.factorize(&res.element).unwrap();
            assert_eq!(form.stage_digits(), res.digits);
        }
    }

    #[test]
    fn trivial_divisors_match_full_decoder() {
        let spec = PartialCodeSpec::full(4, 3);
        let x0 = standard_initial_vector(4, 3).unwrap();
        let g = Gr1n::new(4, 3).unwrap();
        let dec = PartialDecoder::new(&spec, &x0).unwrap();
        let full = SubgroupDecoder::new(&g, g.chain(), &x0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let r = random_direction(3, &mut rng);
            assert_eq!(dec.decode(&r).unwrap(), full.decode(&r).unwrap());
        }
    }

    #[test]
    fn dmin_grows_with_coarser_divisors() {
        let x0 = standard_initial_vector(8, 2).unwrap();
        let full = Code::new(Gr1n::new(8, 2).unwrap(), x0.clone())
            .unwrap()
            .dmin()
            .unwrap();
        let d_all = partial_dmin_exhaustive(&PartialCodeSpec::full(8, 2), &x0).unwrap();
        assert!((d_all - full).abs() < 1e-12);
        let mut prev = d_all;
        for m1 in [2, 4, 8] {
            let d = partial_dmin_exhaustive(&PartialCodeSpec::new(8, 2, vec![m1, 1]).unwrap(), &x0)
                .unwrap();
            assert!(d >= prev - 1e-12);
            prev = d;
        }
        assert!(partial_dmin_exhaustive(&PartialCodeSpec::full(8, 4), &x0).is_err());
    }

    #[test]
    fn oracle_agreement_small_noise() {
        let spec = g82();
        let x0 = standard_initial_vector(8, 2).unwrap();
        let d = Code::new(Gr1n::new(8, 2).unwrap(), x0.clone())
            .unwrap()
            .dmin()
            .unwrap();
        let c = compare_with_oracle(&spec, &x0, 0.499 * d, 2000, 3).unwrap();
        assert_eq!(c.unique, c.trials);
        assert_eq!(c.disagreements, 0);
        let wide = compare_with_oracle(&spec, &x0, 1.0, 2000, 3).unwrap();
        assert!(wide.unique > 0);
    }

    #[test]
    fn distance_tables() {
        let t = generator_distance_table(
            &PartialCodeSpec::full(16, 4),
            0.2759,
            RatioConvention::Stated,
        )
        .unwrap();
        assert_eq!(t.entries.len(), 7);
        assert!((t.max_over_min - 1.83).abs() < 0.01);
        // a_1 and the transpositions coincide at this ratio
        let beta = crate::code::standard_beta(16);
        let t =
            generator_distance_table(&PartialCodeSpec::full(16, 4), beta, RatioConvention::Stated)
                .unwrap();
        let d = t.entries[0].distance;
        for e in &t.entries[4..] {
            assert!((e.distance - d).abs() < 1e-12);
        }
        assert!((t.transposition_normalized - t.min_normalized).abs() < 1e-12);
        let one =
            generator_distance_table(&PartialCodeSpec::full(5, 1), 0.3, RatioConvention::Stated)
                .unwrap();
        assert_eq!(one.entries.len(), 1);
        assert_eq!(one.max_over_min, 1.0);
        let fixed = generator_distance_table(
            &PartialCodeSpec::new(8, 2, vec![8, 1]).unwrap(),
            1.0,
            RatioConvention::Stated,
        )
        .unwrap();
        assert_eq!(fixed.entries.len(), 2);
        assert!(fixed.max_over_min.is_finite());
    }

    #[test]
    fn divisor_chain_enumeration() {
        let chains = divisor_chains(8, 3);
        assert!(chains
            .iter()
            .all(|m| PartialCodeSpec::new(8, 3, m.clone()).is_ok()));
        // m1 in {1,2,4,8}, m2 | m1
        assert_eq!(chains.len(), 1 + 2 + 3 + 4);
        let rows = sweep(
            8,
            3,
            &chains,
            &[0.5, 1.0],
            RatioConvention::Stated,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(rows.len(), 20);
        let par = sweep(
            8,
            3,
            &chains,
            &[0.5, 1.0],
            RatioConvention::Stated,
            Execution::default(),
        )
        .unwrap();
        assert_eq!(rows, par);
    }
}
