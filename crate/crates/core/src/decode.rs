//! Decoders: greedy subgroup decoding along a chain, the sorting decoder for
//! `G(r,1,n)`, a brute-force nearest-codeword oracle, and the generator-step
//! decoder driven by a progress threshold.
//!
//! Every decoder counts distance evaluations (or scalar comparisons for the
//! sorting decoder) in the returned result; nothing is shared between calls.

use std::collections::HashSet;

use serde::Serialize;

use crate::chain::SubgroupChain;
use crate::code::Code;
use crate::error::{Error, Result};
use crate::gr1n::{Gr1n, MonomialElement};
use crate::graph::{build_graph, SpanningTree};
use crate::group::{check_dim, GroupAction};
use crate::numerics::{c64, dist, CVector, C64, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeResult<E> {
    /// Chosen leader position per stage, stage 1 first.
    pub digits: Vec<usize>,
    /// `d_1 .. d_m`.
    pub leaders: Vec<E>,
    /// `d_m ... d_1`.
    pub element: E,
    pub comparisons: u64,
    /// Stages where another leader came within tolerance of the chosen one.
    pub ties: u32,
    /// Distance to `x0` after each stage (empty when not recorded).
    pub trajectory: Vec<f64>,
}

pub trait Decoder: Sync {
    type Elem: Clone + Eq + std::hash::Hash + std::fmt::Debug + Send + Sync;

    fn decode(&self, r: &CVector) -> Result<DecodeResult<Self::Elem>>;
}

/// How a stage picks its leader.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum StageSearch {
    /// Evaluate every leader; first minimizer in stored order wins.
    #[default]
    Exhaustive,
    /// Walk down the stage's spanning tree from `I` while the distance drops.
    TreeDescent,
}

pub struct SubgroupDecoder<'a, A: GroupAction> {
    action: &'a A,
    chain: &'a SubgroupChain<A::Elem>,
    x0: CVector,
    tol: f64,
    search: StageSearch,
    trees: Vec<SpanningTree>,
}

impl<'a, A: GroupAction> SubgroupDecoder<'a, A> {
    pub fn new(action: &'a A, chain: &'a SubgroupChain<A::Elem>, x0: &CVector) -> Result<Self> {
        check_dim(action, x0)?;
        chain.validate(action)?;
        Ok(SubgroupDecoder {
            action,
            chain,
            x0: x0.clone(),
            tol: DEFAULT_TOL,
            search: StageSearch::Exhaustive,
            trees: Vec::new(),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_search(mut self, search: StageSearch) -> Self {
        if search == StageSearch::TreeDescent && self.trees.is_empty() {
            self.trees = self
                .chain
                .stages()
                .iter()
                .map(|s| build_graph(self.action, &s.leaders, &s.generators).spanning_tree())
                .collect();
        }
        self.search = search;
        self
    }

    pub fn chain(&self) -> &SubgroupChain<A::Elem> {
        self.chain
    }

    fn stage_exhaustive(
        &self,
        leaders: &[A::Elem],
        y: &[C64],
        scratch: &mut [C64],
        dists: &mut Vec<f64>,
    ) -> (usize, f64, bool) {
        dists.clear();
        for a in leaders {
            self.action.act_into(a, y, scratch);
            dists.push(dist(scratch, self.x0.as_slice()));
        }
        let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        let pick = dists.iter().position(|&d| d <= min + self.tol).unwrap_or(0);
        let tied = dists
            .iter()
            .enumerate()
            .any(|(i, &d)| i != pick && d <= min + self.tol);
        (pick, dists[pick], tied)
    }

    fn stage_descent(
        &self,
        leaders: &[A::Elem],
        tree: &SpanningTree,
        y: &[C64],
        scratch: &mut [C64],
        comparisons: &mut u64,
    ) -> (usize, f64, bool) {
        let mut at = 0;
        self.action.act_into(&leaders[0], y, scratch);
        let mut cur = dist(scratch, self.x0.as_slice());
        *comparisons += 1;
        let mut tied = false;
        loop {
            let mut best: Option<(usize, f64)> = None;
            for &c in &tree.children[at] {
                self.action.act_into(&leaders[c], y, scratch);
                let d = dist(scratch, self.x0.as_slice());
                *comparisons += 1;
                if best.map_or(true, |(_, b)| d < b - self.tol) {
                    best = Some((c, d));
                }
            }
            match best {
                Some((c, d)) if d < cur - self.tol => {
                    at = c;
                    cur = d;
                }
                Some((_, d)) => {
                    tied |= d <= cur + self.tol;
                    break;
                }
                None => break,
            }
        }
        (at, cur, tied)
    }
}

impl<A: GroupAction> Decoder for SubgroupDecoder<'_, A> {
    type Elem = A::Elem;

    fn decode(&self, r: &CVector) -> Result<DecodeResult<A::Elem>> {
        check_dim(self.action, r)?;
        let m = self.chain.len();
        let mut y = r.as_slice().to_vec();
        let mut scratch = vec![c64(0.0, 0.0); y.len()];
        let mut dists = Vec::new();
        let mut digits = Vec::with_capacity(m);
        let mut leaders = Vec::with_capacity(m);
        let mut trajectory = Vec::with_capacity(m);
        let mut comparisons = 0u64;
        let mut ties = 0u32;
        for (k, stage) in self.chain.stages().iter().enumerate() {
            let (pick, d, tied) = match self.search {
                StageSearch::Exhaustive => {
                    comparisons += stage.leaders.len() as u64;
                    self.stage_exhaustive(&stage.leaders, &y, &mut scratch, &mut dists)
                }
                StageSearch::TreeDescent => self.stage_descent(
                    &stage.leaders,
                    &self.trees[k],
                    &y,
                    &mut scratch,
                    &mut comparisons,
                ),
            };
            let lead = &stage.leaders[pick];
            self.action.act_into(lead, &y, &mut scratch);
            y.copy_from_slice(&scratch);
            digits.push(pick);
            leaders.push(lead.clone());
            trajectory.push(d);
            ties += tied as u32;
        }
        let element = self.chain.compose_digits(self.action, &digits);
        Ok(DecodeResult {
            digits,
            leaders,
            element,
            comparisons,
            ties,
            trajectory,
        })
    }
}

/// Greedy decode of `r` along `chain`, exhaustive per stage.
pub fn subgroup_decode<A: GroupAction>(
    action: &A,
    r: &CVector,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
) -> Result<DecodeResult<A::Elem>> {
    SubgroupDecoder::new(action, chain, x0)?.decode(r)
}

/// Phase rounding plus insertion sort for `G(r,1,n)` with a positive,
/// strictly increasing real initial vector. Produces the same element as the
/// exhaustive decoder on the standard chain.
///
/// Comparisons: one per phase rounding and one per key inspected during
/// insertion.
pub struct FastGr1nDecoder<'a> {
    group: &'a Gr1n,
}

const HALF_TIE: f64 = 1e-12;

impl<'a> FastGr1nDecoder<'a> {
    pub fn new(group: &'a Gr1n, x0: &CVector) -> Result<Self> {
        check_dim(group, x0)?;
        let mut prev = 0.0;
        for (i, z) in x0.iter().enumerate() {
            if z.im.abs() > DEFAULT_TOL || z.re <= prev {
                return Err(Error::InvalidParameter(format!(
                    "initial vector must be positive, real and strictly increasing (entry {i})"
                )));
            }
            prev = z.re;
        }
        Ok(FastGr1nDecoder { group })
    }

    /// Exponent `k` maximizing `Re(xi^k z)`; half-way ties take the smaller
    /// exponent.
    pub fn phase_exponent(r: u32, z: C64) -> u32 {
        let t = -(r as f64) * z.arg() / std::f64::consts::TAU;
        let f = t.floor();
        let k = if (t - f - 0.5).abs() < HALF_TIE {
            let lo = (f as i64).rem_euclid(r as i64);
            let hi = (f as i64 + 1).rem_euclid(r as i64);
            lo.min(hi)
        } else {
            (t.round() as i64).rem_euclid(r as i64)
        };
        k as u32
    }

    /// Stage digits and comparison count without building the element.
    pub fn digits(&self, r: &CVector) -> Result<(Vec<usize>, u64)> {
        check_dim(self.group, r)?;
        let rr = self.group.r();
        let n = self.group.n();
        let mut keys: Vec<f64> = Vec::with_capacity(n);
        let mut digits = Vec::with_capacity(2 * n - 1);
        let mut comparisons = 0u64;
        for l in 0..n {
            let z = r[l];
            let k = Self::phase_exponent(rr, z);
            comparisons += 1;
            digits.push(k as usize);
            let v = (self.group.root(k) * z).re;
            if l == 0 {
                keys.push(v);
                continue;
            }
            // scan from the right; equal keys stay put (shortest cycle)
            let mut j = l;
            while j > 0 {
                comparisons += 1;
                if v < keys[j - 1] {
                    j -= 1;
                } else {
                    break;
                }
            }
            keys.insert(j, v);
            digits.push(l - j);
        }
        Ok((digits, comparisons))
    }
}

impl Decoder for FastGr1nDecoder<'_> {
    type Elem = MonomialElement;

    fn decode(&self, r: &CVector) -> Result<DecodeResult<MonomialElement>> {
        let (digits, comparisons) = self.digits(r)?;
        let chain = self.group.chain();
        let leaders = digits
            .iter()
            .enumerate()
            .map(|(k, &d)| chain.leaders(k + 1)[d].clone())
            .collect();
        let element = chain.compose_digits(self.group, &digits);
        Ok(DecodeResult {
            digits,
            leaders,
            element,
            comparisons,
            ties: 0,
            trajectory: Vec::new(),
        })
    }
}

pub fn fast_gr1n_decode(
    group: &Gr1n,
    r: &CVector,
    x0: &CVector,
) -> Result<DecodeResult<MonomialElement>> {
    FastGr1nDecoder::new(group, x0)?.decode(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MlOutcome<E> {
    /// All minimizers share one codeword; `coset` lists them.
    Unique {
        element: E,
        coset: Vec<E>,
        distance: f64,
    },
    /// Minimizers within tolerance give different codewords.
    Tie { candidates: Vec<E>, distance: f64 },
}

impl<E> MlOutcome<E> {
    pub fn unique(&self) -> Option<&E> {
        match self {
            MlOutcome::Unique { element, .. } => Some(element),
            MlOutcome::Tie { .. } => None,
        }
    }
}

/// Global argmin of `||a r - x0||` over the whole group.
pub fn ml_decode<A: GroupAction>(r: &CVector, code: &Code<A>) -> Result<MlOutcome<A::Elem>> {
    let action = code.action();
    check_dim(action, r)?;
    let x0 = code.x0().as_slice();
    let mut scratch = vec![c64(0.0, 0.0); action.dim()];
    let d: Vec<f64> = code
        .elements()
        .iter()
        .map(|a| {
            action.act_into(a, r.as_slice(), &mut scratch);
            dist(&scratch, x0)
        })
        .collect();
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = code.tol();
    let mins: Vec<A::Elem> = code
        .elements()
        .iter()
        .zip(&d)
        .filter(|(_, &x)| x <= min + tol)
        .map(|(a, _)| a.clone())
        .collect();
    let first = mins[0].clone();
    if mins.iter().all(|a| code.same_codeword(a, &first)) {
        Ok(MlOutcome::Unique {
            element: first,
            coset: mins,
            distance: min,
        })
    } else {
        Ok(MlOutcome::Tie {
            candidates: mins,
            distance: min,
        })
    }
}

/// `X` followed by the inverses not already present.
pub fn step_set<A: GroupAction>(action: &A, x: &[A::Elem]) -> Vec<A::Elem> {
    let mut out: Vec<A::Elem> = Vec::with_capacity(2 * x.len());
    let mut seen = HashSet::new();
    for g in x {
        if seen.insert(g.clone()) {
            out.push(g.clone());
        }
    }
    for g in x {
        let gi = action.inverse(g);
        if seen.insert(gi.clone()) {
            out.push(gi);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Largest improvement.
    A,
    /// First sufficient improvement.
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveResult<E> {
    /// `c_1 .. c_k`.
    pub steps: Vec<E>,
    /// `c_k ... c_1`.
    pub element: E,
    pub step_count: usize,
    /// Final distance below `delta/3`, i.e. the received vector was within
    /// `delta/3` of the decoded codeword.
    pub within_threshold: bool,
}

pub struct PrimitiveDecoder<'a, A: GroupAction> {
    action: &'a A,
    steps: Vec<A::Elem>,
    x0: CVector,
    delta: f64,
    variant: Variant,
}

impl<'a, A: GroupAction> PrimitiveDecoder<'a, A> {
    /// `x` is expanded to `x ∪ x^-1`.
    pub fn new(
        action: &'a A,
        x: &[A::Elem],
        x0: &CVector,
        delta: f64,
        variant: Variant,
    ) -> Result<Self> {
        check_dim(action, x0)?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        if x.is_empty() {
            return Err(Error::Empty("generator set"));
        }
        Ok(PrimitiveDecoder {
            action,
            steps: step_set(action, x),
            x0: x0.clone(),
            delta,
            variant,
        })
    }

    /// `floor(6/delta)`.
    pub fn step_bound(&self) -> usize {
        (6.0 / self.delta).floor() as usize
    }

    pub fn decode_primitive(&self, r: &CVector) -> Result<PrimitiveResult<A::Elem>> {
        check_dim(self.action, r)?;
        let x0 = self.x0.as_slice();
        let gap = self.delta / 3.0;
        let limit = self.step_bound() + 1;
        let mut y = r.as_slice().to_vec();
        let mut scratch = vec![c64(0.0, 0.0); y.len()];
        let mut best_vec = y.clone();
        let mut cur = dist(&y, x0);
        let mut chosen = Vec::new();
        loop {
            let mut pick: Option<(usize, f64)> = None;
            for (i, c) in self.steps.iter().enumerate() {
                self.action.act_into(c, &y, &mut scratch);
                let d = dist(&scratch, x0);
                match self.variant {
                    Variant::A => {
                        if pick.map_or(true, |(_, b)| d < b) {
                            pick = Some((i, d));
                            best_vec.copy_from_slice(&scratch);
                        }
                    }
                    Variant::B => {
                        if d < cur - gap {
                            pick = Some((i, d));
                            best_vec.copy_from_slice(&scratch);
                            break;
                        }
                    }
                }
            }
            match pick {
                Some((i, d)) if d < cur - gap => {
                    if chosen.len() == limit {
                        return Err(Error::StepLimit { steps: limit });
                    }
                    chosen.push(self.steps[i].clone());
                    y.copy_from_slice(&best_vec);
                    cur = d;
                }
                _ => break,
            }
        }
        let element = chosen.iter().fold(self.action.identity(), |acc, c| {
            self.action.compose(c, &acc)
        });
        Ok(PrimitiveResult {
            step_count: chosen.len(),
            steps: chosen,
            element,
            within_threshold: cur < gap,
        })
    }
}

pub fn primitive_decode<A: GroupAction>(
    action: &A,
    r: &CVector,
    x: &[A::Elem],
    x0: &CVector,
    delta: f64,
    variant: Variant,
) -> Result<PrimitiveResult<A::Elem>> {
    PrimitiveDecoder::new(action, x, x0, delta, variant)?.decode_primitive(r)
}

/// A nontrivial codeword that no step moves strictly closer to `x0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DaggerViolation<E> {
    /// Some `g` with codeword `g^-1 x0`.
    pub element: E,
    pub codeword: CVector,
}

/// Smallest gain `||w - x0|| - ||c w - x0||` over nontrivial codewords `w`
/// and their best steps `c` (from `x ∪ x^-1 ∪ {I}`), or the first codeword
/// whose best step is `I`.
pub fn compute_delta_primitive<A: GroupAction>(
    code: &Code<A>,
    x: &[A::Elem],
) -> Result<std::result::Result<f64, DaggerViolation<A::Elem>>> {
    let action = code.action();
    let steps = step_set(action, x);
    let x0 = code.x0().as_slice();
    let tol = code.tol();
    let mut scratch = vec![c64(0.0, 0.0); action.dim()];
    let mut delta = f64::INFINITY;
    for (i, g) in code.elements().iter().enumerate() {
        let w = code.codeword(i).as_slice();
        let here = dist(w, x0);
        if here <= tol {
            continue;
        }
        let best = steps
            .iter()
            .map(|c| {
                action.act_into(c, w, &mut scratch);
                dist(&scratch, x0)
            })
            .fold(f64::INFINITY, f64::min);
        // I is a minimizer: no strict progress
        if here <= best + tol {
            return Ok(Err(DaggerViolation {
                element: g.clone(),
                codeword: code.codeword(i).clone(),
            }));
        }
        delta = delta.min(here - best);
    }
    if delta.is_infinite() {
        // orbit is {x0}: nothing to improve, any step size works
        return Ok(Ok(2.0));
    }
    Ok(Ok(delta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaViolation<E> {
    /// Stage `k` (1-based).
    pub stage: usize,
    /// `c_m ... c_{k+1}`.
    pub induced: E,
    pub h: E,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport<E> {
    /// `min_k delta_k`, or 0 with a violation.
    pub delta: f64,
    /// `delta_1 .. delta_m`.
    pub per_stage: Vec<f64>,
    pub violation: Option<DeltaViolation<E>>,
}

/// Noise radius (`delta/2`) under which the chain decodes correctly, built
/// from the induced leaders `C = c_m ... c_{k+1}` and `h in G_k - G_{k-1}`
/// as `min ||C h x0 - x0|| - ||C x0 - x0||`; the top stage uses `d_min`.
pub fn compute_delta_thm63<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<DeltaReport<A::Elem>> {
    check_dim(action, x0)?;
    let m = chain.len();
    let x = x0.as_slice();
    let mut scratch = vec![c64(0.0, 0.0); action.dim()];
    let mut disp = |a: &A::Elem| {
        action.act_into(a, x, &mut scratch);
        dist(&scratch, x)
    };
    let mut per_stage = Vec::with_capacity(m);
    let mut violation = None;
    let mut below = chain.subgroup(action, 0)?;
    for k in 1..m {
        let gk = chain.subgroup(action, k)?;
        let fresh: Vec<&A::Elem> = gk
            .elements()
            .iter()
            .filter(|h| !below.contains(h))
            .collect();
        let induced = chain.induced_leaders(action, k, m)?;
        let mut dk = f64::INFINITY;
        for c in &induced {
            let base = disp(c);
            for h in &fresh {
                let ch = action.compose(c, h);
                let gain = disp(&ch) - base;
                if gain < dk {
                    dk = gain;
                    if gain <= tol && violation.is_none() {
                        violation = Some(DeltaViolation {
                            stage: k,
                            induced: c.clone(),
                            h: (*h).clone(),
                            gain,
                        });
                    }
                }
            }
        }
        per_stage.push(dk);
        below = gk;
    }
    let all = chain.subgroup(action, m)?;
    let dmin = all
        .elements()
        .iter()
        .map(&mut disp)
        .filter(|&d| d > tol)
        .fold(f64::INFINITY, f64::min);
    per_stage.push(dmin);
    let delta = if violation.is_some() {
        0.0
    } else {
        per_stage.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(DeltaReport {
        delta,
        per_stage,
        violation,
    })
}

/// Mean comparisons of the sorting decoder when every coordinate order is
/// equally likely: one per phase plus the right-to-left insertion scans.
pub fn expected_sort_comparisons(n: usize) -> f64 {
    n as f64
        + (2..=n)
            .map(|l| (l - 1) as f64 / 2.0 + 1.0 - 1.0 / l as f64)
            .sum::<f64>()
}

/// `n + log2(n!)`.
pub fn comparison_lower_bound(n: usize) -> f64 {
    n as f64 + (2..=n).map(|k| (k as f64).log2()).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub measured: f64,
    pub expected: f64,
    pub lower_bound: f64,
    pub trials: u64,
}

/// Average comparisons of [`FastGr1nDecoder`] on uniform unit vectors, one
/// `ChaCha8Rng` per trial seeded with `seed ^ trial`.
pub fn measure_comparisons(
    r: u32,
    n: usize,
    trials: u64,
    seed: u64,
    exec: crate::par::Execution,
) -> Result<ComparisonRow> {
    use rand::SeedableRng;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let g = Gr1n::new(r, n)?;
    let x0 = crate::code::standard_initial_vector(r, n)?;
    let dec = FastGr1nDecoder::new(&g, &x0)?;
    let total = exec.map_reduce(
        trials,
        || 0u64,
        |acc, t| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ t);
            let y = crate::code::random_direction(n, &mut rng);
            *acc += dec.digits(&y).expect("dimension checked").1;
        },
        |a, b| a + b,
    );
    Ok(ComparisonRow {
        n,
        measured: total as f64 / trials as f64,
        expected: expected_sort_comparisons(n),
        lower_bound: comparison_lower_bound(n),
        trials,
    })
}

pub fn comparison_table_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("n,gamma_measured,gamma_expected,n_plus_log2_n_factorial,trials\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{}\n",
            r.n, r.measured, r.expected, r.lower_bound, r.trials
        ));
    }
    s
}
