//! Mechanical checks of the decoding hypotheses: minimal leaders (per stage
//! and induced), greed compatibility and region minimality (sampled), the
//! error-control and nearest-neighbor properties (algebraic), one-factor
//! errors, and the progress condition for the generator-step decoder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{ChainIndex, SubgroupChain};
use crate::code::{random_direction, Code, FundamentalRegion};
use crate::decode::{compute_delta_primitive, step_set};
use crate::error::{Error, Result};
use crate::graph::{stage_graphs, CosetLeaderGraph};
use crate::group::{displacement, stabilizer, GroupAction, Subgroup};
use crate::numerics::CVector;
use crate::par::Execution;

/// Witnesses kept per report.
pub const MAX_WITNESSES: usize = 8;

/// Largest group the induced-leader check will expand.
pub const INDUCED_LIMIT: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Element labels in the group's text format.
    pub elements: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<CVector>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub samples_used: u64,
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    fn exhaustive(property: &str, checked: u64, witnesses: Vec<Witness>) -> Self {
        CheckReport {
            property: property.to_string(),
            verdict: if witnesses.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witnesses,
            samples_used: checked,
            exhaustive: true,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Combines reports of the same property: any failure fails, otherwise
    /// any inconclusive part makes the whole inconclusive.
    pub fn combine(property: &str, parts: Vec<CheckReport>) -> CheckReport {
        let mut out = CheckReport {
            property: property.to_string(),
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            samples_used: 0,
            exhaustive: true,
            notes: Vec::new(),
        };
        for p in parts {
            out.samples_used += p.samples_used;
            out.exhaustive &= p.exhaustive;
            out.verdict = match (out.verdict, p.verdict) {
                (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
                _ => Verdict::Pass,
            };
            for w in p.witnesses {
                if out.witnesses.len() < MAX_WITNESSES {
                    out.witnesses.push(w);
                }
            }
            out.notes.extend(p.notes);
        }
        out
    }
}

/// Sampling budget and seeding for the region checks. Sample `i` draws from
/// `ChaCha8Rng::seed_from_u64(seed ^ i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            samples: 10_000,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

impl Sampling {
    pub fn new(samples: u64, seed: u64) -> Self {
        Sampling {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

fn label_all<A: GroupAction>(action: &A, elems: &[&A::Elem]) -> Vec<String> {
    elems.iter().map(|e| action.label(e)).collect()
}

/// `||c^-1 x0 - x0|| + tol < ||(ch)^-1 x0 - x0||`.
pub fn minimal_pair_holds<A: GroupAction>(
    action: &A,
    c: &A::Elem,
    h: &A::Elem,
    x0: &CVector,
    tol: f64,
) -> bool {
    let dc = displacement(action, &action.inverse(c), x0);
    let dch = displacement(action, &action.inverse(&action.compose(c, h)), x0);
    dc + tol < dch
}

/// Every leader strictly beats its coset mates `ch`, `h in H - Stab_H(x0)`.
pub fn check_minimal<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    h: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<CheckReport> {
    let stab = stabilizer(action, h, x0, tol)?;
    let movers: Vec<&A::Elem> = h.elements().iter().filter(|e| !stab.contains(e)).collect();
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for c in leaders {
        let dc = displacement(action, &action.inverse(c), x0);
        for hh in &movers {
            checked += 1;
            let ch = action.compose(c, hh);
            let dch = displacement(action, &action.inverse(&ch), x0);
            if !(dc + tol < dch) && witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness {
                    elements: label_all(action, &[c, hh, &ch]),
                    vector: None,
                    detail: format!("|c^-1 x0 - x0| = {dc:.12}, |(ch)^-1 x0 - x0| = {dch:.12}"),
                });
            }
        }
    }
    Ok(CheckReport::exhaustive("minimal", checked, witnesses))
}

/// Minimality of the induced leaders `CL(G_l / G_k)` for all `k < l`.
pub fn check_induced_minimal<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<CheckReport> {
    let order = chain.order();
    if order > INDUCED_LIMIT {
        return Err(Error::TooLarge {
            order,
            limit: INDUCED_LIMIT,
        });
    }
    let m = chain.len();
    let subgroups: Vec<Subgroup<A::Elem>> = (0..=m)
        .map(|k| chain.subgroup(action, k))
        .collect::<Result<_>>()?;
    let mut parts = Vec::new();
    for l in 1..=m {
        for (k, gk) in subgroups.iter().enumerate().take(l) {
            let leaders = chain.induced_leaders(action, k, l)?;
            let mut rep = check_minimal(action, &leaders, gk, x0, tol)?;
            for w in &mut rep.witnesses {
                w.detail = format!("G_{l}/G_{k}: {}", w.detail);
            }
            parts.push(rep);
        }
    }
    Ok(CheckReport::combine("induced_minimal", parts))
}

#[derive(Default)]
struct SampleAcc {
    used: u64,
    fails: Vec<(u64, Witness)>,
}

impl SampleAcc {
    fn merge(mut self, other: SampleAcc) -> SampleAcc {
        self.used += other.used;
        self.fails.extend(other.fails);
        self.fails.sort_by_key(|(i, _)| *i);
        self.fails.truncate(MAX_WITNESSES);
        self
    }

    fn report(self, property: &str) -> CheckReport {
        let witnesses: Vec<Witness> = self.fails.into_iter().map(|(_, w)| w).collect();
        CheckReport {
            property: property.to_string(),
            verdict: if witnesses.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witnesses,
            samples_used: self.used,
            exhaustive: false,
            notes: Vec::new(),
        }
    }
}

enum Outcome {
    Ok,
    Discard,
    Stuck(Witness),
}

fn run_sampled<F>(sampling: &Sampling, property: &str, f: F) -> CheckReport
where
    F: Fn(&mut ChaCha8Rng) -> Outcome + Sync + Send,
{
    let acc = sampling.exec.map_reduce(
        sampling.samples,
        SampleAcc::default,
        |acc, i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed ^ i);
            match f(&mut rng) {
                Outcome::Ok => acc.used += 1,
                Outcome::Discard => {}
                Outcome::Stuck(w) => {
                    acc.used += 1;
                    acc.fails.push((i, w));
                    acc.fails.sort_by_key(|(j, _)| *j);
                    acc.fails.truncate(MAX_WITNESSES);
                }
            }
        },
        SampleAcc::merge,
    );
    acc.report(property)
}

/// Best `FR(K)` margin over `c x` for the leaders, with the arg.
pub fn best_leader_margin<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    fr_k: &FundamentalRegion<'_, A>,
    x: &CVector,
) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in leaders.iter().enumerate() {
        let m = fr_k.margin(&action.act(c, x));
        if m > best.1 {
            best = (i, m);
        }
        if m > fr_k.tol() {
            break;
        }
    }
    best
}

/// Sampled: every `x in FR(H)` is sent into `FR(K)` by some leader.
/// Points within `tol` of a region boundary are discarded.
pub fn check_greed_compatible<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    h: &Subgroup<A::Elem>,
    k: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
    sampling: &Sampling,
) -> Result<CheckReport> {
    if !h.is_subgroup_of(k) {
        return Err(Error::NotSubgroup);
    }
    let fr_h = FundamentalRegion::new(action, h, x0, tol)?;
    let fr_k = FundamentalRegion::new(action, k, x0, tol)?;
    let dim = action.dim();
    Ok(run_sampled(sampling, "greed_compatible", |rng| {
        let x = fr_h.project(&random_direction(dim, rng));
        if fr_h.margin(&x) <= tol {
            return Outcome::Discard;
        }
        let (_, m) = best_leader_margin(action, leaders, &fr_k, &x);
        if m > tol {
            Outcome::Ok
        } else if m < -tol {
            Outcome::Stuck(Witness {
                elements: Vec::new(),
                vector: Some(x),
                detail: format!("best FR(K) margin {m:.3e}"),
            })
        } else {
            Outcome::Discard
        }
    }))
}

/// Sampled: `c^-1 x in FR(H)` for every `x in FR(K)` and every leader `c`.
pub fn check_region_minimal<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    h: &Subgroup<A::Elem>,
    k: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
    sampling: &Sampling,
) -> Result<CheckReport> {
    if !h.is_subgroup_of(k) {
        return Err(Error::NotSubgroup);
    }
    let fr_h = FundamentalRegion::new(action, h, x0, tol)?;
    let fr_k = FundamentalRegion::new(action, k, x0, tol)?;
    let inverses: Vec<A::Elem> = leaders.iter().map(|c| action.inverse(c)).collect();
    let dim = action.dim();
    Ok(run_sampled(sampling, "region_minimal", |rng| {
        let x = fr_k.project(&random_direction(dim, rng));
        if fr_k.margin(&x) <= tol {
            return Outcome::Discard;
        }
        let mut ambiguous = false;
        for (c, ci) in leaders.iter().zip(&inverses) {
            let m = fr_h.margin(&action.act(ci, &x));
            if m < -tol {
                return Outcome::Stuck(Witness {
                    elements: vec![action.label(c)],
                    vector: Some(x),
                    detail: format!("FR(H) margin of c^-1 x: {m:.3e}"),
                });
            }
            ambiguous |= m <= tol;
        }
        if ambiguous {
            Outcome::Discard
        } else {
            Outcome::Ok
        }
    }))
}

/// Runs both samplers on the same seeds; they must agree. Disagreement can
/// only come from tolerance effects and is reported as inconclusive.
pub fn check_equivalence_thm52<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    h: &Subgroup<A::Elem>,
    k: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
    sampling: &Sampling,
) -> Result<CheckReport> {
    let greedy = check_greed_compatible(action, leaders, h, k, x0, tol, sampling)?;
    let region = check_region_minimal(action, leaders, h, k, x0, tol, sampling)?;
    let agree = greedy.verdict == region.verdict;
    let notes = vec![
        format!("greed_compatible: {:?}", greedy.verdict).to_lowercase(),
        format!("region_minimal: {:?}", region.verdict).to_lowercase(),
    ];
    let mut witnesses = greedy.witnesses.clone();
    witnesses.extend(region.witnesses.iter().cloned());
    witnesses.truncate(MAX_WITNESSES);
    Ok(CheckReport {
        property: "greedy_region_equivalence".into(),
        verdict: if agree {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        witnesses: if agree { Vec::new() } else { witnesses },
        samples_used: greedy.samples_used + region.samples_used,
        exhaustive: false,
        notes,
    })
}

/// `bc` is a leader or `c^-1 b c` lies in `xh ∪ xh^-1`.
pub fn error_control_pair_holds<A: GroupAction>(
    action: &A,
    b: &A::Elem,
    c: &A::Elem,
    leaders: &[A::Elem],
    xh: &[A::Elem],
) -> bool {
    let bc = action.compose(b, c);
    if leaders.contains(&bc) {
        return true;
    }
    let conj = action.compose(&action.inverse(c), &bc);
    xh.iter().any(|x| *x == conj || action.inverse(x) == conj)
}

/// Exhaustive over consecutive stages, `b in X_K ∪ X_K^-1`, `c in CL(K/H)`.
pub fn check_error_control<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
) -> CheckReport {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for k in 1..=chain.len() {
        let leaders = chain.leaders(k);
        let xh: &[A::Elem] = if k == 1 { &[] } else { chain.generators(k - 1) };
        for b in step_set(action, chain.generators(k)) {
            for c in leaders {
                checked += 1;
                if !error_control_pair_holds(action, &b, c, leaders, xh)
                    && witnesses.len() < MAX_WITNESSES
                {
                    witnesses.push(Witness {
                        elements: label_all(action, &[&b, c]),
                        vector: None,
                        detail: format!("stage {k}"),
                    });
                }
            }
        }
    }
    CheckReport::exhaustive("error_control", checked, witnesses)
}

/// Elements realizing `d_min` all lie in `X ∪ X^-1`.
pub fn check_nearest_neighbors_property<A: GroupAction>(
    code: &Code<A>,
    x: &[A::Elem],
) -> CheckReport {
    let action = code.action();
    let allowed = step_set(action, x);
    let nbrs = match code.nearest_neighbors() {
        Ok((_, e)) => e,
        Err(_) => Vec::new(),
    };
    let witnesses: Vec<Witness> = nbrs
        .iter()
        .filter(|a| !allowed.contains(a))
        .take(MAX_WITNESSES)
        .map(|a| Witness {
            elements: vec![action.label(a)],
            vector: None,
            detail: "nearest neighbor outside X ∪ X^-1".into(),
        })
        .collect();
    CheckReport::exhaustive("nearest_neighbors", nbrs.len() as u64, witnesses)
}

/// Precomputed factorization and stage graphs for one-factor checks.
pub struct OneFactorContext<'a, A: GroupAction> {
    action: &'a A,
    chain: &'a SubgroupChain<A::Elem>,
    index: ChainIndex<A::Elem>,
    graphs: Vec<CosetLeaderGraph<A::Elem>>,
    error_control: bool,
}

impl<'a, A: GroupAction> OneFactorContext<'a, A> {
    pub fn new(action: &'a A, chain: &'a SubgroupChain<A::Elem>) -> Result<Self> {
        Ok(OneFactorContext {
            action,
            chain,
            index: ChainIndex::build(action, chain)?,
            graphs: stage_graphs(action, chain),
            error_control: check_error_control(action, chain).passed(),
        })
    }

    pub fn index(&self) -> &ChainIndex<A::Elem> {
        &self.index
    }

    /// `g` and `bg` differ in exactly one stage, with adjacent leaders there.
    pub fn check(&self, g: &A::Elem, b: &A::Elem) -> CheckReport {
        let property = "one_factor_error";
        if !self.error_control {
            return CheckReport {
                property: property.into(),
                verdict: Verdict::Inconclusive,
                witnesses: Vec::new(),
                samples_used: 0,
                exhaustive: true,
                notes: vec!["error control fails; hypothesis unmet".into()],
            };
        }
        let w = self.witness(g, b);
        CheckReport::exhaustive(property, 1, w.into_iter().collect())
    }

    fn witness(&self, g: &A::Elem, b: &A::Elem) -> Option<Witness> {
        let bg = self.action.compose(b, g);
        let (dg, dbg) = match (self.index.factorize(g), self.index.factorize(&bg)) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Some(Witness {
                    elements: label_all(self.action, &[g, b]),
                    vector: None,
                    detail: "element outside the chain".into(),
                })
            }
        };
        let diff: Vec<usize> = (0..dg.len()).filter(|&k| dg[k] != dbg[k]).collect();
        let fail = |detail: String| {
            Some(Witness {
                elements: label_all(self.action, &[g, b]),
                vector: None,
                detail,
            })
        };
        if diff.len() != 1 {
            return fail(format!("{} stages differ", diff.len()));
        }
        let k = diff[0];
        if !self.graphs[k].adjacent(dg[k] as usize, dbg[k] as usize) {
            return fail(format!("stage {} leaders not adjacent", k + 1));
        }
        None
    }

    /// Every `g` and every `b in X_G ∪ X_G^-1`.
    pub fn check_all(&self, exec: Execution) -> Result<CheckReport> {
        let elems = self.action.elements()?;
        let steps = step_set(self.action, self.chain.generators(self.chain.len()));
        if !self.error_control {
            return Ok(self.check(&elems[0], &steps[0]));
        }
        let per: Vec<Option<Witness>> = exec.map_indexed(elems.len() * steps.len(), |i| {
            self.witness(&elems[i / steps.len()], &steps[i % steps.len()])
        });
        let checked = per.len() as u64;
        let witnesses: Vec<Witness> = per.into_iter().flatten().take(MAX_WITNESSES).collect();
        Ok(CheckReport::exhaustive(
            "one_factor_error",
            checked,
            witnesses,
        ))
    }
}

pub fn check_one_factor_error<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    g: &A::Elem,
    b: &A::Elem,
) -> Result<CheckReport> {
    Ok(OneFactorContext::new(action, chain)?.check(g, b))
}

/// Every nontrivial codeword is moved strictly closer to `x0` by some
/// element of `x ∪ x^-1`.
pub fn check_dagger<A: GroupAction>(code: &Code<A>, x: &[A::Elem]) -> Result<CheckReport> {
    let action = code.action();
    let checked = code.elements().len() as u64;
    Ok(match compute_delta_primitive(code, x)? {
        Ok(delta) => {
            let mut r = CheckReport::exhaustive("dagger", checked, Vec::new());
            r.notes.push(format!("delta = {delta:.12}"));
            r
        }
        Err(v) => CheckReport::exhaustive(
            "dagger",
            checked,
            vec![Witness {
                elements: vec![action.label(&v.element)],
                vector: Some(v.codeword),
                detail: "no step moves this codeword closer".into(),
            }],
        ),
    })
}

/// Re-evaluates a `minimal` witness from its labels alone.
pub fn replay_minimal<A: GroupAction>(
    action: &A,
    w: &Witness,
    x0: &CVector,
    tol: f64,
) -> Option<bool> {
    let c = action.parse_label(w.elements.first()?)?;
    let h = action.parse_label(w.elements.get(1)?)?;
    Some(!minimal_pair_holds(action, &c, &h, x0, tol))
}

/// Re-evaluates an `error_control` witness: true when the pair still fails.
pub fn replay_error_control<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    w: &Witness,
) -> Option<bool> {
    let b = action.parse_label(w.elements.first()?)?;
    let c = action.parse_label(w.elements.get(1)?)?;
    let k: usize = w.detail.strip_prefix("stage ")?.parse().ok()?;
    let xh: &[A::Elem] = if k == 1 { &[] } else { chain.generators(k - 1) };
    Some(!error_control_pair_holds(
        action,
        &b,
        &c,
        chain.leaders(k),
        xh,
    ))
}

/// Re-evaluates a `greed_compatible` witness vector.
pub fn replay_greedy<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    k: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
    w: &Witness,
) -> Result<Option<bool>> {
    let Some(x) = &w.vector else { return Ok(None) };
    let fr_k = FundamentalRegion::new(action, k, x0, tol)?;
    Ok(Some(best_leader_margin(action, leaders, &fr_k, x).1 < -tol))
}

/// Size limits for [`verify_suite`]; checks whose input exceeds a limit are
/// reported as inconclusive with a note instead of being run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteLimits {
    /// Largest `G_k` enumerated for the per-stage minimal and greedy checks.
    pub subgroup: u128,
    /// Largest group for the nearest-neighbor and one-factor checks.
    pub group: u128,
}

impl Default for SuiteLimits {
    fn default() -> Self {
        SuiteLimits {
            subgroup: 20_000,
            group: INDUCED_LIMIT,
        }
    }
}

fn tag_stage(k: usize, mut r: CheckReport) -> CheckReport {
    for w in &mut r.witnesses {
        w.detail = format!("stage {k}: {}", w.detail);
    }
    r
}

fn skipped(property: &str, why: String) -> CheckReport {
    CheckReport {
        property: property.to_string(),
        verdict: Verdict::Inconclusive,
        witnesses: Vec::new(),
        samples_used: 0,
        exhaustive: false,
        notes: vec![why],
    }
}

/// Every check that applies to a chain: per-stage minimal leaders, sampled
/// greed compatibility, error control, nearest neighbors against the top
/// generators, and one-factor errors.
pub fn verify_suite<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
    tol: f64,
    sampling: &Sampling,
    limits: SuiteLimits,
) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let mut minimal = Vec::new();
    let mut greedy = Vec::new();
    for k in 1..=chain.len() {
        if chain.subgroup_order(k) > limits.subgroup {
            let why = format!(
                "stage {k}: subgroup order {} over limit",
                chain.subgroup_order(k)
            );
            minimal.push(skipped("minimal", why.clone()));
            greedy.push(skipped("greed_compatible", why));
            continue;
        }
        let h = chain.subgroup(action, k - 1)?;
        let kk = chain.subgroup(action, k)?;
        minimal.push(tag_stage(
            k,
            check_minimal(action, chain.leaders(k), &h, x0, tol)?,
        ));
        greedy.push(tag_stage(
            k,
            check_greed_compatible(action, chain.leaders(k), &h, &kk, x0, tol, sampling)?,
        ));
    }
    out.push(CheckReport::combine("minimal", minimal));
    out.push(CheckReport::combine("greed_compatible", greedy));
    out.push(check_error_control(action, chain));
    if chain.order() > limits.group {
        let why = format!("group order {} over limit", chain.order());
        out.push(skipped("nearest_neighbors", why.clone()));
        out.push(skipped("one_factor_error", why));
    } else {
        let code = Code::with_tol(action, x0.clone(), tol)?;
        out.push(check_nearest_neighbors_property(
            &code,
            chain.generators(chain.len()),
        ));
        out.push(OneFactorContext::new(action, chain)?.check_all(sampling.exec)?);
    }
    Ok(out)
}
