//! Complex AWGN channel and the Monte Carlo harness around a decoder.
//!
//! Every trial draws from its own `ChaCha8Rng` seeded with `seed ^ trial`,
//! and the per-trial statistics are integer counts, so results are identical
//! for any worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chain::SubgroupChain;
use crate::decode::Decoder;
use crate::error::{Error, Result};
use crate::group::{check_dim, GroupAction};
use crate::numerics::{c64, dist, CVector, DEFAULT_TOL};
use crate::par::Execution;

/// `SNR = -20 log10(sigma sqrt(2 dim))` in dB.
pub fn snr_db(sigma: f64, dim: usize) -> f64 {
    -20.0 * (sigma * (2.0 * dim as f64).sqrt()).log10()
}

pub fn sigma_from_snr(snr_db: f64, dim: usize) -> f64 {
    10f64.powf(-snr_db / 20.0) / (2.0 * dim as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Standard deviation of each real and imaginary noise component.
    pub sigma: f64,
    pub seed: u64,
    pub trials: u64,
}

impl ChannelConfig {
    pub fn new(sigma: f64, seed: u64, trials: u64) -> Result<Self> {
        let c = ChannelConfig {
            sigma,
            seed,
            trials,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_snr(snr_db: f64, dim: usize, seed: u64, trials: u64) -> Result<Self> {
        Self::new(sigma_from_snr(snr_db, dim), seed, trials)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma = {}", self.sigma)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        Ok(())
    }
}

/// I.i.d. `N(0, sigma^2)` real and imaginary parts.
pub fn awgn<R: Rng + ?Sized>(dim: usize, sigma: f64, rng: &mut R) -> CVector {
    if sigma == 0.0 {
        return CVector::zeros(dim);
    }
    CVector::new(
        (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c64(sigma * re, sigma * im)
            })
            .collect(),
    )
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    pub trials: u64,
    /// Decoded codeword differs from the sent one.
    pub word_errors: u64,
    /// Decoder returned an error; these also count as word errors.
    pub failures: u64,
    /// `factor_errors[k]`: trials whose decoded digits differ from the sent
    /// digits in exactly `k` stages (0 for correct decodes).
    pub factor_errors: Vec<u64>,
    /// Comparison count -> number of trials.
    pub comparisons: BTreeMap<u64, u64>,
    pub ties: u64,
}

impl SimStats {
    fn empty(stages: usize) -> Self {
        SimStats {
            factor_errors: vec![0; stages + 1],
            ..Default::default()
        }
    }

    pub fn merge(mut self, other: SimStats) -> SimStats {
        self.trials += other.trials;
        self.word_errors += other.word_errors;
        self.failures += other.failures;
        if self.factor_errors.len() < other.factor_errors.len() {
            self.factor_errors.resize(other.factor_errors.len(), 0);
        }
        for (a, b) in self.factor_errors.iter_mut().zip(&other.factor_errors) {
            *a += b;
        }
        for (k, v) in other.comparisons {
            *self.comparisons.entry(k).or_insert(0) += v;
        }
        self.ties += other.ties;
        self
    }

    pub fn word_error_rate(&self) -> f64 {
        ratio(self.word_errors, self.trials)
    }

    /// Fraction of word errors whose digits differ in exactly one stage.
    pub fn one_factor_fraction(&self) -> f64 {
        ratio(
            self.factor_errors.get(1).copied().unwrap_or(0),
            self.word_errors,
        )
    }

    pub fn mean_comparisons(&self) -> f64 {
        let (mut sum, mut count) = (0u128, 0u128);
        for (&c, &k) in &self.comparisons {
            sum += c as u128 * k as u128;
            count += k as u128;
        }
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }

    /// Smallest comparison count `c` with at least `q` of the trials at or
    /// below it.
    pub fn comparison_percentile(&self, q: f64) -> u64 {
        let total: u64 = self.comparisons.values().sum();
        let target = (q.clamp(0.0, 1.0) * total as f64).ceil() as u64;
        let mut seen = 0;
        for (&c, &k) in &self.comparisons {
            seen += k;
            if seen >= target.max(1) {
                return c;
            }
        }
        0
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs `config.trials` trials: a uniform message (one uniform digit per
/// stage of `chain`), encoded as `g^-1 x0`, plus noise, through `decoder`.
/// A decode is correct when it lands on the sent codeword.
pub fn simulate<A, D>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
    decoder: &D,
    config: &ChannelConfig,
    exec: Execution,
) -> Result<SimStats>
where
    A: GroupAction,
    D: Decoder<Elem = A::Elem>,
{
    config.validate()?;
    check_dim(action, x0)?;
    let dim = action.dim();
    let stages = chain.len();
    let stats = exec.map_reduce(
        config.trials,
        || SimStats::empty(stages),
        |acc, t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ t);
            let digits: Vec<usize> = (0..stages)
                .map(|k| rng.gen_range(0..chain.stages()[k].leaders.len()))
                .collect();
            let g = chain.compose_digits(action, &digits);
            let sent = action.act(&action.inverse(&g), x0);
            let r = &sent + &awgn(dim, config.sigma, &mut rng);
            acc.trials += 1;
            match decoder.decode(&r) {
                Ok(res) => {
                    *acc.comparisons.entry(res.comparisons).or_insert(0) += 1;
                    acc.ties += res.ties as u64;
                    let got = action.act(&action.inverse(&res.element), x0);
                    if dist(got.as_slice(), sent.as_slice()) > DEFAULT_TOL {
                        acc.word_errors += 1;
                        let h = digits
                            .iter()
                            .zip(&res.digits)
                            .filter(|(a, b)| a != b)
                            .count();
                        acc.factor_errors[h] += 1;
                    } else {
                        acc.factor_errors[0] += 1;
                    }
                }
                Err(_) => {
                    acc.word_errors += 1;
                    acc.failures += 1;
                    acc.factor_errors[0] += 1;
                }
            }
        },
        SimStats::merge,
    );
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub sigma: f64,
    pub stats: SimStats,
    pub seed: u64,
}

/// One simulation per SNR value, all with the same seed.
pub fn snr_sweep<A, D>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
    x0: &CVector,
    decoder: &D,
    snrs: &[f64],
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepRow>>
where
    A: GroupAction,
    D: Decoder<Elem = A::Elem>,
{
    snrs.iter()
        .map(|&snr| {
            let config = ChannelConfig::from_snr(snr, action.dim(), seed, trials)?;
            Ok(SweepRow {
                snr_db: snr,
                sigma: config.sigma,
                stats: simulate(action, chain, x0, decoder, &config, exec)?,
                seed,
            })
        })
        .collect()
}

/// `a:step:b` inclusive, e.g. `0:2:20` is 11 values.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {p:?} in {s:?}")))
        })
        .collect::<Result<_>>()?;
    let (a, step, b) = match parts[..] {
        [a] => return Ok(vec![a]),
        [a, b] => (a, 1.0, b),
        [a, step, b] => (a, step, b),
        _ => return Err(Error::Parse(format!("expected a:step:b, got {s:?}"))),
    };
    if !(step > 0.0) || b < a {
        return Err(Error::Parse(format!("empty or unbounded range {s:?}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

pub const CSV_HEADER: &str = "snr_db,wer,one_factor_fraction,mean_comparisons,trials,seed";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.4},{},{}",
            r.snr_db,
            r.stats.word_error_rate(),
            r.stats.one_factor_fraction(),
            r.stats.mean_comparisons(),
            r.stats.trials,
            r.seed
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::standard_initial_vector;
    use crate::decode::{FastGr1nDecoder, SubgroupDecoder};
    use crate::gr1n::Gr1n;

    #[test]
    fn snr_round_trip() {
        for dim in [1, 4, 7] {
            for snr in [-3.0, 0.0, 12.5] {
                assert!((snr_db(sigma_from_snr(snr, dim), dim) - snr).abs() < 1e-9);
            }
        }
        // unit-energy noise is 0 dB
        assert!(snr_db(1.0 / 8f64.sqrt(), 4).abs() < 1e-12);
    }

    #[test]
    fn awgn_zero_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(awgn(3, 0.0, &mut rng), CVector::zeros(3));
        let (dim, sigma, draws) = (3, 0.7, 100_000);
        let mean: f64 = (0..draws)
            .map(|_| awgn(dim, sigma, &mut rng).norm_sqr())
            .sum::<f64>()
            / draws as f64;
        let expect = 2.0 * dim as f64 * sigma * sigma;
        assert!((mean - expect).abs() < 0.02 * expect, "{mean} vs {expect}");
        let a = awgn(4, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        let b = awgn(4, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(ChannelConfig::new(-0.1, 0, 10).is_err());
        assert!(ChannelConfig::new(f64::NAN, 0, 10).is_err());
        assert!(ChannelConfig::new(0.1, 0, 0).is_err());
        assert!(ChannelConfig::new(0.0, 0, 1).is_ok());
    }

    #[test]
    fn noiseless_is_error_free() {
        let g = Gr1n::new(4, 3).unwrap();
        let x0 = standard_initial_vector(4, 3).unwrap();
        let dec = SubgroupDecoder::new(&g, g.chain(), &x0).unwrap();
        let cfg = ChannelConfig::new(0.0, 5, 500).unwrap();
        let s = simulate(&g, g.chain(), &x0, &dec, &cfg, Execution::default()).unwrap();
        assert_eq!(s.trials, 500);
        assert_eq!(s.word_errors, 0);
        assert_eq!(s.factor_errors[0], 500);
        assert_eq!(s.one_factor_fraction(), 0.0);
    }

    #[test]
    fn stats_independent_of_workers() {
        let g = Gr1n::new(4, 3).unwrap();
        let x0 = standard_initial_vector(4, 3).unwrap();
        let dec = FastGr1nDecoder::new(&g, &x0).unwrap();
        let cfg = ChannelConfig::new(0.15, 11, 3000).unwrap();
        let seq = simulate(&g, g.chain(), &x0, &dec, &cfg, Execution::Sequential).unwrap();
        for w in [2, 3, 8] {
            let par = simulate(&g, g.chain(), &x0, &dec, &cfg, Execution::with_workers(w)).unwrap();
            assert_eq!(seq, par);
        }
        assert_eq!(seq.factor_errors.iter().sum::<u64>(), seq.trials);
        assert!(seq.word_errors > 0);
        let rerun = simulate(&g, g.chain(), &x0, &dec, &cfg, Execution::Sequential).unwrap();
        assert_eq!(seq, rerun);
    }

    #[test]
    fn one_factor_errors_dominate() {
        let g = Gr1n::new(8, 3).unwrap();
        let x0 = standard_initial_vector(8, 3).unwrap();
        let dec = SubgroupDecoder::new(&g, g.chain(), &x0).unwrap();
        let cfg = ChannelConfig::new(0.08, 2, 4000).unwrap();
        let s = simulate(&g, g.chain(), &x0, &dec, &cfg, Execution::default()).unwrap();
        assert!(s.word_errors > 50);
        assert!(s.one_factor_fraction() > 0.5, "{:?}", s.factor_errors);
    }

    #[test]
    fn wer_falls_with_snr() {
        let g = Gr1n::new(6, 2).unwrap();
        let x0 = standard_initial_vector(6, 2).unwrap();
        let dec = FastGr1nDecoder::new(&g, &x0).unwrap();
        let snrs = parse_range("0:4:20").unwrap();
        let rows = snr_sweep(
            &g,
            g.chain(),
            &x0,
            &dec,
            &snrs,
            2000,
            1,
            Execution::default(),
        )
        .unwrap();
        for w in rows.windows(2) {
            let (p, q) = (w[0].stats.word_error_rate(), w[1].stats.word_error_rate());
            let band = 3.0 * (p * (1.0 - p) / 2000.0).sqrt();
            assert!(q <= p + band, "{p} -> {q}");
        }
        assert_eq!(rows.last().unwrap().stats.word_errors, 0);
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:2:20").unwrap().len(), 11);
        assert_eq!(parse_range("1:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_range("5").unwrap(), vec![5.0]);
        assert_eq!(parse_range("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("0:0:1").is_err());
        assert!(parse_range("a:1").is_err());
    }

    #[test]
    fn percentiles_and_merge() {
        let mut a = SimStats::empty(2);
        a.trials = 3;
        a.comparisons = BTreeMap::from([(4, 2), (9, 1)]);
        let mut b = SimStats::empty(2);
        b.trials = 1;
        b.comparisons = BTreeMap::from([(4, 1)]);
        let m = a.clone().merge(b.clone());
        assert_eq!(m, b.merge(a));
        assert_eq!(m.comparison_percentile(0.5), 4);
        assert_eq!(m.comparison_percentile(1.0), 9);
        assert!((m.mean_comparisons() - 21.0 / 4.0).abs() < 1e-12);
    }
}
