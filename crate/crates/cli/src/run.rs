use anyhow::{bail, Result};
use serde_json::json;

use groupcode::channel::{parse_range, snr_sweep, sweep_csv, SweepRow};
use groupcode::code::{dmin_table, dmin_table_csv, standard_beta};
use groupcode::decode::{
    comparison_table_csv, measure_comparisons, Decoder, FastGr1nDecoder, SubgroupDecoder,
};
use groupcode::graph::stage_graphs;
use groupcode::group::GroupAction;
use groupcode::numerics::{CVector, DEFAULT_TOL};
use groupcode::par::Execution;
use groupcode::partial::{
    arithmetic_vector, divisor_chains, generator_distance_table, partial_dmin_exhaustive,
    partial_size, sweep, PartialCodeSpec, RatioConvention, PAIRWISE_LIMIT,
};
use groupcode::verify::{verify_suite, CheckReport, Sampling, SuiteLimits};

use crate::source::Setup;

/// Command output and whether every requested check passed.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    Dmin,
    Comparisons,
}

pub fn tables(
    which: Table,
    r: u32,
    trials: u64,
    seed: u64,
    exec: Execution,
    format: Format,
) -> Result<Outcome> {
    match which {
        Table::Dmin => {
            let cells = dmin_table(&[3, 4, 5, 6, 7, 8], &[2, 3, 4])?;
            Ok(Outcome::ok(match format {
                Format::Csv => dmin_table_csv(&cells),
                Format::Json => {
                    let rows: Vec<_> = cells
                        .iter()
                        .map(|c| json!({"r": c.r, "n": c.n, "dmin": c.dmin}))
                        .collect();
                    pretty(&json!(rows))
                }
            }))
        }
        Table::Comparisons => {
            let rows = [4, 8, 16, 32]
                .iter()
                .map(|&n| measure_comparisons(r, n, trials, seed, exec))
                .collect::<groupcode::Result<Vec<_>>>()?;
            Ok(Outcome::ok(match format {
                Format::Csv => comparison_table_csv(&rows),
                Format::Json => pretty(&json!({"r": r, "seed": seed, "rows": rows})),
            }))
        }
    }
}

pub fn verify(
    setup: &Setup,
    samples: u64,
    seed: u64,
    exec: Execution,
    format: Format,
) -> Result<Outcome> {
    let sampling = Sampling::new(samples, seed).with_exec(exec);
    let limits = SuiteLimits::default();
    let reports = match setup {
        Setup::Gr1n { group, x0 } => {
            verify_suite(group, group.chain(), x0, DEFAULT_TOL, &sampling, limits)?
        }
        Setup::Matrix { group, chain, x0 } => {
            verify_suite(group, chain, x0, DEFAULT_TOL, &sampling, limits)?
        }
    };
    let ok = reports.iter().all(CheckReport::passed);
    let text = match format {
        Format::Json => pretty(&json!({"passed": ok, "reports": reports})),
        Format::Csv => {
            let mut s = String::from("property,verdict,samples_used,exhaustive,witnesses\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.property,
                    serde_json::to_value(r.verdict)?.as_str().unwrap_or("?"),
                    r.samples_used,
                    r.exhaustive,
                    r.witnesses.len()
                ));
            }
            s
        }
    };
    Ok(Outcome { text, ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DecoderKind {
    /// Sorting decoder for `gr1n` groups, greedy search otherwise.
    Auto,
    Subgroup,
    Fast,
}

pub struct SimulateArgs<'a> {
    pub snr: &'a str,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub exec: Execution,
    pub format: Format,
}

pub fn simulate(setup: &Setup, a: &SimulateArgs<'_>) -> Result<Outcome> {
    let snrs = parse_range(a.snr)?;
    let rows = match setup {
        Setup::Gr1n { group, x0 } => match a.decoder {
            DecoderKind::Auto | DecoderKind::Fast => {
                let d = FastGr1nDecoder::new(group, x0)?;
                sweep_rows(group, group.chain(), x0, &d, &snrs, a)?
            }
            DecoderKind::Subgroup => {
                let d = SubgroupDecoder::new(group, group.chain(), x0)?;
                sweep_rows(group, group.chain(), x0, &d, &snrs, a)?
            }
        },
        Setup::Matrix { group, chain, x0 } => {
            if a.decoder == DecoderKind::Fast {
                bail!("the sorting decoder needs a gr1n group");
            }
            let d = SubgroupDecoder::new(group, chain, x0)?;
            sweep_rows(group, chain, x0, &d, &snrs, a)?
        }
    };
    Ok(Outcome::ok(match a.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => pretty(&json!({
            "snr_definition": "snr_db = -20 log10(sigma sqrt(2 dim)); sigma per real component",
            "dim": setup.dim(),
            "rows": rows,
        })),
    }))
}

fn sweep_rows<A, D>(
    action: &A,
    chain: &groupcode::chain::SubgroupChain<A::Elem>,
    x0: &CVector,
    decoder: &D,
    snrs: &[f64],
    a: &SimulateArgs<'_>,
) -> Result<Vec<SweepRow>>
where
    A: GroupAction,
    D: Decoder<Elem = A::Elem>,
{
    Ok(snr_sweep(
        action, chain, x0, decoder, snrs, a.trials, a.seed, a.exec,
    )?)
}

pub fn graph(setup: &Setup, stage: &str) -> Result<Outcome> {
    let dots: Vec<String> = match setup {
        Setup::Gr1n { group, .. } => stage_dots(group, group.chain(), stage)?,
        Setup::Matrix { group, chain, .. } => stage_dots(group, chain, stage)?,
    };
    Ok(Outcome::ok(dots.concat()))
}

fn stage_dots<A: GroupAction>(
    action: &A,
    chain: &groupcode::chain::SubgroupChain<A::Elem>,
    stage: &str,
) -> Result<Vec<String>> {
    let graphs = stage_graphs(action, chain);
    let wanted: Vec<usize> = if stage == "all" {
        (1..=graphs.len()).collect()
    } else {
        let k: usize = stage
            .parse()
            .map_err(|_| anyhow::anyhow!("--stage takes `all` or a stage number"))?;
        if k == 0 || k > graphs.len() {
            bail!("stage {k} out of range 1..={}", graphs.len());
        }
        vec![k]
    };
    Ok(wanted
        .into_iter()
        .map(|k| graphs[k - 1].to_dot(&format!("stage{k}")))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ConventionArg {
    Stated,
    Scaled,
    Both,
}

impl ConventionArg {
    fn list(self) -> Vec<RatioConvention> {
        match self {
            ConventionArg::Stated => vec![RatioConvention::Stated],
            ConventionArg::Scaled => vec![RatioConvention::Scaled],
            ConventionArg::Both => vec![RatioConvention::Stated, RatioConvention::Scaled],
        }
    }
}

pub fn parse_divisors(s: Option<&str>, n: usize) -> Result<Vec<u32>> {
    match s {
        None => Ok(vec![1; n]),
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| anyhow::anyhow!("bad divisor {p:?}"))
            })
            .collect(),
    }
}

fn join_m(m: &[u32]) -> String {
    m.iter().map(u32::to_string).collect::<Vec<_>>().join("/")
}

pub fn partial_analyze(
    spec: &PartialCodeSpec,
    ratios: &[f64],
    convention: ConventionArg,
    format: Format,
) -> Result<Outcome> {
    let ratios = if ratios.is_empty() {
        vec![standard_beta(spec.r)]
    } else {
        ratios.to_vec()
    };
    let size = partial_size(spec)?;
    let mut tables = Vec::new();
    let mut csv = String::from(
        "convention,r,n,m,ratio,step,size,max_over_min,min_normalized,transposition_normalized,dmin_exhaustive\n",
    );
    for &ratio in &ratios {
        for conv in convention.list() {
            let t = generator_distance_table(spec, ratio, conv)?;
            let dmin = if size <= PAIRWISE_LIMIT {
                let x0 = arithmetic_vector(spec.n, t.step)
                    .normalized()
                    .expect("positive entries");
                Some(partial_dmin_exhaustive(spec, &x0)?)
            } else {
                None
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{}\n",
                conv.name(),
                spec.r,
                spec.n,
                join_m(&spec.m),
                ratio,
                t.step,
                size,
                t.max_over_min,
                t.min_normalized,
                t.transposition_normalized,
                dmin.map(|d| format!("{d:.6}")).unwrap_or_default()
            ));
            tables.push(json!({"table": t, "dmin_exhaustive": dmin}));
        }
    }
    Ok(Outcome::ok(match format {
        Format::Csv => csv,
        Format::Json => pretty(&json!({"spec": spec, "size": size.to_string(), "tables": tables})),
    }))
}

pub fn partial_sweep(
    r: u32,
    n: usize,
    ratios: &[f64],
    convention: RatioConvention,
    exec: Execution,
) -> Result<Outcome> {
    if ratios.is_empty() {
        bail!("give at least one --ratio");
    }
    let rows = sweep(r, n, &divisor_chains(r, n), ratios, convention, exec)?;
    let mut s = String::from("m,ratio,size,max_over_min,min_normalized\n");
    for row in rows {
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            join_m(&row.m),
            row.ratio,
            row.size,
            row.max_over_min,
            row.min_normalized
        ));
    }
    Ok(Outcome::ok(s))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
