//! Group addressing (`gr1n:<r>,<n>`, `catalog:<name>`, `file:<path>`) and
//! initial-vector options.

use anyhow::{anyhow, bail, Context, Result};

use groupcode::chain::SubgroupChain;
use groupcode::code::standard_initial_vector;
use groupcode::exceptional::{self, two_stage_chain};
use groupcode::gr1n::Gr1n;
use groupcode::group::{ElemId, FiniteUnitaryGroup, GroupAction, GroupSpec, DEFAULT_MAX_ORDER};
use groupcode::numerics::{CVector, C64, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq)]
pub enum GroupRef {
    Gr1n { r: u32, n: usize },
    Catalog(String),
    File(String),
}

impl std::str::FromStr for GroupRef {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            anyhow!("group must look like gr1n:<r>,<n>, catalog:<name> or file:<path>")
        })?;
        match kind {
            "gr1n" => {
                let (r, n) = rest
                    .split_once(',')
                    .ok_or_else(|| anyhow!("expected gr1n:<r>,<n>, got {s:?}"))?;
                let r: u32 = r
                    .trim()
                    .parse()
                    .with_context(|| format!("bad r in {s:?}"))?;
                let n: usize = n
                    .trim()
                    .parse()
                    .with_context(|| format!("bad n in {s:?}"))?;
                Ok(GroupRef::Gr1n { r, n })
            }
            "catalog" if !rest.is_empty() => Ok(GroupRef::Catalog(rest.to_string())),
            "file" if !rest.is_empty() => Ok(GroupRef::File(rest.to_string())),
            _ => bail!("unknown group source {s:?}"),
        }
    }
}

/// A group with its chain and initial vector, ready for the commands.
pub enum Setup {
    Gr1n {
        group: Gr1n,
        x0: CVector,
    },
    Matrix {
        group: FiniteUnitaryGroup,
        chain: SubgroupChain<ElemId>,
        x0: CVector,
    },
}

impl Setup {
    pub fn dim(&self) -> usize {
        match self {
            Setup::Gr1n { group, .. } => group.dim(),
            Setup::Matrix { group, .. } => group.dim(),
        }
    }
}

/// `--x0`: `standard`, the name of a shipped vector, or comma-separated
/// complex entries such as `0.7+0.5i,0.5`. Explicit vectors are normalized.
pub fn parse_vector(s: &str) -> Result<CVector> {
    let entries = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<C64>()
                .map_err(|_| anyhow!("bad complex number {p:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    CVector::new(entries)
        .normalized()
        .ok_or_else(|| anyhow!("initial vector is zero"))
}

fn looks_explicit(s: &str) -> bool {
    s.contains(',') || s.parse::<C64>().is_ok()
}

/// Documented default vector and subgroup generators per catalog entry.
fn catalog_defaults(name: &str) -> (Option<&'static str>, &'static [&'static str]) {
    match name {
        "g4" => (Some("y0"), &["B.A.A.B"]),
        "g8" => (Some("x0"), &["A"]),
        _ => (None, &["A"]),
    }
}

pub fn resolve(group: &GroupRef, x0: Option<&str>, subgroup: Option<&str>) -> Result<Setup> {
    match group {
        GroupRef::Gr1n { r, n } => {
            if subgroup.is_some() {
                bail!("--subgroup applies to matrix groups only");
            }
            let g = Gr1n::new(*r, *n)?;
            let x0 = match x0 {
                None | Some("standard") => standard_initial_vector(*r, *n)?,
                Some(s) => parse_vector(s)?,
            };
            check_len(&x0, g.dim())?;
            Ok(Setup::Gr1n { group: g, x0 })
        }
        GroupRef::Catalog(name) => {
            let entry = exceptional::load(name)?;
            let (vec_default, sub_default) = catalog_defaults(name);
            let x0 = pick_vector(&entry.spec, x0, vec_default)?;
            let subs: Vec<String> = match subgroup {
                Some(s) => s.split(',').map(str::to_string).collect(),
                None => sub_default.iter().map(|s| s.to_string()).collect(),
            };
            matrix_setup(entry.group, &subs, x0)
        }
        GroupRef::File(path) => {
            let spec = GroupSpec::from_path(path).with_context(|| format!("reading {path}"))?;
            let group = spec.build(DEFAULT_TOL, DEFAULT_MAX_ORDER)?;
            let x0 = pick_vector(&spec, x0, Some("x0"))?;
            let subs: Vec<String> = match subgroup {
                Some(s) => s.split(',').map(str::to_string).collect(),
                None => vec![group.label(&group.generator(0))],
            };
            matrix_setup(group, &subs, x0)
        }
    }
}

fn pick_vector(spec: &GroupSpec, x0: Option<&str>, default: Option<&str>) -> Result<CVector> {
    let name = match x0 {
        Some(s) if looks_explicit(s) => return parse_vector(s),
        Some(s) => Some(s),
        None => default,
    };
    let v = match name {
        Some(n) => spec
            .vector(n)
            .cloned()
            .ok_or_else(|| anyhow!("no vector named {n:?}"))?,
        None => spec
            .vectors
            .first()
            .map(|v| v.vector.clone())
            .ok_or_else(|| anyhow!("this group ships no vectors; pass --x0"))?,
    };
    v.normalized()
        .ok_or_else(|| anyhow!("initial vector is zero"))
}

fn matrix_setup(group: FiniteUnitaryGroup, subgroup: &[String], x0: CVector) -> Result<Setup> {
    check_len(&x0, group.dim())?;
    let gens = subgroup
        .iter()
        .map(|l| {
            group
                .parse_label(l)
                .ok_or_else(|| anyhow!("cannot parse element {l:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let built = two_stage_chain(&group, &gens, &x0, DEFAULT_TOL)?;
    Ok(Setup::Matrix {
        group,
        chain: built.chain,
        x0,
    })
}

fn check_len(x0: &CVector, dim: usize) -> Result<()> {
    if x0.dim() != dim {
        bail!(
            "initial vector has {} entries, group acts on C^{dim}",
            x0.dim()
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_group_refs() {
        assert_eq!(
            "gr1n:4,3".parse::<GroupRef>().unwrap(),
            GroupRef::Gr1n { r: 4, n: 3 }
        );
        assert_eq!(
            "catalog:g4".parse::<GroupRef>().unwrap(),
            GroupRef::Catalog("g4".into())
        );
        assert_eq!(
            "file:a/b.json".parse::<GroupRef>().unwrap(),
            GroupRef::File("a/b.json".into())
        );
        for bad in ["gr1n:4", "gr1n:x,3", "foo:1", "catalog:", "g4"] {
            assert!(bad.parse::<GroupRef>().is_err(), "{bad}");
        }
    }

    #[test]
    fn explicit_vectors_are_normalized() {
        let v = parse_vector("3,4i").unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((v[1].im - 0.8).abs() < 1e-12);
        assert!(parse_vector("0,0").is_err());
        assert!(parse_vector("1,zz").is_err());
    }

    #[test]
    fn resolves_sources() {
        let s = resolve(&GroupRef::Gr1n { r: 3, n: 2 }, None, None).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(resolve(&GroupRef::Gr1n { r: 3, n: 2 }, Some("1,2,3"), None).is_err());
        let Setup::Matrix { chain, .. } =
            resolve(&GroupRef::Catalog("g4".into()), None, None).unwrap()
        else {
            panic!("matrix setup expected");
        };
        assert_eq!(chain.indices(), vec![6, 4]);
        assert!(resolve(&GroupRef::Catalog("g16".into()), None, None).is_err());
        assert!(resolve(&GroupRef::Catalog("g16".into()), Some("1,0.5i"), None).is_ok());
        assert!(resolve(&GroupRef::Catalog("g4".into()), None, Some("Q")).is_err());
    }
}
