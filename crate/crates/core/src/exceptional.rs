//! Two-dimensional exceptional reflection groups generated by `A`, `B` with
//! `A^k = B^k = I` and `ABA = BAB`: `k = 3, 4, 5` give the tetrahedral,
//! octahedral and icosahedral groups of orders 24, 96 and 600.
//!
//! Generators and vectors ship as JSON in `catalog/`. Everything else here
//! (orders, relations, ties, leader choices) is recomputed on load.

use serde::Serialize;

use crate::chain::{Stage, SubgroupChain};
use crate::error::{Error, Result};
use crate::group::{
    closest_coset_leaders, displacement, ElemId, FiniteUnitaryGroup, GroupAction, GroupSpec,
    Subgroup, TieReport, DEFAULT_MAX_ORDER,
};
use crate::numerics::{c64, mat_mul, root_of_unity, CMatrix, CVector, C64, DEFAULT_TOL};
use crate::verify::{check_minimal, CheckReport};

const G4_JSON: &str = include_str!("../catalog/g4.json");
const G8_JSON: &str = include_str!("../catalog/g8.json");
const G16_JSON: &str = include_str!("../catalog/g16.json");

pub const CATALOG_NAMES: [&str; 3] = ["g4", "g8", "g16"];

/// Tolerance for relation checks on catalog matrices.
pub const RELATION_TOL: f64 = 1e-9;

pub fn catalog_spec(name: &str) -> Result<GroupSpec> {
    let json = match name {
        "g4" => G4_JSON,
        "g8" => G8_JSON,
        "g16" => G16_JSON,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown catalog entry {name:?}"
            )))
        }
    };
    GroupSpec::from_json(json)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relations {
    pub k: u32,
    pub a_power: f64,
    pub b_power: f64,
    pub braid: f64,
}

impl Relations {
    /// Largest entrywise residual of `A^k - I`, `B^k - I`, `ABA - BAB`.
    pub fn max_residual(&self) -> f64 {
        self.a_power.max(self.b_power).max(self.braid)
    }

    pub fn hold(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn relations(a: &CMatrix, b: &CMatrix, k: u32) -> Result<Relations> {
    let id = CMatrix::identity(a.rows());
    let pow = |m: &CMatrix| -> Result<CMatrix> {
        let mut acc = id.clone();
        for _ in 0..k {
            acc = mat_mul(&acc, m)?;
        }
        Ok(acc)
    };
    let aba = mat_mul(&mat_mul(a, b)?, a)?;
    let bab = mat_mul(&mat_mul(b, a)?, b)?;
    Ok(Relations {
        k,
        a_power: pow(a)?.max_abs_diff(&id),
        b_power: pow(b)?.max_abs_diff(&id),
        braid: aba.max_abs_diff(&bab),
    })
}

pub struct CatalogEntry {
    pub name: String,
    pub k: u32,
    pub spec: GroupSpec,
    pub group: FiniteUnitaryGroup,
    pub relations: Relations,
}

impl CatalogEntry {
    pub fn a(&self) -> ElemId {
        self.group.generator(0)
    }

    pub fn b(&self) -> ElemId {
        self.group.generator(1)
    }

    pub fn vector(&self, name: &str) -> Result<CVector> {
        self.spec
            .vector(name)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no vector {name:?}", self.name)))
    }

    pub fn expected_order(&self) -> u128 {
        expected_order(self.k)
    }
}

pub fn expected_order(k: u32) -> u128 {
    match k {
        3 => 24,
        4 => 96,
        5 => 600,
        _ => 0,
    }
}

/// Loads a catalog entry and checks its relations and order.
pub fn load(name: &str) -> Result<CatalogEntry> {
    let spec = catalog_spec(name)?;
    let k = match name {
        "g4" => 3,
        "g8" => 4,
        _ => 5,
    };
    if spec.generators.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "{name}: expected two generators"
        )));
    }
    let rel = relations(&spec.generators[0], &spec.generators[1], k)?;
    if !rel.hold(RELATION_TOL) {
        return Err(Error::InvalidParameter(format!(
            "{name}: relations fail (residual {:.3e})",
            rel.max_residual()
        )));
    }
    let group = spec.build(DEFAULT_TOL, DEFAULT_MAX_ORDER)?;
    if group.order() != expected_order(k) {
        return Err(Error::Mismatch(format!(
            "{name}: closure has order {}, expected {}",
            group.order(),
            expected_order(k)
        )));
    }
    Ok(CatalogEntry {
        name: name.to_string(),
        k,
        spec,
        group,
        relations: rel,
    })
}

pub fn g4() -> Result<CatalogEntry> {
    load("g4")
}

/// `k = 3` is the tetrahedral entry itself.
pub fn braid_group(k: u32) -> Result<CatalogEntry> {
    match k {
        3 => load("g4"),
        4 => load("g8"),
        5 => load("g16"),
        _ => Err(Error::InvalidParameter(format!(
            "no catalog entry for k = {k}"
        ))),
    }
}

/// Reflections `A = diag(1, z)` and `B = I + (z - 1) v v^H` with
/// `z = e^{2 pi i j/k}`, `v = (sqrt(1-c), sqrt(c))`, `c = 1/|1 - z|^2`.
/// The choice of `c` is what makes `ABA = BAB`.
pub fn rank_one_pair(k: u32, j: u32) -> Result<(CMatrix, CMatrix)> {
    let z = root_of_unity(j as i64, k);
    let c = 1.0 / (z - c64(1.0, 0.0)).norm_sqr();
    if !(c <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "no rank-one braid pair for k = {k}, j = {j}"
        )));
    }
    let v = [c64((1.0 - c).sqrt(), 0.0), c64(c.sqrt(), 0.0)];
    let a = CMatrix::diag(&[c64(1.0, 0.0), z]);
    let mut b = CMatrix::identity(2);
    for r in 0..2 {
        for s in 0..2 {
            b.set(r, s, b.get(r, s) + (z - c64(1.0, 0.0)) * v[r] * v[s].conj());
        }
    }
    Ok((a, b))
}

/// Matrices as written for the tetrahedral group.
pub fn g4_matrices() -> (CMatrix, CMatrix) {
    let s3 = 3f64.sqrt();
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let a = CMatrix::diag(&[c64(1.0, 0.0), c64(-0.5, s3 / 2.0)]);
    let off = c64(1.0 / s2, -1.0 / s6);
    let b = CMatrix::from_rows(vec![
        vec![c64(0.0, 1.0 / s3), off],
        vec![off, c64(0.5, 1.0 / (2.0 * s3))],
    ])
    .expect("2x2");
    (a, b)
}

/// `(sqrt((5 - sqrt5)/10), sqrt((5 + sqrt5)/10) e^{i pi/3})`: unit, nonreal,
/// moved equally far by `A^-1` and `B^-1` in the octahedral entry.
pub fn g8_balancing_vector() -> CVector {
    let r5 = 5f64.sqrt();
    CVector::new(vec![
        c64(((5.0 - r5) / 10.0).sqrt(), 0.0),
        C64::from_polar(((5.0 + r5) / 10.0).sqrt(), std::f64::consts::PI / 3.0),
    ])
}

/// Two-stage chain `{I} < H < G`: stage 1 lists `H` (identity first), stage 2
/// takes the closest member of each left coset of `H`.
pub struct TwoStageChain {
    pub h: Subgroup<ElemId>,
    pub chain: SubgroupChain<ElemId>,
    pub ties: Vec<TieReport<ElemId>>,
}

pub fn two_stage_chain(
    group: &FiniteUnitaryGroup,
    h_generators: &[ElemId],
    x0: &CVector,
    tol: f64,
) -> Result<TwoStageChain> {
    let h = Subgroup::generated(group, h_generators);
    let whole = Subgroup::whole(group)?;
    let trivial = Subgroup::trivial(group);
    let first = closest_coset_leaders(group, &h, &trivial, x0, tol)?;
    let second = closest_coset_leaders(group, &whole, &h, x0, tol)?;
    let chain = SubgroupChain::new(vec![
        Stage {
            leaders: first.leaders,
            generators: h_generators.to_vec(),
        },
        Stage {
            leaders: second.leaders,
            generators: group.generators().to_vec(),
        },
    ])?;
    Ok(TwoStageChain {
        h,
        chain,
        ties: second.ties,
    })
}

impl TwoStageChain {
    pub fn check_minimal(
        &self,
        group: &FiniteUnitaryGroup,
        x0: &CVector,
        tol: f64,
    ) -> Result<CheckReport> {
        check_minimal(group, self.chain.leaders(2), &self.h, x0, tol)
    }
}

/// `C = B A^2 B`, `D = C A` and `C A^2`, with `||g x0 - x0||` for each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct G4CosetTie {
    pub labels: [String; 3],
    pub distances: [f64; 3],
}

impl G4CosetTie {
    /// `C` and `D` tie strictly below `C A^2`.
    pub fn holds(&self, tol: f64) -> bool {
        let [c, d, ca2] = self.distances;
        (c - d).abs() <= tol && c + tol < ca2
    }
}

pub fn g4_coset_tie(entry: &CatalogEntry, x0: &CVector) -> G4CosetTie {
    let g = &entry.group;
    let (a, b) = (entry.a(), entry.b());
    let a2 = g.compose(&a, &a);
    let c = g.product(&[b, a2, b]);
    let d = g.compose(&c, &a);
    let ca2 = g.compose(&c, &a2);
    let elems = [c, d, ca2];
    G4CosetTie {
        labels: elems.map(|e| g.label(&e)),
        distances: elems.map(|e| displacement(g, &e, x0)),
    }
}

/// `{I} < <A> < G4` with `x0`.
pub fn g4_natural_chain(entry: &CatalogEntry, x0: &CVector) -> Result<TwoStageChain> {
    two_stage_chain(&entry.group, &[entry.a()], x0, DEFAULT_TOL)
}

/// `{I} < <C> < G4`, `C = B A^2 B`, with `x0`.
pub fn g4_c_chain(entry: &CatalogEntry, x0: &CVector) -> Result<TwoStageChain> {
    let g = &entry.group;
    let a2 = g.compose(&entry.a(), &entry.a());
    let c = g.product(&[entry.b(), a2, entry.b()]);
    two_stage_chain(g, &[c], x0, DEFAULT_TOL)
}

/// The icosahedral words `W1 = B^3 A^4 B^3` and `W2 = W1 A^4`. One of them is
/// scalar and the other diagonal with conjugate entries; since both act on
/// every unit vector by phases `c`, `c` or `c`, `conj(c)`, they sit in the same
/// coset of `<A>` at equal distance from every `x0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IcosahedralTie {
    pub w1: CMatrix,
    pub w2: CMatrix,
    /// 1 or 2, the scalar word; 0 if neither is scalar.
    pub scalar_word: u8,
    pub c: C64,
    /// `c = e^{i pi/5}` and the other word is `diag(c, conj(c))`.
    pub c_is_fifth_root: bool,
}

pub fn icosahedral_tie(entry: &CatalogEntry) -> Result<IcosahedralTie> {
    let g = &entry.group;
    let (a, b) = (entry.a(), entry.b());
    let a4 = g.power(&a, 4);
    let b3 = g.power(&b, 3);
    let w1 = g.product(&[b3, a4, b3]);
    let w2 = g.compose(&w1, &a4);
    let (m1, m2) = (g.to_matrix(&w1), g.to_matrix(&w2));
    let scalar = |m: &CMatrix| {
        m.get(0, 1).norm() < RELATION_TOL
            && m.get(1, 0).norm() < RELATION_TOL
            && (m.get(0, 0) - m.get(1, 1)).norm() < RELATION_TOL
    };
    let (scalar_word, s, other) = if scalar(&m1) {
        (1, &m1, &m2)
    } else if scalar(&m2) {
        (2, &m2, &m1)
    } else {
        (0, &m1, &m2)
    };
    let c = s.get(0, 0);
    let target = C64::from_polar(1.0, std::f64::consts::PI / 5.0);
    let diag = CMatrix::diag(&[c, c.conj()]);
    Ok(IcosahedralTie {
        c_is_fifth_root: scalar_word != 0
            && (c - target).norm() < RELATION_TOL
            && other.approx_eq(&diag, RELATION_TOL),
        w1: m1,
        w2: m2,
        scalar_word,
        c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::is_unitary;

    #[test]
    fn catalog_loads_with_expected_orders() {
        for (name, order) in [("g4", 24), ("g8", 96), ("g16", 600)] {
            let e = load(name).unwrap();
            assert_eq!(e.group.order(), order);
            assert!(e.relations.hold(1e-12), "{name}: {:?}", e.relations);
            for m in &e.spec.generators {
                assert!(is_unitary(m, 1e-12));
            }
            assert!(e.spec.source.as_deref().is_some_and(|s| !s.is_empty()));
        }
        assert!(load("g25").is_err());
        assert!(braid_group(6).is_err());
    }

    #[test]
    fn k3_is_g4() {
        let a = braid_group(3).unwrap();
        let b = g4().unwrap();
        assert_eq!(a.spec, b.spec);
        let (ma, mb) = g4_matrices();
        assert!(ma.approx_eq(&b.spec.generators[0], 1e-12));
        assert!(mb.approx_eq(&b.spec.generators[1], 1e-12));
    }

    #[test]
    fn catalog_matches_rank_one_construction() {
        for (k, j) in [(4, 1), (5, 4)] {
            let e = braid_group(k).unwrap();
            let (a, b) = rank_one_pair(k, j).unwrap();
            assert!(a.approx_eq(&e.spec.generators[0], 1e-12));
            assert!(b.approx_eq(&e.spec.generators[1], 1e-12));
        }
        // the same construction at k = 3 is another copy of the tetrahedral group
        let (a, b) = rank_one_pair(3, 1).unwrap();
        assert!(relations(&a, &b, 3).unwrap().hold(1e-12));
        let g = FiniteUnitaryGroup::generate(&[a, b], DEFAULT_TOL, 1000).unwrap();
        assert_eq!(g.order(), 24);
        assert!(rank_one_pair(7, 1).is_err());
    }

    #[test]
    fn g4_natural_chain_has_no_minimal_leaders() {
        let e = g4().unwrap();
        let x0 = e.vector("x0").unwrap();
        assert!((x0.norm() - 1.0).abs() < 1e-12);
        let tie = g4_coset_tie(&e, &x0);
        assert!(tie.holds(1e-9), "{tie:?}");
        let ch = g4_natural_chain(&e, &x0).unwrap();
        assert_eq!(ch.chain.indices(), vec![3, 8]);
        assert!(!ch.ties.is_empty());
        let report = ch.check_minimal(&e.group, &x0, DEFAULT_TOL).unwrap();
        assert!(!report.passed());
        // C^2 = A^2
        let g = &e.group;
        let a2 = g.compose(&e.a(), &e.a());
        let c = g.product(&[e.b(), a2, e.b()]);
        assert_eq!(g.compose(&c, &c), a2);
    }

    #[test]
    fn g4_c_chain_ties_then_resolves() {
        let e = g4().unwrap();
        let g = &e.group;
        let x0 = e.vector("x0").unwrap();
        let y0 = e.vector("y0").unwrap();
        let b = e.b();
        let b2 = g.compose(&b, &b);
        let a2b2 = g.product(&[e.a(), e.a(), b, b]);

        let with_x = g4_c_chain(&e, &x0).unwrap();
        assert_eq!(with_x.h.order(), 6);
        assert_eq!(with_x.chain.indices(), vec![6, 4]);
        assert!(!with_x.ties.is_empty());

        let with_y = g4_c_chain(&e, &y0).unwrap();
        assert!(with_y.ties.is_empty(), "{:?}", with_y.ties);
        let leaders = with_y.chain.leaders(2);
        assert_eq!(leaders[0], g.identity());
        for want in [b, b2, a2b2] {
            assert!(leaders.contains(&want), "{}", g.label(&want));
        }
        assert!(with_y.check_minimal(g, &y0, DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn g8_balanced_vector_gives_minimal_leaders() {
        let e = braid_group(4).unwrap();
        let g = &e.group;
        let x0 = g8_balancing_vector();
        assert!((x0.norm() - 1.0).abs() < 1e-12);
        assert!(x0[1].im.abs() > 0.1);
        assert!(crate::numerics::distance(&e.vector("x0").unwrap(), &x0).unwrap() < 1e-12);
        let da = displacement(g, &g.inverse(&e.a()), &x0);
        let db = displacement(g, &g.inverse(&e.b()), &x0);
        assert!((da - db).abs() < 1e-12, "{da} vs {db}");
        let ch = two_stage_chain(g, &[e.a()], &x0, DEFAULT_TOL).unwrap();
        assert_eq!(ch.chain.indices(), vec![4, 24]);
        assert!(ch.ties.is_empty());
        assert!(ch.check_minimal(g, &x0, DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn icosahedral_words_tie() {
        let e = braid_group(5).unwrap();
        let t = icosahedral_tie(&e).unwrap();
        assert_ne!(t.scalar_word, 0);
        assert!(t.c_is_fifth_root, "{t:?}");
        // equal displacement for any x0, so the coset of <A> has no unique closest member
        let g = &e.group;
        let a4 = g.power(&e.a(), 4);
        let b3 = g.power(&e.b(), 3);
        let w1 = g.product(&[b3, a4, b3]);
        let w2 = g.compose(&w1, &a4);
        for x0 in [g8_balancing_vector(), CVector::basis(2, 0)] {
            let d1 = displacement(g, &w1, &x0);
            let d2 = displacement(g, &w2, &x0);
            assert!((d1 - d2).abs() < 1e-12);
        }
    }
}
