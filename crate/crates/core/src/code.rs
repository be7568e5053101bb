//! Group codes: the orbit of a unit vector under a finite group action,
//! with its minimum distance, nearest neighbors and the region predicates
//! used by the correctness checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::group::{check_dim, moved_dist, stabilizer, GroupAction, Subgroup};
use crate::numerics::{c64, dist, CVector, C64, DEFAULT_TOL};

/// Unit vector `(1, 1+b, ..., 1+(n-1)b)/norm` with `b = sqrt(1 - cos(2 pi/r))`.
pub fn standard_initial_vector(r: u32, n: usize) -> Result<CVector> {
    if r < 2 || n < 1 {
        return Err(Error::InvalidParameter(format!("G({r},1,{n})")));
    }
    let beta = standard_beta(r);
    let raw: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * beta).collect();
    Ok(CVector::from_real(&raw).normalized().expect("nonzero"))
}

pub fn standard_beta(r: u32) -> f64 {
    (1.0 - (std::f64::consts::TAU / r as f64).cos()).sqrt()
}

/// `sqrt(2) b / |(1, 1+b, ...)|`, the predicted minimum distance.
pub fn predicted_dmin(r: u32, n: usize) -> f64 {
    let beta = standard_beta(r);
    let norm = (0..n)
        .map(|i| (1.0 + i as f64 * beta).powi(2))
        .sum::<f64>()
        .sqrt();
    2f64.sqrt() * beta / norm
}

pub struct Code<A: GroupAction> {
    action: A,
    x0: CVector,
    tol: f64,
    elements: Vec<A::Elem>,
    // codewords[i] = elements[i]^-1 x0
    codewords: Vec<CVector>,
    // displacement[i] = |elements[i] x0 - x0|
    displacement: Vec<f64>,
    stabilizer: Subgroup<A::Elem>,
    dmin: Option<f64>,
}

impl<A: GroupAction> Code<A> {
    pub fn new(action: A, x0: CVector) -> Result<Self> {
        Self::with_tol(action, x0, DEFAULT_TOL)
    }

    pub fn with_tol(action: A, x0: CVector, tol: f64) -> Result<Self> {
        check_dim(&action, &x0)?;
        if !x0.is_unit(tol.max(1e-12) * 10.0) {
            return Err(Error::NotUnit(x0.norm()));
        }
        let elements = action.elements()?;
        let mut scratch = vec![c64(0.0, 0.0); action.dim()];
        let mut codewords = Vec::with_capacity(elements.len());
        let mut displacement = Vec::with_capacity(elements.len());
        for g in &elements {
            codewords.push(action.act(&action.inverse(g), &x0));
            displacement.push(moved_dist(
                &action,
                g,
                x0.as_slice(),
                x0.as_slice(),
                &mut scratch,
            ));
        }
        let stab: Vec<A::Elem> = elements
            .iter()
            .zip(&displacement)
            .filter(|(_, &d)| d <= tol)
            .map(|(g, _)| g.clone())
            .collect();
        let dmin = displacement
            .iter()
            .filter(|&&d| d > tol)
            .cloned()
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))));
        Ok(Code {
            action,
            x0,
            tol,
            elements,
            codewords,
            displacement,
            stabilizer: Subgroup::from_elements_unchecked(stab),
            dmin,
        })
    }

    pub fn action(&self) -> &A {
        &self.action
    }

    pub fn x0(&self) -> &CVector {
        &self.x0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn elements(&self) -> &[A::Elem] {
        &self.elements
    }

    pub fn stabilizer(&self) -> &Subgroup<A::Elem> {
        &self.stabilizer
    }

    pub fn has_full_orbit(&self) -> bool {
        self.stabilizer.order() == 1
    }

    /// `g^-1 x0`.
    pub fn encode(&self, g: &A::Elem) -> CVector {
        self.action.act(&self.action.inverse(g), &self.x0)
    }

    /// Precomputed codeword of the `i`-th element.
    pub fn codeword(&self, i: usize) -> &CVector {
        &self.codewords[i]
    }

    /// Distinct orbit points (one per right coset `Sg`).
    pub fn orbit(&self) -> Vec<CVector> {
        let mut out: Vec<CVector> = Vec::new();
        'next: for w in &self.codewords {
            for o in &out {
                if dist(o.as_slice(), w.as_slice()) <= self.tol {
                    continue 'next;
                }
            }
            out.push(w.clone());
        }
        out
    }

    pub fn dmin(&self) -> Result<f64> {
        self.dmin.ok_or(Error::TrivialOrbit)
    }

    /// Codewords at distance `d_min` from `x0`, and the elements `a` with
    /// `|a x0 - x0| = d_min`.
    pub fn nearest_neighbors(&self) -> Result<(Vec<CVector>, Vec<A::Elem>)> {
        let d = self.dmin()?;
        let mut points = Vec::new();
        let mut elems = Vec::new();
        for (g, &dg) in self.elements.iter().zip(&self.displacement) {
            if (dg - d).abs() <= self.tol {
                elems.push(g.clone());
                let p = self.action.act(g, &self.x0);
                if !points
                    .iter()
                    .any(|q: &CVector| dist(q.as_slice(), p.as_slice()) <= self.tol)
                {
                    points.push(p);
                }
            }
        }
        Ok((points, elems))
    }

    /// True when `a` and `g` give the same codeword.
    pub fn same_codeword(&self, a: &A::Elem, g: &A::Elem) -> bool {
        let ga = self.encode(a);
        let gg = self.encode(g);
        dist(ga.as_slice(), gg.as_slice()) <= self.tol
    }

    /// `min over a not in Sg of |a x - x0|` minus `|g x - x0|`; membership in
    /// `DR(g)` is `margin > tol`.
    pub fn decoding_region_margin(&self, x: &CVector, g: &A::Elem) -> Result<f64> {
        check_dim(&self.action, x)?;
        let mut s = vec![c64(0.0, 0.0); self.action.dim()];
        let target = self.encode(g);
        let own = moved_dist(&self.action, g, x.as_slice(), self.x0.as_slice(), &mut s);
        let mut best = f64::INFINITY;
        for (a, w) in self.elements.iter().zip(&self.codewords) {
            if dist(w.as_slice(), target.as_slice()) <= self.tol {
                continue;
            }
            best = best.min(moved_dist(
                &self.action,
                a,
                x.as_slice(),
                self.x0.as_slice(),
                &mut s,
            ));
        }
        Ok(best - own)
    }

    pub fn in_decoding_region(&self, x: &CVector, g: &A::Elem) -> Result<bool> {
        Ok(self.decoding_region_margin(x, g)? > self.tol)
    }

    /// Random point `g^-1 x0 + n` with `|n| < radius_factor * d_min`, `g`
    /// uniform.
    pub fn sample_near_codeword<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        radius_factor: f64,
    ) -> CVector {
        let i = rng.gen_range(0..self.elements.len());
        let radius = radius_factor * self.dmin.unwrap_or(1.0) * rng.gen::<f64>();
        let n = random_direction(self.action.dim(), rng).scale(c64(radius, 0.0));
        &self.codewords[i] + &n
    }

    /// Point of `FR(H)`: a noisy codeword moved by the element of `H`
    /// bringing it closest to `x0`.
    pub fn sample_fundamental_region<R: Rng + ?Sized>(
        &self,
        region: &FundamentalRegion<'_, A>,
        rng: &mut R,
        radius_factor: f64,
    ) -> CVector {
        let x = self.sample_near_codeword(rng, radius_factor);
        region.project(&x)
    }
}

/// Uniform direction on the unit sphere of `C^dim`.
pub fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::new(
            (0..dim)
                .map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// `FR(H)` for a fixed `x0`, stored as the non-stabilizing elements of `H`.
pub struct FundamentalRegion<'a, A: GroupAction> {
    action: &'a A,
    x0: CVector,
    members: Vec<A::Elem>,
    movers: Vec<A::Elem>,
    tol: f64,
}

impl<'a, A: GroupAction> FundamentalRegion<'a, A> {
    pub fn new(action: &'a A, h: &Subgroup<A::Elem>, x0: &CVector, tol: f64) -> Result<Self> {
        let stab = stabilizer(action, h, x0, tol)?;
        let movers = h
            .elements()
            .iter()
            .filter(|e| !stab.contains(e))
            .cloned()
            .collect();
        Ok(FundamentalRegion {
            action,
            x0: x0.clone(),
            members: h.elements().to_vec(),
            movers,
            tol,
        })
    }

    /// `min over h in H - Stab of |h x - x0|` minus `|x - x0|`.
    pub fn margin(&self, x: &CVector) -> f64 {
        let mut s = vec![c64(0.0, 0.0); self.action.dim()];
        self.margin_with(x.as_slice(), &mut s)
    }

    pub(crate) fn margin_with(&self, x: &[C64], scratch: &mut [C64]) -> f64 {
        let own = dist(x, self.x0.as_slice());
        let mut best = f64::INFINITY;
        for h in &self.movers {
            best = best.min(moved_dist(self.action, h, x, self.x0.as_slice(), scratch));
            if best - own < -self.tol {
                break;
            }
        }
        best - own
    }

    pub fn contains(&self, x: &CVector) -> bool {
        self.margin(x) > self.tol
    }

    /// `h x` for the first `h in H` minimizing `|h x - x0|`.
    pub fn project(&self, x: &CVector) -> CVector {
        let mut s = vec![c64(0.0, 0.0); self.action.dim()];
        let mut best = (f64::INFINITY, 0);
        for (i, h) in self.members.iter().enumerate() {
            let d = moved_dist(self.action, h, x.as_slice(), self.x0.as_slice(), &mut s);
            if d < best.0 - self.tol {
                best = (d, i);
            }
        }
        self.action.act(&self.members[best.1], x)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// Membership in `FR(H)` with strictness margin `tol`.
pub fn in_fundamental_region<A: GroupAction>(
    action: &A,
    x: &CVector,
    h: &Subgroup<A::Elem>,
    x0: &CVector,
    tol: f64,
) -> Result<bool> {
    check_dim(action, x)?;
    Ok(FundamentalRegion::new(action, h, x0, tol)?.contains(x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DminCell {
    pub r: u32,
    pub n: usize,
    pub dmin: f64,
}

/// Exhaustive minimum distance of `G(r,1,n)` codes from the standard vector.
pub fn dmin_table(rs: &[u32], ns: &[usize]) -> Result<Vec<DminCell>> {
    let mut out = Vec::new();
    for &r in rs {
        for &n in ns {
            let g = crate::gr1n::Gr1n::new(r, n)?;
            let x0 = standard_initial_vector(r, n)?;
            out.push(DminCell {
                r,
                n,
                dmin: orbit_dmin(&g, &x0, DEFAULT_TOL)?,
            });
        }
    }
    Ok(out)
}

/// Minimum displacement over the whole group without caching the orbit.
pub fn orbit_dmin<A: GroupAction>(action: &A, x0: &CVector, tol: f64) -> Result<f64> {
    check_dim(action, x0)?;
    let mut s = vec![c64(0.0, 0.0); action.dim()];
    action
        .elements()?
        .iter()
        .map(|g| moved_dist(action, g, x0.as_slice(), x0.as_slice(), &mut s))
        .filter(|&d| d > tol)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
        .ok_or(Error::TrivialOrbit)
}

/// Rows `r`, columns `n`, values rounded to four places.
pub fn dmin_table_csv(cells: &[DminCell]) -> String {
    let mut ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut rs: Vec<u32> = cells.iter().map(|c| c.r).collect();
    rs.sort_unstable();
    rs.dedup();
    let mut out = String::from("r");
    for n in &ns {
        out.push_str(&format!(",n={n}"));
    }
    out.push('\n');
    for r in rs {
        out.push_str(&r.to_string());
        for n in &ns {
            match cells.iter().find(|c| c.r == r && c.n == *n) {
                Some(c) => out.push_str(&format!(",{:.4}", c.dmin)),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gr1n::{Gr1n, MonomialElement};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn code(r: u32, n: usize) -> Code<Gr1n> {
        Code::new(
            Gr1n::new(r, n).unwrap(),
            standard_initial_vector(r, n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn standard_vector_examples() {
        let x = standard_initial_vector(4, 2).unwrap();
        let s5 = 5f64.sqrt();
        assert!((x[0].re - 1.0 / s5).abs() < 1e-12);
        assert!((x[1].re - 2.0 / s5).abs() < 1e-12);
        assert!((code(4, 2).dmin().unwrap() - 2f64.sqrt() / s5).abs() < 1e-12);
        assert!((standard_beta(3) - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((code(3, 2).dmin().unwrap() - 0.71).abs() < 0.005);
        assert!((code(8, 4).dmin().unwrap() - 0.20).abs() < 0.005);
    }

    #[test]
    fn exhaustive_dmin_matches_prediction() {
        for r in 2..=6 {
            for n in 1..=3 {
                let c = code(r, n);
                // brute force over all pairs of orbit points
                let pts = c.orbit();
                assert_eq!(pts.len() as u128, Gr1n::group_order(r, n));
                let mut best = f64::INFINITY;
                for i in 0..pts.len() {
                    for j in 0..i {
                        best = best.min(dist(pts[i].as_slice(), pts[j].as_slice()));
                    }
                }
                let pred = if n == 1 {
                    // only phases: |xi - 1|
                    (2.0 - 2.0 * (std::f64::consts::TAU / r as f64).cos()).sqrt()
                } else {
                    predicted_dmin(r, n)
                };
                assert!((best - c.dmin().unwrap()).abs() < 1e-12, "G({r},1,{n})");
                if n > 1 {
                    assert!((best - pred).abs() < 1e-12, "G({r},1,{n}) {best} {pred}");
                }
            }
        }
    }

    #[test]
    fn neighbors_of_standard_code() {
        for r in 3..=6 {
            for n in 1..=3 {
                let c = code(r, n);
                let g = c.action();
                let (_, elems) = c.nearest_neighbors().unwrap();
                let mut expect: HashSet<MonomialElement> = [g.a(1), g.a(1).inverse()].into();
                expect.extend((1..n).map(|j| g.b(j)));
                let got: HashSet<_> = elems.into_iter().collect();
                assert_eq!(got, expect, "G({r},1,{n})");
            }
        }
    }

    #[test]
    fn trivial_orbit_errors() {
        let g = Gr1n::new(3, 1).unwrap();
        let c = Code::new(g, CVector::from_real(&[1.0])).unwrap();
        assert!(c.dmin().is_ok());
        let triv = crate::group::FiniteUnitaryGroup::generate(
            &[crate::numerics::CMatrix::identity(1)],
            DEFAULT_TOL,
            4,
        )
        .unwrap();
        let c = Code::new(triv, CVector::from_real(&[1.0])).unwrap();
        assert!(matches!(c.dmin(), Err(Error::TrivialOrbit)));
        assert!(c.nearest_neighbors().is_err());
        let g = Gr1n::new(3, 2).unwrap();
        assert!(matches!(
            Code::new(g.clone(), CVector::from_real(&[1.0, 1.0])),
            Err(Error::NotUnit(_))
        ));
        assert!(Code::new(g, CVector::from_real(&[1.0])).is_err());
    }

    #[test]
    fn unit_scalar_and_translate_invariance() {
        let c = code(4, 3);
        let d = c.dmin().unwrap();
        let (_, n0) = c.nearest_neighbors().unwrap();
        let n0: HashSet<_> = n0.into_iter().collect();
        let phase = C64::from_polar(1.0, 0.7);
        let c2 = Code::new(c.action().clone(), c.x0().scale(phase)).unwrap();
        assert!((c2.dmin().unwrap() - d).abs() <= DEFAULT_TOL);
        let n2: HashSet<_> = c2.nearest_neighbors().unwrap().1.into_iter().collect();
        assert_eq!(n2, n0);
        let g = c.action();
        for h in g.elements().unwrap() {
            let ch = Code::new(g.clone(), g.act(&h, c.x0())).unwrap();
            assert!((ch.dmin().unwrap() - d).abs() <= DEFAULT_TOL);
            let got: HashSet<_> = ch.nearest_neighbors().unwrap().1.into_iter().collect();
            let hinv = h.inverse();
            let want: HashSet<_> = n0
                .iter()
                .map(|a| g.product(&[h.clone(), a.clone(), hinv.clone()]))
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn fundamental_region_facts() {
        let c = code(3, 2);
        let g = c.action();
        let all = Subgroup::whole(g).unwrap();
        let fr = FundamentalRegion::new(g, &all, c.x0(), DEFAULT_TOL).unwrap();
        assert!(fr.contains(c.x0()));
        let d = c.dmin().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let n = random_direction(2, &mut rng).scale(c64(0.4999 * d * rng.gen::<f64>(), 0.0));
            assert!(fr.contains(&(c.x0() + &n)));
        }
        for e in g.elements().unwrap().iter().skip(1) {
            assert!(!in_fundamental_region(g, &c.encode(e), &all, c.x0(), DEFAULT_TOL).unwrap());
        }
    }

    #[test]
    fn nested_regions() {
        let c = code(3, 3);
        let g = c.action();
        let chain = g.chain();
        let regions: Vec<_> = (0..=chain.len())
            .map(|k| {
                let h = chain.subgroup(g, k).unwrap();
                FundamentalRegion::new(g, &h, c.x0(), DEFAULT_TOL).unwrap()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let x = c.sample_near_codeword(&mut rng, 1.5);
            for k in 1..regions.len() {
                if regions[k].contains(&x) {
                    assert!(regions[k - 1].contains(&x));
                }
            }
        }
    }

    #[test]
    fn decoding_regions() {
        let c = code(3, 2);
        let g = c.action();
        let all = Subgroup::whole(g).unwrap();
        let fr = FundamentalRegion::new(g, &all, c.x0(), DEFAULT_TOL).unwrap();
        let d = c.dmin().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let elems = g.elements().unwrap();
        for _ in 0..300 {
            let gi = &elems[rng.gen_range(0..elems.len())];
            let n = random_direction(2, &mut rng).scale(c64(0.49 * d, 0.0));
            let x = &c.encode(gi) + &n;
            assert!(c.in_decoding_region(&x, gi).unwrap());
            // g DR(g) = FR(G)
            assert_eq!(
                fr.contains(&g.act(gi, &x)),
                c.in_decoding_region(&x, gi).unwrap()
            );
            // disjointness
            let hits = elems
                .iter()
                .filter(|e| c.in_decoding_region(&x, e).unwrap())
                .count();
            assert_eq!(hits, 1);
        }
        // midpoint between x0 and a neighbor lies in no decoding region
        let a = g.a(1);
        let w = c.encode(&a);
        let mid = (&w + c.x0()).scale(c64(0.5, 0.0));
        assert!(elems
            .iter()
            .all(|e| !c.in_decoding_region(&mid, e).unwrap()));
    }

    #[test]
    fn sampler_lands_in_region() {
        let c = code(4, 2);
        let g = c.action();
        let chain = g.chain();
        let h = chain.subgroup(g, 2).unwrap();
        let fr = FundamentalRegion::new(g, &h, c.x0(), DEFAULT_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inside = (0..500)
            .filter(|_| fr.margin(&c.sample_fundamental_region(&fr, &mut rng, 0.5)) >= -DEFAULT_TOL)
            .count();
        assert_eq!(inside, 500);
    }

    #[test]
    fn encode_is_inverse_action() {
        let c = code(3, 2);
        let g = c.action();
        assert_eq!(c.encode(&g.identity()), *c.x0());
        let a1 = g.a(1);
        let expect = g.act(&a1.inverse(), c.x0());
        assert_eq!(c.encode(&a1), expect);
        assert!((expect[0] - c.x0()[0] * crate::numerics::root_of_unity(-1, 3)).norm() < 1e-15);
        for e in g.elements().unwrap() {
            assert!((c.encode(&e).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let cells = dmin_table(&[3, 4], &[2, 3]).unwrap();
        let csv = dmin_table_csv(&cells);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,n=2,n=3");
        assert!(lines[1].starts_with("3,0.7"));
        assert_eq!(lines.len(), 3);
    }
}
