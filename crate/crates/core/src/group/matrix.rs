use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GroupAction, ENUMERATION_LIMIT};
use crate::error::{Error, Result};
use crate::numerics::{is_unitary, mat_mul, CMatrix, CVector, C64, DEFAULT_TOL};

pub const DEFAULT_MAX_ORDER: usize = 10_000;

// products of the closure are cached when the table fits in this many entries
const TABLE_LIMIT: usize = 4_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub u32);

impl ElemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for ElemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// JSON description of a matrix group.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generators: Vec<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Named vectors shipped alongside the group, e.g. initial vectors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<NamedVector>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NamedVector {
    pub name: String,
    pub vector: CVector,
}

impl GroupSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn vector(&self, name: &str) -> Option<&CVector> {
        self.vectors
            .iter()
            .find(|v| v.name == name)
            .map(|v| &v.vector)
    }

    pub fn build(&self, tol: f64, max_order: usize) -> Result<FiniteUnitaryGroup> {
        let mut g = FiniteUnitaryGroup::generate(&self.generators, tol, max_order)?;
        if let Some(names) = &self.generator_names {
            g.set_generator_names(names.clone())?;
        }
        g.name = self.name.clone();
        Ok(g)
    }
}

/// Nearest-neighbor index over matrices: a fixed linear projection to the
/// real line, bucketed. Matching is by max entrywise distance <= tol.
#[derive(Clone, Debug)]
struct MatrixIndex {
    weights: Vec<f64>,
    width: f64,
    buckets: HashMap<i64, Vec<u32>>,
}

impl MatrixIndex {
    fn new(entries: usize, tol: f64) -> Self {
        // deterministic, irrational-ish weights
        let weights: Vec<f64> = (0..2 * entries)
            .map(|i| ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract() + 0.25)
            .collect();
        let spread = tol * weights.iter().map(|w| w.abs()).sum::<f64>();
        MatrixIndex {
            weights,
            width: (spread * 64.0).max(1e-6),
            buckets: HashMap::new(),
        }
    }

    fn key(&self, m: &CMatrix) -> f64 {
        m.as_slice()
            .iter()
            .enumerate()
            .map(|(i, z)| self.weights[2 * i] * z.re + self.weights[2 * i + 1] * z.im)
            .sum()
    }

    fn bucket(&self, key: f64) -> i64 {
        (key / self.width).floor() as i64
    }

    fn insert(&mut self, m: &CMatrix, id: u32) {
        let b = self.bucket(self.key(m));
        self.buckets.entry(b).or_default().push(id);
    }

    fn find(&self, m: &CMatrix, elements: &[CMatrix], tol: f64) -> Option<u32> {
        let b = self.bucket(self.key(m));
        for bb in [b, b - 1, b + 1] {
            if let Some(ids) = self.buckets.get(&bb) {
                for &id in ids {
                    if elements[id as usize].approx_eq(m, tol) {
                        return Some(id);
                    }
                }
            }
        }
        None
    }
}

/// A finite group of unitary matrices enumerated by breadth-first closure.
#[derive(Clone, Debug)]
pub struct FiniteUnitaryGroup {
    name: Option<String>,
    dim: usize,
    tol: f64,
    generators: Vec<ElemId>,
    generator_names: Vec<String>,
    elements: Vec<CMatrix>,
    // shortest word (generator indices, left to right) for each element
    words: Vec<Vec<u16>>,
    inverses: Vec<u32>,
    table: Option<Vec<u32>>,
    index: MatrixIndex,
}

impl FiniteUnitaryGroup {
    pub fn generate(generators: &[CMatrix], tol: f64, max_order: usize) -> Result<Self> {
        let first = generators.first().ok_or(Error::Empty("generator list"))?;
        let dim = first.rows();
        for (i, g) in generators.iter().enumerate() {
            if !g.is_square() {
                return Err(Error::NotSquare {
                    rows: g.rows(),
                    cols: g.cols(),
                });
            }
            if g.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.rows(),
                });
            }
            if !is_unitary(g, tol) {
                return Err(Error::NotUnitary { index: i });
            }
        }

        let mut index = MatrixIndex::new(dim * dim, tol);
        let mut elements = vec![CMatrix::identity(dim)];
        let mut words: Vec<Vec<u16>> = vec![vec![]];
        index.insert(&elements[0], 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let p = mat_mul(&elements[i], g)?;
                if index.find(&p, &elements, tol).is_none() {
                    if elements.len() >= max_order {
                        return Err(Error::OrderLimit { limit: max_order });
                    }
                    let id = elements.len() as u32;
                    index.insert(&p, id);
                    elements.push(p);
                    let mut w = words[i].clone();
                    w.push(gi as u16);
                    words.push(w);
                    queue.push_back(id as usize);
                }
            }
        }

        let lookup = |m: &CMatrix| index.find(m, &elements, tol.max(DEFAULT_TOL) * 16.0);
        let mut inverses = Vec::with_capacity(elements.len());
        for m in &elements {
            let inv = lookup(&m.conj_transpose()).ok_or_else(|| {
                Error::InvalidParameter("closure is not closed under inverse".into())
            })?;
            inverses.push(inv);
        }
        let gen_ids = generators
            .iter()
            .map(|g| lookup(g).map(ElemId))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidParameter("generator missing from closure".into()))?;

        let n = elements.len();
        let table = if n * n <= TABLE_LIMIT {
            let mut t = Vec::with_capacity(n * n);
            for a in &elements {
                for b in &elements {
                    let p = mat_mul(a, b)?;
                    t.push(lookup(&p).ok_or_else(|| {
                        Error::InvalidParameter("product escaped the closure".into())
                    })?);
                }
            }
            Some(t)
        } else {
            None
        };

        let generator_names = default_names(generators.len());
        Ok(FiniteUnitaryGroup {
            name: None,
            dim,
            tol,
            generators: gen_ids,
            generator_names,
            elements,
            words,
            inverses,
            table,
            index,
        })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        spec.build(DEFAULT_TOL, DEFAULT_MAX_ORDER)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn set_generator_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.generators.len() {
            return Err(Error::InvalidParameter(format!(
                "{} generator names for {} generators",
                names.len(),
                self.generators.len()
            )));
        }
        if names
            .iter()
            .any(|n| n.is_empty() || n.contains('.') || n == "I")
        {
            return Err(Error::InvalidParameter("bad generator name".into()));
        }
        self.generator_names = names;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn generators(&self) -> &[ElemId] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> ElemId {
        self.generators[i]
    }

    pub fn matrix(&self, id: ElemId) -> &CMatrix {
        &self.elements[id.index()]
    }

    /// Id of the element within tolerance of `m`.
    pub fn lookup(&self, m: &CMatrix) -> Option<ElemId> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return None;
        }
        self.index.find(m, &self.elements, self.tol).map(ElemId)
    }

    /// Product of generators read left to right.
    pub fn word(&self, gens: &[usize]) -> ElemId {
        gens.iter()
            .fold(ElemId(0), |acc, &g| self.compose(&acc, &self.generators[g]))
    }

    /// Shortest word found by the closure.
    pub fn word_of(&self, id: ElemId) -> &[u16] {
        &self.words[id.index()]
    }

    pub fn element_order(&self, id: ElemId) -> usize {
        let mut acc = id;
        let mut k = 1;
        while acc != ElemId(0) {
            acc = self.compose(&acc, &id);
            k += 1;
        }
        k
    }
}

fn default_names(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect()
    } else {
        (0..n).map(|i| format!("s{i}")).collect()
    }
}

impl GroupAction for FiniteUnitaryGroup {
    type Elem = ElemId;

    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> ElemId {
        ElemId(0)
    }

    fn compose(&self, a: &ElemId, b: &ElemId) -> ElemId {
        match &self.table {
            Some(t) => ElemId(t[a.index() * self.elements.len() + b.index()]),
            None => {
                let p = mat_mul(self.matrix(*a), self.matrix(*b)).expect("square matrices");
                self.index
                    .find(&p, &self.elements, self.tol.max(DEFAULT_TOL) * 16.0)
                    .map(ElemId)
                    .expect("product of group elements lies in the group")
            }
        }
    }

    fn inverse(&self, a: &ElemId) -> ElemId {
        ElemId(self.inverses[a.index()])
    }

    fn act_into(&self, a: &ElemId, v: &[C64], out: &mut [C64]) {
        self.matrix(*a).apply_slice(v, out);
    }

    fn order(&self) -> u128 {
        self.elements.len() as u128
    }

    fn elements(&self) -> Result<Vec<ElemId>> {
        if self.order() > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                order: self.order(),
                limit: ENUMERATION_LIMIT,
            });
        }
        Ok((0..self.elements.len() as u32).map(ElemId).collect())
    }

    /// Shortest word, generators joined by `.`; `I` for the identity.
    fn label(&self, a: &ElemId) -> String {
        let w = self.word_of(*a);
        if w.is_empty() {
            return "I".to_string();
        }
        w.iter()
            .map(|&g| self.generator_names[g as usize].as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    fn parse_label(&self, s: &str) -> Option<ElemId> {
        let s = s.trim();
        if s == "I" {
            return Some(ElemId(0));
        }
        let mut acc = ElemId(0);
        for part in s.split('.') {
            let g = self.generator_names.iter().position(|n| n == part)?;
            acc = self.compose(&acc, &self.generators[g]);
        }
        Some(acc)
    }

    fn to_matrix(&self, a: &ElemId) -> CMatrix {
        self.matrix(*a).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c64, root_of_unity};

    fn cyclic(r: u32) -> FiniteUnitaryGroup {
        FiniteUnitaryGroup::generate(&[CMatrix::diag(&[root_of_unity(1, r)])], DEFAULT_TOL, 100)
            .unwrap()
    }

    #[test]
    fn trivial_and_cyclic() {
        let g = FiniteUnitaryGroup::generate(&[CMatrix::identity(2)], DEFAULT_TOL, 10).unwrap();
        assert_eq!(g.len(), 1);
        let c = cyclic(7);
        assert_eq!(c.len(), 7);
        let a = c.generator(0);
        assert_eq!(c.element_order(a), 7);
        assert_eq!(c.compose(&a, &c.inverse(&a)), c.identity());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            FiniteUnitaryGroup::generate(&[], DEFAULT_TOL, 10),
            Err(Error::Empty(_))
        ));
        let twice = CMatrix::identity(2).scale(c64(2.0, 0.0));
        assert!(matches!(
            FiniteUnitaryGroup::generate(&[twice], DEFAULT_TOL, 10),
            Err(Error::NotUnitary { index: 0 })
        ));
        // irrational rotation has infinite order
        let rot = CMatrix::diag(&[C64::from_polar(1.0, 1.0)]);
        assert!(matches!(
            FiniteUnitaryGroup::generate(&[rot], DEFAULT_TOL, 500),
            Err(Error::OrderLimit { limit: 500 })
        ));
    }

    #[test]
    fn inverse_and_identity() {
        let c = cyclic(12);
        for g in c.elements().unwrap() {
            let p = mat_mul(c.matrix(g), c.matrix(c.inverse(&g))).unwrap();
            assert!(p.approx_eq(&CMatrix::identity(1), DEFAULT_TOL));
        }
    }

    #[test]
    fn labels_round_trip() {
        let c = cyclic(5);
        for g in c.elements().unwrap() {
            assert_eq!(c.parse_label(&c.label(&g)), Some(g));
        }
        assert_eq!(c.label(&c.identity()), "I");
        assert_eq!(c.parse_label("Z"), None);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = GroupSpec {
            name: Some("C4".into()),
            generators: vec![CMatrix::diag(&[c64(0.0, 1.0)])],
            generator_names: Some(vec!["a".into()]),
            source: None,
            vectors: vec![],
        };
        let s = spec.to_json().unwrap();
        let back = GroupSpec::from_json(&s).unwrap();
        assert_eq!(back, spec);
        let g = FiniteUnitaryGroup::from_spec(&back).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.label(&g.generator(0)), "a");
        let minimal: GroupSpec = serde_json::from_str(r#"{"generators": [[[[0,1]]]]}"#).unwrap();
        assert_eq!(minimal.name, None);
    }
}
