//! Finite labeled structures: points, an ordered ternary relation, total
//! unary functions, an optional two-sort split with a cross-sort bijection,
//! and named rank oracles.

mod embedding;
mod file;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use embedding::Embedding;
pub use file::{OracleFile, SortsFile, StructureFile};

use crate::error::{Error, Result};
use crate::matroid::{OracleKind, RankOracle};
use crate::pointset::{PointSet, MAX_POINTS};

pub type Triple = [usize; 3];

/// Which points an oracle (or function) is defined on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    D,
    A,
}

/// A total unary function on its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    /// `values[x]` is `Some(f(x))` for every domain point.
    values: Vec<Option<usize>>,
}

impl Function {
    pub fn get(&self, x: usize) -> Option<usize> {
        self.values.get(x).copied().flatten()
    }

    pub fn domain(&self) -> PointSet {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|_| i))
            .collect()
    }

    /// `f(X)` for the domain part of `X`.
    pub fn image(&self, set: PointSet) -> PointSet {
        set.iter().filter_map(|x| self.get(x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sorts {
    pub d: PointSet,
    pub a: PointSet,
    /// Cross-sort bijection `D → A`, indexed by point.
    pub bijection: Function,
}

/// A rank oracle bound to a structure's points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundOracle {
    pub scope: Scope,
    pub oracle: RankOracle,
    /// Ground position of each structure point inside the oracle.
    positions: Vec<Option<usize>>,
    support: PointSet,
}

impl BoundOracle {
    /// Points of the structure the oracle is defined on.
    pub fn support(&self) -> PointSet {
        self.support
    }

    pub fn rank(&self, set: PointSet) -> usize {
        debug_assert!(set.is_subset(self.support));
        if self.scope == Scope::All {
            return self.oracle.rank_set(set);
        }
        let local = set.iter().filter_map(|x| self.positions[x]).collect();
        self.oracle.rank_set(local)
    }

    pub fn position(&self, x: usize) -> Option<usize> {
        self.positions.get(x).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreStructure {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    triples: BTreeSet<Triple>,
    triple_masks: Vec<u64>,
    functions: BTreeMap<String, Function>,
    sorts: Option<Sorts>,
    oracles: BTreeMap<String, BoundOracle>,
    spec: Option<String>,
}

impl PreStructure {
    /// A structure with points and triples only.
    pub fn relational<S: AsRef<str>>(points: &[S], triples: &[[S; 3]]) -> Result<Self> {
        let file = StructureFile {
            points: points.iter().map(|p| p.as_ref().to_string()).collect(),
            triples: triples
                .iter()
                .map(|t| t.each_ref().map(|s| s.as_ref().to_string()))
                .collect(),
            functions: BTreeMap::new(),
            sorts: None,
            oracles: BTreeMap::new(),
            spec: None,
        };
        Self::from_file(&file)
    }

    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), BTreeSet::new())
    }

    /// Relational structure from labels and index triples. Panics on bad indices.
    pub fn from_parts(labels: Vec<String>, triples: BTreeSet<Triple>) -> Self {
        assert!(labels.len() <= MAX_POINTS);
        assert!(triples.iter().flatten().all(|&i| i < labels.len()));
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect::<HashMap<_, _>>();
        assert_eq!(index.len(), labels.len(), "duplicate labels");
        let mut s = PreStructure {
            labels,
            index,
            triples,
            triple_masks: Vec::new(),
            functions: BTreeMap::new(),
            sorts: None,
            oracles: BTreeMap::new(),
            spec: None,
        };
        s.refresh_masks();
        s
    }

    fn refresh_masks(&mut self) {
        self.triple_masks = self
            .triples
            .iter()
            .map(|t| PointSet::from_indices(t.iter().copied()).0)
            .collect();
    }

    pub fn from_file(file: &StructureFile) -> Result<Self> {
        if file.points.len() > MAX_POINTS {
            return Err(Error::input(
                "points",
                format!("{} points given, at most {MAX_POINTS} supported", file.points.len()),
            ));
        }
        let mut index = HashMap::new();
        for (i, p) in file.points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::input(format!("points[{i}]"), format!("duplicate label '{p}'")));
            }
        }
        let lookup = |path: String, label: &str| -> Result<usize> {
            index
                .get(label)
                .copied()
                .ok_or_else(|| Error::input(path, format!("undeclared point '{label}'")))
        };

        let mut triples = BTreeSet::new();
        for (i, t) in file.triples.iter().enumerate() {
            let mut idx = [0; 3];
            for (j, l) in t.iter().enumerate() {
                idx[j] = lookup(format!("triples[{i}][{j}]"), l)?;
            }
            triples.insert(idx);
        }

        let n = file.points.len();
        let sorts = match &file.sorts {
            None => None,
            Some(sf) => {
                let mut d = PointSet::EMPTY;
                let mut a = PointSet::EMPTY;
                for (i, l) in sf.d.iter().enumerate() {
                    d.insert(lookup(format!("sorts.D[{i}]"), l)?);
                }
                for (i, l) in sf.a.iter().enumerate() {
                    a.insert(lookup(format!("sorts.A[{i}]"), l)?);
                }
                if !d.intersection(a).is_empty() || d.union(a) != PointSet::full(n) {
                    return Err(Error::input("sorts", "D and A must partition the points"));
                }
                let mut values = vec![None; n];
                let mut hit = PointSet::EMPTY;
                for (k, v) in &sf.bijection {
                    let x = lookup(format!("sorts.bijection.{k}"), k)?;
                    let y = lookup(format!("sorts.bijection.{k}"), v)?;
                    if !d.contains(x) || !a.contains(y) {
                        return Err(Error::input(
                            format!("sorts.bijection.{k}"),
                            "bijection must map sort D into sort A",
                        ));
                    }
                    if hit.contains(y) {
                        return Err(Error::input(
                            format!("sorts.bijection.{k}"),
                            format!("bijection is not injective: '{v}' hit twice"),
                        ));
                    }
                    hit.insert(y);
                    values[x] = Some(y);
                }
                if let Some(x) = d.iter().find(|&x| values[x].is_none()) {
                    return Err(Error::input(
                        "sorts.bijection",
                        format!("non-total bijection: no image for '{}'", file.points[x]),
                    ));
                }
                if hit != a {
                    return Err(Error::input("sorts.bijection", "bijection is not onto sort A"));
                }
                Some(Sorts {
                    d,
                    a,
                    bijection: Function { values },
                })
            }
        };

        let fn_domain = sorts.as_ref().map_or(PointSet::full(n), |s| s.d);
        let mut functions = BTreeMap::new();
        for (name, map) in &file.functions {
            let mut values = vec![None; n];
            for (k, v) in map {
                let path = format!("functions.{name}.{k}");
                let x = lookup(path.clone(), k)?;
                let y = lookup(path.clone(), v)?;
                if !fn_domain.contains(x) {
                    return Err(Error::input(path, "argument outside the function domain"));
                }
                values[x] = Some(y);
            }
            if let Some(x) = fn_domain.iter().find(|&x| values[x].is_none()) {
                return Err(Error::input(
                    format!("functions.{name}"),
                    format!("non-total function: no value at '{}'", file.points[x]),
                ));
            }
            functions.insert(name.clone(), Function { values });
        }

        let mut oracles = BTreeMap::new();
        for (name, of) in &file.oracles {
            let path = format!("oracles.{name}");
            let sort = match of {
                OracleFile::Free { sort }
                | OracleFile::Uniform { sort, .. }
                | OracleFile::Linear { sort, .. } => sort.as_deref(),
            };
            let (scope, support) = match (sort, &sorts) {
                (None, _) => (Scope::All, PointSet::full(n)),
                (Some("D"), Some(s)) => (Scope::D, s.d),
                (Some("A"), Some(s)) => (Scope::A, s.a),
                (Some(other), _) => {
                    return Err(Error::input(
                        format!("{path}.sort"),
                        format!("unknown sort '{other}'"),
                    ))
                }
            };
            let ground: Vec<String> = support.iter().map(|i| file.points[i].clone()).collect();
            let oracle = match of {
                OracleFile::Free { .. } => RankOracle::free(ground),
                OracleFile::Uniform { k, .. } => RankOracle::uniform(ground, *k),
                OracleFile::Linear { field, vectors, .. } => {
                    for k in vectors.keys() {
                        let x = lookup(format!("{path}.vectors.{k}"), k)?;
                        if !support.contains(x) {
                            return Err(Error::input(
                                format!("{path}.vectors.{k}"),
                                "point outside the oracle's sort",
                            ));
                        }
                    }
                    let mut vs = Vec::with_capacity(ground.len());
                    for g in &ground {
                        let v = vectors.get(g).ok_or_else(|| {
                            Error::input(format!("{path}.vectors"), format!("missing vector for '{g}'"))
                        })?;
                        vs.push((g.clone(), v.clone()));
                    }
                    RankOracle::linear(*field, vs)
                }
            }
            .map_err(|e| match e {
                Error::Input { path: p, message } => Error::input(format!("{path}.{p}"), message),
                e => e,
            })?;
            let mut positions = vec![None; n];
            for (pos, x) in support.iter().enumerate() {
                positions[x] = Some(pos);
            }
            oracles.insert(
                name.clone(),
                BoundOracle {
                    scope,
                    oracle,
                    positions,
                    support,
                },
            );
        }

        let mut s = PreStructure {
            labels: file.points.clone(),
            index,
            triples,
            triple_masks: Vec::new(),
            functions,
            sorts,
            oracles,
            spec: file.spec.clone(),
        };
        s.refresh_masks();
        Ok(s)
    }

    pub fn to_file(&self) -> StructureFile {
        let l = |i: usize| self.labels[i].clone();
        let functions = self
            .functions
            .iter()
            .map(|(name, f)| {
                let map = f
                    .domain()
                    .iter()
                    .map(|x| (l(x), l(f.get(x).unwrap())))
                    .collect();
                (name.clone(), map)
            })
            .collect();
        let sorts = self.sorts.as_ref().map(|s| SortsFile {
            d: s.d.iter().map(l).collect(),
            a: s.a.iter().map(l).collect(),
            bijection: s
                .d
                .iter()
                .map(|x| (l(x), l(s.bijection.get(x).unwrap())))
                .collect(),
        });
        let oracles = self
            .oracles
            .iter()
            .map(|(name, b)| {
                let sort = match b.scope {
                    Scope::All => None,
                    Scope::D => Some("D".to_string()),
                    Scope::A => Some("A".to_string()),
                };
                let of = match b.oracle.kind() {
                    OracleKind::Free => OracleFile::Free { sort },
                    OracleKind::Uniform(k) => OracleFile::Uniform { k: *k, sort },
                    OracleKind::Linear { field, vectors } => OracleFile::Linear {
                        field: *field,
                        vectors: b
                            .oracle
                            .ground()
                            .iter()
                            .cloned()
                            .zip(vectors.iter().map(|v| v.iter().map(|&e| e as i64).collect()))
                            .collect(),
                        sort,
                    },
                };
                (name.clone(), of)
            })
            .collect();
        StructureFile {
            points: self.labels.clone(),
            triples: self.triples.iter().map(|t| t.map(l)).collect(),
            functions,
            sorts,
            oracles,
            spec: self.spec.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn points(&self) -> PointSet {
        PointSet::full(self.n())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn has_triple(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    /// Point masks of the triples, aligned with `triples()` iteration order.
    pub fn triple_masks(&self) -> &[u64] {
        &self.triple_masks
    }

    pub fn functions(&self) -> &BTreeMap<String, Function> {
        &self.functions
    }

    pub fn function(&self, name: &str) -> Result<&Function> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::Binding(format!("unknown function '{name}'")))
    }

    pub fn sorts(&self) -> Option<&Sorts> {
        self.sorts.as_ref()
    }

    pub fn oracles(&self) -> &BTreeMap<String, BoundOracle> {
        &self.oracles
    }

    pub fn oracle(&self, name: &str) -> Result<&BoundOracle> {
        self.oracles
            .get(name)
            .ok_or_else(|| Error::Binding(format!("unknown oracle '{name}'")))
    }

    pub fn declared_spec(&self) -> Option<&str> {
        self.spec.as_deref()
    }

    pub fn set_declared_spec(&mut self, spec: Option<String>) {
        self.spec = spec;
    }

    /// Resolves labels to a point set.
    pub fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<PointSet> {
        let mut s = PointSet::EMPTY;
        for (i, l) in labels.iter().enumerate() {
            let l = l.as_ref();
            let x = self
                .index_of(l)
                .ok_or_else(|| Error::input(format!("X[{i}]"), format!("unknown point '{l}'")))?;
            s.insert(x);
        }
        Ok(s)
    }

    pub fn labels_of(&self, set: PointSet) -> Vec<String> {
        set.iter().map(|i| self.labels[i].clone()).collect()
    }

    /// Number of triples with all three coordinates in `set`.
    pub fn triple_count(&self, set: PointSet) -> usize {
        self.triple_masks
            .iter()
            .filter(|&&m| m & !set.0 == 0)
            .count()
    }

    /// `X ∪ f₁(X) ∪ … ∪ fₖ(X)`, one application of each named function.
    pub fn image_closure<S: AsRef<str>>(&self, set: PointSet, fnames: &[S]) -> Result<PointSet> {
        let mut out = set;
        for name in fnames {
            out = out.union(self.function(name.as_ref())?.image(set));
        }
        Ok(out)
    }

    /// Triples with all coordinates in `set`.
    pub fn triples_within(&self, set: PointSet) -> impl Iterator<Item = &Triple> + '_ {
        self.triples
            .iter()
            .zip(&self.triple_masks)
            .filter(move |(_, &m)| m & !set.0 == 0)
            .map(|(t, _)| t)
    }

    /// Relational substructure on `set` (labels kept, points in index order).
    ///
    /// Functions, sorts and oracles are dropped; the result carries only the
    /// induced triples.
    pub fn induced_relational(&self, set: PointSet) -> PreStructure {
        let order: Vec<usize> = set.iter().collect();
        let mut local = vec![usize::MAX; self.n()];
        for (j, &i) in order.iter().enumerate() {
            local[i] = j;
        }
        let triples = self.triples_within(set).map(|t| t.map(|i| local[i])).collect();
        PreStructure::from_parts(order.iter().map(|&i| self.labels[i].clone()).collect(), triples)
    }

    /// True when only points and triples are present.
    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.sorts.is_none() && self.oracles.is_empty()
    }

    /// Appends a fresh point. Only for relational structures under construction.
    pub(crate) fn push_point(&mut self, label: String) -> usize {
        assert!(self.n() < MAX_POINTS, "structure exceeds {MAX_POINTS} points");
        assert!(!self.index.contains_key(&label), "duplicate label {label}");
        let i = self.labels.len();
        self.index.insert(label.clone(), i);
        self.labels.push(label);
        i
    }

    pub(crate) fn push_triple(&mut self, t: Triple) {
        if self.triples.insert(t) {
            self.refresh_masks();
        }
    }

    /// Fresh label not yet used, of the form `{prefix}{k}`.
    pub fn fresh_label(&self, prefix: &str, mut k: usize) -> String {
        loop {
            let l = format!("{prefix}{k}");
            if !self.index.contains_key(&l) {
                return l;
            }
            k += 1;
        }
    }
}

/// Parses and validates a structure file.
pub fn load_structure(bytes: &[u8]) -> Result<PreStructure> {
    let file: StructureFile = serde_json::from_slice(bytes)?;
    PreStructure::from_file(&file)
}

/// Canonical JSON text of a structure.
pub fn serialize(s: &PreStructure) -> String {
    let mut out = serde_json::to_string_pretty(&s.to_file()).expect("structure serializes");
    out.push('\n');
    out
}
