//! Predimension functions, the derived dimension `∂`, strong sets and
//! closures, and strong embeddings.
//!
//! A [`Predim`] binds a [`PredimensionSpec`] to a structure. Minimization of
//! `δ` over the supersets of a set is exact: a min-cut for the relation-only
//! presets, branch-and-bound with submodular bounds for the other
//! submodular presets, and exhaustive enumeration otherwise.

mod flow;
mod minimize;
mod spec;

use std::collections::HashMap;

pub use minimize::Minimum;
pub use spec::PredimensionSpec;

use crate::budget::{pow2, Budget};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::structures::{BoundOracle, Embedding, Function, PreStructure};

/// Largest domain on which strong-embedding checks compare every subset.
pub const EXHAUSTIVE_EMBEDDING_POINTS: usize = 12;

#[derive(Clone, Debug)]
enum Bound<'a> {
    TrivialR,
    FieldR {
        d: &'a BoundOracle,
    },
    FieldF {
        d: &'a BoundOracle,
        f: &'a Function,
        exclude: PointSet,
    },
    Exp {
        d1: &'a BoundOracle,
        d2: &'a BoundOracle,
        f: &'a Function,
    },
    MultiF {
        d: &'a BoundOracle,
        fs: Vec<&'a Function>,
    },
    Aut {
        d: &'a BoundOracle,
        g: &'a Function,
    },
    Fusion {
        d1: &'a BoundOracle,
        d2: &'a BoundOracle,
        f: &'a Function,
    },
}

/// A predimension bound to a structure.
#[derive(Clone, Debug)]
pub struct Predim<'a> {
    spec: PredimensionSpec,
    structure: &'a PreStructure,
    bound: Bound<'a>,
    domain: PointSet,
    budget: Budget,
}

/// Outcome of a GS check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GsOutcome {
    Ok,
    /// An inclusion-minimal set with negative predimension.
    Witness(PointSet),
}

fn covers(o: &BoundOracle, name: &str, need: PointSet) -> Result<()> {
    if need.is_subset(o.support()) {
        Ok(())
    } else {
        Err(Error::Binding(format!(
            "oracle '{name}' does not cover the points the preset evaluates"
        )))
    }
}

impl<'a> Predim<'a> {
    pub fn new(spec: &PredimensionSpec, m: &'a PreStructure) -> Result<Self> {
        let all = m.points();
        let (bound, domain) = match spec {
            PredimensionSpec::TrivialR => (Bound::TrivialR, all),
            PredimensionSpec::FieldR { d } => {
                let d = m.oracle(d).map(|o| (o, d))?;
                covers(d.0, d.1, all)?;
                (Bound::FieldR { d: d.0 }, all)
            }
            PredimensionSpec::FieldF { d, f, exclude } => {
                let (o, func) = (m.oracle(d)?, m.function(f)?);
                let dom = func.domain();
                covers(o, d, dom.union(func.image(dom)))?;
                // Excluded labels absent from this structure are ignored.
                let exclude = exclude.iter().filter_map(|l| m.index_of(l)).collect();
                (Bound::FieldF { d: o, f: func, exclude }, dom)
            }
            PredimensionSpec::Exp { d1, d2, f } => {
                let (o1, o2, func) = (m.oracle(d1)?, m.oracle(d2)?, m.function(f)?);
                let dom = func.domain();
                covers(o1, d1, dom.union(func.image(dom)))?;
                covers(o2, d2, dom)?;
                (Bound::Exp { d1: o1, d2: o2, f: func }, dom)
            }
            PredimensionSpec::MultiF { d, fs } => {
                let o = m.oracle(d)?;
                let funcs = fs.iter().map(|f| m.function(f)).collect::<Result<Vec<_>>>()?;
                if funcs.len() > 16 {
                    return Err(Error::Binding("multi_f supports at most 16 functions".into()));
                }
                let dom = funcs.iter().fold(all, |acc, f| acc.intersection(f.domain()));
                let reach = funcs.iter().fold(dom, |acc, f| acc.union(f.image(dom)));
                covers(o, d, reach)?;
                (Bound::MultiF { d: o, fs: funcs }, dom)
            }
            PredimensionSpec::Aut { d, g } => {
                let (o, func) = (m.oracle(d)?, m.function(g)?);
                let dom = func.domain();
                covers(o, d, dom.union(func.image(dom)))?;
                (Bound::Aut { d: o, g: func }, dom)
            }
            PredimensionSpec::Fusion { d1, d2 } => {
                let sorts = m
                    .sorts()
                    .ok_or_else(|| Error::Binding("fusion needs a sorted structure".into()))?;
                let (o1, o2) = (m.oracle(d1)?, m.oracle(d2)?);
                covers(o1, d1, sorts.d)?;
                covers(o2, d2, sorts.a)?;
                (
                    Bound::Fusion {
                        d1: o1,
                        d2: o2,
                        f: &sorts.bijection,
                    },
                    sorts.d,
                )
            }
        };
        Ok(Predim {
            spec: spec.clone(),
            structure: m,
            bound,
            domain,
            budget: Budget::default(),
        })
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn spec(&self) -> &PredimensionSpec {
        &self.spec
    }

    pub fn structure(&self) -> &'a PreStructure {
        self.structure
    }

    /// Points on which `δ` is defined (sort D for fusion, a function's domain
    /// for the function presets, all points otherwise).
    pub fn domain(&self) -> PointSet {
        self.domain
    }

    /// Whether `δ` is submodular on every structure this binding can see.
    pub fn is_submodular(&self) -> bool {
        match &self.bound {
            Bound::TrivialR | Bound::FieldR { .. } | Bound::FieldF { .. } | Bound::Fusion { .. } => {
                true
            }
            Bound::Exp { d2, .. } => d2.oracle.is_modular(),
            Bound::Aut { d, .. } => d.oracle.is_modular(),
            Bound::MultiF { .. } => false,
        }
    }

    /// True when `δ(X) = |X| − r(X)` on the domain, which admits a min-cut.
    pub(crate) fn is_relation_count(&self) -> bool {
        match &self.bound {
            Bound::TrivialR => true,
            Bound::FieldR { d } => d.oracle.is_modular(),
            _ => false,
        }
    }

    pub fn check_domain(&self, set: PointSet) -> Result<()> {
        if set.is_subset(self.domain) {
            Ok(())
        } else {
            let outside = self.structure.labels_of(set.difference(self.domain));
            Err(Error::input(
                "X",
                format!("points {outside:?} are outside the {} domain", self.spec.name()),
            ))
        }
    }

    /// `δ(X)` for `X` inside the domain. No domain check.
    pub fn delta_unchecked(&self, x: PointSet) -> i64 {
        let m = self.structure;
        match &self.bound {
            Bound::TrivialR => x.len() as i64 - m.triple_count(x) as i64,
            Bound::FieldR { d } => d.rank(x) as i64 - m.triple_count(x) as i64,
            Bound::FieldF { d, f, exclude } => {
                let x = x.difference(*exclude);
                d.rank(x.union(f.image(x))) as i64 - x.len() as i64
            }
            Bound::Exp { d1, d2, f } => d1.rank(x.union(f.image(x))) as i64 - d2.rank(x) as i64,
            Bound::MultiF { d, fs } => {
                let images: Vec<PointSet> = fs.iter().map(|f| f.image(x)).collect();
                (0u32..1 << fs.len())
                    .map(|mask| {
                        let mut y = x;
                        for (i, img) in images.iter().enumerate() {
                            if mask >> i & 1 == 1 {
                                y = y.union(*img);
                            }
                        }
                        d.rank(y) as i64 - (x.len() as i64) * mask.count_ones() as i64
                    })
                    .min()
                    .unwrap()
            }
            Bound::Aut { d, g } => d.rank(x.union(g.image(x))) as i64 - d.rank(x) as i64,
            Bound::Fusion { d1, d2, f } => {
                d1.rank(x) as i64 + d2.rank(f.image(x)) as i64 - x.len() as i64
            }
        }
    }

    pub fn delta(&self, x: PointSet) -> Result<i64> {
        self.check_domain(x)?;
        Ok(self.delta_unchecked(x))
    }

    /// `δ(B/A) = δ(B) − δ(A)` for `A ⊆ B`.
    pub fn delta_rel(&self, b: PointSet, a: PointSet) -> Result<i64> {
        if !a.is_subset(b) {
            return Err(Error::input("A", "A is not a subset of B"));
        }
        Ok(self.delta(b)? - self.delta(a)?)
    }

    /// Exact minimum of `δ(Y)` over `lower ⊆ Y ⊆ upper`.
    pub fn minimize(&self, lower: PointSet, upper: PointSet) -> Result<Minimum> {
        self.check_domain(upper)?;
        if !lower.is_subset(upper) {
            return Err(Error::input("X", "lower bound not inside upper bound"));
        }
        minimize::minimize(self, lower, upper)
    }

    /// `∂(X) = min{δ(Y) : X ⊆ Y ⊆ domain}`.
    pub fn d_partial(&self, x: PointSet) -> Result<i64> {
        self.check_domain(x)?;
        Ok(self.minimize(x, self.domain)?.value)
    }

    pub fn is_strong(&self, x: PointSet) -> Result<bool> {
        Ok(self.delta(x)? == self.d_partial(x)?)
    }

    /// Checks `δ(X) ≥ 0` for every subset of the domain.
    pub fn gs_check(&self) -> Result<GsOutcome> {
        let min = self.minimize(PointSet::EMPTY, self.domain)?;
        if min.value >= 0 {
            return Ok(GsOutcome::Ok);
        }
        let mut w = min.set;
        'shrink: loop {
            for x in w.iter() {
                let inner = self.minimize(PointSet::EMPTY, w.without(x))?;
                if inner.value < 0 {
                    w = inner.set;
                    continue 'shrink;
                }
            }
            return Ok(GsOutcome::Witness(w));
        }
    }

    /// The inclusion-least strong superset of `X`.
    pub fn strong_closure(&self, x: PointSet) -> Result<PointSet> {
        self.check_domain(x)?;
        if self.is_submodular() {
            return Ok(self.minimize(x, self.domain)?.set);
        }
        // Brute force: tabulate ∂ on the interval [X, domain].
        let free: Vec<usize> = self.domain.difference(x).iter().collect();
        self.budget.check_points("strong closure", free.len())?;
        self.budget.check_subsets("strong closure", pow2(free.len()))?;
        let size = 1usize << free.len();
        let expand = |bits: usize| -> PointSet {
            let mut s = x;
            for (i, &p) in free.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    s.insert(p);
                }
            }
            s
        };
        let delta: Vec<i64> = (0..size).map(|b| self.delta_unchecked(expand(b))).collect();
        let mut up = delta.clone();
        for i in 0..free.len() {
            for b in (0..size).rev() {
                if b >> i & 1 == 0 {
                    up[b] = up[b].min(up[b | 1 << i]);
                }
            }
        }
        let strong: Vec<usize> = (0..size).filter(|&b| delta[b] == up[b]).collect();
        let minimal: Vec<usize> = strong
            .iter()
            .copied()
            .filter(|&b| !strong.iter().any(|&c| c != b && c & b == c))
            .collect();
        match minimal.as_slice() {
            [only] => Ok(expand(*only)),
            _ => Err(Error::Consistency(format!(
                "{} inclusion-minimal strong supersets; closure is not unique",
                minimal.len()
            ))),
        }
    }

    /// `∂` of every subset of the domain, indexed by the bits of the
    /// domain's points in increasing order.
    pub fn d_partial_table(&self) -> Result<Vec<i64>> {
        let pts: Vec<usize> = self.domain.iter().collect();
        self.budget.check_points("∂ table", pts.len())?;
        self.budget.check_subsets("∂ table", pow2(pts.len()))?;
        let size = 1usize << pts.len();
        let mut up: Vec<i64> = (0..size)
            .map(|b| self.delta_unchecked(expand_bits(b, &pts)))
            .collect();
        for i in 0..pts.len() {
            for b in (0..size).rev() {
                if b >> i & 1 == 0 {
                    up[b] = up[b].min(up[b | 1 << i]);
                }
            }
        }
        Ok(up)
    }
}

/// Maps the bits of `bits` onto the listed points.
pub fn expand_bits(bits: usize, points: &[usize]) -> PointSet {
    let mut s = PointSet::EMPTY;
    for (i, &p) in points.iter().enumerate() {
        if bits >> i & 1 == 1 {
            s.insert(p);
        }
    }
    s
}

/// Whether `e: M → L` is a strong embedding: `∂_M(X) = ∂_L(e(X))` for every
/// subset `X` of M's domain.
///
/// Small domains are compared subset by subset. For larger domains and a
/// submodular `δ` this is equivalent to the image of M's domain being strong
/// in L, which is what gets checked.
pub fn is_strong_embedding(
    spec: &PredimensionSpec,
    m: &PreStructure,
    l: &PreStructure,
    e: &Embedding,
    budget: &Budget,
) -> Result<bool> {
    e.validate(m, l, budget)?;
    let pm = Predim::new(spec, m)?.with_budget(budget.clone());
    let pl = Predim::new(spec, l)?.with_budget(budget.clone());
    let image = e.image(pm.domain());
    if !image.is_subset(pl.domain()) {
        return Err(Error::Domain("embedding leaves the target's domain".into()));
    }
    let pts: Vec<usize> = pm.domain().iter().collect();
    if pts.len() > EXHAUSTIVE_EMBEDDING_POINTS && pm.is_submodular() && pl.is_submodular() {
        return Ok(pl.delta_unchecked(image) == pl.d_partial(image)?
            && pm.delta_unchecked(pm.domain()) == pl.delta_unchecked(image));
    }
    let table = pm.d_partial_table()?;
    let mut cache: HashMap<PointSet, i64> = HashMap::new();
    for (bits, &dm) in table.iter().enumerate() {
        budget.check_time()?;
        let img = e.image(expand_bits(bits, &pts));
        let dl = match cache.get(&img) {
            Some(&v) => v,
            None => {
                let v = pl.d_partial(img)?;
                cache.insert(img, v);
                v
            }
        };
        if dm != dl {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod tests;
