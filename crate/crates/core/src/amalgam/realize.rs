use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::template::{canonical_triples, encode, templates_over, ExtensionTemplate, MAX_TEMPLATE_POINTS};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::predim::{Predim, PredimensionSpec};
use crate::structures::{Embedding, PreStructure, Triple};

pub(crate) fn require_trivial_r(spec: &PredimensionSpec) -> Result<()> {
    match spec {
        PredimensionSpec::TrivialR => Ok(()),
        other => Err(Error::Domain(format!(
            "templates and richness are implemented for trivial_r only, not '{other}'"
        ))),
    }
}

/// Triples of `m` inside `points`, relabeled by position in `points`.
pub(crate) fn local_triples(m: &PreStructure, points: &[usize]) -> Vec<Triple> {
    let mut pos = HashMap::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        pos.insert(p, i);
    }
    let set: PointSet = points.iter().copied().collect();
    let mut v: Vec<Triple> = m.triples_within(set).map(|t| t.map(|x| pos[&x])).collect();
    v.sort_unstable();
    v
}

/// Base-fixing canonical code of `anchor ∪ new` over `anchor` inside `m`.
pub(crate) fn induced_code(m: &PreStructure, anchor: &[usize], new: &[usize]) -> String {
    let pts: Vec<usize> = anchor.iter().chain(new).copied().collect();
    let t = local_triples(m, &pts);
    encode(anchor.len(), pts.len(), &canonical_triples(anchor.len(), pts.len(), &t, false))
}

fn check_anchor(m: &PreStructure, t: &ExtensionTemplate, anchor: &[usize]) -> Result<()> {
    let distinct: BTreeSet<usize> = anchor.iter().copied().collect();
    if anchor.len() != t.base_size() || distinct.len() != anchor.len() || anchor.iter().any(|&x| x >= m.n()) {
        return Err(Error::Domain("anchor does not match the template base size".into()));
    }
    let base: Vec<Triple> = t.base_triples().copied().collect();
    if local_triples(m, anchor) != base {
        return Err(Error::Domain("anchor is not isomorphic to the template base".into()));
    }
    Ok(())
}

/// Every embedding of `t.ext` into `m` sending base point `i` to
/// `anchor[i]` and preserving triples in both directions, in lexicographic
/// order of the maps. With `require_strong`, only those whose image is
/// strong in `m`.
pub fn find_embeddings(
    m: &PreStructure,
    t: &ExtensionTemplate,
    anchor: &[usize],
    require_strong: bool,
    budget: &Budget,
) -> Result<Vec<Embedding>> {
    check_anchor(m, t, anchor)?;
    let pd = Predim::new(&PredimensionSpec::TrivialR, m)?.with_budget(budget.clone());
    let ext_triples = t.triples();
    let mut out = Vec::new();
    let mut map: Vec<usize> = anchor.to_vec();
    let mut used: PointSet = anchor.iter().copied().collect();

    fn go(
        m: &PreStructure,
        ext_triples: &[Triple],
        e: usize,
        map: &mut Vec<usize>,
        used: &mut PointSet,
        out: &mut Vec<Vec<usize>>,
        budget: &Budget,
    ) -> Result<()> {
        if map.len() == e {
            out.push(map.clone());
            return Ok(());
        }
        budget.check_time()?;
        let j = map.len();
        for y in m.points().difference(*used).iter() {
            map.push(y);
            used.insert(y);
            let inside: Vec<&Triple> = ext_triples.iter().filter(|t| t.iter().all(|&x| x <= j)).collect();
            let ok = inside.iter().all(|t| m.has_triple(&t.map(|x| map[x])))
                && m.triple_count(*used) == inside.len();
            if ok {
                go(m, ext_triples, e, map, used, out, budget)?;
            }
            used.remove(y);
            map.pop();
        }
        Ok(())
    }

    let mut maps = Vec::new();
    go(m, ext_triples, t.ext_size(), &mut map, &mut used, &mut maps, budget)?;
    for map in maps {
        let e = Embedding { map };
        if !require_strong || pd.is_strong(e.image(PointSet::full(t.ext_size())))? {
            out.push(e);
        }
    }
    Ok(out)
}

/// An unrealized pair: a strong anchor and a template over it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Deficit {
    pub anchor: Vec<usize>,
    pub template: ExtensionTemplate,
}

/// Label-level view of a [`Deficit`] for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeficitRecord {
    pub anchor: Vec<String>,
    pub template: String,
    pub id: String,
    pub hash: String,
}

impl Deficit {
    pub fn record(&self, m: &PreStructure) -> DeficitRecord {
        DeficitRecord {
            anchor: self.anchor.iter().map(|&x| m.label(x).to_string()).collect(),
            template: self.template.code(),
            id: self.template.id(),
            hash: self.template.hash(),
        }
    }
}

/// Richness parameters: anchors of at most `level` points and templates
/// with at most `level + cap` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Level {
    pub k: usize,
    pub cap: usize,
}

impl Level {
    pub fn new(k: usize) -> Self {
        Level { k, cap: 0 }
    }

    pub fn max_ext(&self) -> usize {
        (self.k + self.cap).min(MAX_TEMPLATE_POINTS)
    }
}

pub(crate) fn combinations(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Template lists keyed by base structure, shared across calls.
#[derive(Default)]
pub struct TemplateCache {
    map: HashMap<(usize, Vec<Triple>, usize), Vec<ExtensionTemplate>>,
}

impl TemplateCache {
    fn get(&mut self, base: usize, triples: &[Triple], max_ext: usize, budget: &Budget) -> Result<&[ExtensionTemplate]> {
        let key = (base, triples.to_vec(), max_ext);
        if !self.map.contains_key(&key) {
            let mut all = Vec::new();
            for e in base + 1..=max_ext {
                all.extend(templates_over(base, triples, e, (0, i64::MAX), budget)?);
            }
            self.map.insert(key.clone(), all);
        }
        Ok(&self.map[&key])
    }
}

/// All (strong anchor, unrealized template) pairs at the given level, sorted
/// by template code, then anchor.
pub fn richness_deficit(
    spec: &PredimensionSpec,
    m: &PreStructure,
    level: Level,
    budget: &Budget,
) -> Result<Vec<Deficit>> {
    richness_deficit_cached(spec, m, level, budget, &mut TemplateCache::default())
}

pub fn richness_deficit_cached(
    spec: &PredimensionSpec,
    m: &PreStructure,
    level: Level,
    budget: &Budget,
    cache: &mut TemplateCache,
) -> Result<Vec<Deficit>> {
    require_trivial_r(spec)?;
    if !m.is_relational() {
        return Err(Error::Domain("richness is defined for relation-only structures".into()));
    }
    let pd = Predim::new(spec, m)?.with_budget(budget.clone());
    let pts: Vec<usize> = m.points().iter().collect();
    let max_ext = level.max_ext();
    let mut out = Vec::new();
    for size in 0..=level.k.min(pts.len()).min(max_ext) {
        combinations(&pts, size, &mut |anchor| {
            budget.check_time()?;
            let aset: PointSet = anchor.iter().copied().collect();
            if !pd.is_strong(aset)? {
                return Ok(());
            }
            let base = local_triples(m, anchor);
            let templates = cache.get(size, &base, max_ext, budget)?;
            if templates.is_empty() {
                return Ok(());
            }
            let mut open: BTreeSet<String> = templates.iter().map(ExtensionTemplate::code).collect();
            let rest: Vec<usize> = m.points().difference(aset).iter().collect();
            for new in 1..=max_ext - size {
                combinations(&rest, new, &mut |e| {
                    if open.is_empty() {
                        return Ok(());
                    }
                    let code = induced_code(m, anchor, e);
                    if open.contains(&code) && pd.is_strong(aset.union(e.iter().copied().collect()))? {
                        open.remove(&code);
                    }
                    Ok(())
                })?;
            }
            for t in templates {
                if open.contains(&t.code()) {
                    out.push(Deficit { anchor: anchor.to_vec(), template: t.clone() });
                }
            }
            Ok(())
        })?;
    }
    out.sort_by(|a, b| (a.template.code(), &a.anchor).cmp(&(b.template.code(), &b.anchor)));
    Ok(out)
}

/// Appends the new points of `t` to `m` over `anchor` with the given
/// labels: the free amalgam of `m` and `t.ext` over the anchor.
pub fn extend_over(m: &PreStructure, anchor: &[usize], t: &ExtensionTemplate, labels: &[String]) -> Result<PreStructure> {
    check_anchor(m, t, anchor)?;
    if labels.len() != t.new_points() {
        return Err(Error::Domain("one label per new point required".into()));
    }
    let mut d = m.clone();
    let mut map = anchor.to_vec();
    for l in labels {
        if d.index_of(l).is_some() {
            return Err(Error::Domain(format!("label '{l}' already present")));
        }
        if d.n() >= crate::pointset::MAX_POINTS {
            return Err(Error::Domain("structure would exceed the point limit".into()));
        }
        map.push(d.push_point(l.clone()));
    }
    for tr in t.triples() {
        d.push_triple(tr.map(|x| map[x]));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predim::tests::five_point;

    fn rel(points: &[&str], triples: &[[&str; 3]]) -> PreStructure {
        PreStructure::relational(points, triples).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let b = Budget::default();
        let free = ExtensionTemplate::new(0, 1, []).unwrap();
        let m = rel(&["x", "y", "z"], &[["x", "y", "z"]]);
        assert_eq!(find_embeddings(&m, &free, &[], false, &b).unwrap().len(), 3);

        let t = ExtensionTemplate::new(2, 3, [[0, 1, 2]]).unwrap();
        let e = find_embeddings(&m, &t, &[0, 1], false, &b).unwrap();
        assert_eq!(e, vec![Embedding { map: vec![0, 1, 2] }]);
        let bare = rel(&["x", "y", "z"], &[]);
        assert!(find_embeddings(&bare, &t, &[0, 1], false, &b).unwrap().is_empty());
        let looped = rel(&["x", "y"], &[["x", "x", "x"]]);
        assert!(find_embeddings(&looped, &t, &[0, 1], false, &b).is_err());
    }

    #[test]
    fn deficit_examples() {
        let b = Budget::default();
        let spec = PredimensionSpec::TrivialR;
        let d = richness_deficit(&spec, &PreStructure::empty(), Level::new(1), &b).unwrap();
        assert!(d.iter().any(|x| x.template.code() == "0+1:"));
        let one = rel(&["p"], &[]);
        let d = richness_deficit(&spec, &one, Level::new(1), &b).unwrap();
        assert!(d.iter().all(|x| x.template.code() != "0+1:"));
        assert!(richness_deficit(&"field_r:d".parse().unwrap(), &one, Level::new(1), &b).is_err());
    }

    /// Independent scan: every strong anchor, every template over it, every
    /// injective placement of the new points, δ checked by enumeration.
    fn brute_deficit(m: &PreStructure, level: Level) -> Vec<(Vec<usize>, String)> {
        let n = m.n();
        let delta = |s: u64| s.count_ones() as i64 - m.triple_count(PointSet(s)) as i64;
        let full = (1u64 << n) - 1;
        let partial = |s: u64| {
            let mut best = i64::MAX;
            let rest = full & !s;
            let mut sub = rest;
            loop {
                best = best.min(delta(s | sub));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best
        };
        let strong = |s: u64| delta(s) == partial(s);
        let mut out = Vec::new();
        for a in 0..=full {
            let size = a.count_ones() as usize;
            if size > level.k || !strong(a) {
                continue;
            }
            let anchor: Vec<usize> = (0..n).filter(|&i| a >> i & 1 == 1).collect();
            let base = local_triples(m, &anchor);
            for e in size + 1..=level.max_ext() {
                for t in templates_over(size, &base, e, (0, i64::MAX), &Budget::default()).unwrap() {
                    let realized = (0..=full).any(|x| {
                        if x & a != a || x.count_ones() as usize != e || !strong(x) {
                            return false;
                        }
                        let new: Vec<usize> = (0..n).filter(|&i| x >> i & 1 == 1 && a >> i & 1 == 0).collect();
                        super::super::template::permutations(new.len()).iter().any(|p| {
                            let order: Vec<usize> = anchor.iter().copied().chain(p.iter().map(|&i| new[i])).collect();
                            local_triples(m, &order) == t.triples()
                        })
                    });
                    if !realized {
                        out.push((anchor.clone(), t.code()));
                    }
                }
            }
        }
        out.sort_by(|x, y| (&x.1, &x.0).cmp(&(&y.1, &y.0)));
        out
    }

    #[test]
    fn five_point_deficit_matches_brute_force() {
        let m = five_point();
        let got: Vec<(Vec<usize>, String)> = richness_deficit(&PredimensionSpec::TrivialR, &m, Level::new(2), &Budget::default())
            .unwrap()
            .into_iter()
            .map(|d| (d.anchor, d.template.code()))
            .collect();
        assert_eq!(got, brute_deficit(&m, Level::new(2)));
        assert!(!got.is_empty());
    }

    #[test]
    fn extension_is_free() {
        let m = rel(&["x", "y"], &[]);
        let t = ExtensionTemplate::new(2, 3, [[0, 1, 2]]).unwrap();
        let d = extend_over(&m, &[0, 1], &t, &["z".into()]).unwrap();
        assert!(d.has_triple(&[0, 1, 2]));
        assert!(extend_over(&m, &[0, 1], &t, &["x".into()]).is_err());
    }
}
