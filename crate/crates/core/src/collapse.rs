//! Bounding realizations of zero-dimensional minimal extensions.
//!
//! A [`MuFunction`] assigns each zero-minimal template a bound on the number
//! of pairwise disjoint copies over a single anchor. [`collapse_build`]
//! replays the generic schedule and drops every action whose anchor has
//! vanished, is no longer strong, or whose result would exceed a bound.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::amalgam::{
    apply_action, find_embeddings, generic_build, induced_code, require_trivial_r, Action, BuildConfig, BuildTrace,
    ExtensionTemplate, LogEntry,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::predim::{Predim, PredimensionSpec};
use crate::structures::PreStructure;

/// Largest template (base plus new points) scanned by [`mu_admissible`].
pub const DEFAULT_MU_EXT: usize = 5;

#[derive(Serialize, Deserialize)]
struct MuFile {
    default: u64,
    #[serde(default)]
    overrides: BTreeMap<String, u64>,
}

/// Per-template realization bounds. Override keys are template ids (a
/// template code, normalized to its setwise id) or 16-hex-digit hashes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MuFile", into = "MuFile")]
pub struct MuFunction {
    default: u64,
    overrides: BTreeMap<String, u64>,
}

impl From<MuFunction> for MuFile {
    fn from(mu: MuFunction) -> Self {
        MuFile { default: mu.default, overrides: mu.overrides }
    }
}

impl TryFrom<MuFile> for MuFunction {
    type Error = Error;

    fn try_from(f: MuFile) -> Result<Self> {
        let mut mu = MuFunction::new(f.default)?;
        for (k, v) in f.overrides {
            mu = mu.with_override(&k, v)?;
        }
        Ok(mu)
    }
}

fn is_hash(key: &str) -> bool {
    key.len() == 16 && key.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

impl MuFunction {
    pub fn new(default: u64) -> Result<Self> {
        if default == 0 {
            return Err(Error::input("default", "bounds must be at least 1"));
        }
        Ok(MuFunction { default, overrides: BTreeMap::new() })
    }

    /// Bounds that never bind.
    pub fn unbounded() -> Self {
        MuFunction { default: u64::MAX, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, key: &str, bound: u64) -> Result<Self> {
        let path = format!("overrides.{key}");
        if bound == 0 {
            return Err(Error::input(path, "bounds must be at least 1"));
        }
        let key = if key.contains(':') {
            let t = ExtensionTemplate::from_code(key).map_err(|e| Error::input(&path, e.to_string()))?;
            if !t.is_zero_minimal() {
                return Err(Error::input(path, "overrides must name zero-minimal templates"));
            }
            t.id()
        } else if is_hash(key) {
            key.to_string()
        } else {
            return Err(Error::input(path, "expected a template code or a 16-digit hex hash"));
        };
        self.overrides.insert(key, bound);
        Ok(self)
    }

    pub fn default_bound(&self) -> u64 {
        self.default
    }

    pub fn overrides(&self) -> &BTreeMap<String, u64> {
        &self.overrides
    }

    /// The bound for `t`, looked up by setwise id, then by hash.
    pub fn bound(&self, t: &ExtensionTemplate) -> u64 {
        let id = t.id();
        self.overrides
            .get(&id)
            .or_else(|| self.overrides.get(&t.hash()))
            .copied()
            .unwrap_or(self.default)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Relative predimension zero with every proper intermediate extension
/// strictly positive.
pub fn is_zero_minimal(t: &ExtensionTemplate) -> bool {
    t.is_zero_minimal()
}

/// Greedy count of copies of `t.ext` over `anchor` whose new points are
/// pairwise disjoint, taking embeddings in lexicographic order.
pub fn count_copies(
    spec: &PredimensionSpec,
    m: &PreStructure,
    t: &ExtensionTemplate,
    anchor: &[usize],
    budget: &Budget,
) -> Result<usize> {
    require_trivial_r(spec)?;
    let mut used = PointSet::EMPTY;
    let mut count = 0;
    for e in find_embeddings(m, t, anchor, false, budget)? {
        let new: PointSet = e.map[t.base_size()..].iter().copied().collect();
        if new.intersection(used).is_empty() {
            used = used.union(new);
            count += 1;
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuViolation {
    pub anchor: Vec<String>,
    pub template: String,
    pub id: String,
    pub hash: String,
    pub count: usize,
    pub bound: u64,
}

fn neighbours(m: &PreStructure) -> Vec<PointSet> {
    let mut adj = vec![PointSet::EMPTY; m.n()];
    for t in m.triples() {
        for &x in t {
            for &y in t {
                if x != y {
                    adj[x].insert(y);
                }
            }
        }
    }
    adj
}

/// Connected point sets of size at most `max` that meet `seeds`.
fn connected_sets(adj: &[PointSet], seeds: PointSet, max: usize, budget: &Budget) -> Result<Vec<PointSet>> {
    let mut seen: HashSet<PointSet> = seeds.iter().map(PointSet::singleton).collect();
    let mut layer: Vec<PointSet> = seen.iter().copied().collect();
    let mut out = layer.clone();
    for _ in 1..max {
        budget.check_time()?;
        let mut next = Vec::new();
        for s in &layer {
            let border = s.iter().fold(PointSet::EMPTY, |b, x| b.union(adj[x])).difference(*s);
            for y in border.iter() {
                let t = s.with(y);
                if seen.insert(t) {
                    next.push(t);
                }
            }
        }
        out.extend(&next);
        layer = next;
    }
    out.sort_unstable_by_key(|s| s.iter().collect::<Vec<_>>());
    Ok(out)
}

fn zero_minimal_over(m: &PreStructure, anchor: PointSet, e: PointSet) -> bool {
    let rel = |sub: PointSet| {
        let touching = m.triples_within(anchor.union(sub)).filter(|t| t.iter().any(|&x| sub.contains(x))).count();
        sub.len() as i64 - touching as i64
    };
    rel(e) == 0 && e.subsets().all(|sub| sub.is_empty() || sub == e || rel(sub) > 0)
}

/// (anchor, pointwise code) pairs with at least one zero-minimal copy whose
/// new points, or whose anchor's triples with them, involve `touch`. Only
/// anchors each of whose points lies on a triple meeting the copy are
/// considered.
fn zero_minimal_groups(
    m: &PreStructure,
    max_ext: usize,
    touch: PointSet,
    budget: &Budget,
) -> Result<BTreeSet<(Vec<usize>, String)>> {
    let adj = neighbours(m);
    let seeds = touch.iter().fold(touch, |s, x| s.union(adj[x]));
    let mut groups = BTreeSet::new();
    for e in connected_sets(&adj, seeds, max_ext, budget)? {
        let border: Vec<usize> = e.iter().fold(PointSet::EMPTY, |b, x| b.union(adj[x])).difference(e).iter().collect();
        let room = max_ext - e.len();
        for size in 0..=room.min(border.len()) {
            crate::amalgam::combinations(&border, size, &mut |a| {
                budget.check_time()?;
                let aset: PointSet = a.iter().copied().collect();
                if aset.union(e).intersection(touch).is_empty() {
                    return Ok(());
                }
                let cover = m
                    .triples_within(aset.union(e))
                    .filter(|t| t.iter().any(|&x| e.contains(x)))
                    .fold(PointSet::EMPTY, |c, t| c.union(t.iter().copied().collect()));
                if aset.is_subset(cover) && zero_minimal_over(m, aset, e) {
                    let new: Vec<usize> = e.iter().collect();
                    groups.insert((a.to_vec(), induced_code(m, a, &new)));
                }
                Ok(())
            })?;
        }
    }
    Ok(groups)
}

fn violations_in(
    m: &PreStructure,
    mu: &MuFunction,
    max_ext: usize,
    touch: PointSet,
    budget: &Budget,
) -> Result<Vec<MuViolation>> {
    let mut out = Vec::new();
    for (anchor, code) in zero_minimal_groups(m, max_ext, touch, budget)? {
        let t = ExtensionTemplate::from_code(&code)?;
        let bound = mu.bound(&t);
        let count = count_copies(&PredimensionSpec::TrivialR, m, &t, &anchor, budget)?;
        if count as u64 > bound {
            out.push(MuViolation {
                anchor: anchor.iter().map(|&x| m.label(x).to_string()).collect(),
                id: t.id(),
                hash: t.hash(),
                template: code,
                count,
                bound,
            });
        }
    }
    Ok(out)
}

/// Every (zero-minimal template with at most `max_ext` points, anchor)
/// pair whose disjoint copy count exceeds its bound. Empty means admissible.
pub fn mu_admissible(
    spec: &PredimensionSpec,
    m: &PreStructure,
    mu: &MuFunction,
    max_ext: usize,
    budget: &Budget,
) -> Result<Vec<MuViolation>> {
    require_trivial_r(spec)?;
    violations_in(m, mu, max_ext, m.points(), budget)
}

/// Replays the schedule of [`generic_build`] for the same configuration,
/// keeping an action only when its anchor is present and strong and the
/// result stays admissible for `mu`. Every schedule position yields a stage,
/// so stage `i` here is an induced, strong substructure of stage `i` of the
/// generic trace.
pub fn collapse_build(
    spec: &PredimensionSpec,
    mu: &MuFunction,
    config: BuildConfig,
    budget: &Budget,
) -> Result<BuildTrace> {
    let generic = generic_build(spec, config, budget)?;
    replay_schedule(spec, mu, config, &generic.schedule(), budget)
}

/// Replays an arbitrary schedule of actions from the empty structure under
/// `mu`, with the same keep-or-skip rule as [`collapse_build`].
pub fn replay_schedule(
    spec: &PredimensionSpec,
    mu: &MuFunction,
    config: BuildConfig,
    schedule: &[(usize, Action)],
    budget: &Budget,
) -> Result<BuildTrace> {
    require_trivial_r(spec)?;
    let mut m = PreStructure::empty();
    let mut trace = BuildTrace::new(spec, config, &m);
    trace.mu = Some(mu.clone());
    for (step, action) in schedule.iter().cloned() {
        budget.check_time()?;
        match try_apply(spec, &m, mu, &action, budget)? {
            Ok(next) => {
                m = next;
                trace.realized.push(LogEntry { step, action: action.clone(), reason: None });
            }
            Err(reason) => trace.skipped.push(LogEntry { step, action: action.clone(), reason: Some(reason) }),
        }
        trace.push_stage(step, action, &m);
    }
    Ok(trace)
}

fn try_apply(
    spec: &PredimensionSpec,
    m: &PreStructure,
    mu: &MuFunction,
    action: &Action,
    budget: &Budget,
) -> Result<std::result::Result<PreStructure, String>> {
    if let Action::Realize { anchor, .. } = action {
        let mut aset = PointSet::EMPTY;
        for l in anchor {
            match m.index_of(l) {
                Some(i) => aset.insert(i),
                None => return Ok(Err(format!("anchor point '{l}' absent"))),
            }
        }
        if !Predim::new(spec, m)?.with_budget(budget.clone()).is_strong(aset)? {
            return Ok(Err("anchor not strong".into()));
        }
    }
    let next = apply_action(m, action)?;
    let new = PointSet::full(next.n()).difference(PointSet::full(m.n()));
    let v = violations_in(&next, mu, DEFAULT_MU_EXT, new, budget)?;
    Ok(match v.first() {
        None => Ok(next),
        Some(v) => Err(format!(
            "mu bound: {} over [{}] has {} copies, bound {}",
            v.template,
            v.anchor.join(","),
            v.count,
            v.bound
        )),
    })
}
