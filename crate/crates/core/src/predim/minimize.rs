use crate::budget::pow2;
use crate::error::Result;
use crate::pointset::PointSet;

use super::flow::{FlowNetwork, INF};
use super::Predim;

/// Minimum of `δ` over an interval of sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Minimum {
    pub value: i64,
    /// For submodular `δ`, the inclusion-least minimizer. Otherwise a
    /// minimizer of least cardinality.
    pub set: PointSet,
}

pub(super) fn minimize(pd: &Predim<'_>, lower: PointSet, upper: PointSet) -> Result<Minimum> {
    if lower == upper {
        return Ok(Minimum {
            value: pd.delta_unchecked(lower),
            set: lower,
        });
    }
    if pd.is_relation_count() {
        return Ok(min_cut(pd, lower, upper));
    }
    if pd.is_submodular() {
        return branch_and_bound(pd, lower, upper);
    }
    exhaustive(pd, lower, upper)
}

/// `min |Y| − r(Y)` as a project-selection cut: source → triple (1),
/// triple → its points (∞), point → sink (1), source → forced point (∞).
fn min_cut(pd: &Predim<'_>, lower: PointSet, upper: PointSet) -> Minimum {
    let m = pd.structure();
    let n = m.n();
    let triples: Vec<u64> = m
        .triple_masks()
        .iter()
        .copied()
        .filter(|&t| t & !upper.0 == 0)
        .collect();
    let (s, t) = (n + triples.len(), n + triples.len() + 1);
    let mut g = FlowNetwork::new(n + triples.len() + 2);
    for p in upper.iter() {
        g.add_edge(p, t, 1);
    }
    for p in lower.iter() {
        g.add_edge(s, p, INF);
    }
    for (i, &mask) in triples.iter().enumerate() {
        g.add_edge(s, n + i, 1);
        for p in PointSet(mask).iter() {
            g.add_edge(n + i, p, INF);
        }
    }
    let cut = g.max_flow(s, t);
    let side = g.source_side(s);
    let set: PointSet = upper.iter().filter(|&p| side[p]).collect::<PointSet>().union(lower);
    let value = cut - triples.len() as i64;
    debug_assert_eq!(value, pd.delta_unchecked(set));
    Minimum { value, set }
}

struct Search<'p, 'a> {
    pd: &'p Predim<'a>,
    best: i64,
    best_set: PointSet,
    nodes: u128,
}

impl Search<'_, '_> {
    fn f(&self, s: PointSet) -> i64 {
        self.pd.delta_unchecked(s)
    }

    fn offer(&mut self, s: PointSet, v: i64) {
        if v < self.best || (v == self.best && s.len() < self.best_set.len()) {
            self.best = v;
            self.best_set = s;
        }
    }

    fn run(&mut self, mut lower: PointSet, mut upper: PointSet) -> Result<()> {
        self.nodes += 1;
        if self.nodes & 0xfff == 0 {
            self.pd.budget().check_time()?;
        }
        // Submodular reduction: a point with negative marginal at the bottom
        // is in every minimizer; a point with non-negative marginal at the top
        // can be dropped from some minimizer.
        loop {
            let mut changed = false;
            let fl = self.f(lower);
            let fu = self.f(upper);
            for u in upper.difference(lower).iter() {
                if self.f(lower.with(u)) - fl < 0 {
                    lower.insert(u);
                    changed = true;
                    break;
                }
                if fu - self.f(upper.without(u)) >= 0 {
                    upper.remove(u);
                    changed = true;
                    break;
                }
            }
            if !changed {
                break;
            }
        }
        let fl = self.f(lower);
        self.offer(lower, fl);
        if lower == upper {
            return Ok(());
        }
        let fu = self.f(upper);
        self.offer(upper, fu);
        // Lower bound: f(L ∪ S) ≥ f(L) + Σ_{s∈S} (f(U) − f(U − s)).
        let bound: i64 = fl
            + upper
                .difference(lower)
                .iter()
                .map(|u| (fu - self.f(upper.without(u))).min(0))
                .sum::<i64>();
        if bound >= self.best {
            return Ok(());
        }
        let u = upper.difference(lower).first().unwrap();
        self.run(lower.with(u), upper)?;
        self.run(lower, upper.without(u))
    }
}

fn bnb_value(pd: &Predim<'_>, lower: PointSet, upper: PointSet) -> Result<Minimum> {
    let v = pd.delta_unchecked(lower);
    let mut search = Search {
        pd,
        best: v,
        best_set: lower,
        nodes: 0,
    };
    search.run(lower, upper)?;
    Ok(Minimum {
        value: search.best,
        set: search.best_set,
    })
}

/// Exact submodular minimization; then shrinks the minimizer to the
/// intersection of all minimizers.
fn branch_and_bound(pd: &Predim<'_>, lower: PointSet, upper: PointSet) -> Result<Minimum> {
    let found = bnb_value(pd, lower, upper)?;
    let mut least = found.set;
    for u in found.set.difference(lower).iter() {
        let without = bnb_value(pd, lower, found.set.without(u))?;
        if without.value == found.value {
            least.remove(u);
        }
    }
    debug_assert_eq!(pd.delta_unchecked(least), found.value);
    Ok(Minimum {
        value: found.value,
        set: least,
    })
}

fn exhaustive(pd: &Predim<'_>, lower: PointSet, upper: PointSet) -> Result<Minimum> {
    let free = upper.difference(lower);
    pd.budget().check_points("exhaustive minimization", free.len())?;
    pd.budget()
        .check_subsets("exhaustive minimization", pow2(free.len()))?;
    let mut best = Minimum {
        value: pd.delta_unchecked(lower),
        set: lower,
    };
    for (i, s) in free.subsets().enumerate() {
        if i & 0xffff == 0 {
            pd.budget().check_time()?;
        }
        let y = lower.union(s);
        let v = pd.delta_unchecked(y);
        if v < best.value || (v == best.value && (y.len(), y) < (best.set.len(), best.set)) {
            best = Minimum { value: v, set: y };
        }
    }
    Ok(best)
}
