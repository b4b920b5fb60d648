//! Exact lattice arithmetic for torsion cosets of subtori of the split
//! torus `𝔾ₘⁿ`: normal forms, intersections, typicality and τ-family
//! certificates.
//!
//! A coset is given by an integer matrix whose rows are characters and one
//! rational value per row (mod 1); everything here is exact.

mod coset;
mod lattice;
mod matrix;
mod normal;

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

pub use coset::{intersect_cosets, typicality, Intersection, LatticeCoset, Typicality};
pub use lattice::Lattice;
pub use matrix::IntMatrix;
pub use normal::{hnf, left_kernel, rank, right_kernel, snf, Snf};

use crate::error::Result;

/// Proper subtori certifying every atypical intersection with a member of
/// `w`: the saturated lattice of each member of dimension strictly between
/// `0` and `n`. Members of dimension `0` or `n` never meet a subgroup with
/// positive defect.
pub fn tau_family(w: &[LatticeCoset]) -> Vec<Lattice> {
    let set: BTreeSet<Lattice> = w
        .iter()
        .filter(|c| c.dim() > 0 && c.dim() < c.ambient())
        .map(|c| c.lattice().saturation())
        .collect();
    set.into_iter().collect()
}

/// An atypical intersection not contained in a coset of any certificate
/// subtorus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Uncovered {
    pub member: usize,
    pub subgroup: Lattice,
    pub typicality: Typicality,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TauReport {
    pub subgroups: usize,
    pub intersections: usize,
    pub atypical: usize,
    pub positive_defect: usize,
    pub uncovered: Vec<Uncovered>,
}

impl TauReport {
    pub fn is_covered(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Checks every atypical component with positive defect of `W ∩ S` for
/// each `S` in `subgroups`: its connected part has lattice
/// `sat(L_W + L_S)`, and it lies in a coset of `T` iff `L_T` is inside it.
pub fn verify_tau(
    w: &[LatticeCoset],
    tau: &[Lattice],
    subgroups: impl IntoIterator<Item = Lattice>,
) -> Result<TauReport> {
    let mut report = TauReport::default();
    let w_lattices: Vec<Lattice> = w.iter().map(LatticeCoset::lattice).collect();
    for s in subgroups {
        report.subgroups += 1;
        let sg = LatticeCoset::subgroup(&s);
        for (i, member) in w.iter().enumerate() {
            let Some(t) = typicality(member, &sg)? else { continue };
            report.intersections += 1;
            report.atypical += usize::from(t.atypical);
            if t.defect <= 0 {
                continue;
            }
            report.positive_defect += 1;
            let connected = w_lattices[i].sum(&s)?.saturation();
            let covered = tau
                .iter()
                .any(|l| l.ambient() == connected.ambient() && connected.contains(l).unwrap_or(false));
            if !covered {
                report.uncovered.push(Uncovered { member: i, subgroup: s.clone(), typicality: t });
            }
        }
    }
    Ok(report)
}

fn all_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// All subgroups generated by one or two characters with entries in
/// `[-bound, bound]`, deduplicated by lattice, in canonical order.
pub fn exhaustive_subgroups(n: usize, bound: i64) -> Vec<Lattice> {
    let vs = all_vectors(n, bound);
    let mut set = BTreeSet::new();
    for (i, a) in vs.iter().enumerate() {
        set.insert(Lattice::from_rows(n, std::slice::from_ref(a)).expect("ambient length"));
        for b in &vs[i + 1..] {
            set.insert(Lattice::from_rows(n, &[a.clone(), b.clone()]).expect("ambient length"));
        }
    }
    set.into_iter().collect()
}

/// `count` random subgroups with between one and `n` generators.
pub fn random_subgroups<R: Rng>(rng: &mut R, n: usize, bound: i64, count: usize) -> Vec<Lattice> {
    (0..count)
        .map(|_| {
            let rows: Vec<Vec<i64>> = (0..rng.gen_range(1..=n.max(1)))
                .map(|_| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect())
                .collect();
            Lattice::from_rows(n, &rows).expect("ambient length")
        })
        .collect()
}
