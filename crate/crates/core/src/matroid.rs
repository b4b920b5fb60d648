//! Finite matroid rank oracles.
//!
//! Three kinds ship: the free matroid (rank = cardinality), the uniform
//! matroid `U(k)`, and linear matroids represented by vectors over a prime
//! field `GF(p)` with `p ≤ 97`.

use std::collections::HashMap;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::pointset::{PointSet, MAX_POINTS};

pub const MAX_FIELD: u32 = 97;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Free,
    Uniform(usize),
    /// `vectors[i]` represents ground point `i`; entries reduced mod `field`.
    Linear { field: u32, vectors: Vec<Vec<u32>> },
}

/// A matroid rank function on an ordered ground set of point labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOracle {
    ground: Vec<String>,
    kind: OracleKind,
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl RankOracle {
    pub fn free(ground: Vec<String>) -> Result<Self> {
        Self::new(ground, OracleKind::Free)
    }

    pub fn uniform(ground: Vec<String>, k: usize) -> Result<Self> {
        Self::new(ground, OracleKind::Uniform(k))
    }

    /// Builds a linear oracle; entries may be negative and are reduced mod `field`.
    pub fn linear(field: u32, vectors: Vec<(String, Vec<i64>)>) -> Result<Self> {
        let (ground, vecs): (Vec<_>, Vec<_>) = vectors.into_iter().unzip();
        let vecs = vecs
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .map(|e| e.rem_euclid(field as i64) as u32)
                    .collect()
            })
            .collect();
        Self::new(
            ground,
            OracleKind::Linear {
                field,
                vectors: vecs,
            },
        )
    }

    pub fn new(ground: Vec<String>, kind: OracleKind) -> Result<Self> {
        if ground.len() > MAX_POINTS {
            return Err(Error::input(
                "ground",
                format!("at most {MAX_POINTS} points supported"),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for g in &ground {
            if !seen.insert(g) {
                return Err(Error::input("ground", format!("duplicate point '{g}'")));
            }
        }
        if let OracleKind::Linear { field, vectors } = &kind {
            if !is_prime(*field) || *field > MAX_FIELD {
                return Err(Error::input(
                    "field",
                    format!("{field} is not a prime ≤ {MAX_FIELD}"),
                ));
            }
            if vectors.len() != ground.len() {
                return Err(Error::input("vectors", "one vector per ground point required"));
            }
            if let Some(first) = vectors.first() {
                if let Some(i) = vectors.iter().position(|v| v.len() != first.len()) {
                    return Err(Error::input(
                        format!("vectors.{}", ground[i]),
                        "vectors must share length",
                    ));
                }
            }
            if vectors.iter().flatten().any(|&e| e >= *field) {
                return Err(Error::input("vectors", "entries must be reduced mod field"));
            }
        }
        Ok(RankOracle { ground, kind })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.ground.iter().position(|g| g == label)
    }

    pub fn ground_set(&self) -> PointSet {
        PointSet::full(self.ground.len())
    }

    /// True when rank is additive over disjoint unions.
    pub fn is_modular(&self) -> bool {
        matches!(self.kind, OracleKind::Free)
    }

    /// Rank of a set of labels.
    pub fn rank<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        let mut set = PointSet::EMPTY;
        for l in labels {
            let l = l.as_ref();
            let i = self
                .position(l)
                .ok_or_else(|| Error::input("X", format!("unknown point id '{l}'")))?;
            set.insert(i);
        }
        Ok(self.rank_set(set))
    }

    /// Rank of a set of ground positions.
    pub fn rank_set(&self, set: PointSet) -> usize {
        debug_assert!(set.is_subset(self.ground_set()));
        match &self.kind {
            OracleKind::Free => set.len(),
            OracleKind::Uniform(k) => set.len().min(*k),
            OracleKind::Linear { field, vectors } => {
                gf_rank(*field, set.iter().map(|i| vectors[i].as_slice()))
            }
        }
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // p is prime: a^(p-2)
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Row rank over GF(p) by Gaussian elimination.
pub fn gf_rank<'a>(p: u32, rows: impl Iterator<Item = &'a [u32]>) -> usize {
    let mut m: Vec<Vec<u32>> = rows.map(|r| r.to_vec()).collect();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p) as u64;
        for e in m[rank].iter_mut() {
            *e = (*e as u64 * inv % p as u64) as u32;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let factor = m[r][c] as u64;
                for cc in c..cols {
                    let sub = factor * m[rank][cc] as u64 % p as u64;
                    m[r][cc] = ((m[r][cc] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `0 ≤ r(X) ≤ |X|`
    Bounded,
    /// `X ⊆ Y ⇒ r(X) ≤ r(Y)`
    Monotone,
    /// `r(X∪Y) + r(X∩Y) ≤ r(X) + r(Y)`
    Submodular,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub x: Vec<String>,
    pub y: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct MatroidReport {
    pub checked_pairs: u128,
    pub violations: Vec<Violation>,
}

impl MatroidReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Exhaustively checks the three rank axioms for `oracle` over all subsets of
/// size at most `max_subset_size` and all pairs of such subsets.
pub fn verify_matroid(
    oracle: &RankOracle,
    max_subset_size: usize,
    budget: &Budget,
) -> Result<MatroidReport> {
    verify_rank_function(oracle.ground(), |s| oracle.rank_set(s) as i64, max_subset_size, budget)
}

/// [`verify_matroid`] for an arbitrary rank function on positions of `ground`.
pub fn verify_rank_function(
    ground: &[String],
    mut rank: impl FnMut(PointSet) -> i64,
    max_subset_size: usize,
    budget: &Budget,
) -> Result<MatroidReport> {
    let n = ground.len();
    let m = max_subset_size.min(n);
    let count: u128 = (0..=m).map(|k| binom(n, k)).sum();
    budget.check_subsets("matroid verification (subset pairs)", count.saturating_mul(count))?;

    let subsets: Vec<PointSet> = PointSet::full(n)
        .subsets()
        .filter(|s| s.len() <= m)
        .collect();
    let mut ranks: HashMap<PointSet, i64> = HashMap::with_capacity(subsets.len());
    let mut rank_of = |s: PointSet, ranks: &mut HashMap<PointSet, i64>| -> i64 {
        *ranks.entry(s).or_insert_with(|| rank(s))
    };
    let labels = |s: PointSet| s.iter().map(|i| ground[i].clone()).collect::<Vec<_>>();

    let mut report = MatroidReport::default();
    for &x in &subsets {
        let rx = rank_of(x, &mut ranks);
        if rx < 0 || rx > x.len() as i64 {
            report.violations.push(Violation {
                axiom: Axiom::Bounded,
                x: labels(x),
                y: vec![],
            });
        }
    }
    for &x in &subsets {
        budget.check_time()?;
        for &y in &subsets {
            report.checked_pairs += 1;
            let (rx, ry) = (rank_of(x, &mut ranks), rank_of(y, &mut ranks));
            if x.is_subset(y) && rx > ry {
                report.violations.push(Violation {
                    axiom: Axiom::Monotone,
                    x: labels(x),
                    y: labels(y),
                });
            }
            if x.0 < y.0 {
                let ru = rank_of(x.union(y), &mut ranks);
                let ri = rank_of(x.intersection(y), &mut ranks);
                if ru + ri > rx + ry {
                    report.violations.push(Violation {
                        axiom: Axiom::Submodular,
                        x: labels(x),
                        y: labels(y),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn free_and_uniform_ranks() {
        let free = RankOracle::free(labels("abc")).unwrap();
        assert_eq!(free.rank(&["a", "b"]).unwrap(), 2);
        let uni = RankOracle::uniform(labels("abc"), 1).unwrap();
        assert_eq!(uni.rank(&["a", "b"]).unwrap(), 1);
        assert_eq!(uni.rank::<&str>(&[]).unwrap(), 0);
    }

    #[test]
    fn linear_rank_gf2() {
        let lin = RankOracle::linear(
            2,
            vec![
                ("a".into(), vec![1, 0]),
                ("b".into(), vec![0, 1]),
                ("c".into(), vec![1, 1]),
            ],
        )
        .unwrap();
        assert_eq!(lin.rank(&["a", "b", "c"]).unwrap(), 2);
        assert_eq!(lin.rank(&["a", "c"]).unwrap(), 2);
    }

    #[test]
    fn linear_negative_entries_reduce() {
        let lin = RankOracle::linear(
            3,
            vec![("a".into(), vec![1, 1]), ("b".into(), vec![-2, -2])],
        )
        .unwrap();
        assert_eq!(lin.rank(&["a", "b"]).unwrap(), 1);
    }

    #[test]
    fn unknown_point_is_input_error() {
        let free = RankOracle::free(labels("abc")).unwrap();
        let err = free.rank(&["z"]).unwrap_err();
        assert!(err.is_input());
    }

    #[test]
    fn rejects_bad_fields_and_ragged_vectors() {
        assert!(RankOracle::linear(4, vec![("a".into(), vec![1])]).is_err());
        assert!(RankOracle::linear(101, vec![("a".into(), vec![1])]).is_err());
        assert!(RankOracle::linear(
            5,
            vec![("a".into(), vec![1]), ("b".into(), vec![1, 0])]
        )
        .is_err());
    }

    #[test]
    fn verify_free_and_uniform() {
        let b = Budget::default();
        let free = RankOracle::free(labels("abcde")).unwrap();
        assert!(verify_matroid(&free, 5, &b).unwrap().is_empty());
        let uni = RankOracle::uniform(labels("abcdef"), 2).unwrap();
        assert!(verify_matroid(&uni, 6, &b).unwrap().is_empty());
    }

    #[test]
    fn verify_flags_corrupted_linear_oracle() {
        // Test double: the rank of {c, d} is over-reported by one.
        let lin = RankOracle::linear(
            2,
            vec![
                ("a".into(), vec![1, 0]),
                ("b".into(), vec![0, 1]),
                ("c".into(), vec![1, 1]),
                ("d".into(), vec![1, 0]),
            ],
        )
        .unwrap();
        let cd = PointSet::from_indices([2, 3]);
        let corrupted = |s: PointSet| lin.rank_set(s) as i64 + i64::from(s == cd);
        let report = verify_rank_function(lin.ground(), corrupted, 4, &Budget::default()).unwrap();
        for axiom in [Axiom::Bounded, Axiom::Monotone, Axiom::Submodular] {
            assert!(report.violations.iter().any(|v| v.axiom == axiom), "{axiom:?}");
        }
    }

    #[test]
    fn budget_refusal_reports_estimate() {
        let free = RankOracle::free((0..20).map(|i| i.to_string()).collect()).unwrap();
        let err = verify_matroid(&free, 20, &Budget::new(20, 1000)).unwrap_err();
        match err {
            Error::Budget { required, .. } => assert_eq!(required, 1u128 << 40),
            e => panic!("unexpected {e}"),
        }
    }
}
