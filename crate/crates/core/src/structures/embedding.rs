use std::collections::BTreeMap;

use crate::budget::{pow2, Budget};
use crate::error::{Error, Result};
use crate::matroid::OracleKind;
use crate::pointset::PointSet;

use super::{BoundOracle, PreStructure};

/// An injective point map from a source structure into a target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    /// `map[x]` is the target index of source point `x`.
    pub map: Vec<usize>,
}

const EXHAUSTIVE_RANK_CHECK: usize = 16;

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Embedding {
            map: (0..n).collect(),
        }
    }

    /// Matches labels of `source` to equal labels of `target`.
    pub fn by_labels(source: &PreStructure, target: &PreStructure) -> Result<Self> {
        let map = source
            .labels()
            .iter()
            .map(|l| {
                target
                    .index_of(l)
                    .ok_or_else(|| Error::input("embedding", format!("'{l}' missing in target")))
            })
            .collect::<Result<_>>()?;
        Ok(Embedding { map })
    }

    pub fn from_label_map(
        source: &PreStructure,
        target: &PreStructure,
        labels: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut map = vec![usize::MAX; source.n()];
        for (k, v) in labels {
            let path = format!("embedding.{k}");
            let x = source
                .index_of(k)
                .ok_or_else(|| Error::input(&path, format!("unknown source point '{k}'")))?;
            let y = target
                .index_of(v)
                .ok_or_else(|| Error::input(&path, format!("unknown target point '{v}'")))?;
            map[x] = y;
        }
        if let Some(x) = map.iter().position(|&y| y == usize::MAX) {
            return Err(Error::input(
                "embedding",
                format!("no image for '{}'", source.label(x)),
            ));
        }
        Ok(Embedding { map })
    }

    pub fn to_label_map(&self, source: &PreStructure, target: &PreStructure) -> BTreeMap<String, String> {
        self.map
            .iter()
            .enumerate()
            .map(|(x, &y)| (source.label(x).to_string(), target.label(y).to_string()))
            .collect()
    }

    pub fn image(&self, set: PointSet) -> PointSet {
        set.iter().map(|x| self.map[x]).collect()
    }

    /// Checks that this map is an embedding: injective, triples preserved in
    /// both directions on the image, functions and the sort bijection
    /// commute, sorts kept, and every source oracle's ranks preserved.
    pub fn validate(&self, source: &PreStructure, target: &PreStructure, budget: &Budget) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(format!("invalid embedding: {m}")));
        if self.map.len() != source.n() {
            return bad("map length differs from source size".into());
        }
        if self.map.iter().any(|&y| y >= target.n()) {
            return bad("image outside target".into());
        }
        let image = self.image(source.points());
        if image.len() != source.n() {
            return bad("map is not injective".into());
        }
        for t in source.triples() {
            if !target.has_triple(&t.map(|x| self.map[x])) {
                return bad(format!("triple {:?} not preserved", source.labels_of(PointSet::from_indices(*t))));
            }
        }
        if target.triple_count(image) != source.triples().len() {
            return bad("target has extra triples on the image".into());
        }
        for (name, f) in source.functions() {
            let Ok(g) = target.function(name) else {
                return bad(format!("function '{name}' missing in target"));
            };
            for x in f.domain().iter() {
                if g.get(self.map[x]) != f.get(x).map(|y| self.map[y]) {
                    return bad(format!("function '{name}' does not commute at '{}'", source.label(x)));
                }
            }
        }
        match (source.sorts(), target.sorts()) {
            (None, None) => {}
            (Some(s), Some(t)) => {
                for x in s.d.iter() {
                    if !t.d.contains(self.map[x])
                        || t.bijection.get(self.map[x]) != s.bijection.get(x).map(|y| self.map[y])
                    {
                        return bad(format!("sort D / bijection not preserved at '{}'", source.label(x)));
                    }
                }
                if !self.image(s.a).is_subset(t.a) {
                    return bad("sort A not preserved".into());
                }
            }
            _ => return bad("sortedness differs".into()),
        }
        for (name, so) in source.oracles() {
            let Ok(to) = target.oracle(name) else {
                return bad(format!("oracle '{name}' missing in target"));
            };
            if self.image(so.support()) != to.support().intersection(image) {
                return bad(format!("oracle '{name}' support not preserved"));
            }
            if !self.preserves_ranks(so, to, budget)? {
                return bad(format!("oracle '{name}' ranks not preserved"));
            }
        }
        Ok(())
    }

    fn preserves_ranks(&self, so: &BoundOracle, to: &BoundOracle, budget: &Budget) -> Result<bool> {
        let support = so.support();
        match (so.oracle.kind(), to.oracle.kind()) {
            (OracleKind::Free, OracleKind::Free) => return Ok(true),
            (OracleKind::Uniform(a), OracleKind::Uniform(b)) => {
                return Ok(a == b || (*a >= support.len() && *b >= support.len()))
            }
            (OracleKind::Free, OracleKind::Uniform(k)) | (OracleKind::Uniform(k), OracleKind::Free) => {
                return Ok(*k >= support.len())
            }
            (
                OracleKind::Linear { field: p, vectors: vs },
                OracleKind::Linear { field: q, vectors: vt },
            ) if p == q => {
                let src: Vec<&[u32]> = support.iter().map(|x| vs[so.position(x).unwrap()].as_slice()).collect();
                let tgt: Vec<&[u32]> = support
                    .iter()
                    .map(|x| vt[to.position(self.map[x]).unwrap()].as_slice())
                    .collect();
                if linearly_equivalent(*p, &src, &tgt) {
                    return Ok(true);
                }
            }
            _ => {}
        }
        if support.len() > EXHAUSTIVE_RANK_CHECK {
            budget.check_subsets("rank-preservation check", pow2(support.len()))?;
        }
        Ok(support
            .subsets()
            .all(|s| so.rank(s) == to.rank(self.image(s))))
    }
}

/// True when the coordinates of every vector with respect to a greedily
/// chosen basis agree on both sides, which implies equal ranks on all subsets.
fn linearly_equivalent(p: u32, src: &[&[u32]], tgt: &[&[u32]]) -> bool {
    use crate::matroid::gf_rank;
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..src.len() {
        let with: Vec<&[u32]> = basis.iter().map(|&b| src[b]).chain([src[i]]).collect();
        if gf_rank(p, with.iter().copied()) > basis.len() {
            basis.push(i);
        }
    }
    let tb: Vec<&[u32]> = basis.iter().map(|&b| tgt[b]).collect();
    if gf_rank(p, tb.iter().copied()) != basis.len() {
        return false;
    }
    // Compare each vector's coordinates in the basis on both sides.
    (0..src.len()).all(|i| {
        let cs = coordinates(p, &basis.iter().map(|&b| src[b]).collect::<Vec<_>>(), src[i]);
        let ct = coordinates(p, &tb, tgt[i]);
        cs.is_some() && cs == ct
    })
}

/// Solves `Σ c_j basis_j = v` over GF(p) when `basis` is independent.
fn coordinates(p: u32, basis: &[&[u32]], v: &[u32]) -> Option<Vec<u32>> {
    let k = basis.len();
    let dim = v.len();
    // Augmented system: rows are coordinates, columns are basis vectors plus v.
    let mut m: Vec<Vec<u64>> = (0..dim)
        .map(|r| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[r] as u64).collect();
            row.push(v[r] as u64);
            row
        })
        .collect();
    let p64 = p as u64;
    let inv = |a: u64| -> u64 {
        let (mut b, mut e, mut acc) = (a % p64, p64 - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p64;
            }
            b = b * b % p64;
            e >>= 1;
        }
        acc
    };
    let mut row = 0;
    let mut pivots = Vec::new();
    for c in 0..k {
        let pr = (row..dim).find(|&r| m[r][c] != 0)?;
        m.swap(row, pr);
        let iv = inv(m[row][c]);
        for e in m[row].iter_mut() {
            *e = *e * iv % p64;
        }
        for r in 0..dim {
            if r != row && m[r][c] != 0 {
                let f = m[r][c];
                for cc in 0..=k {
                    m[r][cc] = (m[r][cc] + p64 * p64 - f * m[row][cc]) % p64;
                }
            }
        }
        pivots.push(row);
        row += 1;
    }
    if (row..dim).any(|r| m[r][k] != 0) {
        return None;
    }
    Some(pivots.iter().map(|&r| m[r][k] as u32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::load_structure;

    #[test]
    fn identity_embedding_is_valid() {
        let m = load_structure(
            br#"{"points":["a","b","c"],"triples":[["a","b","c"]],
                "functions":{"f":{"a":"b","b":"c","c":"a"}},
                "oracles":{"d":{"kind":"linear","field":5,"vectors":{"a":[1,0],"b":[0,1],"c":[1,1]}}}}"#,
        )
        .unwrap();
        Embedding::identity(3).validate(&m, &m, &Budget::default()).unwrap();
    }

    #[test]
    fn non_induced_map_rejected() {
        let src = PreStructure::relational(&["a", "b"], &[]).unwrap();
        let tgt = PreStructure::relational(&["x", "y"], &[["x", "y", "y"]]).unwrap();
        let e = Embedding { map: vec![0, 1] };
        assert!(e.validate(&src, &tgt, &Budget::default()).is_err());
    }

    #[test]
    fn rank_changing_map_rejected() {
        let src = load_structure(
            br#"{"points":["a","b"],"oracles":{"d":{"kind":"linear","field":2,"vectors":{"a":[1,0],"b":[0,1]}}}}"#,
        )
        .unwrap();
        let tgt = load_structure(
            br#"{"points":["a","b"],"oracles":{"d":{"kind":"linear","field":2,"vectors":{"a":[1,0],"b":[1,0]}}}}"#,
        )
        .unwrap();
        assert!(Embedding::identity(2).validate(&src, &tgt, &Budget::default()).is_err());
    }

    #[test]
    fn different_representation_same_matroid_accepted() {
        let src = load_structure(
            br#"{"points":["a","b","c"],"oracles":{"d":{"kind":"linear","field":3,"vectors":{"a":[1,0],"b":[0,1],"c":[1,1]}}}}"#,
        )
        .unwrap();
        let tgt = load_structure(
            br#"{"points":["a","b","c"],"oracles":{"d":{"kind":"linear","field":3,"vectors":{"a":[1,0],"b":[0,1],"c":[1,2]}}}}"#,
        )
        .unwrap();
        Embedding::identity(3).validate(&src, &tgt, &Budget::default()).unwrap();
    }
}
