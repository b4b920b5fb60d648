//! Seeded generators of small random structures, used by the test suites
//! and the `matroid-verify`/`pregeometry` demos.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::structures::{OracleFile, PreStructure, SortsFile, StructureFile};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Points `p0..p{n-1}` with `triples` random ordered triples (duplicates collapse).
pub fn random_relational<R: Rng>(rng: &mut R, n: usize, triples: usize) -> PreStructure {
    let points = labels("p", n);
    let ts: Vec<[String; 3]> = if n == 0 {
        Vec::new()
    } else {
        (0..triples)
            .map(|_| std::array::from_fn(|_| points[rng.gen_range(0..n)].clone()))
            .collect()
    };
    PreStructure::from_file(&StructureFile {
        points,
        triples: ts,
        functions: BTreeMap::new(),
        sorts: None,
        oracles: BTreeMap::new(),
        spec: None,
    })
    .expect("generated structure is valid")
}

/// Random relational structure satisfying `|Y| − r(Y) ≥ 0` for all `Y`,
/// built by adding random triples and keeping those that preserve it.
pub fn random_gs_relational<R: Rng>(rng: &mut R, n: usize, attempts: usize) -> PreStructure {
    let points = labels("p", n);
    let mut kept: Vec<[usize; 3]> = Vec::new();
    for _ in 0..attempts {
        if n == 0 {
            break;
        }
        let t: [usize; 3] = std::array::from_fn(|_| rng.gen_range(0..n));
        if kept.contains(&t) {
            continue;
        }
        kept.push(t);
        if !gs_relational(n, &kept) {
            kept.pop();
        }
    }
    PreStructure::from_parts(points, kept.into_iter().collect())
}

fn gs_relational(n: usize, triples: &[[usize; 3]]) -> bool {
    let masks: Vec<u64> = triples
        .iter()
        .map(|t| t.iter().fold(0u64, |m, &i| m | 1 << i))
        .collect();
    (0u64..1 << n).all(|s| {
        let r = masks.iter().filter(|&&m| m & !s == 0).count() as i64;
        s.count_ones() as i64 - r >= 0
    })
}

fn random_vectors<R: Rng>(rng: &mut R, points: &[String], field: u32, dim: usize) -> BTreeMap<String, Vec<i64>> {
    points
        .iter()
        .map(|p| {
            let v = (0..dim).map(|_| rng.gen_range(0..field) as i64).collect();
            (p.clone(), v)
        })
        .collect()
}

fn random_oracle<R: Rng>(rng: &mut R, points: &[String], sort: Option<&str>) -> OracleFile {
    let sort = sort.map(str::to_string);
    match rng.gen_range(0..3) {
        0 => OracleFile::Free { sort },
        1 => OracleFile::Uniform {
            k: rng.gen_range(0..=points.len().max(1)),
            sort,
        },
        _ => {
            let field = *[2u32, 3, 5, 7].choose(rng).unwrap();
            let dim = rng.gen_range(1..=4);
            OracleFile::Linear {
                field,
                vectors: random_vectors(rng, points, field, dim),
                sort,
            }
        }
    }
}

fn random_function<R: Rng>(rng: &mut R, domain: &[String], codomain: &[String]) -> BTreeMap<String, String> {
    domain
        .iter()
        .map(|x| (x.clone(), codomain[rng.gen_range(0..codomain.len())].clone()))
        .collect()
}

/// Unsorted structure with random triples, functions `f`, `g`, `h` and
/// oracles `d` (random kind), `d1` (random kind), `d2` (free), `lin` (linear).
pub fn random_full<R: Rng>(rng: &mut R, n: usize) -> PreStructure {
    assert!(n > 0);
    let points = labels("p", n);
    let triples = (0..rng.gen_range(0..=n + 1))
        .map(|_| std::array::from_fn(|_| points[rng.gen_range(0..n)].clone()))
        .collect();
    let functions = ["f", "g", "h"]
        .iter()
        .map(|name| (name.to_string(), random_function(rng, &points, &points)))
        .collect();
    let field = *[2u32, 3, 5].choose(rng).unwrap();
    let dim = rng.gen_range(1..=4);
    let oracles = BTreeMap::from([
        ("d".to_string(), random_oracle(rng, &points, None)),
        ("d1".to_string(), random_oracle(rng, &points, None)),
        ("d2".to_string(), OracleFile::Free { sort: None }),
        (
            "lin".to_string(),
            OracleFile::Linear {
                field,
                vectors: random_vectors(rng, &points, field, dim),
                sort: None,
            },
        ),
    ]);
    PreStructure::from_file(&StructureFile {
        points,
        triples,
        functions,
        sorts: None,
        oracles,
        spec: None,
    })
    .expect("generated structure is valid")
}

/// Two-sorted structure with `n` points in each sort, a random bijection
/// and oracles `d1` on D and `d2` on A.
pub fn random_sorted<R: Rng>(rng: &mut R, n: usize) -> PreStructure {
    let d = labels("x", n);
    let a = labels("y", n);
    let mut image = a.clone();
    image.shuffle(rng);
    let bijection = d.iter().cloned().zip(image).collect();
    let points: Vec<String> = d.iter().chain(&a).cloned().collect();
    let triples = (0..rng.gen_range(0..=n))
        .map(|_| std::array::from_fn(|_| points[rng.gen_range(0..points.len())].clone()))
        .collect();
    let oracles = BTreeMap::from([
        ("d1".to_string(), random_oracle(rng, &d, Some("D"))),
        ("d2".to_string(), random_oracle(rng, &a, Some("A"))),
    ]);
    PreStructure::from_file(&StructureFile {
        points,
        triples,
        functions: BTreeMap::new(),
        sorts: Some(SortsFile { d, a, bijection }),
        oracles,
        spec: None,
    })
    .expect("generated structure is valid")
}
