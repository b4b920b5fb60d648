use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::matroid::gf_rank;
use crate::predim::{is_strong_embedding, PredimensionSpec};
use crate::structures::{Embedding, OracleFile, PreStructure, SortsFile, StructureFile};

/// The glued structure with the embeddings of both sides.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub structure: PreStructure,
    pub left: Embedding,
    pub right: Embedding,
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

/// Inverse of the `m×m` matrix with the given columns over `𝔽_p`.
fn invert_columns(cols: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let m = cols.len();
    let p64 = p as u64;
    // rows of [A | I]
    let mut a: Vec<Vec<u64>> = (0..m)
        .map(|i| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[i] as u64).collect();
            row.extend((0..m).map(|j| u64::from(i == j)));
            row
        })
        .collect();
    for c in 0..m {
        let piv = (c..m).find(|&r| a[r][c] != 0).expect("columns form a basis");
        a.swap(c, piv);
        let inv = pow_mod(a[c][c], p64 - 2, p64);
        for x in a[c].iter_mut() {
            *x = *x * inv % p64;
        }
        for r in 0..m {
            if r != c && a[r][c] != 0 {
                let f = a[r][c];
                for j in 0..2 * m {
                    a[r][j] = (a[r][j] + p64 - f * a[c][j] % p64) % p64;
                }
            }
        }
    }
    a.into_iter().map(|row| row[m..].iter().map(|&x| x as u32).collect()).collect()
}

fn apply(mat: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    mat.iter()
        .map(|row| (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p as u64) as u32)
        .collect()
}

/// Coordinates relative to a basis whose first vectors are `lead`.
struct Coordinates {
    inverse: Vec<Vec<u32>>,
}

impl Coordinates {
    fn new(lead: &[Vec<u32>], m: usize, p: u32) -> Self {
        let mut cols: Vec<Vec<u32>> = lead.to_vec();
        for j in 0..m {
            if cols.len() == m {
                break;
            }
            let mut e = vec![0; m];
            e[j] = 1;
            cols.push(e);
            if gf_rank(p, cols.iter().map(Vec::as_slice)) < cols.len() {
                cols.pop();
            }
        }
        Coordinates { inverse: invert_columns(&cols, p) }
    }

    fn of(&self, v: &[u32], p: u32) -> Vec<u32> {
        apply(&self.inverse, v, p)
    }
}

fn reduce(v: &[i64], p: u32) -> Vec<u32> {
    v.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect()
}

/// Block construction: both sides are rewritten in coordinates whose
/// leading part spans the base, then the non-base parts are placed in
/// complementary blocks.
fn linear_block(
    name: &str,
    field: u32,
    left: &BTreeMap<String, Vec<i64>>,
    right: &BTreeMap<String, Vec<i64>>,
    base: &[(String, String)],
    right_label: &dyn Fn(&str) -> String,
) -> Result<BTreeMap<String, Vec<i64>>> {
    let dim = |vs: &BTreeMap<String, Vec<i64>>| vs.values().next().map_or(0, Vec::len);
    let (mb, mc) = (dim(left), dim(right));
    let pairs: Vec<(Vec<u32>, Vec<u32>)> = base
        .iter()
        .filter_map(|(l, r)| Some((reduce(left.get(l)?, field), reduce(right.get(r)?, field))))
        .collect();
    let mut lead_l: Vec<Vec<u32>> = Vec::new();
    let mut lead_r: Vec<Vec<u32>> = Vec::new();
    for (vl, vr) in &pairs {
        lead_l.push(vl.clone());
        if gf_rank(field, lead_l.iter().map(Vec::as_slice)) < lead_l.len() {
            lead_l.pop();
        } else {
            lead_r.push(vr.clone());
        }
    }
    let r = lead_l.len();
    let mismatch = || {
        Error::Domain(format!(
            "oracle '{name}': the two sides represent the base differently"
        ))
    };
    if gf_rank(field, lead_r.iter().map(Vec::as_slice)) < r {
        return Err(mismatch());
    }
    let cl = Coordinates::new(&lead_l, mb, field);
    let cr = Coordinates::new(&lead_r, mc, field);
    for (vl, vr) in &pairs {
        let (xl, xr) = (cl.of(vl, field), cr.of(vr, field));
        if xl[..r] != xr[..r] || xl[r..].iter().any(|&x| x != 0) || xr[r..].iter().any(|&x| x != 0) {
            return Err(mismatch());
        }
    }
    let base_right: HashSet<&str> = base.iter().map(|(_, r)| r.as_str()).collect();
    let mut out = BTreeMap::new();
    for (l, v) in left {
        let x = cl.of(&reduce(v, field), field);
        let mut w: Vec<i64> = x.iter().map(|&e| e as i64).collect();
        w.extend(std::iter::repeat_n(0, mc - r));
        out.insert(l.clone(), w);
    }
    for (l, v) in right {
        if base_right.contains(l.as_str()) {
            continue;
        }
        let x = cr.of(&reduce(v, field), field);
        let mut w: Vec<i64> = x[..r].iter().map(|&e| e as i64).collect();
        w.extend(std::iter::repeat_n(0, mb - r));
        w.extend(x[r..].iter().map(|&e| e as i64));
        out.insert(right_label(l), w);
    }
    Ok(out)
}

fn keys_match<V>(what: &str, l: &BTreeMap<String, V>, r: &BTreeMap<String, V>) -> Result<()> {
    if let Some(k) = l.keys().chain(r.keys()).find(|k| !(l.contains_key(*k) && r.contains_key(*k))) {
        return Err(Error::Domain(format!("{what} '{k}' is present on one side only")));
    }
    Ok(())
}

/// Glues `b` and `c` over `a` without adding relations, identifications or
/// rank dependencies beyond those forced. `a` must embed strongly into both.
pub fn free_amalgam(
    spec: &PredimensionSpec,
    a: &PreStructure,
    b: &PreStructure,
    c: &PreStructure,
    eb: &Embedding,
    ec: &Embedding,
    budget: &Budget,
) -> Result<Amalgam> {
    eb.validate(a, b, budget)?;
    ec.validate(a, c, budget)?;
    if !is_strong_embedding(spec, a, b, eb, budget)? {
        return Err(Error::Domain("base is not strong in the left side".into()));
    }
    if !is_strong_embedding(spec, a, c, ec, budget)? {
        return Err(Error::Domain("base is not strong in the right side".into()));
    }

    let bf = b.to_file();
    let cf = c.to_file();
    let mut used: BTreeSet<String> = bf.points.iter().cloned().collect();
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    for (i, &j) in ec.map.iter().enumerate() {
        rename.insert(c.label(j).to_string(), b.label(eb.map[i]).to_string());
    }
    let mut points = bf.points.clone();
    for l in &cf.points {
        if rename.contains_key(l) {
            continue;
        }
        let mut fresh = l.clone();
        while used.contains(&fresh) {
            fresh.push('\'');
        }
        used.insert(fresh.clone());
        rename.insert(l.clone(), fresh.clone());
        points.push(fresh);
    }
    let rl = |l: &str| rename[l].clone();

    let mut triples: Vec<[String; 3]> = bf.triples.clone();
    let mut seen: BTreeSet<[String; 3]> = triples.iter().cloned().collect();
    for t in &cf.triples {
        let m = t.each_ref().map(|x| rl(x));
        if seen.insert(m.clone()) {
            triples.push(m);
        }
    }

    keys_match("function", &bf.functions, &cf.functions)?;
    let mut functions = bf.functions.clone();
    for (name, map) in &cf.functions {
        let f = functions.get_mut(name).expect("keys match");
        for (x, y) in map {
            f.insert(rl(x), rl(y));
        }
    }

    let sorts = match (&bf.sorts, &cf.sorts) {
        (None, None) => None,
        (Some(sb), Some(sc)) => {
            let mut s: SortsFile = sb.clone();
            for x in &sc.d {
                if !s.d.contains(&rl(x)) {
                    s.d.push(rl(x));
                }
            }
            for x in &sc.a {
                if !s.a.contains(&rl(x)) {
                    s.a.push(rl(x));
                }
            }
            for (x, y) in &sc.bijection {
                s.bijection.insert(rl(x), rl(y));
            }
            Some(s)
        }
        _ => return Err(Error::Domain("only one side is sorted".into())),
    };

    keys_match("oracle", &bf.oracles, &cf.oracles)?;
    let base_labels: Vec<(String, String)> = (0..a.n())
        .map(|i| (b.label(eb.map[i]).to_string(), c.label(ec.map[i]).to_string()))
        .collect();
    let mut oracles = BTreeMap::new();
    for (name, ob) in &bf.oracles {
        let merged = match (ob, &cf.oracles[name]) {
            (OracleFile::Free { sort: s1 }, OracleFile::Free { sort: s2 }) if s1 == s2 => {
                OracleFile::Free { sort: s1.clone() }
            }
            (
                OracleFile::Linear { field: f1, vectors: v1, sort: s1 },
                OracleFile::Linear { field: f2, vectors: v2, sort: s2 },
            ) if f1 == f2 && s1 == s2 => OracleFile::Linear {
                field: *f1,
                vectors: linear_block(name, *f1, v1, v2, &base_labels, &rl)?,
                sort: s1.clone(),
            },
            _ => {
                return Err(Error::Domain(format!(
                    "oracle '{name}': kinds are incompatible for a free amalgam"
                )))
            }
        };
        oracles.insert(name.clone(), merged);
    }

    let file = StructureFile { points, triples, functions, sorts, oracles, spec: bf.spec.clone() };
    let d = PreStructure::from_file(&file)?;
    let left = Embedding::identity(b.n());
    let right = Embedding {
        map: (0..c.n()).map(|j| d.index_of(&rl(c.label(j))).expect("glued label")).collect(),
    };
    Ok(Amalgam { structure: d, left, right })
}
