use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::matrix::IntMatrix;
use super::normal::{hnf_with_transform, snf};
use crate::error::{Error, Result};

/// A torsion coset of a subtorus of the split torus `𝔾ₘⁿ`: the points
/// where each character `gᵢ` takes the value `e^{2πi·qᵢ}`.
///
/// Stored canonically: generators in Hermite form and the torsion values
/// transformed accordingly, reduced into `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeCoset {
    n: usize,
    gens: IntMatrix,
    torsion: Vec<BigRational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CosetFile {
    n: usize,
    gens: IntMatrix,
    torsion: Vec<TorsionValue>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TorsionValue {
    Int(i64),
    Text(String),
}

fn parse_rational(path: &str, s: &str) -> Result<BigRational> {
    let bad = || Error::input(path, format!("not a rational number: '{s}'"));
    let (num, den) = match s.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::input(path, "zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

fn show(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Outcome of solving `G·θ ≡ q (mod 1)` on the torus.
struct Solved {
    rank: usize,
    /// `None` when the system is inconsistent.
    components: Option<BigInt>,
}

fn solve(gens: &IntMatrix, torsion: &[BigRational]) -> Solved {
    let s = snf(gens);
    let diag = s.diagonal();
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    for i in 0..gens.rows() {
        if i < diag.len() && !diag[i].is_zero() {
            continue;
        }
        let mut v = BigRational::zero();
        for (j, q) in torsion.iter().enumerate() {
            if !s.u[(i, j)].is_zero() {
                v += q * BigRational::from_integer(s.u[(i, j)].clone());
            }
        }
        if !v.is_integer() {
            return Solved { rank, components: None };
        }
    }
    let product = diag.iter().filter(|d| !d.is_zero()).fold(BigInt::one(), |a, d| a * d);
    Solved { rank, components: Some(product) }
}

impl LatticeCoset {
    /// Validates and canonicalizes. Inconsistent systems are rejected.
    pub fn new(n: usize, gens: &IntMatrix, torsion: &[BigRational]) -> Result<Self> {
        let gens = if gens.rows() == 0 { IntMatrix::zeros(0, n) } else { gens.clone() };
        if gens.cols() != n {
            return Err(Error::input(
                "gens",
                format!("rows have {} entries but n = {n}", gens.cols()),
            ));
        }
        if torsion.len() != gens.rows() {
            return Err(Error::input(
                "torsion",
                format!("{} values for {} generators", torsion.len(), gens.rows()),
            ));
        }
        let (h, u, r) = hnf_with_transform(&gens);
        let mut values = Vec::with_capacity(gens.rows());
        for i in 0..gens.rows() {
            let mut v = BigRational::zero();
            for (j, q) in torsion.iter().enumerate() {
                v += q * BigRational::from_integer(u[(i, j)].clone());
            }
            values.push(frac(&v));
        }
        if values[r..].iter().any(|v| !v.is_zero()) {
            return Err(Error::Domain("inconsistent torsion values: the coset is empty".into()));
        }
        values.truncate(r);
        Ok(LatticeCoset { n, gens: h.select_rows(0..r), torsion: values })
    }

    /// The algebraic subgroup cut out by `χ = 1` for every `χ` in `lattice`.
    pub fn subgroup(lattice: &Lattice) -> Self {
        let r = lattice.rank();
        LatticeCoset {
            n: lattice.ambient(),
            gens: lattice.basis().clone(),
            torsion: vec![BigRational::zero(); r],
        }
    }

    pub fn from_rows(n: usize, rows: &[Vec<i64>], torsion: &[&str]) -> Result<Self> {
        let t = torsion
            .iter()
            .enumerate()
            .map(|(i, s)| parse_rational(&format!("torsion[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, &IntMatrix::from_rows(n, rows)?, &t)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CosetFile = serde_json::from_str(text)?;
        Self::from_file(f)
    }

    fn from_file(f: CosetFile) -> Result<Self> {
        let torsion = f
            .torsion
            .iter()
            .enumerate()
            .map(|(i, t)| match t {
                TorsionValue::Int(v) => Ok(BigRational::from_integer((*v).into())),
                TorsionValue::Text(s) => parse_rational(&format!("torsion[{i}]"), s),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(f.n, &f.gens, &torsion)
    }

    /// Accepts a single coset object or an array of them.
    pub fn list_from_json(text: &str) -> Result<Vec<Self>> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v {
            serde_json::Value::Array(items) => items
                .into_iter()
                .enumerate()
                .map(|(i, item)| {
                    let f: CosetFile = serde_json::from_value(item)
                        .map_err(|e| Error::input(format!("[{i}]"), e.to_string()))?;
                    Self::from_file(f)
                })
                .collect(),
            other => Ok(vec![Self::from_file(serde_json::from_value(other)?)?]),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file()).expect("coset serializes")
    }

    fn file(&self) -> CosetFile {
        CosetFile {
            n: self.n,
            gens: self.gens.clone(),
            torsion: self.torsion.iter().map(|q| TorsionValue::Text(show(q))).collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &IntMatrix {
        &self.gens
    }

    pub fn torsion(&self) -> &[BigRational] {
        &self.torsion
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.n, &self.gens).expect("canonical generators")
    }

    pub fn dim(&self) -> usize {
        self.n - self.gens.rows()
    }

    /// Number of torsion cosets of the connected subtorus making up the set.
    pub fn components(&self) -> BigInt {
        solve(&self.gens, &self.torsion)
            .components
            .expect("constructed cosets are consistent")
    }
}

impl Serialize for LatticeCoset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.file().serialize(s)
    }
}

/// Dimension and component count of an intersection; `dim = -1` and no
/// components when it is empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Intersection {
    pub dim: i64,
    #[serde(serialize_with = "super::matrix::serialize_big")]
    pub components: BigInt,
}

impl Intersection {
    pub fn is_empty(&self) -> bool {
        self.dim < 0
    }
}

pub fn intersect_cosets(w: &LatticeCoset, s: &LatticeCoset) -> Result<Intersection> {
    if w.n != s.n {
        return Err(Error::Domain(format!("ambient dimension mismatch: {} vs {}", w.n, s.n)));
    }
    let gens = w.gens.vstack(&s.gens)?;
    let torsion: Vec<BigRational> = w.torsion.iter().chain(&s.torsion).cloned().collect();
    let solved = solve(&gens, &torsion);
    Ok(match solved.components {
        Some(c) => Intersection { dim: (w.n - solved.rank) as i64, components: c },
        None => Intersection { dim: -1, components: BigInt::zero() },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Typicality {
    pub expected: i64,
    pub actual: i64,
    pub atypical: bool,
    /// `actual − max(expected, 0)`.
    pub defect: i64,
}

/// Compares the dimension of `W ∩ S` with `dim W + dim S − n`. Returns
/// `None` for an empty intersection.
pub fn typicality(w: &LatticeCoset, s: &LatticeCoset) -> Result<Option<Typicality>> {
    let i = intersect_cosets(w, s)?;
    if i.is_empty() {
        return Ok(None);
    }
    let expected = w.dim() as i64 + s.dim() as i64 - w.n as i64;
    Ok(Some(Typicality {
        expected,
        actual: i.dim,
        atypical: i.dim > expected,
        defect: i.dim - expected.max(0),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize, rows: &[Vec<i64>], t: &[&str]) -> LatticeCoset {
        LatticeCoset::from_rows(n, rows, t).unwrap()
    }

    #[test]
    fn intersection_examples() {
        let x1 = c(2, &[vec![1, 0]], &["0"]);
        let y1 = c(2, &[vec![0, 1]], &["0"]);
        assert_eq!(
            intersect_cosets(&x1, &y1).unwrap(),
            Intersection { dim: 0, components: 1.into() }
        );
        let w = c(2, &[vec![2, 3]], &["0"]);
        assert_eq!(
            intersect_cosets(&w, &x1).unwrap(),
            Intersection { dim: 0, components: 3.into() }
        );
        let xm1 = c(2, &[vec![1, 0]], &["1/2"]);
        let e = intersect_cosets(&x1, &xm1).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.dim, -1);
    }

    #[test]
    fn typicality_examples() {
        let x1 = c(2, &[vec![1, 0]], &["0"]);
        let t = typicality(&x1, &x1).unwrap().unwrap();
        assert_eq!(t, Typicality { expected: 0, actual: 1, atypical: true, defect: 1 });
        let y1 = c(2, &[vec![0, 1]], &["0"]);
        let t = typicality(&x1, &y1).unwrap().unwrap();
        assert_eq!((t.expected, t.actual, t.atypical), (0, 0, false));
        let w = c(3, &[vec![1, 0, 0]], &["0"]);
        let s = c(3, &[vec![1, 0, 0], vec![0, 1, 0]], &["0", "0"]);
        let t = typicality(&w, &s).unwrap().unwrap();
        assert_eq!((t.expected, t.actual, t.atypical), (0, 1, true));
        let xm1 = c(2, &[vec![1, 0]], &["1/2"]);
        assert_eq!(typicality(&x1, &xm1).unwrap(), None);
    }

    #[test]
    fn construction_rejects_inconsistent_values() {
        assert!(LatticeCoset::from_rows(2, &[vec![1, 0], vec![2, 0]], &["1/3", "1/3"]).is_err());
        let ok = c(2, &[vec![1, 0], vec![2, 0]], &["1/3", "2/3"]);
        assert_eq!(ok.gens().rows(), 1);
        assert!(LatticeCoset::from_rows(2, &[vec![1, 0]], &[]).is_err());
        assert!(LatticeCoset::from_rows(2, &[vec![1, 0]], &["x"]).is_err());
    }

    #[test]
    fn canonical_json_round_trip() {
        let a = LatticeCoset::from_json(r#"{"n":2,"gens":[[2,3],[4,6]],"torsion":["1/3","-4/3"]}"#).unwrap();
        let text = a.to_json();
        assert_eq!(text, r#"{"n":2,"gens":[[2,3]],"torsion":["1/3"]}"#);
        let b = LatticeCoset::from_json(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_json(), text);
        assert_eq!(a.components(), BigInt::one());
        assert_eq!(c(1, &[vec![2]], &["0"]).components(), BigInt::from(2));
        let list = LatticeCoset::list_from_json(&format!("[{text},{text}]")).unwrap();
        assert_eq!(list.len(), 2);
    }
}
