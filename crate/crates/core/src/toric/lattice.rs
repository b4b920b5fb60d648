use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::normal::{hnf, left_kernel, right_kernel, snf};
use crate::error::{Error, Result};

/// A sublattice of ℤⁿ, stored by its Hermite basis so that equality is
/// syntactic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Lattice {
    n: usize,
    basis: IntMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    n: usize,
    basis: IntMatrix,
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = LatticeFile::deserialize(d)?;
        Lattice::new(f.n, &f.basis).map_err(serde::de::Error::custom)
    }
}

impl Lattice {
    /// The lattice generated by the rows of `gens`; an empty generator list
    /// gives the zero lattice.
    pub fn new(n: usize, gens: &IntMatrix) -> Result<Self> {
        if gens.rows() > 0 && gens.cols() != n {
            return Err(Error::Domain(format!(
                "generators have {} columns but the ambient dimension is {n}",
                gens.cols()
            )));
        }
        let gens = if gens.rows() == 0 { IntMatrix::zeros(0, n) } else { gens.clone() };
        Ok(Lattice { n, basis: hnf(&gens) })
    }

    pub fn from_rows(n: usize, rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(n, &IntMatrix::from_rows(n, rows)?)
    }

    pub fn zero(n: usize) -> Self {
        Lattice { n, basis: IntMatrix::zeros(0, n) }
    }

    pub fn full(n: usize) -> Self {
        Lattice { n, basis: IntMatrix::identity(n) }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    fn same_ambient(&self, other: &Lattice) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::Domain(format!("ambient dimension mismatch: {} vs {}", self.n, other.n)))
        }
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.same_ambient(other)?;
        Lattice::new(self.n, &self.basis.vstack(&other.basis)?)
    }

    /// `L₁ ∩ L₂`, from the integer relations `a·B₁ = b·B₂`.
    pub fn intersection(&self, other: &Lattice) -> Result<Lattice> {
        self.same_ambient(other)?;
        if self.rank() == 0 || other.rank() == 0 {
            return Ok(Lattice::zero(self.n));
        }
        let mut neg = other.basis.clone();
        for i in 0..neg.rows() {
            neg.negate_row(i);
        }
        let k = left_kernel(&self.basis.vstack(&neg)?);
        let coeffs = k.select_cols(0..self.rank());
        Lattice::new(self.n, &coeffs.mul(&self.basis)?)
    }

    /// `(ℚ·L) ∩ ℤⁿ`.
    pub fn saturation(&self) -> Lattice {
        if self.rank() == 0 {
            return self.clone();
        }
        let k = right_kernel(&self.basis);
        if k.rows() == 0 {
            return Lattice::full(self.n);
        }
        Lattice { n: self.n, basis: hnf(&left_kernel(&k.transpose())) }
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation() == *self
    }

    pub fn contains(&self, other: &Lattice) -> Result<bool> {
        Ok(self.sum(other)? == *self)
    }

    /// Whether `v` lies in the ℚ-span of the lattice.
    pub fn spans(&self, v: &[BigInt]) -> bool {
        let row = IntMatrix::from_rows(self.n, &[v.to_vec()]).expect("vector of ambient length");
        let stacked = self.basis.vstack(&row).expect("same ambient");
        super::normal::rank(&stacked) == self.rank()
    }

    /// `[sat(L) : L]`, the product of the invariant factors.
    pub fn saturation_index(&self) -> BigInt {
        snf(&self.basis)
            .diagonal()
            .into_iter()
            .filter(|d| !d.is_zero())
            .fold(BigInt::one(), |acc, d| acc * d)
    }
}
