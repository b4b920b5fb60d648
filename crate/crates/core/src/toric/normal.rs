//! Smith and Hermite normal forms, kernels and rank over ℤ.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::matrix::{div_euclid, IntMatrix};

/// `U·A·V = D` with `U`, `V` unimodular and `D` diagonal, `d₁ | d₂ | …`,
/// all `dᵢ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Snf {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// The diagonal of `D`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

fn smallest_nonzero(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let a = d[(i, j)].abs();
            if !a.is_zero() && best.as_ref().is_none_or(|(_, b)| a < *b) {
                best = Some(((i, j), a));
            }
        }
    }
    best.map(|(p, _)| p)
}

pub fn snf(a: &IntMatrix) -> Snf {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = smallest_nonzero(&d, t) else {
                return Snf { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let p = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = -div_euclid(&d[(i, t)], &p);
                if !q.is_zero() {
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                }
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = -div_euclid(&d[(t, j)], &p);
                if !q.is_zero() {
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                }
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the remaining block by the pivot.
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[(i, j)] % &p).is_zero()));
            match bad {
                Some(i) => {
                    let one = BigInt::from(1);
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    Snf { u, d, v }
}

/// Row-reduces `a` on its first `pivot_cols` columns into Hermite form
/// (positive pivots, entries above a pivot reduced into `[0, pivot)`),
/// applying every row operation to all columns. Returns the rank.
pub(crate) fn echelon(a: &mut IntMatrix, pivot_cols: usize) -> usize {
    let m = a.rows();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m {
            break;
        }
        loop {
            let pivot = (r..m)
                .filter(|&i| !a[(i, c)].is_zero())
                .min_by(|&x, &y| a[(x, c)].abs().cmp(&a[(y, c)].abs()));
            let Some(p) = pivot else { break };
            a.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m {
                if !a[(i, c)].is_zero() {
                    let q = -div_euclid(&a[(i, c)], &a[(r, c)]);
                    a.add_row(i, r, &q);
                    done &= a[(i, c)].is_zero();
                }
            }
            if done {
                break;
            }
        }
        if a[(r, c)].is_zero() {
            continue;
        }
        if a[(r, c)].is_negative() {
            a.negate_row(r);
        }
        for i in 0..r {
            let q = -div_euclid(&a[(i, c)], &a[(r, c)]);
            if !q.is_zero() {
                a.add_row(i, r, &q);
            }
        }
        r += 1;
    }
    r
}

/// Row Hermite normal form with zero rows dropped: the canonical basis of
/// the row lattice.
pub fn hnf(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let r = echelon(&mut h, a.cols());
    h.truncate_rows(r);
    h
}

/// Hermite form together with the unimodular transform: `u·a = h` where
/// the first `rank` rows of `h` are the reduced basis and the rest are zero.
pub fn hnf_with_transform(a: &IntMatrix) -> (IntMatrix, IntMatrix, usize) {
    let n = a.cols();
    let mut aug = a.hstack(&IntMatrix::identity(a.rows()));
    let r = echelon(&mut aug, n);
    (aug.select_cols(0..n), aug.select_cols(n..n + a.rows()), r)
}

pub fn rank(a: &IntMatrix) -> usize {
    let mut h = a.clone();
    echelon(&mut h, a.cols())
}

/// A basis (in Hermite form) of `{y ∈ ℤᵐ : y·a = 0}`.
pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let (_, u, r) = hnf_with_transform(a);
    hnf(&u.select_rows(r..a.rows()))
}

/// A basis (as rows, Hermite form) of `{x ∈ ℤⁿ : a·x = 0}`.
pub fn right_kernel(a: &IntMatrix) -> IntMatrix {
    left_kernel(&a.transpose())
}
