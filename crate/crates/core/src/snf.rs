//! Smith normal form over `Z` with unimodular transforms.
//!
//! For an input `M` we return `S = U * M * V` with `U`, `V` unimodular and
//! `S` diagonal, its diagonal `d_1 | d_2 | ... | d_r` positive followed by
//! zeros. The inverse of `U` is tracked as well so that quotient maps
//! `Z^n / M Z^m` can both project and lift.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`.
    pub u_inv: IntMatrix,
}

impl SnfResult {
    /// Diagonal of `s`, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// Nontrivial invariant factors (those different from 1 and 0).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal()
            .into_iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .collect()
    }
}

struct Work {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
    }

    /// row[t] += f * row[s]
    fn add_row(&mut self, t: usize, s: usize, f: &BigInt) {
        self.a.add_row_multiple(t, s, f);
        self.u.add_row_multiple(t, s, f);
        self.u_inv.add_col_multiple(s, t, &-f);
    }

    /// col[t] += f * col[s]
    fn add_col(&mut self, t: usize, s: usize, f: &BigInt) {
        self.a.add_col_multiple(t, s, f);
        self.v.add_col_multiple(t, s, f);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    /// Position of a nonzero entry of minimal absolute value in the trailing
    /// submatrix starting at `(k, k)`.
    fn min_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in k..self.a.rows() {
            for j in k..self.a.cols() {
                let e = &self.a[(i, j)];
                if e.is_zero() {
                    continue;
                }
                let abs = e.abs();
                if best.as_ref().is_none_or(|(_, b)| abs < *b) {
                    best = Some(((i, j), abs));
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

/// Smith normal form, pivoting on an entry of minimal absolute value.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = Work {
        a: m.clone(),
        u: IntMatrix::identity(rows),
        u_inv: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
    };

    for k in 0..rows.min(cols) {
        let Some((pi, pj)) = w.min_pivot(k) else {
            break;
        };
        w.swap_rows(k, pi);
        w.swap_cols(k, pj);

        loop {
            // clear column k below the pivot and row k right of it; any
            // nonzero remainder becomes the new (smaller) pivot
            let mut dirty = false;
            for i in k + 1..rows {
                if w.a[(i, k)].is_zero() {
                    continue;
                }
                let q = w.a[(i, k)].div_floor(&w.a[(k, k)]);
                w.add_row(i, k, &-q);
                if !w.a[(i, k)].is_zero() {
                    dirty = true;
                }
            }
            for j in k + 1..cols {
                if w.a[(k, j)].is_zero() {
                    continue;
                }
                let q = w.a[(k, j)].div_floor(&w.a[(k, k)]);
                w.add_col(j, k, &-q);
                if !w.a[(k, j)].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                let mut best = (k, k);
                let mut best_abs = w.a[(k, k)].abs();
                for i in k + 1..rows {
                    let e = w.a[(i, k)].abs();
                    if !e.is_zero() && e < best_abs {
                        best = (i, k);
                        best_abs = e;
                    }
                }
                for j in k + 1..cols {
                    let e = w.a[(k, j)].abs();
                    if !e.is_zero() && e < best_abs {
                        best = (k, j);
                        best_abs = e;
                    }
                }
                w.swap_rows(k, best.0);
                w.swap_cols(k, best.1);
                continue;
            }
            // row and column are clear; enforce divisibility of the rest
            let pivot = w.a[(k, k)].clone();
            let offender =
                (k + 1..rows).find(|&i| (k + 1..cols).any(|j| !w.a[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => w.add_row(k, i, &BigInt::one()),
                None => break,
            }
        }
        if w.a[(k, k)].is_negative() {
            w.negate_row(k);
        }
    }

    SnfResult {
        u: w.u,
        s: w.a,
        v: w.v,
        u_inv: w.u_inv,
    }
}
