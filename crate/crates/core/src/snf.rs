//! Smith normal form of integer matrices with arbitrary-precision pivots.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Invariant factors of an integer matrix: `rank` nonzero positive diagonal
/// entries in divisibility order `d1 | d2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithInvariants {
    pub rank: usize,
    pub factors: Vec<BigInt>,
}

impl SmithInvariants {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors
            .iter()
            .filter(|f| **f > BigInt::from(1))
            .cloned()
            .collect()
    }
}

fn find_min_abs_nonzero(m: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if v.is_zero() {
                continue;
            }
            match &best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if v.abs() < m[*bi][*bj].abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// Diagonalize by unimodular row and column operations; only the invariant
/// factors are retained.
#[allow(clippy::needless_range_loop)] // row operations read one row while writing another
pub fn smith_normal_form(mut m: Vec<Vec<BigInt>>) -> SmithInvariants {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    debug_assert!(m.iter().all(|r| r.len() == cols), "ragged matrix");
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = find_min_abs_nonzero(&m, t) else {
            break;
        };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);

        // clear column and row t; truncating division leaves remainders
        // strictly smaller than the pivot, so re-pivoting converges
        let mut dirty = false;
        for i in t + 1..rows {
            if m[i][t].is_zero() {
                continue;
            }
            let q = &m[i][t] / &m[t][t];
            if !q.is_zero() {
                for j in t..cols {
                    let delta = &q * &m[t][j];
                    m[i][j] -= delta;
                }
            }
            if !m[i][t].is_zero() {
                dirty = true;
            }
        }
        for j in t + 1..cols {
            if m[t][j].is_zero() {
                continue;
            }
            let q = &m[t][j] / &m[t][t];
            if !q.is_zero() {
                for i in t..rows {
                    let delta = &q * &m[i][t];
                    m[i][j] -= delta;
                }
            }
            if !m[t][j].is_zero() {
                dirty = true;
            }
        }
        if dirty {
            continue;
        }

        // force the divisibility chain: fold any non-multiple into row t
        let pivot = m[t][t].clone();
        let mut fixed = true;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if (&m[i][j] % &pivot) != BigInt::zero() {
                    for col in t..cols {
                        let add = m[i][col].clone();
                        m[t][col] += add;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }

        if m[t][t].is_negative() {
            for j in t..cols {
                m[t][j] = -m[t][j].clone();
            }
        }
        t += 1;
    }

    let factors: Vec<BigInt> = (0..t).map(|i| m[i][i].clone()).collect();
    SmithInvariants { rank: t, factors }
}

/// Whether `v` lies in the integer row span of `rows`.
///
/// Two nested lattices of equal rank and equal invariant factors coincide,
/// so appending `v` must leave the Smith form unchanged.
pub fn row_lattice_contains(rows: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let base = smith_normal_form(rows.to_vec());
    let mut extended = rows.to_vec();
    extended.push(v.to_vec());
    let ext = smith_normal_form(extended);
    base == ext
}
