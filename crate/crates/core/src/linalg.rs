//! Dense exact linear algebra over ℚ for the small systems met here.

use num::{BigRational, One, Zero};

/// Reduces `m` (rows × `ncols`) to reduced row echelon form in place and
/// returns the pivot columns in increasing order.
pub fn rref(m: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(sel) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, sel);
        let inv = BigRational::one() / &m[row][col];
        for v in m[row].iter_mut().skip(col) {
            *v *= &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for c in col..ncols {
                if !pivot_row[c].is_zero() {
                    other[c] -= &f * &pivot_row[c];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Kernel basis of `m`, one vector per free column. Each vector has a 1 in its
/// free column and nonzero entries only in pivot columns to the left of it.
pub fn nullspace(m: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut work = m.to_vec();
    let pivots = rref(&mut work, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![BigRational::zero(); ncols];
        v[free] = BigRational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -work[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn rank(m: &[Vec<BigRational>], ncols: usize) -> usize {
    let mut work = m.to_vec();
    rref(&mut work, ncols).len()
}
