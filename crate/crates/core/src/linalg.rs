//! Small real linear algebra: row reduction and null spaces.

use nalgebra::{DMatrix, DVector};

/// Pivot threshold used by [`rref`].
pub const RREF_TOL: f64 = 1e-10;

/// Reduced row echelon form with partial pivoting.
///
/// Returns the reduced matrix (zero rows dropped) and the pivot columns.
pub fn rref(m: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            for i in r..rows {
                a[(i, c)] = 0.0;
            }
            continue;
        }
        a.swap_rows(r, best);
        let p = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    // snap round-off
    a.iter_mut().for_each(|x| {
        if x.abs() < tol {
            *x = 0.0
        }
    });
    (a.rows(0, r).into_owned(), pivots)
}

/// Null-space basis read off the RREF: one vector per free column.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    let (r, pivots) = rref(m, tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = DVector::zeros(cols);
            v[f] = 1.0;
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, f)];
            }
            v
        })
        .collect()
}

/// Rank from singular values; independent of [`rref`].
pub fn rank_svd(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_of_simple_system() {
        let m = DMatrix::from_row_slice(2, 3, &[2.0, 4.0, 0.0, 1.0, 2.0, 1.0]);
        let (r, piv) = rref(&m, RREF_TOL);
        assert_eq!(piv, vec![0, 2]);
        assert_eq!(r, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0]));
        let ns = null_space(&m, RREF_TOL);
        assert_eq!(ns.len(), 1);
        assert!((&m * &ns[0]).norm() < 1e-14);
    }

    #[test]
    fn rank_agrees_between_routes() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(rank_svd(&m, 1e-10), 2);
        assert_eq!(rref(&m, RREF_TOL).1.len(), 2);
    }
}
