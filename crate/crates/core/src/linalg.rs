//! Dense linear algebra backends.
//!
//! Exact routines are fraction-field Gaussian elimination over any
//! [`Scalar`]; they are only meaningful for exact scalars. Float routines go
//! through nalgebra's SVD with a threshold relative to the largest singular
//! value.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{Complex64, Scalar};

/// Reduced row echelon form. Returns the nonzero rows and pivot columns.
pub fn exact_rref<S: Scalar>(rows: &[Vec<S>], ncols: usize) -> (Vec<Vec<S>>, Vec<usize>) {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for x in m[r].iter_mut().skip(c) {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone();
            for j in c..ncols {
                if m[r][j].is_zero() {
                    continue;
                }
                let v = m[i][j].clone() - factor.clone() * m[r][j].clone();
                m[i][j] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn exact_rank<S: Scalar>(rows: &[Vec<S>], ncols: usize) -> usize {
    // forward elimination only; cheaper than full rref
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for i in (r + 1)..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone() * inv.clone();
            for j in c..ncols {
                if m[r][j].is_zero() {
                    continue;
                }
                let v = m[i][j].clone() - factor.clone() * m[r][j].clone();
                m[i][j] = v;
            }
        }
        r += 1;
    }
    r
}

/// Right kernel basis, one vector per free column, read off the rref.
pub fn exact_nullspace<S: Scalar>(rows: &[Vec<S>], ncols: usize) -> Vec<Vec<S>> {
    let (rref, pivots) = exact_rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); ncols];
            v[f] = S::one();
            for (row, &p) in rref.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Determinant by elimination (exact scalars).
pub fn exact_det<S: Scalar>(rows: &[Vec<S>]) -> S {
    let n = rows.len();
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return S::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det = det * pivot.clone();
        let inv = S::one() / pivot;
        for i in (c + 1)..n {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone() * inv.clone();
            for j in c..n {
                if m[c][j].is_zero() {
                    continue;
                }
                let v = m[i][j].clone() - factor.clone() * m[c][j].clone();
                m[i][j] = v;
            }
        }
    }
    det
}

/// Canonical basis of a row span: the rref rows. Two spans are equal iff
/// their canonical bases are equal (exact mode).
pub fn exact_span_basis<S: Scalar>(vectors: &[Vec<S>], dim: usize) -> Vec<Vec<S>> {
    exact_rref(vectors, dim).0
}

fn to_complex_matrix(rows: &[Vec<Complex64>], ncols: usize) -> DMatrix<Complex64> {
    // pad to at least square so the thin SVD exposes the full kernel
    let nrows = rows.len().max(ncols);
    DMatrix::from_fn(nrows, ncols, |i, j| {
        rows.get(i)
            .map(|r| r[j])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    })
}

pub fn complex_singular_values(rows: &[Vec<Complex64>], ncols: usize) -> Vec<f64> {
    if ncols == 0 {
        return Vec::new();
    }
    let m = to_complex_matrix(rows, ncols);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    if smax == 0.0 || !smax.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

pub fn complex_rank(rows: &[Vec<Complex64>], ncols: usize, tol: f64) -> usize {
    rank_from_singular_values(&complex_singular_values(rows, ncols), tol)
}

pub fn complex_nullspace(rows: &[Vec<Complex64>], ncols: usize, tol: f64) -> Vec<Vec<Complex64>> {
    if ncols == 0 {
        return Vec::new();
    }
    let m = to_complex_matrix(rows, ncols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    (0..sv.len())
        .filter(|&k| smax == 0.0 || sv[k] <= tol * smax)
        .map(|k| (0..ncols).map(|j| v_t[(k, j)].conj()).collect())
        .collect()
}

/// Singular values of a real matrix, descending.
pub fn real_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn real_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    rank_from_singular_values(&real_singular_values(m), tol)
}

fn pad_square(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows().max(m.ncols());
    let mut p = DMatrix::zeros(n, m.ncols());
    p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    p
}

/// Orthonormal kernel basis (columns) and orthonormal image basis (columns)
/// of a real matrix at the given relative tolerance.
pub fn real_kernel_and_image(m: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let ncols = m.ncols();
    let nrows = m.nrows();
    let padded = pad_square(m);
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..sv.len())
        .filter(|&k| smax > 0.0 && sv[k] > tol * smax)
        .collect();
    let drop: Vec<usize> = (0..sv.len()).filter(|k| !keep.contains(k)).collect();
    let kernel = DMatrix::from_fn(ncols, drop.len(), |i, j| v_t[(drop[j], i)]);
    let image = DMatrix::from_fn(nrows, keep.len(), |i, j| u[(i, keep[j])]);
    (kernel, image)
}

/// Minimum-norm least-squares solution with the rank truncated at `tol`.
pub fn real_pinv_solve(m: &DMatrix<f64>, rhs: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let eps = if smax > 0.0 { tol * smax } else { 0.0 };
    svd.solve(rhs, eps.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Orthonormal basis of the column span of `m` (complex), dropping columns
/// whose singular value is below `tol` relative to the largest.
pub fn complex_orthonormal_columns(m: &DMatrix<Complex64>, tol: f64) -> DMatrix<Complex64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..sv.len())
        .filter(|&k| smax > 0.0 && sv[k] > tol * smax)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Sine of the largest principal angle between two column spans of equal
/// dimension. Returns 1 when the dimensions differ.
pub fn max_principal_angle_sine(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let qa = complex_orthonormal_columns(a, 1e-12);
    let qb = complex_orthonormal_columns(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    // residual of projecting qb onto span(qa)
    let proj = &qa * (qa.adjoint() * &qb);
    let resid = &qb - proj;
    let sv = resid.singular_values();
    sv.iter().copied().fold(0.0_f64, f64::max).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    fn q(v: i64) -> GaussRat {
        GaussRat::from_i64(v)
    }

    #[test]
    fn exact_rank_and_kernel() {
        let m = vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ];
        assert_eq!(exact_rank(&m, 3), 2);
        let ker = exact_nullspace(&m, 3);
        assert_eq!(ker.len(), 1);
        for row in &m {
            let dot = row
                .iter()
                .zip(&ker[0])
                .fold(GaussRat::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn exact_determinant() {
        let m = vec![vec![q(2), q(1)], vec![q(7), q(4)]];
        assert_eq!(exact_det(&m), q(1));
        let s = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(exact_det(&s), q(-1));
    }

    #[test]
    fn complex_kernel_of_wide_matrix() {
        let c = |r: f64| Complex64::new(r, 0.0);
        let rows = vec![vec![c(1.0), c(1.0), c(0.0)]];
        let ker = complex_nullspace(&rows, 3, 1e-10);
        assert_eq!(ker.len(), 2);
        assert_eq!(complex_rank(&rows, 3, 1e-10), 1);
    }

    #[test]
    fn principal_angles() {
        let a = DMatrix::from_row_slice(3, 1, &[Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into()]);
        let b = DMatrix::from_row_slice(3, 1, &[Complex64::new(0.0, 2.0), 0.0.into(), 0.0.into()]);
        assert!(max_principal_angle_sine(&a, &b) < 1e-14);
        let c = DMatrix::from_row_slice(3, 1, &[Complex64::new(0.0, 0.0), 1.0.into(), 0.0.into()]);
        assert!((max_principal_angle_sine(&a, &c) - 1.0).abs() < 1e-14);
    }
}
