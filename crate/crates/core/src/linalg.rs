//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Mat, C64};

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Nearest point (Frobenius) with all singular values at most `r`.
///
/// Computed as `m − m Σ (1 − r/σ_i) v_i v_i*` over the right singular
/// vectors with `σ_i > r`, taken from the eigenvectors of `m* m`. The
/// complex SVD routine is only accurate to about `1e-9` on some inputs.
pub fn clip_singular_values(m: &Mat, r: f64) -> Mat {
    if m.is_empty() {
        return m.clone();
    }
    let gram = m.adjoint() * m;
    let eig = SymmetricEigen::new(gram);
    let mut shrink = Mat::zeros(m.ncols(), m.ncols());
    let mut any = false;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let sigma = l.max(0.0).sqrt();
        if sigma > r {
            any = true;
            let v = eig.eigenvectors.column(i);
            shrink += v * v.adjoint() * C64::new(1.0 - r / sigma, 0.0);
        }
    }
    if !any {
        return m.clone();
    }
    m - m * shrink
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// `exp(i s h)` for Hermitian `h`, unitary to rounding.
pub fn exp_i_hermitian(h: &Mat, s: f64) -> Mat {
    let (vals, v) = hermitian_eigen(h);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::from_polar(1.0, s * l)),
    ));
    &v * d * v.adjoint()
}

/// Orthonormal basis (columns) of the right null space of `a`, keeping
/// directions whose singular value is at most `tol`.
pub fn null_space(a: &Mat, tol: f64) -> Mat {
    let n = a.ncols();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad to at least n rows so the SVD returns a full right basis.
    let padded = if a.nrows() < n {
        let mut p = Mat::zeros(n, n);
        p.rows_mut(0, a.nrows()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let keep: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol).collect();
    Mat::from_fn(n, keep.len(), |r, c| vt[(keep[c], r)].conj())
}

/// Orthonormal basis of the column span, dropping directions with singular
/// value below `tol` times the largest.
pub fn column_span(a: &Mat, rel_tol: f64) -> Mat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax.max(1e-300) && smax > 0.0)
        .collect();
    Mat::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_diag() {
        let m = Mat::from_diagonal(&DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.5, 0.0)]));
        let p = clip_singular_values(&m, 1.0);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((p[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(p[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn clip_is_stable_under_rounding() {
        // Unitary conjugate of diag(1.93, 1.92, 0.85) with complex entries.
        let h = Mat::from_row_slice(3, 3, &[
            C64::new(0.4, 0.0), C64::new(0.3, 0.1), C64::new(-0.2, 0.5),
            C64::new(0.3, -0.1), C64::new(-0.6, 0.0), C64::new(0.1, 0.2),
            C64::new(-0.2, -0.5), C64::new(0.1, -0.2), C64::new(0.9, 0.0),
        ]);
        let u = exp_i_hermitian(&h, 1.3);
        let w = exp_i_hermitian(&h, -0.4);
        let d = Mat::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.93, 0.0),
            C64::new(1.92, 0.0),
            C64::new(0.85, 0.0),
        ]));
        let m = &u * d * &w;
        let p = clip_singular_values(&m, 1.5);
        let q = clip_singular_values(&(&m * C64::new(1.0 + 1e-15, 0.0)), 1.5);
        assert!((&p - &q).norm() < 1e-13);
        let expect = &u * Mat::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(1.5, 0.0),
            C64::new(0.85, 0.0),
        ])) * &w;
        assert!((&p - expect).norm() < 1e-12);
        assert!((clip_singular_values(&p, 1.5) - &p).norm() < 1e-13);
    }

    #[test]
    fn null_space_wide() {
        let a = Mat::from_row_slice(1, 3, &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn exp_is_unitary() {
        let h = Mat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.5, 0.2),
            C64::new(0.5, -0.2), C64::new(-0.3, 0.0),
        ]);
        let u = exp_i_hermitian(&h, 0.7);
        assert!((u.adjoint() * &u - Mat::identity(2, 2)).norm() < 1e-12);
    }
}
