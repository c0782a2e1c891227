//! Thin wrappers around LAPACK-backed eigendecompositions plus a few small
//! complex-vector helpers used throughout the crate.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    a.eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e}")))
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub fn eigh_complex(a: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    a.eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed: {e}")))
}

/// Maximum absolute deviation from symmetry, `max |a - a^T|`.
pub fn max_asymmetry(a: ArrayView2<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            dev = dev.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    dev
}

/// Maximum absolute deviation from Hermiticity, `max |a - a^dagger|`.
pub fn max_nonhermiticity(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

/// Hermitian part `(a + a^dagger) / 2`.
pub fn hermitize(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]].conj());
        }
    }
    out
}

/// `y = m x` for a real matrix acting on a complex vector.
pub fn real_mat_complex_vec(m: &Array2<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let (rows, cols) = m.dim();
    assert_eq!(cols, x.len());
    let mut y = vec![Complex64::new(0.0, 0.0); rows];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..cols {
            acc += x[j] * m[[i, j]];
        }
        *yi = acc;
    }
    y
}

/// `y = m^T x` for a real matrix acting on a complex vector.
pub fn real_mat_t_complex_vec(m: &Array2<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let (rows, cols) = m.dim();
    assert_eq!(rows, x.len());
    let mut y = vec![Complex64::new(0.0, 0.0); cols];
    for j in 0..cols {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..rows {
            acc += x[i] * m[[i, j]];
        }
        y[j] = acc;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigh_real_orders_ascending() {
        let a = array![[0.0, 2.0], [2.0, 3.0]];
        let (e, v) = eigh_real(&a).unwrap();
        assert!(e[0] <= e[1]);
        // Reconstruct.
        let d = Array2::from_diag(&e);
        let r = v.dot(&d).dot(&v.t());
        for i in 0..2 {
            for j in 0..2 {
                assert!((r[[i, j]] - a[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitize_fixes_asymmetry() {
        let mut a = Array2::from_elem((2, 2), Complex64::new(0.0, 0.0));
        a[[0, 1]] = Complex64::new(1.0, 1.0);
        a[[1, 0]] = Complex64::new(1.0, 1.0); // not conjugate
        let h = hermitize(&a);
        assert!(max_nonhermiticity(&h) < 1e-15);
    }
}
