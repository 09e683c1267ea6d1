//! Dense complex linear algebra and quadrature shared by every other module.

mod eigen;
mod quadrature;
mod weighted;

pub use eigen::{
    general_eig, general_eig_with_bound, hermitian_eig_weighted, matrix_exp_action, EigenData,
    DEFAULT_CONDITION_BOUND,
};
pub(crate) use eigen::exp_minus_i_t;
pub use quadrature::{composite_gauss_legendre, quadrature, QuadratureKind, QuadratureRule};
pub use weighted::WeightedSpace;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::{lit, re, ComplexMatrix, Error, Real, Result};

/// Relative tolerance for structural identities (Hermiticity, block algebra).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Default tolerance for quantities limited by quadrature accuracy.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// Frobenius norm.
pub fn fro<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.norm()
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.clone().singular_values().max()
}

/// Smallest singular value.
pub fn min_singular_value<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.clone().singular_values().min()
}

/// `‖a‖` relative residual `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_diff<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    let scale = fro(a).max(fro(b));
    if scale == T::zero() {
        T::zero()
    } else {
        fro(&(a - b)) / scale
    }
}

/// `‖a − aᴴ‖ / ‖a‖`.
pub fn hermitian_residual<T: Real>(a: &ComplexMatrix<T>) -> T {
    let scale = fro(a);
    if scale == T::zero() {
        T::zero()
    } else {
        fro(&(a - a.adjoint())) / scale
    }
}

pub fn hermitian_part<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    (a + a.adjoint()) * re(lit::<T>(0.5))
}

pub fn identity<T: Real>(n: usize) -> ComplexMatrix<T> {
    DMatrix::identity(n, n)
}

/// Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.
/// Only the Hermitian part of `a` is used.
pub fn hermitian_eigh<T: Real>(a: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    let h = hermitian_part(a);
    let eig = SymmetricEigen::try_new(h, T::default_epsilon(), 10_000 * n.max(1))
        .ok_or(Error::DecompositionFailure("Hermitian eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let (values, _) = hermitian_eigh(a)?;
    Ok(values[0])
}

/// Dense inverse through LU.
pub fn inverse<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::DecompositionFailure("singular matrix in LU inverse"))
}

/// Diagonal complex matrix from real entries.
pub fn real_diagonal<T: Real>(d: &[T]) -> ComplexMatrix<T> {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { re(d[i]) } else { Complex::new(T::zero(), T::zero()) })
}

/// Assembles `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    c: &ComplexMatrix<T>,
    d: &ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// The `(i, j)` block (0-based) of a `2n × 2n` matrix split into `n × n` blocks.
pub fn block_of<T: Real>(m: &ComplexMatrix<T>, i: usize, j: usize) -> ComplexMatrix<T> {
    let n = m.nrows() / 2;
    m.view((i * n, j * n), (n, n)).into_owned()
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than two
/// usable (positive) points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[(f64, f64)]) -> ComplexMatrix<f64> {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&(a, b)| Complex::new(a, b)))
    }

    #[test]
    fn hermitian_eigh_sorts_ascending() {
        let a = m(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let (vals, vecs) = hermitian_eigh(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let unit = vecs.adjoint() * &vecs;
        assert!(relative_diff(&unit, &identity(2)) < 1e-14);
    }

    #[test]
    fn block_roundtrip() {
        let a = identity::<f64>(2);
        let z = ComplexMatrix::<f64>::zeros(2, 2);
        let big = block2(&a, &z, &z, &(a.clone() * re(2.0)));
        assert_eq!(block_of(&big, 1, 1)[(0, 0)], re(2.0));
        assert_eq!(block_of(&big, 0, 1), z);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-3, 1e-2, 1e-1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = real_diagonal(&[1.0f64, -3.0, 2.0]);
        assert!((spectral_norm(&d) - 3.0).abs() < 1e-14);
        assert!((min_singular_value(&d) - 1.0).abs() < 1e-14);
    }
}
