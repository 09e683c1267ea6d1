use nalgebra::{Complex, DMatrix};

use super::{fro, hermitian_eigh, hermitian_residual, spectral_norm};
use crate::{lit, re, to_f64, ComplexMatrix, ComplexVector, Error, Real, Result};

/// `C^n` with the inner product `(u|v)_W = uᴴ W v`.
///
/// The principal square root `R = W^{1/2}` and its inverse are cached; a
/// `W`-Hermitian operator `A` becomes the ordinary Hermitian matrix `R A R^{-1}`.
#[derive(Clone, Debug)]
pub struct WeightedSpace<T: Real> {
    weight: ComplexMatrix<T>,
    sqrt: ComplexMatrix<T>,
    inv_sqrt: ComplexMatrix<T>,
}

impl<T: Real> WeightedSpace<T> {
    pub fn new(weight: ComplexMatrix<T>) -> Result<Self> {
        if weight.nrows() != weight.ncols() || weight.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "weight must be square and nonempty, got {}x{}",
                weight.nrows(),
                weight.ncols()
            )));
        }
        let res = hermitian_residual(&weight);
        if res > lit(1e-12) {
            return Err(Error::NotHermitianInWeight { residual: to_f64(res) });
        }
        let (values, vectors) = hermitian_eigh(&weight)?;
        if values[0] <= T::zero() {
            return Err(Error::WeightNotPositive { min_eig: to_f64(values[0]) });
        }
        let n = values.len();
        let root = |f: fn(T) -> T| {
            let d = DMatrix::from_fn(n, n, |i, j| if i == j { re(f(values[i])) } else { re(T::zero()) });
            &vectors * d * vectors.adjoint()
        };
        let sqrt = root(|x| x.sqrt());
        let inv_sqrt = root(|x| T::one() / x.sqrt());
        Ok(Self { weight, sqrt, inv_sqrt })
    }

    pub fn identity(n: usize) -> Self {
        let id = DMatrix::identity(n, n);
        Self { weight: id.clone(), sqrt: id.clone(), inv_sqrt: id }
    }

    /// Diagonal weight with positive entries.
    pub fn diagonal(d: &[T]) -> Result<Self> {
        if let Some((i, _)) = d.iter().enumerate().find(|(_, &x)| !(x > T::zero())) {
            return Err(Error::WeightNotPositive { min_eig: to_f64(d[i]) });
        }
        let n = d.len();
        let diag = |f: &dyn Fn(T) -> T| {
            DMatrix::from_fn(n, n, |i, j| if i == j { re(f(d[i])) } else { re(T::zero()) })
        };
        Ok(Self {
            weight: diag(&|x| x),
            sqrt: diag(&|x| x.sqrt()),
            inv_sqrt: diag(&|x| T::one() / x.sqrt()),
        })
    }

    /// Block-diagonal `diag(W, W)` on the doubled space.
    pub fn doubled(&self) -> Self {
        let dbl = |m: &ComplexMatrix<T>| {
            let n = m.nrows();
            let mut out = DMatrix::zeros(2 * n, 2 * n);
            out.view_mut((0, 0), (n, n)).copy_from(m);
            out.view_mut((n, n), (n, n)).copy_from(m);
            out
        };
        Self { weight: dbl(&self.weight), sqrt: dbl(&self.sqrt), inv_sqrt: dbl(&self.inv_sqrt) }
    }

    pub fn dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn weight(&self) -> &ComplexMatrix<T> {
        &self.weight
    }

    /// Principal square root `W^{1/2}`.
    pub fn sqrt(&self) -> &ComplexMatrix<T> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &ComplexMatrix<T> {
        &self.inv_sqrt
    }

    pub fn inner(&self, u: &ComplexVector<T>, v: &ComplexVector<T>) -> Complex<T> {
        u.dotc(&(&self.weight * v))
    }

    pub fn norm(&self, u: &ComplexVector<T>) -> T {
        self.inner(u, u).re.max(T::zero()).sqrt()
    }

    /// Similarity transform `W^{1/2} A W^{-1/2}` into the unweighted frame.
    pub fn to_standard(&self, a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &self.sqrt * a * &self.inv_sqrt
    }

    /// Operator norm induced by this inner product.
    pub fn operator_norm(&self, a: &ComplexMatrix<T>) -> T {
        spectral_norm(&self.to_standard(a))
    }

    /// `‖W A − (W A)ᴴ‖ / ‖W A‖`: zero iff `A` is self-adjoint in this space.
    pub fn self_adjoint_residual(&self, a: &ComplexMatrix<T>) -> T {
        hermitian_residual(&(&self.weight * a))
    }

    /// Adjoint of `A` with respect to this inner product: `W^{-1} Aᴴ W`.
    pub fn adjoint_of(&self, a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let inv_w = &self.inv_sqrt * &self.inv_sqrt;
        inv_w * a.adjoint() * &self.weight
    }

    /// Frobenius norm of the weight, for relative tolerances.
    pub fn scale(&self) -> T {
        fro(&self.weight)
    }
}
