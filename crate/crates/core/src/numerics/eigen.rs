use nalgebra::{Complex, ComplexField, DMatrix, DVector, Schur};

use super::{fro, hermitian_eigh, inverse, spectral_norm, WeightedSpace};
use crate::{cx, lit, re, to_f64, ComplexMatrix, ComplexVector, Error, Real, Result};

/// Default bound on the eigenvector condition number accepted by [`general_eig`].
pub const DEFAULT_CONDITION_BOUND: f64 = 1e8;

/// Eigendecomposition `A = V Λ V^{-1}` of a diagonalizable matrix.
#[derive(Clone, Debug)]
pub struct EigenData<T: Real> {
    pub values: ComplexVector<T>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix<T>,
    /// `V^{-1}`.
    pub inverse_vectors: ComplexMatrix<T>,
}

impl<T: Real> EigenData<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V^{-1}`.
    pub fn function(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> ComplexMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        scaled * &self.inverse_vectors
    }

    /// `e^{-itA}`.
    pub fn evolution(&self, t: T) -> ComplexMatrix<T> {
        self.function(|l| exp_minus_i_t(l, t))
    }

    /// `e^{-itA} U` without forming the full exponential first.
    pub fn exp_action(&self, t: T, u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut coeffs = &self.inverse_vectors * u;
        for (i, mut row) in coeffs.row_iter_mut().enumerate() {
            row *= exp_minus_i_t(self.values[i], t);
        }
        &self.vectors * coeffs
    }

    /// Spectral projection onto the eigenvalues selected by `keep`.
    pub fn projection(&self, keep: impl Fn(Complex<T>) -> bool) -> ComplexMatrix<T> {
        self.function(|l| if keep(l) { re(T::one()) } else { re(T::zero()) })
    }

    /// `V Λ V^{-1}`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.function(|l| l)
    }

    /// `‖A V − V Λ‖ / ‖A‖`.
    pub fn residual(&self, a: &ComplexMatrix<T>) -> T {
        let mut vl = self.vectors.clone();
        for (j, mut col) in vl.column_iter_mut().enumerate() {
            col *= self.values[j];
        }
        let scale = fro(a);
        if scale == T::zero() {
            fro(&vl)
        } else {
            fro(&(a * &self.vectors - vl)) / scale
        }
    }

    /// `‖V V^{-1} − I‖`.
    pub fn inverse_residual(&self) -> T {
        let n = self.dim();
        fro(&(&self.vectors * &self.inverse_vectors - DMatrix::identity(n, n)))
    }

    pub fn condition_number(&self) -> T {
        spectral_norm(&self.vectors) * spectral_norm(&self.inverse_vectors)
    }

    /// Largest `|λ|`.
    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |m, l| m.max(l.modulus()))
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance_to_spectrum(&self, z: Complex<T>) -> T {
        self.values.iter().fold(T::max_value().unwrap_or(lit(1e300)), |m, l| m.min((l - z).modulus()))
    }

    /// Eigendata of `c · A`: same vectors, scaled values.
    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            values: self.values.map(|l| l * c),
            vectors: self.vectors.clone(),
            inverse_vectors: self.inverse_vectors.clone(),
        }
    }
}

#[inline]
pub(crate) fn exp_minus_i_t<T: Real>(l: Complex<T>, t: T) -> Complex<T> {
    // -i t (a + ib) = t b - i t a
    let arg = cx(t * l.im, -t * l.re);
    ComplexField::exp(arg)
}

/// Diagonalizes a matrix that is self-adjoint with respect to `(·|·)_W`.
///
/// The problem is reduced to the Hermitian matrix `R A R^{-1}` with `R` the
/// principal square root of `W`, so the returned vectors are `W`-orthonormal
/// and the values are real (stored with zero imaginary part), ascending.
pub fn hermitian_eig_weighted<T: Real>(
    a: &ComplexMatrix<T>,
    w: &WeightedSpace<T>,
) -> Result<EigenData<T>> {
    if a.nrows() != w.dim() || a.ncols() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, weight has dimension {}",
            a.nrows(),
            a.ncols(),
            w.dim()
        )));
    }
    let res = w.self_adjoint_residual(a);
    if res > lit(super::STRUCTURAL_TOL) {
        return Err(Error::NotHermitianInWeight { residual: to_f64(res) });
    }
    let standard = w.to_standard(a);
    let (values, u) = hermitian_eigh(&standard)?;
    Ok(EigenData {
        values: DVector::from_iterator(values.len(), values.into_iter().map(re)),
        vectors: w.inv_sqrt() * &u,
        inverse_vectors: u.adjoint() * w.sqrt(),
    })
}

/// Eigendecomposition of a general (non-normal) square matrix with the default
/// condition bound.
pub fn general_eig<T: Real>(a: &ComplexMatrix<T>) -> Result<EigenData<T>> {
    general_eig_with_bound(a, lit(DEFAULT_CONDITION_BOUND))
}

/// Eigendecomposition of a general square matrix through the complex Schur form
/// `A = Q T Qᴴ` followed by back substitution on the triangular factor.
pub fn general_eig_with_bound<T: Real>(a: &ComplexMatrix<T>, cond_bound: T) -> Result<EigenData<T>> {
    let n = a.nrows();
    if n != a.ncols() || n == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), 10_000 * n)
        .ok_or(Error::DecompositionFailure("complex Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();
    let values = DVector::from_fn(n, |i, _| t[(i, i)]);

    let tnorm = fro(&t).max(T::min_value().unwrap_or(T::zero()));
    let smin = T::default_epsilon() * tnorm.max(T::one());
    let mut x = DMatrix::<Complex<T>>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = re(T::one());
        for j in (0..k).rev() {
            let mut numer = re(T::zero());
            for l in (j + 1)..=k {
                numer += t[(j, l)] * x[(l, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.modulus() < smin {
                if numer.modulus() <= smin {
                    x[(j, k)] = re(T::zero());
                    continue;
                }
                d = re(smin);
            }
            x[(j, k)] = -numer / d;
        }
    }
    let mut vectors = q * x;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > T::zero() {
            col /= re(nrm);
        }
    }
    let inverse_vectors = inverse(&vectors)?;
    let data = EigenData { values, vectors, inverse_vectors };
    let cond = data.condition_number();
    if !(cond <= cond_bound) {
        return Err(Error::IllConditioned { cond: to_f64(cond), bound: to_f64(cond_bound) });
    }
    Ok(data)
}

/// `e^{-itA} U` for a diagonalizable `A`.
pub fn matrix_exp_action<T: Real>(
    a: &ComplexMatrix<T>,
    t: T,
    u: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    Ok(general_eig(a)?.exp_action(t, u))
}
