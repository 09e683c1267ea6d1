//! First-order reduction on the doubled space `C^n ⊕ C^n`.
//!
//! With `W` the spatial measure and `Ŵ = diag(W, W)`, the energy product is
//! `(u|v)_en = uᴴ Ŵ H v` and the charge form is `uᴴ Ŵ Q v`. For `W = I` these
//! reduce to the plain `H` and `Q` pairings.

use nalgebra::Complex;

use crate::model::{SpatialModel, SpatialOperator};
use crate::numerics::{
    block2, fro, hermitian_eig_weighted, hermitian_eigh, identity, inverse, min_singular_value,
    relative_diff, spectral_norm, EigenData, WeightedSpace, STRUCTURAL_TOL,
};
use crate::{lit, re, to_f64, ComplexMatrix, ComplexVector, Error, Real, Result};

#[derive(Clone, Debug)]
pub struct BlockSystem<T: Real> {
    n: usize,
    l: ComplexMatrix<T>,
    v: ComplexMatrix<T>,
    b: ComplexMatrix<T>,
    q: ComplexMatrix<T>,
    h: ComplexMatrix<T>,
    z: ComplexMatrix<T>,
    spatial: WeightedSpace<T>,
    doubled: WeightedSpace<T>,
    /// Gram matrix `Ŵ H` of the energy product, with its principal root.
    energy: WeightedSpace<T>,
    beta_sqrt: ComplexMatrix<T>,
    beta_inv_sqrt: ComplexMatrix<T>,
    min_eig_h: T,
    lower_bound_c: T,
    v_norm: T,
}

/// Builds `B`, `Q`, `H`, `Z` and the energy product.
pub fn assemble_blocks<T: Real>(l: &SpatialOperator<T>, m: &SpatialModel<T>) -> Result<BlockSystem<T>> {
    let n = m.n();
    let id = identity::<T>(n);
    let zero = ComplexMatrix::<T>::zeros(n, n);
    let v = m.v_matrix();
    let lm = l.matrix.clone();
    let b = block2(&v, &id, &lm, &v);
    let q = block2(&zero, &id, &id, &zero);
    let h = &q * &b;
    let z = block2(&zero, &zero, &id, &zero);
    let doubled = l.space.doubled();

    let scale = T::one().max(spectral_norm(&h));
    let min_eig_h = match hermitian_eig_weighted(&h, &doubled) {
        Ok(e) => e.values[0].re,
        Err(Error::NotHermitianInWeight { residual }) => return Err(Error::NotHermitianInWeight { residual }),
        Err(e) => return Err(e),
    };
    if min_eig_h <= lit::<T>(STRUCTURAL_TOL) * scale {
        return Err(Error::NotPositive { min_eig: to_f64(min_eig_h) });
    }
    let gram = doubled.weight() * &h;
    // Ŵ H is Hermitian only up to rounding in the L block; symmetrize before the root.
    let gram = (&gram + gram.adjoint()) * re(lit::<T>(0.5));
    let energy = WeightedSpace::new(gram)?;
    Ok(BlockSystem {
        n,
        l: lm,
        v,
        b,
        q,
        h,
        z,
        spatial: l.space.clone(),
        doubled,
        energy,
        beta_sqrt: m.beta_sqrt_matrix(),
        beta_inv_sqrt: m.beta_inv_sqrt_matrix(),
        min_eig_h,
        lower_bound_c: l.lower_bound_c,
        v_norm: m.v_norm(),
    })
}

impl<T: Real> BlockSystem<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> &ComplexMatrix<T> {
        &self.l
    }

    /// `diag(V)`.
    pub fn v(&self) -> &ComplexMatrix<T> {
        &self.v
    }

    pub fn b(&self) -> &ComplexMatrix<T> {
        &self.b
    }

    pub fn q(&self) -> &ComplexMatrix<T> {
        &self.q
    }

    pub fn h(&self) -> &ComplexMatrix<T> {
        &self.h
    }

    /// `[[0, 0], [I, 0]]`, so that `B_z = B − z Z`.
    pub fn z(&self) -> &ComplexMatrix<T> {
        &self.z
    }

    pub fn spatial_space(&self) -> &WeightedSpace<T> {
        &self.spatial
    }

    /// `diag(W, W)`.
    pub fn doubled_space(&self) -> &WeightedSpace<T> {
        &self.doubled
    }

    /// The energy space: Gram matrix `Ŵ H`.
    pub fn energy(&self) -> &WeightedSpace<T> {
        &self.energy
    }

    /// `(Ŵ H)^{1/2}`.
    pub fn energy_factor(&self) -> &ComplexMatrix<T> {
        self.energy.sqrt()
    }

    pub fn beta_sqrt(&self) -> &ComplexMatrix<T> {
        &self.beta_sqrt
    }

    pub fn beta_inv_sqrt(&self) -> &ComplexMatrix<T> {
        &self.beta_inv_sqrt
    }

    /// Minimum eigenvalue of `H` in the `Ŵ` product.
    pub fn min_eig_h(&self) -> T {
        self.min_eig_h
    }

    /// `C = min eig(L − V²)`.
    pub fn lower_bound_c(&self) -> T {
        self.lower_bound_c
    }

    /// `sup |V|`.
    pub fn v_norm(&self) -> T {
        self.v_norm
    }

    pub fn energy_norm(&self, u: &ComplexVector<T>) -> T {
        self.energy.norm(u)
    }

    pub fn energy_operator_norm(&self, a: &ComplexMatrix<T>) -> T {
        self.energy.operator_norm(a)
    }

    /// `‖Q B − H‖_F`; zero by construction.
    pub fn block_identity_residual(&self) -> T {
        fro(&(&self.q * &self.b - &self.h))
    }

    /// Relative Hermiticity residual of `Ŵ H B`.
    pub fn hb_residual(&self) -> T {
        self.energy.self_adjoint_residual(&self.b)
    }

    /// Energy norm of `Q` (diagnostic only).
    pub fn q_energy_norm(&self) -> T {
        self.energy.operator_norm(&self.q)
    }

    /// Minimum eigenvalue of `H − C` in the `Ŵ` product.
    pub fn h_shift_min_eig(&self, c: T) -> Result<T> {
        let shifted = &self.h - identity::<T>(2 * self.n) * re(c);
        Ok(hermitian_eig_weighted(&shifted, &self.doubled)?.values[0].re)
    }

    /// Membership criterion for the resolvent set via the Schur complement:
    /// the smallest singular value of `L − (V − z)²`.
    pub fn schur_complement_gap(&self, z: Complex<T>) -> T {
        min_singular_value(&self.schur_complement(z))
    }

    fn schur_complement(&self, z: Complex<T>) -> ComplexMatrix<T> {
        let vz = &self.v - identity::<T>(self.n) * z;
        &self.l - &vz * &vz
    }

    /// `(B − z)^{-1}` through the triangular factorization
    /// `P [[0, R], [I, 0]] P`, `P = [[I, 0], [z − V, I]]`, `R = (L − (V − z)²)^{-1}`.
    /// No spectrum check; see [`resolvent_b`].
    pub fn factorized_resolvent(&self, z: Complex<T>) -> Result<ComplexMatrix<T>> {
        let n = self.n;
        let id = identity::<T>(n);
        let zero = ComplexMatrix::<T>::zeros(n, n);
        let r = inverse(&self.schur_complement(z))?;
        let zv = &id * z - &self.v;
        let p = block2(&id, &zero, &zv, &id);
        let mid = block2(&zero, &r, &id, &zero);
        Ok(&p * mid * &p)
    }

    /// `(B − z)^{-1}` by dense LU.
    pub fn dense_resolvent(&self, z: Complex<T>) -> Result<ComplexMatrix<T>> {
        inverse(&(&self.b - identity::<T>(2 * self.n) * z))
    }
}

/// Frequency projections of `B`.
#[derive(Clone, Debug)]
pub struct SpectralSplit<T: Real> {
    pub plus: ComplexMatrix<T>,
    /// `I − plus`.
    pub minus: ComplexMatrix<T>,
    /// Eigendata of `B` with energy-orthonormal eigenvectors.
    pub eigen: EigenData<T>,
    pub min_abs_eig: T,
}

/// Diagonalizes `B` in the energy representation and splits by sign.
pub fn spectral_split<T: Real>(bs: &BlockSystem<T>) -> Result<SpectralSplit<T>> {
    let eigen = hermitian_eig_weighted(&bs.b, &bs.energy)?;
    let min_abs_eig = eigen.values.iter().fold(T::max_value().unwrap(), |m, l| m.min(l.re.abs()));
    if min_abs_eig < lit::<T>(1e-12) * spectral_norm(&bs.b) {
        return Err(Error::KernelDetected { min_abs: to_f64(min_abs_eig) });
    }
    let plus = eigen.projection(|l| l.re > T::zero());
    let minus = identity::<T>(2 * bs.n) - &plus;
    Ok(SpectralSplit { plus, minus, eigen, min_abs_eig })
}

impl<T: Real> SpectralSplit<T> {
    /// Real eigenvalues of `B`, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.eigen.values.iter().map(|l| l.re).collect()
    }

    pub fn positive_eigenvalues(&self) -> Vec<T> {
        self.eigenvalues().into_iter().filter(|l| *l > T::zero()).collect()
    }

    pub fn rank_plus(&self) -> usize {
        self.positive_eigenvalues().len()
    }

    /// Largest of the projection-algebra residuals (idempotency, annihilation,
    /// commutation with `B`, energy self-adjointness).
    pub fn invariant_residual(&self, bs: &BlockSystem<T>) -> ProjectionResiduals<T> {
        let (p, m) = (&self.plus, &self.minus);
        let id = identity::<T>(2 * bs.n);
        let g = bs.energy.weight();
        ProjectionResiduals {
            completeness: fro(&(p + m - &id)),
            idempotency: fro(&(p * p - p)).max(fro(&(m * m - m))),
            annihilation: fro(&(p * m)).max(fro(&(m * p))),
            commutation: relative_diff(&(&bs.b * p), &(p * &bs.b)),
            self_adjoint: relative_diff(&(g * p), &(p.adjoint() * g)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionResiduals<T: Real> {
    pub completeness: T,
    pub idempotency: T,
    pub annihilation: T,
    pub commutation: T,
    pub self_adjoint: T,
}

impl<T: Real> ProjectionResiduals<T> {
    pub fn max(&self) -> T {
        self.completeness
            .max(self.idempotency)
            .max(self.annihilation)
            .max(self.commutation)
            .max(self.self_adjoint)
    }
}

/// `(B − z)^{-1}` via the factorized form, refusing `z` near `spec B`.
pub fn resolvent_b<T: Real>(bs: &BlockSystem<T>, split: &SpectralSplit<T>, z: Complex<T>) -> Result<ComplexMatrix<T>> {
    let distance = split.eigen.distance_to_spectrum(z);
    if distance < lit::<T>(1e-10) * spectral_norm(&bs.b) {
        return Err(Error::SpectrumHit { distance: to_f64(distance) });
    }
    bs.factorized_resolvent(z)
}

/// Positivity of the charge form on the frequency subspaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChargeReport<T: Real> {
    /// Hermiticity residual of `Ŵ Q Π^±` (larger of the two).
    pub hermitian_residual: T,
    pub min_eig_plus: T,
    /// Minimum eigenvalue of `−Ŵ Q Π^−`.
    pub min_eig_minus: T,
    /// `‖Q Π^+ + Q Π^− − Q‖`.
    pub completeness: T,
}

impl<T: Real> ChargeReport<T> {
    pub fn ok(&self, tol: T) -> bool {
        self.hermitian_residual <= tol && self.min_eig_plus >= -tol && self.min_eig_minus >= -tol
    }
}

pub fn charge_positivity<T: Real>(bs: &BlockSystem<T>, split: &SpectralSplit<T>) -> Result<ChargeReport<T>> {
    let wq = bs.doubled.weight() * &bs.q;
    let plus = &wq * &split.plus;
    let minus = -(&wq * &split.minus);
    let herm = |a: &ComplexMatrix<T>| crate::numerics::hermitian_residual(a);
    let completeness = fro(&(&bs.q * &split.plus + &bs.q * &split.minus - &bs.q));
    Ok(ChargeReport {
        hermitian_residual: herm(&plus).max(herm(&minus)),
        min_eig_plus: hermitian_eigh(&plus)?.0[0],
        min_eig_minus: hermitian_eigh(&minus)?.0[0],
        completeness,
    })
}
