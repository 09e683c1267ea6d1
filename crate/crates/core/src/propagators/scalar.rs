//! Scalar reduction `G = c · β^{1/2} [E]₁₂ β^{1/2}` and the defining contracts.
//!
//! The constant is `c = σ i` for the inverses and the Pauli-Jordan kernel and
//! `c = 1` for the two frequency bisolutions. The sign `σ` is fixed by asking
//! the reduced retarded kernel to invert `K` on a single mode; see
//! [`calibrate_sign`].

use nalgebra::{Complex, DVector};

use super::grid::{sq_norm, Convolver};
use super::{upper_right, Profile, PropagatorKernel, PropagatorKind, TestFunction, TimeGrid};
use crate::block_system::{assemble_blocks, spectral_split, BlockSystem};
use crate::model::{assemble_l, SpatialModel};
use crate::numerics::{identity, WeightedSpace};
use crate::{cx, lit, re, ComplexMatrix, ComplexVector, Error, Real, Result};

/// Calibrated sign of the scalar reduction of inverses.
pub const SIGMA: i8 = 1;

fn reduction_constant<T: Real>(kind: PropagatorKind, sigma: i8) -> Complex<T> {
    match kind {
        PropagatorKind::PositiveFrequency | PropagatorKind::NegativeFrequency => re(T::one()),
        _ => cx(T::zero(), lit(f64::from(sigma))),
    }
}

pub(crate) fn reduce_matrix<T: Real>(kind: PropagatorKind, e: &ComplexMatrix<T>, bs: &BlockSystem<T>) -> ComplexMatrix<T> {
    bs.beta_sqrt() * upper_right(e) * bs.beta_sqrt() * reduction_constant::<T>(kind, SIGMA)
}

/// `t ↦ G(t)` acting on spatial data.
#[derive(Clone, Debug)]
pub struct ScalarPropagator<T: Real> {
    pub kind: PropagatorKind,
    pub sigma: i8,
    kernel: PropagatorKernel<T>,
    beta_sqrt: ComplexMatrix<T>,
}

pub fn scalar_reduce<T: Real>(kernel: &PropagatorKernel<T>, bs: &BlockSystem<T>) -> ScalarPropagator<T> {
    ScalarPropagator { kind: kernel.kind(), sigma: SIGMA, kernel: kernel.clone(), beta_sqrt: bs.beta_sqrt().clone() }
}

impl<T: Real> ScalarPropagator<T> {
    pub fn eval(&self, t: T) -> ComplexMatrix<T> {
        let c = reduction_constant::<T>(self.kind, self.sigma);
        &self.beta_sqrt * upper_right(&self.kernel.eval(t)) * &self.beta_sqrt * c
    }

    pub fn kernel(&self) -> &PropagatorKernel<T> {
        &self.kernel
    }
}

/// Grid norm of `(∂_t + iA)(E * f) − f` for inverses, or of `(∂_t + iA)(E * f)`
/// for bisolutions, measured in `space`.
pub fn inverse_residual<T: Real>(
    kernel: &PropagatorKernel<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
    space: &WeightedSpace<T>,
) -> Result<T> {
    let conv = Convolver::new(kernel, f, grid)?;
    let ia = kernel.generator() * cx(T::zero(), T::one());
    let mut sq = Vec::with_capacity(grid.nodes().len());
    for &t in grid.nodes() {
        let mut r = conv.derivative(t, 1)? + &ia * conv.integral(t, 0)?;
        if kernel.kind().is_inverse() {
            r -= f.sample(t);
        }
        let n = space.norm(&r);
        sq.push(n * n);
    }
    Ok(grid.norm_of(&sq))
}

/// Grid norm (spatial measure) of `K(G * f) − f` for inverses, `K(G * f)`
/// for bisolutions, with `K = β^{-1/2} K̃ β^{-1/2}`.
pub fn scalar_inverse_residual<T: Real>(
    g: &ScalarPropagator<T>,
    bs: &BlockSystem<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<T> {
    shifted_scalar_residual(g.kernel(), reduction_constant(g.kind, g.sigma), bs, f, grid, re(T::zero()))
}

/// As [`scalar_inverse_residual`] for a kernel of `B_z`, with `L` replaced by
/// `L − z` in `K̃`.
pub fn shifted_residual<T: Real>(
    kernel: &PropagatorKernel<T>,
    bs: &BlockSystem<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
    z: Complex<T>,
) -> Result<T> {
    shifted_scalar_residual(kernel, reduction_constant(kernel.kind(), SIGMA), bs, f, grid, z)
}

fn shifted_scalar_residual<T: Real>(
    kernel: &PropagatorKernel<T>,
    c: Complex<T>,
    bs: &BlockSystem<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
    z: Complex<T>,
) -> Result<T> {
    let n = bs.n();
    if f.spatial.len() != n {
        return Err(Error::DimensionMismatch(format!("scalar test function needs {n} components")));
    }
    let mut lifted = DVector::from_element(2 * n, re(T::zero()));
    lifted.rows_mut(n, n).copy_from(&(bs.beta_sqrt() * &f.spatial));
    let conv = Convolver::new(kernel, &TestFunction::new(lifted, f.profile), grid)?;

    let v = bs.v();
    let two_i_v = v * cx(T::zero(), lit(2.0));
    let static_part = bs.l() - identity::<T>(n) * z - v * v;
    let first = |w: ComplexVector<T>| w.rows(0, n).into_owned() * c;
    let mut sq = Vec::with_capacity(grid.nodes().len());
    for &t in grid.nodes() {
        let u0 = first(conv.integral(t, 0)?);
        let u1 = first(conv.derivative(t, 1)?);
        let u2 = first(conv.derivative(t, 2)?);
        let k_tilde = u2 + &two_i_v * u1 + &static_part * u0;
        let mut r = bs.beta_inv_sqrt() * k_tilde;
        if kernel.kind().is_inverse() {
            r -= f.sample(t);
        }
        let nr = bs.spatial_space().norm(&r);
        sq.push(nr * nr);
    }
    Ok(grid.norm_of(&sq))
}

/// Residuals of the single-mode inversion test for both signs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignCalibration {
    pub sigma: i8,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

/// Determines `σ` from `K G^ret f = f` on the unit-mass mode.
pub fn calibrate_sign(grid: &TimeGrid<f64>) -> Result<SignCalibration> {
    let m = SpatialModel::<f64>::preset("M0")?;
    let bs = assemble_blocks(&assemble_l(&m)?, &m)?;
    let split = spectral_split(&bs)?;
    let kernel = PropagatorKernel::new(PropagatorKind::Retarded, &bs, &split);
    let f = TestFunction::new(DVector::from_element(1, re(1.0)), Profile::bump(0.0, 1.0));
    let res = |s: f64| shifted_scalar_residual(&kernel, cx(0.0, s), &bs, &f, grid, re(0.0));
    let (residual_plus, residual_minus) = (res(1.0)?, res(-1.0)?);
    let sigma = if residual_plus <= residual_minus { 1 } else { -1 };
    Ok(SignCalibration { sigma, residual_plus, residual_minus })
}

/// `(f | G f)` over the spacetime measure for a frequency bisolution.
///
/// Since these kernels carry no step function, the double integral factors
/// into products of one-dimensional transforms `φ̂(λ) φ̂(−λ)` per eigenvalue.
pub fn frequency_positivity<T: Real>(
    g: &ScalarPropagator<T>,
    bs: &BlockSystem<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<Complex<T>> {
    if !matches!(g.kind, PropagatorKind::PositiveFrequency | PropagatorKind::NegativeFrequency) {
        return Err(Error::WrongKind("frequency positivity needs PosFreq or NegFreq"));
    }
    let n = bs.n();
    if f.spatial.len() != n {
        return Err(Error::DimensionMismatch(format!("scalar test function needs {n} components")));
    }
    f.check_within(grid)?;
    if sq_norm(&f.spatial) == T::zero() {
        return Ok(re(T::zero()));
    }
    let kernel = g.kernel();
    let ev = kernel.evolution();
    let y = bs.beta_sqrt() * &f.spatial;
    let mut lifted = DVector::from_element(2 * n, re(T::zero()));
    lifted.rows_mut(n, n).copy_from(&y);
    let right = &ev.inverse_vectors * (kernel.factor(super::Side::Right) * lifted);
    let left = (bs.spatial_space().weight() * &y).adjoint() * ev.vectors.rows(0, n);
    let panel = f.profile.half_support() * lit(0.25);
    let mut acc = re(T::zero());
    for (j, &l) in ev.values.iter().enumerate() {
        let transform = f.profile.fourier(l, panel)? * f.profile.fourier(-l, panel)?;
        acc += left[j] * right[j] * transform;
    }
    Ok(acc * reduction_constant::<T>(g.kind, g.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::{identity_suite, PropagatorKernel};

    fn m0() -> (BlockSystem<f64>, crate::block_system::SpectralSplit<f64>) {
        let m = SpatialModel::preset("M0").unwrap();
        let bs = assemble_blocks(&assemble_l(&m).unwrap(), &m).unwrap();
        let s = spectral_split(&bs).unwrap();
        (bs, s)
    }

    #[test]
    fn m0_closed_forms() {
        let (bs, s) = m0();
        let g = |k| scalar_reduce(&PropagatorKernel::new(k, &bs, &s), &bs);
        let (ret, feyn, pos) = (
            g(PropagatorKind::Retarded),
            g(PropagatorKind::Feynman),
            g(PropagatorKind::PositiveFrequency),
        );
        for &t in &[-2.0, -0.5, 0.0, 0.7, std::f64::consts::FRAC_PI_2, 3.0] {
            let want_ret = if t >= 0.0 { f64::sin(t) } else { 0.0 };
            assert!((ret.eval(t)[(0, 0)] - re(want_ret)).norm() < 1e-12);
            let want_f = cx(0.0, 0.5) * crate::numerics::exp_minus_i_t(re(1.0), f64::abs(t));
            assert!((feyn.eval(t)[(0, 0)] - want_f).norm() < 1e-12);
            let want_p = crate::numerics::exp_minus_i_t(re(1.0), t) * re(0.5);
            assert!((pos.eval(t)[(0, 0)] - want_p).norm() < 1e-12);
        }
    }

    #[test]
    fn m0_identity_web() {
        let (bs, s) = m0();
        let r = identity_suite(&bs, &s, &[-2.0, -0.5, 0.7, 3.0]);
        assert!(r.max_residual() < 1e-12, "{:?}", r);
    }

    #[test]
    fn calibration_selects_plus() {
        let c = calibrate_sign(&TimeGrid::standard()).unwrap();
        assert_eq!(c.sigma, SIGMA);
        assert!(c.residual_plus < 1e-6);
        assert!(c.residual_minus > 0.1);
    }

    #[test]
    fn m0_feynman_inverts_single_mode() {
        let (bs, s) = m0();
        let g = scalar_reduce(&PropagatorKernel::new(PropagatorKind::Feynman, &bs, &s), &bs);
        let f = TestFunction::new(DVector::from_element(1, re(1.0)), Profile::bump(0.5, 1.0));
        let r = scalar_inverse_residual(&g, &bs, &f, &TimeGrid::standard()).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn m0_positivity_closed_form() {
        let (bs, s) = m0();
        let g = scalar_reduce(&PropagatorKernel::new(PropagatorKind::PositiveFrequency, &bs, &s), &bs);
        let p = Profile::gaussian(0.0, 0.8);
        let f = TestFunction::new(DVector::from_element(1, re(1.0)), p);
        let v = frequency_positivity(&g, &bs, &f, &TimeGrid::standard()).unwrap();
        // f̂(1) for the Gaussian of width σ: σ √(2π) e^{−σ²/2}
        let fhat: f64 = 0.8 * (2.0 * std::f64::consts::PI).sqrt() * (-0.32f64).exp();
        assert!((v.re - fhat * fhat / 2.0).abs() < 1e-8);
        assert!(v.im.abs() < 1e-12);
        let zero = TestFunction::new(DVector::from_element(1, re(0.0)), p);
        assert_eq!(frequency_positivity(&g, &bs, &zero, &TimeGrid::standard()).unwrap(), re(0.0));
    }
}
