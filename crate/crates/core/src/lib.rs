//! Lattice realization of the static Klein-Gordon operator and its
//! distinguished propagators.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense complex linear algebra (weighted Hermitian and
//!   non-normal eigendecompositions, exponentials, quadrature).
//! - [`model`]: the spatial lattice, the operator `L` and the assumption checks.
//! - [`block_system`]: the first-order generator `B`, charge `Q`, classical
//!   Hamiltonian `H = QB`, energy product and frequency projections.
//! - [`propagators`]: the seven kernels, their scalar reductions, and the
//!   inverse/bisolution/positivity contracts.
//! - [`absorption`]: the shifted generator `B_z`, bisectorial projections and the
//!   limiting-absorption sweep.
//! - [`wick`]: the rotated generator `e^{-iθ}B` and the `θ → 0` sweep.
//!
//! Everything is generic over the real scalar type `T: Real` (`f32` or `f64`).
//! The default tolerances assume double precision; the `f64` aliases below are
//! what the command-line driver uses.

// `!(x > 0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod absorption;
pub mod block_system;
pub mod error;
pub mod model;
pub mod numerics;
pub mod propagators;
pub mod wick;

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Real scalar usable throughout the crate.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex dense matrix over `T`.
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;
/// Complex dense column vector over `T`.
pub type ComplexVector<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Lossy conversion to `f64` for reports and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

pub type C64 = Complex<f64>;
pub type Matrix64 = ComplexMatrix<f64>;
pub type Vector64 = ComplexVector<f64>;
pub type SpatialModel64 = model::SpatialModel<f64>;
pub type SpatialOperator64 = model::SpatialOperator<f64>;
pub type BlockSystem64 = block_system::BlockSystem<f64>;
pub type SpectralSplit64 = block_system::SpectralSplit<f64>;
pub type PropagatorKernel64 = propagators::PropagatorKernel<f64>;
pub type ScalarPropagator64 = propagators::ScalarPropagator<f64>;
pub type TimeGrid64 = propagators::TimeGrid<f64>;
pub type ShiftedGenerator64 = absorption::ShiftedGenerator<f64>;
pub type RotatedGenerator64 = wick::RotatedGenerator<f64>;
