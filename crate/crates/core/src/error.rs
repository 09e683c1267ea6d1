use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the numerical pipeline.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type so that
/// reports stay uniform.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian in the given weight (relative residual {residual:e})")]
    NotHermitianInWeight { residual: f64 },
    #[error("weight matrix is not positive definite (min eigenvalue {min_eig:e})")]
    WeightNotPositive { min_eig: f64 },
    #[error("eigendecomposition failed: {0}")]
    DecompositionFailure(&'static str),
    #[error("eigenvector matrix is ill-conditioned (condition number {cond:e} > {bound:e})")]
    IllConditioned { cond: f64, bound: f64 },
    #[error("bad quadrature interval or node count: [{a}, {b}] with n = {n}")]
    BadInterval { a: f64, b: f64, n: usize },
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),

    #[error("invalid field `{field}` at node {index}: {reason}")]
    InvalidField { field: &'static str, index: usize, reason: &'static str },
    #[error("field `{field}` has length {got}, expected {expected}")]
    LengthMismatch { field: &'static str, expected: usize, got: usize },
    #[error("unknown model preset `{0}`")]
    UnknownPreset(String),

    #[error("classical Hamiltonian is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositive { min_eig: f64 },
    #[error("generator has an (almost) vanishing eigenvalue: min |λ| = {min_abs:e}")]
    KernelDetected { min_abs: f64 },
    #[error("spectral parameter lies on the spectrum (distance {distance:e})")]
    SpectrumHit { distance: f64 },

    #[error("time grid too coarse: {per_unit} nodes per unit time, {required} required")]
    GridTooCoarse { per_unit: usize, required: usize },
    #[error("invalid time grid: {0}")]
    BadGrid(&'static str),
    #[error("propagator kind {0} is not valid for this operation")]
    WrongKind(&'static str),

    #[error("need 0 < c < C, got c = {c}, C = {big_c}")]
    BadConstants { c: f64, big_c: f64 },
    #[error("spectrum approaches the imaginary axis (distance {distance:e})")]
    GapViolated { distance: f64 },
    #[error("semigroup is not a contraction: norm {norm} at t = {t}")]
    ContractionViolated { norm: f64, t: f64 },
    #[error("limiting-absorption bound violated at eps = {eps:e}, t = {t}: error {error:e} > bound {bound:e}")]
    BoundViolated { eps: f64, t: f64, error: f64, bound: f64 },
    #[error("spectrum too close to the real frequency contour (distance {distance:e}, need {required:e})")]
    SpectrumNearContour { distance: f64, required: f64 },
    #[error("rotation angle {0} outside [0, π]")]
    AngleOutOfRange(f64),
    #[error("sweep parameters must be strictly positive and descending")]
    BadSweep,
}
