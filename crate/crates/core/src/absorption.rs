//! The absorption-shifted generator `B_z = B − zZ` (`z ∈ iℝ`), its
//! bisectorial projections, the associated Feynman semigroup kernel and the
//! limiting-absorption sweep `z = iε → 0`.
//!
//! Branch convention: for `Im z ≥ 0` the kernel propagates `Π_z^+` forward and
//! `Π_z^−` backward in time (it tends to `E^F`); for `Im z < 0` the roles are
//! exchanged (it tends to `E^{F̄}`). This is the orientation in which both
//! half-line semigroups are contractions.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block_system::BlockSystem;
use crate::numerics::{
    block2, composite_gauss_legendre, fro, general_eig, hermitian_eig_weighted, identity, inverse, loglog_slope,
    spectral_norm, EigenData, WeightedSpace, STRUCTURAL_TOL,
};
use crate::propagators::{PropagatorKernel, PropagatorKind, Side, TestFunction, TimeGrid};
use crate::{cx, lit, re, to_f64, ComplexMatrix, ComplexVector, Error, Real, Result};

/// `α = −‖V‖ + (C − c + ‖V‖²)^{1/2}`: `spec B_z` avoids `|Re ζ| < α` for
/// `|z| ≤ c`.
pub fn spectral_gap<T: Real>(big_c: T, c: T, v_norm: T) -> Result<T> {
    if !(c > T::zero() && c < big_c) {
        return Err(Error::BadConstants { c: to_f64(c), big_c: to_f64(big_c) });
    }
    Ok(-v_norm + (big_c - c + v_norm * v_norm).sqrt())
}

/// `B_z` with its (non-normal) eigendecomposition.
#[derive(Clone, Debug)]
pub struct ShiftedGenerator<T: Real> {
    pub z: Complex<T>,
    pub matrix: ComplexMatrix<T>,
    pub eigen: EigenData<T>,
}

impl<T: Real> ShiftedGenerator<T> {
    pub fn new(bs: &BlockSystem<T>, z: Complex<T>) -> Result<Self> {
        let matrix = bs.b() - bs.z() * z;
        let eigen = general_eig(&matrix)?;
        Ok(Self { z, matrix, eigen })
    }

    /// `min |Re λ|` over `spec B_z`.
    pub fn min_abs_real_part(&self) -> T {
        self.eigen.values.iter().fold(T::max_value().unwrap(), |m, l| m.min(l.re.abs()))
    }

    pub fn norm(&self) -> T {
        spectral_norm(&self.matrix)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMethod {
    Contour,
    EigenOracle,
}

impl ProjectionMethod {
    pub fn tag(self) -> &'static str {
        match self {
            ProjectionMethod::Contour => "contour",
            ProjectionMethod::EigenOracle => "eigen",
        }
    }
}

/// Projections onto the parts of `spec B_z` in the right and left half-planes.
#[derive(Clone, Debug)]
pub struct BisectorialSplit<T: Real> {
    pub plus: ComplexMatrix<T>,
    pub minus: ComplexMatrix<T>,
    pub method: ProjectionMethod,
}

/// Contour quadrature parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourOptions {
    /// Truncation `τ`; `None` selects `50 ‖B_z‖`.
    pub tau: Option<f64>,
    /// Total number of quadrature nodes on `[0, τ]`.
    pub n_quad: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self { tau: None, n_quad: 512 }
    }
}

/// `Π_z^± = ½(I ± S)` with `S = (1/π) ∫ (B_z − iy)^{-1} dy`.
///
/// Pairing `±y` gives `S = (2/π) ∫_0^∞ B_z (B_z² + y²)^{-1} dy`. The integral is
/// taken on `[0, τ]` over Gauss-Legendre panels graded geometrically from the
/// scale `grading` (the smallest `|Re λ|` expected), and the tail beyond `τ`
/// is added from `B (B² + y²)^{-1} = B/y² − B³/y⁴ + B⁵/y⁶ − …`.
pub fn contour_projections<T: Real>(
    sg: &ShiftedGenerator<T>,
    grading: T,
    opts: ContourOptions,
) -> Result<BisectorialSplit<T>> {
    let b = &sg.matrix;
    let dim = b.nrows();
    let tau: T = opts.tau.map(lit).unwrap_or_else(|| sg.norm() * lit(50.0));
    let first = (grading * lit(0.25)).min(tau * lit(0.5));
    let mut edges = vec![T::zero(), first];
    while *edges.last().unwrap() < tau {
        let next = (*edges.last().unwrap() * lit(2.0)).min(tau);
        edges.push(next);
    }
    let panels = edges.len() - 1;
    let per_panel = opts.n_quad.div_ceil(panels).max(2);
    let rule = composite_gauss_legendre(&edges, per_panel)?;

    let tol = lit::<T>(1e-8);
    for &y in &rule.nodes {
        let d = sg.eigen.distance_to_spectrum(cx(T::zero(), y)).min(sg.eigen.distance_to_spectrum(cx(T::zero(), -y)));
        if d < tol {
            return Err(Error::GapViolated { distance: to_f64(d) });
        }
    }

    let b2 = b * b;
    let id = identity::<T>(dim);
    let terms: Vec<ComplexMatrix<T>> = rule
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(y, w)| {
            let shifted = &b2 + &id * re(y * y);
            let x = shifted.lu().solve(b).ok_or(Error::DecompositionFailure("singular contour node"))?;
            Ok(x * re(w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut integral = terms.into_iter().fold(DMatrix::zeros(dim, dim), |acc, m| acc + m);

    let b3 = &b2 * b;
    let b5 = &b3 * &b2;
    integral += b * re(T::one() / tau) - &b3 * re(T::one() / (lit::<T>(3.0) * tau.powi(3)))
        + &b5 * re(T::one() / (lit::<T>(5.0) * tau.powi(5)));
    let s = integral * re(lit::<T>(2.0 / PI));
    let half = re(lit::<T>(0.5));
    Ok(BisectorialSplit {
        plus: (&id + &s) * half,
        minus: (&id - &s) * half,
        method: ProjectionMethod::Contour,
    })
}

/// Groups the eigenvalues of `B_z` by the sign of their real part.
pub fn eigen_projections<T: Real>(sg: &ShiftedGenerator<T>) -> Result<BisectorialSplit<T>> {
    let min_re = sg.min_abs_real_part();
    if min_re < lit(1e-10) {
        return Err(Error::GapViolated { distance: to_f64(min_re) });
    }
    let plus = sg.eigen.projection(|l| l.re > T::zero());
    let minus = identity::<T>(sg.matrix.nrows()) - &plus;
    Ok(BisectorialSplit { plus, minus, method: ProjectionMethod::EigenOracle })
}

/// Algebraic diagnostics of a bisectorial split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionDiagnostics<T: Real> {
    pub idempotency: T,
    pub completeness: T,
    /// `‖[Π^+, B_z]‖ / ‖B_z‖`.
    pub commutator: T,
    /// Largest `‖Π^+ v − [Re λ > 0] v‖ / ‖v‖` over eigenvectors `v` of `B_z`.
    pub bisection: T,
}

pub fn projection_diagnostics<T: Real>(sg: &ShiftedGenerator<T>, split: &BisectorialSplit<T>) -> ProjectionDiagnostics<T> {
    let (p, m) = (&split.plus, &split.minus);
    let id = identity::<T>(p.nrows());
    let b = &sg.matrix;
    let scale = fro(b).max(T::one());
    let mut bisection = T::zero();
    for (j, l) in sg.eigen.values.iter().enumerate() {
        let v = sg.eigen.vectors.column(j).into_owned();
        let target = if l.re > T::zero() { v.clone() } else { v.clone() * re(T::zero()) };
        bisection = bisection.max((p * &v - target).norm() / v.norm());
    }
    ProjectionDiagnostics {
        idempotency: fro(&(p * p - p)).max(fro(&(m * m - m))),
        completeness: fro(&(p + m - &id)),
        commutator: fro(&(p * b - b * p)) / scale,
        bisection,
    }
}

/// Dissipativity diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipativityReport<T: Real> {
    /// Minimum eigenvalue of `[[L + 2V², 2V], [2V, I]]`.
    pub block_min_eig: T,
    /// `max over samples u ∈ Π_z^+ of Im (u|B_z u)_en / ‖u‖²_en` (must be ≤ 0).
    pub worst_plus: T,
    /// `max over samples u ∈ Π_z^− of −Im (u|B_z u)_en / ‖u‖²_en` (must be ≤ 0).
    pub worst_minus: T,
    pub samples: usize,
}

impl<T: Real> DissipativityReport<T> {
    pub fn ok(&self, tol: T) -> bool {
        self.block_min_eig >= -tol && self.worst_plus <= tol && self.worst_minus <= tol
    }
}

/// Draws `count` vectors with entries uniform in the unit square.
pub fn random_vectors<T: Real>(seed: u64, dim: usize, count: usize) -> Vec<ComplexVector<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DVector::from_fn(dim, |_, _| cx(lit(rng.gen_range(-1.0..1.0)), lit(rng.gen_range(-1.0..1.0)))))
        .collect()
}

/// Checks the block criterion and the sign of `Im (u|B_z u)_en` on both
/// ranges for `samples` random vectors. Requires `Im z > 0`.
pub fn dissipativity_check<T: Real>(
    bs: &BlockSystem<T>,
    sg: &ShiftedGenerator<T>,
    split: &BisectorialSplit<T>,
    samples: usize,
    seed: u64,
) -> Result<DissipativityReport<T>> {
    if !(sg.z.im > T::zero()) {
        return Err(Error::BadConstants { c: to_f64(sg.z.im), big_c: 0.0 });
    }
    let v = bs.v();
    let two = re(lit::<T>(2.0));
    let block = block2(&(bs.l() + v * v * two), &(v * two), &(v * two), &identity::<T>(bs.n()));
    let block_min_eig = hermitian_eig_weighted(&block, bs.doubled_space())?.values[0].re;

    let energy = bs.energy();
    let im_ratio = |u: &ComplexVector<T>| {
        let n2 = energy.norm(u).powi(2);
        energy.inner(u, &(&sg.matrix * u)).im / n2
    };
    let mut worst_plus = -T::max_value().unwrap();
    let mut worst_minus = -T::max_value().unwrap();
    for x in random_vectors::<T>(seed, 2 * bs.n(), samples) {
        let up = &split.plus * &x;
        let um = &split.minus * &x;
        if energy.norm(&up) > T::zero() {
            worst_plus = worst_plus.max(im_ratio(&up));
        }
        if energy.norm(&um) > T::zero() {
            worst_minus = worst_minus.max(-im_ratio(&um));
        }
    }
    Ok(DissipativityReport { block_min_eig, worst_plus, worst_minus, samples })
}

/// `E_z^F` with the branch orientation described at module level.
pub fn feynman_kernel_z<T: Real>(sg: &ShiftedGenerator<T>, split: &BisectorialSplit<T>) -> PropagatorKernel<T> {
    let (fwd, bwd) = if sg.z.im >= T::zero() { (&split.plus, &split.minus) } else { (&split.minus, &split.plus) };
    PropagatorKernel::from_parts(PropagatorKind::Feynman, sg.eigen.clone(), sg.matrix.clone(), fwd, bwd)
}

/// Energy-orthonormal basis (in the standard frame) of the range of a projection.
fn range_basis<T: Real>(p: &ComplexMatrix<T>, energy: &WeightedSpace<T>) -> ComplexMatrix<T> {
    let std = energy.to_standard(p);
    let svd = std.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > lit(0.5)).collect();
    DMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Energy norms of `E_z^F(t)` over sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport<T: Real> {
    /// `(t, ‖E(t)‖ restricted to the invariant subspace it acts on, ‖E(t)‖_en)`.
    pub samples: Vec<(T, T, T)>,
}

impl<T: Real> ContractionReport<T> {
    pub fn max_subspace_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.1))
    }

    pub fn max_full_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.2))
    }
}

/// Semigroup contraction of a kernel on the ranges of its forward and
/// backward factors. `ContractionViolated` beyond `1 + 1e-10`; the full
/// operator norm is reported alongside.
pub fn contraction_check<T: Real>(
    kernel: &PropagatorKernel<T>,
    energy: &WeightedSpace<T>,
    times: &[T],
) -> Result<ContractionReport<T>> {
    let fwd = range_basis(kernel.factor(Side::Right), energy);
    let bwd = range_basis(kernel.factor(Side::Left), energy);
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let u = energy.to_standard(&kernel.evolution().evolution(t));
        let basis = if t >= T::zero() { &fwd } else { &bwd };
        let sub = if basis.ncols() == 0 { T::zero() } else { spectral_norm(&(u * basis)) };
        let full = energy.operator_norm(&kernel.eval(t));
        if sub > T::one() + lit(1e-10) {
            return Err(Error::ContractionViolated { norm: to_f64(sub), t: to_f64(t) });
        }
        samples.push((t, sub, full));
    }
    Ok(ContractionReport { samples })
}

/// Default absorption strengths.
pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
/// Default sample times. Near `t = 0` the difference is dominated by
/// `Π_{iε}^± − Π^±`, which is `O(ε)` but not `O(|t| ε)`.
pub const DEFAULT_LAP_TIMES: [f64; 10] = [-10.0, -5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LapRow {
    pub epsilon: f64,
    pub t: f64,
    pub error: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LapTable {
    pub rows: Vec<LapRow>,
    /// Log-log slope of the error in `ε` at each sample time.
    pub slopes: Vec<(f64, f64)>,
}

impl LapTable {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.ratio))
    }

    pub fn slope_range(&self) -> (f64, f64) {
        self.slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)))
    }
}

/// Options of the limiting-absorption sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct LapOptions {
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
    pub method: ProjectionMethod,
    pub contour: ContourOptions,
    /// Relative slack on `|t| ε ‖u‖_en`.
    pub slack: f64,
}

impl Default for LapOptions {
    fn default() -> Self {
        Self {
            epsilons: DEFAULT_EPSILONS.to_vec(),
            times: DEFAULT_LAP_TIMES.to_vec(),
            method: ProjectionMethod::Contour,
            contour: ContourOptions::default(),
            slack: 1e-6,
        }
    }
}

/// Grading scale for the contour: the gap at `c = C/2`, or `1` if unavailable.
pub fn default_grading(bs: &BlockSystem<f64>) -> f64 {
    let c = bs.lower_bound_c();
    spectral_gap(c, c * 0.5, bs.v_norm()).unwrap_or(1.0)
}

pub fn bisectorial_split(
    sg: &ShiftedGenerator<f64>,
    bs: &BlockSystem<f64>,
    method: ProjectionMethod,
    contour: ContourOptions,
) -> Result<BisectorialSplit<f64>> {
    match method {
        ProjectionMethod::Contour => contour_projections(sg, default_grading(bs), contour),
        ProjectionMethod::EigenOracle => eigen_projections(sg),
    }
}

/// `‖E_{iε}^F(t) u − E^F(t) u‖_en` against `|t| ε ‖u‖_en`.
pub fn lap_sweep(bs: &BlockSystem<f64>, u: &ComplexVector<f64>, opts: &LapOptions) -> Result<LapTable> {
    if opts.epsilons.is_empty() || opts.epsilons.windows(2).any(|w| !(w[0] > w[1])) || opts.epsilons[0] <= 0.0 {
        return Err(Error::BadSweep);
    }
    let u = u / re(bs.energy_norm(u));
    let base_sg = ShiftedGenerator::new(bs, re(0.0))?;
    let base = feynman_kernel_z(&base_sg, &bisectorial_split(&base_sg, bs, ProjectionMethod::EigenOracle, opts.contour)?);
    let reference: Vec<ComplexVector<f64>> = opts.times.iter().map(|&t| base.eval(t) * &u).collect();

    let per_eps: Vec<Vec<LapRow>> = opts
        .epsilons
        .par_iter()
        .map(|&eps| {
            let sg = ShiftedGenerator::new(bs, cx(0.0, eps))?;
            let kernel = feynman_kernel_z(&sg, &bisectorial_split(&sg, bs, opts.method, opts.contour)?);
            opts.times
                .iter()
                .zip(&reference)
                .map(|(&t, r)| {
                    let error = bs.energy_norm(&(kernel.eval(t) * &u - r));
                    let bound = t.abs() * eps;
                    if error > bound * (1.0 + opts.slack) {
                        return Err(Error::BoundViolated { eps, t, error, bound });
                    }
                    Ok(LapRow { epsilon: eps, t, error, bound, ratio: error / bound })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<LapRow> = per_eps.into_iter().flatten().collect();
    let slopes = opts
        .times
        .iter()
        .map(|&t| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.t == t).map(|r| (r.epsilon, r.error)).unzip();
            (t, loglog_slope(&xs, &ys).unwrap_or(f64::NAN))
        })
        .collect();
    Ok(LapTable { rows, slopes })
}

/// `‖Π_{iε}^+ − Π^+‖_en` over the given strengths and the fitted slope.
pub fn projection_convergence(bs: &BlockSystem<f64>, epsilons: &[f64]) -> Result<(Vec<f64>, f64)> {
    let base = eigen_projections(&ShiftedGenerator::new(bs, re(0.0))?)?;
    let errs = epsilons
        .iter()
        .map(|&e| {
            let p = eigen_projections(&ShiftedGenerator::new(bs, cx(0.0, e))?)?;
            Ok(bs.energy_operator_norm(&(p.plus - &base.plus)))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(epsilons, &errs).unwrap_or(f64::NAN);
    Ok((errs, slope))
}

/// Frequency-domain quadrature parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierOptions {
    pub omega_max: f64,
    pub n_omega: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { omega_max: 100.0, n_omega: 1 << 14 }
    }
}

/// Reconstructs `E_z^F(t) = (1/2π) ∫ e^{−iωt} Ê(ω) dω` with
/// `Ê(ω) = −i (B_z − ω)^{-1}`, by midpoint quadrature on `[−Ω, Ω]`.
///
/// The slowly decaying part is removed by subtracting `i (ω + i)^{-1} I`,
/// whose transform `θ(t) e^{−t} I` is added back exactly.
pub fn fourier_oracle(
    sg: &ShiftedGenerator<f64>,
    times: &[f64],
    opts: FourierOptions,
) -> Result<Vec<ComplexMatrix<f64>>> {
    let h = 2.0 * opts.omega_max / opts.n_omega as f64;
    let required = 10.0 * opts.omega_max / opts.n_omega as f64;
    let distance = sg.eigen.values.iter().fold(f64::INFINITY, |m, l| m.min(l.im.abs()));
    if distance < required {
        return Err(Error::SpectrumNearContour { distance, required });
    }
    let dim = sg.matrix.nrows();
    let id = identity::<f64>(dim);
    const CHUNK: usize = 256;
    let chunks: Vec<Vec<ComplexMatrix<f64>>> = (0..opts.n_omega.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![DMatrix::zeros(dim, dim); times.len()];
            for k in c * CHUNK..((c + 1) * CHUNK).min(opts.n_omega) {
                let w = -opts.omega_max + (k as f64 + 0.5) * h;
                let r = inverse(&(&sg.matrix - &id * re(w)))?;
                let e_hat = r * cx(0.0, -1.0) - &id * (cx(0.0, 1.0) / cx(w, 1.0));
                for (a, &t) in acc.iter_mut().zip(times) {
                    *a += &e_hat * cx(0.0, -w * t).exp();
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![DMatrix::zeros(dim, dim); times.len()];
    for chunk in chunks {
        for (o, a) in out.iter_mut().zip(chunk) {
            *o += a;
        }
    }
    Ok(out
        .into_iter()
        .zip(times)
        .map(|(m, &t)| m * re(h / (2.0 * PI)) + &id * re(if t >= 0.0 { (-t).exp() } else { 0.0 }))
        .collect())
}

/// `(K̃ − z)(G̃_z^F f) = f` residual in the grid norm.
pub fn resolvent_residual<T: Real>(
    bs: &BlockSystem<T>,
    kernel: &PropagatorKernel<T>,
    z: Complex<T>,
    f: &TestFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<T> {
    crate::propagators::shifted_residual(kernel, bs, f, grid, z)
}

/// Gap containment `min |Re spec B_z| ≥ α` with a small relative slack.
pub fn gap_holds<T: Real>(sg: &ShiftedGenerator<T>, alpha: T) -> bool {
    sg.min_abs_real_part() >= alpha * (T::one() - lit(STRUCTURAL_TOL))
}
