//! Time grids, test functions and kernel convolutions.
//!
//! Convolutions are evaluated per eigenvalue: with `E(τ) = V e^{−iτΛ} V^{-1} F±`,
//! `(E * φx)(t) = V [I₊(t) V^{-1}F₊x + I₋(t) V^{-1}F₋x]` where `I±` are scalar
//! integrals of the profile against `e^{−iλ(t−s)}` on either side of `s = t`.
//! Time derivatives act analytically through factors `(−iλ)^k`.

use std::f64::consts::PI;

use nalgebra::{Complex, ComplexField, DVector};

use super::{PropagatorKernel, Side};
use crate::numerics::{composite_gauss_legendre, exp_minus_i_t, QuadratureRule};
use crate::{cx, lit, re, to_f64, ComplexVector, Error, Real, Result};

/// Number of Gauss-Legendre nodes per panel of the `s`-quadrature.
const PANEL_NODES: usize = 16;
/// The truncated Gaussian is cut at this many standard deviations.
const GAUSSIAN_CUTOFF: f64 = 6.0;

/// Gauss-Legendre panels on `[−T, T]` and the weight `⟨t⟩^{−2s}` of the grid norm.
#[derive(Clone, Debug)]
pub struct TimeGrid<T: Real> {
    half_width: T,
    nodes_per_unit: usize,
    s: T,
    rule: QuadratureRule<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(half_width: T, nodes_per_unit: usize, s: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::BadGrid("half-width must be positive"));
        }
        if !(s > lit(0.5)) {
            return Err(Error::BadGrid("weight exponent must exceed 1/2"));
        }
        if nodes_per_unit < 2 {
            return Err(Error::BadGrid("need at least two nodes per unit time"));
        }
        let panels = to_f64(half_width * lit(2.0)).ceil().max(1.0) as usize;
        let h = half_width * lit(2.0) / lit(panels as f64);
        let edges: Vec<T> = (0..=panels).map(|k| -half_width + h * lit(k as f64)).collect();
        let rule = composite_gauss_legendre(&edges, nodes_per_unit)?;
        Ok(Self { half_width, nodes_per_unit, s, rule })
    }

    /// `T = 10`, 16 nodes per unit, `s = 1`.
    pub fn standard() -> Self {
        Self::new(lit(10.0), 16, T::one()).expect("default grid is valid")
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn nodes_per_unit(&self) -> usize {
        self.nodes_per_unit
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn nodes(&self) -> &[T] {
        &self.rule.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.rule.weights
    }

    /// `⟨t⟩ = (1 + t²)^{1/2}`.
    pub fn bracket(t: T) -> T {
        (T::one() + t * t).sqrt()
    }

    /// `(Σ w_k ⟨t_k⟩^{−2s} q_k)^{1/2}` for squared pointwise norms `q_k`.
    pub fn norm_of(&self, squared: &[T]) -> T {
        let two_s = self.s * lit(2.0);
        self.rule
            .iter()
            .zip(squared)
            .fold(T::zero(), |acc, ((t, w), &q)| acc + w * q / Self::bracket(t).powf(two_s))
            .sqrt()
    }

    /// Heuristic resolution check: the integrand oscillates with frequency up
    /// to `ρ + π/w` for spectral radius `ρ` and profile half-width `w`.
    pub fn check_resolution(&self, spectral_radius: T, support_half_width: T) -> Result<()> {
        let required = 2.0 * (to_f64(spectral_radius) + PI / to_f64(support_half_width)) / PI;
        if (self.nodes_per_unit as f64) < required {
            return Err(Error::GridTooCoarse { per_unit: self.nodes_per_unit, required: required.ceil() as usize });
        }
        Ok(())
    }

    /// Panels of the `s`-quadrature: at most `16 / nodes_per_unit` long and at
    /// most half the profile half-width.
    fn panel_length(&self, support_half_width: T) -> T {
        (lit::<T>(PANEL_NODES as f64) / lit(self.nodes_per_unit as f64)).min(support_half_width * lit(0.5))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// `exp(−1/(1 − x²))` on `|x| < 1`.
    Bump,
    /// `exp(−x²/2)` on `|x| < 6`.
    TruncatedGaussian,
}

/// Smooth time profile `φ((t − c)/w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile<T: Real> {
    pub kind: ProfileKind,
    pub center: T,
    pub width: T,
}

impl<T: Real> Profile<T> {
    pub fn bump(center: T, width: T) -> Self {
        Self { kind: ProfileKind::Bump, center, width }
    }

    pub fn gaussian(center: T, width: T) -> Self {
        Self { kind: ProfileKind::TruncatedGaussian, center, width }
    }

    pub fn half_support(&self) -> T {
        match self.kind {
            ProfileKind::Bump => self.width,
            ProfileKind::TruncatedGaussian => self.width * lit(GAUSSIAN_CUTOFF),
        }
    }

    pub fn support(&self) -> (T, T) {
        let h = self.half_support();
        (self.center - h, self.center + h)
    }

    pub fn value(&self, t: T) -> T {
        let x = (t - self.center) / self.width;
        match self.kind {
            ProfileKind::Bump => {
                if x.abs() >= T::one() {
                    T::zero()
                } else {
                    (-T::one() / (T::one() - x * x)).exp()
                }
            }
            ProfileKind::TruncatedGaussian => {
                if x.abs() >= lit(GAUSSIAN_CUTOFF) {
                    T::zero()
                } else {
                    (-x * x * lit(0.5)).exp()
                }
            }
        }
    }

    pub fn derivative(&self, t: T) -> T {
        let x = (t - self.center) / self.width;
        let v = self.value(t);
        if v == T::zero() {
            return T::zero();
        }
        match self.kind {
            ProfileKind::Bump => {
                let d = T::one() - x * x;
                v * (-x * lit(2.0) / (d * d)) / self.width
            }
            ProfileKind::TruncatedGaussian => -v * x / self.width,
        }
    }

    /// Gauss-Legendre panels covering `[a, b] ∩ supp φ`.
    fn rule(&self, a: T, b: T, panel: T) -> Result<Option<QuadratureRule<T>>> {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if !(b > a) {
            return Ok(None);
        }
        let panels = to_f64((b - a) / panel).ceil().max(1.0) as usize;
        let h = (b - a) / lit(panels as f64);
        let edges: Vec<T> = (0..=panels).map(|k| if k == panels { b } else { a + h * lit(k as f64) }).collect();
        Ok(Some(composite_gauss_legendre(&edges, PANEL_NODES)?))
    }

    /// `∫ φ(s) e^{−iλs} ds`.
    pub fn fourier(&self, lambda: Complex<T>, panel: T) -> Result<Complex<T>> {
        let (lo, hi) = self.support();
        let mut acc = re(T::zero());
        if let Some(rule) = self.rule(lo, hi, panel)? {
            for (s, w) in rule.iter() {
                acc += exp_minus_i_t(lambda, s) * re(w * self.value(s));
            }
        }
        Ok(acc)
    }

    /// `∫ φ(s) ds`.
    pub fn mass(&self) -> Result<T> {
        Ok(self.fourier(re(T::zero()), self.half_support() * lit(0.5))?.re)
    }
}

/// `f(t, x) = φ(t) x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T: Real> {
    pub spatial: ComplexVector<T>,
    pub profile: Profile<T>,
}

impl<T: Real> TestFunction<T> {
    pub fn new(spatial: ComplexVector<T>, profile: Profile<T>) -> Self {
        Self { spatial, profile }
    }

    pub fn sample(&self, t: T) -> ComplexVector<T> {
        &self.spatial * re(self.profile.value(t))
    }

    pub fn check_within(&self, grid: &TimeGrid<T>) -> Result<()> {
        let (a, b) = self.profile.support();
        if a <= -grid.half_width || b >= grid.half_width {
            return Err(Error::BadGrid("profile support must lie inside (-T, T)"));
        }
        Ok(())
    }
}

/// Samples `t_k ↦ u(t_k)` on the nodes of a grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub values: Vec<ComplexVector<T>>,
}

/// Per-kernel data for the spectral convolution of one test function.
pub(crate) struct Convolver<'a, T: Real> {
    kernel: &'a PropagatorKernel<T>,
    profile: Profile<T>,
    panel: T,
    /// `V^{-1} F₊ x` and `V^{-1} F₋ x`.
    fwd: ComplexVector<T>,
    bwd: ComplexVector<T>,
    x: ComplexVector<T>,
}

impl<'a, T: Real> Convolver<'a, T> {
    pub(crate) fn new(kernel: &'a PropagatorKernel<T>, f: &TestFunction<T>, grid: &TimeGrid<T>) -> Result<Self> {
        if f.spatial.len() != kernel.dim() {
            return Err(Error::DimensionMismatch(format!(
                "test function has {} components, kernel acts on {}",
                f.spatial.len(),
                kernel.dim()
            )));
        }
        f.check_within(grid)?;
        let w = f.profile.half_support();
        grid.check_resolution(kernel.evolution().spectral_radius(), w)?;
        let vinv = &kernel.evolution().inverse_vectors;
        Ok(Self {
            kernel,
            profile: f.profile,
            panel: grid.panel_length(w),
            fwd: vinv * (kernel.factor(Side::Right) * &f.spatial),
            bwd: vinv * (kernel.factor(Side::Left) * &f.spatial),
            x: f.spatial.clone(),
        })
    }

    /// `∫ ∂^k E(t − s) φ(s) x ds` with the `s`-integral split at `s = t`.
    pub(crate) fn integral(&self, t: T, k: u32) -> Result<ComplexVector<T>> {
        let values = &self.kernel.evolution().values;
        let (lo, hi) = self.profile.support();
        let mut coeffs = DVector::from_element(values.len(), re(T::zero()));
        let mi = cx(T::zero(), -T::one());
        for (rule, y) in [(self.profile.rule(lo, t, self.panel)?, &self.fwd), (self.profile.rule(t, hi, self.panel)?, &self.bwd)] {
            let Some(rule) = rule else { continue };
            for (j, &l) in values.iter().enumerate() {
                let mut acc = re(T::zero());
                for (s, w) in rule.iter() {
                    acc += exp_minus_i_t(l, t - s) * re(w * self.profile.value(s));
                }
                coeffs[j] += acc * (mi * l).powu(k) * y[j];
            }
        }
        Ok(&self.kernel.evolution().vectors * coeffs)
    }

    /// `∂_t^k (E * φx)(t)` for `k ≤ 2`, including the contributions of the
    /// jump `J = E(0⁺) − E(0⁻)` at `s = t`.
    pub(crate) fn derivative(&self, t: T, k: u32) -> Result<ComplexVector<T>> {
        let mut out = self.integral(t, k)?;
        let jx = self.kernel.jump() * &self.x;
        match k {
            0 => {}
            1 => out += &jx * re(self.profile.value(t)),
            2 => {
                // the jump of E' is −iA J
                let j1 = self.kernel.generator() * &jx * cx(T::zero(), -T::one());
                out += &jx * re(self.profile.derivative(t)) + j1 * re(self.profile.value(t));
            }
            _ => return Err(Error::DimensionMismatch(format!("derivative order {k} not supported"))),
        }
        Ok(out)
    }
}

/// `(E * f)(t_k)` on the grid nodes.
pub fn convolve<T: Real>(kernel: &PropagatorKernel<T>, f: &TestFunction<T>, grid: &TimeGrid<T>) -> Result<Trajectory<T>> {
    let conv = Convolver::new(kernel, f, grid)?;
    let values = grid.nodes().iter().map(|&t| conv.integral(t, 0)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times: grid.nodes().to_vec(), values })
}

pub(crate) fn sq_norm<T: Real>(v: &ComplexVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared())
}
