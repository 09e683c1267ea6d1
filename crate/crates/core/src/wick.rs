//! Wick rotation of the generator, `B_θ = e^{−iθ} B` for `θ ∈ [0, π]`.
//!
//! The rotated kernels reuse the eigenvectors of `B` and the frequency
//! projections `Π^±`, so each half-line semigroup is normal in the energy
//! product and its norm is `max e^{−|t| |λ| sin θ}` over the relevant modes.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::block_system::{BlockSystem, SpectralSplit};
use crate::numerics::{loglog_slope, EigenData};
use crate::propagators::{PropagatorKernel, PropagatorKind};
use crate::{cx, lit, to_f64, ComplexMatrix, ComplexVector, Error, Real, Result};

#[derive(Clone, Debug)]
pub struct RotatedGenerator<T: Real> {
    pub theta: T,
    pub matrix: ComplexMatrix<T>,
    pub eigen: EigenData<T>,
}

/// `B_θ = e^{−iθ} B`.
pub fn rotated_generator<T: Real>(bs: &BlockSystem<T>, split: &SpectralSplit<T>, theta: T) -> Result<RotatedGenerator<T>> {
    if !(theta >= T::zero() && theta <= lit(PI)) {
        return Err(Error::AngleOutOfRange(to_f64(theta)));
    }
    let phase = cx(theta.cos(), -theta.sin());
    Ok(RotatedGenerator { theta, matrix: bs.b() * phase, eigen: split.eigen.scaled(phase) })
}

/// `E_θ^F(t) = θ(t) e^{−itB_θ} Π^+ − θ(−t) e^{−itB_θ} Π^−`.
pub fn feynman_kernel_theta<T: Real>(rg: &RotatedGenerator<T>, split: &SpectralSplit<T>) -> PropagatorKernel<T> {
    PropagatorKernel::from_parts(PropagatorKind::Feynman, rg.eigen.clone(), rg.matrix.clone(), &split.plus, &split.minus)
}

/// `‖e^{−itB_θ} Π^+‖_en` for `t ≥ 0`, `‖e^{−itB_θ} Π^−‖_en` for `t < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WickContraction<T: Real> {
    pub theta: T,
    pub samples: Vec<(T, T)>,
    /// Every `t ≠ 0` sample is strictly below one.
    pub strictly_decaying: bool,
}

impl<T: Real> WickContraction<T> {
    pub fn max_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.1))
    }
}

/// Half-line contraction of the rotated semigroups. `ContractionViolated`
/// beyond `1 + 1e-12`.
pub fn contraction_check<T: Real>(
    bs: &BlockSystem<T>,
    rg: &RotatedGenerator<T>,
    split: &SpectralSplit<T>,
    times: &[T],
) -> Result<WickContraction<T>> {
    let mut samples = Vec::with_capacity(times.len());
    let mut strict = true;
    for &t in times {
        let proj = if t >= T::zero() { &split.plus } else { &split.minus };
        let norm = bs.energy_operator_norm(&rg.eigen.exp_action(t, proj));
        if norm > T::one() + lit(1e-12) {
            return Err(Error::ContractionViolated { norm: to_f64(norm), t: to_f64(t) });
        }
        if t != T::zero() && norm >= T::one() {
            strict = false;
        }
        samples.push((t, norm));
    }
    Ok(WickContraction { theta: rg.theta, samples, strictly_decaying: strict })
}

/// `‖e^{−itB_θ} Π^+‖_en` on the wrong half-line `t < 0`, where it grows.
pub fn anti_group_norm<T: Real>(bs: &BlockSystem<T>, rg: &RotatedGenerator<T>, split: &SpectralSplit<T>, t: T) -> T {
    bs.energy_operator_norm(&rg.eigen.exp_action(t, &split.plus))
}

/// Largest deviation of `‖E_{π/2}^F(t)‖_en` from `e^{−|t| m±}`, where `m+` is
/// the smallest positive and `m−` the smallest absolute negative eigenvalue of `B`.
pub fn riemannian_decay_defect(bs: &BlockSystem<f64>, split: &SpectralSplit<f64>, times: &[f64]) -> Result<f64> {
    let rg = rotated_generator(bs, split, PI / 2.0)?;
    let kernel = feynman_kernel_theta(&rg, split);
    let ev = split.eigenvalues();
    let m_plus = ev.iter().copied().filter(|l| *l > 0.0).fold(f64::INFINITY, f64::min);
    let m_minus = ev.iter().copied().filter(|l| *l < 0.0).map(f64::abs).fold(f64::INFINITY, f64::min);
    Ok(times.iter().fold(0.0, |m: f64, &t| {
        let rate = if t >= 0.0 { m_plus } else { m_minus };
        let got = bs.energy_operator_norm(&kernel.eval(t));
        m.max((got - (-t.abs() * rate).exp()).abs())
    }))
}

/// Default rotation angles of the `θ → 0` sweep.
pub const DEFAULT_THETAS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
pub const DEFAULT_WICK_TIMES: [f64; 8] = [-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickRow {
    pub theta: f64,
    pub t: f64,
    pub error: f64,
    /// `error / (|t| θ ‖u‖_en max(1, ‖B‖_en))`.
    pub k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WickTable {
    pub rows: Vec<WickRow>,
    /// Largest `k` over all rows.
    pub fitted_k: f64,
    /// Log-log slope in `θ` at each sample time.
    pub slopes: Vec<(f64, f64)>,
}

impl WickTable {
    pub fn slope_range(&self) -> (f64, f64) {
        self.slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)))
    }

    pub fn slope_at(&self, t: f64) -> Option<f64> {
        self.slopes.iter().find(|s| s.0 == t).map(|s| s.1)
    }
}

/// `‖E_θ^F(t) u − E^F(t) u‖_en` over angles and times, with the fitted
/// constant of `K |t| θ ‖u‖_en max(1, ‖B‖)` and per-time slopes.
pub fn wick_sweep(
    bs: &BlockSystem<f64>,
    split: &SpectralSplit<f64>,
    thetas: &[f64],
    times: &[f64],
    u: &ComplexVector<f64>,
) -> Result<WickTable> {
    if thetas.is_empty() || thetas.windows(2).any(|w| !(w[0] > w[1])) || thetas[0] <= 0.0 || thetas[0] > PI / 2.0 {
        return Err(Error::BadSweep);
    }
    let unorm = bs.energy_norm(u);
    let b_norm = bs.energy_operator_norm(bs.b()).max(1.0);
    let base = PropagatorKernel::new(PropagatorKind::Feynman, bs, split);
    let reference: Vec<ComplexVector<f64>> = times.iter().map(|&t| base.eval(t) * u).collect();
    let rows: Vec<WickRow> = thetas
        .par_iter()
        .map(|&theta| {
            let rg = rotated_generator(bs, split, theta)?;
            let kernel = feynman_kernel_theta(&rg, split);
            Ok(times
                .iter()
                .zip(&reference)
                .map(|(&t, r)| {
                    let error = bs.energy_norm(&(kernel.eval(t) * u - r));
                    WickRow { theta, t, error, k: error / (t.abs() * theta * unorm * b_norm) }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let fitted_k = rows.iter().filter(|r| r.k.is_finite()).fold(0.0, |m: f64, r| m.max(r.k));
    let slopes = times
        .iter()
        .map(|&t| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.t == t).map(|r| (r.theta, r.error)).unzip();
            (t, loglog_slope(&xs, &ys).unwrap_or(f64::NAN))
        })
        .collect();
    Ok(WickTable { rows, fitted_k, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_system::{assemble_blocks, spectral_split};
    use crate::model::{assemble_l, SpatialModel};
    use crate::numerics::fro;
    use crate::propagators::scalar_reduce;
    use crate::re;

    fn system(name: &str) -> (BlockSystem<f64>, SpectralSplit<f64>) {
        let m = SpatialModel::preset(name).unwrap();
        let bs = assemble_blocks(&assemble_l(&m).unwrap(), &m).unwrap();
        let s = spectral_split(&bs).unwrap();
        (bs, s)
    }

    #[test]
    fn rotation_is_a_scalar_multiple() {
        let (bs, s) = system("M0");
        let rg = rotated_generator(&bs, &s, PI / 2.0).unwrap();
        assert!(fro(&(&rg.matrix - bs.b() * cx(0.0, -1.0))) < 1e-15);
        assert!(matches!(rotated_generator(&bs, &s, 4.0), Err(Error::AngleOutOfRange(_))));
        assert!(matches!(rotated_generator(&bs, &s, -0.1), Err(Error::AngleOutOfRange(_))));

        let (bs, s) = system("M1");
        let rg = rotated_generator(&bs, &s, PI).unwrap();
        for (a, b) in rg.eigen.values.iter().zip(s.eigen.values.iter()) {
            assert!((a + b).norm() < 1e-12);
        }
    }

    #[test]
    fn riemannian_point_on_m0() {
        let (bs, s) = system("M0");
        let rg = rotated_generator(&bs, &s, PI / 2.0).unwrap();
        let c = contraction_check(&bs, &rg, &s, &[1.0]).unwrap();
        assert!((c.samples[0].1 - (-1.0f64).exp()).abs() < 1e-12);
        let g = scalar_reduce(&feynman_kernel_theta(&rg, &s), &bs);
        for t in [-1.5, 0.5, 2.0] {
            let want = cx(0.0, 0.5 * (-f64::abs(t)).exp());
            assert!((g.eval(t)[(0, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn unrotated_is_unitary_and_feynman() {
        let (bs, s) = system("M1");
        let rg = rotated_generator(&bs, &s, 0.0).unwrap();
        let c = contraction_check(&bs, &rg, &s, &[-2.0, 0.0, 3.0]).unwrap();
        assert!(c.samples.iter().all(|x| (x.1 - 1.0).abs() < 1e-12));
        let f = PropagatorKernel::new(PropagatorKind::Feynman, &bs, &s);
        let k = feynman_kernel_theta(&rg, &s);
        assert!(fro(&(k.eval(1.3) - f.eval(1.3))) < 1e-12);
    }

    #[test]
    fn m1_decay_and_obstruction() {
        let (bs, s) = system("M1");
        assert!(riemannian_decay_defect(&bs, &s, &[-3.0, -1.0, 0.5, 2.0]).unwrap() < 1e-8);
        let rg = rotated_generator(&bs, &s, PI / 4.0).unwrap();
        assert!(anti_group_norm(&bs, &rg, &s, -1.0) > 1.0);
    }

    #[test]
    fn m0_error_bound() {
        let (bs, s) = system("M0");
        let u = ComplexVector::from_vec(vec![re(1.0), cx(0.3, -0.2)]);
        let t = wick_sweep(&bs, &s, &[0.1], &[1.0], &u).unwrap();
        let bound = 0.1 * bs.energy_operator_norm(bs.b()) * bs.energy_norm(&u);
        assert!(t.rows[0].error <= bound * (1.0 + 1e-6));
        assert!(matches!(wick_sweep(&bs, &s, &[0.01, 0.1], &[1.0], &u), Err(Error::BadSweep)));
    }
}
