//! The seven propagator kernels of the first-order system and their scalar
//! reductions.
//!
//! Every kernel has the form `E(t) = e^{−itA} F₊` for `t > 0` and
//! `E(t) = e^{−itA} F₋` for `t < 0`, with constant factors `F±` built from the
//! frequency projections. At `t = 0` the right limit is used.

mod grid;
mod scalar;

pub use grid::{convolve, Profile, ProfileKind, TestFunction, TimeGrid, Trajectory};
pub use scalar::{
    calibrate_sign, frequency_positivity, inverse_residual, scalar_inverse_residual, scalar_reduce,
    shifted_residual, ScalarPropagator, SignCalibration, SIGMA,
};

use std::fmt;
use std::str::FromStr;

use crate::block_system::{BlockSystem, SpectralSplit};
use crate::numerics::{exp_minus_i_t, fro, identity, EigenData};
use crate::{cx, lit, ComplexMatrix, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    PauliJordan,
    Retarded,
    Advanced,
    PositiveFrequency,
    NegativeFrequency,
    Feynman,
    AntiFeynman,
}

impl PropagatorKind {
    pub const ALL: [PropagatorKind; 7] = [
        PropagatorKind::PauliJordan,
        PropagatorKind::Retarded,
        PropagatorKind::Advanced,
        PropagatorKind::PositiveFrequency,
        PropagatorKind::NegativeFrequency,
        PropagatorKind::Feynman,
        PropagatorKind::AntiFeynman,
    ];

    /// Inverses satisfy `(∂_t + iB) E f = f`; the rest are bisolutions.
    pub fn is_inverse(self) -> bool {
        matches!(
            self,
            PropagatorKind::Retarded | PropagatorKind::Advanced | PropagatorKind::Feynman | PropagatorKind::AntiFeynman
        )
    }

    pub fn is_bisolution(self) -> bool {
        !self.is_inverse()
    }

    pub fn tag(self) -> &'static str {
        match self {
            PropagatorKind::PauliJordan => "PJ",
            PropagatorKind::Retarded => "Ret",
            PropagatorKind::Advanced => "Adv",
            PropagatorKind::PositiveFrequency => "PosFreq",
            PropagatorKind::NegativeFrequency => "NegFreq",
            PropagatorKind::Feynman => "Feyn",
            PropagatorKind::AntiFeynman => "AntiFeyn",
        }
    }
}

impl fmt::Display for PropagatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PropagatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        PropagatorKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(t))
            .ok_or_else(|| format!("unknown propagator kind `{t}`"))
    }
}

/// Which one-sided limit to take at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// `E(t)` for one kind, given the eigendata of a generator `A` and a pair of
/// complementary projections.
#[derive(Clone, Debug)]
pub struct PropagatorKernel<T: Real> {
    kind: PropagatorKind,
    evolution: EigenData<T>,
    generator: ComplexMatrix<T>,
    forward: ComplexMatrix<T>,
    backward: ComplexMatrix<T>,
}

impl<T: Real> PropagatorKernel<T> {
    /// Kernel of `B` with its frequency projections.
    pub fn new(kind: PropagatorKind, bs: &BlockSystem<T>, split: &SpectralSplit<T>) -> Self {
        Self::from_parts(kind, split.eigen.clone(), bs.b().clone(), &split.plus, &split.minus)
    }

    /// Kernel of an arbitrary diagonalizable generator. `plus` and `minus` take
    /// the roles of the positive and negative frequency projections.
    pub fn from_parts(
        kind: PropagatorKind,
        evolution: EigenData<T>,
        generator: ComplexMatrix<T>,
        plus: &ComplexMatrix<T>,
        minus: &ComplexMatrix<T>,
    ) -> Self {
        let n = generator.nrows();
        let id = identity::<T>(n);
        let zero = ComplexMatrix::<T>::zeros(n, n);
        let (forward, backward) = match kind {
            PropagatorKind::PauliJordan => (id.clone(), id),
            PropagatorKind::Retarded => (id, zero),
            PropagatorKind::Advanced => (zero, -id),
            PropagatorKind::PositiveFrequency => (plus.clone(), plus.clone()),
            PropagatorKind::NegativeFrequency => (-minus.clone(), -minus.clone()),
            PropagatorKind::Feynman => (plus.clone(), -minus.clone()),
            PropagatorKind::AntiFeynman => (minus.clone(), -plus.clone()),
        };
        Self { kind, evolution, generator, forward, backward }
    }

    pub fn kind(&self) -> PropagatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn evolution(&self) -> &EigenData<T> {
        &self.evolution
    }

    pub fn generator(&self) -> &ComplexMatrix<T> {
        &self.generator
    }

    /// Constant factor applied for `t > 0` (`Side::Right`) or `t < 0`.
    pub fn factor(&self, side: Side) -> &ComplexMatrix<T> {
        match side {
            Side::Right => &self.forward,
            Side::Left => &self.backward,
        }
    }

    /// `E(t)`, right-continuous at `0`.
    pub fn eval(&self, t: T) -> ComplexMatrix<T> {
        self.eval_side(t, Side::Right)
    }

    /// `E(t)`; `side` selects the one-sided limit at `t = 0` and is ignored elsewhere.
    pub fn eval_side(&self, t: T, side: Side) -> ComplexMatrix<T> {
        let side = if t > T::zero() {
            Side::Right
        } else if t < T::zero() {
            Side::Left
        } else {
            side
        };
        self.evolution.exp_action(t, self.factor(side))
    }

    /// `∂_t^k E(t)` away from zero: `(−iA)^k E(t)`, evaluated spectrally.
    pub fn derivative(&self, t: T, k: u32, side: Side) -> ComplexMatrix<T> {
        let side = if t > T::zero() {
            Side::Right
        } else if t < T::zero() {
            Side::Left
        } else {
            side
        };
        let mi = cx(T::zero(), -T::one());
        let ev = self.evolution.function(|l| exp_minus_i_t(l, t) * (mi * l).powu(k));
        ev * self.factor(side)
    }

    /// `E(0⁺) − E(0⁻)`.
    pub fn jump(&self) -> ComplexMatrix<T> {
        &self.forward - &self.backward
    }
}

/// `π₁ X ι₂`: the upper right block, equal to `π₂ Q X ι₂`.
pub fn upper_right<T: Real>(x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    crate::numerics::block_of(x, 0, 1)
}

/// Largest residual of each relation in the identity web over a set of times.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport<T: Real> {
    /// `(name, max relative residual)`.
    pub relations: Vec<(&'static str, T)>,
}

impl<T: Real> IdentityReport<T> {
    pub fn max_residual(&self) -> T {
        self.relations.iter().fold(T::zero(), |m, (_, r)| m.max(*r))
    }
}

/// Checks the linear relations between the seven kernels, at first order and
/// after scalar reduction, together with jumps and supports.
pub fn identity_suite<T: Real>(bs: &BlockSystem<T>, split: &SpectralSplit<T>, times: &[T]) -> IdentityReport<T> {
    use PropagatorKind::*;
    let kernels: Vec<PropagatorKernel<T>> = PropagatorKind::ALL.iter().map(|&k| PropagatorKernel::new(k, bs, split)).collect();
    let i = cx(T::zero(), T::one());

    let names: [&'static str; 15] = [
        "E^F = E^adv + E^+",
        "E^F = E^ret + E^-",
        "E^F + E^antiF = E^ret + E^adv",
        "E^+ - E^- = E^PJ",
        "E^antiF = E^ret - E^+",
        "E^PJ = E^ret - E^adv",
        "G^F = G^adv + iG^+",
        "G^F = G^ret + iG^-",
        "G^F + G^antiF = G^ret + G^adv",
        "G^+ - G^- = -iG^PJ",
        "G^F - G^antiF = iG^+ + iG^-",
        "jump of inverses = I",
        "jump of bisolutions = 0",
        "E^ret(t<0) = 0",
        "E^adv(t>0) = 0",
    ];
    let mut worst = vec![T::zero(); names.len()];
    let mut bump = |idx: usize, v: T| worst[idx] = worst[idx].max(v);

    let dim = 2 * bs.n();
    for &t in times {
        let e: Vec<ComplexMatrix<T>> = kernels.iter().map(|k| k.eval(t)).collect();
        let at = |k: PropagatorKind| &e[PropagatorKind::ALL.iter().position(|&x| x == k).unwrap()];
        let scale = fro(&split.eigen.evolution(t)).max(T::one());
        let rel = |m: ComplexMatrix<T>| fro(&m) / scale;

        bump(0, rel(at(Feynman) - at(Advanced) - at(PositiveFrequency)));
        bump(1, rel(at(Feynman) - at(Retarded) - at(NegativeFrequency)));
        bump(2, rel(at(Feynman) + at(AntiFeynman) - at(Retarded) - at(Advanced)));
        bump(3, rel(at(PositiveFrequency) - at(NegativeFrequency) - at(PauliJordan)));
        bump(4, rel(at(AntiFeynman) - at(Retarded) + at(PositiveFrequency)));
        bump(5, rel(at(PauliJordan) - at(Retarded) + at(Advanced)));

        let g = |k: PropagatorKind| scalar::reduce_matrix(k, at(k), bs);
        let (gf, gaf, gr, ga) = (g(Feynman), g(AntiFeynman), g(Retarded), g(Advanced));
        let (gp, gm, gpj) = (g(PositiveFrequency), g(NegativeFrequency), g(PauliJordan));
        bump(6, rel(&gf - &ga - &gp * i));
        bump(7, rel(&gf - &gr - &gm * i));
        bump(8, rel(&gf + &gaf - &gr - &ga));
        bump(9, rel(&gp - &gm + &gpj * i));
        bump(10, rel(&gf - &gaf - &gp * i - &gm * i));

        bump(13, if t < T::zero() { rel(at(Retarded).clone()) } else { T::zero() });
        bump(14, if t > T::zero() { rel(at(Advanced).clone()) } else { T::zero() });
    }
    let id = identity::<T>(dim);
    for k in &kernels {
        let j = k.eval_side(T::zero(), Side::Right) - k.eval_side(T::zero(), Side::Left);
        if k.kind().is_inverse() {
            bump(11, fro(&(j - &id)) / lit::<T>(dim as f64).sqrt());
        } else {
            bump(12, fro(&j) / lit::<T>(dim as f64).sqrt());
        }
    }
    IdentityReport { relations: names.iter().copied().zip(worst).collect() }
}

/// `max_t |‖E^PJ(t) u‖_en − ‖u‖_en| / ‖u‖_en`.
pub fn energy_isometry_defect<T: Real>(bs: &BlockSystem<T>, split: &SpectralSplit<T>, u: &crate::ComplexVector<T>, times: &[T]) -> T {
    let base = bs.energy_norm(u);
    times.iter().fold(T::zero(), |m, &t| {
        let ut = split.eigen.evolution(t) * u;
        m.max((bs.energy_norm(&ut) - base).abs() / base)
    })
}

/// `max_t ‖W^{-1} G(t)ᴴ W − G(−t)‖ / ‖G(t)‖` for a reduced kernel.
pub fn hermitian_kernel_defect<T: Real>(g: &ScalarPropagator<T>, bs: &BlockSystem<T>, times: &[T]) -> T {
    let space = bs.spatial_space();
    times.iter().fold(T::zero(), |m, &t| {
        let a = g.eval(t);
        let b = g.eval(-t);
        let scale = fro(&a).max(lit(1e-300));
        m.max(fro(&(space.adjoint_of(&a) - b)) / scale)
    })
}
