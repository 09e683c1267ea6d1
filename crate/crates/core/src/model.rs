//! One-dimensional lattice discretization of the static spatial operator
//!
//! `L = β^{1/2} |g|^{-1/2} (D − A) |g|^{1/2} g^{11} (D − A) β^{1/2} + β Y`,
//!
//! with `|g| = β g_Σ` and `D = −i ∂`, acting in `L²(Σ)` with measure
//! `β^{1/2} g_Σ^{1/2} dx`. The magnetic derivative uses link variables
//! `e^{−i A dx}` on the edges, so `W L` is Hermitian to rounding error.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::numerics::{hermitian_eig_weighted, real_diagonal, WeightedSpace, STRUCTURAL_TOL};
use crate::{cx, lit, re, to_f64, ComplexMatrix, Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "dirichlet" => Ok(Boundary::Dirichlet),
            other => Err(format!("unknown boundary `{other}` (expected periodic or dirichlet)")),
        }
    }
}

/// Unvalidated description of a lattice model. Fields are sampled at nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec<T: Real> {
    pub n: usize,
    pub dx: T,
    pub boundary: Boundary,
    pub beta: Vec<T>,
    pub g_sigma: Vec<T>,
    /// Spatial magnetic potential `A_1`.
    pub a: Vec<T>,
    pub y: Vec<T>,
    /// Electric potential `V = −A_0`.
    pub v: Vec<T>,
}

impl<T: Real> ModelSpec<T> {
    /// Homogeneous ring: `β = g_Σ = Y = 1`, `A = V = 0`.
    pub fn free_ring(n: usize, dx: T) -> Self {
        Self {
            n,
            dx,
            boundary: Boundary::Periodic,
            beta: vec![T::one(); n],
            g_sigma: vec![T::one(); n],
            a: vec![T::zero(); n],
            y: vec![T::one(); n],
            v: vec![T::zero(); n],
        }
    }

    /// Named presets:
    ///
    /// - `M0`: one node, `L = [1]`, `V = 0`, `β = 1` (a single mode of mass 1);
    /// - `M1`: 8-node periodic ring, `dx = 1`, `β = g_Σ = Y = 1`, `A = V = 0`;
    /// - `M2`: `M1` with `V ≡ 0.2`.
    pub fn preset(name: &str) -> Result<Self> {
        match name.trim().to_ascii_uppercase().as_str() {
            "M0" => Ok(Self::free_ring(1, T::one())),
            "M1" => Ok(Self::free_ring(8, T::one())),
            "M2" => {
                let mut m = Self::free_ring(8, T::one());
                m.v = vec![lit(0.2); 8];
                Ok(m)
            }
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }

    pub fn build(self) -> Result<SpatialModel<T>> {
        build_model(self)
    }
}

/// Validated lattice model.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialModel<T: Real> {
    spec: ModelSpec<T>,
}

/// Validates a model description.
pub fn build_model<T: Real>(spec: ModelSpec<T>) -> Result<SpatialModel<T>> {
    if spec.n == 0 {
        return Err(Error::LengthMismatch { field: "n", expected: 1, got: 0 });
    }
    if !(spec.dx > T::zero()) {
        return Err(Error::InvalidField { field: "dx", index: 0, reason: "spacing must be positive" });
    }
    let n = spec.n;
    let fields: [(&'static str, &Vec<T>); 5] = [
        ("beta", &spec.beta),
        ("g_sigma", &spec.g_sigma),
        ("a", &spec.a),
        ("y", &spec.y),
        ("v", &spec.v),
    ];
    for (name, f) in fields {
        if f.len() != n {
            return Err(Error::LengthMismatch { field: name, expected: n, got: f.len() });
        }
        if let Some(i) = f.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidField { field: name, index: i, reason: "not finite" });
        }
    }
    if let Some(i) = spec.beta.iter().position(|&b| !(b > T::zero())) {
        return Err(Error::InvalidField { field: "beta", index: i, reason: "must be strictly positive" });
    }
    if let Some(i) = spec.g_sigma.iter().position(|&g| !(g > T::zero())) {
        return Err(Error::InvalidField { field: "g_sigma", index: i, reason: "must be strictly positive" });
    }
    if let Some(i) = spec.y.iter().position(|&y| y < T::zero()) {
        return Err(Error::InvalidField { field: "y", index: i, reason: "must be nonnegative" });
    }
    Ok(SpatialModel { spec })
}

impl<T: Real> SpatialModel<T> {
    pub fn preset(name: &str) -> Result<Self> {
        ModelSpec::preset(name)?.build()
    }

    pub fn spec(&self) -> &ModelSpec<T> {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn dx(&self) -> T {
        self.spec.dx
    }

    pub fn beta(&self) -> &[T] {
        &self.spec.beta
    }

    pub fn v(&self) -> &[T] {
        &self.spec.v
    }

    /// `sup |V|`.
    pub fn v_norm(&self) -> T {
        self.spec.v.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// The largest `C` with `C ≤ β ≤ C^{-1}`.
    pub fn beta_constant(&self) -> T {
        let lo = self.spec.beta.iter().copied().fold(T::max_value().unwrap(), T::min);
        let hi = self.spec.beta.iter().copied().fold(T::zero(), T::max);
        lo.min(T::one() / hi)
    }

    /// Nodal weights `β^{1/2} g_Σ^{1/2} dx` of the spatial inner product.
    pub fn measure(&self) -> Vec<T> {
        (0..self.n())
            .map(|j| (self.spec.beta[j] * self.spec.g_sigma[j]).sqrt() * self.spec.dx)
            .collect()
    }

    pub fn space(&self) -> WeightedSpace<T> {
        WeightedSpace::diagonal(&self.measure()).expect("validated model has positive measure")
    }

    /// `diag(V)`.
    pub fn v_matrix(&self) -> ComplexMatrix<T> {
        real_diagonal(&self.spec.v)
    }

    /// `diag(β^{1/2})`.
    pub fn beta_sqrt_matrix(&self) -> ComplexMatrix<T> {
        let s: Vec<T> = self.spec.beta.iter().map(|b| b.sqrt()).collect();
        real_diagonal(&s)
    }

    pub fn beta_inv_sqrt_matrix(&self) -> ComplexMatrix<T> {
        let s: Vec<T> = self.spec.beta.iter().map(|b| T::one() / b.sqrt()).collect();
        real_diagonal(&s)
    }
}

/// Assembled `L` together with its Hilbert space.
#[derive(Clone, Debug)]
pub struct SpatialOperator<T: Real> {
    pub matrix: ComplexMatrix<T>,
    pub space: WeightedSpace<T>,
    /// Minimum eigenvalue of `L − V²`.
    pub lower_bound_c: T,
}

struct Link<T: Real> {
    from: Option<usize>,
    to: Option<usize>,
    /// Average of `|g|^{1/2} g^{11}` over the edge, times `dx`.
    coupling: T,
    /// Parallel transporter `e^{−i A dx}`.
    phase: Complex<T>,
}

fn links<T: Real>(m: &ModelSpec<T>) -> Vec<Link<T>> {
    let n = m.n;
    let half = lit::<T>(0.5);
    let node_coef = |j: usize| (m.beta[j] * m.g_sigma[j]).sqrt() / m.g_sigma[j];
    let phase = |a: T| ComplexField::exp(cx(T::zero(), -a * m.dx));
    let edge = |j: usize, k: usize| Link {
        from: Some(j),
        to: Some(k),
        coupling: (node_coef(j) + node_coef(k)) * half * m.dx,
        phase: phase((m.a[j] + m.a[k]) * half),
    };
    match m.boundary {
        Boundary::Periodic => (0..n).map(|j| edge(j, (j + 1) % n)).collect(),
        Boundary::Dirichlet => {
            let mut out = Vec::with_capacity(n + 1);
            out.push(Link { from: None, to: Some(0), coupling: node_coef(0) * m.dx, phase: phase(m.a[0]) });
            out.extend((0..n - 1).map(|j| edge(j, j + 1)));
            out.push(Link {
                from: Some(n - 1),
                to: None,
                coupling: node_coef(n - 1) * m.dx,
                phase: phase(m.a[n - 1]),
            });
            out
        }
    }
}

/// Assembles `L` as `M^{-1} β^{1/2} Dᴴ C D β^{1/2} + β Y`, where `D` is the
/// covariant edge difference `(e^{−i A dx} u_{j+1} − u_j)/dx`, `C` the edge
/// couplings and `M` the nodal measure.
pub fn assemble_l<T: Real>(model: &SpatialModel<T>) -> Result<SpatialOperator<T>> {
    let spec = model.spec();
    let n = spec.n;
    let edges = links(spec);
    let inv_dx = T::one() / spec.dx;
    let mut d = DMatrix::<Complex<T>>::zeros(edges.len(), n);
    for (row, e) in edges.iter().enumerate() {
        if let Some(k) = e.to {
            d[(row, k)] += e.phase * re(inv_dx);
        }
        if let Some(j) = e.from {
            d[(row, j)] -= re(inv_dx);
        }
    }
    let c = real_diagonal(&edges.iter().map(|e| e.coupling).collect::<Vec<_>>());
    let bs = model.beta_sqrt_matrix();
    let form = &bs * d.adjoint() * c * &d * &bs;
    let measure = model.measure();
    let inv_m = real_diagonal(&measure.iter().map(|w| T::one() / *w).collect::<Vec<_>>());
    let y_tilde: Vec<T> = (0..n).map(|j| spec.beta[j] * spec.y[j]).collect();
    let matrix = inv_m * form + real_diagonal(&y_tilde);
    let space = model.space();
    let v2 = model.v_matrix() * model.v_matrix();
    let lower_bound_c = min_weighted_eig(&(&matrix - v2), &space)?;
    Ok(SpatialOperator { matrix, space, lower_bound_c })
}

pub(crate) fn min_weighted_eig<T: Real>(a: &ComplexMatrix<T>, w: &WeightedSpace<T>) -> Result<T> {
    Ok(hermitian_eig_weighted(a, w)?.values[0].re)
}

impl<T: Real> SpatialOperator<T> {
    /// Ascending eigenvalues of `L`.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian_eig_weighted(&self.matrix, &self.space)?.values.iter().map(|l| l.re).collect())
    }

    /// `‖W L − (W L)ᴴ‖ / ‖W L‖`.
    pub fn hermitian_residual(&self) -> T {
        self.space.self_adjoint_residual(&self.matrix)
    }

    /// Minimum eigenvalue of `L − C − (1 − C)^{-1} V²`, the spatial side of the
    /// criterion `H ≥ C`.
    pub fn h_bound_criterion(&self, model: &SpatialModel<T>, c: T) -> Result<T> {
        let n = model.n();
        let v = model.v_matrix();
        let shifted = &self.matrix
            - DMatrix::<Complex<T>>::identity(n, n) * re(c)
            - &v * &v * re(T::one() / (T::one() - c));
        min_weighted_eig(&shifted, &self.space)
    }

    /// The largest `C < 1` with `H ≥ C`, located by bisection on
    /// [`Self::h_bound_criterion`]; `None` if even `C = 0` fails.
    pub fn derived_h_bound(&self, model: &SpatialModel<T>) -> Result<Option<T>> {
        if self.h_bound_criterion(model, T::zero())? < T::zero() {
            return Ok(None);
        }
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..60 {
            let mid = (lo + hi) * lit(0.5);
            if self.h_bound_criterion(model, mid)? >= T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }
}

/// A boolean verdict together with the number that decided it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub ok: bool,
    pub value: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", if self.ok { "ok" } else { "FAIL" }, self.value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// `C_β` with `C_β ≤ β ≤ C_β^{-1}`.
    pub beta_bounds: Witness,
    /// `min Y`.
    pub y_nonnegative: Witness,
    /// Relative Hermiticity residual of `W L`.
    pub l_hermitian: Witness,
    /// `min eig(L − V²) > 0`.
    pub h_positive: Witness,
    /// The largest `C` with `H ≥ C`, via the block factorization criterion.
    pub strong_h_positive: Witness,
    /// `min eig(L − 2V²) ≥ 0`.
    pub dissipativity_ok: Witness,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.beta_bounds.ok
            && self.y_nonnegative.ok
            && self.l_hermitian.ok
            && self.h_positive.ok
            && self.strong_h_positive.ok
            && self.dissipativity_ok.ok
    }

    pub fn rows(&self) -> Vec<(&'static str, Witness)> {
        vec![
            ("beta_bounds", self.beta_bounds),
            ("y_nonnegative", self.y_nonnegative),
            ("l_hermitian", self.l_hermitian),
            ("h_positive", self.h_positive),
            ("strong_h_positive", self.strong_h_positive),
            ("dissipativity", self.dissipativity_ok),
        ]
    }
}

/// Evaluates the standing assumptions. Failures are reported, not raised.
pub fn check_assumptions<T: Real>(model: &SpatialModel<T>, l: &SpatialOperator<T>) -> Result<AssumptionReport> {
    let spec = model.spec();
    let c_beta = model.beta_constant();
    let y_min = spec.y.iter().copied().fold(T::max_value().unwrap(), T::min);
    let herm = l.hermitian_residual();
    let scale = T::one().max(crate::numerics::spectral_norm(&l.matrix));
    let tol = lit::<T>(STRUCTURAL_TOL) * scale;

    let c = l.lower_bound_c;
    let v = model.v_matrix();
    let diss = min_weighted_eig(&(&l.matrix - &v * &v * re(lit::<T>(2.0))), &l.space)?;
    let h_bound = l.derived_h_bound(model)?;

    Ok(AssumptionReport {
        beta_bounds: Witness { ok: c_beta > T::zero(), value: to_f64(c_beta) },
        y_nonnegative: Witness { ok: y_min >= T::zero(), value: to_f64(y_min) },
        l_hermitian: Witness { ok: herm <= lit(STRUCTURAL_TOL), value: to_f64(herm) },
        h_positive: Witness { ok: c > tol, value: to_f64(c) },
        strong_h_positive: Witness {
            ok: h_bound.map(|b| b > tol).unwrap_or(false),
            value: h_bound.map(to_f64).unwrap_or(f64::NAN),
        },
        dissipativity_ok: Witness { ok: diss >= -tol, value: to_f64(diss) },
    })
}

/// Fourier symbol of the free ring: `Y + (2 − 2 cos(2πk/n − a dx)) / dx²`.
pub fn free_ring_symbol(n: usize, dx: f64, y: f64, a: f64) -> Vec<f64> {
    (0..n)
        .map(|k| y + (2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64 - a * dx).cos()) / (dx * dx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn m0_is_unit_mass() {
        let m = SpatialModel::<f64>::preset("M0").unwrap();
        let l = assemble_l(&m).unwrap();
        assert_eq!(l.matrix.shape(), (1, 1));
        assert!((l.matrix[(0, 0)] - re(1.0)).norm() < 1e-15);
        assert_eq!(l.lower_bound_c, 1.0);
    }

    #[test]
    fn m1_matches_fourier_symbol() {
        let m = SpatialModel::<f64>::preset("M1").unwrap();
        let l = assemble_l(&m).unwrap();
        let got = l.eigenvalues().unwrap();
        let want = sorted(free_ring_symbol(8, 1.0, 1.0, 0.0));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        assert!((got[0] - 1.0).abs() < 1e-12 && (got[7] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn constant_magnetic_potential_shifts_symbol() {
        let mut spec = ModelSpec::<f64>::preset("M1").unwrap();
        spec.a = vec![0.3; 8];
        let l = assemble_l(&spec.build().unwrap()).unwrap();
        assert!(l.hermitian_residual() < 1e-14);
        let got = l.eigenvalues().unwrap();
        let want = sorted(free_ring_symbol(8, 1.0, 1.0, 0.3));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_chain_has_sine_spectrum() {
        let mut spec = ModelSpec::<f64>::free_ring(6, 1.0);
        spec.boundary = Boundary::Dirichlet;
        spec.y = vec![0.0; 6];
        let got = assemble_l(&spec.build().unwrap()).unwrap().eigenvalues().unwrap();
        let want = sorted((1..=6).map(|k| 2.0 - 2.0 * (PI * k as f64 / 7.0).cos()).collect());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn variable_coefficients_stay_weighted_hermitian() {
        let n = 7;
        let spec = ModelSpec {
            n,
            dx: 0.4,
            boundary: Boundary::Dirichlet,
            beta: (0..n).map(|j| 1.0 + 0.3 * (j as f64).sin()).collect(),
            g_sigma: (0..n).map(|j| 0.8 + 0.1 * j as f64).collect(),
            a: (0..n).map(|j| 0.2 * j as f64).collect(),
            y: vec![0.5; n],
            v: vec![0.1; n],
        };
        let m = spec.build().unwrap();
        let l = assemble_l(&m).unwrap();
        assert!(l.hermitian_residual() < 1e-14);
        assert!(l.lower_bound_c > 0.0);
    }

    #[test]
    fn check_reports_m1_and_m2_constants() {
        let m1 = SpatialModel::<f64>::preset("M1").unwrap();
        let r1 = check_assumptions(&m1, &assemble_l(&m1).unwrap()).unwrap();
        assert!(r1.all_ok());
        assert!((r1.h_positive.value - 1.0).abs() < 1e-12);
        assert!((r1.dissipativity_ok.value - 1.0).abs() < 1e-12);

        let m2 = SpatialModel::<f64>::preset("M2").unwrap();
        let r2 = check_assumptions(&m2, &assemble_l(&m2).unwrap()).unwrap();
        assert!(r2.all_ok());
        assert!((r2.h_positive.value - 0.96).abs() < 1e-12);
        assert!((r2.dissipativity_ok.value - 0.92).abs() < 1e-12);
    }

    #[test]
    fn massless_ring_fails_positivity() {
        let mut spec = ModelSpec::<f64>::preset("M1").unwrap();
        spec.y = vec![0.0; 8];
        let m = spec.build().unwrap();
        let r = check_assumptions(&m, &assemble_l(&m).unwrap()).unwrap();
        assert!(!r.h_positive.ok);
        assert!(r.h_positive.value.abs() < 1e-12);
        assert!(!r.all_ok());
    }

    #[test]
    fn validation_errors() {
        let mut spec = ModelSpec::<f64>::preset("M1").unwrap();
        spec.beta[3] = 0.0;
        assert!(matches!(spec.build(), Err(Error::InvalidField { field: "beta", index: 3, .. })));

        let mut spec = ModelSpec::<f64>::preset("M1").unwrap();
        spec.y[0] = -1.0;
        assert!(matches!(spec.build(), Err(Error::InvalidField { field: "y", .. })));

        let mut spec = ModelSpec::<f64>::preset("M1").unwrap();
        spec.v.pop();
        assert!(matches!(spec.build(), Err(Error::LengthMismatch { field: "v", .. })));

        assert!(matches!(SpatialModel::<f64>::preset("M9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn derived_h_bound_for_free_ring() {
        // V = 0: H = diag(L, 1) and L ≥ 1, so the bound approaches 1 from below.
        let m = SpatialModel::<f64>::preset("M1").unwrap();
        let l = assemble_l(&m).unwrap();
        let b = l.derived_h_bound(&m).unwrap().unwrap();
        assert!(b > 0.999_999 && b < 1.0);
    }
}
