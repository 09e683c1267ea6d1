//! Flat `key = value` run configuration.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use staticprop_core::absorption::{ProjectionMethod, DEFAULT_EPSILONS, DEFAULT_LAP_TIMES};
use staticprop_core::model::{Boundary, ModelSpec};
use staticprop_core::wick::{DEFAULT_THETAS, DEFAULT_WICK_TIMES};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

/// A spatial field given either as one value for every node or node by node.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Uniform(f64),
    Nodes(Vec<f64>),
}

/// Field overrides applied on top of a preset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelOverrides {
    pub n: Option<usize>,
    pub dx: Option<f64>,
    pub boundary: Option<Boundary>,
    pub beta: Option<FieldValue>,
    pub g_sigma: Option<FieldValue>,
    pub a: Option<FieldValue>,
    pub y: Option<FieldValue>,
    pub v: Option<FieldValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative residual of the propagator identities.
    pub identity: f64,
    /// Quadrature residual of the inverse, bisolution and resolvent contracts.
    pub residual: f64,
    /// Algebraic defects of the bisectorial projections.
    pub projection: f64,
    /// Contour projections against the eigen oracle.
    pub contour: f64,
    /// Fourier oracle against the semigroup kernel.
    pub fourier: f64,
    /// Allowed deviation of convergence slopes from one.
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-10, residual: 1e-6, projection: 1e-8, contour: 1e-6, fourier: 1e-3, slope: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub overrides: ModelOverrides,
    /// Time window half-width `T` of the quadrature grid.
    pub horizon: f64,
    /// Weight exponent `s` of the `⟨t⟩^{-s}` grid norm.
    pub s: f64,
    pub nodes_per_unit: usize,
    pub epsilons: Vec<f64>,
    pub lap_times: Vec<f64>,
    pub lap_method: ProjectionMethod,
    pub lap_slack: f64,
    pub contour_nodes: usize,
    pub thetas: Vec<f64>,
    pub wick_times: Vec<f64>,
    pub kernel_times: Vec<f64>,
    pub identity_times: Vec<f64>,
    /// Imaginary parts of the spectral parameters used for projection diagnostics.
    pub z_imag: Vec<f64>,
    /// Imaginary parts of the spectral parameters checked against the Fourier oracle.
    pub fourier_z_imag: Vec<f64>,
    pub fourier_omega: f64,
    pub fourier_points: usize,
    pub bump_center: f64,
    pub bump_width: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "M1".into(),
            overrides: ModelOverrides::default(),
            horizon: 10.0,
            s: 1.0,
            nodes_per_unit: 16,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            lap_times: DEFAULT_LAP_TIMES.to_vec(),
            lap_method: ProjectionMethod::Contour,
            lap_slack: 1e-6,
            contour_nodes: 512,
            thetas: DEFAULT_THETAS.to_vec(),
            wick_times: DEFAULT_WICK_TIMES.to_vec(),
            kernel_times: (0..=40).map(|k| -5.0 + 0.25 * k as f64).collect(),
            identity_times: (0..32).map(|k| -10.0 + 20.0 * (k as f64 + 0.5) / 32.0).collect(),
            z_imag: vec![0.0, 0.1, -0.1, 1.0, -1.0],
            fourier_z_imag: vec![1.0, -1.0],
            fourier_omega: 100.0,
            fourier_points: 1 << 14,
            bump_center: 0.0,
            bump_width: 1.5,
            seed: 0,
            tolerances: Tolerances::default(),
            out: None,
        }
    }
}

impl RunConfig {
    /// The preset with the overrides applied. Uniform preset fields follow a changed `n`.
    pub fn model_spec(&self) -> Result<ModelSpec<f64>, ConfigError> {
        let base = ModelSpec::<f64>::preset(&self.model).map_err(|e| ConfigError::Validation(e.to_string()))?;
        let o = &self.overrides;
        let n = o.n.unwrap_or(base.n);
        let resolve = |name: &str, given: &Option<FieldValue>, preset: &[f64]| -> Result<Vec<f64>, ConfigError> {
            match given {
                Some(FieldValue::Uniform(x)) => Ok(vec![*x; n]),
                Some(FieldValue::Nodes(v)) => Ok(v.clone()),
                None if preset.len() == n => Ok(preset.to_vec()),
                None if preset.windows(2).all(|w| w[0] == w[1]) && !preset.is_empty() => Ok(vec![preset[0]; n]),
                None => Err(ConfigError::Validation(format!("`{name}` must be given when n changes"))),
            }
        };
        Ok(ModelSpec {
            n,
            dx: o.dx.unwrap_or(base.dx),
            boundary: o.boundary.unwrap_or(base.boundary),
            beta: resolve("beta", &o.beta, &base.beta)?,
            g_sigma: resolve("g_sigma", &o.g_sigma, &base.g_sigma)?,
            a: resolve("a", &o.a, &base.a)?,
            y: resolve("y", &o.y, &base.y)?,
            v: resolve("v", &o.v, &base.v)?,
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Validation(m.to_string()));
        if self.s <= 0.5 {
            return fail("s must exceed 1/2");
        }
        if self.horizon <= 0.0 {
            return fail("T must be positive");
        }
        if self.nodes_per_unit < 2 {
            return fail("nodes_per_unit must be at least 2");
        }
        if !positive_descending(&self.epsilons) {
            return fail("epsilons must be strictly positive and descending");
        }
        if !positive_descending(&self.thetas) || self.thetas[0] > FRAC_PI_2 {
            return fail("thetas must be strictly positive, descending and at most pi/2");
        }
        if self.bump_width <= 0.0 {
            return fail("bump_width must be positive");
        }
        if self.contour_nodes < 16 {
            return fail("contour_nodes must be at least 16");
        }
        if self.fourier_points == 0 || self.fourier_omega <= 0.0 {
            return fail("fourier_points and fourier_omega must be positive");
        }
        if self.lap_slack < 0.0 {
            return fail("lap_slack must be nonnegative");
        }
        let t = &self.tolerances;
        if [t.identity, t.residual, t.projection, t.contour, t.fourier, t.slope].iter().any(|x| *x <= 0.0) {
            return fail("tolerances must be positive");
        }
        if self.overrides.n == Some(0) {
            return fail("n must be positive");
        }
        self.model_spec()?.build().map_err(|e| ConfigError::Validation(e.to_string()))?;
        Ok(())
    }
}

fn positive_descending(xs: &[f64]) -> bool {
    !xs.is_empty() && xs.iter().all(|x| *x > 0.0) && xs.windows(2).all(|w| w[0] > w[1])
}

fn scalar(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| ConfigError::Parse { line, message: format!("`{key}`: `{value}` is not a number") })?;
    if !x.is_finite() {
        return Err(ConfigError::Parse { line, message: format!("`{key}` must be finite") });
    }
    Ok(x)
}

fn list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|p| scalar(line, key, p.trim())).collect()
}

fn integer<I: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<I, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::Parse { line, message: format!("`{key}`: `{value}` is not a nonnegative integer") })
}

fn field(line: usize, key: &str, value: &str) -> Result<FieldValue, ConfigError> {
    let v = list(line, key, value)?;
    Ok(if v.len() == 1 { FieldValue::Uniform(v[0]) } else { FieldValue::Nodes(v) })
}

/// Parses and validates a configuration; missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("`{key}` has no value") });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Parse { line, message: format!("`{key}` given twice") });
        }
        let o = &mut cfg.overrides;
        let t = &mut cfg.tolerances;
        match key {
            "model" => cfg.model = value.to_string(),
            "n" => o.n = Some(integer(line, key, value)?),
            "dx" => o.dx = Some(scalar(line, key, value)?),
            "boundary" => {
                o.boundary =
                    Some(value.parse().map_err(|_| ConfigError::Parse { line, message: format!("unknown boundary `{value}`") })?)
            }
            "beta" => o.beta = Some(field(line, key, value)?),
            "g_sigma" => o.g_sigma = Some(field(line, key, value)?),
            "a" => o.a = Some(field(line, key, value)?),
            "y" | "Y" => o.y = Some(field(line, key, value)?),
            "v" | "V" => o.v = Some(field(line, key, value)?),
            "T" => cfg.horizon = scalar(line, key, value)?,
            "s" => cfg.s = scalar(line, key, value)?,
            "nodes_per_unit" => cfg.nodes_per_unit = integer(line, key, value)?,
            "epsilons" => cfg.epsilons = list(line, key, value)?,
            "lap_times" => cfg.lap_times = list(line, key, value)?,
            "lap_method" => {
                cfg.lap_method = match value {
                    "contour" => ProjectionMethod::Contour,
                    "eigen" => ProjectionMethod::EigenOracle,
                    _ => return Err(ConfigError::Parse { line, message: format!("unknown lap_method `{value}`") }),
                }
            }
            "lap_slack" => cfg.lap_slack = scalar(line, key, value)?,
            "contour_nodes" => cfg.contour_nodes = integer(line, key, value)?,
            "thetas" => cfg.thetas = list(line, key, value)?,
            "wick_times" => cfg.wick_times = list(line, key, value)?,
            "kernel_times" => cfg.kernel_times = list(line, key, value)?,
            "identity_times" => cfg.identity_times = list(line, key, value)?,
            "z_imag" => cfg.z_imag = list(line, key, value)?,
            "fourier_z_imag" => cfg.fourier_z_imag = list(line, key, value)?,
            "fourier_omega" => cfg.fourier_omega = scalar(line, key, value)?,
            "fourier_points" => cfg.fourier_points = integer(line, key, value)?,
            "bump_center" => cfg.bump_center = scalar(line, key, value)?,
            "bump_width" => cfg.bump_width = scalar(line, key, value)?,
            "seed" => cfg.seed = integer(line, key, value)?,
            "tol_identity" => t.identity = scalar(line, key, value)?,
            "tol_residual" => t.residual = scalar(line, key, value)?,
            "tol_projection" => t.projection = scalar(line, key, value)?,
            "tol_contour" => t.contour = scalar(line, key, value)?,
            "tol_fourier" => t.fourier = scalar(line, key, value)?,
            "tol_slope" => t.slope = scalar(line, key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::Parse { line, message: format!("unknown key `{key}`") }),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = parse_config("model = M1\nT = 10\ns = 1.0").unwrap();
        assert_eq!(c.model, "M1");
        assert_eq!(c.epsilons, DEFAULT_EPSILONS.to_vec());
        assert_eq!(c.nodes_per_unit, 16);
    }

    #[test]
    fn weight_exponent_must_exceed_half() {
        assert!(matches!(parse_config("s = 0.4"), Err(ConfigError::Validation(m)) if m.contains("1/2")));
        assert!(matches!(parse_config("s = 0.5"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("T = 0"), Err(ConfigError::Validation(_))));
    }

    #[test]
    fn sweeps_parse_and_validate() {
        let c = parse_config("epsilons = 1e-1,1e-2,1e-3").unwrap();
        assert_eq!(c.epsilons, vec![1e-1, 1e-2, 1e-3]);
        assert!(matches!(parse_config("epsilons = 1e-2, 1e-1"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("thetas = 0.1, 0"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("thetas = 2, 1"), Err(ConfigError::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_config("# header\nmodel = M1\nbogus = 3"),
            Err(ConfigError::Parse { line: 3, message: "unknown key `bogus`".into() })
        );
        assert!(matches!(parse_config("\nT = ten"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(parse_config("T"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("T = 1\nT = 2"), Err(ConfigError::Parse { line: 2, .. })));
    }

    #[test]
    fn overrides_broadcast_and_resize() {
        let c = parse_config("model = M1\nY = 0   # massless").unwrap();
        assert_eq!(c.model_spec().unwrap().y, vec![0.0; 8]);
        let c = parse_config("model = M2\nn = 4\ndx = 2\nboundary = dirichlet").unwrap();
        let spec = c.model_spec().unwrap();
        assert_eq!((spec.n, spec.v.clone()), (4, vec![0.2; 4]));
        assert_eq!(spec.boundary, Boundary::Dirichlet);
        let c = parse_config("model = M1\nv = 0.1, 0.2, 0.1, 0, 0, 0, 0, 0").unwrap();
        assert_eq!(c.model_spec().unwrap().v[1], 0.2);
        assert!(matches!(parse_config("v = 0.1, 0.2"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("model = M9"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("beta = -1"), Err(ConfigError::Validation(_))));
    }
}
