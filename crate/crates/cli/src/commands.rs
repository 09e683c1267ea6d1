//! Experiment commands. Each one fills a [`Report`] and writes its CSV files.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use staticprop_core::absorption::{
    contour_projections, default_grading, eigen_projections, feynman_kernel_z, fourier_oracle, lap_sweep,
    projection_diagnostics, random_vectors, resolvent_residual, ContourOptions, FourierOptions, LapOptions,
    ShiftedGenerator,
};
use staticprop_core::block_system::{assemble_blocks, spectral_split};
use staticprop_core::model::{assemble_l, check_assumptions};
use staticprop_core::numerics::fro;
use staticprop_core::propagators::{
    identity_suite, inverse_residual, scalar_inverse_residual, scalar_reduce, Profile, PropagatorKernel,
    PropagatorKind, TestFunction, TimeGrid,
};
use staticprop_core::wick::{anti_group_norm, contraction_check, riemannian_decay_defect, rotated_generator, wick_sweep};
use staticprop_core::{BlockSystem64, Error, SpatialModel64, SpatialOperator64, SpectralSplit64, Vector64, C64};
use thiserror::Error as ThisError;

use crate::config::{ConfigError, RunConfig};
use crate::format::{float, Cell, Csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Spectrum,
    Kernels,
    Identities,
    Lap,
    Wick,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Spectrum => "spectrum",
            Command::Kernels => "kernels",
            Command::Identities => "identities",
            Command::Lap => "lap",
            Command::Wick => "wick",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Core(Error),
    #[error("STATICPROP_THREADS must be a positive integer, got `{0}`")]
    Threads(String),
}

/// Core failures that mean a checked property does not hold, as opposed to
/// unusable input.
fn is_assertion(e: &Error) -> bool {
    matches!(
        e,
        Error::NotPositive { .. }
            | Error::KernelDetected { .. }
            | Error::NotHermitianInWeight { .. }
            | Error::GapViolated { .. }
            | Error::ContractionViolated { .. }
            | Error::BoundViolated { .. }
    )
}

/// Ordered PASS/FAIL lines plus free-form information.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub failures: usize,
}

impl Report {
    fn new(title: &str) -> Self {
        Self { title: title.into(), ..Self::default() }
    }

    fn info(&mut self, line: String) {
        self.lines.push(format!("  {line}"));
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.failures += usize::from(!ok);
        self.lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    }

    /// Records an assertion-type error as a failure and yields `None`.
    fn guard<T>(&mut self, name: &str, r: Result<T, Error>) -> Result<Option<T>, CliError> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_assertion(&e) => {
                self.check(name, false, e.to_string());
                Ok(None)
            }
            Err(e) => Err(CliError::Core(e)),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.title)?;
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        writeln!(f, "{}", if self.passed() { "result: pass" } else { "result: fail" })
    }
}

struct Spatial {
    model: SpatialModel64,
    l: SpatialOperator64,
}

struct System {
    bs: BlockSystem64,
    split: SpectralSplit64,
}

fn spatial(cfg: &RunConfig) -> Result<Spatial, CliError> {
    let model = cfg.model_spec()?.build().map_err(CliError::Core)?;
    let l = assemble_l(&model).map_err(CliError::Core)?;
    Ok(Spatial { model, l })
}

fn system(cfg: &RunConfig, rep: &mut Report) -> Result<Option<System>, CliError> {
    let sp = spatial(cfg)?;
    let Some(bs) = rep.guard("block system", assemble_blocks(&sp.l, &sp.model))? else { return Ok(None) };
    let Some(split) = rep.guard("frequency split", spectral_split(&bs))? else { return Ok(None) };
    Ok(Some(System { bs, split }))
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn csv(&mut self, name: &str, csv: &Csv, rep: &mut Report) -> Result<(), CliError> {
        let path = self.dir.join(name);
        csv.write(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        rep.info(format!("wrote {name}"));
        self.files.push(path);
        Ok(())
    }
}

fn bump(cfg: &RunConfig, dim: usize, seed: u64) -> TestFunction<f64> {
    let spatial = random_vectors::<f64>(seed, dim, 1).remove(0);
    TestFunction::new(spatial, Profile::bump(cfg.bump_center, cfg.bump_width))
}

fn grid(cfg: &RunConfig) -> Result<TimeGrid<f64>, CliError> {
    TimeGrid::new(cfg.horizon, cfg.nodes_per_unit, cfg.s).map_err(CliError::Core)
}

fn probe_vector(cfg: &RunConfig, bs: &BlockSystem64) -> Vector64 {
    random_vectors::<f64>(cfg.seed, 2 * bs.n(), 1).remove(0)
}

fn within_slope(slopes: &[(f64, f64)], tol: f64) -> (bool, String) {
    let ok = slopes.iter().all(|(_, s)| (s - 1.0).abs() <= tol);
    let detail = slopes.iter().map(|(t, s)| format!("t={}: {:.4}", float(*t), s)).collect::<Vec<_>>().join(", ");
    (ok, detail)
}

fn check(cfg: &RunConfig, _out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("check");
    let sp = spatial(cfg)?;
    let a = check_assumptions(&sp.model, &sp.l).map_err(CliError::Core)?;
    rep.info(format!("model = {}, n = {}", cfg.model, sp.model.n()));
    rep.info(format!("C = {}", float(a.h_positive.value)));
    for (name, w) in a.rows() {
        rep.check(name, w.ok, float(w.value));
    }
    Ok(rep)
}

fn spectrum(cfg: &RunConfig, out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("spectrum");
    let sp = spatial(cfg)?;
    let mut csv = Csv::new(&["operator", "index", "value"]);
    let ev_l = sp.l.eigenvalues().map_err(CliError::Core)?;
    for (i, v) in ev_l.iter().enumerate() {
        csv.row(&[Cell::S("L"), Cell::U(i), Cell::F(*v)]);
    }
    rep.info(format!("spec L = [{}]", ev_l.iter().map(|v| float(*v)).collect::<Vec<_>>().join(", ")));
    let Some(sys) = system(cfg, &mut rep)? else { return Ok(rep) };
    let ev_b = sys.split.eigenvalues();
    for (i, v) in ev_b.iter().enumerate() {
        csv.row(&[Cell::S("B"), Cell::U(i), Cell::F(*v)]);
    }
    rep.info(format!("spec B = [{}]", ev_b.iter().map(|v| float(*v)).collect::<Vec<_>>().join(", ")));
    let n = sys.bs.n();
    let plus = sys.split.rank_plus();
    rep.check("frequency ranks", plus == n && ev_b.len() - plus == n, format!("rank P+ = {plus}, rank P- = {}", ev_b.len() - plus));
    let inv = sys.split.invariant_residual(&sys.bs).max();
    rep.check("projection algebra", inv <= cfg.tolerances.projection, float(inv));
    out.csv("spectrum.csv", &csv, &mut rep)?;
    Ok(rep)
}

fn kernels(cfg: &RunConfig, out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("kernels");
    let Some(sys) = system(cfg, &mut rep)? else { return Ok(rep) };
    for kind in PropagatorKind::ALL {
        let g = scalar_reduce(&PropagatorKernel::new(kind, &sys.bs, &sys.split), &sys.bs);
        let mut csv = Csv::new(&["t", "row", "col", "re", "im"]);
        for &t in &cfg.kernel_times {
            let m = g.eval(t);
            for row in 0..m.nrows() {
                for col in 0..m.ncols() {
                    let v = m[(row, col)];
                    csv.row(&[Cell::F(t), Cell::U(row), Cell::U(col), Cell::F(v.re), Cell::F(v.im)]);
                }
            }
        }
        out.csv(&format!("kernels_{}.csv", kind.tag()), &csv, &mut rep)?;
    }
    Ok(rep)
}

fn identities(cfg: &RunConfig, _out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("identities");
    let Some(sys) = system(cfg, &mut rep)? else { return Ok(rep) };
    let tol = &cfg.tolerances;
    let web = identity_suite(&sys.bs, &sys.split, &cfg.identity_times);
    for (name, r) in &web.relations {
        rep.check(name, *r <= tol.identity, float(*r));
    }
    rep.info(format!("max identity residual = {}", float(web.max_residual())));
    let grid = grid(cfg)?;
    let n = sys.bs.n();
    let f_first = bump(cfg, 2 * n, cfg.seed);
    let f_scalar = bump(cfg, n, cfg.seed + 1);
    for kind in PropagatorKind::ALL {
        let kernel = PropagatorKernel::new(kind, &sys.bs, &sys.split);
        let r = inverse_residual(&kernel, &f_first, &grid, sys.bs.energy()).map_err(CliError::Core)?;
        rep.check(&format!("{} first-order contract", kind.tag()), r <= tol.residual, float(r));
        let g = scalar_reduce(&kernel, &sys.bs);
        let r = scalar_inverse_residual(&g, &sys.bs, &f_scalar, &grid).map_err(CliError::Core)?;
        rep.check(&format!("{} scalar contract", kind.tag()), r <= tol.residual, float(r));
    }
    Ok(rep)
}

fn lap(cfg: &RunConfig, out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("lap");
    let Some(sys) = system(cfg, &mut rep)? else { return Ok(rep) };
    let bs = &sys.bs;
    let tol = &cfg.tolerances;
    let contour = ContourOptions { tau: None, n_quad: cfg.contour_nodes };
    let opts = LapOptions {
        epsilons: cfg.epsilons.clone(),
        times: cfg.lap_times.clone(),
        method: cfg.lap_method,
        contour,
        slack: cfg.lap_slack,
    };
    if let Some(table) = rep.guard("limiting absorption bound", lap_sweep(bs, &probe_vector(cfg, bs), &opts))? {
        let mut csv = Csv::new(&["epsilon", "t", "error", "bound", "ratio"]);
        for r in &table.rows {
            csv.row(&[Cell::F(r.epsilon), Cell::F(r.t), Cell::F(r.error), Cell::F(r.bound), Cell::F(r.ratio)]);
        }
        out.csv("lap.csv", &csv, &mut rep)?;
        rep.check("limiting absorption bound", true, format!("max ratio {}", float(table.max_ratio())));
        let (ok, detail) = within_slope(&table.slopes, tol.slope);
        rep.check("epsilon slope", ok, detail);
    }

    let mut csv = Csv::new(&["z", "method", "idempotency", "completeness", "commutator"]);
    for &im in &cfg.z_imag {
        let z = C64::new(0.0, im);
        let label = format!("{}{}{}i", float(0.0), if im < 0.0 { "-" } else { "+" }, float(im.abs()));
        let sg = ShiftedGenerator::new(bs, z).map_err(CliError::Core)?;
        let Some(oracle) = rep.guard(&format!("eigen projections at z = {label}"), eigen_projections(&sg))? else { continue };
        let Some(quad) =
            rep.guard(&format!("contour projections at z = {label}"), contour_projections(&sg, default_grading(bs), contour))?
        else {
            continue;
        };
        for split in [&quad, &oracle] {
            let d = projection_diagnostics(&sg, split);
            csv.row(&[
                Cell::S(&label),
                Cell::S(split.method.tag()),
                Cell::F(d.idempotency),
                Cell::F(d.completeness),
                Cell::F(d.commutator),
            ]);
            let worst = d.idempotency.max(d.completeness).max(d.commutator);
            rep.check(&format!("{} projections at z = {label}", split.method.tag()), worst <= tol.projection, float(worst));
        }
        let diff = fro(&(&quad.plus - &oracle.plus));
        rep.check(&format!("contour vs eigen at z = {label}"), diff <= tol.contour, float(diff));
    }
    out.csv("projections.csv", &csv, &mut rep)?;

    let grid = grid(cfg)?;
    let f = bump(cfg, bs.n(), cfg.seed + 1);
    let fourier = FourierOptions { omega_max: cfg.fourier_omega, n_omega: cfg.fourier_points };
    for &im in &cfg.fourier_z_imag {
        let z = C64::new(0.0, im);
        let sg = ShiftedGenerator::new(bs, z).map_err(CliError::Core)?;
        let Some(oracle) = rep.guard(&format!("eigen projections at z = {}i", float(im)), eigen_projections(&sg))? else {
            continue;
        };
        let kernel = feynman_kernel_z(&sg, &oracle);
        let rec = fourier_oracle(&sg, &cfg.lap_times, fourier).map_err(CliError::Core)?;
        let worst = rec.iter().zip(&cfg.lap_times).fold(0.0f64, |m, (a, &t)| m.max(fro(&(a - kernel.eval(t)))));
        rep.check(&format!("Fourier oracle at z = {}i", float(im)), worst <= tol.fourier, float(worst));
        let r = resolvent_residual(bs, &kernel, z, &f, &grid).map_err(CliError::Core)?;
        rep.check(&format!("resolvent residual at z = {}i", float(im)), r <= tol.residual, float(r));
    }
    Ok(rep)
}

fn wick(cfg: &RunConfig, out: &mut Output) -> Result<Report, CliError> {
    let mut rep = Report::new("wick");
    let Some(sys) = system(cfg, &mut rep)? else { return Ok(rep) };
    let (bs, split) = (&sys.bs, &sys.split);
    let table = wick_sweep(bs, split, &cfg.thetas, &cfg.wick_times, &probe_vector(cfg, bs)).map_err(CliError::Core)?;
    let mut csv = Csv::new(&["theta", "t", "error", "fittedK", "slope"]);
    for r in &table.rows {
        let slope = table.slope_at(r.t).unwrap_or(f64::NAN);
        csv.row(&[Cell::F(r.theta), Cell::F(r.t), Cell::F(r.error), Cell::F(table.fitted_k), Cell::F(slope)]);
    }
    out.csv("wick.csv", &csv, &mut rep)?;
    rep.info(format!("fitted K = {}", float(table.fitted_k)));
    let (ok, detail) = within_slope(&table.slopes, cfg.tolerances.slope);
    rep.check("theta slope", ok, detail);

    let mut times = cfg.wick_times.clone();
    times.push(0.0);
    for theta in [0.0, 0.1, PI / 4.0, PI / 2.0, PI] {
        let rg = rotated_generator(bs, split, theta).map_err(CliError::Core)?;
        let name = format!("contraction at theta = {}", float(theta));
        if let Some(c) = rep.guard(&name, contraction_check(bs, &rg, split, &times))? {
            rep.check(&name, true, format!("max norm {}", float(c.max_norm())));
        }
    }
    let decay = riemannian_decay_defect(bs, split, &cfg.wick_times).map_err(CliError::Core)?;
    rep.check("Riemannian decay", decay <= cfg.tolerances.projection, float(decay));
    let rg = rotated_generator(bs, split, PI / 4.0).map_err(CliError::Core)?;
    let growth = anti_group_norm(bs, &rg, split, -1.0);
    rep.check("growth on the wrong half-line", growth > 1.0, float(growth));
    Ok(rep)
}

/// Reports of a finished command and the files written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(Report::passed)
    }
}

type Step = fn(&RunConfig, &mut Output) -> Result<Report, CliError>;

/// Runs `command`, writing CSV files and `<command>.txt` into `dir`.
pub fn run(command: Command, cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut out = Output { dir, files: Vec::new() };
    let steps: &[Step] = match command {
        Command::Check => &[check],
        Command::Spectrum => &[spectrum],
        Command::Kernels => &[kernels],
        Command::Identities => &[identities],
        Command::Lap => &[lap],
        Command::Wick => &[wick],
        Command::Report => &[check, spectrum, kernels, identities, lap, wick],
    };
    let mut reports = Vec::new();
    for step in steps {
        reports.push(step(cfg, &mut out)?);
    }
    let text: String = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    let name = if command == Command::Report { "summary.txt".to_string() } else { format!("{}.txt", command.name()) };
    let path = dir.join(name);
    std::fs::write(&path, &text).map_err(|source| CliError::Io { path: path.clone(), source })?;
    out.files.push(path);
    Ok(Outcome { reports, files: out.files })
}
