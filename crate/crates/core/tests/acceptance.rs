//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staticprop_core::absorption::{
    contour_projections, default_grading, eigen_projections, feynman_kernel_z, fourier_oracle, gap_holds, lap_sweep,
    projection_diagnostics, random_vectors, resolvent_residual, spectral_gap, ContourOptions, FourierOptions,
    LapOptions, ShiftedGenerator,
};
use staticprop_core::block_system::{assemble_blocks, charge_positivity, spectral_split, BlockSystem, SpectralSplit};
use staticprop_core::model::{assemble_l, ModelSpec, SpatialModel, SpatialOperator};
use staticprop_core::numerics::{fro, general_eig, loglog_slope, relative_diff, spectral_norm};
use staticprop_core::propagators::{
    calibrate_sign, frequency_positivity, identity_suite, inverse_residual, scalar_inverse_residual, scalar_reduce,
    Profile, PropagatorKernel, PropagatorKind, TestFunction, TimeGrid, SIGMA,
};
use staticprop_core::wick::{
    anti_group_norm, contraction_check, riemannian_decay_defect, rotated_generator, wick_sweep, DEFAULT_THETAS,
    DEFAULT_WICK_TIMES,
};
use staticprop_core::{C64, Error};

const PRESETS: [&str; 3] = ["M0", "M1", "M2"];

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

struct Setup {
    model: SpatialModel<f64>,
    l: SpatialOperator<f64>,
    bs: BlockSystem<f64>,
    split: SpectralSplit<f64>,
}

fn setup(name: &str) -> Result<Setup, Error> {
    let model = SpatialModel::preset(name)?;
    let l = assemble_l(&model)?;
    let bs = assemble_blocks(&l, &model)?;
    let split = spectral_split(&bs)?;
    Ok(Setup { model, l, bs, split })
}

fn err(e: Error) -> String {
    e.to_string()
}

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_bump(rng: &mut ChaCha8Rng, dim: usize) -> TestFunction<f64> {
    let spatial = DVector::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    TestFunction::new(spatial, Profile::bump(rng.gen_range(-3.0..3.0), rng.gen_range(0.5..2.0)))
}

fn structure() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let herm_l = s.l.hermitian_residual();
        let qb = s.bs.block_identity_residual();
        let hb = s.bs.hb_residual();
        let eig = general_eig(s.bs.b()).map_err(err)?;
        let max_im = eig.values.iter().fold(0.0f64, |m, l| m.max(l.im.abs())) / spectral_norm(s.bs.b());
        check(herm_l <= 1e-10, format!("{name}: L not W-Hermitian ({herm_l:e})"))?;
        check(qb == 0.0, format!("{name}: QB - H = {qb:e}"))?;
        check(hb <= 1e-10, format!("{name}: HB not Hermitian ({hb:e})"))?;
        check(max_im <= 1e-10, format!("{name}: spec B not real ({max_im:e})"))?;
        check(s.split.min_abs_eig > 0.0, format!("{name}: 0 in spec B"))?;
        worst = (worst.0.max(herm_l), worst.1.max(hb), worst.2.max(max_im));
    }
    Ok(format!("L herm {:.1e}, HB herm {:.1e}, max|Im spec B| {:.1e}, QB = H exactly", worst.0, worst.1, worst.2))
}

fn h_pos_equivalence() -> Outcome {
    let mut cases = 0;
    for name in ["M1", "M2"] {
        let s = setup(name).map_err(err)?;
        for cst in [0.1, 0.5, 0.9] {
            let block = s.bs.h_shift_min_eig(cst).map_err(err)? > 0.0;
            let crit = s.l.h_bound_criterion(&s.model, cst).map_err(err)? > 0.0;
            check(block == crit, format!("{name}, C = {cst}: H - C > 0 is {block}, criterion is {crit}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases agree"))
}

fn resolvent_factorization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let mut taken = 0;
        while taken < 20 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
            if s.split.eigen.distance_to_spectrum(z) < 1e-2 {
                continue;
            }
            let a = s.bs.factorized_resolvent(z).map_err(err)?;
            let b = s.bs.dense_resolvent(z).map_err(err)?;
            let d = relative_diff(&a, &b);
            check(d <= 1e-10, format!("{name}, z = {z}: relative difference {d:e}"))?;
            worst = worst.max(d);
            taken += 1;
        }
    }
    Ok(format!("60 samples, max relative difference {worst:.1e}"))
}

fn identity_web() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let times: Vec<f64> = (0..32).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let r = identity_suite(&s.bs, &s.split, &times);
        for (rel, v) in &r.relations {
            check(*v <= 1e-10, format!("{name}: `{rel}` residual {v:e}"))?;
        }
        worst = worst.max(r.max_residual());
    }
    Ok(format!("15 relations x 32 times x 3 presets, max residual {worst:.1e}"))
}

fn inverse_contracts() -> Outcome {
    let grid = TimeGrid::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let n = s.bs.n();
        for kind in PropagatorKind::ALL {
            let kernel = PropagatorKernel::new(kind, &s.bs, &s.split);
            let f = random_bump(&mut rng, 2 * n);
            let r1 = inverse_residual(&kernel, &f, &grid, s.bs.energy()).map_err(err)?;
            check(r1 <= 1e-6, format!("{name} {kind}: first-order residual {r1:e}"))?;
            let g = scalar_reduce(&kernel, &s.bs);
            let f = random_bump(&mut rng, n);
            let r2 = scalar_inverse_residual(&g, &s.bs, &f, &grid).map_err(err)?;
            check(r2 <= 1e-6, format!("{name} {kind}: scalar residual {r2:e}"))?;
            first = first.max(r1);
            second = second.max(r2);
        }
    }
    let cal = calibrate_sign(&grid).map_err(err)?;
    check(cal.sigma == 1 && SIGMA == 1, format!("calibrated sign {}", cal.sigma))?;

    let s = setup("M0").map_err(err)?;
    let ret = scalar_reduce(&PropagatorKernel::new(PropagatorKind::Retarded, &s.bs, &s.split), &s.bs);
    let feyn = scalar_reduce(&PropagatorKernel::new(PropagatorKind::Feynman, &s.bs, &s.split), &s.bs);
    let mut closed = 0.0f64;
    for k in 0..41 {
        let t = -10.0 + 0.5 * k as f64;
        let want_ret = if t >= 0.0 { t.sin() } else { 0.0 };
        let want_f = c(0.0, 0.5) * c(0.0, -t.abs()).exp();
        closed = closed.max((ret.eval(t)[(0, 0)] - c(want_ret, 0.0)).norm());
        closed = closed.max((feyn.eval(t)[(0, 0)] - want_f).norm());
    }
    check(closed <= 1e-8, format!("M0 closed forms off by {closed:e}"))?;
    Ok(format!(
        "max residual first order {first:.1e}, scalar {second:.1e}; sigma = +1 (residuals {:.1e} vs {:.1e}); closed forms {closed:.1e}",
        cal.residual_plus, cal.residual_minus
    ))
}

fn positivity() -> Outcome {
    let grid = TimeGrid::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut min_charge = f64::INFINITY;
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let r = charge_positivity(&s.bs, &s.split).map_err(err)?;
        check(r.ok(1e-10), format!("{name}: charge report {r:?}"))?;
        min_charge = min_charge.min(r.min_eig_plus.min(r.min_eig_minus));
    }
    let mut min_val = f64::INFINITY;
    let mut max_im = 0.0f64;
    for name in ["M1", "M2"] {
        let s = setup(name).map_err(err)?;
        for kind in [PropagatorKind::PositiveFrequency, PropagatorKind::NegativeFrequency] {
            let g = scalar_reduce(&PropagatorKernel::new(kind, &s.bs, &s.split), &s.bs);
            for _ in 0..20 {
                let f = random_bump(&mut rng, s.bs.n());
                let v = frequency_positivity(&g, &s.bs, &f, &grid).map_err(err)?;
                check(v.re >= -1e-8 && v.im.abs() <= 1e-8, format!("{name} {kind}: (f|Gf) = {v}"))?;
                min_val = min_val.min(v.re);
                max_im = max_im.max(v.im.abs());
            }
        }
    }
    Ok(format!("min eig of charge on ranges {min_charge:.1e}; min (f|G f) {min_val:.3e}, max |Im| {max_im:.1e}"))
}

fn gap() -> Outcome {
    let mut report = Vec::new();
    let mut cases = 0;
    for name in ["M1", "M2"] {
        let s = setup(name).map_err(err)?;
        let big_c = s.bs.lower_bound_c();
        let mut constants = vec![big_c / 4.0, big_c / 2.0];
        if name == "M2" {
            constants.push(0.5);
        }
        for small_c in constants {
            let alpha = spectral_gap(big_c, small_c, s.bs.v_norm()).map_err(err)?;
            for im in [0.0, 0.1, -0.1, 1.0, -1.0] {
                let sg = ShiftedGenerator::new(&s.bs, c(0.0, im)).map_err(err)?;
                check(
                    gap_holds(&sg, alpha),
                    format!("{name}, c = {small_c:.3}, z = {im}i: min |Re| {} < alpha {alpha}", sg.min_abs_real_part()),
                )?;
                cases += 1;
            }
            report.push(format!("{name} alpha(c = {small_c:.3}) = {alpha:.4}"));
        }
    }
    Ok(format!("{cases} cases, zero violations; {}", report.join(", ")))
}

fn bisectorial() -> Outcome {
    let (mut diff, mut alg, mut bis) = (0.0f64, 0.0f64, 0.0f64);
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        for im in [0.0, 0.1, -0.1, 1.0, -1.0] {
            let sg = ShiftedGenerator::new(&s.bs, c(0.0, im)).map_err(err)?;
            let oracle = eigen_projections(&sg).map_err(err)?;
            let contour = contour_projections(&sg, default_grading(&s.bs), ContourOptions::default()).map_err(err)?;
            let d = fro(&(&contour.plus - &oracle.plus));
            let dc = projection_diagnostics(&sg, &contour);
            let doracle = projection_diagnostics(&sg, &oracle);
            let a = dc.idempotency.max(dc.completeness).max(dc.commutator);
            check(d <= 1e-6, format!("{name}, z = {im}i: contour vs oracle {d:e}"))?;
            check(a <= 1e-8, format!("{name}, z = {im}i: contour algebra {dc:?}"))?;
            check(doracle.bisection <= 1e-10, format!("{name}, z = {im}i: oracle bisection {:e}", doracle.bisection))?;
            diff = diff.max(d);
            alg = alg.max(a);
            bis = bis.max(doracle.bisection.max(dc.bisection));
        }
    }
    Ok(format!("contour vs oracle {diff:.1e}, algebra {alg:.1e}, bisection {bis:.1e}"))
}

fn lap() -> Outcome {
    let mut summary = Vec::new();
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let u = random_vectors::<f64>(31, 2 * s.bs.n(), 1).remove(0);
        let table = lap_sweep(&s.bs, &u, &LapOptions::default()).map_err(err)?;
        let (lo, hi) = table.slope_range();
        check((lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1, format!("{name}: slopes in [{lo:.3}, {hi:.3}]"))?;
        summary.push(format!("{name} ratio {:.2} slope [{lo:.3}, {hi:.3}]", table.max_ratio()));
    }

    let grid = TimeGrid::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_res = 0.0f64;
    for (name, im) in [("M1", -0.05), ("M0", 0.0), ("M2", 0.05)] {
        let s = setup(name).map_err(err)?;
        let sg = ShiftedGenerator::new(&s.bs, c(0.0, im)).map_err(err)?;
        let kernel = feynman_kernel_z(&sg, &eigen_projections(&sg).map_err(err)?);
        let f = random_bump(&mut rng, s.bs.n());
        let r = resolvent_residual(&s.bs, &kernel, c(0.0, im), &f, &grid).map_err(err)?;
        check(r <= 1e-6, format!("{name}, z = {im}i: resolvent residual {r:e}"))?;
        worst_res = worst_res.max(r);
    }

    let mut worst_fourier = 0.0f64;
    let times = [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0];
    for (name, im) in [("M0", -0.2), ("M0", 0.2), ("M1", -1.0), ("M1", 1.0)] {
        let s = setup(name).map_err(err)?;
        let sg = ShiftedGenerator::new(&s.bs, c(0.0, im)).map_err(err)?;
        let kernel = feynman_kernel_z(&sg, &eigen_projections(&sg).map_err(err)?);
        let rec = fourier_oracle(&sg, &times, FourierOptions::default()).map_err(err)?;
        for (m, &t) in rec.iter().zip(&times) {
            let d = fro(&(m - kernel.eval(t)));
            check(d <= 1e-3, format!("{name}, z = {im}i, t = {t}: Fourier oracle off by {d:e}"))?;
            worst_fourier = worst_fourier.max(d);
        }
    }
    Ok(format!("{}; resolvent residual {worst_res:.1e}; Fourier oracle {worst_fourier:.1e}", summary.join("; ")))
}

fn wick() -> Outcome {
    let mut max_norm = 0.0f64;
    let times = [-5.0, -1.0, -0.1, 0.0, 0.1, 1.0, 5.0];
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        for theta in [0.0, 0.1, PI / 4.0, PI / 2.0, PI] {
            let rg = rotated_generator(&s.bs, &s.split, theta).map_err(err)?;
            let r = contraction_check(&s.bs, &rg, &s.split, &times).map_err(err)?;
            max_norm = max_norm.max(r.max_norm());
        }
    }
    let m1 = setup("M1").map_err(err)?;
    let decay = riemannian_decay_defect(&m1.bs, &m1.split, &[-4.0, -2.0, -1.0, -0.3, 0.3, 1.0, 2.0, 4.0]).map_err(err)?;
    check(decay <= 1e-8, format!("Riemannian decay off by {decay:e}"))?;

    let mut slopes = Vec::new();
    for name in PRESETS {
        let s = setup(name).map_err(err)?;
        let u = random_vectors::<f64>(37, 2 * s.bs.n(), 1).remove(0);
        let table = wick_sweep(&s.bs, &s.split, &DEFAULT_THETAS, &DEFAULT_WICK_TIMES, &u).map_err(err)?;
        let (lo, hi) = table.slope_range();
        check((lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1, format!("{name}: theta slopes in [{lo:.3}, {hi:.3}]"))?;
        slopes.push(format!("{name} [{lo:.3}, {hi:.3}] K {:.3}", table.fitted_k));
    }
    let rg = rotated_generator(&m1.bs, &m1.split, PI / 4.0).map_err(err)?;
    let obstruction = anti_group_norm(&m1.bs, &rg, &m1.split, -1.0);
    check(obstruction > 1.0, format!("no growth on the wrong half-line ({obstruction})"))?;
    Ok(format!(
        "max norm {max_norm:.12}; decay defect {decay:.1e}; slopes {}; anti-group norm {obstruction:.3}",
        slopes.join(", ")
    ))
}

fn refinement() -> Outcome {
    let exact = 1.0 + (2.0 * PI / 8.0).powi(2);
    let mut dxs = Vec::new();
    let mut errs = Vec::new();
    for n in [8usize, 16, 32] {
        let dx = 8.0 / n as f64;
        let model = ModelSpec::free_ring(n, dx).build().map_err(err)?;
        let ev = assemble_l(&model).map_err(err)?.eigenvalues().map_err(err)?;
        dxs.push(dx);
        errs.push((ev[1] - exact).abs());
    }
    let slope = loglog_slope(&dxs, &errs).ok_or("degenerate refinement data")?;
    check((slope - 2.0).abs() <= 0.2, format!("refinement slope {slope:.3}"))?;
    Ok(format!("slope {slope:.3}, errors {:.2e} {:.2e} {:.2e}", errs[0], errs[1], errs[2]))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("structure", structure),
        ("H positivity equivalence", h_pos_equivalence),
        ("factorized resolvent", resolvent_factorization),
        ("identity web", identity_web),
        ("inverse and bisolution contracts", inverse_contracts),
        ("positivity", positivity),
        ("spectral gap", gap),
        ("bisectorial projections", bisectorial),
        ("limiting absorption", lap),
        ("Wick rotation", wick),
        ("discretization refinement", refinement),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
