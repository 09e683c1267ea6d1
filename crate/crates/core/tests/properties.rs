//! Randomized invariants over small inhomogeneous models.

use approx::assert_relative_eq;
use proptest::prelude::*;
use staticprop_core::block_system::{assemble_blocks, charge_positivity, spectral_split};
use staticprop_core::model::{assemble_l, free_ring_symbol, Boundary, ModelSpec};
use staticprop_core::numerics::relative_diff;
use staticprop_core::propagators::identity_suite;
use staticprop_core::C64;

fn field(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

prop_compose! {
    fn model_spec()(n in 3usize..8, periodic in any::<bool>())
        (beta in field(n, 0.5, 2.0), g in field(n, 0.5, 2.0), a in field(n, -1.0, 1.0),
         y in field(n, 0.5, 2.0), v in field(n, -0.3, 0.3), dx in 0.3f64..1.5,
         n in Just(n), periodic in Just(periodic)) -> ModelSpec<f64> {
        ModelSpec {
            n,
            dx,
            boundary: if periodic { Boundary::Periodic } else { Boundary::Dirichlet },
            beta,
            g_sigma: g,
            a,
            y,
            v,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn block_structure_holds(spec in model_spec()) {
        let m = spec.build().unwrap();
        let l = assemble_l(&m).unwrap();
        prop_assert!(l.hermitian_residual() < 1e-12);
        prop_assert!(l.eigenvalues().unwrap()[0] > 0.0);
        let bs = assemble_blocks(&l, &m).unwrap();
        prop_assert_eq!(bs.block_identity_residual(), 0.0);
        prop_assert!(bs.hb_residual() < 1e-12);
        let split = spectral_split(&bs).unwrap();
        prop_assert_eq!(split.rank_plus(), bs.n());
        prop_assert!(split.invariant_residual(&bs).max() < 1e-9);
        prop_assert!(charge_positivity(&bs, &split).unwrap().ok(1e-9));
    }

    #[test]
    fn identity_web_at_random_times(spec in model_spec(), t in prop::collection::vec(-8.0f64..8.0, 4)) {
        let m = spec.build().unwrap();
        let bs = assemble_blocks(&assemble_l(&m).unwrap(), &m).unwrap();
        let split = spectral_split(&bs).unwrap();
        prop_assert!(identity_suite(&bs, &split, &t).max_residual() < 1e-9);
    }

    #[test]
    fn factorized_resolvent_matches_dense(spec in model_spec(), re in -2.0f64..2.0, im in 0.05f64..1.0, up in any::<bool>()) {
        let m = spec.build().unwrap();
        let bs = assemble_blocks(&assemble_l(&m).unwrap(), &m).unwrap();
        let z = C64::new(re, if up { im } else { -im });
        let a = bs.factorized_resolvent(z).unwrap();
        let b = bs.dense_resolvent(z).unwrap();
        prop_assert!(relative_diff(&a, &b) < 1e-9);
    }

    #[test]
    fn constant_gauge_shifts_the_symbol(n in 3usize..12, dx in 0.3f64..1.5, a in -1.0f64..1.0, y in 0.1f64..2.0) {
        let mut spec = ModelSpec::free_ring(n, dx);
        spec.a = vec![a; n];
        spec.y = vec![y; n];
        let got = assemble_l(&spec.build().unwrap()).unwrap().eigenvalues().unwrap();
        let mut want = free_ring_symbol(n, dx, y, a);
        want.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(*g, *w, epsilon = 1e-10, max_relative = 1e-10);
        }
    }
}

#[test]
fn single_precision_pipeline() {
    let m = ModelSpec::<f32>::preset("M1").unwrap().build().unwrap();
    let l = assemble_l(&m).unwrap();
    let bs = assemble_blocks(&l, &m).unwrap();
    let split = spectral_split(&bs).unwrap();
    assert_eq!(split.rank_plus(), bs.n());
    assert!(identity_suite(&bs, &split, &[-1.0f32, 0.5, 2.0]).max_residual() < 1e-3);
}
