//! Property tests for the kernels and the artifact round trips.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use trust_funnel::driver::trace::{read_trace, trace_to_string};
use trust_funnel::driver::{build_trace, emit_config, parse_config, RunConfig, TraceFormat};
use trust_funnel::phase1::{update_vmax_f, update_vmax_v, IterKind, IterationRecord, Mode, SolverParams};
use trust_funnel::phase2::{initial_target, residual_norm, update_target};
use trust_funnel::problems::EvalPoint;
use trust_funnel::subproblems::{null_space_basis, quadratic_value, solve_trs};

fn sym_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        (&a + a.transpose()) * 0.5
    })
}

fn trs_case() -> impl Strategy<Value = (DVector<f64>, DMatrix<f64>, f64)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0f64..2.0, n).prop_map(DVector::from_vec),
            sym_matrix(n),
            1e-3f64..10.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn trs_step_is_feasible_and_decreases((g, h, delta) in trs_case()) {
        let sol = solve_trs(&g, &h, delta).unwrap();
        prop_assert!(sol.step.norm() <= delta * (1.0 + 1e-10));
        prop_assert!(sol.multiplier >= 0.0);
        let q = quadratic_value(&g, &h, &sol.step);
        prop_assert!(q <= 1e-14);
        // No worse than the Cauchy point along −g.
        let gn = g.norm();
        if gn > 0.0 {
            let dir = -&g / gn;
            let curv = dir.dot(&(&h * &dir));
            let tau = if curv > 0.0 { (gn / curv).min(delta) } else { delta };
            let cauchy = quadratic_value(&g, &h, &(dir * tau));
            prop_assert!(q <= cauchy + 1e-10 * (1.0 + cauchy.abs()));
        }
    }

    #[test]
    fn null_space_basis_is_orthonormal_and_annihilated(
        (m, n, v) in (1usize..=3, 2usize..=6).prop_flat_map(|(m, n)| {
            (Just(m), Just(n), prop::collection::vec(-2.0f64..2.0, m * n))
        })
    ) {
        let jac = DMatrix::from_vec(m, n, v);
        let basis = null_space_basis(&jac);
        let z = &basis.z;
        prop_assert!((&jac * z).amax() <= 1e-10);
        let gram = z.tr_mul(z);
        prop_assert!((gram - DMatrix::identity(z.ncols(), z.ncols())).amax() <= 1e-12);
        prop_assert!(z.ncols() + m >= n);
    }

    #[test]
    fn funnel_updates_never_increase(vmax in 1e-8f64..1e3, frac in 0.0f64..1.0, s in 0.0f64..10.0) {
        let p = SolverParams::default();
        let v_next = vmax * frac;
        let f = update_vmax_f(vmax, v_next, s, &p);
        prop_assert!(f <= vmax && f >= v_next);
        let v_k = v_next + (vmax - v_next) * 0.5;
        let v = update_vmax_v(vmax, v_k, v_next, &p);
        prop_assert!(v <= vmax && v >= v_next && v > 0.0);
    }

    #[test]
    fn target_update_restores_residual_radius(
        eps in 1e-6f64..1.0,
        shrink in 0.0f64..1.0,
        f_next in -10.0f64..10.0,
        split in 0.0f64..1.0,
    ) {
        let r_next = eps * shrink;
        let c_next = r_next * split;
        let t = f_next - (r_next * r_next - c_next * c_next).sqrt();
        let t_new = update_target(eps, r_next, f_next, t).unwrap();
        prop_assert!(t_new <= t);
        let e = EvalPoint {
            x: DVector::zeros(1),
            f: f_next,
            g: DVector::zeros(1),
            c: DVector::from_row_slice(&[c_next]),
            jac: DMatrix::zeros(1, 1),
        };
        prop_assert!((residual_norm(&e, t_new) - eps).abs() <= 1e-12 * (1.0 + f_next.abs()));
        let t0 = initial_target(f_next, c_next, eps).unwrap();
        prop_assert!((residual_norm(&e, t0) - eps).abs() <= 1e-12 * (1.0 + f_next.abs()));
    }

    #[test]
    fn config_round_trip(
        kappa_n in 1e-6f64..0.999,
        sigma_min in 1e-20f64..1e-2,
        gamma_e in 1.0001f64..10.0,
        max_iter in 1usize..100_000,
        eps_feas in 1e-12f64..1.0,
        vonly in any::<bool>(),
    ) {
        let cfg = RunConfig {
            params: SolverParams { kappa_n, sigma_min, gamma_e, max_iter, ..SolverParams::default() },
            eps_feas,
            mode: if vonly { Mode::VOnly } else { Mode::Full },
            ..RunConfig::default()
        };
        prop_assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn trace_csv_round_trip(values in prop::collection::vec(prop::num::f64::ANY, 5)) {
        let rec = IterationRecord {
            k: 3, kind: IterKind::FContract, f: values[0], v: values[1], c_norm: values[2],
            gv_norm: values[3], n_norm: values[4], t_norm: 0.0, s_norm: 1.0, lambda_v: 0.0,
            lambda_f: 0.0, delta_v: 1.0, delta_f: 1.0, delta_vmax: 1e8, vmax: 1.0, sigma_v: 1e-12,
            rho_f: f64::NEG_INFINITY, rho_v: f64::INFINITY, v_trial: 0.0, vmax_next: 1.0,
            delta_v_next: 1.0, delta_f_next: 0.5, delta_vmax_next: 1e8, mv_n: 0.0, mv_s: 0.0,
            hv_norm: 0.0, hv_t_norm: 0.0, nt_dot: 0.0,
        };
        let rows = build_trace(&[rec.clone()], &[]);
        let text = trace_to_string(&rows, TraceFormat::Csv).unwrap();
        let back = read_trace(text.as_bytes(), TraceFormat::Csv).unwrap()[0].to_phase1().unwrap();
        for (a, b) in [(back.f, rec.f), (back.v, rec.v), (back.c_norm, rec.c_norm), (back.gv_norm, rec.gv_norm), (back.n_norm, rec.n_norm)] {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}
