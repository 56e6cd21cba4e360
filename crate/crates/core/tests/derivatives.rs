//! Analytic derivatives of every corpus problem and of the phase-2 merit
//! function against central differences.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trust_funnel::phase2::{phi_gradient, phi_value};
use trust_funnel::problems::corpus::{all_mandatory, diagnostic_names};
use trust_funnel::problems::{check_problem, corpus_lookup, evaluate, DerivCheckReport};

fn failures(reports: &[DerivCheckReport]) -> Vec<String> {
    reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.pass)
        .map(|(i, r)| format!("{} point {i}: worst relative error {:e}", r.problem, r.worst()))
        .collect()
}

#[test]
fn corpus_derivatives_agree_at_start_and_perturbed_points() {
    let mut bad = Vec::new();
    for p in all_mandatory() {
        let reports = check_problem(&p, 5).unwrap();
        assert_eq!(reports.len(), 6);
        bad.extend(failures(&reports));
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn diagnostic_problem_derivatives_agree() {
    for name in diagnostic_names() {
        let p = corpus_lookup(name).unwrap();
        let bad = failures(&check_problem(&p, 5).unwrap());
        assert!(bad.is_empty(), "{}", bad.join("\n"));
    }
}

#[test]
fn merit_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in all_mandatory() {
        let t = evaluate(&p, &p.x0).unwrap().f - 1.0;
        for _ in 0..10 {
            let x = DVector::from_fn(p.n_vars, |i, _| p.x0[i] + rng.gen_range(-0.5..0.5) * p.x0[i].abs().max(1.0));
            let e = evaluate(&p, &x).unwrap();
            let grad = phi_gradient(&e, t);
            let fd = DVector::from_fn(p.n_vars, |i, _| {
                let h = 1e-6 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fp = phi_value(&evaluate(&p, &xp).unwrap(), t);
                let fm = phi_value(&evaluate(&p, &xm).unwrap(), t);
                (fp - fm) / (2.0 * h)
            });
            let err = (&grad - &fd).amax() / grad.amax().max(1.0);
            assert!(err <= 1e-5, "{} at {x:?}: relative error {err:e}", p.name);
        }
    }
}
