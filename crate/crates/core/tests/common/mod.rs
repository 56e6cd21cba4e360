//! Shared fixtures for the integration tests: random trust-region
//! subproblems and an eigendecomposition oracle for them.
//!
//! The oracle works in the eigenbasis of `H`, bisects `‖s(λ)‖ = δ` to
//! machine precision and builds hard-case solutions explicitly from the
//! leftmost eigenvector, sharing no code with the solver under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trust_funnel::subproblems::trs::kkt_residual;
use trust_funnel::subproblems::{quadratic_value, solve_trs};

pub const TOL: f64 = 1e-8;

pub struct Instance {
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
    pub delta: f64,
    pub hard: bool,
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.qr().q()
}

/// `H = Q diag(d) Qᵀ`; for hard cases `g ⟂` the leftmost eigenspace and `δ`
/// exceeds `‖s(−λ₁)‖`.
pub fn instance(rng: &mut ChaCha8Rng, hard: bool) -> Instance {
    let n = rng.gen_range(2..=6);
    let q = random_orthogonal(n, rng);
    let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut delta = rng.gen_range(0.05..3.0);
    if hard {
        // Leftmost eigenvalue negative, possibly repeated, with g orthogonal to it.
        let lmin = -rng.gen_range(0.1..2.0);
        let mult = if n > 2 && rng.gen_bool(0.3) { 2 } else { 1 };
        for i in 0..n {
            if i < mult {
                d[i] = lmin;
                coeffs[i] = 0.0;
            } else {
                d[i] = lmin + rng.gen_range(0.2..3.0);
            }
        }
        let s_norm: f64 = (mult..n).map(|i| (coeffs[i] / (d[i] - lmin)).powi(2)).sum::<f64>().sqrt();
        delta = s_norm * rng.gen_range(1.2..3.0) + 1e-3;
    }
    let h = &q * DMatrix::from_diagonal(&DVector::from_vec(d)) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let g = &q * DVector::from_vec(coeffs);
    Instance { g, h, delta, hard }
}

/// Global minimum value of `gᵀs + ½sᵀHs` over `‖s‖ ≤ δ`.
pub fn oracle(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> f64 {
    let eig = h.clone().symmetric_eigen();
    let d = eig.eigenvalues.clone();
    let a = eig.eigenvectors.tr_mul(g);
    let n = d.len();
    let lmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let value = |y: &[f64]| -> f64 { (0..n).map(|i| a[i] * y[i] + 0.5 * d[i] * y[i] * y[i]).sum() };
    let step = |lambda: f64, skip: &dyn Fn(usize) -> bool| -> Vec<f64> {
        (0..n).map(|i| if skip(i) { 0.0 } else { -a[i] / (d[i] + lambda) }).collect()
    };
    let norm = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();

    if lmin > 0.0 {
        let y = step(0.0, &|_| false);
        if norm(&y) <= delta {
            return value(&y);
        }
    }
    let lo = (-lmin).max(0.0);
    let gnorm = g.norm();
    let in_left = |i: usize| d[i] - lmin <= 1e-9 * (1.0 + lmin.abs());
    let left_free = (0..n).filter(|&i| in_left(i)).all(|i| a[i].abs() <= 1e-10 * gnorm.max(1e-300));
    if left_free && lmin <= 0.0 {
        let y = step(lo, &in_left);
        let r = norm(&y);
        if r <= delta {
            // Hard case: fill the remaining length along a leftmost eigenvector.
            let mut y = y;
            let i0 = (0..n).find(|&i| in_left(i)).unwrap();
            y[i0] = (delta * delta - r * r).sqrt();
            return value(&y);
        }
    }
    let (mut l, mut u) = (lo, lo + gnorm / delta + 1.0);
    while norm(&step(u, &|_| false)) > delta {
        u *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (l + u);
        if mid <= l || mid >= u {
            break;
        }
        let y = step(mid, &|_| false);
        if !y.iter().all(|v| v.is_finite()) || norm(&y) > delta {
            l = mid;
        } else {
            u = mid;
        }
    }
    value(&step(u, &|_| false))
}

/// Solves `inst` and checks objective and KKT certificates; returns the
/// objective gap to the oracle.
pub fn check(inst: &Instance) -> Result<f64, String> {
    let sol = solve_trs(&inst.g, &inst.h, inst.delta).map_err(|e| e.to_string())?;
    let got = quadratic_value(&inst.g, &inst.h, &sol.step);
    let want = oracle(&inst.g, &inst.h, inst.delta);
    if (got - want).abs() > TOL {
        return Err(format!("objective {got:e} vs oracle {want:e}"));
    }
    let kkt = kkt_residual(&inst.g, &inst.h, &sol);
    let s_norm = sol.step.norm();
    let lmin = inst.h.clone().symmetric_eigenvalues().min();
    if kkt > TOL {
        return Err(format!("stationarity residual {kkt:e}"));
    }
    if sol.multiplier < 0.0 || s_norm > inst.delta * (1.0 + TOL) {
        return Err(format!("feasibility: λ = {:e}, ‖s‖ = {s_norm:e}", sol.multiplier));
    }
    if (sol.multiplier * (inst.delta - s_norm)).abs() > TOL {
        return Err(format!("complementarity λ(δ − ‖s‖) = {:e}", sol.multiplier * (inst.delta - s_norm)));
    }
    if lmin + sol.multiplier < -TOL {
        return Err(format!("H + λI indefinite: λ₁ + λ = {:e}", lmin + sol.multiplier));
    }
    if inst.hard && !sol.on_boundary {
        return Err("hard case solution not on the boundary".into());
    }
    Ok((got - want).abs())
}

/// The fixed batch: 200 instances, every eighth one a hard case.
pub fn instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    (0..200).map(|i| instance(&mut rng, i % 8 == 0)).collect()
}
