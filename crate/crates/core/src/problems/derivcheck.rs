//! Central-difference verification of analytic derivatives.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{evaluate, second_order, NlpProblem};
use crate::error::Result;

/// Relative tolerance used by [`check_derivatives`] to set the pass flag.
pub const DERIV_TOL: f64 = 1e-4;

/// Largest relative error per derivative block.
///
/// The error of a block is `‖analytic − fd‖∞ / max(1, ‖analytic‖∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivCheckReport {
    pub problem: String,
    pub gradient: f64,
    pub jacobian: f64,
    pub hess_f: f64,
    pub hess_c: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl DerivCheckReport {
    pub fn worst(&self) -> f64 {
        self.hess_c
            .iter()
            .copied()
            .fold(self.gradient.max(self.jacobian).max(self.hess_f), f64::max)
    }
}

fn rel_err(analytic: &DMatrix<f64>, fd: &DMatrix<f64>) -> f64 {
    let scale = analytic.amax().max(1.0);
    (analytic - fd).amax() / scale
}

/// Compares every analytic derivative at `x` against central differences
/// with per-coordinate step `h·max(1, |x_i|)`.
pub fn check_derivatives(problem: &NlpProblem, x: &DVector<f64>, h: f64) -> Result<DerivCheckReport> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = problem.n_vars;
    let m = problem.n_cons;
    let e = evaluate(problem, x)?;
    let so = second_order(problem, x)?;

    let mut g_fd = DMatrix::zeros(n, 1);
    let mut j_fd = DMatrix::zeros(m, n);
    let mut hf_fd = DMatrix::zeros(n, n);
    let mut hc_fd = vec![DMatrix::zeros(n, n); m];
    for i in 0..n {
        let hi = h * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += hi;
        xm[i] -= hi;
        let (ep, em) = (evaluate(problem, &xp)?, evaluate(problem, &xm)?);
        let d = 2.0 * hi;
        g_fd[(i, 0)] = (ep.f - em.f) / d;
        j_fd.set_column(i, &((&ep.c - &em.c) / d));
        hf_fd.set_column(i, &((&ep.g - &em.g) / d));
        for (k, hk) in hc_fd.iter_mut().enumerate() {
            let col = (ep.jac.row(k) - em.jac.row(k)).transpose() / d;
            hk.set_column(i, &col);
        }
    }

    let gradient = rel_err(&DMatrix::from_column_slice(n, 1, e.g.as_slice()), &g_fd);
    let jacobian = rel_err(&e.jac, &j_fd);
    let hess_f = rel_err(&so.hess_f, &hf_fd);
    let hess_c: Vec<f64> = so
        .hess_c
        .iter()
        .zip(&hc_fd)
        .map(|(a, d)| rel_err(a, d))
        .collect();
    let mut report = DerivCheckReport {
        problem: problem.name.clone(),
        gradient,
        jacobian,
        hess_f,
        hess_c,
        tolerance: DERIV_TOL,
        pass: false,
    };
    report.pass = report.worst() <= DERIV_TOL;
    Ok(report)
}

/// Default central-difference step.
pub const DERIV_STEP: f64 = 1e-6;

/// `x0` followed by `count` deterministic perturbations of it, each
/// coordinate moved by up to `scale·max(1, |x0_i|)`.
pub fn perturbed_points(x0: &DVector<f64>, count: usize, scale: f64) -> Vec<DVector<f64>> {
    let mut points = vec![x0.clone()];
    for p in 1..=count {
        points.push(DVector::from_fn(x0.len(), |i, _| {
            let phase = 12.9898 * p as f64 + 78.233 * (i + 1) as f64;
            x0[i] + scale * x0[i].abs().max(1.0) * phase.sin()
        }));
    }
    points
}

/// Checks `problem` at its start and at `count` perturbed points.
pub fn check_problem(problem: &NlpProblem, count: usize) -> Result<Vec<DerivCheckReport>> {
    perturbed_points(&problem.x0, count, 0.1)
        .iter()
        .map(|x| check_derivatives(problem, x, DERIV_STEP))
        .collect()
}
