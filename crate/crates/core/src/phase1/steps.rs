//! Step computation and the scalar rules of a phase-1 iteration.

use nalgebra::{DMatrix, DVector};

use super::params::SolverParams;
use super::{IterKind, Mode};
use crate::error::Result;
use crate::problems::{EvalPoint, InfeasModel};
use crate::subproblems::{null_space_basis, projected_gradient, solve_tangential, solve_trs, NullBasis};

/// One iteration's steps, multipliers and model values.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBundle {
    pub n: DVector<f64>,
    pub t: DVector<f64>,
    pub s: DVector<f64>,
    pub lambda_v: f64,
    pub lambda_f: f64,
    pub yf: Option<DVector<f64>>,
    pub gp: DVector<f64>,
    pub delta_s: f64,
    pub mv0: f64,
    pub mv_n: f64,
    pub mv_s: f64,
    pub mf0: f64,
    pub mf_n: f64,
    pub mf_s: f64,
    /// `‖Hv t‖`.
    pub hv_t_norm: f64,
    /// `‖(H_k − ∇²f)s‖`.
    pub hs_gap: f64,
    /// A tangential step was computed and then discarded by the retention test.
    pub tangential_reset: bool,
    pub basis: NullBasis,
}

impl StepBundle {
    pub fn n_norm(&self) -> f64 {
        self.n.norm()
    }
    pub fn t_norm(&self) -> f64 {
        self.t.norm()
    }
    pub fn s_norm(&self) -> f64 {
        self.s.norm()
    }
}

fn objective_model(e: &EvalPoint, hk: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    e.f + e.g.dot(d) + 0.5 * d.dot(&(hk * d))
}

/// Normal step, gated tangential step and the retention test.
pub fn compute_steps(
    e: &EvalPoint,
    model: &InfeasModel,
    hk: &DMatrix<f64>,
    hess_f: &DMatrix<f64>,
    params: &SolverParams,
    delta_v: f64,
    delta_f: f64,
    mode: Mode,
) -> Result<StepBundle> {
    let normal = solve_trs(&model.gv, &model.hv, delta_v)?;
    let n = normal.step;
    let dim = n.len();
    let delta_s = (params.kappa_delta * delta_v).min(delta_f);
    let basis = null_space_basis(&e.jac);
    let mut t = DVector::zeros(dim);
    let mut lambda_f = 0.0;
    let mut yf = None;
    let mut tangential_reset = false;
    let (gp, mut hv_t_norm);
    hv_t_norm = 0.0;

    match mode {
        Mode::VOnly => {
            gp = DVector::zeros(dim);
        }
        Mode::Full => {
            gp = projected_gradient(&e.g, hk, &n, &basis);
            let n_norm = n.norm();
            if n_norm <= params.kappa_n * delta_s && gp.norm() >= params.kappa_p * model.gv.norm() {
                let tan = solve_tangential(&e.g, hk, &e.jac, &n, delta_s, &basis)?;
                let candidate = StepValues::new(model, &n, &tan.t);
                if tangential_retention_ok(&candidate, params) {
                    t = tan.t;
                    lambda_f = tan.lambda_f;
                    yf = Some(tan.yf);
                    hv_t_norm = candidate.hv_t_norm;
                } else {
                    tangential_reset = true;
                }
            }
        }
    }

    let s = &n + &t;
    let hs_gap = ((hk - hess_f) * &s).norm();
    Ok(StepBundle {
        mv0: model.v,
        mv_n: model.value(&n),
        mv_s: model.value(&s),
        mf0: e.f,
        mf_n: objective_model(e, hk, &n),
        mf_s: objective_model(e, hk, &s),
        n,
        t,
        s,
        lambda_v: normal.multiplier,
        lambda_f,
        yf,
        gp,
        delta_s,
        hv_t_norm,
        hs_gap,
        tangential_reset,
        basis,
    })
}

/// The quantities entering the tangential retention test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepValues {
    pub mv0: f64,
    pub mv_n: f64,
    pub mv_s: f64,
    pub n_norm: f64,
    pub s_norm: f64,
    pub hv_t_norm: f64,
    pub t_is_zero: bool,
}

impl StepValues {
    pub fn new(model: &InfeasModel, n: &DVector<f64>, t: &DVector<f64>) -> Self {
        let s = n + t;
        Self {
            mv0: model.v,
            mv_n: model.value(n),
            mv_s: model.value(&s),
            n_norm: n.norm(),
            s_norm: s.norm(),
            hv_t_norm: (&model.hv * t).norm(),
            t_is_zero: t.iter().all(|&v| v == 0.0),
        }
    }

    pub fn of(bundle: &StepBundle) -> Self {
        Self {
            mv0: bundle.mv0,
            mv_n: bundle.mv_n,
            mv_s: bundle.mv_s,
            n_norm: bundle.n_norm(),
            s_norm: bundle.s_norm(),
            hv_t_norm: bundle.hv_t_norm,
            t_is_zero: bundle.t.iter().all(|&v| v == 0.0),
        }
    }
}

/// The three retention inequalities for a computed tangential step.
pub fn tangential_retention_ok(sv: &StepValues, params: &SolverParams) -> bool {
    if sv.t_is_zero {
        return true;
    }
    let reduction = sv.mv0 - sv.mv_s >= params.kappa_vm * (sv.mv0 - sv.mv_n);
    let length = sv.s_norm >= params.kappa_ntn * sv.n_norm;
    let curvature = sv.hv_t_norm <= params.kappa_ht * sv.s_norm * sv.s_norm;
    reduction && length && curvature
}

/// The six conditions selecting an F-iteration.
pub fn f_conditions_hold(
    bundle: &StepBundle,
    vmax: f64,
    sigma_v: f64,
    v_trial: f64,
    params: &SolverParams,
) -> bool {
    let t_norm = bundle.t_norm();
    if t_norm == 0.0 {
        return false;
    }
    let s_norm = bundle.s_norm();
    let n_norm = bundle.n_norm();
    let a = t_norm >= params.kappa_st * s_norm;
    let b = bundle.mf0 - bundle.mf_s >= params.kappa_fm * (bundle.mf_n - bundle.mf_s);
    let c = v_trial <= vmax - params.kappa_rho_funnel * s_norm.powi(3);
    let d = bundle.n.dot(&bundle.t) >= -0.5 * params.kappa_ntt * t_norm * t_norm;
    let e = bundle.lambda_v <= sigma_v * n_norm;
    let f = bundle.hs_gap <= params.kappa_hs * s_norm * s_norm;
    a && b && c && d && e && f
}

/// `(f_k − f_trial)/‖s‖³`.
pub fn rho_f(f_k: f64, f_trial: f64, s_norm: f64) -> f64 {
    debug_assert!(s_norm > 0.0, "ρ^f needs a nonzero step");
    (f_k - f_trial) / s_norm.powi(3)
}

/// `(v_k − v_trial)/‖s‖³`.
pub fn rho_v(v_k: f64, v_trial: f64, s_norm: f64) -> f64 {
    debug_assert!(s_norm > 0.0, "ρ^v needs a nonzero step");
    (v_k - v_trial) / s_norm.powi(3)
}

/// Funnel update after an accepted F-step.
pub fn update_vmax_f(vmax: f64, v_next: f64, s_norm: f64, params: &SolverParams) -> f64 {
    let shrink = (params.kappa_v1 * vmax).max(vmax - params.kappa_rho_funnel * s_norm.powi(3));
    shrink.min(v_next + params.kappa_v2 * (vmax - v_next))
}

/// Funnel update after an accepted V-step.
pub fn update_vmax_v(vmax: f64, v_k: f64, v_next: f64, params: &SolverParams) -> f64 {
    let shrink = (params.kappa_v1 * vmax).max(v_next + params.kappa_v2 * (v_k - v_next));
    shrink.min(v_next + params.kappa_v2 * (vmax - v_next))
}

/// `σv_k` from the previous value and the previous iteration's outcome.
pub fn compute_sigma(
    n_norm: f64,
    lambda_v: f64,
    sigma_prev: f64,
    rho_v_prev: f64,
    prev_kind: Option<IterKind>,
    params: &SolverParams,
) -> f64 {
    if prev_kind.is_some_and(IterKind::is_f) || rho_v_prev >= params.kappa_rho_accept {
        sigma_prev
    } else {
        sigma_prev.max(ratio_at_least(lambda_v, n_norm))
    }
}

/// `λ/‖n‖` rounded up so that `ratio·‖n‖ ≥ λ` holds in floating point;
/// otherwise the accept gate `λ ≤ σ‖n‖` can fail by one ulp right after σ was
/// raised to exactly this ratio, turning a would-be accept into a null expansion.
fn ratio_at_least(lambda: f64, n_norm: f64) -> f64 {
    let mut ratio = lambda / n_norm;
    while ratio * n_norm < lambda {
        ratio = ratio.next_up();
    }
    ratio
}
