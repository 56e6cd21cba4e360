//! Phase 2: target following on `Φ(x, t) = ½‖r(x, t)‖²` with
//! `r = (c(x); f(x) − t)`.
//!
//! Each iteration takes one trust-region step on `Φ(·, t_k)` using the
//! accept/contract/expand rules of the V-iteration. After an accepted step
//! the target is lowered so that `‖r(x_{k+1}, t_{k+1})‖ = ‖r(x_k, t_k)‖`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::phase1::{compute_sigma, v_branch, v_radii_update, Budget, IterKind, SolverParams, VRadii};
use crate::problems::{evaluate, second_order, symmetrize, EvalPoint, NlpProblem, SecondOrder};
use crate::subproblems::solve_trs;

/// `r = (c; f − t)`.
pub fn residual(e: &EvalPoint, t: f64) -> DVector<f64> {
    let m = e.c.len();
    let mut r = DVector::zeros(m + 1);
    r.rows_mut(0, m).copy_from(&e.c);
    r[m] = e.f - t;
    r
}

/// `‖r(x, t)‖` without materializing `r`.
pub fn residual_norm(e: &EvalPoint, t: f64) -> f64 {
    (e.c.norm_squared() + (e.f - t).powi(2)).sqrt()
}

/// Value, gradient and Hessian of `Φ(·, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiModel {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

pub fn phi_value(e: &EvalPoint, t: f64) -> f64 {
    0.5 * (e.c.norm_squared() + (e.f - t).powi(2))
}

/// `∇Φ = Jᵀc + (f − t)g`.
pub fn phi_gradient(e: &EvalPoint, t: f64) -> DVector<f64> {
    e.jac.tr_mul(&e.c) + &e.g * (e.f - t)
}

/// `∇²Φ = JᵀJ + Σ cᵢ∇²cᵢ + ggᵀ + (f − t)∇²f`.
pub fn phi_model(e: &EvalPoint, t: f64, so: &SecondOrder) -> PhiModel {
    let ft = e.f - t;
    let mut hess = e.jac.tr_mul(&e.jac) + &e.g * e.g.transpose() + &so.hess_f * ft;
    for (ci, hci) in e.c.iter().zip(&so.hess_c) {
        if *ci != 0.0 {
            hess += hci * *ci;
        }
    }
    symmetrize(&mut hess);
    PhiModel {
        value: phi_value(e, t),
        grad: phi_gradient(e, t),
        hess,
    }
}

/// `t₀ = f₀ − √(ε_feas² − ‖c₀‖²)`.
pub fn initial_target(f0: f64, c0_norm: f64, eps_feas: f64) -> Result<f64> {
    if c0_norm > eps_feas {
        return Err(SolverError::Contract(format!(
            "phase-2 start has ‖c‖ = {c0_norm:e} above ε_feas = {eps_feas:e}"
        )));
    }
    Ok(f0 - (eps_feas * eps_feas - c0_norm * c0_norm).max(0.0).sqrt())
}

/// Radicands down to this value are treated as rounding noise and clamped to zero.
pub const RADICAND_CLAMP: f64 = -1e-14;

/// `t₊ = f₊ − √(‖r_k‖² − ‖r(x₊, t_k)‖² + (f₊ − t_k)²)`.
pub fn update_target(r_prev_norm: f64, r_next_norm: f64, f_next: f64, t: f64) -> Result<f64> {
    let rad = r_prev_norm * r_prev_norm - r_next_norm * r_next_norm + (f_next - t).powi(2);
    if rad < RADICAND_CLAMP {
        return Err(SolverError::Contract(format!("negative target radicand {rad:e}")));
    }
    Ok(f_next - rad.max(0.0).sqrt())
}

/// Phase-2 outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase2Status {
    RelativeKkt,
    InfeasibilityStationary,
    IterLimit,
    EvalError,
    StepTooSmall,
    TimeLimit,
}

impl Phase2Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase2Status::RelativeKkt => "relative_kkt",
            Phase2Status::InfeasibilityStationary => "infeasibility_stationary",
            Phase2Status::IterLimit => "iter_limit",
            Phase2Status::EvalError => "eval_error",
            Phase2Status::StepTooSmall => "step_too_small",
            Phase2Status::TimeLimit => "time_limit",
        }
    }
}

/// Termination test after an accepted step, evaluated at `(x₊, t_k)`.
pub fn phase2_termination(e_next: &EvalPoint, t: f64, eps: f64) -> Option<Phase2Status> {
    let r = residual_norm(e_next, t);
    if r == 0.0 {
        return None;
    }
    if phi_gradient(e_next, t).norm() <= eps * r {
        Some(if e_next.f == t {
            Phase2Status::InfeasibilityStationary
        } else {
            Phase2Status::RelativeKkt
        })
    } else {
        None
    }
}

/// `y = c/(f − t)`, the multiplier estimate implied by the residual.
pub fn multiplier_estimate(e: &EvalPoint, t: f64) -> Option<DVector<f64>> {
    let ft = e.f - t;
    (ft != 0.0).then(|| &e.c / ft)
}

/// `‖g + Jᵀy‖ / ‖(y, 1)‖`.
pub fn relative_kkt_error(e: &EvalPoint, y: &DVector<f64>) -> f64 {
    (&e.g + e.jac.tr_mul(y)).norm() / (y.norm_squared() + 1.0).sqrt()
}

/// Iterate, target and trust-region state of the step engine on `Φ(·, t)`.
#[derive(Debug, Clone)]
pub struct TargetState {
    pub k: usize,
    pub e: EvalPoint,
    pub so: SecondOrder,
    pub t: f64,
    pub delta: f64,
    pub delta_max: f64,
    pub sigma: f64,
    pub prev_rho: f64,
}

/// Result of one engine step.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub s: DVector<f64>,
    pub lambda: f64,
    pub rho: f64,
    pub kind: IterKind,
    /// Evaluation at `x + s`.
    pub trial: EvalPoint,
    pub phi: f64,
    pub phi_trial: f64,
    pub grad_norm: f64,
}

/// One trust-region iteration on `Φ(·, t_k)`; updates the radii and `σ`, but
/// neither `x` nor `t`.
pub fn trace_step(problem: &NlpProblem, state: &mut TargetState, params: &SolverParams) -> Result<TraceStep> {
    let model = phi_model(&state.e, state.t, &state.so);
    let trs = solve_trs(&model.grad, &model.hess, state.delta)?;
    let s_norm = trs.step.norm();
    if !(s_norm >= params.min_step) {
        return Err(SolverError::Subproblem(format!("phase-2 step length {s_norm:e}")));
    }
    state.sigma = compute_sigma(s_norm, trs.multiplier, state.sigma, state.prev_rho, None, params);
    let trial = evaluate(problem, &(&state.e.x + &trs.step))?;
    let phi_trial = phi_value(&trial, state.t);
    let rho = (model.value - phi_trial) / s_norm.powi(3);
    let branch = v_branch(rho, trs.multiplier, s_norm, state.sigma, state.delta_max, params);
    let radii = v_radii_update(
        branch,
        VRadii {
            delta: state.delta,
            delta_max: state.delta_max,
        },
        s_norm,
        trs.multiplier,
        state.sigma,
        &model.grad,
        &model.hess,
        params,
    )?;
    state.delta = radii.delta;
    state.delta_max = radii.delta_max;
    state.prev_rho = rho;
    Ok(TraceStep {
        s: trs.step,
        lambda: trs.multiplier,
        rho,
        kind: branch.kind(),
        trial,
        phi: model.value,
        phi_trial,
        grad_norm: model.grad.norm(),
    })
}

/// One row of the phase-2 trace, describing iteration `k` at `(x_k, t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Record {
    pub k: usize,
    pub kind: IterKind,
    pub accepted: bool,
    pub f: f64,
    pub c_norm: f64,
    pub t: f64,
    pub phi: f64,
    pub r_norm: f64,
    pub grad_norm: f64,
    pub s_norm: f64,
    pub delta: f64,
    pub delta_max: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub rho: f64,
    pub phi_trial: f64,
    pub t_next: f64,
}

#[derive(Debug, Clone)]
pub struct Phase2Result {
    pub status: Phase2Status,
    pub x: DVector<f64>,
    pub t: f64,
    pub f: f64,
    pub c_norm: f64,
    /// `c/(f − t)` at the final point, absent when `f = t`.
    pub y: Option<DVector<f64>>,
    pub kkt_error: Option<f64>,
    pub accepted: usize,
    pub trace: Vec<Phase2Record>,
    pub eps_feas: f64,
    pub message: Option<String>,
}

impl Phase2Result {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Tolerances of a phase-2 run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase2Tolerances {
    /// Relative stationarity `‖∇Φ‖ ≤ ε‖r‖`.
    pub eps: f64,
    /// Radius of the residual sphere, `‖r(x_k, t_k)‖ = ε_feas`.
    pub eps_feas: f64,
}

/// Runs phase 2 from `x_start`, which must satisfy `‖c‖ ≤ ε_feas`.
pub fn run_phase2(
    problem: &NlpProblem,
    x_start: &DVector<f64>,
    params: &SolverParams,
    tol: Phase2Tolerances,
    budget: Budget,
) -> Phase2Result {
    let mut trace = Vec::new();
    let mut accepted = 0usize;
    let start = evaluate(problem, x_start).and_then(|e| {
        let so = second_order(problem, &e.x)?;
        let t = initial_target(e.f, e.c.norm(), tol.eps_feas)?;
        Ok(TargetState {
            k: 0,
            e,
            so,
            t,
            delta: params.delta_v0,
            delta_max: params.delta_vmax0,
            sigma: params.sigma_min,
            prev_rho: f64::INFINITY,
        })
    });
    let mut state = match start {
        Ok(s) => s,
        Err(err) => {
            return Phase2Result {
                status: Phase2Status::EvalError,
                x: x_start.clone(),
                t: f64::NAN,
                f: f64::NAN,
                c_norm: f64::NAN,
                y: None,
                kkt_error: None,
                accepted: 0,
                trace,
                eps_feas: tol.eps_feas,
                message: Some(err.to_string()),
            }
        }
    };
    let mut message = None;
    let status = 'run: {
        if let Some(status) = phase2_termination(&state.e, state.t, tol.eps) {
            break 'run status;
        }
        loop {
            if state.k >= budget.max_iter {
                break 'run Phase2Status::IterLimit;
            }
            if budget.expired() {
                break 'run Phase2Status::TimeLimit;
            }
            let before = (state.delta, state.delta_max);
            let step = match trace_step(problem, &mut state, params) {
                Ok(s) => s,
                Err(SolverError::Subproblem(msg)) if msg.starts_with("phase-2 step length") => {
                    break 'run Phase2Status::StepTooSmall;
                }
                Err(err) => {
                    message = Some(err.to_string());
                    break 'run Phase2Status::EvalError;
                }
            };
            let accept = step.kind == IterKind::VSuccess;
            let r_norm = residual_norm(&state.e, state.t);
            let t_next = if accept {
                match update_target(r_norm, residual_norm(&step.trial, state.t), step.trial.f, state.t) {
                    Ok(t) => t,
                    Err(err) => {
                        message = Some(err.to_string());
                        break 'run Phase2Status::EvalError;
                    }
                }
            } else {
                state.t
            };
            trace.push(Phase2Record {
                k: state.k,
                kind: step.kind,
                accepted: accept,
                f: state.e.f,
                c_norm: state.e.c.norm(),
                t: state.t,
                phi: step.phi,
                r_norm,
                grad_norm: step.grad_norm,
                s_norm: step.s.norm(),
                delta: before.0,
                delta_max: before.1,
                sigma: state.sigma,
                lambda: step.lambda,
                rho: step.rho,
                phi_trial: step.phi_trial,
                t_next,
            });
            state.k += 1;
            if accept {
                accepted += 1;
                let done = phase2_termination(&step.trial, state.t, tol.eps);
                let so = match second_order(problem, &step.trial.x) {
                    Ok(so) => so,
                    Err(err) => {
                        message = Some(err.to_string());
                        break 'run Phase2Status::EvalError;
                    }
                };
                state.e = step.trial;
                state.so = so;
                if let Some(status) = done {
                    // The test is made at (x₊, t_k): report that pair.
                    break 'run status;
                }
                state.t = t_next;
            }
        }
    };
    let y = multiplier_estimate(&state.e, state.t);
    let kkt_error = y.as_ref().map(|y| relative_kkt_error(&state.e, y));
    Phase2Result {
        status,
        x: state.e.x.clone(),
        t: state.t,
        f: state.e.f,
        c_norm: state.e.c.norm(),
        y,
        kkt_error,
        accepted,
        trace,
        eps_feas: tol.eps_feas,
        message,
    }
}
