//! The phase-1 main loop.

use nalgebra::{DMatrix, DVector};

use super::params::SolverParams;
use super::steps::{compute_sigma, compute_steps, f_conditions_hold, rho_f, rho_v, StepBundle};
use super::{
    f_iteration, v_iteration, Budget, FunnelState, IterKind, IterationRecord, Mode, Phase1Result, Phase1Status,
    Termination,
};
use crate::error::{Result, SolverError};
use crate::problems::{build_hk, evaluate, infeasibility_model, second_order, EvalPoint, NlpProblem};

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Spectral norm of a symmetric matrix.
pub(crate) fn sym_norm2(h: &DMatrix<f64>) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    h.clone().symmetric_eigenvalues().iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Builds the funnel state at `e`, computing and caching second derivatives.
fn state_at(problem: &NlpProblem, e: EvalPoint, params: &SolverParams) -> Result<FunnelState> {
    let v0 = e.v();
    let mut state = FunnelState {
        k: 0,
        model: infeasibility_model(&e, &[]),
        hk: DMatrix::zeros(0, 0),
        hess_f: DMatrix::zeros(0, 0),
        e,
        vmax: v0.max(1.0),
        delta_v: params.delta_v0,
        delta_f: params.delta_f0,
        delta_vmax: params.delta_vmax0,
        sigma_v: params.sigma_min,
        prev_rho_v: f64::INFINITY,
        prev_kind: None,
    };
    refresh_models(problem, &mut state, params)?;
    Ok(state)
}

fn refresh_models(problem: &NlpProblem, state: &mut FunnelState, params: &SolverParams) -> Result<()> {
    let so = second_order(problem, &state.e.x)?;
    state.model = infeasibility_model(&state.e, &so.hess_c);
    state.hk = build_hk(&state.e, &so, params.hessian_mode);
    state.hess_f = so.hess_f;
    Ok(())
}

/// Reference scales of the practical stopping test.
struct Scales {
    c0: f64,
    stat0: f64,
}

fn termination_status(
    state: &FunnelState,
    scales: &Scales,
    termination: Termination,
    params: &SolverParams,
) -> Option<Phase1Status> {
    match termination {
        Termination::Practical => {
            let c_inf = inf_norm(&state.e.c);
            if c_inf <= params.feas_rtol * scales.c0.max(1.0) {
                Some(Phase1Status::NearFeasible)
            } else if inf_norm(&state.model.gv) <= params.stat_rtol * scales.stat0.max(1.0)
                && c_inf > params.infeas_rtol * scales.c0.max(1.0)
            {
                Some(Phase1Status::InfeasibleStationary)
            } else {
                None
            }
        }
        Termination::Theory { eps_feas, eps_inf } => {
            if state.model.gv.norm() <= eps_feas * eps_inf {
                Some(if state.e.c.norm() <= eps_feas {
                    Phase1Status::NearFeasible
                } else {
                    Phase1Status::InfeasibleStationary
                })
            } else {
                None
            }
        }
    }
}

struct Finish {
    status: Phase1Status,
    message: Option<String>,
}

impl Finish {
    fn status(status: Phase1Status) -> Self {
        Self { status, message: None }
    }

    fn error(e: SolverError) -> Self {
        Self {
            status: Phase1Status::EvalError,
            message: Some(e.to_string()),
        }
    }
}

/// Runs phase 1 from `problem.x0`.
pub fn run_phase1(
    problem: &NlpProblem,
    params: &SolverParams,
    mode: Mode,
    termination: Termination,
    budget: Budget,
) -> Phase1Result {
    let e0 = match evaluate(problem, &problem.x0) {
        Ok(e) => e,
        Err(err) => {
            return Phase1Result {
                status: Phase1Status::EvalError,
                x: problem.x0.clone(),
                f: f64::NAN,
                c_norm: f64::NAN,
                gv_norm: f64::NAN,
                v_count: 0,
                f_count: 0,
                trace: Vec::new(),
                message: Some(err.to_string()),
                last: None,
            }
        }
    };
    let scales = Scales {
        c0: inf_norm(&e0.c),
        stat0: inf_norm(&e0.gv()),
    };
    let mut trace = Vec::new();
    let (state, finish) = match state_at(problem, e0.clone(), params) {
        Ok(mut state) => {
            let finish = iterate(problem, params, mode, termination, budget, &scales, &mut state, &mut trace);
            (Some(state), finish)
        }
        Err(err) => (None, Finish::error(err)),
    };
    let last = state.map(|s| s.e).unwrap_or(e0);
    let v_count = trace.iter().filter(|r: &&IterationRecord| r.kind.is_v()).count();
    let f_count = trace.iter().filter(|r| r.kind.is_f()).count();
    Phase1Result {
        status: finish.status,
        x: last.x.clone(),
        f: last.f,
        c_norm: last.c.norm(),
        gv_norm: last.gv().norm(),
        v_count,
        f_count,
        trace,
        message: finish.message,
        last: Some(last),
    }
}

#[allow(clippy::too_many_arguments)]
fn iterate(
    problem: &NlpProblem,
    params: &SolverParams,
    mode: Mode,
    termination: Termination,
    budget: Budget,
    scales: &Scales,
    state: &mut FunnelState,
    trace: &mut Vec<IterationRecord>,
) -> Finish {
    let mut hv_norm = sym_norm2(&state.model.hv);
    loop {
        if let Some(status) = termination_status(state, scales, termination, params) {
            return Finish::status(status);
        }
        if state.k >= budget.max_iter {
            return Finish::status(Phase1Status::IterLimit);
        }
        if budget.expired() {
            return Finish::status(Phase1Status::TimeLimit);
        }
        let bundle = match compute_steps(
            &state.e,
            &state.model,
            &state.hk,
            &state.hess_f,
            params,
            state.delta_v,
            state.delta_f,
            mode,
        ) {
            Ok(b) => b,
            Err(err) => return Finish::error(err),
        };
        let s_norm = bundle.s_norm();
        if bundle.n_norm() < params.min_step || s_norm < params.min_step {
            return Finish::status(Phase1Status::StepTooSmall);
        }
        state.sigma_v = compute_sigma(
            bundle.n_norm(),
            bundle.lambda_v,
            state.sigma_v,
            state.prev_rho_v,
            state.prev_kind,
            params,
        );
        let x_trial = &state.e.x + &bundle.s;
        let trial = match evaluate(problem, &x_trial) {
            Ok(t) => t,
            Err(err) => return Finish::error(err),
        };
        let before = Snapshot::of(state, hv_norm);
        let v_trial = trial.v();
        let f_trial = trial.f;
        let is_f = mode == Mode::Full && f_conditions_hold(&bundle, state.vmax, state.sigma_v, v_trial, params);
        let (outcome, rf, rv) = if is_f {
            let r = rho_f(state.e.f, f_trial, s_norm);
            (f_iteration(state, &bundle, trial, r, params), r, f64::INFINITY)
        } else {
            let r = rho_v(state.e.v(), v_trial, s_norm);
            (v_iteration(state, &bundle, trial, r, params), f64::INFINITY, r)
        };
        let kind = match outcome {
            Ok(kind) => kind,
            Err(err) => return Finish::error(err),
        };
        trace.push(record(&before, state, &bundle, kind, rf, rv, v_trial));
        state.k += 1;
        if kind.is_success() {
            if let Err(err) = refresh_models(problem, state, params) {
                return Finish::error(err);
            }
            hv_norm = sym_norm2(&state.model.hv);
        }
    }
}

/// Values at the start of an iteration, before the F/V update mutates the state.
struct Snapshot {
    k: usize,
    f: f64,
    v: f64,
    c_norm: f64,
    gv_norm: f64,
    delta_v: f64,
    delta_f: f64,
    delta_vmax: f64,
    vmax: f64,
    sigma_v: f64,
    hv_norm: f64,
}

impl Snapshot {
    fn of(state: &FunnelState, hv_norm: f64) -> Self {
        Self {
            k: state.k,
            f: state.e.f,
            v: state.e.v(),
            c_norm: state.e.c.norm(),
            gv_norm: state.model.gv.norm(),
            delta_v: state.delta_v,
            delta_f: state.delta_f,
            delta_vmax: state.delta_vmax,
            vmax: state.vmax,
            sigma_v: state.sigma_v,
            hv_norm,
        }
    }
}

fn record(
    before: &Snapshot,
    after: &FunnelState,
    bundle: &StepBundle,
    kind: IterKind,
    rho_f: f64,
    rho_v: f64,
    v_trial: f64,
) -> IterationRecord {
    IterationRecord {
        k: before.k,
        kind,
        f: before.f,
        v: before.v,
        c_norm: before.c_norm,
        gv_norm: before.gv_norm,
        n_norm: bundle.n_norm(),
        t_norm: bundle.t_norm(),
        s_norm: bundle.s_norm(),
        lambda_v: bundle.lambda_v,
        lambda_f: bundle.lambda_f,
        delta_v: before.delta_v,
        delta_f: before.delta_f,
        delta_vmax: before.delta_vmax,
        vmax: before.vmax,
        sigma_v: before.sigma_v,
        rho_f,
        rho_v,
        v_trial,
        vmax_next: after.vmax,
        delta_v_next: after.delta_v,
        delta_f_next: after.delta_f,
        delta_vmax_next: after.delta_vmax,
        mv_n: bundle.mv_n,
        mv_s: bundle.mv_s,
        hv_norm: before.hv_norm,
        hv_t_norm: bundle.hv_t_norm,
        nt_dot: bundle.n.dot(&bundle.t),
    }
}
