//! Two-phase orchestration, configuration, traces, benchmarking and audits.

pub mod audit;
pub mod bench;
pub mod config;
pub mod trace;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use audit::{audit_phase1, audit_phase2, audit_trace, AuditContext, AuditReport, Invariant, Violation};
pub use bench::{comparison_summary, run_benchmark, BenchmarkTable, ComparisonSummary, Manifest};
pub use config::{emit_config, parse_config};
pub use trace::{build_trace, read_trace, write_trace, Phase, TraceFormat, TraceRecord, TRACE_HEADER};

use crate::error::{Result, SolverError};
use crate::phase1::{run_phase1, Budget, Mode, Phase1Result, Phase1Status, SolverParams, Termination};
use crate::phase2::{run_phase2, Phase2Result, Phase2Status, Phase2Tolerances};
use crate::problems::{corpus_lookup, dual_infeasibility, NlpProblem};

/// Everything one solver run needs besides the problem itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SolverParams,
    pub mode: Mode,
    /// Use `‖gv‖ ≤ ε_feas·ε_inf` instead of the practical phase-1 stopping test.
    pub theory: bool,
    /// Feasibility tolerance: the theory-mode target for `‖c‖`, and the
    /// floor of the phase-2 residual radius in both modes.
    pub eps_feas: f64,
    pub eps_inf: f64,
    /// Phase-2 relative stationarity tolerance.
    pub eps_opt: f64,
    pub phase2_max_iter: usize,
    /// Wall-clock limit for both phases together, in seconds.
    pub time_limit: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SolverParams::default(),
            mode: Mode::Full,
            theory: false,
            eps_feas: 1e-4,
            eps_inf: 1e-2,
            eps_opt: 1e-6,
            phase2_max_iter: 200_000,
            time_limit: Some(60.0),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (field, value) in [
            ("eps_feas", self.eps_feas),
            ("eps_inf", self.eps_inf),
            ("eps_opt", self.eps_opt),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SolverError::Config {
                    field: field.to_string(),
                    value: value.to_string(),
                    interval: "(0, ∞)",
                });
            }
        }
        if let Some(limit) = self.time_limit {
            if !(limit > 0.0) {
                return Err(SolverError::Config {
                    field: "time_limit".to_string(),
                    value: limit.to_string(),
                    interval: "(0, ∞) or none",
                });
            }
        }
        Ok(())
    }

    /// The phase-1 stopping rule; theory mode uses `ε = ε_feas·ε_inf`.
    pub fn termination(&self) -> Termination {
        if self.theory {
            Termination::Theory {
                eps_feas: self.eps_feas,
                eps_inf: self.eps_inf,
            }
        } else {
            Termination::Practical
        }
    }

    /// Phase-2 tolerances given the phase-1 end point's `‖c‖`.
    pub fn phase2_tolerances(&self, c_norm: f64) -> Phase2Tolerances {
        let eps_feas = c_norm.max(self.eps_feas);
        let eps = if self.theory {
            self.eps_opt.min(eps_feas.cbrt())
        } else {
            self.eps_opt
        };
        Phase2Tolerances { eps, eps_feas }
    }
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub phase1_status: String,
    pub phase1_v: usize,
    pub phase1_f: usize,
    /// Objective at the end of phase 1.
    pub phase1_obj: f64,
    pub phase1_c_norm: f64,
    /// `‖g + Jᵀy‖` with least-squares multipliers at the end of phase 1.
    pub phase1_dual_inf: f64,
    pub phase2_status: Option<String>,
    pub phase2_accepted: usize,
    pub phase2_rejected: usize,
    pub phase2_eps_feas: Option<f64>,
    pub final_obj: f64,
    pub final_c_norm: f64,
    pub kkt_error: Option<f64>,
    /// Overall outcome: the phase-2 status when it ran, else the phase-1 one.
    pub status: String,
    pub exit_code: i32,
    pub phase1_time_s: f64,
    pub wall_time_s: f64,
    pub message: Option<String>,
}

impl BenchmarkRow {
    pub fn phase2_iterations(&self) -> usize {
        self.phase2_accepted + self.phase2_rejected
    }

    /// Row for a cell that never reached the solver.
    pub fn failed(problem: &str, n: usize, m: usize, mode: Mode, message: String) -> Self {
        Self {
            problem: problem.to_string(),
            n,
            m,
            mode,
            phase1_status: "error".to_string(),
            phase1_v: 0,
            phase1_f: 0,
            phase1_obj: f64::NAN,
            phase1_c_norm: f64::NAN,
            phase1_dual_inf: f64::NAN,
            phase2_status: None,
            phase2_accepted: 0,
            phase2_rejected: 0,
            phase2_eps_feas: None,
            final_obj: f64::NAN,
            final_c_norm: f64::NAN,
            kkt_error: None,
            status: "error".to_string(),
            exit_code: 2,
            phase1_time_s: 0.0,
            wall_time_s: 0.0,
            message: Some(message),
        }
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub phase1: Phase1Result,
    pub phase2: Option<Phase2Result>,
    pub row: BenchmarkRow,
}

impl SolveOutcome {
    pub fn trace(&self) -> Vec<TraceRecord> {
        build_trace(
            &self.phase1.trace,
            self.phase2.as_ref().map(|p| p.trace.as_slice()).unwrap_or(&[]),
        )
    }

    pub fn exit_code(&self) -> i32 {
        self.row.exit_code
    }

    pub fn audit(&self, params: &SolverParams) -> AuditReport {
        audit_trace(
            &self.trace(),
            &AuditContext {
                params: params.clone(),
                eps_feas: self.phase2.as_ref().map(|p| p.eps_feas),
            },
        )
    }
}

/// 0 on success, 1 on a declared infeasible stationary point, 2 otherwise.
pub fn exit_code(phase1: Phase1Status, phase2: Option<Phase2Status>) -> i32 {
    match (phase1, phase2) {
        (Phase1Status::InfeasibleStationary, _) => 1,
        (_, Some(Phase2Status::RelativeKkt)) => 0,
        (_, Some(Phase2Status::InfeasibilityStationary)) => 1,
        _ => 2,
    }
}

/// Runs phase 1 and, from a near-feasible end point, phase 2.
pub fn solve(problem: &NlpProblem, config: &RunConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.time_limit.map(|s| start + Duration::from_secs_f64(s));
    let phase1 = run_phase1(
        problem,
        &config.params,
        config.mode,
        config.termination(),
        Budget {
            max_iter: config.params.max_iter,
            deadline,
        },
    );
    let phase1_time_s = start.elapsed().as_secs_f64();
    let phase2 = (phase1.status == Phase1Status::NearFeasible).then(|| {
        run_phase2(
            problem,
            &phase1.x,
            &config.params,
            config.phase2_tolerances(phase1.c_norm),
            Budget {
                max_iter: config.phase2_max_iter,
                deadline,
            },
        )
    });
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut row = benchmark_row(problem, config.mode, &phase1, phase2.as_ref(), wall_time_s);
    row.phase1_time_s = phase1_time_s;
    Ok(SolveOutcome { phase1, phase2, row })
}

/// Resolves `name` in the corpus and solves it.
pub fn run_solver(name: &str, config: &RunConfig) -> Result<SolveOutcome> {
    solve(&corpus_lookup(name)?, config)
}

fn benchmark_row(
    problem: &NlpProblem,
    mode: Mode,
    phase1: &Phase1Result,
    phase2: Option<&Phase2Result>,
    wall_time_s: f64,
) -> BenchmarkRow {
    let phase1_dual_inf = phase1.last.as_ref().map(dual_infeasibility).unwrap_or(f64::NAN);
    let (final_obj, final_c_norm) = match phase2 {
        Some(p) => (p.f, p.c_norm),
        None => (phase1.f, phase1.c_norm),
    };
    let status = match phase2 {
        Some(p) => p.status.as_str(),
        None => phase1.status.as_str(),
    };
    let message = phase2.and_then(|p| p.message.clone()).or_else(|| phase1.message.clone());
    BenchmarkRow {
        problem: problem.name.clone(),
        n: problem.n_vars,
        m: problem.n_cons,
        mode,
        phase1_status: phase1.status.as_str().to_string(),
        phase1_v: phase1.v_count,
        phase1_f: phase1.f_count,
        phase1_obj: phase1.f,
        phase1_c_norm: phase1.c_norm,
        phase1_dual_inf,
        phase2_status: phase2.map(|p| p.status.as_str().to_string()),
        phase2_accepted: phase2.map_or(0, |p| p.accepted),
        phase2_rejected: phase2.map_or(0, |p| p.iterations() - p.accepted),
        phase2_eps_feas: phase2.map(|p| p.eps_feas),
        final_obj,
        final_c_norm,
        kkt_error: phase2.and_then(|p| p.kkt_error),
        status: status.to_string(),
        exit_code: exit_code(phase1.status, phase2.map(|p| p.status)),
        phase1_time_s: 0.0,
        wall_time_s,
        message,
    }
}
