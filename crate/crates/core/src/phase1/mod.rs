//! Phase 1: the trust funnel iteration that drives `v = ½‖c‖²` toward zero
//! while using tangential steps to make progress on `f`.

pub mod iterations;
pub mod params;
pub mod run;
pub mod steps;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::problems::{EvalPoint, InfeasModel};

pub use iterations::{f_contract, f_iteration, v_branch, v_contract, v_iteration, v_radii_update, VBranch, VRadii};
pub use params::SolverParams;
pub use run::run_phase1;
pub use steps::{
    compute_sigma, compute_steps, f_conditions_hold, rho_f, rho_v, tangential_retention_ok, update_vmax_f,
    update_vmax_v, StepBundle, StepValues,
};

/// Classification of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IterKind {
    #[serde(rename = "F_success")]
    FSuccess,
    #[serde(rename = "F_contract")]
    FContract,
    #[serde(rename = "V_success")]
    VSuccess,
    #[serde(rename = "V_contract")]
    VContract,
    #[serde(rename = "V_expand")]
    VExpand,
}

impl IterKind {
    pub fn is_f(self) -> bool {
        matches!(self, IterKind::FSuccess | IterKind::FContract)
    }

    pub fn is_v(self) -> bool {
        matches!(self, IterKind::VSuccess | IterKind::VContract | IterKind::VExpand)
    }

    pub fn is_success(self) -> bool {
        matches!(self, IterKind::FSuccess | IterKind::VSuccess)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IterKind::FSuccess => "F_success",
            IterKind::FContract => "F_contract",
            IterKind::VSuccess => "V_success",
            IterKind::VContract => "V_contract",
            IterKind::VExpand => "V_expand",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            IterKind::FSuccess,
            IterKind::FContract,
            IterKind::VSuccess,
            IterKind::VContract,
            IterKind::VExpand,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// Whether tangential steps are computed at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Full,
    /// Tangential steps are forced to zero, so every iteration is a V-iteration.
    VOnly,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::VOnly => "v-only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Some(Mode::Full),
            "v-only" | "vonly" => Some(Mode::VOnly),
            _ => None,
        }
    }
}

/// Which stopping test ends phase 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Scaled ∞-norm tests on `c` and `Jᵀc` relative to the starting point.
    Practical,
    /// `‖gv‖ ≤ ε_feas·ε_inf`, then near-feasible iff `‖c‖ ≤ ε_feas`.
    Theory { eps_feas: f64, eps_inf: f64 },
}

/// Iteration and wall-clock limits shared by both phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_iter: usize,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn iterations(max_iter: usize) -> Self {
        Self {
            max_iter,
            deadline: None,
        }
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Mutable state of the funnel iteration, with the models cached at `x_k`.
#[derive(Debug, Clone)]
pub struct FunnelState {
    pub k: usize,
    pub e: EvalPoint,
    pub model: InfeasModel,
    pub hk: DMatrix<f64>,
    pub hess_f: DMatrix<f64>,
    pub vmax: f64,
    pub delta_v: f64,
    pub delta_f: f64,
    pub delta_vmax: f64,
    pub sigma_v: f64,
    /// `ρ^v` of the previous iteration, `+∞` after an F-iteration and at `k = 0`.
    pub prev_rho_v: f64,
    pub prev_kind: Option<IterKind>,
}

/// One row of the phase-1 trace.
///
/// Quantities without a suffix are the values used during iteration `k`;
/// `_next` fields hold the values handed to iteration `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub kind: IterKind,
    pub f: f64,
    pub v: f64,
    pub c_norm: f64,
    pub gv_norm: f64,
    pub n_norm: f64,
    pub t_norm: f64,
    pub s_norm: f64,
    pub lambda_v: f64,
    pub lambda_f: f64,
    pub delta_v: f64,
    pub delta_f: f64,
    pub delta_vmax: f64,
    pub vmax: f64,
    pub sigma_v: f64,
    pub rho_f: f64,
    pub rho_v: f64,
    pub v_trial: f64,
    pub vmax_next: f64,
    pub delta_v_next: f64,
    pub delta_f_next: f64,
    pub delta_vmax_next: f64,
    pub mv_n: f64,
    pub mv_s: f64,
    /// `‖Hv‖₂` at `x_k`.
    pub hv_norm: f64,
    pub hv_t_norm: f64,
    pub nt_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase1Status {
    NearFeasible,
    InfeasibleStationary,
    IterLimit,
    EvalError,
    StepTooSmall,
    TimeLimit,
}

impl Phase1Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase1Status::NearFeasible => "near_feasible",
            Phase1Status::InfeasibleStationary => "infeasible_stationary",
            Phase1Status::IterLimit => "iter_limit",
            Phase1Status::EvalError => "eval_error",
            Phase1Status::StepTooSmall => "step_too_small",
            Phase1Status::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phase1Result {
    pub status: Phase1Status,
    pub x: DVector<f64>,
    pub f: f64,
    pub c_norm: f64,
    pub gv_norm: f64,
    pub v_count: usize,
    pub f_count: usize,
    pub trace: Vec<IterationRecord>,
    /// Set when the status stems from a failed evaluation or subproblem.
    pub message: Option<String>,
    /// Final evaluation, absent only when `x0` itself could not be evaluated.
    pub last: Option<EvalPoint>,
}

impl Phase1Result {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in [
            IterKind::FSuccess,
            IterKind::FContract,
            IterKind::VSuccess,
            IterKind::VContract,
            IterKind::VExpand,
        ] {
            assert_eq!(IterKind::parse(k.as_str()), Some(k));
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(Mode::parse("full"), Some(Mode::Full));
        assert_eq!(Mode::parse("v-only"), Some(Mode::VOnly));
        assert_eq!(Mode::parse("V_ONLY"), Some(Mode::VOnly));
        assert_eq!(Mode::parse("both"), None);
    }
}
