//! Invariant auditor for recorded traces.
//!
//! Every check is a structural fact the algorithm guarantees by
//! construction; a violation therefore points at an implementation defect
//! (or a forged trace). Checks that compare quantities computed along
//! different floating-point paths allow a few ulps of slack, stated next to
//! each check.

use std::fmt;

use super::trace::{Phase, TraceRecord};
use crate::phase1::{IterKind, IterationRecord, SolverParams};
use crate::phase2::Phase2Record;

/// Maximum number of consecutive phase-2 iterations without an accepted step.
pub const MAX_REJECTION_STREAK: usize = 200;
/// `‖r(x_k, t_k)‖ = ε_feas` tolerance.
pub const CORRIDOR_TOL: f64 = 1e-8;
/// `‖c(x_k)‖ ≤ ε_feas` and `f − t ≤ ε_feas` tolerance.
pub const FEAS_TOL: f64 = 1e-10;
/// Relative tolerance of the step-length lower bound.
pub const STEP_BOUND_RTOL: f64 = 1e-8;

const ULPS: f64 = 8.0 * f64::EPSILON;

/// Named invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invariant {
    /// `v_k ≤ vmax_k` and `0 < vmax_{k+1} ≤ vmax_k`.
    Funnel,
    /// Successful steps shrink the funnel by at least `κρ(1−κv2)‖s‖³`.
    FunnelDecrease,
    /// `‖n_k‖ > 0` and `‖s_k‖ > 0`.
    NonzeroSteps,
    /// Retention conditions whenever `t_k ≠ 0`.
    Retention,
    /// Radius bounds and which iteration kinds may change which radius.
    Radii,
    /// No expansion after a contraction or expansion; at most one expansion
    /// between successes.
    Expansion,
    /// `‖n_k‖ ≥ min{δv_k, ‖gv_k‖/‖Hv_k‖}`.
    StepLowerBound,
    /// `v_k − m^v(s_k) ≥ ½κvm‖gv_k‖·min{δv_k, ‖gv_k‖/‖Hv_k‖} > 0`.
    ModelDecrease,
    /// Row `k+1` starts from the state row `k` ended with.
    Continuity,
    /// `‖r‖ = ε_feas`, `‖c‖ ≤ ε_feas`, `0 ≤ f − t ≤ ε_feas`.
    Corridor,
    /// `t_{k+1} ≤ t_k`.
    TargetMonotone,
    /// Accepted steps satisfy `Φ_k − Φ(x_{k+1}, t_k) ≥ κρ‖s_k‖³`.
    AcceptedDecrease,
    /// At least one accepted step per [`MAX_REJECTION_STREAK`] iterations.
    RejectionStreak,
}

impl Invariant {
    pub fn as_str(self) -> &'static str {
        match self {
            Invariant::Funnel => "funnel",
            Invariant::FunnelDecrease => "funnel_decrease",
            Invariant::NonzeroSteps => "nonzero_steps",
            Invariant::Retention => "retention",
            Invariant::Radii => "radii",
            Invariant::Expansion => "expansion",
            Invariant::StepLowerBound => "step_lower_bound",
            Invariant::ModelDecrease => "model_decrease",
            Invariant::Continuity => "continuity",
            Invariant::Corridor => "corridor",
            Invariant::TargetMonotone => "target_monotone",
            Invariant::AcceptedDecrease => "accepted_decrease",
            Invariant::RejectionStreak => "rejection_streak",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub phase: Phase,
    pub k: usize,
    pub invariant: Invariant,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::Phase1 => "phase1",
            Phase::Phase2 => "phase2",
        };
        write!(f, "{phase} k={} {}: {}", self.k, self.invariant.as_str(), self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub phase1_rows: usize,
    pub phase2_rows: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, invariant: Invariant) -> usize {
        self.violations.iter().filter(|v| v.invariant == invariant).count()
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.phase1_rows += other.phase1_rows;
        self.phase2_rows += other.phase2_rows;
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "audit: {} phase-1 rows, {} phase-2 rows, {} violation(s)",
            self.phase1_rows,
            self.phase2_rows,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Constants the audited run used.
#[derive(Debug, Clone)]
pub struct AuditContext {
    pub params: SolverParams,
    /// Phase-2 residual radius; when absent it is read off the first phase-2 row.
    pub eps_feas: Option<f64>,
}

struct Sink {
    phase: Phase,
    out: Vec<Violation>,
}

impl Sink {
    fn check(&mut self, ok: bool, k: usize, invariant: Invariant, detail: impl FnOnce() -> String) {
        if !ok {
            self.out.push(Violation {
                phase: self.phase,
                k,
                invariant,
                detail: detail(),
            });
        }
    }
}

fn cauchy_radius(r: &IterationRecord) -> f64 {
    if r.hv_norm > 0.0 {
        r.delta_v.min(r.gv_norm / r.hv_norm)
    } else {
        r.delta_v
    }
}

/// Audits a phase-1 trace.
pub fn audit_phase1(rows: &[IterationRecord], params: &SolverParams) -> Vec<Violation> {
    use Invariant::*;
    let mut s = Sink {
        phase: Phase::Phase1,
        out: Vec::new(),
    };
    let mut expansions_since_success = 0usize;
    for (i, r) in rows.iter().enumerate() {
        let k = r.k;
        s.check(r.v <= r.vmax * (1.0 + ULPS), k, Funnel, || {
            format!("v = {:e} exceeds vmax = {:e}", r.v, r.vmax)
        });
        s.check(r.vmax_next > 0.0 && r.vmax_next <= r.vmax, k, Funnel, || {
            format!("vmax {:e} -> {:e}", r.vmax, r.vmax_next)
        });
        if r.kind.is_success() {
            let need = params.kappa_rho_funnel * (1.0 - params.kappa_v2) * r.s_norm.powi(3);
            // Below one ulp of vmax the decrease is not representable.
            let slack = ULPS * r.vmax;
            s.check(r.vmax - r.vmax_next >= need - slack, k, FunnelDecrease, || {
                format!("vmax decreased by {:e} < {need:e}", r.vmax - r.vmax_next)
            });
        }
        s.check(r.n_norm > 0.0 && r.s_norm > 0.0, k, NonzeroSteps, || {
            format!("‖n‖ = {:e}, ‖s‖ = {:e}", r.n_norm, r.s_norm)
        });
        if r.t_norm > 0.0 {
            // Same values and the same comparisons as the solver's own test.
            let reduction = r.v - r.mv_s >= params.kappa_vm * (r.v - r.mv_n);
            let length = r.s_norm >= params.kappa_ntn * r.n_norm;
            let curvature = r.hv_t_norm <= params.kappa_ht * r.s_norm * r.s_norm;
            s.check(reduction && length && curvature, k, Retention, || {
                format!("reduction {reduction}, length {length}, curvature {curvature}")
            });
        }

        // Radii.
        s.check(r.delta_v <= r.delta_vmax && r.delta_v_next <= r.delta_vmax_next, k, Radii, || {
            format!(
                "δv {:e} -> {:e} vs δv_max {:e} -> {:e}",
                r.delta_v, r.delta_v_next, r.delta_vmax, r.delta_vmax_next
            )
        });
        s.check(r.delta_vmax_next >= r.delta_vmax, k, Radii, || {
            format!("δv_max decreased {:e} -> {:e}", r.delta_vmax, r.delta_vmax_next)
        });
        if r.kind.is_f() {
            s.check(
                r.delta_v_next == r.delta_v && r.delta_vmax_next == r.delta_vmax,
                k,
                Radii,
                || format!("F-iteration changed δv {:e} -> {:e}", r.delta_v, r.delta_v_next),
            );
            if let Some(next) = rows.get(i + 1) {
                s.check(next.sigma_v == r.sigma_v, next.k, Radii, || {
                    format!("σv changed after an F-iteration {:e} -> {:e}", r.sigma_v, next.sigma_v)
                });
            }
        }
        if r.kind.is_v() {
            s.check(r.delta_f_next == r.delta_f, k, Radii, || {
                format!("V-iteration changed δf {:e} -> {:e}", r.delta_f, r.delta_f_next)
            });
        }
        match r.kind {
            IterKind::FContract => s.check(r.delta_f_next < r.delta_f, k, Radii, || {
                format!("F-contract did not shrink δf {:e} -> {:e}", r.delta_f, r.delta_f_next)
            }),
            IterKind::VContract => s.check(r.delta_v_next < r.delta_v, k, Radii, || {
                format!("V-contract did not shrink δv {:e} -> {:e}", r.delta_v, r.delta_v_next)
            }),
            IterKind::VExpand => s.check(r.delta_v_next > r.delta_v, k, Radii, || {
                format!("V-expand did not grow δv {:e} -> {:e}", r.delta_v, r.delta_v_next)
            }),
            _ => {}
        }

        // Expansion structure.
        if r.kind == IterKind::VExpand {
            if i > 0 {
                let prev = rows[i - 1].kind;
                s.check(
                    !matches!(prev, IterKind::VContract | IterKind::VExpand),
                    k,
                    Expansion,
                    || format!("V_expand follows {}", prev.as_str()),
                );
            }
            expansions_since_success += 1;
            s.check(expansions_since_success <= 1, k, Expansion, || {
                format!("{expansions_since_success} expansions since the last success")
            });
        }
        if r.kind.is_success() {
            expansions_since_success = 0;
        }

        // Step length and model decrease.
        let radius = cauchy_radius(r);
        s.check(r.n_norm >= (1.0 - STEP_BOUND_RTOL) * radius, k, StepLowerBound, || {
            format!("‖n‖ = {:e} < min(δv, ‖gv‖/‖Hv‖) = {radius:e}", r.n_norm)
        });
        let decrease = r.v - r.mv_s;
        let cauchy = 0.5 * params.kappa_vm * r.gv_norm * radius;
        // The model values carry roundoff of a few ulps of their magnitude.
        let slack = ULPS * r.v.max(r.mv_s.abs());
        s.check(decrease > 0.0 && decrease >= cauchy - slack, k, ModelDecrease, || {
            format!("v − m(s) = {decrease:e}, required {cauchy:e}")
        });

        if let Some(next) = rows.get(i + 1) {
            let continuous = next.k == k + 1
                && next.vmax == r.vmax_next
                && next.delta_v == r.delta_v_next
                && next.delta_f == r.delta_f_next
                && next.delta_vmax == r.delta_vmax_next;
            s.check(continuous, next.k, Continuity, || {
                format!("row does not continue from k={k}")
            });
            if !r.kind.is_success() {
                s.check(next.v == r.v && next.f == r.f, next.k, Continuity, || {
                    "iterate moved after a rejected step".to_string()
                });
            }
        }
    }
    s.out
}

/// Audits a phase-2 trace whose residual radius is `eps_feas`.
pub fn audit_phase2(rows: &[Phase2Record], params: &SolverParams, eps_feas: f64) -> Vec<Violation> {
    use Invariant::*;
    let mut s = Sink {
        phase: Phase::Phase2,
        out: Vec::new(),
    };
    let mut streak = 0usize;
    for (i, r) in rows.iter().enumerate() {
        let k = r.k;
        s.check((r.r_norm - eps_feas).abs() <= CORRIDOR_TOL, k, Corridor, || {
            format!("‖r‖ = {:e} vs ε_feas = {eps_feas:e}", r.r_norm)
        });
        s.check(r.c_norm <= eps_feas + FEAS_TOL, k, Corridor, || {
            format!("‖c‖ = {:e} > ε_feas = {eps_feas:e}", r.c_norm)
        });
        let gap = r.f - r.t;
        s.check((0.0..=eps_feas + FEAS_TOL).contains(&gap), k, Corridor, || {
            format!("f − t = {gap:e} outside [0, {eps_feas:e}]")
        });
        s.check(r.t_next <= r.t, k, TargetMonotone, || {
            format!("t increased {:e} -> {:e}", r.t, r.t_next)
        });
        s.check(r.accepted == (r.kind == IterKind::VSuccess), k, Continuity, || {
            format!("accept flag {} disagrees with kind {}", r.accepted, r.kind.as_str())
        });
        if r.accepted {
            let need = params.kappa_rho_accept * r.s_norm.powi(3);
            s.check(r.phi - r.phi_trial >= need * (1.0 - ULPS), k, AcceptedDecrease, || {
                format!("Φ decrease {:e} < κρ‖s‖³ = {need:e}", r.phi - r.phi_trial)
            });
            streak = 0;
        } else {
            streak += 1;
            s.check(streak < MAX_REJECTION_STREAK, k, RejectionStreak, || {
                format!("{streak} consecutive rejections")
            });
        }
        if let Some(next) = rows.get(i + 1) {
            s.check(next.k == k + 1 && next.t == r.t_next, next.k, Continuity, || {
                format!("row does not continue from k={k}")
            });
        }
    }
    s.out
}

/// Audits a full two-phase trace.
pub fn audit_trace(trace: &[TraceRecord], ctx: &AuditContext) -> AuditReport {
    let mut report = AuditReport::default();
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for row in trace {
        let parsed = match row.phase {
            Phase::Phase1 => row.to_phase1().map(|r| p1.push(r)),
            Phase::Phase2 => row.to_phase2().map(|r| p2.push(r)),
        };
        if let Err(e) = parsed {
            report.violations.push(Violation {
                phase: row.phase,
                k: row.k,
                invariant: Invariant::Continuity,
                detail: e.to_string(),
            });
        }
    }
    report.phase1_rows = p1.len();
    report.phase2_rows = p2.len();
    report.violations.extend(audit_phase1(&p1, &ctx.params));
    if let Some(eps_feas) = ctx.eps_feas.or_else(|| p2.first().map(|r| r.r_norm)) {
        report.violations.extend(audit_phase2(&p2, &ctx.params, eps_feas));
    }
    report
}
