//! Algorithm parameters with range validation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::problems::HessianMode;

/// Every tunable constant of the two-phase solver.
///
/// Defaults are the published settings of the reference implementation; the
/// step-acceptance and funnel uses of κρ, and the F/V uses of γc, carry
/// separate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub kappa_n: f64,
    pub kappa_vm: f64,
    pub kappa_ntn: f64,
    pub kappa_rho_accept: f64,
    pub kappa_rho_funnel: f64,
    pub kappa_fm: f64,
    pub kappa_st: f64,
    pub kappa_ntt: f64,
    pub kappa_v1: f64,
    pub kappa_v2: f64,
    pub gamma_c_f: f64,
    pub gamma_c_v: f64,
    pub kappa_p: f64,
    pub kappa_ht: f64,
    pub kappa_hs: f64,
    /// Stationarity tolerance of the theoretical termination test `‖gv‖ ≤ ε`.
    pub epsilon: f64,
    pub sigma_min: f64,
    pub kappa_delta: f64,
    pub gamma_e: f64,
    pub gamma_lambda: f64,
    pub sigma_max: f64,
    pub delta_v0: f64,
    pub delta_vmax0: f64,
    pub delta_f0: f64,
    pub max_iter: usize,
    /// Practical test: `‖c‖∞ ≤ feas_rtol·max{‖c₀‖∞, 1}`.
    pub feas_rtol: f64,
    /// Practical test: `‖Jᵀc‖∞ ≤ stat_rtol·max{‖J₀ᵀc₀‖∞, 1}` ...
    pub stat_rtol: f64,
    /// ... together with `‖c‖∞ > infeas_rtol·max{‖c₀‖∞, 1}`.
    pub infeas_rtol: f64,
    /// Steps shorter than this end the run with a step-too-small status.
    pub min_step: f64,
    pub hessian_mode: HessianMode,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            kappa_n: 0.9,
            kappa_vm: 1e-12,
            kappa_ntn: 1e-12,
            kappa_rho_accept: 1e-8,
            kappa_rho_funnel: 1e-12,
            kappa_fm: 1e-12,
            kappa_st: 1e-12,
            kappa_ntt: 1.0 - 2e-12,
            kappa_v1: 0.9,
            kappa_v2: 0.9,
            gamma_c_f: 0.5,
            gamma_c_v: 1e-2,
            kappa_p: 1e-6,
            kappa_ht: 1e20,
            kappa_hs: 1e20,
            epsilon: 1e-6,
            sigma_min: 1e-12,
            kappa_delta: 1e2,
            gamma_e: 2.0,
            gamma_lambda: 2.0,
            sigma_max: 1e20,
            delta_v0: 1.0,
            delta_vmax0: 1e8,
            delta_f0: 1.0,
            max_iter: 5000,
            feas_rtol: 1e-6,
            stat_rtol: 1e-6,
            infeas_rtol: 1e-3,
            min_step: 1e-20,
            hessian_mode: HessianMode::ExactObjective,
        }
    }
}

#[derive(Clone, Copy)]
enum Interval {
    Unit,
    Positive,
    AboveOne,
}

impl Interval {
    fn contains(self, v: f64) -> bool {
        match self {
            Interval::Unit => v > 0.0 && v < 1.0,
            Interval::Positive => v > 0.0 && v.is_finite(),
            Interval::AboveOne => v > 1.0 && v.is_finite(),
        }
    }

    fn text(self) -> &'static str {
        match self {
            Interval::Unit => "(0, 1)",
            Interval::Positive => "(0, ∞)",
            Interval::AboveOne => "(1, ∞)",
        }
    }
}

fn bad(field: &str, value: impl ToString, interval: &'static str) -> SolverError {
    SolverError::Config {
        field: field.to_string(),
        value: value.to_string(),
        interval,
    }
}

impl SolverParams {
    /// Checks every range constraint, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        use Interval::*;
        let checks: [(&str, f64, Interval); 24] = [
            ("kappa_n", self.kappa_n, Unit),
            ("kappa_vm", self.kappa_vm, Unit),
            ("kappa_ntn", self.kappa_ntn, Unit),
            ("kappa_rho_accept", self.kappa_rho_accept, Unit),
            ("kappa_rho_funnel", self.kappa_rho_funnel, Unit),
            ("kappa_fm", self.kappa_fm, Unit),
            ("kappa_st", self.kappa_st, Unit),
            ("kappa_ntt", self.kappa_ntt, Unit),
            ("kappa_v1", self.kappa_v1, Unit),
            ("kappa_v2", self.kappa_v2, Unit),
            ("gamma_c_f", self.gamma_c_f, Unit),
            ("gamma_c_v", self.gamma_c_v, Unit),
            ("kappa_p", self.kappa_p, Positive),
            ("kappa_ht", self.kappa_ht, Positive),
            ("kappa_hs", self.kappa_hs, Positive),
            ("epsilon", self.epsilon, Positive),
            ("sigma_min", self.sigma_min, Positive),
            ("kappa_delta", self.kappa_delta, AboveOne),
            ("gamma_e", self.gamma_e, AboveOne),
            ("gamma_lambda", self.gamma_lambda, AboveOne),
            ("delta_v0", self.delta_v0, Positive),
            ("delta_vmax0", self.delta_vmax0, Positive),
            ("delta_f0", self.delta_f0, Positive),
            ("feas_rtol", self.feas_rtol, Positive),
        ];
        for (name, value, interval) in checks {
            if !interval.contains(value) {
                return Err(bad(name, value, interval.text()));
            }
        }
        for (name, value) in [
            ("stat_rtol", self.stat_rtol),
            ("infeas_rtol", self.infeas_rtol),
            ("min_step", self.min_step),
        ] {
            if !Positive.contains(value) {
                return Err(bad(name, value, Positive.text()));
            }
        }
        if !(self.sigma_max >= self.sigma_min) || self.sigma_max.is_nan() {
            return Err(bad("sigma_max", self.sigma_max, "[sigma_min, ∞)"));
        }
        if self.delta_v0 > self.delta_vmax0 {
            return Err(bad("delta_v0", self.delta_v0, "(0, delta_vmax0]"));
        }
        if self.max_iter == 0 {
            return Err(bad("max_iter", self.max_iter, "[1, ∞)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverParams::default().validate().unwrap();
    }

    #[test]
    fn kappa_delta_must_exceed_one() {
        let p = SolverParams {
            kappa_delta: 0.5,
            ..Default::default()
        };
        match p.validate() {
            Err(SolverError::Config { field, interval, .. }) => {
                assert_eq!(field, "kappa_delta");
                assert_eq!(interval, "(1, ∞)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_interval_is_open() {
        for v in [0.0, 1.0, -0.1, f64::NAN] {
            let p = SolverParams {
                kappa_v1: v,
                ..Default::default()
            };
            assert!(p.validate().is_err(), "{v}");
        }
    }

    #[test]
    fn sigma_max_below_sigma_min_is_rejected() {
        let p = SolverParams {
            sigma_max: 1e-13,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn initial_radius_above_cap_is_rejected() {
        let p = SolverParams {
            delta_v0: 10.0,
            delta_vmax0: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
