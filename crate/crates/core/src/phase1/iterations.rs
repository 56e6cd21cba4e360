//! F- and V-iteration updates and their contraction procedures.
//!
//! The V-iteration radius logic is written against a bare `(g, H)` model so
//! the target-following phase can drive the same machinery on its own merit
//! function.

use nalgebra::{DMatrix, DVector};

use super::params::SolverParams;
use super::steps::{update_vmax_f, update_vmax_v, StepBundle};
use super::{FunnelState, IterKind};
use crate::error::Result;
use crate::problems::EvalPoint;
use crate::subproblems::{f_contract_lambda_search, solve_regularized, v_contract_lambda_search};

/// Outcome class of a V-type iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VBranch {
    Accept,
    Contract,
    Expand,
}

impl VBranch {
    pub fn kind(self) -> IterKind {
        match self {
            VBranch::Accept => IterKind::VSuccess,
            VBranch::Contract => IterKind::VContract,
            VBranch::Expand => IterKind::VExpand,
        }
    }
}

/// Trust-region radius and its cap for a V-type model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VRadii {
    pub delta: f64,
    pub delta_max: f64,
}

/// `‖n‖ = δ_max`, tested to a relative tolerance of `1e−10`.
fn at_cap(n_norm: f64, delta_max: f64) -> bool {
    (n_norm - delta_max).abs() <= 1e-10 * delta_max
}

pub fn v_branch(rho: f64, lambda: f64, n_norm: f64, sigma: f64, delta_max: f64, params: &SolverParams) -> VBranch {
    if rho >= params.kappa_rho_accept && (lambda <= sigma * n_norm || at_cap(n_norm, delta_max)) {
        VBranch::Accept
    } else if rho < params.kappa_rho_accept {
        VBranch::Contract
    } else {
        VBranch::Expand
    }
}

/// New radius after a rejected V-type step.
pub fn v_contract(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    n_norm: f64,
    lambda: f64,
    params: &SolverParams,
) -> Result<f64> {
    if lambda < params.sigma_min * n_norm {
        let found = v_contract_lambda_search(g, h, lambda, params.sigma_min, params.sigma_max)?;
        Ok(found.step.norm())
    } else {
        let n_lambda = solve_regularized(g, h, params.gamma_lambda * lambda)?;
        let norm = n_lambda.norm();
        Ok(if norm >= params.gamma_c_v * n_norm {
            norm
        } else {
            params.gamma_c_v * n_norm
        })
    }
}

/// Radius update for each V branch.
#[allow(clippy::too_many_arguments)]
pub fn v_radii_update(
    branch: VBranch,
    radii: VRadii,
    n_norm: f64,
    lambda: f64,
    sigma: f64,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    params: &SolverParams,
) -> Result<VRadii> {
    Ok(match branch {
        VBranch::Accept => {
            let delta_max = radii.delta_max.max(params.gamma_e * n_norm);
            VRadii {
                delta: delta_max.min(radii.delta.max(params.gamma_e * n_norm)),
                delta_max,
            }
        }
        VBranch::Contract => VRadii {
            delta: v_contract(g, h, n_norm, lambda, params)?,
            delta_max: radii.delta_max,
        },
        VBranch::Expand => VRadii {
            delta: radii.delta_max.min(lambda / sigma),
            delta_max: radii.delta_max,
        },
    })
}

/// New objective radius after a rejected F-step.
pub fn f_contract(state: &FunnelState, bundle: &StepBundle, params: &SolverParams) -> Result<f64> {
    let s_norm = bundle.s_norm();
    if bundle.lambda_f < params.sigma_min * s_norm {
        let found = f_contract_lambda_search(
            &state.e.g,
            &state.hk,
            &bundle.n,
            bundle.lambda_f,
            s_norm,
            params.sigma_min,
            &bundle.basis,
        )?;
        Ok((&bundle.n + found.step).norm())
    } else {
        Ok(params.gamma_c_f * s_norm)
    }
}

/// Applies an F-iteration. On acceptance `trial` becomes the new iterate and
/// the caller must refresh the cached models.
pub fn f_iteration(
    state: &mut FunnelState,
    bundle: &StepBundle,
    trial: EvalPoint,
    rho_f: f64,
    params: &SolverParams,
) -> Result<IterKind> {
    let s_norm = bundle.s_norm();
    let kind = if rho_f >= params.kappa_rho_accept {
        state.vmax = update_vmax_f(state.vmax, trial.v(), s_norm, params);
        state.delta_f = state.delta_f.max(params.gamma_e * s_norm);
        state.e = trial;
        IterKind::FSuccess
    } else {
        state.delta_f = f_contract(state, bundle, params)?;
        IterKind::FContract
    };
    state.prev_rho_v = f64::INFINITY;
    state.prev_kind = Some(kind);
    Ok(kind)
}

/// Applies a V-iteration; see [`f_iteration`] for the acceptance contract.
pub fn v_iteration(
    state: &mut FunnelState,
    bundle: &StepBundle,
    trial: EvalPoint,
    rho_v: f64,
    params: &SolverParams,
) -> Result<IterKind> {
    let n_norm = bundle.n_norm();
    let branch = v_branch(rho_v, bundle.lambda_v, n_norm, state.sigma_v, state.delta_vmax, params);
    let radii = v_radii_update(
        branch,
        VRadii {
            delta: state.delta_v,
            delta_max: state.delta_vmax,
        },
        n_norm,
        bundle.lambda_v,
        state.sigma_v,
        &state.model.gv,
        &state.model.hv,
        params,
    )?;
    if branch == VBranch::Accept {
        state.vmax = update_vmax_v(state.vmax, state.e.v(), trial.v(), params);
        state.e = trial;
    }
    state.delta_v = radii.delta;
    state.delta_vmax = radii.delta_max;
    state.prev_rho_v = rho_v;
    let kind = branch.kind();
    state.prev_kind = Some(kind);
    Ok(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> SolverParams {
        SolverParams::default()
    }

    #[test]
    fn branch_selection() {
        let params = p();
        assert_eq!(v_branch(1.0, 0.0, 0.5, 1e-12, 1e8, &params), VBranch::Accept);
        assert_eq!(v_branch(0.0, 0.0, 0.5, 1e-12, 1e8, &params), VBranch::Contract);
        assert_eq!(v_branch(1.0, 1.0, 0.5, 1e-12, 1e8, &params), VBranch::Expand);
        // At the cap a large multiplier still accepts.
        assert_eq!(v_branch(1.0, 1.0, 1e8, 1e-12, 1e8, &params), VBranch::Accept);
    }

    #[test]
    fn contract_with_zero_multiplier_uses_lambda_hat() {
        let g = DVector::from_row_slice(&[1.0, 0.0]);
        let h = DMatrix::identity(2, 2);
        let d = v_contract(&g, &h, 1.0, 0.0, &p()).unwrap();
        let want = 1.0 / (1.0 + 1e-6);
        assert!((d - want).abs() < 1e-15);
        assert!(d < 1.0);
    }

    #[test]
    fn contract_with_large_multiplier() {
        // H = I, g = (4, 0): n(λ) = −g/(1+λ). λv = 3 gives ‖n‖ = 1.
        let g = DVector::from_row_slice(&[4.0, 0.0]);
        let h = DMatrix::identity(2, 2);
        let d = v_contract(&g, &h, 1.0, 3.0, &p()).unwrap();
        assert!((d - 4.0 / 7.0).abs() < 1e-15);
        // Doubling λv = 1e6 roughly halves the step: no floor.
        let g = DVector::from_row_slice(&[1e6 + 1.0, 0.0]);
        let d = v_contract(&g, &h, 1.0, 1e6, &p()).unwrap();
        assert!((d - (1e6 + 1.0) / (2e6 + 1.0)).abs() < 1e-15);
        // Strong negative curvature: λv = 1e4 gives ‖n‖ = 1 and doubling it
        // shrinks the step to about 1e−4 < γc‖n‖, so the floor γc‖n‖ applies.
        let g = DVector::from_row_slice(&[1.0, 0.0]);
        let h = DMatrix::from_row_slice(2, 2, &[-1e4 + 1.0, 0.0, 0.0, 1.0]);
        let d = v_contract(&g, &h, 1.0, 1e4, &p()).unwrap();
        assert_eq!(d, 1e-2);
    }

    #[test]
    fn radii_updates() {
        let params = p();
        let g = DVector::from_row_slice(&[1.0]);
        let h = DMatrix::identity(1, 1);
        let r = VRadii {
            delta: 1.0,
            delta_max: 1e8,
        };
        let acc = v_radii_update(VBranch::Accept, r, 1.0, 0.0, 1e-12, &g, &h, &params).unwrap();
        assert_eq!(acc, VRadii { delta: 2.0, delta_max: 1e8 });
        let capped = v_radii_update(
            VBranch::Accept,
            VRadii {
                delta: 1.0,
                delta_max: 1.0,
            },
            1.0,
            0.0,
            1.0,
            &g,
            &h,
            &params,
        )
        .unwrap();
        assert_eq!(capped, VRadii { delta: 2.0, delta_max: 2.0 });
        let exp = v_radii_update(VBranch::Expand, r, 0.5, 3.0, 1.0, &g, &h, &params).unwrap();
        assert_eq!(exp.delta, 3.0);
        assert!(exp.delta > 0.5);
    }
}
