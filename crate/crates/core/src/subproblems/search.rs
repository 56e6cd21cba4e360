//! One-dimensional searches on the monotone ratio `λ/‖step(λ)‖` used by the
//! contraction procedures.
//!
//! Both searches run the Illinois variant of regula falsi on
//! `h(x) = ln ratio(eˣ) − ln target` over a bracket in `x = ln λ`.

use nalgebra::{DMatrix, DVector};

use super::nullspace::NullBasis;
use super::tangential::solve_tangential_regularized;
use super::trs::solve_regularized;
use crate::error::{Result, SolverError};

/// Maximum ratio evaluations in a single search.
pub const MAX_SEARCH_EVALS: usize = 300;
/// Relative accuracy of the σ_min crossing in the F-contract search.
pub const RATIO_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSearch {
    pub lambda: f64,
    /// `n(λ)` for the V search, `t(λ)` for the F search.
    pub step: DVector<f64>,
    pub ratio: f64,
    pub evaluations: usize,
}

struct Searcher<F> {
    eval: F,
    target: f64,
    evals: usize,
}

impl<F> Searcher<F>
where
    F: Fn(f64) -> Result<(f64, DVector<f64>)>,
{
    fn probe(&mut self, lambda: f64) -> Result<(f64, RatioSearch)> {
        if self.evals >= MAX_SEARCH_EVALS {
            return Err(SolverError::Bracket { iterations: self.evals });
        }
        self.evals += 1;
        let (ratio, step) = (self.eval)(lambda)?;
        let h = (ratio / self.target).ln();
        Ok((
            h,
            RatioSearch {
                lambda,
                step,
                ratio,
                evaluations: self.evals,
            },
        ))
    }

    /// `lo` is a λ known to satisfy `ratio < target` (never evaluated, may be
    /// zero); `hi` an evaluated point with `ratio ≥ target`. Returns the first
    /// accepted point, or the right end once the bracket collapses.
    fn run(&mut self, lo: f64, hi: RatioSearch, accept: impl Fn(f64) -> bool) -> Result<RatioSearch> {
        let mut hi = hi;
        let mut h_hi = (hi.ratio / self.target).ln();
        if accept(hi.ratio) {
            return Ok(hi);
        }
        let collapsed = |a: f64, b: f64| b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);

        // Phase A: find an evaluated left end with h < 0.
        let lo_x = (lo > 0.0).then(|| lo.ln());
        let (mut lo_pt, h_lo) = loop {
            let xb = hi.lambda.ln();
            let x = match lo_x {
                Some(a) => {
                    if collapsed(a, xb) {
                        return Ok(hi);
                    }
                    0.5 * (a + xb)
                }
                None => xb - 3.0 * std::f64::consts::LN_10,
            };
            let (h, p) = self.probe(x.exp())?;
            if accept(p.ratio) {
                return Ok(p);
            }
            if h < 0.0 {
                break (p, h);
            }
            if lo_x.is_none() && x.exp() < f64::MIN_POSITIVE * 1e10 {
                return Err(SolverError::Bracket { iterations: self.evals });
            }
            hi = p;
            h_hi = h;
        };

        // Phase B: Illinois iterations on the evaluated bracket.
        let (mut f_lo, mut f_hi) = (h_lo, h_hi);
        let mut last_side = 0i8;
        loop {
            let (xa, xb) = (lo_pt.lambda.ln(), hi.lambda.ln());
            if collapsed(xa, xb) {
                return Ok(hi);
            }
            let mut x = (xa * f_hi - xb * f_lo) / (f_hi - f_lo);
            if !(x > xa && x < xb) {
                x = 0.5 * (xa + xb);
            }
            let (h, p) = self.probe(x.exp())?;
            if accept(p.ratio) {
                return Ok(p);
            }
            if h < 0.0 {
                lo_pt = p;
                f_lo = h;
                if last_side == -1 {
                    f_hi *= 0.5;
                }
                last_side = -1;
            } else {
                hi = p;
                f_hi = h;
                if last_side == 1 {
                    f_lo *= 0.5;
                }
                last_side = 1;
            }
        }
    }
}

/// V-Contract multiplier choice.
///
/// Tries `λ̂ = λv + √(σ_min‖gv‖)`; if its ratio exceeds `σ_max`, searches
/// `(λv, λ̂)` for a ratio inside `[σ_min, σ_max]`. The caller guarantees
/// `λv < σ_min‖n(λv)‖`.
pub fn v_contract_lambda_search(
    gv: &DVector<f64>,
    hv: &DMatrix<f64>,
    lambda_v: f64,
    sigma_min: f64,
    sigma_max: f64,
) -> Result<RatioSearch> {
    let gnorm = gv.norm();
    if gnorm == 0.0 {
        return Err(SolverError::Contract("V-contract search with ‖gv‖ = 0".into()));
    }
    let eval = |lambda: f64| -> Result<(f64, DVector<f64>)> {
        let n = solve_regularized(gv, hv, lambda)?;
        Ok((lambda / n.norm(), n))
    };
    let lambda_hat = lambda_v + (sigma_min * gnorm).sqrt();
    let mut s = Searcher {
        eval,
        target: sigma_max,
        evals: 0,
    };
    let (_, hat) = s.probe(lambda_hat)?;
    if hat.ratio <= sigma_max {
        return Ok(hat);
    }
    let found = s.run(lambda_v, hat, |r| (sigma_min..=sigma_max).contains(&r))?;
    if (sigma_min..=sigma_max).contains(&found.ratio) {
        Ok(found)
    } else {
        Err(SolverError::Bracket {
            iterations: found.evaluations,
        })
    }
}

/// F-Contract multiplier choice: the smallest `λ > λf` (to relative accuracy
/// [`RATIO_RTOL`]) with `λ/‖n + t(λ)‖ ≥ σ_min`.
///
/// `s_norm` is `‖n + t(λf)‖` for the step that was rejected; the caller
/// guarantees `λf < σ_min·s_norm`.
pub fn f_contract_lambda_search(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    n: &DVector<f64>,
    lambda_f: f64,
    s_norm: f64,
    sigma_min: f64,
    basis: &NullBasis,
) -> Result<RatioSearch> {
    if !(lambda_f < sigma_min * s_norm) {
        return Err(SolverError::Contract(format!(
            "F-contract search entered with ratio λf/‖s‖ = {} ≥ σ_min",
            lambda_f / s_norm
        )));
    }
    let eval = |lambda: f64| -> Result<(f64, DVector<f64>)> {
        let t = solve_tangential_regularized(g, h, n, lambda, basis)?;
        Ok((lambda / (n + &t).norm(), t))
    };
    let mut s = Searcher {
        eval,
        target: sigma_min,
        evals: 0,
    };
    // ‖n + t(λ)‖ is nonincreasing in λ, so λ = σ_min‖s‖ already reaches the target.
    let mut trial = sigma_min * s_norm;
    let hi = loop {
        let (hval, p) = s.probe(trial)?;
        if hval >= 0.0 {
            break p;
        }
        trial *= 2.0;
    };
    let accept = |r: f64| r >= sigma_min && r <= sigma_min * (1.0 + RATIO_RTOL);
    s.run(lambda_f, hi, accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblems::nullspace::null_space_basis;
    use approx::assert_relative_eq;

    fn v(a: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(a)
    }

    #[test]
    fn v_search_returns_lambda_hat_when_ratio_is_small() {
        let r = v_contract_lambda_search(&v(&[1.0, 0.0]), &DMatrix::identity(2, 2), 0.0, 1e-12, 1e20)
            .unwrap();
        assert_eq!(r.lambda, 1e-6);
        assert_relative_eq!(r.step[0], -1.0 / (1.0 + 1e-6), epsilon = 1e-15);
        assert!(r.ratio <= 1e20);
        assert_relative_eq!(r.ratio, 1e-6 * (1.0 + 1e-6), max_relative = 1e-12);
    }

    #[test]
    fn v_search_bisects_when_lambda_hat_overshoots() {
        // φ(λ) = λ(1+λ) for H = 1, g = 1. Force the search with a tiny σ_max.
        let (smin, smax) = (1e-12, 1e-9);
        let r = v_contract_lambda_search(&v(&[1.0]), &DMatrix::identity(1, 1), 0.0, smin, smax).unwrap();
        let phi = r.lambda * (1.0 + r.lambda);
        assert!(phi >= smin && phi <= smax, "φ = {phi}");
        assert!(r.lambda > 0.0 && r.lambda < 1e-6);
        assert!(r.evaluations <= 50);
    }

    #[test]
    fn f_search_trivial_null_space_closed_form() {
        let j = DMatrix::identity(2, 2);
        let b = null_space_basis(&j);
        let n = v(&[0.3, 0.4]);
        let sigma = 1e-3;
        let r = f_contract_lambda_search(&v(&[1.0, 1.0]), &DMatrix::identity(2, 2), &n, 0.0, 0.5, sigma, &b)
            .unwrap();
        assert!(r.step.norm() == 0.0);
        assert!(r.ratio >= sigma);
        assert_relative_eq!(r.lambda, sigma * 0.5, max_relative = 1e-8);
    }

    #[test]
    fn f_search_one_dimensional_reduced_model() {
        // J = (1 0), n = (0.1, 0), g = (1, 1), H = I: t(λ) = (0, −1/(1+λ)) and
        // ratio(λ) = λ / √(0.01 + 1/(1+λ)²).
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = null_space_basis(&j);
        let n = v(&[0.1, 0.0]);
        let sigma = 0.5;
        let r = f_contract_lambda_search(&v(&[1.0, 1.0]), &DMatrix::identity(2, 2), &n, 0.0, 1.0, sigma, &b)
            .unwrap();
        let ratio = |l: f64| l / (0.01 + 1.0 / (1.0 + l).powi(2)).sqrt();
        // Closed-form root by bisection on the analytic ratio.
        let (mut a, mut c) = (0.0, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (a + c);
            if ratio(m) < sigma {
                a = m
            } else {
                c = m
            }
        }
        assert!(r.ratio >= sigma);
        assert_relative_eq!(r.lambda, c, max_relative = 1e-8);
        assert_relative_eq!(r.step[1], -1.0 / (1.0 + r.lambda), max_relative = 1e-12);
    }

    #[test]
    fn f_search_rejects_violated_precondition() {
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = null_space_basis(&j);
        let res = f_contract_lambda_search(
            &v(&[1.0, 1.0]),
            &DMatrix::identity(2, 2),
            &v(&[0.1, 0.0]),
            1.0,
            1.0,
            1e-12,
            &b,
        );
        assert!(matches!(res, Err(SolverError::Contract(_))));
    }
}
