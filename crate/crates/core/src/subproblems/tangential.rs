//! Tangential subproblems solved in null-space coordinates.
//!
//! Writing `n = n^R + n^N` with `n^N = ZZᵀn`, the tangential problem
//! `min m^f(n+t) s.t. Jt = 0, ‖n+t‖ ≤ δs` becomes a trust-region problem in
//! `τ` with `n + t = n^R + Zτ`, so `t = Zτ − n^N` and the reduced radius is
//! `√(δs² − ‖n^R‖²)`.

use nalgebra::{DMatrix, DVector};

use super::nullspace::NullBasis;
use super::trs::{solve_regularized, solve_trs};
use crate::error::{Result, SolverError};
use crate::problems::{min_norm_lstsq, symmetrize};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentialSolution {
    pub t: DVector<f64>,
    pub yf: DVector<f64>,
    pub lambda_f: f64,
    pub on_boundary: bool,
}

fn reduced_hessian(h: &DMatrix<f64>, basis: &NullBasis) -> DMatrix<f64> {
    let mut hr = basis.z.tr_mul(&(h * &basis.z));
    symmetrize(&mut hr);
    hr
}

/// Minimum-norm `yf` solving `Jᵀyf = −(g + (H + λI)(n + t))` in least squares.
pub fn tangential_multipliers(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    jac: &DMatrix<f64>,
    s: &DVector<f64>,
    lambda: f64,
) -> DVector<f64> {
    let rhs = -(g + h * s + s * lambda);
    min_norm_lstsq(&jac.transpose(), &rhs)
}

pub fn solve_tangential(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    jac: &DMatrix<f64>,
    n: &DVector<f64>,
    delta_s: f64,
    basis: &NullBasis,
) -> Result<TangentialSolution> {
    let n_null = basis.project(n);
    let n_range = n - &n_null;
    let radius_sq = delta_s * delta_s - n_range.norm_squared();
    if basis.is_trivial() || radius_sq <= 0.0 {
        if radius_sq < -1e-12 * delta_s * delta_s {
            return Err(SolverError::Contract(format!(
                "range-space part of the normal step ({}) exceeds δs ({delta_s})",
                n_range.norm()
            )));
        }
        let t = -n_null;
        let s = n + &t;
        return Ok(TangentialSolution {
            yf: tangential_multipliers(g, h, jac, &s, 0.0),
            t,
            lambda_f: 0.0,
            on_boundary: false,
        });
    }
    let gr = basis.z.tr_mul(&(g + h * &n_range));
    let hr = reduced_hessian(h, basis);
    let red = solve_trs(&gr, &hr, radius_sq.sqrt())?;
    let t = &basis.z * &red.step - n_null;
    let s = n + &t;
    Ok(TangentialSolution {
        yf: tangential_multipliers(g, h, jac, &s, red.multiplier),
        t,
        lambda_f: red.multiplier,
        on_boundary: red.on_boundary,
    })
}

/// `t = Zτ` with `(ZᵀHZ + λI)τ = −Zᵀ(g + (H + λI)n)`.
pub fn solve_tangential_regularized(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    n: &DVector<f64>,
    lambda_f: f64,
    basis: &NullBasis,
) -> Result<DVector<f64>> {
    if basis.is_trivial() {
        return Ok(DVector::zeros(n.len()));
    }
    let gr = basis.z.tr_mul(&(g + h * n + n * lambda_f));
    let hr = reduced_hessian(h, basis);
    let tau = solve_regularized(&gr, &hr, lambda_f)
        .map_err(|_| SolverError::NotPositiveDefinite("ZᵀHZ + λI in the tangential solve"))?;
    Ok(&basis.z * tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblems::nullspace::null_space_basis;
    use approx::assert_relative_eq;

    fn v(a: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(a)
    }

    fn one_dim() -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
        (
            v(&[1.0, 1.0]),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            v(&[0.1, 0.0]),
        )
    }

    #[test]
    fn reduced_example_hits_boundary() {
        // min τ + ½τ² on |τ| ≤ √0.99: the unconstrained minimizer τ = −1 lies
        // outside, so τ = −√0.99 with λf = 1/√0.99 − 1.
        let (g, h, j, n) = one_dim();
        let b = null_space_basis(&j);
        let sol = solve_tangential(&g, &h, &j, &n, 1.0, &b).unwrap();
        let r = 0.99f64.sqrt();
        assert!(sol.on_boundary);
        assert_relative_eq!(sol.t[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(sol.t[1], -r, epsilon = 1e-9);
        assert_relative_eq!(sol.lambda_f, 1.0 / r - 1.0, epsilon = 1e-8);
        assert_relative_eq!((&n + &sol.t).norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn reduced_example_interior_with_larger_radius() {
        let (g, h, j, n) = one_dim();
        let b = null_space_basis(&j);
        let sol = solve_tangential(&g, &h, &j, &n, 2.0, &b).unwrap();
        assert!(!sol.on_boundary);
        assert_eq!(sol.lambda_f, 0.0);
        assert_relative_eq!(sol.t[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn regularized_reduced_example() {
        let (g, h, j, n) = one_dim();
        let b = null_space_basis(&j);
        let t = solve_tangential_regularized(&g, &h, &n, 1.0, &b).unwrap();
        assert_relative_eq!(t[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(t[1], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn trivial_null_space() {
        let j = DMatrix::identity(2, 2);
        let b = null_space_basis(&j);
        let g = v(&[1.0, -2.0]);
        let h = DMatrix::identity(2, 2);
        let n = v(&[0.1, 0.2]);
        let sol = solve_tangential(&g, &h, &j, &n, 1.0, &b).unwrap();
        assert_eq!(sol.t, v(&[0.0, 0.0]));
        assert_eq!(sol.lambda_f, 0.0);
        let want = -(&g + &h * &n);
        assert!((j.tr_mul(&sol.yf) - want).norm() < 1e-12);
        assert_eq!(solve_tangential_regularized(&g, &h, &n, 3.0, &b).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn stationary_objective_model_keeps_normal_step() {
        // g + Hn = 0 gives m^f(n+t) = m^f(n) + ½‖t‖², minimized by t = 0 even
        // though n has a null-space component.
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = null_space_basis(&j);
        let n = v(&[0.2, 0.3]);
        let h = DMatrix::identity(2, 2);
        let g = -(&h * &n);
        let sol = solve_tangential(&g, &h, &j, &n, 1.0, &b).unwrap();
        assert!(sol.t.norm() < 1e-14);
        assert_eq!(sol.lambda_f, 0.0);

        let nr = v(&[0.2, 0.0]);
        let g = -(&h * &nr);
        let sol = solve_tangential(&g, &h, &j, &nr, 1.0, &b).unwrap();
        assert!(sol.t.norm() < 1e-14);
    }

    #[test]
    fn regularized_step_norm_shrinks_toward_range_part() {
        let (g, h, _, n) = one_dim();
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = null_space_basis(&j);
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let lam = 10f64.powi(k - 3);
            let t = solve_tangential_regularized(&g, &h, &n, lam, &b).unwrap();
            let norm = (&n + t).norm();
            assert!(norm <= prev);
            prev = norm;
        }
        assert!((prev - 0.1).abs() < 1e-6);
    }
}
