//! Trust-region subproblem `min gᵀs + ½sᵀHs s.t. ‖s‖ ≤ δ` and its
//! multiplier-given counterpart `(H + λI)s = −g`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, SolverError};

/// Relative accuracy of `‖s‖ = δ` on boundary solutions.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Newton iterations allowed on the secular equation.
pub const MAX_SECULAR_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TrsSolution {
    pub step: DVector<f64>,
    pub multiplier: f64,
    pub on_boundary: bool,
    pub hard_case: bool,
    /// `−(gᵀs + ½sᵀHs)`, nonnegative.
    pub model_decrease: f64,
}

/// `gᵀs + ½sᵀHs`.
pub fn quadratic_value(g: &DVector<f64>, h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * s.dot(&(h * s))
}

/// Unique solution of `(H + λI)s = −g`.
///
/// Fails with [`SolverError::NotPositiveDefinite`] when `H + λI` has no
/// Cholesky factor.
pub fn solve_regularized(g: &DVector<f64>, h: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = g.len();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] += lambda;
    }
    let chol = a
        .cholesky()
        .ok_or(SolverError::NotPositiveDefinite("H + λI in the regularized solve"))?;
    Ok(-chol.solve(g))
}

/// Coordinates of `g` in the eigenbasis of `H`, plus the decomposition.
///
/// Step functions take the shifted multiplier `μ = λ − shift` with
/// `shift = max(0, −λ₁)` and use shifted eigenvalues `dᵢ = λᵢ + shift`,
/// computed as `λᵢ − λ₁` when `λ₁ < 0`. The leftmost shifted eigenvalue is
/// then exactly zero, which keeps `‖s‖` accurate when the root lies very
/// close to the pole at `λ = −λ₁` (large radii with negative curvature).
struct Spectral {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    coeffs: DVector<f64>,
    shifted: DVector<f64>,
    shift: f64,
    lmin: f64,
    lmax_abs: f64,
}

impl Spectral {
    fn new(g: &DVector<f64>, h: &DMatrix<f64>) -> Self {
        let eig = h.clone().symmetric_eigen();
        let coeffs = eig.eigenvectors.tr_mul(g);
        let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lmax_abs = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let shift = (-lmin).max(0.0);
        let shifted = eig.eigenvalues.map(|l| if lmin < 0.0 { l - lmin } else { l });
        Self {
            eig,
            coeffs,
            shifted,
            shift,
            lmin,
            lmax_abs,
        }
    }

    /// `s = −Σ aᵢ/(dᵢ+μ) qᵢ`, skipping indices in `skip`.
    fn step(&self, mu: f64, skip: &[bool]) -> DVector<f64> {
        let mut s = DVector::zeros(self.coeffs.len());
        for (i, (&a, &d)) in self.coeffs.iter().zip(self.shifted.iter()).enumerate() {
            if !skip[i] && a != 0.0 {
                s.axpy(-a / (d + mu), &self.eig.eigenvectors.column(i), 1.0);
            }
        }
        s
    }

    /// `‖s(μ)‖` and `d‖s(μ)‖/dμ`.
    fn norm_and_slope(&self, mu: f64) -> (f64, f64) {
        let mut sq = 0.0;
        let mut cube = 0.0;
        for (&a, &d) in self.coeffs.iter().zip(self.shifted.iter()) {
            if a == 0.0 {
                continue;
            }
            let dm = d + mu;
            sq += (a / dm).powi(2);
            cube += a * a / (dm * dm * dm);
        }
        let norm = sq.sqrt();
        (norm, if norm > 0.0 { -cube / norm } else { 0.0 })
    }
}

/// Globally optimal solution of the trust-region subproblem.
///
/// Interior solutions come from a Cholesky solve. Boundary solutions solve
/// the secular equation `1/‖s(λ)‖ − 1/δ = 0` by safeguarded Newton in the
/// eigenbasis of `H`, which also supplies the leftmost eigenvector for the
/// hard case.
pub fn solve_trs(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> Result<TrsSolution> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(SolverError::Subproblem(format!("trust-region radius {delta} is not positive")));
    }
    let n = g.len();
    let finish = |step: DVector<f64>, multiplier: f64, on_boundary: bool, hard_case: bool| {
        let model_decrease = (-quadratic_value(g, h, &step)).max(0.0);
        TrsSolution {
            step,
            multiplier,
            on_boundary,
            hard_case,
            model_decrease,
        }
    };
    if n == 0 {
        return Ok(finish(DVector::zeros(0), 0.0, false, false));
    }

    // Interior Newton step when H is positive definite.
    if let Some(chol) = h.clone().cholesky() {
        let s = -chol.solve(g);
        if s.norm() <= delta {
            return Ok(finish(s, 0.0, false, false));
        }
    }

    let sp = Spectral::new(g, h);
    let gnorm = g.norm();
    let eig_tol = 1e-12 * sp.lmax_abs.max(1.0);
    let no_skip = vec![false; n];

    // Hard case: g (numerically) orthogonal to the leftmost eigenspace and the
    // pseudo-inverse step at λ = −λ₁ inside the region.
    if sp.lmin <= eig_tol {
        let left: Vec<bool> = sp.eig.eigenvalues.iter().map(|&l| l <= sp.lmin + eig_tol).collect();
        let left_weight: f64 = sp
            .coeffs
            .iter()
            .zip(&left)
            .filter(|(_, &l)| l)
            .map(|(a, _)| a * a)
            .sum::<f64>()
            .sqrt();
        if left_weight <= 1e-12 * gnorm.max(1e-300) || gnorm == 0.0 {
            let p = sp.step(0.0, &left);
            let pn = p.norm();
            if pn <= delta {
                let idx = left.iter().position(|&l| l).expect("leftmost eigenvalue exists");
                let u: DVector<f64> = sp.eig.eigenvectors.column(idx).into();
                // ‖p + τu‖ = δ with p ⊥ u in exact arithmetic; keep the general root.
                let pu = p.dot(&u);
                let disc = (pu * pu + delta * delta - pn * pn).max(0.0).sqrt();
                let candidates = [-pu + disc, -pu - disc];
                let best = candidates
                    .iter()
                    .map(|&tau| &p + &u * tau)
                    .min_by(|a, b| {
                        quadratic_value(g, h, a)
                            .partial_cmp(&quadratic_value(g, h, b))
                            .expect("finite model values")
                    })
                    .expect("two candidates");
                return Ok(finish(best, sp.shift, true, true));
            }
        }
    }

    // Boundary solution: μ = λ − max(0, −λ₁) in (0, ‖g‖/δ].
    let phi = |mu: f64| {
        let (norm, slope) = sp.norm_and_slope(mu);
        (1.0 / norm - 1.0 / delta, -slope / (norm * norm), norm)
    };
    let mut lo = 0.0f64;
    let mut hi = gnorm / delta;
    let mut mu = if sp.lmin <= 0.0 {
        // Start just right of the pole so that ‖s(μ)‖ is finite.
        hi * 1e-6
    } else {
        0.0
    };
    for _ in 0..MAX_SECULAR_ITERS * 2 {
        let (val, dval, norm) = phi(mu);
        if (norm - delta).abs() <= BOUNDARY_TOL * delta {
            return Ok(finish(sp.step(mu, &no_skip), mu + sp.shift, true, false));
        }
        if val < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu - val / dval;
        mu = if dval > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            // Bracket exhausted: accept the boundary-closest endpoint if accurate enough.
            let (_, _, norm) = phi(hi);
            if (norm - delta).abs() <= 1e-8 * delta {
                return Ok(finish(sp.step(hi, &no_skip), hi + sp.shift, true, false));
            }
            break;
        }
    }
    Err(SolverError::Subproblem(format!(
        "secular equation did not converge (δ = {delta}, λ₁ = {})",
        sp.lmin
    )))
}

/// `‖(H + λI)s + g‖`.
pub fn kkt_residual(g: &DVector<f64>, h: &DMatrix<f64>, sol: &TrsSolution) -> f64 {
    (h * &sol.step + &sol.step * sol.multiplier + g).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(a: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(a)
    }

    #[test]
    fn interior_newton_step() {
        let s = solve_trs(&v(&[1.0, 0.0]), &DMatrix::identity(2, 2), 10.0).unwrap();
        assert_eq!(s.step, v(&[-1.0, 0.0]));
        assert_eq!(s.multiplier, 0.0);
        assert!(!s.on_boundary);
    }

    #[test]
    fn boundary_one_dimensional_secular() {
        let s = solve_trs(&v(&[1.0, 0.0]), &DMatrix::identity(2, 2), 0.5).unwrap();
        assert_relative_eq!(s.step[0], -0.5, epsilon = 1e-9);
        assert_relative_eq!(s.multiplier, 1.0, epsilon = 1e-8);
        assert!(s.on_boundary);
    }

    #[test]
    fn hard_case_uses_eigenvector() {
        let h = DMatrix::from_diagonal(&v(&[-1.0, 1.0]));
        let s = solve_trs(&v(&[0.0, 1.0]), &h, 2.0).unwrap();
        assert!(s.hard_case);
        assert_relative_eq!(s.multiplier, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.step[1], -0.5, epsilon = 1e-12);
        assert_relative_eq!(s.step[0].abs(), 3.75f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.step.norm(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn regularized_examples() {
        let s = solve_regularized(&v(&[2.0, 0.0]), &DMatrix::identity(2, 2), 1.0).unwrap();
        assert!((s - v(&[-1.0, 0.0])).norm() < 1e-15);
        assert_eq!(
            solve_regularized(&v(&[0.0, 0.0]), &DMatrix::identity(2, 2), 1.0).unwrap(),
            v(&[0.0, 0.0])
        );
        let h = DMatrix::from_diagonal(&v(&[-1.0, 1.0]));
        let s = solve_regularized(&v(&[1.0, 1.0]), &h, 2.0).unwrap();
        assert_relative_eq!(s[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(s[1], -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn regularized_rejects_indefinite() {
        let h = DMatrix::from_diagonal(&v(&[-1.0, 1.0]));
        assert!(matches!(
            solve_regularized(&v(&[1.0, 1.0]), &h, 0.5),
            Err(SolverError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn zero_radius_is_rejected() {
        assert!(solve_trs(&v(&[1.0]), &DMatrix::identity(1, 1), 0.0).is_err());
    }

    #[test]
    fn zero_gradient_with_negative_curvature_moves_to_boundary() {
        let h = DMatrix::from_diagonal(&v(&[-2.0, 1.0]));
        let s = solve_trs(&v(&[0.0, 0.0]), &h, 1.5).unwrap();
        assert!(s.hard_case);
        assert_relative_eq!(s.step.norm(), 1.5, epsilon = 1e-12);
        assert_relative_eq!(s.model_decrease, 2.25, epsilon = 1e-12);
    }
}
