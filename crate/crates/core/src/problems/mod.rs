//! Problem interface for `min f(x) s.t. c(x) = 0`, the infeasibility
//! measure `v = ½‖c‖²` with its derivatives, and the hand-encoded corpus.

pub mod corpus;
pub mod derivcheck;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

pub use corpus::{corpus_lookup, mandatory_names};
pub use derivcheck::{check_derivatives, check_problem, perturbed_points, DerivCheckReport};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type MatrixListFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync>;

/// An equality-constrained problem given by its evaluation callbacks.
///
/// Callbacks must be pure. A non-finite value anywhere in a callback's output
/// is reported as an evaluation error by [`evaluate`].
#[derive(Clone)]
pub struct NlpProblem {
    pub name: String,
    pub n_vars: usize,
    pub n_cons: usize,
    pub x0: DVector<f64>,
    /// Reference optimal value, only used by regression checks.
    pub known_fopt: Option<f64>,
    pub eval_f: ScalarFn,
    pub eval_g: VectorFn,
    pub eval_c: VectorFn,
    pub eval_j: MatrixFn,
    pub eval_hess_f: MatrixFn,
    pub eval_hess_c: MatrixListFn,
}

impl fmt::Debug for NlpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NlpProblem")
            .field("name", &self.name)
            .field("n_vars", &self.n_vars)
            .field("n_cons", &self.n_cons)
            .field("x0", &self.x0.as_slice())
            .finish()
    }
}

impl NlpProblem {
    pub fn descriptor(&self) -> ProblemDescriptor {
        ProblemDescriptor {
            name: self.name.clone(),
            n: self.n_vars,
            m: self.n_cons,
            x0: self.x0.iter().copied().collect(),
        }
    }

    /// Same problem started from a different point.
    pub fn with_start(mut self, x0: DVector<f64>) -> Result<Self> {
        if x0.len() != self.n_vars {
            return Err(SolverError::Contract(format!(
                "starting point for {} has length {}, expected {}",
                self.name,
                x0.len(),
                self.n_vars
            )));
        }
        self.x0 = x0;
        Ok(self)
    }
}

/// JSON form of a problem used in benchmark manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub x0: Vec<f64>,
}

impl ProblemDescriptor {
    /// Resolves the descriptor against the corpus, checking dimensions and
    /// applying its starting point.
    pub fn resolve(&self) -> Result<NlpProblem> {
        let p = corpus_lookup(&self.name)?;
        if p.n_vars != self.n || p.n_cons != self.m {
            return Err(SolverError::Contract(format!(
                "descriptor {} declares n={}, m={} but the corpus has n={}, m={}",
                self.name, self.n, self.m, p.n_vars, p.n_cons
            )));
        }
        p.with_start(DVector::from_vec(self.x0.clone()))
    }
}

/// Cached first-order quantities at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub x: DVector<f64>,
    pub f: f64,
    pub g: DVector<f64>,
    pub c: DVector<f64>,
    pub jac: DMatrix<f64>,
}

impl EvalPoint {
    pub fn v(&self) -> f64 {
        infeasibility(&self.c)
    }

    /// `∇v = Jᵀc`.
    pub fn gv(&self) -> DVector<f64> {
        self.jac.tr_mul(&self.c)
    }
}

/// Second-order data: `∇²f` and every `∇²c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrder {
    pub hess_f: DMatrix<f64>,
    pub hess_c: Vec<DMatrix<f64>>,
}

fn check_finite<'a>(
    what: &'static str,
    values: impl IntoIterator<Item = &'a f64>,
    x: &DVector<f64>,
) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::Evaluation {
            what,
            detail: format!("{:?}", x.as_slice()),
        })
    }
}

fn shape_error(what: &str, got: (usize, usize), want: (usize, usize)) -> SolverError {
    SolverError::Contract(format!("{what} has shape {got:?}, expected {want:?}"))
}

/// Evaluates `f`, `g`, `c` and `J` once each at `x`.
pub fn evaluate(problem: &NlpProblem, x: &DVector<f64>) -> Result<EvalPoint> {
    let (n, m) = (problem.n_vars, problem.n_cons);
    if x.len() != n {
        return Err(shape_error("x", (x.len(), 1), (n, 1)));
    }
    let f = (problem.eval_f)(x);
    check_finite("objective", [&f], x)?;
    let g = (problem.eval_g)(x);
    if g.len() != n {
        return Err(shape_error("gradient", (g.len(), 1), (n, 1)));
    }
    check_finite("gradient", g.iter(), x)?;
    let c = (problem.eval_c)(x);
    if c.len() != m {
        return Err(shape_error("constraints", (c.len(), 1), (m, 1)));
    }
    check_finite("constraints", c.iter(), x)?;
    let jac = (problem.eval_j)(x);
    if jac.shape() != (m, n) {
        return Err(shape_error("jacobian", jac.shape(), (m, n)));
    }
    check_finite("jacobian", jac.iter(), x)?;
    Ok(EvalPoint {
        x: x.clone(),
        f,
        g,
        c,
        jac,
    })
}

/// Evaluates `∇²f` and all `∇²c_i` at `x`.
pub fn second_order(problem: &NlpProblem, x: &DVector<f64>) -> Result<SecondOrder> {
    let n = problem.n_vars;
    let hess_f = (problem.eval_hess_f)(x);
    if hess_f.shape() != (n, n) {
        return Err(shape_error("objective hessian", hess_f.shape(), (n, n)));
    }
    check_finite("objective hessian", hess_f.iter(), x)?;
    let hess_c = (problem.eval_hess_c)(x);
    if hess_c.len() != problem.n_cons {
        return Err(SolverError::Contract(format!(
            "{} constraint hessians returned, expected {}",
            hess_c.len(),
            problem.n_cons
        )));
    }
    for h in &hess_c {
        if h.shape() != (n, n) {
            return Err(shape_error("constraint hessian", h.shape(), (n, n)));
        }
        check_finite("constraint hessian", h.iter(), x)?;
    }
    Ok(SecondOrder { hess_f, hess_c })
}

/// `v = ½‖c‖²`.
pub fn infeasibility(c: &DVector<f64>) -> f64 {
    0.5 * c.norm_squared()
}

/// Quadratic model data of `v` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasModel {
    pub v: f64,
    pub gv: DVector<f64>,
    pub hv: DMatrix<f64>,
}

impl InfeasModel {
    /// `m^v(d) = v + gvᵀd + ½ dᵀHv d`.
    pub fn value(&self, d: &DVector<f64>) -> f64 {
        self.v + self.gv.dot(d) + 0.5 * d.dot(&(&self.hv * d))
    }
}

/// `gv = Jᵀc` and `Hv = JᵀJ + Σ c_i ∇²c_i`.
pub fn infeasibility_model(e: &EvalPoint, hess_c: &[DMatrix<f64>]) -> InfeasModel {
    let mut hv = e.jac.tr_mul(&e.jac);
    for (ci, hci) in e.c.iter().zip(hess_c) {
        if *ci != 0.0 {
            hv += hci * *ci;
        }
    }
    symmetrize(&mut hv);
    InfeasModel {
        v: e.v(),
        gv: e.gv(),
        hv,
    }
}

pub(crate) fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
}

/// Choice of the objective-model Hessian `H_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianMode {
    /// `H_k = ∇²f(x_k)`.
    #[default]
    ExactObjective,
    /// `H_k = ∇²f + Σ y_i ∇²c_i` with least-squares multipliers `y`.
    Lagrangian,
}

/// `∇²f + Σ y_i ∇²c_i`.
pub fn lagrangian_hessian(so: &SecondOrder, y: &DVector<f64>) -> DMatrix<f64> {
    let mut h = so.hess_f.clone();
    for (yi, hci) in y.iter().zip(&so.hess_c) {
        if *yi != 0.0 {
            h += hci * *yi;
        }
    }
    symmetrize(&mut h);
    h
}

pub fn build_hk(e: &EvalPoint, so: &SecondOrder, mode: HessianMode) -> DMatrix<f64> {
    match mode {
        HessianMode::ExactObjective => so.hess_f.clone(),
        HessianMode::Lagrangian => lagrangian_hessian(so, &least_squares_multipliers(e)),
    }
}

/// Minimum-norm minimizer of `‖g + Jᵀy‖`, via an SVD of `Jᵀ`.
pub fn least_squares_multipliers(e: &EvalPoint) -> DVector<f64> {
    min_norm_lstsq(&e.jac.transpose(), &(-&e.g))
}

/// Minimum-norm least-squares solution of `A y = b`.
pub(crate) fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DVector::zeros(0);
    }
    if rows == 0 {
        return DVector::zeros(cols);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return DVector::zeros(cols);
    }
    let tol = 1e-12 * smax * rows.max(cols) as f64;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut y = DVector::zeros(cols);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let coef = u.column(k).dot(b) / s;
            y.axpy(coef, &vt.row(k).transpose(), 1.0);
        }
    }
    y
}

/// `‖g + Jᵀy‖` with least-squares `y`.
pub fn dual_infeasibility(e: &EvalPoint) -> f64 {
    let y = least_squares_multipliers(e);
    (&e.g + e.jac.tr_mul(&y)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn point(g: &[f64], c: &[f64], jac: DMatrix<f64>) -> EvalPoint {
        EvalPoint {
            x: DVector::zeros(g.len()),
            f: 0.0,
            g: DVector::from_row_slice(g),
            c: DVector::from_row_slice(c),
            jac,
        }
    }

    #[test]
    fn infeasibility_values() {
        assert_eq!(infeasibility(&DVector::from_row_slice(&[3.0, 4.0])), 12.5);
        assert_eq!(infeasibility(&DVector::zeros(3)), 0.0);
        assert_eq!(infeasibility(&DVector::from_row_slice(&[1.0, 2.0, 2.0])), 4.5);
    }

    #[test]
    fn model_with_identity_jacobian() {
        let e = point(&[0.0, 0.0], &[3.0, 4.0], DMatrix::identity(2, 2));
        let m = infeasibility_model(&e, &[DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)]);
        assert_eq!(m.gv.as_slice(), &[3.0, 4.0]);
        assert_eq!(m.hv, DMatrix::identity(2, 2));
        assert_eq!(m.v, 12.5);
    }

    #[test]
    fn model_scalar_example() {
        // c(x) = x² − 1 at x = 2: c = 3, J = 4, ∇²c = 2.
        let e = point(&[0.0], &[3.0], DMatrix::from_element(1, 1, 4.0));
        let m = infeasibility_model(&e, &[DMatrix::from_element(1, 1, 2.0)]);
        assert_eq!(m.gv[0], 12.0);
        assert_eq!(m.hv[(0, 0)], 22.0);
    }

    #[test]
    fn affine_constraints_give_gauss_newton_hessian() {
        let jac = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, -1.0, 3.0]);
        let e = point(&[0.0; 3], &[0.5, -2.0], jac.clone());
        let m = infeasibility_model(&e, &[DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)]);
        assert_eq!(m.hv, jac.tr_mul(&jac));
        let eig = m.hv.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn least_squares_multiplier_cases() {
        let e = point(&[2.0, 3.0], &[0.0], DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let y = least_squares_multipliers(&e);
        assert_relative_eq!(y[0], -2.0, epsilon = 1e-14);
        assert_relative_eq!((&e.g + e.jac.tr_mul(&y)).norm(), 3.0, epsilon = 1e-14);

        let zero = point(&[2.0, 3.0], &[0.0], DMatrix::zeros(1, 2));
        assert_eq!(least_squares_multipliers(&zero)[0], 0.0);

        // g in Range(Jᵀ).
        let jac = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        let g = jac.tr_mul(&DVector::from_row_slice(&[0.7, -1.3]));
        let e = EvalPoint {
            x: DVector::zeros(3),
            f: 0.0,
            g: g.clone(),
            c: DVector::zeros(2),
            jac,
        };
        let y = least_squares_multipliers(&e);
        assert!((&g + e.jac.tr_mul(&y)).norm() <= 1e-10 * g.norm());
    }

    #[test]
    fn rank_deficient_multipliers_are_minimum_norm() {
        // Two identical rows: any y1 + y2 = −g1 fits; the minimum-norm one splits evenly.
        let jac = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let e = point(&[4.0, 1.0], &[0.0, 0.0], jac);
        let y = least_squares_multipliers(&e);
        assert_relative_eq!(y[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(y[1], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn lagrangian_with_zero_multipliers_is_objective_hessian() {
        let so = SecondOrder {
            hess_f: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]),
            hess_c: vec![DMatrix::identity(2, 2)],
        };
        assert_eq!(lagrangian_hessian(&so, &DVector::zeros(1)), so.hess_f);
    }
}
