//! Trust-region subproblem solver against an eigendecomposition oracle.

mod common;

use common::{check, instances, oracle};
use nalgebra::{DMatrix, DVector};
use trust_funnel::subproblems::{quadratic_value, solve_trs};

#[test]
fn trs_matches_eigen_oracle_on_random_and_hard_instances() {
    let started = std::time::Instant::now();
    let instances = instances();
    let hard = instances.iter().filter(|i| i.hard).count();
    assert!(hard >= 20, "only {hard} hard cases");
    let failures: Vec<String> = instances
        .iter()
        .enumerate()
        .filter_map(|(i, inst)| check(inst).err().map(|e| format!("instance {i} (n={}): {e}", inst.g.len())))
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(started.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn oracle_reproduces_hand_solved_cases() {
    // H = I, g = (1, 0), δ = 0.5: s = (−0.5, 0), value −0.5 + 0.125.
    let g = DVector::from_row_slice(&[1.0, 0.0]);
    let h = DMatrix::identity(2, 2);
    assert!((oracle(&g, &h, 0.5) + 0.375).abs() < 1e-14);
    // Interior: value −½‖g‖².
    assert!((oracle(&g, &h, 10.0) + 0.5).abs() < 1e-14);
    // H = diag(−1, 1), g = (0, 1), δ = 2: s = (±√3.75, −0.5), value −0.5 + 0.125 − 1.875.
    let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[-1.0, 1.0]));
    let g = DVector::from_row_slice(&[0.0, 1.0]);
    assert!((oracle(&g, &h, 2.0) + 2.25).abs() < 1e-12);
}

#[test]
fn zero_gradient_with_negative_curvature_moves_to_the_boundary() {
    let g = DVector::zeros(3);
    let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[-3.0, 1.0, 2.0]));
    let sol = solve_trs(&g, &h, 0.7).unwrap();
    assert!((sol.step.norm() - 0.7).abs() < 1e-10);
    assert!((quadratic_value(&g, &h, &sol.step) + 1.5 * 0.49).abs() < 1e-10);
}
