//! Hand-encoded equality-constrained test problems.
//!
//! Formulations follow Hock & Schittkowski, "Test Examples for Nonlinear
//! Programming Codes" (1981), and the Boggs–Tolle problems as distributed in
//! the CUTEst SIF collection (2013 release). Starting points are the
//! collection defaults. BT4 uses the CUTEst starting point
//! (4.0382, −2.9470, −0.09115) rather than the feasible point printed in
//! some HS-derived listings.
//!
//! Reference optimal values were re-derived with an independent SQP solve of
//! each encoding. Two encodings are reconstructions whose CUTEst source was
//! not available offline: BT6 shares the HS77 formulation, and BT11 uses the
//! HS79 template with constraint right-hand sides `−2 + 3√2` and `−2 + 2√2`.
//! For those two the stored reference value is that of the encoding, not the
//! value quoted by CUTEst.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::NlpProblem;
use crate::error::{Result, SolverError};

type F = fn(&[f64]) -> f64;
type V = fn(&[f64]) -> Vec<f64>;
type Hc = fn(&[f64]) -> Vec<Vec<f64>>;

/// Compact description: matrices are row-major.
struct Encoded {
    name: &'static str,
    m: usize,
    x0: &'static [f64],
    fopt: Option<f64>,
    f: F,
    g: V,
    hf: V,
    c: V,
    jac: V,
    hc: Hc,
}

impl Encoded {
    fn build(&self) -> NlpProblem {
        let n = self.x0.len();
        let m = self.m;
        let (f, g, hf, c, jac, hc) = (self.f, self.g, self.hf, self.c, self.jac, self.hc);
        NlpProblem {
            name: self.name.to_string(),
            n_vars: n,
            n_cons: m,
            x0: DVector::from_row_slice(self.x0),
            known_fopt: self.fopt,
            eval_f: Arc::new(move |x| f(x.as_slice())),
            eval_g: Arc::new(move |x| DVector::from_vec(g(x.as_slice()))),
            eval_c: Arc::new(move |x| DVector::from_vec(c(x.as_slice()))),
            eval_j: Arc::new(move |x| DMatrix::from_row_slice(m, n, &jac(x.as_slice()))),
            eval_hess_f: Arc::new(move |x| DMatrix::from_row_slice(n, n, &hf(x.as_slice()))),
            eval_hess_c: Arc::new(move |x| {
                hc(x.as_slice())
                    .into_iter()
                    .map(|h| DMatrix::from_row_slice(n, n, &h))
                    .collect()
            }),
        }
    }
}

/// Symmetric `n×n` row-major matrix from `(i, j, value)` upper-triangle entries.
fn sym(n: usize, entries: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for &(i, j, v) in entries {
        a[i * n + j] += v;
        if i != j {
            a[j * n + i] += v;
        }
    }
    a
}

fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n * n]
}

// BT3 and HS52 share these affine constraints.
fn bt3_c(x: &[f64]) -> Vec<f64> {
    vec![x[0] + 3.0 * x[1], x[2] + x[3] - 2.0 * x[4], x[1] - x[4]]
}
fn bt3_j(_: &[f64]) -> Vec<f64> {
    vec![
        1.0, 3.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 1.0, -2.0, //
        0.0, 1.0, 0.0, 0.0, -1.0,
    ]
}
fn affine3_hc(_: &[f64]) -> Vec<Vec<f64>> {
    vec![zeros(5), zeros(5), zeros(5)]
}

// HS77 and BT6.
fn hs77_f(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2)
        + (x[0] - x[1]).powi(2)
        + (x[2] - 1.0).powi(2)
        + (x[3] - 1.0).powi(4)
        + (x[4] - 1.0).powi(6)
}
fn hs77_g(x: &[f64]) -> Vec<f64> {
    vec![
        2.0 * (x[0] - 1.0) + 2.0 * (x[0] - x[1]),
        -2.0 * (x[0] - x[1]),
        2.0 * (x[2] - 1.0),
        4.0 * (x[3] - 1.0).powi(3),
        6.0 * (x[4] - 1.0).powi(5),
    ]
}
fn hs77_hf(x: &[f64]) -> Vec<f64> {
    sym(
        5,
        &[
            (0, 0, 4.0),
            (0, 1, -2.0),
            (1, 1, 2.0),
            (2, 2, 2.0),
            (3, 3, 12.0 * (x[3] - 1.0).powi(2)),
            (4, 4, 30.0 * (x[4] - 1.0).powi(4)),
        ],
    )
}
fn hs77_c(x: &[f64]) -> Vec<f64> {
    vec![
        x[0] * x[0] * x[3] + (x[3] - x[4]).sin() - 2.0 * SQRT_2,
        x[1] + x[2].powi(4) * x[3] * x[3] - 8.0 - SQRT_2,
    ]
}
fn hs77_j(x: &[f64]) -> Vec<f64> {
    let cs = (x[3] - x[4]).cos();
    vec![
        2.0 * x[0] * x[3],
        0.0,
        0.0,
        x[0] * x[0] + cs,
        -cs,
        0.0,
        1.0,
        4.0 * x[2].powi(3) * x[3] * x[3],
        2.0 * x[2].powi(4) * x[3],
        0.0,
    ]
}
fn hs77_hc(x: &[f64]) -> Vec<Vec<f64>> {
    let sn = (x[3] - x[4]).sin();
    vec![
        sym(
            5,
            &[
                (0, 0, 2.0 * x[3]),
                (0, 3, 2.0 * x[0]),
                (3, 3, -sn),
                (3, 4, sn),
                (4, 4, -sn),
            ],
        ),
        sym(
            5,
            &[
                (2, 2, 12.0 * x[2] * x[2] * x[3] * x[3]),
                (2, 3, 8.0 * x[2].powi(3) * x[3]),
                (3, 3, 2.0 * x[2].powi(4)),
            ],
        ),
    ]
}

// HS79 and BT11 differ only in the constraint constants.
fn hs79_f(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2)
        + (x[0] - x[1]).powi(2)
        + (x[1] - x[2]).powi(2)
        + (x[2] - x[3]).powi(4)
        + (x[3] - x[4]).powi(4)
}
fn hs79_g(x: &[f64]) -> Vec<f64> {
    let d23 = (x[2] - x[3]).powi(3);
    let d34 = (x[3] - x[4]).powi(3);
    vec![
        2.0 * (x[0] - 1.0) + 2.0 * (x[0] - x[1]),
        -2.0 * (x[0] - x[1]) + 2.0 * (x[1] - x[2]),
        -2.0 * (x[1] - x[2]) + 4.0 * d23,
        -4.0 * d23 + 4.0 * d34,
        -4.0 * d34,
    ]
}
fn hs79_hf(x: &[f64]) -> Vec<f64> {
    let a = 12.0 * (x[2] - x[3]).powi(2);
    let b = 12.0 * (x[3] - x[4]).powi(2);
    sym(
        5,
        &[
            (0, 0, 4.0),
            (0, 1, -2.0),
            (1, 1, 4.0),
            (1, 2, -2.0),
            (2, 2, 2.0 + a),
            (2, 3, -a),
            (3, 3, a + b),
            (3, 4, -b),
            (4, 4, b),
        ],
    )
}
fn hs79_shape_c(x: &[f64], k1: f64, k2: f64) -> Vec<f64> {
    vec![
        x[0] + x[1] * x[1] + x[2].powi(3) + k1,
        x[1] - x[2] * x[2] + x[3] + k2,
        x[0] * x[4] - 2.0,
    ]
}
fn hs79_c(x: &[f64]) -> Vec<f64> {
    hs79_shape_c(x, -2.0 - 3.0 * SQRT_2, 2.0 - 2.0 * SQRT_2)
}
fn bt11_c(x: &[f64]) -> Vec<f64> {
    hs79_shape_c(x, 2.0 - 3.0 * SQRT_2, 2.0 - 2.0 * SQRT_2)
}
fn hs79_j(x: &[f64]) -> Vec<f64> {
    vec![
        1.0,
        2.0 * x[1],
        3.0 * x[2] * x[2],
        0.0,
        0.0,
        0.0,
        1.0,
        -2.0 * x[2],
        1.0,
        0.0,
        x[4],
        0.0,
        0.0,
        0.0,
        x[0],
    ]
}
fn hs79_hc(x: &[f64]) -> Vec<Vec<f64>> {
    vec![
        sym(5, &[(1, 1, 2.0), (2, 2, 6.0 * x[2])]),
        sym(5, &[(2, 2, -2.0)]),
        sym(5, &[(0, 4, 1.0)]),
    ]
}

// HS39 and BT9.
fn hs39_f(x: &[f64]) -> f64 {
    -x[0]
}
fn hs39_g(_: &[f64]) -> Vec<f64> {
    vec![-1.0, 0.0, 0.0, 0.0]
}
fn hs39_hf(_: &[f64]) -> Vec<f64> {
    zeros(4)
}
fn hs39_c(x: &[f64]) -> Vec<f64> {
    vec![
        x[1] - x[0].powi(3) - x[2] * x[2],
        x[0] * x[0] - x[1] - x[3] * x[3],
    ]
}
fn hs39_j(x: &[f64]) -> Vec<f64> {
    vec![
        -3.0 * x[0] * x[0],
        1.0,
        -2.0 * x[2],
        0.0,
        2.0 * x[0],
        -1.0,
        0.0,
        -2.0 * x[3],
    ]
}
fn hs39_hc(x: &[f64]) -> Vec<Vec<f64>> {
    vec![
        sym(4, &[(0, 0, -6.0 * x[0]), (2, 2, -2.0)]),
        sym(4, &[(0, 0, 2.0), (3, 3, -2.0)]),
    ]
}

fn unit_sphere_c(x: &[f64]) -> Vec<f64> {
    vec![x[0] * x[0] + x[1] * x[1] - 1.0]
}
fn unit_sphere_j(x: &[f64]) -> Vec<f64> {
    vec![2.0 * x[0], 2.0 * x[1]]
}
fn unit_sphere_hc(_: &[f64]) -> Vec<Vec<f64>> {
    vec![sym(2, &[(0, 0, 2.0), (1, 1, 2.0)])]
}

const MARATOS_TAU: f64 = 1e-6;

fn table() -> Vec<Encoded> {
    vec![
        Encoded {
            name: "BT1",
            m: 1,
            x0: &[0.08, 0.06],
            fopt: Some(-1.0),
            f: |x| 100.0 * x[0] * x[0] + 100.0 * x[1] * x[1] - x[0] - 100.0,
            g: |x| vec![200.0 * x[0] - 1.0, 200.0 * x[1]],
            hf: |_| sym(2, &[(0, 0, 200.0), (1, 1, 200.0)]),
            c: unit_sphere_c,
            jac: unit_sphere_j,
            hc: unit_sphere_hc,
        },
        Encoded {
            name: "BT2",
            m: 1,
            x0: &[10.0, 10.0, 10.0],
            fopt: Some(0.032_568_200),
            f: |x| (x[0] - 1.0).powi(2) + (x[0] - x[1]).powi(2) + (x[1] - x[2]).powi(4),
            g: |x| {
                let d = (x[1] - x[2]).powi(3);
                vec![
                    2.0 * (x[0] - 1.0) + 2.0 * (x[0] - x[1]),
                    -2.0 * (x[0] - x[1]) + 4.0 * d,
                    -4.0 * d,
                ]
            },
            hf: |x| {
                let a = 12.0 * (x[1] - x[2]).powi(2);
                sym(
                    3,
                    &[(0, 0, 4.0), (0, 1, -2.0), (1, 1, 2.0 + a), (1, 2, -a), (2, 2, a)],
                )
            },
            c: |x| vec![x[0] * (1.0 + x[1] * x[1]) + x[2].powi(4) - 4.0 - 3.0 * SQRT_2],
            jac: |x| vec![1.0 + x[1] * x[1], 2.0 * x[0] * x[1], 4.0 * x[2].powi(3)],
            hc: |x| {
                vec![sym(
                    3,
                    &[(0, 1, 2.0 * x[1]), (1, 1, 2.0 * x[0]), (2, 2, 12.0 * x[2] * x[2])],
                )]
            },
        },
        Encoded {
            name: "BT3",
            m: 3,
            x0: &[20.0, 20.0, 20.0, 20.0, 20.0],
            fopt: Some(4.093_023_26),
            f: |x| {
                (x[0] - x[1]).powi(2)
                    + (x[1] + x[2] - 2.0).powi(2)
                    + (x[3] - 1.0).powi(2)
                    + (x[4] - 1.0).powi(2)
            },
            g: |x| {
                let a = x[0] - x[1];
                let b = x[1] + x[2] - 2.0;
                vec![2.0 * a, -2.0 * a + 2.0 * b, 2.0 * b, 2.0 * (x[3] - 1.0), 2.0 * (x[4] - 1.0)]
            },
            hf: |_| {
                sym(
                    5,
                    &[
                        (0, 0, 2.0),
                        (0, 1, -2.0),
                        (1, 1, 4.0),
                        (1, 2, 2.0),
                        (2, 2, 2.0),
                        (3, 3, 2.0),
                        (4, 4, 2.0),
                    ],
                )
            },
            c: bt3_c,
            jac: bt3_j,
            hc: affine3_hc,
        },
        Encoded {
            name: "BT4",
            m: 2,
            x0: &[4.0382, -2.9470, -0.09115],
            fopt: Some(-45.510_550_7),
            f: |x| x[0] - x[1] + x[1].powi(3),
            g: |x| vec![1.0, -1.0 + 3.0 * x[1] * x[1], 0.0],
            hf: |x| sym(3, &[(1, 1, 6.0 * x[1])]),
            c: |x| {
                vec![
                    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 25.0,
                    x[0] + x[1] + x[2] - 1.0,
                ]
            },
            jac: |x| vec![2.0 * x[0], 2.0 * x[1], 2.0 * x[2], 1.0, 1.0, 1.0],
            hc: |_| vec![sym(3, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]), zeros(3)],
        },
        Encoded {
            name: "BT5",
            m: 2,
            x0: &[2.0, 2.0, 2.0],
            fopt: Some(961.715_172),
            f: |x| {
                1000.0 - x[0] * x[0] - 2.0 * x[1] * x[1] - x[2] * x[2] - x[0] * x[1] - x[0] * x[2]
            },
            g: |x| {
                vec![
                    -2.0 * x[0] - x[1] - x[2],
                    -4.0 * x[1] - x[0],
                    -2.0 * x[2] - x[0],
                ]
            },
            hf: |_| {
                sym(
                    3,
                    &[(0, 0, -2.0), (0, 1, -1.0), (0, 2, -1.0), (1, 1, -4.0), (2, 2, -2.0)],
                )
            },
            c: |x| {
                vec![
                    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 25.0,
                    8.0 * x[0] + 14.0 * x[1] + 7.0 * x[2] - 56.0,
                ]
            },
            jac: |x| vec![2.0 * x[0], 2.0 * x[1], 2.0 * x[2], 8.0, 14.0, 7.0],
            hc: |_| vec![sym(3, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]), zeros(3)],
        },
        Encoded {
            name: "BT6",
            m: 2,
            x0: &[2.0, 2.0, 2.0, 2.0, 2.0],
            fopt: Some(0.241_505_13),
            f: hs77_f,
            g: hs77_g,
            hf: hs77_hf,
            c: hs77_c,
            jac: hs77_j,
            hc: hs77_hc,
        },
        Encoded {
            name: "BT7",
            m: 3,
            x0: &[-2.0, 1.0, 1.0, 1.0, 1.0],
            fopt: Some(360.379_767),
            f: |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (x[0] - 1.0).powi(2),
            g: |x| {
                let r = x[1] - x[0] * x[0];
                vec![-400.0 * x[0] * r + 2.0 * (x[0] - 1.0), 200.0 * r, 0.0, 0.0, 0.0]
            },
            hf: |x| {
                sym(
                    5,
                    &[
                        (0, 0, 1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0),
                        (0, 1, -400.0 * x[0]),
                        (1, 1, 200.0),
                    ],
                )
            },
            c: |x| {
                vec![
                    x[0] * x[1] - x[2] * x[2] - 1.0,
                    x[1] * x[1] - x[3] * x[3] + x[0],
                    x[4] + x[0] - 0.5,
                ]
            },
            jac: |x| {
                vec![
                    x[1],
                    x[0],
                    -2.0 * x[2],
                    0.0,
                    0.0,
                    1.0,
                    2.0 * x[1],
                    0.0,
                    -2.0 * x[3],
                    0.0,
                    1.0,
                    0.0,
                    0.0,
                    0.0,
                    1.0,
                ]
            },
            hc: |_| {
                vec![
                    sym(5, &[(0, 1, 1.0), (2, 2, -2.0)]),
                    sym(5, &[(1, 1, 2.0), (3, 3, -2.0)]),
                    zeros(5),
                ]
            },
        },
        Encoded {
            name: "BT8",
            m: 2,
            x0: &[1.0, 1.0, 1.0, 0.0, 0.0],
            fopt: Some(1.0),
            f: |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2],
            g: |x| vec![2.0 * x[0], 2.0 * x[1], 2.0 * x[2], 0.0, 0.0],
            hf: |_| sym(5, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]),
            c: |x| {
                vec![
                    x[0] - x[3] * x[3] + x[1] * x[1] - 1.0,
                    x[0] * x[0] + x[1] * x[1] - x[4] * x[4] - 1.0,
                ]
            },
            jac: |x| {
                vec![
                    1.0,
                    2.0 * x[1],
                    0.0,
                    -2.0 * x[3],
                    0.0,
                    2.0 * x[0],
                    2.0 * x[1],
                    0.0,
                    0.0,
                    -2.0 * x[4],
                ]
            },
            hc: |_| {
                vec![
                    sym(5, &[(1, 1, 2.0), (3, 3, -2.0)]),
                    sym(5, &[(0, 0, 2.0), (1, 1, 2.0), (4, 4, -2.0)]),
                ]
            },
        },
        Encoded {
            name: "BT9",
            m: 2,
            x0: &[2.0, 2.0, 2.0, 2.0],
            fopt: Some(-1.0),
            f: hs39_f,
            g: hs39_g,
            hf: hs39_hf,
            c: hs39_c,
            jac: hs39_j,
            hc: hs39_hc,
        },
        Encoded {
            name: "BT10",
            m: 2,
            x0: &[2.0, 2.0],
            fopt: Some(-1.0),
            f: |x| -x[0],
            g: |_| vec![-1.0, 0.0],
            hf: |_| zeros(2),
            c: |x| vec![x[1] - x[0].powi(3), -x[0] * x[0] + x[1]],
            jac: |x| vec![-3.0 * x[0] * x[0], 1.0, -2.0 * x[0], 1.0],
            hc: |x| vec![sym(2, &[(0, 0, -6.0 * x[0])]), sym(2, &[(0, 0, -2.0)])],
        },
        Encoded {
            name: "BT11",
            m: 3,
            x0: &[2.0, 2.0, 2.0, 2.0, 2.0],
            fopt: Some(0.644_080_43),
            f: hs79_f,
            g: hs79_g,
            hf: hs79_hf,
            c: bt11_c,
            jac: hs79_j,
            hc: hs79_hc,
        },
        Encoded {
            name: "BT12",
            m: 3,
            x0: &[15.811, 1.5811, 0.0, 15.083, 3.7164],
            fopt: Some(6.188_118_81),
            f: |x| 0.01 * x[0] * x[0] + x[1] * x[1],
            g: |x| vec![0.02 * x[0], 2.0 * x[1], 0.0, 0.0, 0.0],
            hf: |_| sym(5, &[(0, 0, 0.02), (1, 1, 2.0)]),
            c: |x| {
                vec![
                    x[0] + x[1] - x[2] * x[2] - 25.0,
                    x[0] * x[0] + x[1] * x[1] - x[3] * x[3] - 25.0,
                    x[0] - x[4] * x[4] - 2.0,
                ]
            },
            jac: |x| {
                vec![
                    1.0,
                    1.0,
                    -2.0 * x[2],
                    0.0,
                    0.0,
                    2.0 * x[0],
                    2.0 * x[1],
                    0.0,
                    -2.0 * x[3],
                    0.0,
                    1.0,
                    0.0,
                    0.0,
                    0.0,
                    -2.0 * x[4],
                ]
            },
            hc: |_| {
                vec![
                    sym(5, &[(2, 2, -2.0)]),
                    sym(5, &[(0, 0, 2.0), (1, 1, 2.0), (3, 3, -2.0)]),
                    sym(5, &[(4, 4, -2.0)]),
                ]
            },
        },
        Encoded {
            name: "BYRDSPHR",
            m: 2,
            x0: &[5.0, 0.0001, -0.0001],
            fopt: Some(-4.683_300_49),
            f: |x| -x[0] - x[1] - x[2],
            g: |_| vec![-1.0, -1.0, -1.0],
            hf: |_| zeros(3),
            c: |x| {
                vec![
                    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 9.0,
                    (x[0] - 1.0).powi(2) + x[1] * x[1] + x[2] * x[2] - 9.0,
                ]
            },
            jac: |x| {
                vec![
                    2.0 * x[0],
                    2.0 * x[1],
                    2.0 * x[2],
                    2.0 * (x[0] - 1.0),
                    2.0 * x[1],
                    2.0 * x[2],
                ]
            },
            hc: |_| {
                let two = sym(3, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]);
                vec![two.clone(), two]
            },
        },
        Encoded {
            name: "HS6",
            m: 1,
            x0: &[-1.2, 1.0],
            fopt: Some(0.0),
            f: |x| (1.0 - x[0]).powi(2),
            g: |x| vec![-2.0 * (1.0 - x[0]), 0.0],
            hf: |_| sym(2, &[(0, 0, 2.0)]),
            c: |x| vec![10.0 * (x[1] - x[0] * x[0])],
            jac: |x| vec![-20.0 * x[0], 10.0],
            hc: |_| vec![sym(2, &[(0, 0, -20.0)])],
        },
        Encoded {
            name: "HS7",
            m: 1,
            x0: &[2.0, 2.0],
            fopt: Some(-3f64.sqrt()),
            f: |x| (1.0 + x[0] * x[0]).ln() - x[1],
            g: |x| vec![2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0],
            hf: |x| {
                let q = 1.0 + x[0] * x[0];
                sym(2, &[(0, 0, 2.0 * (1.0 - x[0] * x[0]) / (q * q))])
            },
            c: |x| vec![(1.0 + x[0] * x[0]).powi(2) + x[1] * x[1] - 4.0],
            jac: |x| vec![4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1]],
            hc: |x| vec![sym(2, &[(0, 0, 4.0 + 12.0 * x[0] * x[0]), (1, 1, 2.0)])],
        },
        Encoded {
            name: "HS27",
            m: 1,
            x0: &[2.0, 2.0, 2.0],
            fopt: Some(0.04),
            f: |x| 0.01 * (x[0] - 1.0).powi(2) + (x[1] - x[0] * x[0]).powi(2),
            g: |x| {
                let r = x[1] - x[0] * x[0];
                vec![0.02 * (x[0] - 1.0) - 4.0 * x[0] * r, 2.0 * r, 0.0]
            },
            hf: |x| {
                sym(
                    3,
                    &[
                        (0, 0, 0.02 - 4.0 * x[1] + 12.0 * x[0] * x[0]),
                        (0, 1, -4.0 * x[0]),
                        (1, 1, 2.0),
                    ],
                )
            },
            c: |x| vec![x[0] + x[2] * x[2] + 1.0],
            jac: |x| vec![1.0, 0.0, 2.0 * x[2]],
            hc: |_| vec![sym(3, &[(2, 2, 2.0)])],
        },
        Encoded {
            name: "HS39",
            m: 2,
            x0: &[2.0, 2.0, 2.0, 2.0],
            fopt: Some(-1.0),
            f: hs39_f,
            g: hs39_g,
            hf: hs39_hf,
            c: hs39_c,
            jac: hs39_j,
            hc: hs39_hc,
        },
        Encoded {
            name: "HS40",
            m: 3,
            x0: &[0.8, 0.8, 0.8, 0.8],
            fopt: Some(-0.25),
            f: |x| -x[0] * x[1] * x[2] * x[3],
            g: |x| {
                vec![
                    -x[1] * x[2] * x[3],
                    -x[0] * x[2] * x[3],
                    -x[0] * x[1] * x[3],
                    -x[0] * x[1] * x[2],
                ]
            },
            hf: |x| {
                sym(
                    4,
                    &[
                        (0, 1, -x[2] * x[3]),
                        (0, 2, -x[1] * x[3]),
                        (0, 3, -x[1] * x[2]),
                        (1, 2, -x[0] * x[3]),
                        (1, 3, -x[0] * x[2]),
                        (2, 3, -x[0] * x[1]),
                    ],
                )
            },
            c: |x| {
                vec![
                    x[0].powi(3) + x[1] * x[1] - 1.0,
                    x[0] * x[0] * x[3] - x[2],
                    x[3] * x[3] - x[1],
                ]
            },
            jac: |x| {
                vec![
                    3.0 * x[0] * x[0],
                    2.0 * x[1],
                    0.0,
                    0.0,
                    2.0 * x[0] * x[3],
                    0.0,
                    -1.0,
                    x[0] * x[0],
                    0.0,
                    -1.0,
                    0.0,
                    2.0 * x[3],
                ]
            },
            hc: |x| {
                vec![
                    sym(4, &[(0, 0, 6.0 * x[0]), (1, 1, 2.0)]),
                    sym(4, &[(0, 0, 2.0 * x[3]), (0, 3, 2.0 * x[0])]),
                    sym(4, &[(3, 3, 2.0)]),
                ]
            },
        },
        Encoded {
            name: "HS42",
            m: 2,
            x0: &[1.0, 1.0, 1.0, 1.0],
            fopt: Some(28.0 - 10.0 * SQRT_2),
            f: |x| {
                (x[0] - 1.0).powi(2)
                    + (x[1] - 2.0).powi(2)
                    + (x[2] - 3.0).powi(2)
                    + (x[3] - 4.0).powi(2)
            },
            g: |x| {
                vec![
                    2.0 * (x[0] - 1.0),
                    2.0 * (x[1] - 2.0),
                    2.0 * (x[2] - 3.0),
                    2.0 * (x[3] - 4.0),
                ]
            },
            hf: |_| sym(4, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0), (3, 3, 2.0)]),
            c: |x| vec![x[0] - 2.0, x[2] * x[2] + x[3] * x[3] - 2.0],
            jac: |x| vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0 * x[2], 2.0 * x[3]],
            hc: |_| vec![zeros(4), sym(4, &[(2, 2, 2.0), (3, 3, 2.0)])],
        },
        Encoded {
            name: "HS52",
            m: 3,
            x0: &[2.0, 2.0, 2.0, 2.0, 2.0],
            fopt: Some(5.326_647_56),
            f: |x| {
                (4.0 * x[0] - x[1]).powi(2)
                    + (x[1] + x[2] - 2.0).powi(2)
                    + (x[3] - 1.0).powi(2)
                    + (x[4] - 1.0).powi(2)
            },
            g: |x| {
                let a = 4.0 * x[0] - x[1];
                let b = x[1] + x[2] - 2.0;
                vec![8.0 * a, -2.0 * a + 2.0 * b, 2.0 * b, 2.0 * (x[3] - 1.0), 2.0 * (x[4] - 1.0)]
            },
            hf: |_| {
                sym(
                    5,
                    &[
                        (0, 0, 32.0),
                        (0, 1, -8.0),
                        (1, 1, 4.0),
                        (1, 2, 2.0),
                        (2, 2, 2.0),
                        (3, 3, 2.0),
                        (4, 4, 2.0),
                    ],
                )
            },
            c: bt3_c,
            jac: bt3_j,
            hc: affine3_hc,
        },
        Encoded {
            name: "HS77",
            m: 2,
            x0: &[2.0, 2.0, 2.0, 2.0, 2.0],
            fopt: Some(0.241_505_13),
            f: hs77_f,
            g: hs77_g,
            hf: hs77_hf,
            c: hs77_c,
            jac: hs77_j,
            hc: hs77_hc,
        },
        Encoded {
            name: "HS78",
            m: 3,
            x0: &[-2.0, 1.5, 2.0, -1.0, -1.0],
            fopt: Some(-2.919_700_41),
            f: |x| x.iter().product(),
            g: |x| {
                (0..5)
                    .map(|i| (0..5).filter(|&j| j != i).map(|j| x[j]).product())
                    .collect()
            },
            hf: |x| {
                let mut h = vec![0.0; 25];
                for i in 0..5 {
                    for j in 0..5 {
                        if i != j {
                            h[i * 5 + j] = (0..5).filter(|&k| k != i && k != j).map(|k| x[k]).product();
                        }
                    }
                }
                h
            },
            c: |x| {
                vec![
                    x.iter().map(|v| v * v).sum::<f64>() - 10.0,
                    x[1] * x[2] - 5.0 * x[3] * x[4],
                    x[0].powi(3) + x[1].powi(3) + 1.0,
                ]
            },
            jac: |x| {
                vec![
                    2.0 * x[0],
                    2.0 * x[1],
                    2.0 * x[2],
                    2.0 * x[3],
                    2.0 * x[4],
                    0.0,
                    x[2],
                    x[1],
                    -5.0 * x[4],
                    -5.0 * x[3],
                    3.0 * x[0] * x[0],
                    3.0 * x[1] * x[1],
                    0.0,
                    0.0,
                    0.0,
                ]
            },
            hc: |x| {
                vec![
                    sym(5, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0), (3, 3, 2.0), (4, 4, 2.0)]),
                    sym(5, &[(1, 2, 1.0), (3, 4, -5.0)]),
                    sym(5, &[(0, 0, 6.0 * x[0]), (1, 1, 6.0 * x[1])]),
                ]
            },
        },
        Encoded {
            name: "HS79",
            m: 3,
            x0: &[2.0, 2.0, 2.0, 2.0, 2.0],
            fopt: Some(0.078_776_821),
            f: hs79_f,
            g: hs79_g,
            hf: hs79_hf,
            c: hs79_c,
            jac: hs79_j,
            hc: hs79_hc,
        },
        Encoded {
            name: "MARATOS",
            m: 1,
            x0: &[1.1, 0.1],
            fopt: Some(-1.0),
            f: |x| -x[0] + MARATOS_TAU * (x[0] * x[0] + x[1] * x[1] - 1.0),
            g: |x| vec![-1.0 + 2.0 * MARATOS_TAU * x[0], 2.0 * MARATOS_TAU * x[1]],
            hf: |_| sym(2, &[(0, 0, 2.0 * MARATOS_TAU), (1, 1, 2.0 * MARATOS_TAU)]),
            c: unit_sphere_c,
            jac: unit_sphere_j,
            hc: unit_sphere_hc,
        },
    ]
}

/// Small diagnostic problems that are not part of the benchmark set.
fn diagnostics() -> Vec<Encoded> {
    vec![
        // Jᵀc = 2x(x² + 1) vanishes at x = 0 while c stays ≥ 1.
        Encoded {
            name: "INFEAS1D",
            m: 1,
            x0: &[1.0],
            fopt: None,
            f: |x| x[0],
            g: |_| vec![1.0],
            hf: |_| zeros(1),
            c: |x| vec![x[0] * x[0] + 1.0],
            jac: |x| vec![2.0 * x[0]],
            hc: |_| vec![vec![2.0]],
        },
        // Feasible start, affine constraint; optimum (1.5, 1.5) with f = 0.5.
        Encoded {
            name: "FEASLIN",
            m: 1,
            x0: &[0.0, 0.0],
            fopt: Some(0.5),
            f: |x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
            g: |x| vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
            hf: |_| sym(2, &[(0, 0, 2.0), (1, 1, 2.0)]),
            c: |x| vec![x[0] - x[1]],
            jac: |_| vec![1.0, -1.0],
            hc: |_| vec![zeros(2)],
        },
    ]
}

/// Names of the benchmark corpus, in table order.
pub fn mandatory_names() -> Vec<&'static str> {
    table().iter().map(|e| e.name).collect()
}

/// Names of the diagnostic problems.
pub fn diagnostic_names() -> Vec<&'static str> {
    diagnostics().iter().map(|e| e.name).collect()
}

/// Every corpus problem, built.
pub fn all_mandatory() -> Vec<NlpProblem> {
    table().iter().map(Encoded::build).collect()
}

pub fn corpus_lookup(name: &str) -> Result<NlpProblem> {
    let wanted = name.to_ascii_uppercase();
    table()
        .into_iter()
        .chain(diagnostics())
        .find(|e| e.name == wanted)
        .map(|e| e.build())
        .ok_or_else(|| SolverError::UnknownProblem(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::evaluate;

    #[test]
    fn dimensions_match_table() {
        for (name, n, m) in [("MARATOS", 2, 1), ("BT11", 5, 3), ("HS79", 5, 3), ("BT4", 3, 2)] {
            let p = corpus_lookup(name).unwrap();
            assert_eq!((p.n_vars, p.n_cons), (n, m), "{name}");
        }
        assert_eq!(mandatory_names().len(), 24);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            corpus_lookup("NOPE"),
            Err(SolverError::UnknownProblem(_))
        ));
    }

    #[test]
    fn lookup_is_case_insensitive() {
        assert_eq!(corpus_lookup("maratos").unwrap().name, "MARATOS");
    }

    #[test]
    fn hs6_objective_at_start() {
        let p = corpus_lookup("HS6").unwrap();
        let e = evaluate(&p, &p.x0).unwrap();
        assert!((e.f - 4.84).abs() < 1e-14);
    }

    #[test]
    fn maratos_shapes() {
        let p = corpus_lookup("MARATOS").unwrap();
        let e = evaluate(&p, &p.x0).unwrap();
        assert_eq!(e.c.len(), 1);
        assert_eq!(e.g.len(), 2);
    }

    #[test]
    fn every_problem_evaluates_at_its_start() {
        for p in all_mandatory() {
            let e = evaluate(&p, &p.x0).unwrap();
            assert_eq!(e.jac.shape(), (p.n_cons, p.n_vars), "{}", p.name);
            assert!(p.n_cons <= p.n_vars);
        }
    }
}
