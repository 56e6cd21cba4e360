//! Orthonormal null-space bases of constraint Jacobians.

use nalgebra::{DMatrix, DVector};

/// Columns of `z` span `Null(J)` orthonormally; `rank` is the detected rank of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    pub z: DMatrix<f64>,
    pub rank: usize,
}

impl NullBasis {
    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.z.ncols() == 0
    }

    /// `ZZᵀv`, the orthogonal projection onto `Null(J)`.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.is_trivial() {
            return DVector::zeros(v.len());
        }
        &self.z * self.z.tr_mul(v)
    }
}

/// Null-space basis from a full SVD of `J`.
///
/// Singular values at or below `1e-12·σ_max·max(M, N)` count as zero.
pub fn null_space_basis(jac: &DMatrix<f64>) -> NullBasis {
    let (m, n) = jac.shape();
    if n == 0 {
        return NullBasis {
            z: DMatrix::zeros(0, 0),
            rank: 0,
        };
    }
    // Pad with zero rows so the decomposition returns all N right singular vectors.
    let rows = m.max(n);
    let mut a = DMatrix::zeros(rows, n);
    a.rows_mut(0, m).copy_from(jac);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested Vᵀ");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = 1e-12 * smax * m.max(n) as f64;
    let null: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol)
        .map(|(i, _)| i)
        .collect();
    let mut z = DMatrix::zeros(n, null.len());
    for (col, &i) in null.iter().enumerate() {
        z.set_column(col, &vt.row(i).transpose());
    }
    NullBasis {
        rank: n - null.len(),
        z,
    }
}

/// `g^p = ZZᵀ(g + Hn)`.
pub fn projected_gradient(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    n: &DVector<f64>,
    basis: &NullBasis,
) -> DVector<f64> {
    basis.project(&(g + h * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_jacobian() {
        let b = null_space_basis(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(b.rank, 1);
        assert_eq!(b.dim(), 1);
        assert!(b.z[(0, 0)].abs() < 1e-15);
        assert!((b.z[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_full_rank_has_trivial_null_space() {
        let b = null_space_basis(&DMatrix::identity(2, 2));
        assert!(b.is_trivial());
        assert_eq!(b.rank, 2);
    }

    #[test]
    fn zero_jacobian_gives_whole_space() {
        let b = null_space_basis(&DMatrix::zeros(1, 3));
        assert_eq!(b.rank, 0);
        assert_eq!(b.dim(), 3);
    }

    #[test]
    fn no_constraints_projection_is_identity() {
        let b = null_space_basis(&DMatrix::zeros(0, 2));
        let h = DMatrix::identity(2, 2);
        let gp = projected_gradient(
            &DVector::from_row_slice(&[1.0, 2.0]),
            &h,
            &DVector::from_row_slice(&[0.5, 0.5]),
            &b,
        );
        assert!((gp - DVector::from_row_slice(&[1.5, 2.5])).norm() < 1e-14);
    }

    #[test]
    fn coordinate_projection() {
        let b = null_space_basis(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let gp = projected_gradient(
            &DVector::from_row_slice(&[3.0, 4.0]),
            &DMatrix::zeros(2, 2),
            &DVector::zeros(2),
            &b,
        );
        assert!((gp - DVector::from_row_slice(&[0.0, 4.0])).norm() < 1e-14);
    }

    #[test]
    fn range_space_vector_projects_to_zero() {
        let jac = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, -1.0]);
        let b = null_space_basis(&jac);
        let gp = projected_gradient(&jac.row(0).transpose(), &DMatrix::zeros(3, 3), &DVector::zeros(3), &b);
        assert!(gp.norm() < 1e-14);
    }
}
