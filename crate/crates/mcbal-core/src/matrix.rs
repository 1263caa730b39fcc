//! 3×3 real matrices for color transforms.
//!
//! Everything in the math core runs in `f64`. Matrices are row-major and
//! immutable after construction; inversion uses the closed-form
//! adjugate/determinant expression, which is deterministic and allocation
//! free at this size.

use std::ops::Mul;

/// A row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub const IDENTITY: Matrix3 = Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Matrix3 {
        Matrix3(rows)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(c0: [f64; 3], c1: [f64; 3], c2: [f64; 3]) -> Matrix3 {
        Matrix3([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    pub fn diagonal(d: [f64; 3]) -> Matrix3 {
        Matrix3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        self.0[i]
    }

    pub fn column(&self, j: usize) -> [f64; 3] {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn transpose(&self) -> Matrix3 {
        Matrix3([
            [self.0[0][0], self.0[1][0], self.0[2][0]],
            [self.0[0][1], self.0[1][1], self.0[2][1]],
            [self.0[0][2], self.0[1][2], self.0[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Closed-form inverse via the adjugate. Returns `None` when the
    /// determinant is zero or not finite.
    pub fn inverse(&self) -> Option<Matrix3> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        let inv_det = 1.0 / det;
        Some(Matrix3([
            [
                (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det,
                (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
                (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
            ],
            [
                (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det,
                (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
                (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
            ],
            [
                (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det,
                (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
                (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
            ],
        ]))
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Gauss-Jordan inverse with partial pivoting. Unlike the adjugate
    /// form, the tiny pivots of a nearly singular matrix survive here
    /// instead of drowning in cofactor cancellation noise, so the inverse
    /// of a near-rank-deficient matrix comes out with honestly huge
    /// entries. Used for conditioning estimates.
    fn inverse_pivoted(&self) -> Option<Matrix3> {
        let mut a = self.0;
        let mut inv = Matrix3::IDENTITY.0;
        for col in 0..3 {
            let pivot_row = (col..3)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[pivot_row][col] == 0.0 {
                return None;
            }
            a.swap(col, pivot_row);
            inv.swap(col, pivot_row);
            let pivot = a[col][col];
            for j in 0..3 {
                a[col][j] /= pivot;
                inv[col][j] /= pivot;
            }
            for row in 0..3 {
                if row != col {
                    let factor = a[row][col];
                    for j in 0..3 {
                        a[row][j] -= factor * a[col][j];
                        inv[row][j] -= factor * inv[col][j];
                    }
                }
            }
        }
        Some(Matrix3(inv))
    }

    /// Max absolute column sum (the matrix 1-norm).
    pub fn norm_one(&self) -> f64 {
        (0..3)
            .map(|j| self.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Condition number estimate in the 1-norm, `‖A‖₁·‖A⁻¹‖₁`.
    /// Returns infinity for singular matrices.
    pub fn condition_one(&self) -> f64 {
        match self.inverse_pivoted() {
            Some(inv) => self.norm_one() * inv.norm_one(),
            None => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest absolute elementwise difference to another matrix.
    pub fn max_abs_diff(&self, other: &Matrix3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;

    fn mul(self, rhs: Matrix3) -> Matrix3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * rhs.0[0][j]
                    + self.0[i][1] * rhs.0[1][j]
                    + self.0[i][2] * rhs.0[2][j];
            }
        }
        Matrix3(out)
    }
}
