//! Dense LU factorization with partial pivoting, over f64 or Complex64.
//!
//! Circuits at this scale stay well under 50 unknowns, so a dense solver
//! is all the linear algebra the workbench needs.
#![allow(clippy::needless_range_loop)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Scalar field the solver works over.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn one() -> Self;
    /// Modulus used for pivot selection.
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factors of a square matrix, P*A = L*U stored in place.
pub struct LuFactors<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
}

/// Relative pivot threshold below which the matrix is declared singular.
const PIVOT_REL_TOL: f64 = 1e-13;

impl<T: Scalar> LuFactors<T> {
    /// Factor `a` (row-major, square). Returns `None` on a singular pivot.
    pub fn factor(mut a: Vec<Vec<T>>) -> Option<Self> {
        let n = a.len();
        debug_assert!(a.iter().all(|row| row.len() == n));
        let mut perm: Vec<usize> = (0..n).collect();

        // Scale reference for the singularity test: largest entry magnitude.
        let mut scale = 0.0f64;
        for row in &a {
            for &v in row {
                scale = scale.max(v.modulus());
            }
        }
        if scale == 0.0 {
            return if n == 0 {
                Some(Self { lu: a, perm })
            } else {
                None
            };
        }

        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = a[col][col].modulus();
            for row in col + 1..n {
                let mag = a[row][col].modulus();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_mag < PIVOT_REL_TOL * scale {
                return None;
            }
            if pivot_row != col {
                a.swap(col, pivot_row);
                perm.swap(col, pivot_row);
            }
            let pivot = a[col][col];
            for row in col + 1..n {
                let factor = a[row][col] / pivot;
                a[row][col] = factor;
                for k in col + 1..n {
                    let sub = factor * a[col][k];
                    a[row][k] = a[row][k] - sub;
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    /// Solve A x = b using the stored factors.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.len();
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        // forward substitution (L has unit diagonal)
        for i in 0..n {
            for k in 0..i {
                let sub = self.lu[i][k] * x[k];
                x[i] = x[i] - sub;
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for k in i + 1..n {
                let sub = self.lu[i][k] * x[k];
                x[i] = x[i] - sub;
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }
}

/// One-shot solve of A x = b. Returns `None` if the matrix is singular.
pub fn solve_dense<T: Scalar>(a: Vec<Vec<T>>, b: &[T]) -> Option<Vec<T>> {
    LuFactors::factor(a).map(|f| f.solve(b))
}
