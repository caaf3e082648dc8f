//! Real-coefficient polynomials in s, stored in ascending degree order.

use num_complex::Complex64;

/// Polynomial with real coefficients; index k holds the coefficient of s^k.
///
/// Always non-empty and trimmed: the leading coefficient is nonzero unless
/// the polynomial is the literal zero polynomial `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from ascending coefficients, trimming trailing zeros.
    pub fn new(coeffs: &[f64]) -> Self {
        let mut c: Vec<f64> = coeffs.to_vec();
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Self { coeffs: c }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0.0]
    }

    /// Constant term (coefficient of s^0).
    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Sum of |c_k| * |s|^k, an upper bound on the evaluation magnitude.
    /// Used to scale near-pole detection thresholds.
    pub fn magnitude_scale(&self, s_mag: f64) -> f64 {
        let mut pow = 1.0;
        let mut acc = 0.0;
        for &c in &self.coeffs {
            acc += c.abs() * pow;
            pow *= s_mag;
        }
        acc
    }

    /// Polynomial product.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(&out)
    }

    /// Scale every coefficient by a constant.
    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(&self.coeffs.iter().map(|&c| c * k).collect::<Vec<_>>())
    }
}
