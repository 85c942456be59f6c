use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::CMatrix;

/// `p(z) = Σ c_k z^k`, coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped so that `c_d ≠ 0` unless `d = 0`.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::input("polynomial coefficients must be finite"));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `z`.
    pub fn identity() -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// `(z − c)^k`.
    pub fn shifted_power(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..k {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * c;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    /// `Σ b_k (z − c)^k` expanded into monomials.
    pub fn from_shifted(c: Complex64, b: &[Complex64]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); b.len().max(1)];
        for (k, bk) in b.iter().enumerate() {
            for (i, a) in Self::shifted_power(c, k).coeffs.iter().enumerate() {
                coeffs[i] += bk * a;
            }
        }
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Horner.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `p(A)` by Horner's rule on matrices.
    pub fn eval_matrix(&self, a: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let id = CMatrix::identity(n, n);
        self.coeffs
            .iter()
            .rev()
            .fold(CMatrix::zeros(n, n), |acc, c| acc * a + &id * *c)
    }
}
