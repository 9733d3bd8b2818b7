//! Dense complex polynomials and the polynomial-method constructions.

mod constructions;
mod fp;
mod hypergeom;
mod lame;
mod roots;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use constructions::{four_end_config, n1_config, n1_embedding_flags, N1Embedding};
pub use fp::{fp_residual, fp_solve, FpOptions, FpResidual, FpSolution};
pub use hypergeom::{
    chu_vandermonde, hypergeom_rigidity_recurrence, hypergeometric_ode_residual,
    hypergeometric_poly, pochhammer,
};
pub use lame::{
    heun_block_config, heun_polynomials, lame_operator_residual, HeunCandidate, HeunProblem,
    HeunSolutions, LameData, LameResidual,
};
pub use roots::{poly_roots, simple_root_check};

/// Trailing coefficients at or below this fraction of the largest are trimmed
/// by [`ComplexPolynomial::new`].
pub const TRIM_TOL: f64 = 1e-14;

/// Coefficients in ascending degree. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl ComplexPolynomial {
    /// Builds a polynomial, trimming trailing coefficients that are negligible
    /// relative to the largest one.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(last) = coeffs.last() {
            if last.norm() <= TRIM_TOL * max || last.norm() == 0.0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        ComplexPolynomial { coeffs }
    }

    /// Builds a polynomial trimming exact zeros only. Arithmetic goes through
    /// here so that widely spread roots do not lose their leading term.
    pub fn from_raw(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        ComplexPolynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(a: Complex64) -> Self {
        Self::from_raw(vec![a])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![czero(); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        ComplexPolynomial { coeffs }
    }

    /// `z - a`.
    pub fn linear_factor(a: Complex64) -> Self {
        ComplexPolynomial {
            coeffs: vec![-a, Complex64::new(1.0, 0.0)],
        }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![czero(); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            coeffs = next;
        }
        ComplexPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero past the end.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_else(czero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_else(czero)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every imaginary part is at most `tol` times the largest coefficient.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff();
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, &a| acc * z + a)
    }

    pub fn derive(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::from_raw(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| a * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|&a| a * s).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![czero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        ComplexPolynomial { coeffs }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        let lead = self.leading();
        if lead.norm() == 0.0 {
            return Err(Error::DegenerateDegree(
                "zero polynomial has no monic form".into(),
            ));
        }
        Ok(self.scale(lead.inv()))
    }

    /// Quotient and remainder of long division by `divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::DegreeZero)?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![czero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let factor = rem[i + dd] / lead;
            quot[i] = factor;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= factor * d;
            }
            rem[i + dd] = czero();
        }
        rem.truncate(dd);
        Ok((Self::from_raw(quot), Self::from_raw(rem)))
    }

    pub fn to_document(&self) -> PolyDocument {
        PolyDocument {
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("polynomial serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolyDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(doc.into())
    }
}

/// Wire form `{"coeffs":[[re,im],...]}`, ascending degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyDocument {
    pub coeffs: Vec<[f64; 2]>,
}

impl From<PolyDocument> for ComplexPolynomial {
    fn from(doc: PolyDocument) -> Self {
        ComplexPolynomial::new(
            doc.coeffs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

/// Monic polynomial with the given roots.
pub fn poly_from_roots(roots: &[Complex64]) -> ComplexPolynomial {
    ComplexPolynomial::from_roots(roots)
}

pub fn poly_eval(p: &ComplexPolynomial, z: Complex64) -> Complex64 {
    p.eval(z)
}

pub fn poly_derive(p: &ComplexPolynomial) -> ComplexPolynomial {
    p.derive()
}

pub fn poly_mul(a: &ComplexPolynomial, b: &ComplexPolynomial) -> ComplexPolynomial {
    a * b
}

impl Add for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPolynomial::from_raw((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPolynomial::from_raw((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn neg(self) -> ComplexPolynomial {
        ComplexPolynomial::from_raw(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPolynomial::zero();
        }
        let mut out = vec![czero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPolynomial::from_raw(out)
    }
}

impl Add for ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: ComplexPolynomial) -> ComplexPolynomial {
        &self + &rhs
    }
}

impl Sub for ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: ComplexPolynomial) -> ComplexPolynomial {
        &self - &rhs
    }
}

impl Mul for ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: ComplexPolynomial) -> ComplexPolynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basic_arithmetic() {
        let p = poly_from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(p, ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(poly_derive(&p), ComplexPolynomial::from_real(&[0.0, 2.0]));
        assert_eq!(poly_eval(&p, c(0.0, 1.0)), c(-2.0, 0.0));
        let q = poly_mul(
            &ComplexPolynomial::linear_factor(c(1.0, 0.0)),
            &ComplexPolynomial::linear_factor(c(-1.0, 0.0)),
        );
        assert_eq!(q, p);
    }

    #[test]
    fn trimming_and_degree() {
        let p = ComplexPolynomial::from_real(&[1.0, 2.0, 1e-20]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(ComplexPolynomial::from_real(&[0.0, 0.0]).degree(), None);
        let wide = poly_from_roots(&[c(1e9, 0.0), c(2e9, 0.0)]);
        assert_eq!(wide.degree(), Some(2));
    }

    #[test]
    fn division_with_remainder() {
        let p = ComplexPolynomial::from_real(&[-1.0, 0.0, 0.0, 1.0]);
        let d = ComplexPolynomial::from_real(&[-1.0, 1.0]);
        let (q, r) = p.div_rem(&d).unwrap();
        assert_eq!(q, ComplexPolynomial::from_real(&[1.0, 1.0, 1.0]));
        assert!(r.is_zero());
        let (_, r) = ComplexPolynomial::from_real(&[1.0, 0.0, 1.0])
            .div_rem(&d)
            .unwrap();
        assert_eq!(r, ComplexPolynomial::from_real(&[2.0]));
    }

    #[test]
    fn json_form() {
        let p = ComplexPolynomial::new(vec![c(1.0, -0.5), c(0.0, 2.0)]);
        assert_eq!(p.to_json(), r#"{"coeffs":[[1.0,-0.5],[0.0,2.0]]}"#);
        assert_eq!(ComplexPolynomial::from_json(&p.to_json()).unwrap(), p);
    }
}
