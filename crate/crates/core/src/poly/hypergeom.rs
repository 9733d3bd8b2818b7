//! Terminating Gauss hypergeometric series `2F1(-n, b; c; z)`.

use num_complex::Complex64;

use super::{ComplexPolynomial, TRIM_TOL};
use crate::error::{Error, Result};

const INTEGER_TOL: f64 = 1e-12;

fn is_nonpositive_integer(x: f64) -> bool {
    let r = x.round();
    r <= 0.0 && (x - r).abs() <= INTEGER_TOL
}

/// Rising factorial `(x)_k = x (x+1) ... (x+k-1)`, `(x)_0 = 1`.
pub fn pochhammer(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// `2F1(-n, b; c; z) = sum_k (-1)^k C(n,k) (b)_k / (c)_k z^k`.
pub fn hypergeometric_poly(n: usize, b: f64, c: f64) -> Result<ComplexPolynomial> {
    if n == 0 {
        return Err(Error::DegenerateDegree("n must be at least 1".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::BadC(c));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut a = 1.0;
    coeffs.push(a);
    for k in 0..n {
        // a_{k+1} / a_k = -(n - k)(b + k) / ((c + k)(k + 1))
        a *= -((n - k) as f64) * (b + k as f64) / ((c + k as f64) * (k + 1) as f64);
        coeffs.push(a);
    }
    let max = coeffs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if coeffs[n].abs() <= TRIM_TOL * max {
        return Err(Error::DegenerateDegree(format!(
            "(b)_n vanishes for b = {}, so the degree drops below {}",
            b, n
        )));
    }
    Ok(ComplexPolynomial::from_raw(
        coeffs.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
    ))
}

/// `z(1-z) w'' + [c - (a+b+1) z] w' - a b w` as a polynomial.
pub fn hypergeometric_ode_residual(
    w: &ComplexPolynomial,
    a: f64,
    b: f64,
    c: f64,
) -> ComplexPolynomial {
    let d1 = w.derive();
    let d2 = d1.derive();
    let z_one_minus_z = ComplexPolynomial::from_real(&[0.0, 1.0, -1.0]);
    let linear = ComplexPolynomial::from_real(&[c, -(a + b + 1.0)]);
    let t2 = &z_one_minus_z * &d2;
    let t1 = &linear * &d1;
    let t0 = w.scale(Complex64::new(-a * b, 0.0));
    &(&t2 + &t1) + &t0
}

/// `P(1) = (c-b)_n / (c)_n`.
pub fn chu_vandermonde(n: usize, b: f64, c: f64) -> f64 {
    pochhammer(c - b, n) / pochhammer(c, n)
}

/// Whether the linearized coefficient recurrence
/// `(b+j)(n-j) a_j + j(j+1+c) a_{j+1} = 0`, `0 <= j < n`, with the leading
/// coefficient held fixed, forces every perturbation to vanish, and the
/// polynomial itself exists.
///
/// The recurrence is lower bidiagonal in the unknowns `a_0..a_{n-1}`, so it is
/// nonsingular exactly when every `(b + j)(n - j)` is nonzero.
pub fn hypergeom_rigidity_recurrence(n: usize, b: f64, c: f64) -> bool {
    let diagonal_ok = (0..n).all(|j| ((b + j as f64) * (n - j) as f64).abs() > INTEGER_TOL);
    let c_ok = (0..n).all(|j| (c + j as f64).abs() > INTEGER_TOL);
    diagonal_ok && c_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_two_example() {
        let p = hypergeometric_poly(2, -1.5, 0.5).unwrap();
        let want = [1.0, 6.0, 1.0];
        for (i, w) in want.iter().enumerate() {
            assert!((p.coeff(i).re - w).abs() < 1e-14);
        }
        assert!((p.eval(Complex64::new(1.0, 0.0)).re - 8.0).abs() < 1e-13);
        assert!((chu_vandermonde(2, -1.5, 0.5) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn degree_one_closed_form() {
        let (b, c) = (0.7, 2.3);
        let p = hypergeometric_poly(1, b, c).unwrap();
        assert!((p.coeff(0).re - 1.0).abs() < 1e-15);
        assert!((p.coeff(1).re + b / c).abs() < 1e-15);
    }

    #[test]
    fn ode_holds() {
        for &(n, b, c) in &[
            (2usize, -1.5, 0.5),
            (5, -2.3, 0.3),
            (7, 1.7, 2.9),
            (3, -0.4, -2.5),
        ] {
            let p = hypergeometric_poly(n, b, c).unwrap();
            let r = hypergeometric_ode_residual(&p, -(n as f64), b, c);
            assert!(
                r.max_abs_coeff() < 1e-12 * p.max_abs_coeff() * (n * n) as f64,
                "n={}",
                n
            );
        }
    }

    #[test]
    fn rejected_parameters() {
        assert!(matches!(
            hypergeometric_poly(3, 0.5, 0.0),
            Err(Error::BadC(_))
        ));
        assert!(matches!(
            hypergeometric_poly(3, 0.5, -2.0),
            Err(Error::BadC(_))
        ));
        assert!(matches!(
            hypergeometric_poly(3, -1.0, 0.5),
            Err(Error::DegenerateDegree(_))
        ));
    }

    #[test]
    fn rigidity_recurrence_examples() {
        assert!(hypergeom_rigidity_recurrence(2, -1.5, 0.5));
        assert!(!hypergeom_rigidity_recurrence(3, -1.0, 0.5));
        assert!(!hypergeom_rigidity_recurrence(3, -1.5, 0.0));
    }
}
