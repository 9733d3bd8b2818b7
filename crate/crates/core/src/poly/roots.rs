//! All-roots solver: Aberth-Ehrlich simultaneous iteration with a final
//! Newton polish.

use num_complex::Complex64;

use super::ComplexPolynomial;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 200;

fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Magnitude scale of the terms of `p(z)`, used as the roundoff yardstick.
fn term_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// All roots of `p`, with multiplicity.
///
/// Every returned root satisfies
/// `|p(root)| <= 1e-10 * max|coeff| * max(1, |root|)^deg`; roots of
/// real-coefficient polynomials come back closed under conjugation.
pub fn poly_roots(p: &ComplexPolynomial) -> Result<Vec<Complex64>> {
    let degree = match p.degree() {
        None | Some(0) => return Err(Error::DegreeZero),
        Some(d) => d,
    };
    let lead = p.leading();
    let monic: Vec<Complex64> = p.coeffs().iter().map(|&a| a / lead).collect();

    // Exact zero roots are split off first.
    let zeros = monic.iter().take_while(|a| a.norm() == 0.0).count();
    let reduced = &monic[zeros..];
    let n = degree - zeros;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if n > 0 {
        roots.extend(aberth(reduced, n));
    }

    if p.is_real(0.0) {
        close_under_conjugation(&mut roots);
    }
    Ok(roots)
}

fn aberth(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    if n == 1 {
        return vec![-coeffs[0]];
    }
    // Start on a circle around the root centroid whose radius is the geometric
    // mean of the shifted root moduli; the angular offset keeps real
    // polynomials off the real axis.
    let center = -coeffs[n - 1] / n as f64;
    let mut radius = eval_with_derivative(coeffs, center)
        .0
        .norm()
        .powf(1.0 / n as f64);
    if !(radius > 0.0 && radius.is_finite()) {
        radius = coeffs[0].norm().powf(1.0 / n as f64).max(1.0);
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            center
                + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4)
        })
        .collect();

    let mut done = vec![false; n];
    for _ in 0..MAX_SWEEPS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dv) = eval_with_derivative(coeffs, z[i]);
            if pv.norm() <= 4.0 * f64::EPSILON * term_scale(coeffs, z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = pv / dv;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    repulsion += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }

    for zi in z.iter_mut() {
        let (pv, dv) = eval_with_derivative(coeffs, *zi);
        if dv.norm() > 0.0 {
            let cand = *zi - pv / dv;
            if eval_with_derivative(coeffs, cand).0.norm() < pv.norm() {
                *zi = cand;
            }
        }
    }
    z
}

/// Pairs every root with its nearest conjugate partner and symmetrizes, or
/// snaps it onto the real axis when it is its own best partner.
fn close_under_conjugation(roots: &mut [Complex64]) {
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = roots[i].conj();
        let self_gap = 2.0 * roots[i].im.abs();
        let partner = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, (roots[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, gap)) if gap < self_gap => {
                used[j] = true;
                let mean = 0.5 * (roots[i] + roots[j].conj());
                roots[i] = mean;
                roots[j] = mean.conj();
            }
            _ => roots[i].im = 0.0,
        }
    }
}

/// Checks that the roots are pairwise separated by more than `tol`.
pub fn simple_root_check(roots: &[Complex64], tol: f64) -> Result<()> {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= tol {
                return Err(Error::NonSimpleRoots(format!(
                    "roots {} and {} are within {:e}",
                    roots[i], roots[j], tol
                )));
            }
        }
    }
    Ok(())
}
