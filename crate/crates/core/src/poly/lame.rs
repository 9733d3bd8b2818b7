//! Generalized Lamé equations and their polynomial (Stieltjes) solutions for
//! the `(1, n, 1)` shape.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{poly_roots, simple_root_check, ComplexPolynomial};
use crate::config::Configuration;
use crate::error::{Error, Result};

const INVARIANT_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-10;

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A finite puncture `p` away from the origin with its `P'` coefficient
/// `kappa` (the negated residue of the neighbouring layer) and accessory
/// residue `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Puncture {
    pub at: Complex64,
    pub kappa: f64,
    pub gamma: Complex64,
}

/// Coefficients of
/// `P'' + (c/z + sum kappa_i/(z - p_i)) P' + (gamma_0/z + sum gamma_i/(z - p_i)) P = 0`
/// for a middle layer of `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LameData {
    pub n: usize,
    pub c: f64,
    pub b: f64,
    pub gamma0: Complex64,
    pub punctures: Vec<Puncture>,
}

impl LameData {
    /// Checks the three linear conditions tying `gamma`, `b` and `c` together.
    pub fn check(&self) -> Result<()> {
        let n = self.n as f64;
        let sum: Complex64 =
            self.gamma0 + self.punctures.iter().map(|p| p.gamma).sum::<Complex64>();
        let scale =
            1.0 + self.gamma0.norm() + self.punctures.iter().map(|p| p.gamma.norm()).sum::<f64>();
        if sum.norm() > INVARIANT_TOL * scale {
            return Err(Error::InvariantViolation(format!(
                "sum of gamma is {}",
                sum
            )));
        }
        let moment: Complex64 = self.punctures.iter().map(|p| p.gamma * p.at).sum();
        let mscale = scale
            * (1.0
                + self
                    .punctures
                    .iter()
                    .map(|p| p.at.norm())
                    .fold(0.0, f64::max));
        if (moment + n * self.b).norm() > INVARIANT_TOL * mscale {
            return Err(Error::InvariantViolation(format!(
                "sum of gamma * q is {} but -n b is {}",
                moment,
                -n * self.b
            )));
        }
        let kappa: f64 = self.punctures.iter().map(|p| p.kappa).sum();
        let lhs = self.c + kappa;
        let rhs = 1.0 - n + self.b;
        if (lhs - rhs).abs() > INVARIANT_TOL * (1.0 + lhs.abs() + rhs.abs()) {
            return Err(Error::InvariantViolation(format!(
                "c - sum of neighbouring residues is {} but 1 - n + b is {}",
                lhs, rhs
            )));
        }
        Ok(())
    }

    /// Accessory residues read off from a candidate solution `P`: the
    /// equation multiplied by `(z - p)` and evaluated at `p` gives
    /// `kappa P'(p) + gamma P(p) = 0`.
    pub fn with_solution_gammas(
        n: usize,
        c: f64,
        b: f64,
        outer: &[(Complex64, f64)],
        p: &ComplexPolynomial,
    ) -> Self {
        let dp = p.derive();
        let zero = Complex64::new(0.0, 0.0);
        let punctures = outer
            .iter()
            .map(|&(at, kappa)| Puncture {
                at,
                kappa,
                gamma: -kappa * dp.eval(at) / p.eval(at),
            })
            .collect();
        LameData {
            n,
            c,
            b,
            gamma0: -c * dp.eval(zero) / p.eval(zero),
            punctures,
        }
    }

    /// The three polynomial coefficients after clearing denominators:
    /// `A P'' + B P' + V P`.
    fn cleared(&self) -> [ComplexPolynomial; 3] {
        let z = ComplexPolynomial::monomial(1);
        let outer: Vec<ComplexPolynomial> = self
            .punctures
            .iter()
            .map(|p| ComplexPolynomial::linear_factor(p.at))
            .collect();
        let product = |skip: Option<usize>| {
            outer
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .fold(ComplexPolynomial::one(), |acc, (_, f)| &acc * f)
        };
        let all = product(None);
        let a = &z * &all;
        let mut b = all.scale(cr(self.c));
        let mut v = all.scale(self.gamma0);
        for (i, p) in self.punctures.iter().enumerate() {
            let others = &z * &product(Some(i));
            b = &b + &others.scale(cr(p.kappa));
            v = &v + &others.scale(p.gamma);
        }
        [a, b, v]
    }
}

/// Cleared residual of the Lamé operator together with the magnitude of its
/// individual terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LameResidual {
    pub poly: ComplexPolynomial,
    pub scale: f64,
}

impl LameResidual {
    pub fn vanishes(&self, rel_tol: f64) -> bool {
        self.poly.max_abs_coeff() <= rel_tol * self.scale.max(f64::MIN_POSITIVE)
    }
}

pub fn lame_operator_residual(p: &ComplexPolynomial, data: &LameData) -> Result<LameResidual> {
    data.check()?;
    let [a, b, v] = data.cleared();
    let terms = [&a * &p.derive().derive(), &b * &p.derive(), &v * p];
    let scale = terms
        .iter()
        .map(ComplexPolynomial::max_abs_coeff)
        .fold(0.0, f64::max);
    let poly = &(&terms[0] + &terms[1]) + &terms[2];
    Ok(LameResidual { poly, scale })
}

/// Parameters of a `(1, n, 1)` block: outer nodes at `a` (layer 1) and `s`
/// (layer 3), outer residues `c1`, `c3`, middle residue 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunProblem {
    pub n: usize,
    pub a: Complex64,
    pub s: Complex64,
    pub c1: f64,
    pub c3: f64,
    pub b: f64,
}

impl HeunProblem {
    /// `c = 1 - n + b + c1 + c3`.
    pub fn c(&self) -> f64 {
        1.0 - self.n as f64 + self.b + self.c1 + self.c3
    }

    /// Matrix `M` with `A P'' + B P' + (-n b z) P = -t P` on the monomial
    /// basis, where `t = gamma_0 a s` is the accessory parameter. Only the
    /// three diagonals are nonzero.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let (a, s) = (self.a, self.s);
        let c = self.c();
        let beta1 = -c * (a + s) + self.c1 * s + self.c3 * a;
        let nb = n as f64;
        let mut m = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
        for j in 0..=n {
            let jf = j as f64;
            m[(j, j)] = -(a + s) * (jf * (jf - 1.0)) + beta1 * jf;
            if j < n {
                m[(j + 1, j)] = cr((jf - nb) * (jf + self.b));
            }
            if j > 0 {
                m[(j - 1, j)] = a * s * (jf * (jf - 1.0 + c));
            }
        }
        m
    }

    /// `det(M + t I)` as a polynomial in `t`, via the three-term continuant
    /// recurrence of a tridiagonal matrix.
    pub fn determinant(&self) -> ComplexPolynomial {
        let m = self.matrix();
        let mut prev = ComplexPolynomial::one();
        let mut cur = ComplexPolynomial::from_raw(vec![m[(0, 0)], Complex64::new(1.0, 0.0)]);
        for k in 1..=self.n {
            let diag = ComplexPolynomial::from_raw(vec![m[(k, k)], Complex64::new(1.0, 0.0)]);
            let off = m[(k - 1, k)] * m[(k, k - 1)];
            let next = &(&diag * &cur) - &prev.scale(off);
            prev = cur;
            cur = next;
        }
        cur
    }

    fn outer(&self) -> [(Complex64, f64); 2] {
        [(self.a, -self.c1), (self.s, -self.c3)]
    }

    pub fn lame_data(&self, p: &ComplexPolynomial) -> LameData {
        LameData::with_solution_gammas(self.n, self.c(), self.b, &self.outer(), p)
    }
}

/// A polynomial solution with its accessory parameter and roots.
#[derive(Debug, Clone, PartialEq)]
pub struct HeunCandidate {
    pub t: Complex64,
    pub poly: ComplexPolynomial,
    pub roots: Vec<Complex64>,
    pub residual: LameResidual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeunSolutions {
    pub problem: HeunProblem,
    /// `det(M + t I)`; its roots are the admissible accessory parameters.
    pub determinant: ComplexPolynomial,
    pub solutions: Vec<HeunCandidate>,
    /// Accessory values whose polynomial was rejected, with the reason.
    pub dropped: Vec<(Complex64, String)>,
}

fn null_vector(m: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    Some(v_t.row(idx).iter().map(|x| x.conj()).collect())
}

fn candidate(problem: &HeunProblem, t: Complex64) -> std::result::Result<HeunCandidate, String> {
    let n = problem.n;
    let mut m = problem.matrix();
    for j in 0..=n {
        m[(j, j)] += t;
    }
    let v = null_vector(&m).ok_or("singular value decomposition failed")?;
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if v[n].norm() <= 1e-8 * max {
        return Err("solution has degree below n".into());
    }
    let lead = v[n];
    let poly = ComplexPolynomial::from_raw(v.iter().map(|x| x / lead).collect());
    let roots = poly_roots(&poly).map_err(|e| e.to_string())?;
    simple_root_check(&roots, ROOT_TOL).map_err(|e| e.to_string())?;
    for z in &roots {
        let near = |p: Complex64| (z - p).norm() <= ROOT_TOL * p.norm().max(1.0);
        if near(Complex64::new(0.0, 0.0)) || near(problem.a) || near(problem.s) {
            return Err(Error::RootAtPuncture(z.to_string()).to_string());
        }
    }
    let data = problem.lame_data(&poly);
    let residual = lame_operator_residual(&poly, &data).map_err(|e| e.to_string())?;
    Ok(HeunCandidate {
        t,
        poly,
        roots,
        residual,
    })
}

/// All monic degree-`n` polynomial solutions for the `(1, n, 1)` shape with
/// outer nodes `q_out = (q_{1,1}, q_{3,1})`.
pub fn heun_polynomials(
    n: usize,
    q_out: (Complex64, Complex64),
    c1: f64,
    c3: f64,
    b: f64,
) -> Result<HeunSolutions> {
    if n == 0 {
        return Err(Error::DegreeZero);
    }
    let problem = HeunProblem {
        n,
        a: q_out.0,
        s: q_out.1,
        c1,
        c3,
        b,
    };
    let determinant = problem.determinant();
    let ts = poly_roots(&determinant)?;
    let mut solutions = Vec::new();
    let mut dropped = Vec::new();
    for t in ts {
        match candidate(&problem, t) {
            Ok(c) => solutions.push(c),
            Err(reason) => dropped.push((t, reason)),
        }
    }
    if solutions.is_empty() {
        return Err(Error::NoSolutions(format!(
            "all {} accessory values rejected: {:?}",
            dropped.len(),
            dropped
        )));
    }
    Ok(HeunSolutions {
        problem,
        determinant,
        solutions,
        dropped,
    })
}

/// The `(1, n, 1)` configuration carried by one Heun polynomial: residues
/// `(c1, 1, c3)` and slope gaps
/// `a P'(a)/P(a) - c1`, `c - 1`, `s P'(s)/P(s) - c3`.
pub fn heun_block_config(problem: &HeunProblem, p: &ComplexPolynomial) -> Result<Configuration> {
    let roots = poly_roots(p)?;
    let dp = p.derive();
    let log_derivative = |z: Complex64| z * dp.eval(z) / p.eval(z);
    let g1 = log_derivative(problem.a);
    let g3 = log_derivative(problem.s);
    let scale = 1.0 + g1.re.abs() + g3.re.abs();
    if g1.im.abs() > 1e-9 * scale || g3.im.abs() > 1e-9 * scale {
        return Err(Error::InvariantViolation(format!(
            "slope gaps must be real, got {} and {}",
            g1, g3
        )));
    }
    let gaps = [g1.re - problem.c1, problem.c() - 1.0, g3.re - problem.c3];
    Configuration::from_residues_and_gaps(
        vec![vec![problem.a], roots, vec![problem.s]],
        &[problem.c1, 1.0, problem.c3],
        &gaps,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::force_of;
    use crate::poly::hypergeometric_poly;

    fn offset_problem() -> HeunProblem {
        HeunProblem {
            n: 2,
            a: cr(1.0),
            s: cr(2.0 / 3.0),
            c1: 8.0 / 5.0,
            c3: 4189.0 / 2890.0,
            b: -9857.0 / 8670.0,
        }
    }

    fn offset_poly() -> ComplexPolynomial {
        ComplexPolynomial::from_real(&[23.0 / 3.0, 70.0 / 3.0, 1.0])
    }

    #[test]
    fn offset_handles_residual_vanishes() {
        let problem = offset_problem();
        assert!((problem.c() - 3956.0 / 4335.0).abs() < 1e-14);
        let data = problem.lame_data(&offset_poly());
        let r = lame_operator_residual(&offset_poly(), &data).unwrap();
        assert!(r.vanishes(1e-10), "{:?}", r);
    }

    #[test]
    fn offset_handles_among_heun_solutions() {
        let sols = heun_polynomials(
            2,
            (cr(1.0), cr(2.0 / 3.0)),
            8.0 / 5.0,
            4189.0 / 2890.0,
            -9857.0 / 8670.0,
        )
        .unwrap();
        assert!(sols.solutions.len() <= 3);
        let target = offset_poly();
        let hit = sols
            .solutions
            .iter()
            .any(|s| (&s.poly - &target).max_abs_coeff() < 1e-8 * 24.0);
        assert!(
            hit,
            "{:?}",
            sols.solutions
                .iter()
                .map(|s| s.poly.coeffs().to_vec())
                .collect::<Vec<_>>()
        );
        for s in &sols.solutions {
            assert!(s.residual.vanishes(1e-10));
        }
    }

    #[test]
    fn offset_handles_block_balances() {
        let problem = offset_problem();
        let cfg = heun_block_config(&problem, &offset_poly()).unwrap();
        let gaps = cfg.theta_gaps();
        assert!((gaps[0] + 97.0 / 120.0).abs() < 1e-12);
        assert!((gaps[1] + 379.0 / 4335.0).abs() < 1e-12);
        assert!((gaps[2] + 464537.0 / 615570.0).abs() < 1e-12);
        assert!(force_of(&cfg).unwrap().max_abs_force < 1e-10);
    }

    #[test]
    fn hypergeometric_reduction() {
        // Both outer nodes at 1 with c1 + c3 = n - 1 - b + c.
        let sols = heun_polynomials(2, (cr(1.0), cr(1.0)), 1.5, 1.5, -1.5).unwrap();
        let target = hypergeometric_poly(2, -1.5, 0.5).unwrap();
        let hit = sols
            .solutions
            .iter()
            .any(|s| (&s.poly - &target).max_abs_coeff() < 1e-9);
        assert!(hit);
        let data = LameData {
            n: 2,
            c: 0.5,
            b: -1.5,
            gamma0: cr(-3.0),
            punctures: vec![Puncture {
                at: cr(1.0),
                kappa: -3.0,
                gamma: cr(3.0),
            }],
        };
        assert!(lame_operator_residual(&target, &data)
            .unwrap()
            .vanishes(1e-12));
    }

    #[test]
    fn degree_one_closed_form() {
        // n = 1: M is 2x2, det is a quadratic in t.
        let problem = HeunProblem {
            n: 1,
            a: cr(1.0),
            s: cr(2.0),
            c1: 0.7,
            c3: 0.4,
            b: -0.3,
        };
        let det = problem.determinant();
        let m = problem.matrix();
        let by_hand = ComplexPolynomial::from_raw(vec![
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
            m[(0, 0)] + m[(1, 1)],
            cr(1.0),
        ]);
        assert!((&det - &by_hand).max_abs_coeff() < 1e-14);
        let sols = heun_polynomials(1, (cr(1.0), cr(2.0)), 0.7, 0.4, -0.3).unwrap();
        assert!(sols.solutions.len() + sols.dropped.len() == 2);
        for s in &sols.solutions {
            assert!(s.residual.vanishes(1e-10));
        }
    }

    #[test]
    fn invariant_violation_is_reported() {
        let mut data = offset_problem().lame_data(&offset_poly());
        data.gamma0 += cr(1.0);
        assert!(matches!(
            lame_operator_residual(&offset_poly(), &data),
            Err(Error::InvariantViolation(_))
        ));
    }
}
