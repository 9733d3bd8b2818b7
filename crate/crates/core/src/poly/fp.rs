//! The single polynomial residual whose vanishing is equivalent to balance,
//! and a Newton solver on the coefficients of the per-layer polynomials.
//!
//! With `P = prod P_l` the residual is
//!
//! ```text
//! sum_l  c_l^2 z P_l'' P/P_l
//!      - c_l c_{l+1} z P_l' P_{l+1}' P/(P_l P_{l+1})
//!      + (c_l^2 + c_l g_l) P_l' P/P_l
//! ```
//!
//! where `g_l` is the slope gap of layer `l`. Every quotient above is a plain
//! product of the remaining factors, so no division is ever performed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{poly_roots, simple_root_check, ComplexPolynomial};
use crate::config::Configuration;
use crate::error::{Error, Result, Stall};

const ROOT_TOL: f64 = 1e-10;
const DERIVATIVE_TOL: f64 = 1e-6;

/// One multilinear term `coef * z^shift * prod_m P_m^(order_m)`; an order of
/// `None` means the factor is absent.
#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    shift: usize,
    orders: Vec<Option<usize>>,
}

fn terms(layers: usize, residues: &[f64], gaps: &[f64]) -> Vec<Term> {
    let mut out = Vec::with_capacity(3 * layers);
    for l in 0..layers {
        let c = residues[l];
        let with = |own: usize| -> Vec<Option<usize>> {
            (0..layers)
                .map(|m| Some(if m == l { own } else { 0 }))
                .collect()
        };
        out.push(Term {
            coef: c * c,
            shift: 1,
            orders: with(2),
        });
        if l + 1 < layers {
            let mut orders = with(1);
            orders[l + 1] = Some(1);
            out.push(Term {
                coef: -c * residues[l + 1],
                shift: 1,
                orders,
            });
        }
        out.push(Term {
            coef: c * c + c * gaps[l],
            shift: 0,
            orders: with(1),
        });
    }
    out
}

fn derivative(p: &ComplexPolynomial, order: usize) -> ComplexPolynomial {
    (0..order).fold(p.clone(), |acc, _| acc.derive())
}

/// Falling factorial `i (i-1) ... (i-k+1)`.
fn falling(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}

fn evaluate_terms(polys: &[ComplexPolynomial], terms: &[Term]) -> Vec<ComplexPolynomial> {
    terms
        .iter()
        .map(|t| {
            let prod = t
                .orders
                .iter()
                .zip(polys)
                .filter_map(|(o, p)| o.map(|o| derivative(p, o)))
                .fold(ComplexPolynomial::one(), |acc, f| &acc * &f);
            prod.shift(t.shift).scale(Complex64::new(t.coef, 0.0))
        })
        .collect()
}

/// Residual polynomial plus the largest coefficient among its terms, the
/// natural yardstick for "vanishes".
#[derive(Debug, Clone, PartialEq)]
pub struct FpResidual {
    pub poly: ComplexPolynomial,
    pub scale: f64,
}

impl FpResidual {
    pub fn norm(&self) -> f64 {
        self.poly.max_abs_coeff()
    }

    pub fn vanishes(&self, rel_tol: f64) -> bool {
        self.norm() <= rel_tol * self.scale.max(f64::MIN_POSITIVE)
    }

    /// Coefficient of `z^(N-1)`, which equals `Theta2` for monic factors.
    pub fn top_coefficient(&self, total_degree: usize) -> Complex64 {
        if total_degree == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.poly.coeff(total_degree - 1)
        }
    }
}

fn raw_residual(polys: &[ComplexPolynomial], terms: &[Term]) -> FpResidual {
    let parts = evaluate_terms(polys, terms);
    let scale = parts
        .iter()
        .map(ComplexPolynomial::max_abs_coeff)
        .fold(0.0, f64::max);
    let poly = parts
        .iter()
        .fold(ComplexPolynomial::zero(), |acc, p| &acc + p);
    FpResidual { poly, scale }
}

fn check_shapes(polys: &[ComplexPolynomial], residues: &[f64], gaps: &[f64]) -> Result<()> {
    if polys.is_empty() || residues.len() != polys.len() || gaps.len() != polys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} polynomials need as many residues and gaps, got {} and {}",
            polys.len(),
            residues.len(),
            gaps.len()
        )));
    }
    for (l, p) in polys.iter().enumerate() {
        if !matches!(p.degree(), Some(d) if d >= 1) {
            return Err(Error::ShapeMismatch(format!(
                "layer {} polynomial has degree zero",
                l + 1
            )));
        }
    }
    Ok(())
}

/// Roots per layer, verifying they are simple and that adjacent layers share
/// none.
fn checked_roots(polys: &[ComplexPolynomial]) -> Result<Vec<Vec<Complex64>>> {
    let roots = polys.iter().map(poly_roots).collect::<Result<Vec<_>>>()?;
    for (p, r) in polys.iter().zip(&roots) {
        simple_root_check(r, ROOT_TOL)?;
        // A multiple root splits into a cluster of width ~sqrt(eps); its
        // derivative is then tiny compared with the size of its terms.
        let dp = p.derive();
        for z in r {
            let size = dp
                .coeffs()
                .iter()
                .rev()
                .fold(0.0, |acc, a| acc * z.norm() + a.norm());
            if dp.eval(*z).norm() <= DERIVATIVE_TOL * size {
                return Err(Error::NonSimpleRoots(format!(
                    "root {} is numerically multiple",
                    z
                )));
            }
        }
    }
    for (l, pair) in roots.windows(2).enumerate() {
        for a in &pair[0] {
            for b in &pair[1] {
                if (a - b).norm() <= ROOT_TOL * a.norm().max(1.0) {
                    return Err(Error::SharedRoots(format!(
                        "layers {} and {} share root {}",
                        l + 1,
                        l + 2,
                        a
                    )));
                }
            }
        }
    }
    Ok(roots)
}

/// Evaluates the residual for per-layer polynomials, residues `c_1..c_L` and
/// slope gaps `theta_{l+1,0} - theta_{l,0}`.
pub fn fp_residual(
    polys: &[ComplexPolynomial],
    residues: &[f64],
    theta_gaps: &[f64],
) -> Result<FpResidual> {
    check_shapes(polys, residues, theta_gaps)?;
    checked_roots(polys)?;
    Ok(raw_residual(
        polys,
        &terms(polys.len(), residues, theta_gaps),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpOptions {
    /// Target for the largest residual coefficient, relative to the term scale.
    pub tol: f64,
    pub max_iter: usize,
    pub damping_floor: f64,
}

impl Default for FpOptions {
    fn default() -> Self {
        FpOptions {
            tol: 1e-12,
            max_iter: 100,
            damping_floor: 2f64.powi(-20),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpSolution {
    pub polys: Vec<ComplexPolynomial>,
    pub roots: Vec<Vec<Complex64>>,
    pub iterations: usize,
    /// Largest residual coefficient divided by the term scale.
    pub residual: f64,
    pub history: Vec<f64>,
}

impl FpSolution {
    /// Node configuration carried by the solved roots, with the rotation
    /// gauge `theta_{1,0} = 0`.
    pub fn to_configuration(&self, residues: &[f64], theta_gaps: &[f64]) -> Result<Configuration> {
        Configuration::from_residues_and_gaps(self.roots.clone(), residues, theta_gaps)
    }
}

/// Unknowns: every non-leading coefficient of every (monic) `P_l`, except the
/// constant coefficient of `P_1`, which carries the scaling gauge.
struct Layout {
    degrees: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(polys: &[ComplexPolynomial]) -> Self {
        let degrees: Vec<usize> = polys.iter().map(|p| p.degree().unwrap_or(0)).collect();
        let total = degrees.iter().sum();
        Layout { degrees, total }
    }

    fn unknowns(&self) -> usize {
        self.total - 1
    }

    /// `(layer, coefficient index)` for each unknown.
    fn slots(&self) -> Vec<(usize, usize)> {
        self.degrees
            .iter()
            .enumerate()
            .flat_map(|(l, &d)| (0..d).map(move |i| (l, i)))
            .skip(1)
            .collect()
    }

    fn apply(
        &self,
        polys: &[ComplexPolynomial],
        delta: &DVector<Complex64>,
        step: f64,
    ) -> Vec<ComplexPolynomial> {
        let mut coeffs: Vec<Vec<Complex64>> = polys.iter().map(|p| p.coeffs().to_vec()).collect();
        for (k, (l, i)) in self.slots().into_iter().enumerate() {
            coeffs[l][i] -= delta[k] * step;
        }
        coeffs
            .into_iter()
            .map(ComplexPolynomial::from_raw)
            .collect()
    }
}

fn equations(res: &FpResidual, count: usize) -> DVector<Complex64> {
    DVector::from_iterator(count, (0..count).map(|i| res.poly.coeff(i)))
}

fn measure(res: &FpResidual, count: usize) -> f64 {
    let worst = (0..count)
        .map(|i| res.poly.coeff(i).norm())
        .fold(0.0, f64::max);
    let r = worst / res.scale.max(f64::MIN_POSITIVE);
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

/// Jacobian of coefficients `0..N-2` of the residual with respect to the
/// unknowns. Each term is multilinear in the layer polynomials, so the
/// derivative with respect to coefficient `i` of `P_m` replaces that factor
/// by the matching derivative of `z^i`.
fn jacobian(polys: &[ComplexPolynomial], terms: &[Term], layout: &Layout) -> DMatrix<Complex64> {
    let n = layout.unknowns();
    let slots = layout.slots();
    let mut jac = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for t in terms {
        let factors: Vec<Option<ComplexPolynomial>> = t
            .orders
            .iter()
            .zip(polys)
            .map(|(o, p)| o.map(|o| derivative(p, o)))
            .collect();
        for (m, order) in t.orders.iter().enumerate() {
            let Some(order) = *order else { continue };
            let others = factors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != m)
                .filter_map(|(_, f)| f.as_ref())
                .fold(ComplexPolynomial::one(), |acc, f| &acc * f);
            for (col, &(l, i)) in slots.iter().enumerate() {
                if l != m || i < order {
                    continue;
                }
                let weight = t.coef * falling(i, order);
                let offset = t.shift + i - order;
                for (k, a) in others.coeffs().iter().enumerate() {
                    let row = k + offset;
                    if row < n {
                        jac[(row, col)] += a * weight;
                    }
                }
            }
        }
    }
    jac
}

/// Damped Newton on the coefficients, starting from `seed_polys` (made monic;
/// the constant coefficient of the first one stays fixed).
pub fn fp_solve(
    layer_sizes: &[usize],
    residues: &[f64],
    theta_gaps: &[f64],
    seed_polys: &[ComplexPolynomial],
    options: &FpOptions,
) -> Result<FpSolution> {
    check_shapes(seed_polys, residues, theta_gaps)?;
    if seed_polys
        .iter()
        .map(|p| p.degree().unwrap_or(0))
        .ne(layer_sizes.iter().copied())
    {
        return Err(Error::ShapeMismatch(
            "seed polynomial degrees do not match the layer sizes".into(),
        ));
    }
    let mut polys = seed_polys
        .iter()
        .map(ComplexPolynomial::monic)
        .collect::<Result<Vec<_>>>()?;
    let layout = Layout::new(&polys);
    let count = layout.unknowns();
    let terms = terms(polys.len(), residues, theta_gaps);

    let mut res = raw_residual(&polys, &terms);
    let mut r = measure(&res, count);
    let mut history = vec![r];
    let mut iterations = 0;
    let mut stalled = false;
    while r > options.tol && iterations < options.max_iter && count > 0 {
        iterations += 1;
        let jac = jacobian(&polys, &terms, &layout);
        let rhs = equations(&res, count);
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(Error::SingularStep(iterations));
        };
        let mut step = 1.0;
        let mut accepted = None;
        while step >= options.damping_floor {
            let trial = layout.apply(&polys, &delta, step);
            let trial_res = raw_residual(&trial, &terms);
            let trial_r = measure(&trial_res, count);
            if trial_r < r {
                accepted = Some((trial, trial_res, trial_r));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((p, pr, rr)) => {
                polys = p;
                res = pr;
                r = rr;
                history.push(r);
            }
            None => {
                stalled = true;
                break;
            }
        }
    }

    let top = res.top_coefficient(layout.total);
    let converged = r <= options.tol || (stalled && r <= 10.0 * options.tol);
    let top_ok = top.norm() <= options.tol.max(1e-10) * res.scale.max(1.0);
    if !(converged && top_ok) {
        return Err(Error::NoConvergence(Box::new(Stall {
            iterations,
            residual: r,
            history,
            best_config: None,
            best_polys: polys,
            top_coefficient: Some(top.re),
        })));
    }
    let roots = checked_roots(&polys)?;
    Ok(FpSolution {
        polys,
        roots,
        iterations,
        residual: r,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::force_of;

    fn lin(a: f64) -> ComplexPolynomial {
        ComplexPolynomial::from_real(&[-a, 1.0])
    }

    #[test]
    fn genus0_residual_vanishes() {
        let r = fp_residual(&[lin(1.0), lin(-1.0)], &[2.0, 2.0], &[-1.0, -1.0]).unwrap();
        assert!(r.poly.is_zero() || r.norm() < 1e-15);
    }

    #[test]
    fn genus0_perturbed_residual() {
        let r = fp_residual(&[lin(1.1), lin(-1.0)], &[2.0, 2.0], &[-1.0, -1.0]).unwrap();
        assert!(r.norm() > 0.01);
    }

    #[test]
    fn roots_of_unity_residual_vanishes() {
        for n in 1..=8usize {
            let mut coeffs = vec![0.0; n + 1];
            coeffs[0] = -1.0;
            coeffs[n] = 1.0;
            let p = ComplexPolynomial::from_real(&coeffs);
            let r = fp_residual(&[p], &[1.0], &[-(n as f64)]).unwrap();
            assert!(r.vanishes(1e-14), "n={}", n);
        }
    }

    #[test]
    fn shared_and_repeated_roots_rejected() {
        let e = fp_residual(&[lin(1.0), lin(1.0)], &[2.0, 2.0], &[-1.0, -1.0]);
        assert!(matches!(e, Err(Error::SharedRoots(_))));
        let sq = ComplexPolynomial::from_real(&[1.0, -2.0, 1.0]);
        assert!(matches!(
            fp_residual(&[sq], &[1.0], &[-2.0]),
            Err(Error::NonSimpleRoots(_))
        ));
    }

    #[test]
    fn top_coefficient_is_theta2() {
        let polys = [lin(1.0), ComplexPolynomial::from_real(&[0.3, -0.2, 1.0])];
        let (c, gaps) = ([1.3, 0.7], [0.4, -1.1]);
        let r = fp_residual(&polys, &c, &gaps).unwrap();
        let cfg = Configuration::from_residues_and_gaps(
            vec![
                vec![Complex64::new(1.0, 0.0)],
                poly_roots(&polys[1]).unwrap(),
            ],
            &c,
            &gaps,
        )
        .unwrap();
        assert!((r.top_coefficient(3) - cfg.theta2()).norm() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let polys = vec![
            lin(1.0),
            ComplexPolynomial::from_real(&[0.3, -0.2, 1.0]),
            lin(-2.5),
        ];
        let (c, gaps) = ([1.3, 0.7, 0.9], [0.4, -1.1, -0.3]);
        let t = terms(3, &c, &gaps);
        let layout = Layout::new(&polys);
        let jac = jacobian(&polys, &t, &layout);
        let n = layout.unknowns();
        let base = equations(&raw_residual(&polys, &t), n);
        let h = 1e-7;
        for col in 0..n {
            let mut delta = DVector::from_element(n, Complex64::new(0.0, 0.0));
            delta[col] = Complex64::new(-h, 0.0);
            let moved = equations(&raw_residual(&layout.apply(&polys, &delta, 1.0), &t), n);
            for row in 0..n {
                let fd = (moved[row] - base[row]) / h;
                assert!((fd - jac[(row, col)]).norm() < 1e-5, "({},{})", row, col);
            }
        }
    }

    #[test]
    fn genus0_solve_from_seed() {
        let sol = fp_solve(
            &[1, 1],
            &[2.0, 2.0],
            &[-1.0, -1.0],
            &[lin(1.0), lin(-1.3)],
            &FpOptions::default(),
        )
        .unwrap();
        assert!((sol.polys[0].coeff(0) + 1.0).norm() < 1e-14);
        assert!((sol.polys[1].coeff(0) - 1.0).norm() < 1e-12);
        let cfg = sol.to_configuration(&[2.0, 2.0], &[-1.0, -1.0]).unwrap();
        assert!(force_of(&cfg).unwrap().max_abs_force < 1e-11);
    }

    #[test]
    fn infeasible_gaps_stall_at_theta2() {
        let err = fp_solve(
            &[1, 1],
            &[2.0, 2.0],
            &[-1.0, -0.5],
            &[lin(1.0), lin(-1.3)],
            &FpOptions::default(),
        )
        .unwrap_err();
        let Error::NoConvergence(stall) = err else {
            panic!("expected NoConvergence")
        };
        let top = stall.top_coefficient.unwrap();
        assert!(top.abs() > 0.1, "top = {}", top);
    }
}
