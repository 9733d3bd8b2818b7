//! Closed-form balanced configurations: roots of unity and hypergeometric
//! roots.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::{hypergeometric_poly, poly_roots, simple_root_check};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::forces::force_of;

const ROOT_TOL: f64 = 1e-10;

/// One layer of `n` nodes at the `n`-th roots of unity between two planes.
///
/// The layer residue is `c_1 = 1` and the slope gap is `-n`; `rotation` is the
/// remaining horizontal-rotation gauge `theta_{1,0}`. The end slopes are
/// `left = (x, x - n)` and `right = (n - x, -x)`.
pub fn four_end_config(n: usize, rotation: f64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::ShapeMismatch(
            "a layer needs at least one node".into(),
        ));
    }
    let nodes = (1..=n)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect();
    let nf = n as f64;
    let config = Configuration::new(
        vec![nodes],
        vec![rotation, rotation - nf],
        vec![nf - rotation, -rotation],
    );
    config.validate()?;
    Ok(config)
}

fn c2_of(n: usize, b: f64, c: f64) -> f64 {
    n as f64 - 1.0 - b + c
}

/// Configuration of type `(n, 1)`: the first layer sits at the roots of
/// `2F1(-n, b; c; z)`, the second at `1`, with `c_1 = 1` and
/// `c_2 = n - 1 - b + c`.
pub fn n1_config(n: usize, b: f64, c: f64) -> Result<Configuration> {
    let c2 = c2_of(n, b, c);
    if c2.abs() <= ROOT_TOL {
        return Err(Error::ZeroC2);
    }
    let p = hypergeometric_poly(n, b, c)?;
    let roots = poly_roots(&p)?;
    simple_root_check(&roots, ROOT_TOL)?;
    let one = Complex64::new(1.0, 0.0);
    for z in &roots {
        if z.norm() <= ROOT_TOL || (z - one).norm() <= ROOT_TOL {
            return Err(Error::RootAtPuncture(z.to_string()));
        }
    }
    let nf = n as f64;
    let gaps = [c - 1.0, -nf * b / c2 - c2];
    let config = Configuration::from_residues_and_gaps(vec![roots, vec![one]], &[1.0, c2], &gaps)?;
    let report = force_of(&config)?;
    if report.max_abs_force >= 1e-9 {
        return Err(Error::ConsistencyFailure(format!(
            "hypergeometric configuration leaves max |F| = {:e}",
            report.max_abs_force
        )));
    }
    Ok(config)
}

/// The four embeddedness inequalities of the `(n, 1)` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct N1Embedding {
    pub c_below_one: bool,
    pub b_above_minus_n: bool,
    pub c2_squared_above_minus_nb: bool,
    pub c2_squared_above_n_c2_plus_b: bool,
}

impl N1Embedding {
    pub fn embedded(&self) -> bool {
        self.c_below_one
            && self.b_above_minus_n
            && self.c2_squared_above_minus_nb
            && self.c2_squared_above_n_c2_plus_b
    }
}

pub fn n1_embedding_flags(n: usize, b: f64, c: f64) -> N1Embedding {
    let nf = n as f64;
    let c2 = c2_of(n, b, c);
    N1Embedding {
        c_below_one: c < 1.0,
        b_above_minus_n: b > -nf,
        c2_squared_above_minus_nb: c2 * c2 > -nf * b,
        c2_squared_above_n_c2_plus_b: c2 * c2 > nf * (c2 + b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TOL_LINEAR;

    #[test]
    fn roots_of_unity_balance() {
        for n in 1..=12 {
            let cfg = four_end_config(n, 0.3).unwrap();
            assert!(cfg.theta1().abs() < TOL_LINEAR);
            assert!(cfg.theta2().abs() < 1e-12);
            let res = cfg.derive_residues().unwrap();
            assert!((res.get(1) - 1.0).abs() < 1e-15);
            assert!(force_of(&cfg).unwrap().max_abs_force < 1e-12, "n={}", n);
        }
    }

    #[test]
    fn roots_of_unity_ode() {
        use crate::poly::ComplexPolynomial;
        for n in 1..=8usize {
            let mut coeffs = vec![0.0; n + 1];
            coeffs[0] = -1.0;
            coeffs[n] = 1.0;
            let p = ComplexPolynomial::from_real(&coeffs);
            let lhs = &p.derive().derive().shift(1)
                - &p.derive().scale(Complex64::new(n as f64 - 1.0, 0.0));
            assert!(lhs.is_zero());
        }
    }

    #[test]
    fn hypergeometric_n2_example() {
        let cfg = n1_config(2, -1.5, 0.5).unwrap();
        let res = cfg.derive_residues().unwrap();
        assert!((res.get(2) - 3.0).abs() < 1e-14);
        let gaps = cfg.theta_gaps();
        assert!((gaps[0] + 0.5).abs() < 1e-14);
        assert!((gaps[1] + 2.0).abs() < 1e-14);
        let q = &cfg.nodes[0];
        let prod = q[0] * q[1];
        assert!((prod - 1.0).norm() < 1e-12);
        let mut re: Vec<f64> = q.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let s = 2.0f64.sqrt();
        assert!((re[0] - (-3.0 - 2.0 * s)).abs() < 1e-12);
        assert!((re[1] - (-3.0 + 2.0 * s)).abs() < 1e-12);
        assert!(force_of(&cfg).unwrap().max_abs_force < 1e-12);
    }

    #[test]
    fn embedding_flags_match_monotone_slopes() {
        for &(n, b, c) in &[
            (2usize, -1.5, 0.5),
            (3, -2.5, 0.5),
            (5, -4.3, 0.3),
            (3, -1.0, 0.5),
            (2, -1.5, 1.5),
        ] {
            let flags = n1_embedding_flags(n, b, c);
            let Ok(cfg) = n1_config(n, b, c) else {
                continue;
            };
            let strictly = |v: &[f64]| v.windows(2).all(|w| w[0] > w[1]);
            let monotone = strictly(&cfg.theta_left) && strictly(&cfg.theta_right);
            assert_eq!(flags.embedded(), monotone, "n={} b={} c={}", n, b, c);
        }
    }

    #[test]
    fn rejections() {
        assert!(matches!(n1_config(2, 0.5, -0.5), Err(Error::ZeroC2)));
        assert!(matches!(
            n1_config(2, -1.0, 0.5),
            Err(Error::DegenerateDegree(_))
        ));
        assert!(matches!(n1_config(2, -1.5, -1.0), Err(Error::BadC(_))));
    }
}
