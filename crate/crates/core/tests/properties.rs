use std::f64::consts::PI;

use nalgebra::DVector;
use necks::config::Configuration;
use necks::engine::{rigidity_of, SolveOptions};
use necks::forces::{force, force_alt, force_residue_oracle, jacobian, Parity};
use necks::poly::{four_end_config, fp_residual, poly_roots, ComplexPolynomial};
use num_complex::Complex64;
use proptest::prelude::*;

fn node() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -PI..PI).prop_map(|(r, t)| Complex64::new(r, t).exp())
}

fn nodes_well_separated(layers: &[Vec<Complex64>]) -> bool {
    let all: Vec<&Vec<Complex64>> = layers.iter().collect();
    for (l, layer) in all.iter().enumerate() {
        for (k, a) in layer.iter().enumerate() {
            let same = layer.iter().skip(k + 1);
            let next = all.get(l + 1).into_iter().flat_map(|v| v.iter());
            if same.chain(next).any(|b| (a - b).norm() < 1e-2) {
                return false;
            }
        }
    }
    true
}

prop_compose! {
    fn configuration()(layers in prop::collection::vec(prop::collection::vec(node(), 1..4), 1..4))
        (c in prop::collection::vec(0.5f64..2.0, layers.len()),
         left in prop::collection::vec(-2.0f64..2.0, layers.len() + 1),
         layers in Just(layers)) -> Configuration {
        Configuration::from_residues_and_left(layers, &c, left).unwrap()
    }
}

fn scale_of(values: &[Complex64]) -> f64 {
    1.0 + values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn force_forms_agree(cfg in configuration()) {
        prop_assume!(nodes_well_separated(&cfg.nodes));
        let res = cfg.derive_residues().unwrap();
        let f = force(&cfg, &res).unwrap().flat();
        let tol = 1e-10 * scale_of(&f);
        for other in [
            force_residue_oracle(&cfg, &res).unwrap().flat(),
            force_alt(&cfg, &res, Parity::Odd).unwrap().flat(),
            force_alt(&cfg, &res, Parity::Even).unwrap().flat(),
        ] {
            for (a, b) in f.iter().zip(&other) {
                prop_assert!((a - b).norm() <= tol);
            }
        }
    }

    #[test]
    fn total_force_is_theta2(cfg in configuration()) {
        prop_assume!(nodes_well_separated(&cfg.nodes));
        let report = force(&cfg, &cfg.derive_residues().unwrap()).unwrap();
        prop_assert!((report.total() - report.theta2).norm() <= 1e-10 * scale_of(&report.flat()));
    }

    #[test]
    fn scaling_and_conjugation(cfg in configuration(), lambda in node()) {
        prop_assume!(nodes_well_separated(&cfg.nodes));
        let res = cfg.derive_residues().unwrap();
        let f = force(&cfg, &res).unwrap().flat();
        let tol = 1e-10 * scale_of(&f);
        let scaled = force(&cfg.scaled(lambda), &res).unwrap().flat();
        let conj = force(&cfg.conjugated(), &res).unwrap().flat();
        for ((a, s), c) in f.iter().zip(&scaled).zip(&conj) {
            prop_assert!((a - s).norm() <= tol);
            prop_assert!((a.conj() - c).norm() <= tol);
        }
    }

    #[test]
    fn jacobian_annihilates_nodes(cfg in configuration()) {
        prop_assume!(nodes_well_separated(&cfg.nodes));
        let jac = jacobian(&cfg, &cfg.derive_residues().unwrap()).unwrap();
        let q = DVector::from_vec(cfg.flat_nodes());
        prop_assert!((&jac * &q).norm() <= 1e-10 * (1.0 + jac.norm() * q.norm()));
    }

    #[test]
    fn fp_residual_degree_and_top(cfg in configuration()) {
        prop_assume!(nodes_well_separated(&cfg.nodes));
        let res = cfg.derive_residues().unwrap();
        let polys: Vec<ComplexPolynomial> =
            cfg.nodes.iter().map(|l| ComplexPolynomial::from_roots(l)).collect();
        let r = fp_residual(&polys, res.interior(), &cfg.theta_gaps()).unwrap();
        let top = r.top_coefficient(cfg.node_count());
        prop_assert!((top - cfg.theta2()).norm() <= 1e-9 * (1.0 + r.scale));
    }

    #[test]
    fn rotation_gauge_keeps_theta(cfg in configuration(), shift in -2.0f64..2.0) {
        let mut rotated = cfg.clone();
        for t in rotated.theta_left.iter_mut() {
            *t += shift;
        }
        for t in rotated.theta_right.iter_mut() {
            *t -= shift;
        }
        prop_assert!((rotated.theta1() - cfg.theta1()).abs() < 1e-12);
        prop_assert!((rotated.theta2() - cfg.theta2()).abs() < 1e-10 * (1.0 + cfg.theta2().abs()));
    }

    /// The gradient of (Theta1, Theta2) in the end slopes has a nonvanishing
    /// 2x2 minor whenever two left slopes differ.
    #[test]
    fn theta_map_has_rank_two(left in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let right: Vec<f64> = left.iter().rev().map(|x| -x).collect();
        let spread = left.iter().cloned().fold(f64::MIN, f64::max)
            - left.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        let base = Configuration::new(vec![vec![Complex64::new(1.0, 0.0)]; left.len() - 1], left, right);
        let h = 1e-6;
        let ends = 2 * base.theta_left.len();
        let grad: Vec<(f64, f64)> = (0..ends)
            .map(|e| {
                let bump = |sign: f64| {
                    let mut c = base.clone();
                    let half = c.theta_left.len();
                    if e < half { c.theta_left[e] += sign * h } else { c.theta_right[e - half] += sign * h }
                    (c.theta1(), c.theta2())
                };
                let (p, m) = (bump(1.0), bump(-1.0));
                ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h))
            })
            .collect();
        let best_minor = (0..ends)
            .flat_map(|i| (0..ends).map(move |j| (i, j)))
            .map(|(i, j)| (grad[i].0 * grad[j].1 - grad[j].0 * grad[i].1).abs())
            .fold(0.0, f64::max);
        prop_assert!(best_minor >= 0.5 * spread);
    }

    #[test]
    fn roots_have_small_backward_error(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10)) {
        let mut c: Vec<Complex64> = coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        c.push(Complex64::new(1.0, 0.0));
        let p = ComplexPolynomial::new(c);
        let degree = p.degree().unwrap() as i32;
        for z in poly_roots(&p).unwrap() {
            let bound = 1e-10 * p.max_abs_coeff() * z.norm().max(1.0).powi(degree);
            prop_assert!(p.eval(z).norm() <= bound);
        }
    }

    #[test]
    fn rigidity_survives_scaling(n in 2usize..9, lambda in node(), rotation in -1.0f64..1.0) {
        let cfg = four_end_config(n, rotation).unwrap();
        let opts = SolveOptions::default();
        let a = rigidity_of(&cfg, &opts).unwrap();
        let b = rigidity_of(&cfg.scaled(lambda), &opts).unwrap();
        prop_assert_eq!(a.numerical_rank, b.numerical_rank);
        prop_assert!(b.rigid);
    }
}
