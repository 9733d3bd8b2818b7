//! Closed-form balance for one node per layer.

use num_complex::Complex64;

use super::embeddedness_check;
use super::newton::THETA2_GATE;
use crate::config::{Configuration, TOL_LINEAR};
use crate::error::{Error, Result};
use crate::forces::force_of;

const DEGENERATE_TOL: f64 = 1e-14;

/// The unique balanced configuration with `n_l = 1` for all layers and
/// `q_1 = 1`, given `L + 1` left and right end slopes.
///
/// With `c_l = sum_{i<=l} (theta_{i,0} + theta_{i,inf})` and
/// `Q_l = sum_{i<=l} c_i (theta_{i+1,0} + theta_{i,inf})`, the nodes follow
/// `q_{l+1} = q_l (1 - c_{l+1} c_l / Q_l)`.
pub fn genus0_solve(theta_left: &[f64], theta_right: &[f64]) -> Result<Configuration> {
    if theta_left.len() < 2 || theta_left.len() != theta_right.len() {
        return Err(Error::ShapeMismatch(format!(
            "need matching end slopes for at least one layer, got {} and {}",
            theta_left.len(),
            theta_right.len()
        )));
    }
    let layers = theta_left.len() - 1;
    let probe = Configuration::new(
        vec![vec![Complex64::new(1.0, 0.0)]; layers],
        theta_left.to_vec(),
        theta_right.to_vec(),
    );
    let t1 = probe.theta1();
    if t1.abs() > TOL_LINEAR {
        return Err(Error::Theta1Nonzero(t1));
    }
    let t2 = probe.theta2();
    if t2.abs() > THETA2_GATE {
        return Err(Error::Theta2Nonzero(t2));
    }

    let mut c = Vec::with_capacity(layers);
    let mut acc = 0.0;
    for l in 0..layers {
        acc += theta_left[l] + theta_right[l];
        if acc.abs() <= DEGENERATE_TOL {
            return Err(Error::DegenerateQtilde(l + 1));
        }
        c.push(acc);
    }

    let mut q = vec![Complex64::new(1.0, 0.0)];
    let mut qt = 0.0;
    for l in 0..layers - 1 {
        qt += c[l] * (theta_left[l + 1] + theta_right[l]);
        if qt.abs() <= DEGENERATE_TOL {
            return Err(Error::DegenerateQtilde(l + 1));
        }
        let factor = 1.0 - c[l + 1] * c[l] / qt;
        if factor.abs() <= DEGENERATE_TOL {
            return Err(Error::DegenerateQtilde(l + 1));
        }
        let last = *q.last().unwrap();
        q.push(last * factor);
    }

    let config = Configuration::new(
        q.into_iter().map(|z| vec![z]).collect(),
        theta_left.to_vec(),
        theta_right.to_vec(),
    );
    let report = force_of(&config)?;
    let scale = c.iter().map(|x| x * x).fold(1.0, f64::max);
    if report.max_abs_force >= 1e-12 * scale {
        return Err(Error::ConsistencyFailure(format!(
            "closed form leaves max |F| = {:e}",
            report.max_abs_force
        )));
    }
    if embeddedness_check(&config).embedded() {
        for (l, layer) in config.nodes.iter().enumerate() {
            let expected = if l % 2 == 0 { 1.0 } else { -1.0 };
            if layer[0].re * expected <= 0.0 {
                return Err(Error::ConsistencyFailure(format!(
                    "node {} = {} breaks sign alternation",
                    l + 1,
                    layer[0]
                )));
            }
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_layer_example() {
        let cfg = genus0_solve(&[1.0, 0.0, -1.0], &[1.0, 0.0, -1.0]).unwrap();
        let res = cfg.derive_residues().unwrap();
        assert_eq!(res.interior(), &[2.0, 2.0]);
        assert_eq!(cfg.nodes[0][0], Complex64::new(1.0, 0.0));
        assert!((cfg.nodes[1][0] + 1.0).norm() < 1e-15);
        assert!(force_of(&cfg).unwrap().max_abs_force < 1e-14);
    }

    #[test]
    fn single_layer() {
        let cfg = genus0_solve(&[0.5, -0.5], &[0.5, -0.5]).unwrap();
        assert_eq!(cfg.layer_count(), 1);
        assert!(force_of(&cfg).unwrap().max_abs_force < 1e-15);
    }

    #[test]
    fn theta2_rejected() {
        assert!(matches!(
            genus0_solve(&[0.0, -1.0, -1.5], &[2.0, 1.0, -0.5]),
            Err(Error::Theta2Nonzero(_))
        ));
    }

    #[test]
    fn degenerate_residue_rejected() {
        // c_1 = 0.
        assert!(matches!(
            genus0_solve(&[1.0, 0.0, -1.0], &[-1.0, 1.0, 0.0]),
            Err(Error::DegenerateQtilde(1))
        ));
    }
}
