//! Published parameter sets.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Configuration;
use crate::error::Result;
use crate::poly::{ComplexPolynomial, HeunProblem};

/// Layer sizes, residues and left end slopes; the right slopes follow from
/// the residue conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSet {
    pub name: &'static str,
    pub layer_sizes: Vec<usize>,
    pub residues: Vec<f64>,
    pub theta_left: Vec<f64>,
}

impl ParameterSet {
    /// `theta_{l+1,0} - theta_{l,0}`.
    pub fn gaps(&self) -> Vec<f64> {
        self.theta_left.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Configuration with the given nodes and these slopes.
    pub fn with_nodes(&self, nodes: Vec<Vec<Complex64>>) -> Result<Configuration> {
        Configuration::from_residues_and_left(nodes, &self.residues, self.theta_left.clone())
    }

    /// Placeholder nodes (distinct, nonzero) so the slopes can be inspected or
    /// handed to a multi-start solver as a template.
    pub fn template(&self) -> Result<Configuration> {
        let nodes = self
            .layer_sizes
            .iter()
            .enumerate()
            .map(|(l, &n)| {
                (0..n)
                    .map(|k| Complex64::new(1.0 + l as f64, 1.0 + k as f64))
                    .collect()
            })
            .collect();
        self.with_nodes(nodes)
    }
}

/// Type `(1,3,2)`, genus three, rotationally symmetric.
pub fn set_132() -> ParameterSet {
    ParameterSet {
        name: "1-3-2",
        layer_sizes: vec![1, 3, 2],
        residues: vec![2.0, 1.0, 13.0 / 16.0],
        theta_left: vec![0.0, -0.5, -27.0 / 16.0, -29.0 / 16.0],
    }
}

/// Type `(1,4,3)`, genus five.
pub fn set_143() -> ParameterSet {
    ParameterSet {
        name: "1-4-3",
        layer_sizes: vec![1, 4, 3],
        residues: vec![3.5, 1.0, 0.75],
        theta_left: vec![0.0, -2.0, -13.0 / 5.0, -541.0 / 180.0],
    }
}

/// Type `(1,7,3)`, genus eight.
pub fn set_173() -> ParameterSet {
    ParameterSet {
        name: "1-7-3",
        layer_sizes: vec![1, 7, 3],
        residues: vec![17.0 / 7.0, 1.0, 1.5],
        theta_left: vec![0.0, -0.5, -1.5, -2468.0 / 441.0],
    }
}

pub fn numerical_sets() -> Vec<ParameterSet> {
    vec![set_132(), set_143(), set_173()]
}

/// Offset-handle `(1,2,1)` block: `q_{3,1} = 2/3` with middle nodes
/// `-1/3` and `-23`.
pub fn offset_handles() -> (HeunProblem, ComplexPolynomial) {
    let problem = HeunProblem {
        n: 2,
        a: Complex64::new(1.0, 0.0),
        s: Complex64::new(2.0 / 3.0, 0.0),
        c1: 8.0 / 5.0,
        c3: 4189.0 / 2890.0,
        b: -9857.0 / 8670.0,
    };
    let p = ComplexPolynomial::from_roots(&[
        Complex64::new(-1.0 / 3.0, 0.0),
        Complex64::new(-23.0, 0.0),
    ]);
    (problem, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_are_consistent() {
        for set in numerical_sets() {
            let cfg = set.template().unwrap();
            assert!(cfg.theta1().abs() < 1e-12, "{}", set.name);
            assert!(cfg.theta2().abs() < 1e-12, "{}", set.name);
            let res = cfg.derive_residues().unwrap();
            for (a, b) in res.interior().iter().zip(&set.residues) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn right_slopes_of_132() {
        let cfg = set_132().template().unwrap();
        let want = [2.0, 1.5, 5.0 / 16.0, 3.0 / 16.0];
        for (a, b) in cfg.theta_right.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
