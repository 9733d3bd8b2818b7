//! Embeddedness diagnostics: strictly decreasing end slopes, concavity of
//! `n_l c_l` along symmetric chains, and the inversion symmetry of a layered
//! configuration.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Configuration, LayerResidues};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddednessReport {
    pub left_decreasing: bool,
    pub right_decreasing: bool,
    /// First 1-based plane `p` with `theta_{p,0} <= theta_{p+1,0}`.
    pub left_violation: Option<usize>,
    /// First 1-based plane `p` with `theta_{p,inf} <= theta_{p+1,inf}`.
    pub right_violation: Option<usize>,
}

impl EmbeddednessReport {
    pub fn embedded(&self) -> bool {
        self.left_decreasing && self.right_decreasing
    }
}

fn first_non_decrease(values: &[f64]) -> Option<usize> {
    values.windows(2).position(|w| w[0] <= w[1]).map(|i| i + 1)
}

pub fn embeddedness_check(config: &Configuration) -> EmbeddednessReport {
    let left_violation = first_non_decrease(&config.theta_left);
    let right_violation = first_non_decrease(&config.theta_right);
    EmbeddednessReport {
        left_decreasing: left_violation.is_none(),
        right_decreasing: right_violation.is_none(),
        left_violation,
        right_violation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub holds: bool,
    /// First 1-based layer where `2 w_l > w_{l-1} + w_{l+1}` fails.
    pub violation: Option<usize>,
}

/// Strict concavity of `w_1..w_L` with `w_0 = w_{L+1} = 0`.
pub fn concavity_check(weights: &[f64]) -> ConcavityReport {
    let at = |i: isize| -> f64 {
        if i < 1 || i as usize > weights.len() {
            0.0
        } else {
            weights[i as usize - 1]
        }
    };
    let violation = (1..=weights.len() as isize)
        .find(|&l| 2.0 * at(l) <= at(l - 1) + at(l + 1))
        .map(|l| l as usize);
    ConcavityReport {
        holds: violation.is_none(),
        violation,
    }
}

/// `n_l c_l` for every layer.
pub fn chain_weights(config: &Configuration, residues: &LayerResidues) -> Vec<f64> {
    (1..=config.layer_count())
        .map(|l| config.layer_size(l as isize) as f64 * residues.get(l as isize))
        .collect()
}

/// Largest distance between a layer's nodes and their images under
/// `z -> q_{1,1}^2 / z`, matched greedily. Zero means every layer is mapped
/// onto itself, i.e. the configuration has a rotational symmetry in the
/// logarithmic strip about `ln q_{1,1}`.
pub fn inversion_symmetry_defect(config: &Configuration) -> f64 {
    let Some(center) = config.nodes.first().and_then(|l| l.first()) else {
        return 0.0;
    };
    let kappa = center * center;
    let mut worst: f64 = 0.0;
    for layer in &config.nodes {
        let images: Vec<Complex64> = layer.iter().map(|z| kappa / z).collect();
        let mut used = vec![false; layer.len()];
        for z in layer {
            let best = images
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, (w - z).norm() / z.norm().max(1.0)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, d)) = best {
                used[j] = true;
                worst = worst.max(d);
            }
        }
    }
    worst
}
