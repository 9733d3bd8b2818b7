use serde::{Deserialize, Serialize};

use super::SolveOptions;
use crate::config::{Configuration, LayerResidues};
use crate::error::{Error, Result};
use crate::forces::jacobian;

/// Numerical rank of the force Jacobian. The scaling invariance caps the rank
/// at `N - 1`; reaching it means rigid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    /// Descending; one per node.
    pub singular_values: Vec<f64>,
    #[serde(rename = "rank")]
    pub numerical_rank: usize,
    pub rigid: bool,
}

impl RigidityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn rigidity(
    config: &Configuration,
    residues: &LayerResidues,
    options: &SolveOptions,
) -> Result<RigidityReport> {
    let jac = jacobian(config, residues)?;
    let n = jac.nrows();
    let mut singular_values: Vec<f64> = jac.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let max = singular_values.first().copied().unwrap_or(0.0);
    let numerical_rank = singular_values
        .iter()
        .filter(|&&s| s > options.rank_rel_tol * max)
        .count();
    Ok(RigidityReport {
        singular_values,
        numerical_rank,
        rigid: numerical_rank + 1 == n,
    })
}

/// Derives the residues, then calls [`rigidity`].
pub fn rigidity_of(config: &Configuration, options: &SolveOptions) -> Result<RigidityReport> {
    let residues = config.derive_residues()?;
    rigidity(config, &residues, options)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::poly::four_end_config;

    #[test]
    fn two_roots_of_unity() {
        let cfg = four_end_config(2, 0.0).unwrap();
        let r = rigidity_of(&cfg, &SolveOptions::default()).unwrap();
        assert_eq!(r.singular_values.len(), 2);
        assert!((r.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(r.singular_values[1] < 1e-14);
        assert_eq!(r.numerical_rank, 1);
        assert!(r.rigid);
    }

    #[test]
    fn five_roots_of_unity_rigid_under_scaling() {
        let cfg = four_end_config(5, 0.0).unwrap();
        let opts = SolveOptions::default();
        let r = rigidity_of(&cfg, &opts).unwrap();
        assert_eq!(r.numerical_rank, 4);
        assert!(r.rigid);
        let scaled = rigidity_of(&cfg.scaled(Complex64::new(-3.0, 7.5)), &opts).unwrap();
        assert_eq!(scaled.numerical_rank, 4);
        assert!(scaled.rigid);
    }

    #[test]
    fn json_shape() {
        let cfg = four_end_config(2, 0.0).unwrap();
        let r = rigidity_of(&cfg, &SolveOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rank"], 1);
        assert_eq!(v["rigid"], true);
        assert_eq!(v["singular_values"].as_array().unwrap().len(), 2);
        assert_eq!(RigidityReport::from_json(&r.to_json()).unwrap(), r);
    }
}
