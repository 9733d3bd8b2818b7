//! Chaining normalized `(1, n, 1)` blocks into `(1, n_2, 1, n_4, ..., 1)`
//! configurations.

use num_complex::Complex64;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::forces::force_of;
use crate::poly::{heun_block_config, hypergeometric_poly, n1_config, HeunProblem};

const NORMALIZED_TOL: f64 = 1e-10;
const BLOCK_BALANCE_TOL: f64 = 1e-10;

/// Data read off a normalized block (`q_{1,1} = 1`, `c_2 = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub config: Configuration,
    pub c1: f64,
    /// `c_3`, absent for a `(1, n)` tail block.
    pub c3: Option<f64>,
    /// Slope gaps `theta_{2,0} - theta_{1,0}`, `theta_{3,0} - theta_{2,0}`
    /// (equal to `c - 1`) and, for full blocks, `theta_{4,0} - theta_{3,0}`.
    pub gaps: Vec<f64>,
    pub q31: Option<Complex64>,
}

impl Block {
    /// Validates shape, normalization and balance of block number `index`
    /// (1-based, for error reporting).
    pub fn from_config(config: &Configuration, index: usize) -> Result<Self> {
        let not_normalized = |reason: String| Error::BlockNotNormalized { index, reason };
        let sizes = config.layer_sizes();
        let full = sizes.len() == 3 && sizes[0] == 1 && sizes[2] == 1;
        let tail = sizes.len() == 2 && sizes[0] == 1;
        if !(full || tail) {
            return Err(not_normalized(format!(
                "type {:?} is neither (1,n,1) nor (1,n)",
                sizes
            )));
        }
        let residues = config.derive_residues()?;
        if (residues.get(2) - 1.0).abs() > NORMALIZED_TOL {
            return Err(not_normalized(format!(
                "c_2 = {} instead of 1",
                residues.get(2)
            )));
        }
        if (config.nodes[0][0] - 1.0).norm() > NORMALIZED_TOL {
            return Err(not_normalized(format!(
                "q_11 = {} instead of 1",
                config.nodes[0][0]
            )));
        }
        let report = force_of(config)?;
        if report.max_abs_force >= BLOCK_BALANCE_TOL {
            return Err(Error::BlockNotBalanced {
                index,
                residual: report.max_abs_force,
            });
        }
        Ok(Block {
            config: config.clone(),
            c1: residues.get(1),
            c3: full.then(|| residues.get(3)),
            gaps: config.theta_gaps(),
            q31: full.then(|| config.nodes[2][0]),
        })
    }

    fn is_tail(&self) -> bool {
        self.c3.is_none()
    }
}

/// Chains the blocks. Every block but the last must be of type `(1, n, 1)`;
/// the last may be a `(1, n)` tail, in which case the final plane is
/// dropped. The chain starts at `q_{1,1} = 1` and `c_1 = c_1^{(1)}`, so a
/// single block is returned unchanged; a global rescaling of the residues and
/// slopes maps this onto any other normalization of `c_1`.
pub fn concatenate(blocks: &[Configuration]) -> Result<Configuration> {
    if blocks.is_empty() {
        return Err(Error::ShapeMismatch(
            "at least one block is required".into(),
        ));
    }
    let parsed = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| Block::from_config(b, i + 1))
        .collect::<Result<Vec<_>>>()?;
    for (i, b) in parsed.iter().enumerate() {
        if b.is_tail() && i + 1 != parsed.len() {
            return Err(Error::BlockNotNormalized {
                index: i + 1,
                reason: "a (1,n) block can only come last".into(),
            });
        }
    }
    let tail = parsed.last().is_some_and(Block::is_tail);

    // Residues c_1..c_L with layers 2r-1 (single node) and 2r (block middle).
    let mut c = vec![parsed[0].c1];
    let mut nodes: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
    let mut anchor = Complex64::new(1.0, 0.0);
    for b in &parsed {
        let c_odd = *c.last().unwrap();
        let c_even = c_odd / b.c1;
        c.push(c_even);
        nodes.push(b.config.nodes[1].iter().map(|q| anchor * q).collect());
        if let (Some(c3), Some(q31)) = (b.c3, b.q31) {
            c.push(c_odd * c3 / b.c1);
            anchor *= q31;
            nodes.push(vec![anchor]);
        }
    }

    let layers = c.len();
    let get_c = |l: usize| -> f64 {
        if l == 0 || l > layers {
            0.0
        } else {
            c[l - 1]
        }
    };
    let rounds = parsed.len();
    let mut gaps = Vec::with_capacity(layers);
    for r in 1..=rounds + 1 {
        // Odd layer 2r - 1.
        let odd = 2 * r - 1;
        if odd > layers {
            break;
        }
        let mut g = -get_c(odd);
        if r <= rounds {
            let b = &parsed[r - 1];
            g += get_c(2 * r) * (b.gaps[0] + b.c1);
        }
        if r >= 2 {
            let b = &parsed[r - 2];
            g += get_c(2 * r - 2) * (b.gaps[2] + b.c3.unwrap_or(0.0));
        }
        gaps.push(g);
        // Even layer 2r.
        if r <= rounds {
            gaps.push(get_c(2 * r) * parsed[r - 1].gaps[1]);
        }
    }
    debug_assert_eq!(gaps.len(), layers);
    debug_assert!(!tail || layers == 2 * rounds);

    let config = Configuration::from_residues_and_gaps(nodes, &c, &gaps)?;
    let report = force_of(&config)?;
    if report.max_abs_force >= 1e-9 {
        return Err(Error::ConsistencyFailure(format!(
            "chained configuration leaves max |F| = {:e}",
            report.max_abs_force
        )));
    }
    Ok(config)
}

/// Reverses the layer order combined with `z -> 1/z`; the end slopes become
/// `theta'_{p,0} = -theta_{L+2-p,inf}` and `theta'_{p,inf} = -theta_{L+2-p,0}`.
/// Forces change sign, so balance is preserved.
pub fn reverse_layers(config: &Configuration) -> Configuration {
    let nodes = config
        .nodes
        .iter()
        .rev()
        .map(|layer| layer.iter().map(|z| z.inv()).collect())
        .collect();
    let left = config.theta_right.iter().rev().map(|t| -t).collect();
    let right = config.theta_left.iter().rev().map(|t| -t).collect();
    Configuration::new(nodes, left, right)
}

/// Symmetric `(1, n, 1)` block with `q_{3,1} = q_{1,1} = 1`: the middle layer
/// sits at the roots of `2F1(-n, b; c; z)` with `b = -(c1 + c3)/2` and
/// `c = 1 - n - b`.
pub fn symmetric_block(n: usize, c1: f64, c3: f64) -> Result<Configuration> {
    let b = -(c1 + c3) / 2.0;
    let one = Complex64::new(1.0, 0.0);
    let problem = HeunProblem {
        n,
        a: one,
        s: one,
        c1,
        c3,
        b,
    };
    let p = hypergeometric_poly(n, b, problem.c())?;
    heun_block_config(&problem, &p)
}

/// `(1, n)` tail block: the reversed `(n, 1)` hypergeometric configuration.
pub fn one_n_block(n: usize, b: f64, c: f64) -> Result<Configuration> {
    Ok(reverse_layers(&n1_config(n, b, c)?))
}

/// Blocks realizing the residue profile `n_l c_l = w(l)` (up to a global
/// factor) with symmetric blocks of middle sizes `middles`.
pub fn symmetric_chain_blocks(
    middles: &[usize],
    weight: impl Fn(usize) -> f64,
) -> Result<Vec<Configuration>> {
    middles
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let r = i + 1;
            let c_odd = weight(2 * r - 1);
            let c_even = weight(2 * r) / n as f64;
            let c_next = weight(2 * r + 1);
            symmetric_block(n, c_odd / c_even, c_next / c_even)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::embed::{chain_weights, concavity_check, embeddedness_check};

    #[test]
    fn symmetric_block_balances() {
        let b = symmetric_block(2, 1.5, 1.5).unwrap();
        assert!(force_of(&b).unwrap().max_abs_force < 1e-12);
        // theta_{2,0} - theta_{1,0} + c_1 = n / 2
        assert!((b.theta_gaps()[0] + 1.5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_block_is_identity() {
        let b = symmetric_block(3, 1.7, 2.1).unwrap();
        let out = concatenate(std::slice::from_ref(&b)).unwrap();
        assert_eq!(out.nodes, b.nodes);
        for (x, y) in out.theta_left.iter().zip(&b.theta_left) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in out.theta_right.iter().zip(&b.theta_right) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_symmetric_blocks() {
        let b = symmetric_block(2, 1.5, 1.5).unwrap();
        let out = concatenate(&[b.clone(), b]).unwrap();
        assert_eq!(out.layer_sizes(), vec![1, 2, 1, 2, 1]);
        for l in [0, 2, 4] {
            assert!((out.nodes[l][0] - 1.0).norm() < 1e-14);
        }
        assert!(force_of(&out).unwrap().max_abs_force < 1e-9);
    }

    #[test]
    fn offset_blocks_chain() {
        let p = crate::poly::ComplexPolynomial::from_real(&[23.0 / 3.0, 70.0 / 3.0, 1.0]);
        let problem = HeunProblem {
            n: 2,
            a: Complex64::new(1.0, 0.0),
            s: Complex64::new(2.0 / 3.0, 0.0),
            c1: 8.0 / 5.0,
            c3: 4189.0 / 2890.0,
            b: -9857.0 / 8670.0,
        };
        let offset = heun_block_config(&problem, &p).unwrap();
        let sym = symmetric_block(3, 1.2, 2.0).unwrap();
        let out = concatenate(&[offset, sym.clone(), sym]).unwrap();
        assert_eq!(out.layer_sizes(), vec![1, 2, 1, 3, 1, 3, 1]);
        assert!(force_of(&out).unwrap().max_abs_force < 1e-9);
    }

    #[test]
    fn reversal_preserves_balance() {
        let cfg = n1_config(3, -2.5, 0.5).unwrap();
        let rev = reverse_layers(&cfg);
        assert_eq!(rev.layer_sizes(), vec![1, 3]);
        assert!(force_of(&rev).unwrap().max_abs_force < 1e-12);
        assert_eq!(
            embeddedness_check(&rev).embedded(),
            embeddedness_check(&cfg).embedded()
        );
    }

    #[test]
    fn tail_block_appends() {
        let sym = symmetric_block(2, 1.5, 1.5).unwrap();
        let tail = one_n_block(3, -2.5, 0.5).unwrap();
        let out = concatenate(&[sym, tail.clone()]).unwrap();
        assert_eq!(out.layer_sizes(), vec![1, 2, 1, 3]);
        assert!(force_of(&out).unwrap().max_abs_force < 1e-9);
        assert!(matches!(
            concatenate(&[tail.clone(), tail]),
            Err(Error::BlockNotNormalized { index: 1, .. })
        ));
    }

    #[test]
    fn log_profile_chain_is_concave() {
        let w = |l: usize| (1.0 + l as f64).ln();
        let blocks = symmetric_chain_blocks(&[2, 2, 3], w).unwrap();
        let out = concatenate(&blocks).unwrap();
        assert!(force_of(&out).unwrap().max_abs_force < 1e-9);
        let weights = chain_weights(&out, &out.derive_residues().unwrap());
        let ratio = weights[0] / w(1);
        for (l, x) in weights.iter().enumerate() {
            assert!((x / ratio - w(l + 1)).abs() < 1e-12);
        }
        assert!(concavity_check(&weights).holds);
    }

    #[test]
    fn unbalanced_and_unnormalized_blocks() {
        let mut b = symmetric_block(2, 1.5, 1.5).unwrap();
        b.nodes[1][0] *= 1.01;
        assert!(matches!(
            concatenate(&[b]),
            Err(Error::BlockNotBalanced { index: 1, .. })
        ));
        let scaled = symmetric_block(2, 1.5, 1.5)
            .unwrap()
            .scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(
            concatenate(&[scaled]),
            Err(Error::BlockNotNormalized { index: 1, .. })
        ));
    }
}
