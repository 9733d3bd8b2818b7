//! Damped Newton balancing on node positions, single- and multi-start.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Configuration, LayerResidues};
use crate::error::{Error, Result, Stall};
use crate::forces::{check_domain, raw_forces, raw_jacobian};
use crate::poly::{fp_solve, ComplexPolynomial, FpOptions};

/// Gate on `|Theta2|` before solving; the forces sum to `Theta2`.
pub const THETA2_GATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target for the largest force magnitude.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest step fraction tried by the line search.
    pub damping_floor: f64,
    /// Singular values above this fraction of the largest count toward the rank.
    pub rank_rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 100,
            damping_floor: 2f64.powi(-20),
            rank_rel_tol: 1e-8,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = self.tol > 0.0
            && self.max_iter > 0
            && self.damping_floor > 0.0
            && self.rank_rel_tol > 0.0;
        if !positive || self.tol >= 1.0 {
            return Err(Error::Parse(format!("invalid solver options {:?}", self)));
        }
        Ok(())
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual: f64,
    pub step_norm: f64,
}

/// CSV with columns `iter,residual,step_norm`.
pub fn iteration_log_csv(log: &[IterationRecord]) -> String {
    let mut out = String::from("iter,residual,step_norm\n");
    for r in log {
        let _ = writeln!(out, "{},{:.16e},{:.16e}", r.iter, r.residual, r.step_norm);
    }
    out
}

#[derive(Debug, Clone)]
pub struct BalanceOutcome {
    pub config: Configuration,
    /// Largest `|F_{l,k}|` over all nodes, pinned one included.
    pub residual: f64,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
}

fn max_force(config: &Configuration, residues: &LayerResidues) -> f64 {
    if check_domain(config, residues).is_err() {
        return f64::INFINITY;
    }
    let worst = raw_forces(config, residues)
        .iter()
        .flatten()
        .map(|f| f.norm())
        .fold(0.0, f64::max);
    if worst.is_finite() {
        worst
    } else {
        f64::INFINITY
    }
}

/// Solves `F = 0` keeping `q_{1,1}` at its input value.
pub fn newton_balance(config0: &Configuration, options: &SolveOptions) -> Result<Configuration> {
    newton_balance_logged(config0, options).map(|o| o.config)
}

/// Like [`newton_balance`], also returning the iteration log.
pub fn newton_balance_logged(
    config0: &Configuration,
    options: &SolveOptions,
) -> Result<BalanceOutcome> {
    options.validate()?;
    config0.validate()?;
    let residues = config0.derive_residues()?;
    let theta2 = config0.theta2();
    if theta2.abs() > THETA2_GATE {
        return Err(Error::Theta2Nonzero(theta2));
    }
    check_domain(config0, &residues)?;

    let mut config = config0.clone();
    let mut r = max_force(&config, &residues);
    let mut log = vec![IterationRecord {
        iter: 0,
        residual: r,
        step_norm: 0.0,
    }];
    let n = config.node_count();
    let mut iterations = 0;
    let mut stalled = false;
    while r >= options.tol && iterations < options.max_iter && n > 1 {
        iterations += 1;
        let forces: Vec<Complex64> = raw_forces(&config, &residues)
            .into_iter()
            .flatten()
            .collect();
        let jac = raw_jacobian(&config, &residues);
        // The (1,1) row and column carry the scaling kernel; drop them.
        let minor = jac.view((1, 1), (n - 1, n - 1)).into_owned();
        let rhs = DVector::from_iterator(n - 1, forces[1..].iter().copied());
        let delta = match minor.lu().solve(&rhs) {
            Some(d) if d.iter().all(|x| x.re.is_finite() && x.im.is_finite()) => d,
            _ => return Err(Error::SingularStep(iterations)),
        };
        let flat = config.flat_nodes();
        let mut step = 1.0;
        let mut accepted = None;
        while step >= options.damping_floor {
            let mut trial = flat.clone();
            for (i, d) in delta.iter().enumerate() {
                trial[i + 1] -= d * step;
            }
            let candidate = config.with_flat_nodes(&trial);
            let tr = max_force(&candidate, &residues);
            if tr < r {
                accepted = Some((candidate, tr));
                break;
            }
            step *= 0.5;
        }
        let Some((next, nr)) = accepted else {
            stalled = true;
            break;
        };
        config = next;
        r = nr;
        log.push(IterationRecord {
            iter: iterations,
            residual: r,
            step_norm: step * delta.norm(),
        });
    }

    if r < options.tol || ((stalled || iterations >= options.max_iter) && r < 10.0 * options.tol) {
        return Ok(BalanceOutcome {
            config,
            residual: r,
            iterations,
            log,
        });
    }
    Err(Error::NoConvergence(Box::new(Stall {
        iterations,
        residual: r,
        history: log.iter().map(|e| e.residual).collect(),
        best_config: Some(config),
        best_polys: Vec::new(),
        top_coefficient: None,
    })))
}

/// Result of a multi-start run.
#[derive(Debug, Clone)]
pub struct MultiStart {
    pub best: BalanceOutcome,
    pub start_index: usize,
    pub attempts: usize,
    pub successes: usize,
}

/// Starting nodes for start `index`: a handful of symmetric layouts first
/// (rotated roots of unity, alternating sign per layer, spread radii), then
/// `exp(U(-3,3) + i U(-pi,pi))` draws. The first node is always at 1.
pub fn seed_nodes(sizes: &[usize], index: usize, seed: u64) -> Vec<Vec<Complex64>> {
    const SYMMETRIC: usize = 4;
    let mut layers: Vec<Vec<Complex64>> = if index < SYMMETRIC {
        let spread = [0.5, 1.0, 1.5, 2.0][index];
        sizes
            .iter()
            .enumerate()
            .map(|(l, &n)| {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let radius = (spread * l as f64).exp();
                let offset = 0.5 * l as f64 / n as f64;
                (0..n)
                    .map(|k| {
                        Complex64::from_polar(
                            sign * radius,
                            TAU * (k as f64 + offset) / n as f64 + 0.1 * l as f64,
                        )
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        sizes
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|_| {
                        Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-PI..PI)).exp()
                    })
                    .collect()
            })
            .collect()
    };
    let first = layers[0][0];
    for q in layers.iter_mut().flatten() {
        *q /= first;
    }
    layers
}

/// Runs `starts` independent Newton solves from [`seed_nodes`] with the end
/// slopes of `template`, in parallel, and keeps the lowest residual (ties go
/// to the lowest start index).
pub fn multi_start_balance(
    template: &Configuration,
    starts: usize,
    seed: u64,
    options: &SolveOptions,
) -> Result<MultiStart> {
    template.validate()?;
    let sizes = template.layer_sizes();
    let outcomes: Vec<(usize, Result<BalanceOutcome>)> = (0..starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut config = template.clone();
            config.nodes = seed_nodes(&sizes, i, seed);
            (i, newton_balance_logged(&config, options))
        })
        .collect();
    pick_best(outcomes)
}

fn pick_best(outcomes: Vec<(usize, Result<BalanceOutcome>)>) -> Result<MultiStart> {
    let attempts = outcomes.len();
    let successes = outcomes.iter().filter(|(_, o)| o.is_ok()).count();
    let mut best: Option<(usize, BalanceOutcome)> = None;
    let mut best_failure: Option<Error> = None;
    for (i, outcome) in outcomes {
        match outcome {
            Ok(o) => {
                if best.as_ref().is_none_or(|(_, b)| o.residual < b.residual) {
                    best = Some((i, o));
                }
            }
            Err(Error::NoConvergence(stall)) => {
                let better = match &best_failure {
                    Some(Error::NoConvergence(b)) => stall.residual < b.residual,
                    _ => true,
                };
                if better {
                    best_failure = Some(Error::NoConvergence(stall));
                }
            }
            Err(
                e @ (Error::Theta2Nonzero(_)
                | Error::Theta1Nonzero(_)
                | Error::ConsistencyFailure(_)),
            ) => return Err(e),
            Err(e) => {
                if best_failure.is_none() {
                    best_failure = Some(e);
                }
            }
        }
    }
    match best {
        Some((start_index, best)) => Ok(MultiStart {
            best,
            start_index,
            attempts,
            successes,
        }),
        None => {
            Err(best_failure.unwrap_or_else(|| Error::NoSolutions("no starts were run".into())))
        }
    }
}

/// Multi-start on the polynomial formulation: each start solves for the
/// layer polynomials from [`seed_nodes`], then the roots are polished by
/// [`newton_balance`] on the nodes.
pub fn multi_start_fp(
    layer_sizes: &[usize],
    residues: &[f64],
    theta_gaps: &[f64],
    starts: usize,
    seed: u64,
    fp_options: &FpOptions,
    options: &SolveOptions,
) -> Result<MultiStart> {
    let outcomes: Vec<(usize, Result<BalanceOutcome>)> = (0..starts.max(1))
        .into_par_iter()
        .map(|i| {
            let nodes = seed_nodes(layer_sizes, i, seed);
            let polys: Vec<ComplexPolynomial> = nodes
                .iter()
                .map(|l| ComplexPolynomial::from_roots(l))
                .collect();
            let run = fp_solve(layer_sizes, residues, theta_gaps, &polys, fp_options)
                .and_then(|sol| sol.to_configuration(residues, theta_gaps))
                .and_then(|cfg| newton_balance_logged(&cfg, options));
            (i, run)
        })
        .collect();
    pick_best(outcomes)
}
