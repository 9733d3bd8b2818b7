//! The force map on node positions, its equivalent historical forms, the
//! residue-based oracle, and the analytic Jacobian.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{Configuration, LayerResidues, NODE_TOL, TOL_LINEAR};
use crate::error::{Error, Result};

/// Where a pole of a layer form sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleSite {
    Origin,
    Infinity,
    /// Node `(layer, k)`, both 1-based, at position `z`.
    Node {
        layer: usize,
        k: usize,
        z: Complex64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub site: PoleSite,
    pub residue: f64,
}

/// Pole and residue data of the meromorphic form attached to plane `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiForm {
    pub plane: usize,
    pub poles: Vec<Pole>,
}

impl PsiForm {
    pub fn residue_sum(&self) -> f64 {
        self.poles.iter().map(|p| p.residue).sum()
    }

    /// Residue of `psi^2 z / dz` at the finite node `(layer, k)`.
    ///
    /// Writing the form as `r/(z-a) + g(z)` near `a`, the residue of
    /// `z (r/(z-a) + g)^2` is `r^2 + 2 a r g(a)`.
    fn quadratic_residue_at(&self, layer: usize, k: usize) -> Complex64 {
        let mut r = 0.0;
        let mut a = Complex64::new(0.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        for pole in &self.poles {
            match pole.site {
                PoleSite::Node {
                    layer: pl,
                    k: pk,
                    z,
                } if pl == layer && pk == k => {
                    r = pole.residue;
                    a = z;
                }
                _ => {}
            }
        }
        for pole in &self.poles {
            match pole.site {
                PoleSite::Node {
                    layer: pl, k: pk, ..
                } if pl == layer && pk == k => {}
                PoleSite::Node { z, .. } => g += pole.residue / (a - z),
                PoleSite::Origin => g += pole.residue / a,
                PoleSite::Infinity => {}
            }
        }
        Complex64::new(r * r, 0.0) + 2.0 * a * r * g
    }
}

/// Forces at every node plus the global scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceReport {
    pub forces: Vec<Vec<Complex64>>,
    pub theta1: f64,
    pub theta2: f64,
    pub max_abs_force: f64,
}

impl ForceReport {
    fn assemble(config: &Configuration, forces: Vec<Vec<Complex64>>) -> Self {
        let max_abs_force = forces
            .iter()
            .flatten()
            .map(|f| f.norm())
            .fold(0.0, f64::max);
        ForceReport {
            forces,
            theta1: config.theta1(),
            theta2: config.theta2(),
            max_abs_force,
        }
    }

    pub fn flat(&self) -> Vec<Complex64> {
        self.forces.iter().flatten().copied().collect()
    }

    pub fn total(&self) -> Complex64 {
        self.forces.iter().flatten().sum()
    }

    /// `|sum F - theta2|`, which the residue theorem forces to vanish.
    pub fn sum_defect(&self) -> f64 {
        (self.total() - self.theta2).norm()
    }

    /// CSV with columns `layer,k,re_F,im_F` followed by the three scalar rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,k,re_F,im_F\n");
        for (l, layer) in self.forces.iter().enumerate() {
            for (k, f) in layer.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.16e},{:.16e}", l + 1, k + 1, f.re, f.im);
            }
        }
        let _ = writeln!(out, "theta1,{:.16e}", self.theta1);
        let _ = writeln!(out, "theta2,{:.16e}", self.theta2);
        let _ = writeln!(out, "max_abs_force,{:.16e}", self.max_abs_force);
        out
    }
}

/// Which of the two parity-dependent historical expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

pub(crate) fn check_domain(config: &Configuration, residues: &LayerResidues) -> Result<()> {
    config.validate()?;
    let t1 = config.theta1();
    if t1.abs() > TOL_LINEAR {
        return Err(Error::Theta1Nonzero(t1));
    }
    if residues.layer_count() != config.layer_count() {
        return Err(Error::ShapeMismatch(
            "residues do not match the layer count".into(),
        ));
    }
    for l in 0..config.layer_count().saturating_sub(1) {
        for (k, a) in config.nodes[l].iter().enumerate() {
            for (j, b) in config.nodes[l + 1].iter().enumerate() {
                if (a - b).norm() <= NODE_TOL {
                    return Err(Error::CrossLayerCollision {
                        layer: l + 1,
                        k: k + 1,
                        other_layer: l + 2,
                        j: j + 1,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Pole data of the form on plane `l` (1-based, `1..=L+1`).
pub fn psi_form(config: &Configuration, residues: &LayerResidues, l: usize) -> Result<PsiForm> {
    let layers = config.layer_count();
    if l == 0 || l > layers + 1 {
        return Err(Error::IndexOutOfRange(format!(
            "plane {} not in 1..={}",
            l,
            layers + 1
        )));
    }
    let mut poles = Vec::new();
    if l <= layers {
        let c = residues.get(l as isize);
        for (k, z) in config.nodes[l - 1].iter().enumerate() {
            poles.push(Pole {
                site: PoleSite::Node {
                    layer: l,
                    k: k + 1,
                    z: *z,
                },
                residue: -c,
            });
        }
    }
    if l >= 2 {
        let c = residues.get(l as isize - 1);
        for (k, z) in config.nodes[l - 2].iter().enumerate() {
            poles.push(Pole {
                site: PoleSite::Node {
                    layer: l - 1,
                    k: k + 1,
                    z: *z,
                },
                residue: c,
            });
        }
    }
    poles.push(Pole {
        site: PoleSite::Origin,
        residue: config.theta_left[l - 1],
    });
    poles.push(Pole {
        site: PoleSite::Infinity,
        residue: config.theta_right[l - 1],
    });
    Ok(PsiForm { plane: l, poles })
}

/// Sum of `q / (q - p)` over `others`, skipping index `skip`.
fn pair_sum(q: Complex64, others: &[Complex64], skip: Option<usize>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, p) in others.iter().enumerate() {
        if Some(j) != skip {
            acc += q / (q - p);
        }
    }
    acc
}

/// Forces evaluated without domain checks; used inside solvers.
pub(crate) fn raw_forces(config: &Configuration, residues: &LayerResidues) -> Vec<Vec<Complex64>> {
    let layers = config.layer_count();
    let gaps = config.theta_gaps();
    let empty: Vec<Complex64> = Vec::new();
    (0..layers)
        .map(|l| {
            let li = l as isize + 1;
            let c = residues.get(li);
            let c_next = residues.get(li + 1);
            let c_prev = residues.get(li - 1);
            let next = config.nodes.get(l + 1).unwrap_or(&empty);
            let prev = if l > 0 { &config.nodes[l - 1] } else { &empty };
            let constant = c * c + c * gaps[l];
            config.nodes[l]
                .iter()
                .enumerate()
                .map(|(k, &q)| {
                    2.0 * c * c * pair_sum(q, &config.nodes[l], Some(k))
                        - c * c_next * pair_sum(q, next, None)
                        - c * c_prev * pair_sum(q, prev, None)
                        + constant
                })
                .collect()
        })
        .collect()
}

/// Forces `F_{l,k}` from the explicit rational expression.
pub fn force(config: &Configuration, residues: &LayerResidues) -> Result<ForceReport> {
    check_domain(config, residues)?;
    Ok(ForceReport::assemble(config, raw_forces(config, residues)))
}

/// Convenience: derive the residues and evaluate the forces.
pub fn force_of(config: &Configuration) -> Result<ForceReport> {
    let residues = config.derive_residues()?;
    force(config, &residues)
}

/// Forces computed as residues of `(psi_l^2 + psi_{l+1}^2) z / 2` from the pole data.
pub fn force_residue_oracle(
    config: &Configuration,
    residues: &LayerResidues,
) -> Result<ForceReport> {
    check_domain(config, residues)?;
    let layers = config.layer_count();
    let forms: Vec<PsiForm> = (1..=layers + 1)
        .map(|l| psi_form(config, residues, l))
        .collect::<Result<_>>()?;
    let forces = (1..=layers)
        .map(|l| {
            (1..=config.nodes[l - 1].len())
                .map(|k| {
                    0.5 * (forms[l - 1].quadratic_residue_at(l, k)
                        + forms[l].quadratic_residue_at(l, k))
                })
                .collect()
        })
        .collect();
    Ok(ForceReport::assemble(config, forces))
}

/// The parity-dependent expressions. They differ from [`force`] by a multiple
/// of a residue condition, so they agree whenever the residues are derived.
pub fn force_alt(
    config: &Configuration,
    residues: &LayerResidues,
    parity: Parity,
) -> Result<ForceReport> {
    check_domain(config, residues)?;
    let layers = config.layer_count();
    let empty: Vec<Complex64> = Vec::new();
    let forces = (0..layers)
        .map(|l| {
            let li = l as isize + 1;
            let c = residues.get(li);
            let c_next = residues.get(li + 1);
            let c_prev = residues.get(li - 1);
            let next = config.nodes.get(l + 1).unwrap_or(&empty);
            let prev = if l > 0 { &config.nodes[l - 1] } else { &empty };
            let own = &config.nodes[l];
            own.iter()
                .enumerate()
                .map(|(k, &q)| {
                    let mut same = Complex64::new(0.0, 0.0);
                    for (j, p) in own.iter().enumerate() {
                        if j != k {
                            same += (q + p) / (q - p);
                        }
                    }
                    let mut up = Complex64::new(0.0, 0.0);
                    let mut down = Complex64::new(0.0, 0.0);
                    match parity {
                        Parity::Odd => {
                            for p in next {
                                up += q / (q - p);
                            }
                            for p in prev {
                                down += p / (q - p);
                            }
                            c * c * same - c * c_next * up - c * c_prev * down
                                + c * (config.theta_right[l] + config.theta_left[l + 1])
                        }
                        Parity::Even => {
                            for p in next {
                                up += p / (q - p);
                            }
                            for p in prev {
                                down += q / (q - p);
                            }
                            c * c * same
                                - c * c_next * up
                                - c * c_prev * down
                                - c * (config.theta_left[l] + config.theta_right[l + 1])
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(ForceReport::assemble(config, forces))
}

/// `G_l = sum_k F_{l,k}` for 1-based `l`.
pub fn layer_force_sum(report: &ForceReport, l: usize) -> Result<Complex64> {
    if l == 0 || l > report.forces.len() {
        return Err(Error::IndexOutOfRange(format!(
            "layer {} not in 1..={}",
            l,
            report.forces.len()
        )));
    }
    Ok(report.forces[l - 1].iter().sum())
}

/// Jacobian without domain checks.
pub(crate) fn raw_jacobian(config: &Configuration, residues: &LayerResidues) -> DMatrix<Complex64> {
    let index = config.flat_index();
    let flat = config.flat_nodes();
    let n = flat.len();
    let mut jac = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (row, &(l, _)) in index.iter().enumerate() {
        let c = residues.get(l as isize + 1);
        let q = flat[row];
        for (col, &(m, _)) in index.iter().enumerate() {
            if row == col {
                continue;
            }
            let weight = if m == l {
                2.0 * c * c
            } else if m + 1 == l || l + 1 == m {
                -c * residues.get(m as isize + 1)
            } else {
                continue;
            };
            let p = flat[col];
            let d2 = (q - p) * (q - p);
            // d/dq [w q/(q-p)] = -w p/(q-p)^2 ; d/dp [w q/(q-p)] = w q/(q-p)^2
            jac[(row, row)] -= weight * p / d2;
            jac[(row, col)] += weight * q / d2;
        }
    }
    jac
}

/// `dF_{l,k} / dq_{l',j}` in lexicographic `(l, k)` order for rows and columns.
pub fn jacobian(config: &Configuration, residues: &LayerResidues) -> Result<DMatrix<Complex64>> {
    check_domain(config, residues)?;
    Ok(raw_jacobian(config, residues))
}
