//! Configuration data: node positions per layer and the end parameters.
//!
//! Layers are numbered `1..=L` and planes (hence ends) `1..=L+1`, as in the
//! usual node-opening bookkeeping. Internally everything is stored 0-based;
//! the public accessors that take a layer or plane index use the 1-based
//! convention and document it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance below which two nodes count as coincident.
pub const NODE_TOL: f64 = 1e-12;
/// Default gate on |theta1| before the residues can be derived.
pub const TOL_LINEAR: f64 = 1e-10;

/// Node positions `q[l][k]` together with the end slopes of every plane.
///
/// `theta_left[p]` is the slope of the end `0_{p+1}` and `theta_right[p]`
/// the slope of `inf_{p+1}`, so both have `L + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub nodes: Vec<Vec<Complex64>>,
    pub theta_left: Vec<f64>,
    pub theta_right: Vec<f64>,
}

/// The real numbers `c_0 ..= c_{L+1}` fixed by the residue conditions, with
/// `c_0 = c_{L+1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerResidues {
    c: Vec<f64>,
}

impl LayerResidues {
    /// Builds residues from the interior values `c_1..c_L`.
    pub fn from_interior(interior: &[f64]) -> Self {
        let mut c = Vec::with_capacity(interior.len() + 2);
        c.push(0.0);
        c.extend_from_slice(interior);
        c.push(0.0);
        LayerResidues { c }
    }

    /// `c_l` for any integer `l`; zero outside `1..=L`.
    pub fn get(&self, l: isize) -> f64 {
        if l <= 0 || l as usize >= self.c.len() {
            0.0
        } else {
            self.c[l as usize]
        }
    }

    /// `c_1..c_L`.
    pub fn interior(&self) -> &[f64] {
        &self.c[1..self.c.len() - 1]
    }

    /// The full sequence `c_0..c_{L+1}`.
    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn layer_count(&self) -> usize {
        self.c.len() - 2
    }
}

impl Configuration {
    pub fn new(nodes: Vec<Vec<Complex64>>, theta_left: Vec<f64>, theta_right: Vec<f64>) -> Self {
        Configuration {
            nodes,
            theta_left,
            theta_right,
        }
    }

    /// Completes the end slopes from `c_1..c_L` and the left slopes, using
    /// the residue conditions to fill in the right slopes. Theta1 vanishes by
    /// construction.
    pub fn from_residues_and_left(
        nodes: Vec<Vec<Complex64>>,
        c: &[f64],
        theta_left: Vec<f64>,
    ) -> Result<Self> {
        let layers = nodes.len();
        if c.len() != layers || theta_left.len() != layers + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} layers need {} residues and {} left slopes, got {} and {}",
                layers,
                layers,
                layers + 1,
                c.len(),
                theta_left.len()
            )));
        }
        let res = LayerResidues::from_interior(c);
        let sizes: Vec<usize> = nodes.iter().map(Vec::len).collect();
        let n = |l: isize| -> f64 {
            if l <= 0 || l as usize > layers {
                0.0
            } else {
                sizes[l as usize - 1] as f64
            }
        };
        let theta_right = (1..=layers as isize + 1)
            .map(|l| n(l) * res.get(l) - n(l - 1) * res.get(l - 1) - theta_left[l as usize - 1])
            .collect();
        Ok(Configuration::new(nodes, theta_left, theta_right))
    }

    /// Like [`Configuration::from_residues_and_left`], with the left slopes
    /// given by their successive differences `gaps[l-1] = theta_{l+1,0} - theta_{l,0}`
    /// and the rotation gauge `theta_{1,0} = 0`.
    pub fn from_residues_and_gaps(
        nodes: Vec<Vec<Complex64>>,
        c: &[f64],
        gaps: &[f64],
    ) -> Result<Self> {
        let mut left = Vec::with_capacity(gaps.len() + 1);
        left.push(0.0);
        for g in gaps {
            let last = *left.last().unwrap();
            left.push(last + g);
        }
        Self::from_residues_and_left(nodes, c, left)
    }

    /// Number of layers `L`.
    pub fn layer_count(&self) -> usize {
        self.nodes.len()
    }

    /// `n_1..n_L`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.nodes.iter().map(Vec::len).collect()
    }

    /// `n_l` for 1-based `l`, zero outside `1..=L`.
    pub fn layer_size(&self, l: isize) -> usize {
        if l <= 0 || l as usize > self.nodes.len() {
            0
        } else {
            self.nodes[l as usize - 1].len()
        }
    }

    /// Total number of nodes `N`.
    pub fn node_count(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }

    pub fn genus(&self) -> isize {
        self.node_count() as isize - self.layer_count() as isize
    }

    /// Nodes in lexicographic `(l, k)` order; this ordering is shared by every
    /// matrix in the crate.
    pub fn flat_nodes(&self) -> Vec<Complex64> {
        self.nodes.iter().flatten().copied().collect()
    }

    /// `(layer, k)` pairs (0-based) in the same order as [`Configuration::flat_nodes`].
    pub fn flat_index(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.len()).map(move |k| (l, k)))
            .collect()
    }

    /// Returns a copy with the nodes replaced by `flat` (same ordering as
    /// [`Configuration::flat_nodes`]).
    pub fn with_flat_nodes(&self, flat: &[Complex64]) -> Self {
        let mut out = self.clone();
        let mut it = flat.iter();
        for layer in out.nodes.iter_mut() {
            for q in layer.iter_mut() {
                *q = *it.next().expect("flat node vector too short");
            }
        }
        out
    }

    /// `theta_{l+1,0} - theta_{l,0}` for `l = 1..L`.
    pub fn theta_gaps(&self) -> Vec<f64> {
        self.theta_left.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let layers = self.nodes.len();
        if layers == 0 {
            return Err(Error::ShapeMismatch(
                "at least one layer is required".into(),
            ));
        }
        if self.theta_left.len() != layers + 1 || self.theta_right.len() != layers + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} layers need {} end slopes per side, got {} left and {} right",
                layers,
                layers + 1,
                self.theta_left.len(),
                self.theta_right.len()
            )));
        }
        for (l, layer) in self.nodes.iter().enumerate() {
            if layer.is_empty() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {} has no nodes",
                    l + 1
                )));
            }
            for (k, q) in layer.iter().enumerate() {
                if !(q.re.is_finite() && q.im.is_finite()) {
                    return Err(Error::ShapeMismatch(format!(
                        "node ({},{}) is not finite",
                        l + 1,
                        k + 1
                    )));
                }
                if q.norm() == 0.0 {
                    return Err(Error::ZeroNode {
                        layer: l + 1,
                        k: k + 1,
                    });
                }
            }
            for k in 0..layer.len() {
                for j in k + 1..layer.len() {
                    if (layer[k] - layer[j]).norm() <= NODE_TOL {
                        return Err(Error::DuplicateNode {
                            layer: l + 1,
                            k: k + 1,
                            j: j + 1,
                        });
                    }
                }
            }
        }
        if self
            .theta_left
            .iter()
            .chain(&self.theta_right)
            .any(|t| !t.is_finite())
        {
            return Err(Error::ShapeMismatch("end slopes must be finite".into()));
        }
        Ok(())
    }

    /// Sum of all end slopes.
    pub fn theta1(&self) -> f64 {
        self.theta_left.iter().chain(&self.theta_right).sum()
    }

    /// `sum_l (theta_{l,inf}^2 - theta_{l,0}^2) / 2`, which equals the sum of all forces.
    pub fn theta2(&self) -> f64 {
        self.theta_left
            .iter()
            .zip(&self.theta_right)
            .map(|(a, b)| 0.5 * (b * b - a * a))
            .sum()
    }

    pub fn derive_residues(&self) -> Result<LayerResidues> {
        self.derive_residues_with_tol(TOL_LINEAR)
    }

    /// Forward recurrence `c_l = (n_{l-1} c_{l-1} + theta_{l,0} + theta_{l,inf}) / n_l`.
    pub fn derive_residues_with_tol(&self, tol: f64) -> Result<LayerResidues> {
        let layers = self.layer_count();
        if self.theta_left.len() != layers + 1 || self.theta_right.len() != layers + 1 {
            return Err(Error::ShapeMismatch(
                "end slopes do not match the layer count".into(),
            ));
        }
        let t1 = self.theta1();
        if t1.abs() > tol {
            return Err(Error::Theta1Nonzero(t1));
        }
        let mut c = vec![0.0; layers + 2];
        for l in 1..=layers {
            let n_l = self.nodes[l - 1].len() as f64;
            if n_l == 0.0 {
                return Err(Error::ShapeMismatch(format!("layer {} has no nodes", l)));
            }
            let n_prev = self.layer_size(l as isize - 1) as f64;
            c[l] = (n_prev * c[l - 1] + self.theta_left[l - 1] + self.theta_right[l - 1]) / n_l;
        }
        let residues = LayerResidues { c };
        let last = self.residue_condition(&residues, layers + 1);
        let scale: f64 = self
            .theta_left
            .iter()
            .chain(&self.theta_right)
            .map(|t| t.abs())
            .sum();
        if last.abs() > tol + 1e-12 * (1.0 + scale) {
            return Err(Error::ConsistencyFailure(format!(
                "residue condition at plane {} leaves {:e}",
                layers + 1,
                last
            )));
        }
        Ok(residues)
    }

    /// `-n_l c_l + n_{l-1} c_{l-1} + theta_{l,0} + theta_{l,inf}` for plane `l` (1-based).
    pub fn residue_condition(&self, residues: &LayerResidues, l: usize) -> f64 {
        let li = l as isize;
        -(self.layer_size(li) as f64) * residues.get(li)
            + self.layer_size(li - 1) as f64 * residues.get(li - 1)
            + self.theta_left[l - 1]
            + self.theta_right[l - 1]
    }

    /// Divides every node by `q_{1,1}`.
    pub fn normalize_scale(&self) -> Result<Self> {
        self.validate()?;
        Ok(self.scaled(self.nodes[0][0].inv()))
    }

    /// Multiplies every node by `factor`; end slopes are unchanged.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for q in out.nodes.iter_mut().flatten() {
            *q *= factor;
        }
        out
    }

    /// Complex conjugate of every node.
    pub fn conjugated(&self) -> Self {
        let mut out = self.clone();
        for q in out.nodes.iter_mut().flatten() {
            *q = q.conj();
        }
        out
    }

    pub fn to_document(&self) -> ConfigDocument {
        ConfigDocument {
            layers: self.layer_sizes(),
            nodes: self
                .nodes
                .iter()
                .map(|layer| layer.iter().map(|q| [q.re, q.im]).collect())
                .collect(),
            theta_dot: ThetaDocument {
                left: self.theta_left.clone(),
                right: self.theta_right.clone(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("configuration serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("configuration serializes")
    }

    /// Parses the JSON document. Shape consistency between `layers` and
    /// `nodes` is checked here; the remaining invariants are left to
    /// [`Configuration::validate`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_configuration()
    }
}

/// Wire form of a configuration:
/// `{"layers":[..], "nodes":[[[re,im],..],..], "theta_dot":{"left":[..], "right":[..]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub layers: Vec<usize>,
    pub nodes: Vec<Vec<[f64; 2]>>,
    pub theta_dot: ThetaDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaDocument {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ConfigDocument {
    pub fn into_configuration(self) -> Result<Configuration> {
        if self.layers.len() != self.nodes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} layer sizes but {} node lists",
                self.layers.len(),
                self.nodes.len()
            )));
        }
        for (l, (n, layer)) in self.layers.iter().zip(&self.nodes).enumerate() {
            if *n != layer.len() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {} declares {} nodes but lists {}",
                    l + 1,
                    n,
                    layer.len()
                )));
            }
        }
        let nodes = self
            .nodes
            .into_iter()
            .map(|layer| {
                layer
                    .into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        Ok(Configuration::new(
            nodes,
            self.theta_dot.left,
            self.theta_dot.right,
        ))
    }
}
