use thiserror::Error;

use crate::config::Configuration;
use crate::poly::ComplexPolynomial;

pub type Result<T> = std::result::Result<T, Error>;

/// Diagnostics carried out of a solver that ran out of iterations or stalled.
#[derive(Debug, Clone)]
pub struct Stall {
    pub iterations: usize,
    /// Final residual (max |F| for node Newton, max coefficient for the polynomial solve).
    pub residual: f64,
    pub history: Vec<f64>,
    /// Best node configuration reached, when the solver works on nodes.
    pub best_config: Option<Configuration>,
    /// Best polynomials reached, when the solver works on coefficients.
    pub best_polys: Vec<ComplexPolynomial>,
    /// Degree N-1 coefficient of the polynomial residual; it does not move under Newton.
    pub top_coefficient: Option<f64>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("node ({layer},{k}) is zero")]
    ZeroNode { layer: usize, k: usize },
    #[error("nodes ({layer},{k}) and ({layer},{j}) coincide")]
    DuplicateNode { layer: usize, k: usize, j: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("theta1 = {0:e} does not vanish")]
    Theta1Nonzero(f64),
    #[error("theta2 = {0:e} does not vanish")]
    Theta2Nonzero(f64),
    #[error("internal consistency check failed: {0}")]
    ConsistencyFailure(String),
    #[error("node ({layer},{k}) collides with node ({other_layer},{j}) of an adjacent layer")]
    CrossLayerCollision {
        layer: usize,
        k: usize,
        other_layer: usize,
        j: usize,
    },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("polynomial has degree zero")]
    DegreeZero,
    #[error("c = {0} is a non-positive integer")]
    BadC(f64),
    #[error("degenerate degree: {0}")]
    DegenerateDegree(String),
    #[error("roots are not simple: {0}")]
    NonSimpleRoots(String),
    #[error("root {0} sits on a puncture")]
    RootAtPuncture(String),
    #[error("c2 = n - 1 - b + c vanishes")]
    ZeroC2,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("no polynomial solutions: {0}")]
    NoSolutions(String),
    #[error("adjacent layers share a root: {0}")]
    SharedRoots(String),
    #[error("no convergence after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    NoConvergence(Box<Stall>),
    #[error("singular Newton step at iteration {0}")]
    SingularStep(usize),
    #[error("degenerate Q~ at layer {0}")]
    DegenerateQtilde(usize),
    #[error("block {index} is not balanced (max |F| = {residual:e})")]
    BlockNotBalanced { index: usize, residual: f64 },
    #[error("block {index} is not normalized: {reason}")]
    BlockNotNormalized { index: usize, reason: String },
    #[error("malformed input: {0}")]
    Parse(String),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Precondition,
    Convergence,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroNode { .. }
            | Error::DuplicateNode { .. }
            | Error::ShapeMismatch(_)
            | Error::IndexOutOfRange(_)
            | Error::Parse(_) => ErrorClass::Input,
            Error::NoConvergence(_) | Error::SingularStep(_) => ErrorClass::Convergence,
            _ => ErrorClass::Precondition,
        }
    }
}
