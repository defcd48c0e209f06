use thiserror::Error;

/// Errors raised by the numerical and diagnostic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} at scale {scale:e}")]
    NonSymmetric { asymmetry: f64, scale: f64 },
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid node count {n}: {reason}")]
    BadNodeCount { n: usize, reason: &'static str },
    #[error("invalid integration domain [{a}, {b}]")]
    BadDomain { a: f64, b: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    BadParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("grid too coarse: refinement changed {quantity} by {change:e} (tolerance {tolerance:e})")]
    GridTooCoarse {
        quantity: &'static str,
        change: f64,
        tolerance: f64,
    },
    #[error("kernelized density {value:e} at x = {x} is below the floor {floor:e}")]
    DensityUnderflow { x: f64, value: f64, floor: f64 },
    #[error("basis is rank deficient (Gram condition number {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no threshold splits the distribution into two parts of positive mass")]
    DegenerateSplit,
    #[error("kernel matrix row {row} has nonpositive sum")]
    ZeroRowSum { row: usize },
    #[error("cluster {label} has no points")]
    EmptyCluster { label: usize },
    #[error("angle {theta} outside (0, pi/4)")]
    BadTheta { theta: f64 },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("cluster mean directions have rank below {k}")]
    DegenerateMeans { k: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
