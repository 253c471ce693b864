//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("hermitian eigendecomposition failed: {0}")]
    EigFailure(&'static str),

    #[error("matrix is not positive definite (min eigenvalue {min:.3e} < margin {margin:.3e})")]
    NotPositiveDefinite { min: f64, margin: f64 },

    #[error("contraction is not in the open image: ‖a‖ = {norm} ≥ 1 − tol")]
    NotInOpenImage { norm: f64 },

    #[error("projection eigenvalue {value:.6} inside the rank-gap window [{lo}, {hi}]")]
    RankAmbiguous { value: f64, lo: f64, hi: f64 },

    #[error("singular value {value:.3e} inside the ambiguity window around {threshold:.3e}")]
    SingularValueAmbiguous { value: f64, threshold: f64 },

    #[error("relation is not an operator graph: vertical defect of rank {defect}")]
    VerticalDefect { defect: usize },

    #[error("Riesz metric requested at a vertical-defect node (parameter {x})")]
    RieszAtRelation { x: f64 },

    #[error("projection step {step:.4} at index {index} exceeds the transport cap {cap}; refine the path")]
    RefinePath { index: usize, step: f64, cap: f64 },

    #[error("refinement exhausted at depth {depth}")]
    RefinementExhausted { depth: usize },

    #[error("frame/input mismatch: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    FrameMismatch { defect: f64, tol: f64 },

    #[error("operator is near-singular: smallest singular value {value:.3e} < {tol:.3e}")]
    NearSingular { value: f64, tol: f64 },

    #[error("level {lambda} has no spectral gap at a node: gap {gap:.3e} < {gap_min:.3e}")]
    NoSpectralGap { lambda: f64, gap: f64, gap_min: f64 },

    #[error("nodes not covered by any spectral chart: {nodes:?}")]
    UncoveredNodes { nodes: Vec<usize> },

    #[error("polarizations incompatible: tail score {score:.4} exceeds threshold {threshold}")]
    Incompatible { score: f64, threshold: f64 },

    #[error("tail model missing or tail index too small to decide")]
    TailInconclusive,

    #[error("spectral bound violated at node {index}: eigenvalue {value} < {bound}")]
    SpectralBoundViolated { index: usize, value: f64, bound: f64 },

    #[error("operator expected but family has a relation node at parameter {x}")]
    RelationNode { x: f64 },

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
