use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("conflicting weights for edge ({u}, {v}): {a} vs {b}")]
    Asymmetric { u: VertexId, v: VertexId, a: f64, b: f64 },

    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),

    #[error("non-positive weight {w} on edge ({u}, {v})")]
    NonPositiveWeight { u: VertexId, v: VertexId, w: f64 },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("generator would produce {requested} vertices, cap is {cap}")]
    VertexCap { requested: u128, cap: usize },

    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),

    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),

    #[error("empty vertex set: {0}")]
    EmptySet(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense metric limited to {cap} vertices, got {n}")]
    MetricTooLarge { n: usize, cap: usize },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("flow violates conservation at vertex {vertex}: divergence {divergence:e}")]
    Conservation { vertex: VertexId, divergence: f64 },

    #[error("flow has zero net flux")]
    ZeroFlux,

    #[error("metric is not intrinsic: load exceeds measure at vertex {vertex} by {excess:e}")]
    NotIntrinsic { vertex: VertexId, excess: f64 },

    #[error("graph is not a tree ({edges} edges on {vertices} vertices)")]
    NotATree { edges: usize, vertices: usize },

    #[error("expected a recurrent verdict, got {0}")]
    NotRecurrent(String),

    #[error("discs {a} and {b} overlap by {overlap:e}")]
    Overlap { a: VertexId, b: VertexId, overlap: f64 },

    #[error("near-tangency between discs {a} and {b}: gap {gap:e} is inside the ambiguity band")]
    AmbiguousTangency { a: VertexId, b: VertexId, gap: f64 },

    #[error("point ({x}, {y}) lies inside disc {id}")]
    PointInsideDisc { id: VertexId, x: f64, y: f64 },

    #[error("duplicate identifier {0}")]
    Duplicate(VertexId),

    #[error("edge ({u}, {v}) is not subordinate to the packing: gap {gap:e}")]
    NotSubordinate { u: VertexId, v: VertexId, gap: f64 },

    #[error("boundary data inconsistent with Lipschitz constant: |{a} - {b}| > L * {dist}")]
    LipschitzInconsistent { a: f64, b: f64, dist: f64 },

    #[error("harmonic part did not stabilize: sup diff {sup_diff:e}, energy diff {energy_diff:e}")]
    NotStabilized { sup_diff: f64, energy_diff: f64 },

    #[error("assertion failed: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
