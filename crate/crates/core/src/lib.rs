//! Dirichlet energy, intrinsic metrics and capacity on weighted graphs.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, with `F32`-suffixed
//! variants for single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod dirichlet;
pub mod energy;
pub mod error;
pub mod generate;
pub mod graph;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod packing;
pub mod paths;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Graph = graph::WeightedGraph<f64>;
pub type GraphF32 = graph::WeightedGraph<f32>;
pub type Measure = graph::Measure<f64>;
pub type MeasureF32 = graph::Measure<f32>;
pub type Potential = graph::Potential<f64>;
pub type PotentialF32 = graph::Potential<f32>;
pub type EdgeFunction = graph::EdgeFunction<f64>;
pub type EdgeFunctionF32 = graph::EdgeFunction<f32>;
pub type DenseMetric = metrics::DenseMetric<f64>;
pub type DenseMetricF32 = metrics::DenseMetric<f32>;
