//! Augmented Gromov-Wasserstein (AGW): a convex interpolation between the
//! Gromov-Wasserstein divergence, which compares intra-domain distance
//! matrices, and CO-Optimal Transport, which jointly couples samples and
//! features of raw data matrices.
//!
//! The crate provides:
//! - [`core`]: shared domain types (histograms, couplings, configuration);
//! - [`linot`]: exact (network simplex) and entropic (log-domain Sinkhorn)
//!   linear OT solvers;
//! - [`quad`]: factored evaluation of the quadratic cost tensors, their
//!   objectives and gradients;
//! - [`solvers`]: block-coordinate solvers for GW, COOT and AGW;
//! - [`preprocess`]: distance-matrix construction and normalization;
//! - [`tasks`]: barycentric projection, FOSCTTM, matching accuracy, label
//!   propagation, supervision costs and group aggregation;
//! - [`oracle`]: brute-force reference implementations for validation.

pub mod core;
pub mod error;
pub mod linot;
pub mod oracle;
pub mod preprocess;
pub mod quad;
pub mod solvers;
pub mod tasks;

pub use crate::core::{
    uniform_hist, validate_coupling, Coupling, DataMatrix, DistanceMatrix, InnerLinearSolver,
    InnerSampleSolver, ProbVector, SolveReport, SolverConfig,
};
pub use crate::error::{AgwError, Result};
