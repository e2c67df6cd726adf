//! Landscape analysis for sparsity-constrained least squares
//!
//! ```text
//! min ½‖Ax − b‖²   s.t.   ‖x‖₀ ≤ s
//! ```
//!
//! The crate enumerates every M-stationary point of a small instance,
//! certifies nondegeneracy, classifies minimizers and saddle points,
//! counts connected components of lower level sets exactly, and probes
//! strong stability under data perturbations. An iterative hard
//! thresholding baseline is included for comparison.

pub mod enumeration;
pub mod error;
pub mod iht;
pub mod io;
pub mod levelsets;
pub mod linalg;
pub mod model;
mod parallel;
pub mod sampling;
pub mod stability;
pub mod stationarity;

pub use enumeration::{
    check_s_regularity, enumerate_stationary, enumerate_stationary_with, enumerate_supports,
    run_genericity_experiment, EnumerateOptions, GenericityReport, LandscapeReport,
};
pub use error::{Error, Result, ValidationError};
pub use iht::{
    compare_with_landscape, hard_threshold, iht_solve, summarize_runs, IhtComparison, IhtResult,
};
pub use levelsets::{
    component_count, subspace_min, sweep_levels, sweep_with_table, LevelSetGraph, SubspaceTable,
    SupportSubspace, SweepReport,
};
pub use linalg::DenseMatrix;
pub use model::{objective, support_of, FeasiblePoint, Instance, SupportSet, ToleranceConfig};
pub use stability::{
    perturb_instance, probe_strong_stability, PerturbationMode, StabilityProbeConfig,
    StabilityReport, StabilityVerdict,
};
pub use stationarity::{
    cell_attachment, certify, classify, gradient, is_m_stationary, CellAttachment,
    NondegeneracyCertificate, PointKind, StationaryPoint,
};
