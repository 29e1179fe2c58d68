//! Clustering of misaligned curves.
//!
//! Curves are compared with a warping-invariant similarity, groups of
//! mutually similar curves are combined into representatives, and the
//! remaining curves are nudged toward their neighbours. Candidate partitions
//! produced along the way are scored with a cluster validity index on the
//! original curves, and the best one is returned.
//!
//! ```no_run
//! use warpclust::{io, pipeline::{run, RunConfig}};
//! let set = io::read_curves("curves.csv".as_ref())?;
//! let result = run(&set, &RunConfig::default())?;
//! println!("{:?}", result.partition.groups());
//! # Ok::<(), warpclust::Error>(())
//! ```

pub mod combining;
pub mod domain;
pub mod error;
pub mod indices;
pub mod io;
mod nelder_mead;
pub mod partition;
pub mod pipeline;
pub mod similarity;
pub mod simulation;
pub mod spline;
pub mod updating;
pub mod warping;

pub use domain::{Domain, SplineSettings};
pub use error::{Error, Result};
pub use indices::{adjusted_rand, ClusterIndex, DistanceMatrix, Inter, Intra};
pub use io::CurveSet;
pub use partition::Partition;
pub use pipeline::{run, RunConfig, RunResult};
pub use similarity::{similarity, similarity_matrix, Curve, SimilarityMatrix};
pub use spline::{SplineRep, TimeGrid};
pub use warping::{OptimizerSettings, Warping};
