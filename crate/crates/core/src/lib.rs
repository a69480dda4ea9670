//! Measures of ultrametric (hierarchical) structure in high-dimensional
//! point clouds, and the distance-concentration tools built on them:
//! histogram peak counting, 1-D mixture selection by BIC, principal
//! coordinates, agglomerative and contiguity-constrained clustering, and a
//! sliding-window segmentation pipeline for signals.
//!
//! ```
//! use umlab::generators::gen_uniform;
//! use umlab::ultrametricity::{triangle_um, UmConfig};
//!
//! let cloud = gen_uniform(100, 2000, 7).unwrap();
//! let report = triangle_um(&cloud, &UmConfig::with_seed(7)).unwrap();
//! assert!(report.um_fraction > 0.5);
//! ```

pub mod embedding;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod hierarchy;
pub mod histpeaks;
pub mod io;
pub mod pipeline;
pub mod ultrametricity;

pub use error::{Error, Result};
