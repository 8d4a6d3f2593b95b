//! Parallel transport, fundamental solutions and extension of parallel
//! sections across thin obstacle sets, for connections on trivial vector
//! bundles over open boxes in R^n.

pub mod connection;
pub mod counterexamples;
pub mod error;
pub mod extension;
pub mod fundamental;
pub mod numfmt;
pub mod ode;
pub mod sets;

pub use connection::{ConnectionForm, PiecewisePath, SampledSection, Smoothness};
pub use error::{Error, Result};
pub use sets::{Grid, ObstacleSet, OpenBox};
