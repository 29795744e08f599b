//! Exact harmonic analysis and non-abelian Kummer maps on metrized reduction graphs.
//!
//! All arithmetic is over arbitrary-precision rationals. The crate is organized
//! bottom-up: [`graph`] and [`homology`] describe the combinatorics, [`harmonic`]
//! the Laplacian and height pairings, [`lie`] the graded Lie algebra with its
//! monodromy operator, and [`kummer`] the measures `μ_n` and the Kummer map.
//! [`cheng_katz`] is an independent path-based oracle, [`ops`] holds graph
//! reductions and the injectivity classification, and [`chabauty`] the
//! quadratic-Chabauty measures.

pub mod bundled;
pub mod chabauty;
pub mod cheng_katz;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod kummer;
pub mod homology;
pub mod lie;
pub mod ops;
pub mod linalg;
pub mod poly;
pub mod rational;

pub use error::{GrappaError, Result};
pub use graph::{Dart, Divisor, GraphPoint, ReductionGraph, Stability};
pub use rational::Q;
