//! Simulation and analytics for a family of growing random-graph processes:
//! the evolving classical model, preferential attachment with random unbounded
//! edge counts, a continuous mixture of the two, and a hard-copying variant.
//!
//! Two simulation backends are provided. [`histogram`] tracks only the degree
//! histogram and steps it with per-class binomial draws; [`vertex`] tracks
//! individual vertices with optional adjacency and connected components, and
//! is the only backend that can run the hard-copying model. The analytic side
//! lives in [`recurrence`], which builds and solves the master recurrences for
//! the expected degree counts, and [`stats`] turns raw trajectories into tail
//! exponents, ratios and bound checks.

pub mod error;
pub mod histogram;
pub mod params;
pub mod recurrence;
pub mod rng;
pub mod stats;
pub mod vertex;

pub use error::{Error, Result};
pub use params::{ModelKind, ModelParams};
