//! Numerical models of the standard tractor bundle of a conformal manifold.
//!
//! The bundle is realized three ways and cross-checked:
//!
//! * [`tractor`]: the splitting `ρ ⊕ μ ⊕ σ` induced by a metric in the
//!   conformal class, with the normal tractor connection written in terms of
//!   the Schouten tensor.
//! * [`ambient`]: homogeneity `−1` vector fields along the metric bundle inside a
//!   first-order ambient metric, with the ambient Levi-Civita connection.
//! * [`homogeneous`]: associated bundles `G ×_P 𝕍` over the flat models
//!   `S^p × S^q` and the quadric, with the Maurer-Cartan connection.
//!
//! [`lie`] provides the matrix groups involved, [`geometry`] the chart-based
//! curvature machinery, and [`experiment`] the named, reproducible checks
//! driven by the `tractor-lab` binary.

pub mod ambient;
pub mod experiment;
pub mod geometry;
pub mod homogeneous;
pub mod jet;
pub mod lie;
pub mod tractor;
