//! Spectral theory and breather construction on the periodic necklace graph.
//!
//! The necklace graph alternates horizontal links of length `L = l·π` with
//! pairs of semicircles of length `π`; its period is `P = L + π`. Working in
//! the subspace of functions symmetric in the two semicircles, the graph
//! collapses to the real line with Kirchhoff derivative-jump conditions at
//! the vertex points: the link derivative equals twice the semicircle
//! derivative on both sides of every vertex.
//!
//! The crate provides, in dependency order:
//!
//! * [`geometry`] — the unit-cell layout and coordinate maps,
//! * [`grid`] / [`profile`] — discretized windows of the graph and
//!   piecewise-smooth functions living on them,
//! * [`floquet`] — transfer/monodromy matrices of `-u'' = λu` and the
//!   four-case multiplier classification,
//! * [`spectrum`] — band/gap scans, the breather-frequency validation rule
//!   and the rational-length-ratio check,
//! * [`homoclinic`] — the two symmetric bound states of `u'' = ε²u - u³`
//!   found by shooting through the vertex jumps,
//! * [`modes`] — the truncated coupled-mode system for the time-Fourier
//!   coefficients, solved as a boundary-value problem,
//! * [`sim`] — direct leapfrog integration of the nonlinear Klein-Gordon
//!   equation on the graph to verify breather behavior.

pub mod banded;
pub mod error;
pub mod floquet;
pub mod geometry;
pub mod grid;
pub mod homoclinic;
pub mod json;
pub mod modes;
pub mod profile;
pub mod sim;
pub mod spectrum;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
