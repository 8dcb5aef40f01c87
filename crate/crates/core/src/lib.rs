//! Numerical laboratory for three-point quadratic patterns `{x, x+t, x+pt²+qt}`
//! in fractal subsets of `[0, 1]`.
//!
//! The crate covers dyadic Hausdorff content ([`dyadic`]), benchmark sets
//! ([`setgen`]), grid measures with Frostman and spectral-gap constructions
//! ([`measure`]), exact Fourier transforms and energies ([`fourier`]), the
//! configuration integral with its nine-term decomposition ([`integral`]),
//! brute-force pattern search ([`patterns`]) and an end-to-end
//! [`pipeline`].

pub mod dyadic;
pub mod error;
pub mod fourier;
pub mod integral;
pub mod measure;
pub mod patterns;
pub mod pipeline;
mod quad;
pub mod sampled;
pub mod setgen;

pub use dyadic::{DyadicInterval, DyadicSet};
pub use error::{Error, Result};
pub use fourier::SpectralProfile;
pub use integral::{DecompositionReport, QuadraticPattern};
pub use measure::GridMeasure;
pub use sampled::SampledFunction;
