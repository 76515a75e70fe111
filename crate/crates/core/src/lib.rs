//! Gaussian quasimodes on the plane, on translation surfaces and on rational billiards.

// Negated float comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod experiment_runner;
pub mod gaussian_wavepacket;
pub mod linear_flow;
pub mod quadrature;
pub mod semiclassical_analysis;
pub mod special;
pub mod spectral_width;
pub mod surface_geometry;
pub mod surface_quasimode;
