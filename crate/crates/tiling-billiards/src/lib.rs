//! Generalized tiling billiards in cyclic polygons.
//!
//! A trajectory refracted through a chain of centrally symmetric cyclic
//! polygons is conjugate to an interval exchange map. This crate simulates
//! the trajectories ([`geometry`]), builds and induces the interval
//! exchanges ([`iet`]), measures how far trajectories stray from their mean
//! direction ([`deviations`]) and handles the self-similar case coming from
//! loops in the Rauzy diagram ([`selfsim`]). The [`cli`] module backs the
//! `tbill` binary.

pub mod cli;
pub mod deviations;
pub mod error;
pub mod geometry;
pub mod iet;
pub mod linalg;
pub mod rng;
pub mod selfsim;

pub use error::{Error, Result};

/// Breakpoint and corner tolerance (relative to the circumradius for
/// geometry, absolute on the unit interval for exchanges).
pub const EPS_BOUNDARY: f64 = 1e-12;

/// Below this modulus the mean displacement counts as zero.
pub const EPS_MEAN: f64 = 1e-10;

/// Minimal |alpha| for the deviation vector to be considered outside E3.
pub const ALPHA_THRESHOLD: f64 = 1e-8;
