//! Explicit lower-bound constructions for Voronoi diagrams of pairwise
//! disjoint lines and k-flats in R^d, together with a certificate checker.
//!
//! A construction is a list of axis-aligned flats (the sites) plus a list of
//! certificates. Each certificate names a tuple of sites and a witness point
//! that is equidistant from every site of the tuple and strictly farther from
//! every other site. The number of distinct certified tuples is a lower bound
//! on the complexity of the diagram.
//!
//! - [`exactnum`]: rationals extended by square roots, and rational intervals.
//! - [`flats`]: axis-aligned flats and their distances under L², L^p and L¹.
//! - [`constructions`]: the generators, aggregation and the dimension planner.
//! - [`verify`]: exact and interval certificate checking, plus a floating-point
//!   sampling oracle that rediscovers tuples independently.
//! - [`format`]: the `vlb/1` certificate and report file formats.

pub mod constructions;
pub mod error;
pub mod exactnum;
pub mod flats;
pub mod format;
pub mod verify;

pub use error::{Error, Result};
