//! Numerical laboratory for heat and Laplace problems on planar convex rings.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convexity;
pub mod curvature;
pub mod error;
pub mod geometry;
pub mod homotopy;
pub mod identities;
pub mod lab;
pub mod pde;
pub mod report;
pub mod symmetric;

pub use error::{Error, Result};
