//! Monte Carlo coupling experiments on negatively curved model spaces.
//!
//! The crate simulates Brownian motion on the Poincaré disk and on the
//! complex hyperbolic plane H²(ℂ), couples pairs of paths (synchronously,
//! independently or by mirror reflection), and checks the resulting coupling
//! times against closed-form curvature bounds and Carathéodory distances.
//!
//! ```
//! use coupleman::geometry::{moebius_pseudo_distance, DiskPoint};
//!
//! let x = DiskPoint::new(0.5, 0.0).unwrap();
//! assert_eq!(moebius_pseudo_distance(x, DiskPoint::ORIGIN), 0.5);
//! ```

// `!(x > 0.0)` is how NaN gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caratheodory;
pub mod comparison;
pub mod coupling;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};

// The book's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/caratheodory.md")]
    mod caratheodory {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
