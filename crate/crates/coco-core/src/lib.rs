//! Robust estimation with composite concave-convex losses.
//!
//! The crate provides:
//! - the catalog of concave components `g` and convex components `s`
//!   whose composition `Gamma = g(s(u))` defines the loss family
//!   ([`loss`]),
//! - LASSO/SCAD/ridge-mix penalties and their scalar threshold
//!   operators ([`penalty`]),
//! - weighted penalized inner solvers (coordinate descent, IRLS,
//!   proximal subgradient) ([`solver`]),
//! - the outer reweighting loops: conjugation-based weights, fixed
//!   truncation threshold and fixed trimming count ([`engine`]),
//! - numerical checkers for concavity, Fisher consistency and the
//!   truncation conjugate ([`diagnostics`]).

pub mod data;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod loss;
pub mod penalty;
pub mod solver;

pub use data::{Dataset, TaskKind};
pub use engine::{fit, objective, Algorithm, FitConfig, FitResult, Init};
pub use error::{CocoError, Result};
pub use loss::{CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec};
pub use penalty::{PenaltyFamily, PenaltySpec};
