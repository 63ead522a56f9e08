//! Exact symbolic verification of odd deformations of super Riemann surfaces.
//!
//! Layers, bottom up: [`scalar`] (ℚ(i) rational functions), [`diffpoly`]
//! (formal differential polynomials and rewriting), [`grassmann`]
//! (superfields and supermorphisms), [`superconformal`], [`atlas`], [`cech`]
//! and [`deform`]. [`format`] parses expressions and atlas files and
//! [`report`] renders verdicts.

pub mod error;
pub mod scalar;
pub mod diffpoly;
pub mod identities;
pub mod grassmann;
pub mod superconformal;
pub mod atlas;
pub mod cech;
pub mod deform;
pub mod format;
pub mod report;

pub use error::{Error, Result};
