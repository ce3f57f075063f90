//! Inland-waterway accident analytics: record ingestion, per-year cause
//! aggregation, least-squares regression with the full diagnostic suite,
//! exhaustive best-subset selection, and spatial/temporal distributions.
//!
//! All numerical code is generic over the [`scalar::Real`] scalar; the
//! aliases below pin the common `f64` instantiations.

pub mod diagnostics;
pub mod error;
pub mod fdist;
pub mod ingest;
pub mod linalg;
pub mod ols;
pub mod scalar;
pub mod selection;
pub mod spatiotemporal;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type FitResult64 = ols::FitResult<f64>;
pub type Coefficients64 = ols::Coefficients<f64>;
pub type HoldoutReport64 = ols::HoldoutReport<f64>;
pub type VifReport64 = diagnostics::VifReport<f64>;
pub type Relevancy64 = diagnostics::Relevancy<f64>;
pub type ResidualAnalysis64 = diagnostics::ResidualAnalysis<f64>;
pub type SelectionReport64 = selection::SelectionReport<f64>;
pub type SelectionConfig64 = selection::SelectionConfig<f64>;
