//! Exact Lipschitz-extension machinery on finite pointed metric spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`] — finite pointed metric spaces, subspaces, doubling estimates.
//! * [`measure`] — finitely supported signed measures and total variation.
//! * [`optim`] — min-cost flow and a dense revised-simplex LP solver.
//! * [`transport`] — exact W1 and Kantorovich–Rubinstein norms with certificates.
//! * [`extension`] — Lipschitz norms, McShane extension, linear extension via projections.
//! * [`projection`] — gentle partitions of unity, random projections, minimal-K synthesis,
//!   the ℓ∞⁺ → B(ℓ₁⁺) retraction.
//! * [`registry`] — named projection builders and KR evaluators selectable at runtime.
//! * [`formats`] — JSON file schemas for all of the above.
//! * [`gen`] — seeded random instance generators shared by tests and reports.

pub mod config;
pub mod error;
pub mod extension;
pub mod formats;
pub mod gen;
pub mod measure;
pub mod metric;
pub mod optim;
pub mod projection;
pub mod registry;
pub mod transport;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use extension::{PointFunction, TargetNorm};
pub use measure::SignedMeasure;
pub use metric::{FiniteMetricSpace, Subspace};
pub use projection::{GentlePartition, RandomProjection};
pub use transport::TransportResult;
