//! Curvature of Hermitian metrics on coordinate charts, conformal transformation laws,
//! and constant second scalar curvature solvers on complex tori.
//!
//! The crate is driven through its examples:
//!
//! ```text
//! examples/
//!   metric_dsl.rs          parse a metric, differentiate, evaluate a jet
//!   pointwise_curvature.rs torsion, Ricci forms and scalars of the builtin catalogue
//!   scalar_identities.rs   two-path scalar curvatures and the comparison identity
//!   conformal_oracle.rs    conformal laws against direct recomputation
//!   torus_grid.rs          discrete Laplacian, quadrature and Gauduchon degrees
//!   chern_zero.rs          zero Gauduchon degree: linear Poisson-type solve
//!   chern_negative.rs      negative degree: continuity method with Newton steps
//!   bismut_yamabe.rs       variational Bismut problem on a balanced torus metric
//! ```
//!
//! Run with `cargo run --release --example <name>`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod catalog;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod forms;
pub mod grid;
pub mod krylov;
pub mod manifold;
pub mod metric;
pub mod metric_expr;
pub mod report;
pub mod sjet;
pub mod solvers;

pub use error::{Error, Result};
pub use manifold::ModelManifold;
pub use metric::{ChartPoint, MetricJet, C64};
