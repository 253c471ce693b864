//! Numerical laboratory for the two natural metrics on operator models:
//! the Riesz metric (operator-norm distance of bounded transforms) and the
//! graph metric (operator-norm distance of graph projections).
//!
//! Everything lives at desk scale: operators are rectangular complex
//! matrices, closed relations are projections on the direct sum, and
//! unbounded behaviour is modelled by mode families whose entries blow up
//! along the parameter. On top of the basic calculus the crate provides
//!
//! * continuity analysis of operator families in both metrics
//!   ([`family`], [`modes`]),
//! * the twist construction `Φ(A) = A·V(A)` that converts graph-continuous
//!   families into Riesz-continuous ones ([`phi`], [`transport`]),
//! * spectral charts, polarization compatibility and the conjugation
//!   trivializer for self-adjoint families ([`spectral`], [`trivialize`]),
//! * gallery generators and reproducible run reports ([`gallery`],
//!   [`report`]).

pub mod cmatrix;
pub mod error;
pub mod family;
pub mod gallery;
pub mod grid;
pub mod jacobi;
pub mod modes;
pub mod operator;
pub mod phi;
pub mod report;
pub mod spectral;
pub mod tolerances;
pub mod transport;
pub mod trivialize;

pub use cmatrix::CMatrix;
pub use error::{Error, Result};
pub use family::{ContinuityReport, FamilySpec, Metric, OperatorFamily, RefinePolicy, Verdict};
pub use gallery::{GeneratorName, GeneratorSpec};
pub use grid::ParamGrid;
pub use modes::{Evaluated, ModeFamily, ModeGenerator};
pub use operator::{BoundedTransformData, ClosedRelation, MatrixOperator};
pub use phi::Isometry;
pub use report::RunReport;
pub use tolerances::Tolerances;
pub use transport::Frame;
