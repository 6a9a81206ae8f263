//! Finite directed (laminar) set systems and the type-counting machinery
//! built on them: traces and VC dimension, realized type spaces,
//! quasi-forests of balls with their trees of virtual types and convex
//! orders, concrete carrier models, and the two-variable incremental count.

pub mod error;
pub mod forest;
pub mod formula;
pub mod fullvcmin;
pub mod growth;
pub mod models;
pub mod setsystem;
pub mod types;

pub use error::{Error, Result};
pub use formula::{equality_witness, Carrier, ParametrizedFormula, SignVector};
pub use setsystem::{SetFamily, Universe};
pub use types::{type_space, TypeSpace, TypeSpaceOptions};
