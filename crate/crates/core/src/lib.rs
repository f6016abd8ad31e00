//! Randomly stopped extremes: pgf algebra, stopping families, transformed
//! models, property checks, likelihood inference and simulation.

mod error;
mod series;
pub mod specs;
pub mod suites;

pub mod catalog;
pub mod checks;
pub mod cli;
pub mod dist;
pub mod inference;
pub mod optim;
pub mod pgf;
pub mod roots;
pub mod simulation;
pub mod transforms;

pub use error::{Error, Result};
pub use pgf::{Pgf, PgfFamily, PgfSampler, TailPolicy};
pub use catalog::{make_family, FamilyId, StoppingFamily};
pub use dist::ContinuousModel;
pub use transforms::{Flavor, MapOp, TransformKind, TransformedModel};
pub use checks::{CheckReport, GridSpec};
