//! The integer program: canonical form, builder, statistics and listing.

pub mod build;
pub mod listing;
pub mod model;
pub mod stats;

pub use build::{assignment_coefficient, build_model, BuildError};
pub use listing::render_listing;
pub use model::{CanonicalModel, Constraint, Family, Sense, VarClass, VarKind, Variable};
pub use stats::{model_statistics, ModelStatistics};
