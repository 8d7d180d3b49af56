//! Domain types for a department configuration and one planning period.

pub mod caps;
mod ids;
mod instance;
mod time;
mod types;
pub mod validate;
mod weights;

pub use ids::*;
pub use instance::*;
pub use time::*;
pub use types::*;
pub use validate::validate_instance;
pub use weights::WeightConfig;
