//! Physician duty rostering: configurable roster structures compiled to a
//! mixed-integer program, solved externally or by exhaustive search, and
//! checked by an independent validator.

pub mod check;
pub mod derive;
pub mod document;
pub mod mip;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod rounding;
pub mod scenarios;
pub mod solver;
