//! Dataset production, verification and scoring on top of `lyapforge-core`.

pub mod check;
pub mod config;
pub mod deadline;
pub mod error;
pub mod expert;
pub mod generate;
pub mod mix;
pub mod record;
pub mod score;
pub mod vocab;
pub mod wild;
