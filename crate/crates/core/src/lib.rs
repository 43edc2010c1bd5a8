//! Finite relative categories, span diagrams and their localization at hypercovers.

pub mod bicat;
pub mod commands;
pub mod document;
pub mod dot;
pub mod fincat;
pub mod fixtures;
pub mod localization;
pub mod relcat;
pub mod report;
pub mod sigma;
pub mod span;
pub mod sset;
