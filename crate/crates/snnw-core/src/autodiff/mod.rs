//! Exact derivatives: forward jets over spatial inputs, reverse tape over
//! jet-valued partials for parameter gradients.

pub mod jet;
pub mod tape;

pub use jet::{jet_seed, seed_point, Jet1, Jet2, Scalar};
pub use tape::{NodeId, Tape};
