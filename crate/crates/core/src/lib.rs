//! Selections of multivalued interval maps that preserve prescribed
//! distribution functions, with exact transfer operators, random maps and
//! the supporting measure algebra.

pub mod error;
pub mod examples;
pub mod interval_maps;
pub mod io;
pub mod measures;
pub mod pl;
pub mod randmaps;
pub mod rational;
pub mod selection;
pub mod transfer;

pub use error::{Error, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
