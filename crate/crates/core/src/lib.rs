pub mod error;
#[cfg(feature = "cli")]
pub mod cli;
pub mod film;
pub mod gather;
pub mod image;
pub mod integrators;
pub mod math;
pub mod metrics;
pub mod mis;
pub mod par;
pub mod path;
pub mod photon_map;
pub mod scene;
pub mod scenes;
pub mod stats;

pub use error::{Error, Result};
