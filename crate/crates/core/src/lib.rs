//! Single-zone building thermal simulation and dataset generation.
//!
//! The crate turns a flat building parameter map into a lumped RC thermal
//! network, simulates it against EPW weather with occupant gain and window
//! opening profiles, and batch-runs parameter variations into CSV datasets
//! with JSON metadata sidecars.
//!
//! Pipeline overview:
//!
//! ```text
//! parameter map --converter--> resolved model --assembly--> RC network
//!                                                             |
//! EPW weather + profiles + controller --------simulation------+--> CSV + sidecar
//! ```

pub mod bestest;
pub mod config;
pub mod converter;
pub mod model;
pub mod orchestrator;
pub mod params;
pub mod profiles;
pub mod weather;

/// Package version recorded in run metadata sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
