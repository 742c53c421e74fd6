//! File formats, the component pool, the adaptation workflow and the
//! command-line front end built on `adapterforge-core`.

pub mod cli;
pub mod error;
pub mod formats;
pub mod linkage;
pub mod pool;
pub mod report;
pub mod specs;

pub use adapterforge_core as core;
pub use error::{Error, Result};
