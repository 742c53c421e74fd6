//! Core of the adapterforge toolchain.
//!
//! Everything here is allocation-only and free of IO: the specification
//! language, the element tree the matcher walks, the concept-first
//! signature matcher, adapter generation and project integration. File
//! formats, the component pool and the CLI live in the `adapterforge`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adapter_gen;
pub mod analyser;
pub mod aslt;
pub mod integrate;
pub mod ratio;
pub mod spec_lang;

pub use ratio::Ratio;

/// Version string recorded in adapter provenance.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
