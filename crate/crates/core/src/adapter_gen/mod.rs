//! Adapter synthesis for ADAPTABLE connections.
//!
//! An adapter only rearranges, converts and defaults arguments; it never
//! adds behaviour the provider lacks.

mod generate;
mod interpret;
mod stub;

pub use generate::{
    generate_adapter, mapping_from_match, AdapterSpec, GenError, OpMapping, Provenance,
    ReturnAction, SlotAction, ADAPTER_VERSION,
};
pub use interpret::{apply_conversion, interpret_mapping, provider_args, InterpretError};
pub use stub::{check_template, emit_stub, TemplateError, DEFAULT_TEMPLATE};
