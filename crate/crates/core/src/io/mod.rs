//! File formats: weight JSON, model registry, binary state dumps and PLY export.

mod ply;
mod state_dump;
mod weights;

pub use ply::write_ply;
pub use state_dump::{decode_state_dump, encode_state_dump, read_state_dump, write_state_dump, STATE_MAGIC, STATE_VERSION};
pub use weights::{
    load_models, load_weights, save_registry, save_weights, weights_from_json, weights_to_json, Registry,
    FORMAT_VERSION, INPUT_ORDER,
};
