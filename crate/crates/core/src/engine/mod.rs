//! The update rule, simulation stepping, grafting, brushes and channel
//! extraction.

mod adapt;
mod brush;
mod extract;
mod mask;
mod model;
mod sim;
mod state;

pub use adapt::{adapt, gather_inputs, mlp_forward, MlpOutput};
pub use brush::{apply_brush, brush_selection, BrushMode, BrushTarget, Camera};
pub use extract::{default_max_displacement, extract_color_geo, extract_pbr, to_display, ColorGeoMaps, PbrMaps};
pub use mask::{MaskSampler, UpdateMaskScheme};
pub use model::{
    check_compatibility, init_weights, param_count, Compatibility, InitScheme, Layout, ModelConfig,
    ModelWeights,
};
pub use sim::{GraftField, Simulation};
pub use state::{CellStateBuffer, ConditionField};
pub(crate) use model::lineage_uuid;

/// Default graft-brush increment per event.
pub const DEFAULT_GRAFT_DELTA: f64 = 0.1;
