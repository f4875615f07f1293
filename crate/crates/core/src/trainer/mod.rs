//! Backprop-through-time training of the update rule against per-vertex
//! targets.

mod adam;
mod config;
mod tape;
mod target;
mod train;

pub use adam::Adam;
pub use config::{LossKind, TrainConfig};
pub use tape::{data_loss, draw_masks, forward_backward, ForwardBackward, GradientTape};
pub use target::{stripes_target, TargetField, STRIPES_FREQUENCY};
pub use train::{synthesis_rms, train, write_history_csv, HistoryRow, TrainOutput};
