use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::engine::UpdateMaskScheme;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean squared error of the display-range attributes.
    DirectMse,
    /// Transport plus moment matching between attribute sets.
    SetOt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay: f64,
    pub pool_size: usize,
    pub seed_inject_every: usize,
    /// Inclusive range of steps per rollout.
    pub step_range: (usize, usize),
    pub batch_size: usize,
    pub overflow_weight: f64,
    pub loss: LossKind,
    pub rng_seed: u64,
    pub mask_scheme: UpdateMaskScheme,
    /// Perception rotation about the vertex normals, radians.
    pub orientation: f64,
    /// Divide each parameter tensor's gradient by its L2 norm before Adam.
    pub normalize_grads: bool,
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3000,
            lr: 1e-3,
            lr_decay_epochs: vec![1000, 2000],
            lr_decay: 0.3,
            pool_size: 256,
            seed_inject_every: 16,
            step_range: (15, 25),
            batch_size: 4,
            overflow_weight: 10_000.0,
            loss: LossKind::DirectMse,
            rng_seed: 0,
            mask_scheme: UpdateMaskScheme::Bernoulli,
            orientation: 0.0,
            normalize_grads: true,
            checkpoint_every: 500,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.step_range.0 < 1 || self.step_range.1 < self.step_range.0 {
            return bad(format!("invalid step range {:?}", self.step_range));
        }
        if self.batch_size == 0 || self.pool_size < self.batch_size {
            return bad(format!("pool_size {} must be >= batch_size {} > 0", self.pool_size, self.batch_size));
        }
        if !(self.lr > 0.0) || !(self.lr_decay > 0.0) {
            return bad(format!("lr {} and lr_decay {} must be positive", self.lr, self.lr_decay));
        }
        if !self.orientation.is_finite() {
            return bad("orientation must be finite".into());
        }
        if !(self.overflow_weight >= 0.0) {
            return bad(format!("overflow_weight {} must be non-negative", self.overflow_weight));
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let decays = self.lr_decay_epochs.iter().filter(|&&e| epoch >= e).count();
        self.lr * self.lr_decay.powi(decays as i32)
    }
}
