use ndarray::{s, Array2, ArrayView2, Axis};

use super::model::ModelWeights;
use super::state::{CellStateBuffer, ConditionField};
use crate::perception::PerceptionBuffer;
use crate::{Error, Real, Result};

/// Intermediate values of one MLP evaluation over a batch of rows.
#[derive(Debug, Clone)]
pub struct MlpOutput<T> {
    /// First-layer pre-activations, `m x hidden`.
    pub pre: Array2<T>,
    /// Residual updates, `m x channels`.
    pub update: Array2<T>,
}

/// Builds the MLP input rows `[s_i | z_i | h_i]` for the given cells.
pub fn gather_inputs<T: Real>(
    states: ArrayView2<T>,
    perception: ArrayView2<T>,
    condition: ArrayView2<T>,
    rows: &[usize],
) -> Array2<T> {
    let (c, p, d) = (states.ncols(), perception.ncols(), condition.ncols());
    let mut x = Array2::zeros((rows.len(), c + p + d));
    for (r, &i) in rows.iter().enumerate() {
        let mut row = x.row_mut(r);
        row.slice_mut(s![..c]).assign(&states.row(i));
        row.slice_mut(s![c..c + p]).assign(&perception.row(i));
        row.slice_mut(s![c + p..]).assign(&condition.row(i));
    }
    x
}

/// `W2 relu(W1 x + b1) + b2` for every row of `x`.
pub fn mlp_forward<T: Real>(weights: &ModelWeights<T>, x: ArrayView2<T>) -> MlpOutput<T> {
    let mut pre = x.dot(&weights.w1.t());
    pre += &weights.b1.view().insert_axis(Axis(0));
    let hidden = pre.mapv(|v| v.max(T::zero()));
    let mut update = hidden.dot(&weights.w2.t());
    update += &weights.b2.view().insert_axis(Axis(0));
    MlpOutput { pre, update }
}

pub(crate) fn check_dims<T: Real>(
    weights: &ModelWeights<T>,
    cells: usize,
    channels: usize,
    perception: ArrayView2<T>,
    condition: ArrayView2<T>,
) -> Result<()> {
    let cfg = &weights.config;
    if channels != cfg.channels {
        return Err(Error::Shape(format!("state has {channels} channels, model expects {}", cfg.channels)));
    }
    if perception.dim() != (cells, cfg.perception_dim()) {
        return Err(Error::Shape(format!(
            "perception is {:?}, expected ({cells}, {})",
            perception.dim(),
            cfg.perception_dim()
        )));
    }
    if condition.dim() != (cells, cfg.condition_dim) {
        return Err(Error::Shape(format!(
            "condition is {:?}, expected ({cells}, {})",
            condition.dim(),
            cfg.condition_dim
        )));
    }
    Ok(())
}

pub(crate) fn masked_rows(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect()
}

/// Adds the MLP residual to every masked cell; unmasked cells are copied.
pub fn adapt<T: Real>(
    states: &CellStateBuffer<T>,
    perception: &PerceptionBuffer<T>,
    condition: &ConditionField<T>,
    weights: &ModelWeights<T>,
    mask: &[bool],
) -> Result<CellStateBuffer<T>> {
    let n = states.cells();
    check_dims(weights, n, states.channels(), perception.values.view(), condition.values.view())?;
    if mask.len() != n {
        return Err(Error::Shape(format!("mask has {} entries for {n} cells", mask.len())));
    }
    let rows = masked_rows(mask);
    let x = gather_inputs(states.values.view(), perception.values.view(), condition.values.view(), &rows);
    let out = mlp_forward(weights, x.view());
    let mut next = states.clone();
    for (r, &i) in rows.iter().enumerate() {
        let mut row = next.values.row_mut(i);
        row += &out.update.row(r);
    }
    next.step_counter += 1;
    Ok(next)
}
