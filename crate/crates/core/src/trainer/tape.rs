use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;

use super::config::LossKind;
use super::target::TargetField;
use crate::engine::{gather_inputs, mlp_forward, CellStateBuffer, ConditionField, MaskSampler, ModelWeights};
use crate::losses::{l_m_grad, l_w_grad, overflow_grad, overflow_loss, FeatureSet};
use crate::perception::PerceptionOperator;
use crate::{Error, Real, Result};

struct TapeStep<T> {
    rows: Vec<usize>,
    /// MLP inputs `[s | z | h]` of the updated rows.
    inputs: Array2<T>,
    pre: Array2<T>,
}

/// The forward record of a rollout with fixed masks.
pub struct GradientTape<T> {
    steps: Vec<TapeStep<T>>,
    cells: usize,
}

/// Result of one differentiated rollout.
#[derive(Debug, Clone)]
pub struct ForwardBackward<T> {
    pub loss: T,
    pub data_loss: T,
    /// Same shapes as the weights.
    pub grads: ModelWeights<T>,
    pub final_states: CellStateBuffer<T>,
}

/// Draws `k` masks from the sampler.
pub fn draw_masks(sampler: &MaskSampler, rng: &mut impl Rng, k: usize) -> Vec<Vec<bool>> {
    (0..k)
        .map(|_| {
            let mut m = Vec::new();
            sampler.sample(rng, &mut m);
            m
        })
        .collect()
}

impl<T: Real> GradientTape<T> {
    /// Runs `masks.len()` steps from `initial`, recording what the reverse
    /// sweep needs. Fails with the step index if a state turns non-finite.
    pub fn record(
        weights: &ModelWeights<T>,
        op: &PerceptionOperator<T>,
        condition: &ConditionField<T>,
        initial: &CellStateBuffer<T>,
        masks: &[Vec<bool>],
    ) -> Result<(Self, CellStateBuffer<T>)> {
        let n = initial.cells();
        if condition.values.dim() != (n, weights.config.condition_dim) {
            return Err(Error::Shape(format!(
                "condition is {:?}, expected ({n}, {})",
                condition.values.dim(),
                weights.config.condition_dim
            )));
        }
        if initial.channels() != weights.config.channels {
            return Err(Error::Shape(format!(
                "state has {} channels, model expects {}",
                initial.channels(),
                weights.config.channels
            )));
        }
        let mut state = initial.clone();
        let mut steps = Vec::with_capacity(masks.len());
        for (t, mask) in masks.iter().enumerate() {
            if mask.len() != n {
                return Err(Error::Shape(format!("mask {t} has {} entries for {n} cells", mask.len())));
            }
            let z = op.apply(state.values.view())?;
            let rows: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            let inputs = gather_inputs(state.values.view(), z.values.view(), condition.values.view(), &rows);
            let out = mlp_forward(weights, inputs.view());
            for (r, &i) in rows.iter().enumerate() {
                let mut row = state.values.row_mut(i);
                row += &out.update.row(r);
            }
            state.step_counter += 1;
            if out.update.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: t });
            }
            steps.push(TapeStep { rows, inputs, pre: out.pre });
        }
        Ok((GradientTape { steps, cells: n }, state))
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Reverse sweep. `grad_final` is the loss gradient with respect to the
    /// final states; returns the parameter gradients and the gradient with
    /// respect to the initial states.
    pub fn backward(
        self,
        weights: &ModelWeights<T>,
        op: &PerceptionOperator<T>,
        grad_final: Array2<T>,
    ) -> (ModelWeights<T>, Array2<T>) {
        let cfg = weights.config;
        let (c, p) = (cfg.channels, cfg.perception_dim());
        let mut grads = ModelWeights::zeros(cfg);
        let mut g = grad_final;
        let mut dz = Array2::zeros((self.cells, p));
        for step in self.steps.into_iter().rev() {
            let du = g.select(Axis(0), &step.rows);
            let hidden = step.pre.mapv(|v| v.max(T::zero()));
            grads.w2 += &du.t().dot(&hidden);
            grads.b2 += &du.sum_axis(Axis(0));
            let mut da = du.dot(&weights.w2);
            da.zip_mut_with(&step.pre, |d, &a| {
                if a <= T::zero() {
                    *d = T::zero();
                }
            });
            grads.w1 += &da.t().dot(&step.inputs);
            grads.b1 += &da.sum_axis(Axis(0));
            let dx = da.dot(&weights.w1);

            dz.fill(T::zero());
            for (r, &i) in step.rows.iter().enumerate() {
                let mut gi = g.row_mut(i);
                gi += &dx.slice(s![r, ..c]);
                dz.row_mut(i).assign(&dx.slice(s![r, c..c + p]));
            }
            g += &op.apply_adjoint(dz.view(), c);
        }
        (grads, g)
    }
}

fn display_attrs<T: Real>(states: ArrayView2<T>, map: &[usize]) -> Array2<T> {
    let half = T::of(0.5);
    Array2::from_shape_fn((states.nrows(), map.len()), |(i, a)| (states[[i, map[a]]] + T::one()) * half)
}

/// Data term on final states and its gradient with respect to them.
pub fn data_loss<T: Real>(
    states: ArrayView2<T>,
    target: &TargetField<T>,
    kind: LossKind,
) -> Result<(T, Array2<T>)> {
    target.check(states.nrows(), states.ncols())?;
    let attrs = display_attrs(states, &target.channel_map);
    let half = T::of(0.5);
    let (value, dattrs) = match kind {
        LossKind::DirectMse => {
            let diff = &attrs - &target.values;
            let count = T::of(diff.len() as f64);
            let value = diff.iter().map(|&d| d * d).sum::<T>() / count;
            (value, diff.mapv(|d| d * T::of(2.0) / count))
        }
        LossKind::SetOt => {
            let rgb = target.channel_map.len() == 3;
            let a = FeatureSet::new(attrs, rgb)?;
            let b = FeatureSet::new(target.values.clone(), rgb)?;
            let (w, gw) = l_w_grad(&a, &b)?;
            let (m, gm) = l_m_grad(&a, &b)?;
            (w + m, gw + gm)
        }
    };
    let mut grad = Array2::zeros(states.raw_dim());
    for (a, &ch) in target.channel_map.iter().enumerate() {
        grad.column_mut(ch).assign(&(&dattrs.column(a) * half));
    }
    Ok((value, grad))
}

/// Loss of a `masks.len()`-step rollout and its exact gradient with respect to
/// the weights: data term plus `overflow_weight * overflow_loss` on the final
/// states.
#[allow(clippy::too_many_arguments)]
pub fn forward_backward<T: Real>(
    weights: &ModelWeights<T>,
    op: &PerceptionOperator<T>,
    condition: &ConditionField<T>,
    initial: &CellStateBuffer<T>,
    masks: &[Vec<bool>],
    target: &TargetField<T>,
    kind: LossKind,
    overflow_weight: T,
) -> Result<ForwardBackward<T>> {
    let (tape, final_states) = GradientTape::record(weights, op, condition, initial, masks)?;
    let (data, mut g) = data_loss(final_states.values.view(), target, kind)?;
    let loss = data + overflow_weight * overflow_loss(final_states.values.view());
    if !loss.is_finite() {
        return Err(Error::NonFinite { step: masks.len() });
    }
    g += &overflow_grad(final_states.values.view(), overflow_weight);
    let (grads, _) = tape.backward(weights, op, g);
    Ok(ForwardBackward {
        loss,
        data_loss: data,
        grads,
        final_states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Layout, ModelConfig, UpdateMaskScheme};
    use crate::mesh::{generate_icosphere, AdjacencyGraph};
    use crate::sh::ShBasisConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Instance {
        weights: ModelWeights<f64>,
        op: PerceptionOperator<f64>,
        cond: ConditionField<f64>,
        initial: CellStateBuffer<f64>,
        masks: Vec<Vec<bool>>,
        target: TargetField<f64>,
    }

    fn instance(seed: u64, channels: usize, hidden: usize, cond: usize, degree: u8, k: usize) -> Instance {
        let mesh = generate_icosphere::<f64>(0).unwrap();
        let graph = AdjacencyGraph::from_mesh(&mesh);
        let cfg = ModelConfig {
            channels,
            hidden,
            condition_dim: cond,
            sh: ShBasisConfig::new(degree).unwrap(),
            layout: Layout::ColorGeo,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = ModelWeights::zeros(cfg);
        weights.params_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
        let op = PerceptionOperator::new(&mesh, &graph, cfg.sh, rng.gen_range(-1.0..1.0)).unwrap();
        let n = mesh.vertex_count();
        let mut r = |shape: (usize, usize), a: f64| Array2::from_shape_fn(shape, |_| rng.gen_range(-a..a));
        let cond = ConditionField { values: r((n, cond), 1.0) };
        let initial = CellStateBuffer { values: r((n, channels), 0.3), step_counter: 0 };
        let target = TargetField::new(r((n, channels.min(3)), 0.5).mapv(|v| v + 0.5), (0..channels.min(3)).collect()).unwrap();
        let sampler = MaskSampler::new(UpdateMaskScheme::Bernoulli, n);
        let masks = draw_masks(&sampler, &mut rng, k);
        Instance { weights, op, cond, initial, masks, target }
    }

    fn loss_of(inst: &Instance, w: &ModelWeights<f64>, kind: LossKind, overflow: f64) -> f64 {
        let (_, fin) = GradientTape::record(w, &inst.op, &inst.cond, &inst.initial, &inst.masks).unwrap();
        data_loss(fin.values.view(), &inst.target, kind).unwrap().0 + overflow * overflow_loss(fin.values.view())
    }

    /// Central differences over every parameter.
    fn check_gradients(inst: &Instance, kind: LossKind, overflow: f64) -> f64 {
        let fb = forward_backward(&inst.weights, &inst.op, &inst.cond, &inst.initial, &inst.masks, &inst.target, kind, overflow).unwrap();
        let analytic: Vec<f64> = fb.grads.params().collect();
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for k in 0..analytic.len() {
            let mut plus = inst.weights.clone();
            *plus.params_mut().nth(k).unwrap() += eps;
            let mut minus = inst.weights.clone();
            *minus.params_mut().nth(k).unwrap() -= eps;
            let fd = (loss_of(inst, &plus, kind, overflow) - loss_of(inst, &minus, kind, overflow)) / (2.0 * eps);
            let rel = (fd - analytic[k]).abs() / (fd.abs().max(analytic[k].abs()).max(1e-6));
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (seed, c, h, d, deg, k) in [(1, 2, 4, 0, 1, 2), (2, 3, 5, 1, 2, 3), (3, 2, 6, 0, 0, 4)] {
            let inst = instance(seed, c, h, d, deg, k);
            let worst = check_gradients(&inst, LossKind::DirectMse, 0.0);
            assert!(worst < 1e-3, "instance {seed}: rel err {worst}");
        }
    }

    #[test]
    fn overflow_and_set_loss_gradients() {
        let mut inst = instance(7, 3, 4, 0, 1, 2);
        inst.initial.values.mapv_inplace(|v| v * 5.0);
        assert!(inst.initial.values.iter().any(|v| v.abs() > 1.0));
        assert!(check_gradients(&inst, LossKind::DirectMse, 3.0) < 1e-3);
        let inst = instance(8, 3, 4, 0, 1, 2);
        assert!(check_gradients(&inst, LossKind::SetOt, 0.0) < 1e-3);
    }

    #[test]
    fn zero_model_zero_target() {
        let mut inst = instance(4, 2, 4, 0, 1, 3);
        inst.weights.params_mut().for_each(|v| *v = 0.0);
        inst.initial = CellStateBuffer::seed(12, 2);
        inst.target.values.fill(0.5);
        let fb = forward_backward(&inst.weights, &inst.op, &inst.cond, &inst.initial, &inst.masks, &inst.target, LossKind::DirectMse, 10_000.0).unwrap();
        assert_eq!(fb.loss, 0.0);
        assert!(fb.grads.params().all(|g| g == 0.0));
    }

    #[test]
    fn unmasked_final_step_has_no_residual_gradient() {
        let mut inst = instance(5, 2, 4, 0, 1, 1);
        inst.masks = vec![vec![false; 12]];
        let fb = forward_backward(&inst.weights, &inst.op, &inst.cond, &inst.initial, &inst.masks, &inst.target, LossKind::DirectMse, 0.0).unwrap();
        assert!(fb.grads.params().all(|g| g == 0.0));
        assert_eq!(fb.final_states.values, inst.initial.values);
    }

    #[test]
    fn non_finite_is_reported() {
        let mut inst = instance(6, 2, 4, 0, 1, 3);
        inst.weights.b2[0] = f64::INFINITY;
        let err = forward_backward(&inst.weights, &inst.op, &inst.cond, &inst.initial, &inst.masks, &inst.target, LossKind::DirectMse, 0.0);
        assert!(matches!(err, Err(Error::NonFinite { step: 0 })));
    }
}
