use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::Adam;
use super::config::TrainConfig;
use super::tape::{data_loss, draw_masks, forward_backward, ForwardBackward};
use super::target::TargetField;
use crate::engine::{
    init_weights, lineage_uuid, to_display, CellStateBuffer, ConditionField, InitScheme, MaskSampler, ModelConfig,
    ModelWeights, Simulation, UpdateMaskScheme,
};
use crate::io::save_weights;
use crate::mesh::{AdjacencyGraph, Mesh};
use crate::perception::PerceptionOperator;
use crate::{Error, Real, Result};

const DIVERGENCE_LOSS: f64 = 1e6;
const DIVERGENCE_EPOCHS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
    pub k_steps: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput<T> {
    pub weights: ModelWeights<T>,
    pub history: Vec<HistoryRow>,
    pub pool: Vec<CellStateBuffer<T>>,
}

/// Pool-based training from the seed state. With `init_from` the run starts
/// from a copy of the parent and records it in the lineage.
pub fn train<T: Real>(
    mesh: &Mesh<T>,
    graph: &AdjacencyGraph,
    target: &TargetField<T>,
    model: ModelConfig,
    init_from: Option<&ModelWeights<T>>,
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    config.validate()?;
    model.validate()?;
    let n = mesh.vertex_count();
    target.check(n, model.channels)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut weights = match init_from {
        Some(parent) => init_weights(model, InitScheme::FromParent(parent))?,
        None => init_weights(model, InitScheme::Random { seed: rng.gen() })?,
    };
    weights.lineage_id = lineage_uuid(&mut rng);

    let op = PerceptionOperator::new(mesh, graph, model.sh, T::of(config.orientation))?;
    let condition = ConditionField {
        values: Array2::zeros((n, model.condition_dim)),
    };
    let sampler = MaskSampler::new(config.mask_scheme, n);
    let seed_state = CellStateBuffer::seed(n, model.channels);
    let mut pool = vec![seed_state.clone(); config.pool_size];
    let mut adam = Adam::new(model.param_count());
    let overflow = T::of(config.overflow_weight);
    let mut history = Vec::with_capacity(config.epochs);
    let mut bad_epochs = 0;

    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        let batch = sample(&mut rng, config.pool_size, config.batch_size).into_vec();
        let k = rng.gen_range(config.step_range.0..=config.step_range.1);

        if config.seed_inject_every > 0 && epoch % config.seed_inject_every == 0 {
            let mut worst = (0, T::neg_infinity());
            for (b, &i) in batch.iter().enumerate() {
                let (l, _) = data_loss(pool[i].values.view(), target, config.loss)?;
                if l > worst.1 {
                    worst = (b, l);
                }
            }
            pool[batch[worst.0]] = seed_state.clone();
        }

        let seeds: Vec<u64> = batch.iter().map(|_| rng.gen()).collect();
        let results: Vec<Result<ForwardBackward<T>>> = batch
            .par_iter()
            .zip(&seeds)
            .map(|(&i, &s)| {
                let masks = draw_masks(&sampler, &mut ChaCha8Rng::seed_from_u64(s), k);
                forward_backward(&weights, &op, &condition, &pool[i], &masks, target, config.loss, overflow)
            })
            .collect();

        let mut outs = Vec::with_capacity(results.len());
        let mut finite = true;
        for r in results {
            match r {
                Ok(fb) => outs.push(fb),
                Err(Error::NonFinite { .. }) => finite = false,
                Err(e) => return Err(e),
            }
        }
        let loss = if finite {
            outs.iter().map(|o| o.loss.as_f64()).sum::<f64>() / outs.len() as f64
        } else {
            f64::NAN
        };
        history.push(HistoryRow { epoch, loss, lr, k_steps: k });

        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            bad_epochs += 1;
            if bad_epochs >= DIVERGENCE_EPOCHS {
                return Err(Error::Diverged { epoch, loss });
            }
        } else {
            bad_epochs = 0;
        }
        if !finite {
            continue;
        }

        let mut grads = ModelWeights::zeros(model);
        let scale = T::one() / T::of(outs.len() as f64);
        for o in &outs {
            grads.params_mut().zip(o.grads.params()).for_each(|(g, v)| *g += v * scale);
        }
        if config.normalize_grads {
            normalize(&mut grads);
        }
        adam.step(&mut weights, &grads, lr);
        for (o, &i) in outs.into_iter().zip(&batch) {
            pool[i] = o.final_states;
        }

        if epoch % 100 == 0 {
            log::info!("epoch {epoch} loss {loss:.6} lr {lr:.2e} k {k}");
        }
        if let Some(dir) = &config.checkpoint_dir {
            if config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0 {
                save_weights(dir.join(format!("checkpoint_{:05}.json", epoch + 1)), &weights)?;
            }
        }
    }
    Ok(TrainOutput { weights, history, pool })
}

fn normalize<T: Real>(g: &mut ModelWeights<T>) {
    fn unit<T: Real, D: ndarray::Dimension>(a: &mut ndarray::Array<T, D>) {
        let norm = a.iter().map(|&v| v * v).sum::<T>().sqrt() + T::of(1e-8);
        a.mapv_inplace(|v| v / norm);
    }
    unit(&mut g.w1);
    unit(&mut g.b1);
    unit(&mut g.w2);
    unit(&mut g.b2);
}

pub fn write_history_csv(mut w: impl Write, history: &[HistoryRow]) -> Result<()> {
    writeln!(w, "epoch,loss,lr,k_steps")?;
    for r in history {
        writeln!(w, "{},{},{},{}", r.epoch, r.loss, r.lr, r.k_steps)?;
    }
    Ok(())
}

impl HistoryRow {
    pub fn save_csv(path: impl AsRef<Path>, history: &[HistoryRow]) -> Result<()> {
        write_history_csv(std::io::BufWriter::new(std::fs::File::create(path)?), history)
    }
}

/// Runs the model from the seed for `steps` steps and returns the RMS error
/// of the displayed (clamped) target channels.
pub fn synthesis_rms<T: Real>(
    weights: &ModelWeights<T>,
    mesh: &Mesh<T>,
    target: &TargetField<T>,
    steps: usize,
    scheme: UpdateMaskScheme,
    seed: u64,
) -> Result<f64> {
    target.check(mesh.vertex_count(), weights.config.channels)?;
    let mut sim = Simulation::new(mesh.clone(), weights.clone(), scheme, seed)?;
    sim.run(steps)?;
    let s = &sim.state().values;
    let mut sum = 0.0;
    for ((i, a), &t) in target.values.indexed_iter() {
        let d = to_display(s[[i, target.channel_map[a]]]).as_f64() - t.as_f64();
        sum += d * d;
    }
    Ok((sum / target.values.len() as f64).sqrt())
}
