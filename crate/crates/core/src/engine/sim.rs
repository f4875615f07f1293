use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adapt::{check_dims, gather_inputs, masked_rows, mlp_forward};
use super::mask::{MaskSampler, UpdateMaskScheme};
use super::model::{check_compatibility, ModelWeights};
use super::state::{CellStateBuffer, ConditionField};
use crate::mesh::{AdjacencyGraph, Mesh};
use crate::perception::PerceptionOperator;
use crate::{Error, Real, Result};

/// Per-vertex blend weight toward a second model: the applied update is
/// `alpha * u_graft + (1 - alpha) * u_base`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraftField<T> {
    pub alpha: Vec<T>,
    pub model: ModelWeights<T>,
}

impl<T: Real> GraftField<T> {
    pub fn new(model: ModelWeights<T>, cells: usize) -> Self {
        Self::uniform(model, cells, T::zero())
    }

    pub fn uniform(model: ModelWeights<T>, cells: usize, alpha: T) -> Self {
        GraftField {
            alpha: vec![alpha; cells],
            model,
        }
    }
}

/// One running automaton: it owns the substrate, the rule, the state and
/// the random stream. Everything that changes the trajectory goes through
/// its methods, called between steps.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    mesh: Mesh<T>,
    graph: AdjacencyGraph,
    perception: PerceptionOperator<T>,
    weights: ModelWeights<T>,
    graft: Option<GraftField<T>>,
    condition: ConditionField<T>,
    sampler: MaskSampler,
    rng: ChaCha8Rng,
    state: CellStateBuffer<T>,
    mask: Vec<bool>,
}

impl<T: Real> Simulation<T> {
    pub fn new(mesh: Mesh<T>, weights: ModelWeights<T>, scheme: UpdateMaskScheme, seed: u64) -> Result<Self> {
        let graph = AdjacencyGraph::from_mesh(&mesh);
        Self::with_graph(mesh, graph, weights, scheme, seed)
    }

    pub fn with_graph(
        mesh: Mesh<T>,
        graph: AdjacencyGraph,
        weights: ModelWeights<T>,
        scheme: UpdateMaskScheme,
        seed: u64,
    ) -> Result<Self> {
        weights.validate()?;
        let n = mesh.vertex_count();
        if weights.config.condition_dim != 0 {
            log::info!("model expects a {}-d condition; starting with zeros", weights.config.condition_dim);
        }
        let perception = PerceptionOperator::new(&mesh, &graph, weights.config.sh, T::zero())?;
        Ok(Simulation {
            condition: ConditionField {
                values: Array2::zeros((n, weights.config.condition_dim)),
            },
            state: CellStateBuffer::seed(n, weights.config.channels),
            sampler: MaskSampler::new(scheme, n),
            rng: ChaCha8Rng::seed_from_u64(seed),
            mask: Vec::with_capacity(n),
            mesh,
            graph,
            perception,
            weights,
            graft: None,
        })
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn graph(&self) -> &AdjacencyGraph {
        &self.graph
    }

    pub fn weights(&self) -> &ModelWeights<T> {
        &self.weights
    }

    pub fn state(&self) -> &CellStateBuffer<T> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut CellStateBuffer<T> {
        &mut self.state
    }

    pub fn graft(&self) -> Option<&GraftField<T>> {
        self.graft.as_ref()
    }

    pub fn graft_mut(&mut self) -> Option<&mut GraftField<T>> {
        self.graft.as_mut()
    }

    pub fn condition(&self) -> &ConditionField<T> {
        &self.condition
    }

    pub fn orientation(&self) -> T {
        self.perception.orientation()
    }

    pub fn mask_scheme(&self) -> UpdateMaskScheme {
        self.sampler.scheme()
    }

    /// Mask used by the most recent step.
    pub fn last_mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn perception(&self) -> &PerceptionOperator<T> {
        &self.perception
    }

    pub fn set_state(&mut self, state: CellStateBuffer<T>) -> Result<()> {
        if state.values.dim() != self.state.values.dim() {
            return Err(Error::Shape(format!(
                "state is {:?}, simulation needs {:?}",
                state.values.dim(),
                self.state.values.dim()
            )));
        }
        self.state = state;
        Ok(())
    }

    /// Back to the seed state. The random stream keeps running.
    pub fn reset(&mut self) {
        self.state = CellStateBuffer::seed(self.mesh.vertex_count(), self.weights.config.channels);
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn set_orientation(&mut self, angle: T) -> Result<()> {
        if !angle.is_finite() {
            return Err(Error::InvalidArgument("orientation must be finite".into()));
        }
        if angle != self.perception.orientation() {
            self.perception = PerceptionOperator::new(&self.mesh, &self.graph, self.weights.config.sh, angle)?;
        }
        Ok(())
    }

    pub fn set_condition(&mut self, condition: ConditionField<T>) -> Result<()> {
        let want = (self.mesh.vertex_count(), self.weights.config.condition_dim);
        if condition.values.dim() != want {
            return Err(Error::Shape(format!("condition is {:?}, expected {want:?}", condition.values.dim())));
        }
        self.condition = condition;
        Ok(())
    }

    /// Swaps the rule. A different channel count resets the state; a graft
    /// model whose config no longer matches is dropped.
    pub fn set_weights(&mut self, weights: ModelWeights<T>) -> Result<()> {
        weights.validate()?;
        let old = self.weights.config;
        if weights.config.sh != old.sh {
            self.perception = PerceptionOperator::new(
                &self.mesh,
                &self.graph,
                weights.config.sh,
                self.perception.orientation(),
            )?;
        }
        if weights.config.condition_dim != old.condition_dim {
            self.condition = ConditionField {
                values: Array2::zeros((self.mesh.vertex_count(), weights.config.condition_dim)),
            };
        }
        self.weights = weights;
        if self.weights.config.channels != old.channels {
            self.reset();
        }
        if self.graft.as_ref().is_some_and(|g| g.model.config != self.weights.config) {
            log::warn!("dropping graft model with a different configuration");
            self.graft = None;
        }
        Ok(())
    }

    /// Installs or clears the graft. Configs must match; unrelated lineages
    /// are accepted with a warning.
    pub fn set_graft(&mut self, graft: Option<GraftField<T>>) -> Result<()> {
        if let Some(g) = &graft {
            g.model.validate()?;
            if g.model.config != self.weights.config {
                return Err(Error::Incompatible(format!(
                    "graft model config {:?} differs from {:?}",
                    g.model.config, self.weights.config
                )));
            }
            if g.alpha.len() != self.mesh.vertex_count() {
                return Err(Error::Shape(format!(
                    "graft field has {} weights for {} vertices",
                    g.alpha.len(),
                    self.mesh.vertex_count()
                )));
            }
            if g.alpha.iter().any(|&a| !(a >= T::zero() && a <= T::one())) {
                return Err(Error::InvalidArgument("graft weights must lie in [0, 1]".into()));
            }
            if !check_compatibility(&self.weights, &g.model).compatible {
                log::warn!(
                    "grafting models without a common ancestor ({} and {})",
                    self.weights.lineage_id,
                    g.model.lineage_id
                );
            }
        }
        self.graft = graft;
        Ok(())
    }

    /// Perceive, then add the masked residual update.
    pub fn step(&mut self) -> Result<()> {
        let n = self.mesh.vertex_count();
        self.sampler.sample(&mut self.rng, &mut self.mask);
        let z = self.perception.apply(self.state.values.view())?;
        check_dims(&self.weights, n, self.state.channels(), z.values.view(), self.condition.values.view())?;

        let rows = masked_rows(&self.mask);
        let x = gather_inputs(self.state.values.view(), z.values.view(), self.condition.values.view(), &rows);
        let base = mlp_forward(&self.weights, x.view()).update;
        match &self.graft {
            None => {
                for (r, &i) in rows.iter().enumerate() {
                    let mut row = self.state.values.row_mut(i);
                    row += &base.row(r);
                }
            }
            Some(g) => {
                let other = mlp_forward(&g.model, x.view()).update;
                for (r, &i) in rows.iter().enumerate() {
                    let a = g.alpha[i];
                    let mut row = self.state.values.row_mut(i);
                    if a == T::zero() {
                        row += &base.row(r);
                    } else if a == T::one() {
                        row += &other.row(r);
                    } else {
                        let b = T::one() - a;
                        row.iter_mut()
                            .zip(base.row(r))
                            .zip(other.row(r))
                            .for_each(|((s, &us), &ut)| *s += a * ut + b * us);
                    }
                }
            }
        }
        self.state.step_counter += 1;
        Ok(())
    }

    pub fn run(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}
