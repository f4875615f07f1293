//! One client's simulation and the command handlers that drive it.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, ensure, Context};
use serde::Deserialize;
use serde_json::{json, Value};

use meshnca::engine::{
    apply_brush, brush_selection, extract_color_geo, extract_pbr, init_weights, BrushTarget, Camera, GraftField,
    InitScheme, Layout, ModelConfig, ModelWeights, Simulation, UpdateMaskScheme, DEFAULT_GRAFT_DELTA,
};
use meshnca::io::Registry;
use meshnca::mesh::{generate_icosphere, load_obj, Mesh, MAX_ICOSPHERE_LEVEL};

use crate::protocol::{Command, FrameMessage, ModelInfo, Reply, COMMANDS};

pub const ICOSPHERE: &str = "icosphere";

/// Immutable data shared by every session of a server.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub models: Registry<f32>,
    /// Named OBJ meshes besides the built-in icosphere.
    pub meshes: BTreeMap<String, PathBuf>,
    pub default_level: u32,
    pub seed: u64,
    pub mask_scheme: UpdateMaskScheme,
}

impl Catalog {
    /// A catalog with a single zero-output model, for running without a
    /// registry file.
    pub fn with_default_model(seed: u64) -> Self {
        let mut w: ModelWeights<f32> =
            init_weights(ModelConfig::default(), InitScheme::Random { seed }).expect("default config is valid");
        w.name = "default".into();
        Catalog {
            models: Registry { models: vec![w] },
            meshes: BTreeMap::new(),
            default_level: 5,
            seed,
            mask_scheme: UpdateMaskScheme::Bernoulli,
        }
    }

    pub fn model_infos(&self) -> Vec<ModelInfo> {
        self.models
            .models
            .iter()
            .map(|m| ModelInfo {
                name: m.name.clone(),
                lineage_id: m.lineage_id.clone(),
                parent_id: m.parent_id.clone(),
                layout: m.config.layout.name().into(),
                channels: m.config.channels,
            })
            .collect()
    }

    pub fn mesh_names(&self) -> Vec<String> {
        std::iter::once(ICOSPHERE.to_string()).chain(self.meshes.keys().cloned()).collect()
    }

    fn model(&self, name: &str) -> anyhow::Result<&ModelWeights<f32>> {
        self.models.get(name).ok_or_else(|| anyhow!("unknown model {name:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisMode {
    /// Every map of the model's layout.
    Maps,
    Albedo,
    Normal,
    Height,
    Roughness,
    Ao,
    /// All state channels, unmapped.
    Raw,
    /// Graft weights.
    Graft,
}

/// What the session wants sent after handling a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRequest {
    None,
    /// May be superseded by a newer frame.
    Latest,
    /// Must be delivered.
    Reliable,
}

pub struct Session {
    catalog: Arc<Catalog>,
    sim: Simulation<f32>,
    mesh_name: String,
    level: u32,
    model_name: String,
    graft_name: Option<String>,
    orientation: f64,
    speed: f64,
    paused: bool,
    vis: VisMode,
    frame_request: FrameRequest,
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value) -> anyhow::Result<T> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).context("invalid params")
}

#[derive(Deserialize)]
struct NameParams {
    name: Option<String>,
    #[serde(default)]
    alpha: f32,
}

#[derive(Deserialize)]
struct BrushParams {
    mode: String,
    click: [f64; 2],
    radius: f64,
    camera: Option<Vec<f64>>,
    delta: Option<f64>,
}

#[derive(Deserialize)]
struct QueryParams {
    rows: Option<Vec<usize>>,
}

impl Session {
    pub fn new(catalog: Arc<Catalog>) -> anyhow::Result<Self> {
        let first = catalog.models.models.first().context("registry has no models")?;
        let model_name = first.name.clone();
        let level = catalog.default_level;
        let mesh = generate_icosphere::<f32>(level)?;
        let sim = Simulation::new(mesh, first.clone(), catalog.mask_scheme, catalog.seed)?;
        Ok(Session {
            catalog,
            sim,
            mesh_name: ICOSPHERE.into(),
            level,
            model_name,
            graft_name: None,
            orientation: 0.0,
            speed: 30.0,
            paused: true,
            vis: VisMode::Maps,
            frame_request: FrameRequest::Latest,
        })
    }

    pub fn hello(&self) -> Reply {
        Reply::Hello {
            models: self.catalog.model_infos(),
            meshes: self.catalog.mesh_names(),
        }
    }

    pub fn simulation(&self) -> &Simulation<f32> {
        &self.sim
    }

    pub fn playing(&self) -> bool {
        !self.paused
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn take_frame_request(&mut self) -> FrameRequest {
        std::mem::replace(&mut self.frame_request, FrameRequest::None)
    }

    pub fn step(&mut self) -> meshnca::Result<()> {
        self.sim.step()
    }

    /// Parses and handles one text frame.
    pub fn handle_text(&mut self, text: &str) -> Reply {
        match serde_json::from_str::<Command>(text) {
            Ok(cmd) => self.handle(cmd),
            Err(e) => {
                let id = serde_json::from_str::<Value>(text)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(Value::Null);
                Reply::Error { id, message: format!("malformed command: {e}") }
            }
        }
    }

    pub fn handle(&mut self, cmd: Command) -> Reply {
        match self.dispatch(&cmd) {
            Ok(result) => Reply::Ack { id: cmd.id, cmd: cmd.cmd, result },
            Err(e) => Reply::Error { id: cmd.id, message: format!("{}: {e:#}", cmd.cmd) },
        }
    }

    fn dispatch(&mut self, cmd: &Command) -> anyhow::Result<Value> {
        let p = &cmd.params;
        match cmd.cmd.as_str() {
            "hello" => Ok(serde_json::to_value(self.hello())?),
            "set_model" => {
                let name: NameParams = params(p)?;
                let name = name.name.context("missing name")?;
                let w = self.catalog.model(&name)?.clone();
                self.sim.set_weights(w)?;
                if self.sim.graft().is_none() {
                    self.graft_name = None;
                }
                self.model_name = name;
                self.frame_request = FrameRequest::Latest;
                Ok(json!({ "model": self.model_name, "step_counter": self.sim.state().step_counter }))
            }
            "set_graft_model" => {
                let np: NameParams = params(p)?;
                match np.name {
                    None => {
                        self.sim.set_graft(None)?;
                        self.graft_name = None;
                        Ok(json!({ "graft": null }))
                    }
                    Some(name) => {
                        ensure!((0.0..=1.0).contains(&np.alpha), "alpha must lie in [0, 1]");
                        let model = self.catalog.model(&name)?.clone();
                        let compatible = meshnca::engine::check_compatibility(self.sim.weights(), &model).compatible;
                        let n = self.sim.mesh().vertex_count();
                        self.sim.set_graft(Some(GraftField::uniform(model, n, np.alpha)))?;
                        self.graft_name = Some(name.clone());
                        Ok(json!({ "graft": name, "compatible": compatible }))
                    }
                }
            }
            "set_mesh" => {
                let np: NameParams = params(p)?;
                let name = np.name.context("missing name")?;
                let mesh = self.load_mesh(&name, self.level)?;
                self.rebuild(mesh)?;
                self.mesh_name = name;
                Ok(json!({ "mesh": self.mesh_name, "vertices": self.sim.mesh().vertex_count() }))
            }
            "set_subdivision" => {
                #[derive(Deserialize)]
                struct P {
                    level: u32,
                }
                let P { level } = params(p)?;
                ensure!(self.mesh_name == ICOSPHERE, "subdivision applies to the icosphere only");
                ensure!(level <= MAX_ICOSPHERE_LEVEL, "level must be at most {MAX_ICOSPHERE_LEVEL}");
                let mesh = self.load_mesh(ICOSPHERE, level)?;
                self.rebuild(mesh)?;
                self.level = level;
                Ok(json!({ "level": level, "vertices": self.sim.mesh().vertex_count() }))
            }
            "play" => {
                self.paused = false;
                Ok(json!({ "playing": true }))
            }
            "pause" => {
                self.paused = true;
                Ok(json!({ "playing": false }))
            }
            "reset" => {
                self.sim.reset();
                self.frame_request = FrameRequest::Latest;
                Ok(json!({ "step_counter": 0 }))
            }
            "set_speed" => {
                #[derive(Deserialize)]
                struct P {
                    steps_per_sec: f64,
                }
                let P { steps_per_sec } = params(p)?;
                ensure!(steps_per_sec.is_finite() && steps_per_sec > 0.0, "steps_per_sec must be positive");
                self.speed = steps_per_sec;
                Ok(json!({ "steps_per_sec": steps_per_sec }))
            }
            "set_orientation" => {
                #[derive(Deserialize)]
                struct P {
                    radians: f64,
                }
                let P { radians } = params(p)?;
                self.sim.set_orientation(radians as f32)?;
                self.orientation = radians;
                Ok(json!({ "radians": radians }))
            }
            "set_vis_mode" => {
                #[derive(Deserialize)]
                struct P {
                    mode: VisMode,
                }
                let P { mode } = params(p)?;
                let pbr_only = matches!(mode, VisMode::Normal | VisMode::Height | VisMode::Roughness | VisMode::Ao);
                ensure!(
                    !pbr_only || self.sim.weights().config.layout == Layout::Pbr,
                    "mode needs a PBR model"
                );
                self.vis = mode;
                self.frame_request = FrameRequest::Latest;
                Ok(json!({ "channels": self.vis_channels() }))
            }
            "brush" => self.brush(params(p)?),
            "query_state" => self.query(params(p)?),
            "screenshot_request" => {
                self.frame_request = FrameRequest::Reliable;
                Ok(json!({ "step_counter": self.sim.state().step_counter, "render": "client" }))
            }
            other if COMMANDS.contains(&other) => bail!("not handled"),
            other => bail!("unknown command {other:?}"),
        }
    }

    fn load_mesh(&self, name: &str, level: u32) -> anyhow::Result<Mesh<f32>> {
        if name == ICOSPHERE {
            return Ok(generate_icosphere(level)?);
        }
        let path = self.catalog.meshes.get(name).ok_or_else(|| anyhow!("unknown mesh {name:?}"))?;
        Ok(load_obj(path)?)
    }

    fn rebuild(&mut self, mesh: Mesh<f32>) -> anyhow::Result<()> {
        let mut sim = Simulation::new(mesh, self.sim.weights().clone(), self.catalog.mask_scheme, self.catalog.seed)?;
        sim.set_orientation(self.orientation as f32)?;
        if let Some(g) = self.sim.graft() {
            let n = sim.mesh().vertex_count();
            sim.set_graft(Some(GraftField::new(g.model.clone(), n)))?;
        }
        self.sim = sim;
        self.frame_request = FrameRequest::Latest;
        Ok(())
    }

    fn brush(&mut self, bp: BrushParams) -> anyhow::Result<Value> {
        let camera = match &bp.camera {
            Some(m) => Camera::from_slice(m)?,
            None => Camera::identity(),
        };
        let vertices = brush_selection(self.sim.mesh(), &camera, bp.click, bp.radius);
        let mesh = self.sim.mesh().clone();
        let affected = match bp.mode.as_str() {
            "regenerate" => apply_brush(BrushTarget::States(self.sim.state_mut()), &mesh, &camera, bp.click, bp.radius)?,
            "graft" => {
                let delta = bp.delta.unwrap_or(DEFAULT_GRAFT_DELTA);
                let field = self.sim.graft_mut().context("no graft model loaded")?;
                apply_brush(BrushTarget::Graft(field, delta), &mesh, &camera, bp.click, bp.radius)?
            }
            other => bail!("unknown brush mode {other:?}"),
        };
        self.frame_request = FrameRequest::Latest;
        Ok(json!({ "affected": affected, "vertices": vertices }))
    }

    fn query(&self, q: QueryParams) -> anyhow::Result<Value> {
        let s = self.sim.state();
        let mut out = json!({
            "step_counter": s.step_counter,
            "cells": s.cells(),
            "channels": s.channels(),
            "finite": s.is_finite(),
            "model": self.model_name,
            "graft": self.graft_name,
            "mesh": self.mesh_name,
            "playing": !self.paused,
            "steps_per_sec": self.speed,
            "orientation": self.orientation,
        });
        if let Some(rows) = q.rows {
            let mut values = Vec::with_capacity(rows.len());
            for i in rows {
                ensure!(i < s.cells(), "row {i} out of range");
                values.push(s.values.row(i).to_vec());
            }
            out["rows"] = json!(values);
        }
        Ok(out)
    }

    fn vis_channels(&self) -> usize {
        let cfg = self.sim.weights().config;
        match self.vis {
            VisMode::Maps => match cfg.layout {
                Layout::Pbr => 9,
                Layout::ColorGeo => 4,
            },
            VisMode::Albedo | VisMode::Normal => 3,
            VisMode::Height | VisMode::Roughness | VisMode::Ao | VisMode::Graft => 1,
            VisMode::Raw => cfg.channels,
        }
    }

    /// Output for the current vis mode, `N x channel_count` row-major.
    pub fn frame(&self, steps_per_sec: f32) -> FrameMessage {
        let state = self.sim.state();
        let n = state.cells();
        let layout = self.sim.weights().config.layout;
        let mut payload = Vec::with_capacity(n * self.vis_channels());
        match (self.vis, layout) {
            (VisMode::Raw, _) => payload.extend(state.values.iter().copied()),
            (VisMode::Graft, _) => match self.sim.graft() {
                Some(g) => payload.extend_from_slice(&g.alpha),
                None => payload.resize(n, 0.0),
            },
            (_, Layout::ColorGeo) => {
                let maps = extract_color_geo(state, layout, self.sim.mesh(), 0.0).expect("layout checked");
                for (i, c) in maps.color.iter().enumerate() {
                    payload.extend_from_slice(c);
                    if self.vis == VisMode::Maps {
                        payload.push(state.values[[i, 3]].clamp(-1.0, 1.0));
                    }
                }
            }
            (vis, Layout::Pbr) => {
                let m = extract_pbr(state, layout).expect("layout checked");
                for i in 0..n {
                    match vis {
                        VisMode::Albedo => payload.extend_from_slice(&m.albedo[i]),
                        VisMode::Normal => payload.extend_from_slice(&m.normal[i]),
                        VisMode::Height => payload.push(m.height[i]),
                        VisMode::Roughness => payload.push(m.roughness[i]),
                        VisMode::Ao => payload.push(m.ao[i]),
                        _ => {
                            payload.extend_from_slice(&m.albedo[i]);
                            payload.extend_from_slice(&m.normal[i]);
                            payload.extend_from_slice(&[m.height[i], m.roughness[i], m.ao[i]]);
                        }
                    }
                }
            }
        }
        FrameMessage {
            step_counter: state.step_counter as u32,
            steps_per_sec,
            cells: n as u32,
            channel_count: self.vis_channels() as u32,
            payload,
        }
    }
}
