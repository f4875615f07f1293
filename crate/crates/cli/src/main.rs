use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use meshnca::engine::{
    default_max_displacement, init_weights, InitScheme, Layout, ModelConfig, ModelWeights, Simulation,
    UpdateMaskScheme,
};
use meshnca::io::{load_models, load_weights, save_weights, write_ply, write_state_dump, Registry};
use meshnca::mesh::AdjacencyGraph;
use meshnca::sh::ShBasisConfig;
use meshnca::trainer::{stripes_target, train, HistoryRow, LossKind, TargetField, TrainConfig, STRIPES_FREQUENCY};
use meshnca_cli::bench::run_bench;
use meshnca_cli::server::Server;
use meshnca_cli::session::Catalog;
use meshnca_cli::target_csv::read_target_csv;
use meshnca_cli::MeshSource;

#[derive(Parser)]
#[command(name = "meshnca", version, about = "Mesh neural cellular automata")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a model from the seed state and export the result.
    Synth(SynthArgs),
    /// Train a model against a per-vertex target.
    Train(TrainArgs),
    /// Measure simulation throughput.
    Bench(BenchArgs),
    /// Serve simulations over websocket.
    Serve(ServeArgs),
    /// Print weight-file metadata.
    Inspect { file: PathBuf },
}

#[derive(Copy, Clone, ValueEnum)]
enum MaskArg {
    Bernoulli,
    Shuffle,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bernoulli")]
    mask_scheme: MaskArg,
    /// Spherical-harmonics degree (0, 1 or 2).
    #[arg(long)]
    sh_degree: Option<u8>,
    /// Perception rotation about vertex normals, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    orientation: f64,
}

impl Common {
    fn scheme(&self) -> UpdateMaskScheme {
        match self.mask_scheme {
            MaskArg::Bernoulli => UpdateMaskScheme::Bernoulli,
            MaskArg::Shuffle => UpdateMaskScheme::ShuffleMap { seed: self.seed },
        }
    }

    fn check_degree(&self, w: &ModelWeights<f32>) -> anyhow::Result<()> {
        if let Some(d) = self.sh_degree {
            ensure!(d == w.config.sh.degree(), "model uses SH degree {}, not {d}", w.config.sh.degree());
        }
        Ok(())
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "icosphere:5")]
    mesh: MeshSource,
    #[arg(long)]
    weights: PathBuf,
    /// Model name or lineage id inside a registry file.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the raw state as an MNCA dump.
    #[arg(long)]
    state_dump: Option<PathBuf>,
    /// Displacement scale for color/geometry models; defaults to 5% of the bounding-box diagonal.
    #[arg(long)]
    max_displacement: Option<f32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, ValueEnum)]
enum LossArg {
    DirectMse,
    SetOt,
}

#[derive(Copy, Clone, ValueEnum)]
enum LayoutArg {
    Pbr,
    ColorGeo,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "icosphere:3")]
    mesh: MeshSource,
    /// `stripes` or a CSV file with one row per vertex.
    #[arg(long, default_value = "stripes")]
    target: String,
    /// State channels supervised by the CSV columns (default 0, 1, ...).
    #[arg(long, value_delimiter = ',')]
    target_channels: Option<Vec<usize>>,
    #[arg(long, required_unless_present = "print_config")]
    out: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    init_from: Option<PathBuf>,
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    min_steps: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long)]
    no_grad_norm: bool,
    #[arg(long, default_value_t = 16)]
    channels: usize,
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    #[arg(long, value_enum, default_value = "pbr")]
    layout: LayoutArg,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "icosphere:5")]
    mesh: MeshSource,
    /// Defaults to a freshly initialized 16-channel model.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Seconds.
    #[arg(long, default_value_t = 5.0)]
    duration: f64,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8765)]
    port: u16,
    /// Weight or registry files; repeatable.
    #[arg(long)]
    registry: Vec<PathBuf>,
    /// Extra meshes as `name=path.obj`; repeatable.
    #[arg(long, value_parser = parse_named_mesh)]
    mesh_file: Vec<(String, PathBuf)>,
    #[arg(long, default_value_t = 5)]
    level: u32,
    #[command(flatten)]
    common: Common,
}

fn parse_named_mesh(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected name=path")?;
    Ok((name.to_string(), PathBuf::from(path)))
}

fn pick_model(path: &PathBuf, name: Option<&str>) -> anyhow::Result<ModelWeights<f32>> {
    let reg: Registry<f32> = load_models(path).with_context(|| format!("loading {}", path.display()))?;
    match name {
        Some(n) => reg.get(n).cloned().with_context(|| format!("no model {n:?} in {}", path.display())),
        None => reg.models.into_iter().next().context("registry is empty"),
    }
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let weights = pick_model(&a.weights, a.model.as_deref())?;
    a.common.check_degree(&weights)?;
    let mesh = a.mesh.load::<f32>()?;
    let max_disp = a.max_displacement.unwrap_or_else(|| default_max_displacement(&mesh));
    let layout = weights.config.layout;
    let mut sim = Simulation::new(mesh, weights, a.common.scheme(), a.common.seed)?;
    sim.set_orientation(a.common.orientation as f32)?;
    sim.run(a.steps)?;
    ensure!(sim.state().is_finite(), "state became non-finite");
    write_ply(BufWriter::new(File::create(&a.out)?), sim.mesh(), sim.state(), layout, max_disp)?;
    if let Some(p) = &a.state_dump {
        write_state_dump(BufWriter::new(File::create(p)?), sim.state())?;
    }
    println!("wrote {} ({} vertices, {} steps)", a.out.display(), sim.mesh().vertex_count(), a.steps);
    Ok(())
}

fn train_cmd(a: TrainArgs) -> anyhow::Result<()> {
    let mut cfg = TrainConfig {
        rng_seed: a.common.seed,
        mask_scheme: a.common.scheme(),
        orientation: a.common.orientation,
        checkpoint_dir: a.checkpoint_dir.clone(),
        ..Default::default()
    };
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.lr = v;
    }
    if let Some(v) = a.pool_size {
        cfg.pool_size = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    cfg.step_range = (a.min_steps.unwrap_or(cfg.step_range.0), a.max_steps.unwrap_or(cfg.step_range.1));
    if let Some(l) = a.loss {
        cfg.loss = match l {
            LossArg::DirectMse => LossKind::DirectMse,
            LossArg::SetOt => LossKind::SetOt,
        };
    }
    cfg.normalize_grads = !a.no_grad_norm;

    let parent = a.init_from.as_ref().map(load_weights::<f32>).transpose()?;
    let model = match &parent {
        Some(p) => {
            if let Some(d) = a.common.sh_degree {
                ensure!(d == p.config.sh.degree(), "parent uses SH degree {}", p.config.sh.degree());
            }
            p.config
        }
        None => ModelConfig {
            channels: a.channels,
            hidden: a.hidden,
            condition_dim: 0,
            sh: ShBasisConfig::new(a.common.sh_degree.unwrap_or(1))?,
            layout: match a.layout {
                LayoutArg::Pbr => Layout::Pbr,
                LayoutArg::ColorGeo => Layout::ColorGeo,
            },
        },
    };
    if a.print_config {
        println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "train": cfg, "model": model }))?);
        return Ok(());
    }
    cfg.validate()?;

    let mesh = a.mesh.load::<f32>()?;
    let graph = AdjacencyGraph::from_mesh(&mesh);
    let target: TargetField<f32> = if a.target == "stripes" {
        stripes_target(&mesh, STRIPES_FREQUENCY)
    } else {
        read_target_csv(a.target.as_ref(), a.target_channels.clone())?
    };
    if let Some(dir) = &cfg.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }
    let start = Instant::now();
    let mut out = train(&mesh, &graph, &target, model, parent.as_ref(), &cfg)?;
    out.weights.name = a.name.clone().unwrap_or_else(|| {
        a.out.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    let path = a.out.as_ref().expect("required by clap");
    save_weights(path, &out.weights)?;
    if let Some(h) = &a.history {
        HistoryRow::save_csv(h, &out.history)?;
    }
    if let (Some(first), Some(last)) = (out.history.first(), out.history.last()) {
        println!("loss: {:.6} -> {:.6}", first.loss, last.loss);
    }
    println!(
        "wrote {} (lineage {}, {} epochs in {:.1}s)",
        path.display(),
        out.weights.lineage_id,
        cfg.epochs,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    ensure!(a.duration.is_finite() && a.duration > 0.0, "duration must be positive");
    let weights = match &a.weights {
        Some(p) => pick_model(p, a.model.as_deref())?,
        None => {
            let config = ModelConfig { sh: ShBasisConfig::new(a.common.sh_degree.unwrap_or(1))?, ..Default::default() };
            init_weights(config, InitScheme::Random { seed: a.common.seed })?
        }
    };
    a.common.check_degree(&weights)?;
    let mesh = a.mesh.load::<f32>()?;
    let mut sim = Simulation::new(mesh, weights, a.common.scheme(), a.common.seed)?;
    sim.set_orientation(a.common.orientation as f32)?;
    let report = run_bench(&mut sim, Duration::from_secs_f64(a.duration), a.warmup)?;
    println!("{report}");
    Ok(())
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let mut catalog = Catalog::with_default_model(a.common.seed);
    if !a.registry.is_empty() {
        catalog.models.models.clear();
        for p in &a.registry {
            let reg: Registry<f32> = load_models(p).with_context(|| format!("loading {}", p.display()))?;
            catalog.models.models.extend(reg.models);
        }
    }
    if catalog.models.models.is_empty() {
        bail!("no models to serve");
    }
    catalog.meshes = a.mesh_file.into_iter().collect::<BTreeMap<_, _>>();
    catalog.default_level = a.level;
    catalog.seed = a.common.seed;
    catalog.mask_scheme = a.common.scheme();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let server = Server::bind(&format!("{}:{}", a.host, a.port), catalog).await?;
        println!("listening on ws://{}", server.local_addr()?);
        server.run().await;
        anyhow::Ok(())
    })
}

fn inspect(path: PathBuf) -> anyhow::Result<()> {
    let reg: Registry<f32> = load_models(&path)?;
    for m in &reg.models {
        let c = &m.config;
        println!("name: {}", m.name);
        println!("  lineage_id: {}", m.lineage_id);
        println!("  parent_id: {}", m.parent_id.as_deref().unwrap_or("-"));
        if m.ancestors.len() > 1 {
            println!("  ancestors: {}", m.ancestors.join(" <- "));
        }
        println!(
            "  channels {} hidden {} condition_dim {} sh_degree {} layout {}",
            c.channels,
            c.hidden,
            c.condition_dim,
            c.sh.degree(),
            c.layout.name()
        );
        println!("  parameters: {}", c.param_count());
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Cmd::Synth(a) => synth(a),
        Cmd::Train(a) => train_cmd(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Serve(a) => serve(a),
        Cmd::Inspect { file } => inspect(file),
    }
}
