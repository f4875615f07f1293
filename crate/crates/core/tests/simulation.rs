use meshnca::engine::{
    extract_pbr, init_weights, CellStateBuffer, GraftField, InitScheme, Layout, ModelConfig, ModelWeights, Simulation,
    UpdateMaskScheme,
};
use meshnca::io::{decode_state_dump, encode_state_dump};
use meshnca::mesh::{generate_icosphere, parse_obj, write_obj};
use meshnca::sh::ShBasisConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noisy(config: ModelConfig, seed: u64) -> ModelWeights<f64> {
    let mut w: ModelWeights<f64> = init_weights(config, InitScheme::Random { seed }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    w.w2.mapv_inplace(|_| rng.gen_range(-0.05..0.05));
    w.b1.mapv_inplace(|_| rng.gen_range(-0.05..0.05));
    w
}

#[test]
fn fresh_model_keeps_the_seed_gray() {
    let mesh = generate_icosphere::<f64>(2).unwrap();
    let w = init_weights(ModelConfig::default(), InitScheme::Random { seed: 1 }).unwrap();
    let mut sim = Simulation::new(mesh, w, UpdateMaskScheme::Bernoulli, 1).unwrap();
    sim.run(20).unwrap();
    assert_eq!(sim.state().step_counter, 20);
    let maps = extract_pbr(sim.state(), Layout::Pbr).unwrap();
    assert!(maps.albedo.iter().all(|c| *c == [0.5, 0.5, 0.5]));
}

#[test]
fn same_seed_same_trajectory() {
    let mesh = generate_icosphere::<f64>(2).unwrap();
    let w = noisy(ModelConfig::default(), 3);
    let run = |seed| {
        let mut sim = Simulation::new(mesh.clone(), w.clone(), UpdateMaskScheme::Bernoulli, seed).unwrap();
        sim.run(40).unwrap();
        sim.state().values.clone()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn reset_returns_to_seed() {
    let mesh = generate_icosphere::<f64>(1).unwrap();
    let mut sim = Simulation::new(mesh, noisy(ModelConfig::default(), 4), UpdateMaskScheme::Bernoulli, 0).unwrap();
    sim.run(10).unwrap();
    assert!(sim.state().values.iter().any(|&v| v != 0.0));
    sim.reset();
    assert_eq!(*sim.state(), CellStateBuffer::seed(42, 16));
}

#[test]
fn graft_between_endpoints_stays_between() {
    // With one step from the same state the blended update is linear in alpha.
    let mesh = generate_icosphere::<f64>(1).unwrap();
    let n = mesh.vertex_count();
    let (a, b) = (noisy(ModelConfig::default(), 10), noisy(ModelConfig::default(), 11));
    let one_step = |alpha: f64| {
        let mut sim = Simulation::new(mesh.clone(), a.clone(), UpdateMaskScheme::Bernoulli, 2).unwrap();
        sim.set_graft(Some(GraftField::uniform(b.clone(), n, alpha))).unwrap();
        sim.step().unwrap();
        sim.state().values.clone()
    };
    let (s0, s1, half) = (one_step(0.0), one_step(1.0), one_step(0.5));
    let mid = (&s0 + &s1) / 2.0;
    assert!(half.iter().zip(mid.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn graft_rejects_mismatched_config() {
    let mesh = generate_icosphere::<f64>(1).unwrap();
    let a = noisy(ModelConfig::default(), 1);
    let other = ModelConfig { sh: ShBasisConfig::new(2).unwrap(), ..Default::default() };
    let mut sim = Simulation::new(mesh, a, UpdateMaskScheme::Bernoulli, 0).unwrap();
    assert!(sim.set_graft(Some(GraftField::new(noisy(other, 2), 42))).is_err());
}

#[test]
fn obj_mesh_runs_like_the_icosphere() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ico.obj");
    let ico = generate_icosphere::<f64>(2).unwrap();
    write_obj(&ico, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let loaded = parse_obj::<f64>(&text, &path).unwrap();
    assert_eq!(loaded.vertex_count(), ico.vertex_count());
    assert_eq!(loaded.triangles(), ico.triangles());

    let w = noisy(ModelConfig::default(), 8);
    let mut a = Simulation::new(ico, w.clone(), UpdateMaskScheme::Bernoulli, 9).unwrap();
    let mut b = Simulation::new(loaded, w, UpdateMaskScheme::Bernoulli, 9).unwrap();
    a.run(10).unwrap();
    b.run(10).unwrap();
    let err = (&a.state().values - &b.state().values).mapv(f64::abs).fold(0.0, |m: f64, &v| m.max(v));
    assert!(err < 1e-9, "{err}");
}

#[test]
fn state_dump_of_a_running_simulation() {
    let mesh = generate_icosphere::<f32>(2).unwrap();
    let w = noisy(ModelConfig::default(), 12).cast::<f32>();
    let mut sim = Simulation::new(mesh, w, UpdateMaskScheme::ShuffleMap { seed: 4 }, 0).unwrap();
    sim.run(25).unwrap();
    let back: CellStateBuffer<f32> = decode_state_dump(&encode_state_dump(sim.state())).unwrap();
    assert_eq!(back.values, sim.state().values);
}
