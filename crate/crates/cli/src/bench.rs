use std::fmt;
use std::time::{Duration, Instant};

use anyhow::ensure;
use meshnca::engine::Simulation;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub vertices: usize,
    pub steps: usize,
    pub elapsed: Duration,
    pub mean_steps_per_sec: f64,
    /// Rate of the slowest 5% of steps.
    pub p5_steps_per_sec: f64,
    pub mean_ms_per_step: f64,
}

/// Steps the simulation for at least `duration` after `warmup` untimed
/// steps.
pub fn run_bench(sim: &mut Simulation<f32>, duration: Duration, warmup: usize) -> anyhow::Result<BenchReport> {
    ensure!(!duration.is_zero(), "benchmark duration must be positive");
    sim.run(warmup)?;
    let mut times = Vec::new();
    let start = Instant::now();
    while start.elapsed() < duration {
        let t = Instant::now();
        sim.step()?;
        times.push(t.elapsed().as_secs_f64());
    }
    let elapsed = start.elapsed();
    let total: f64 = times.iter().sum();
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let p95 = sorted[((sorted.len() as f64 * 0.95).ceil() as usize).clamp(1, sorted.len()) - 1];
    Ok(BenchReport {
        vertices: sim.mesh().vertex_count(),
        steps: times.len(),
        elapsed,
        mean_steps_per_sec: times.len() as f64 / total,
        p5_steps_per_sec: 1.0 / p95,
        mean_ms_per_step: 1000.0 * total / times.len() as f64,
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertices)?;
        writeln!(f, "steps: {} in {:.2}s", self.steps, self.elapsed.as_secs_f64())?;
        writeln!(f, "mean: {:.1} steps/s ({:.3} ms/step)", self.mean_steps_per_sec, self.mean_ms_per_step)?;
        writeln!(f, "p5: {:.1} steps/s", self.p5_steps_per_sec)?;
        write!(f, "bench: steps_per_sec={:.2}", self.mean_steps_per_sec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meshnca::engine::{init_weights, InitScheme, ModelConfig, UpdateMaskScheme};
    use meshnca::mesh::generate_icosphere;

    #[test]
    fn zero_duration_is_an_error() {
        let w = init_weights(ModelConfig::default(), InitScheme::Random { seed: 0 }).unwrap();
        let mut sim = Simulation::new(generate_icosphere(1).unwrap(), w, UpdateMaskScheme::Bernoulli, 0).unwrap();
        assert!(run_bench(&mut sim, Duration::ZERO, 0).is_err());
        let r = run_bench(&mut sim, Duration::from_millis(20), 1).unwrap();
        assert!(r.steps > 0 && r.mean_steps_per_sec > 0.0);
        assert!(r.to_string().lines().last().unwrap().starts_with("bench: steps_per_sec="));
    }
}
