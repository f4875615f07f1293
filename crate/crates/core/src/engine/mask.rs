use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which cells update in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMaskScheme {
    /// Each cell independently with probability 1/2.
    Bernoulli,
    /// Exactly `floor(N/2)` cells: a fixed sorted index list shifted by a
    /// random offset modulo `N` each step.
    ShuffleMap { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct MaskSampler {
    scheme: UpdateMaskScheme,
    cells: usize,
    shuffle: Vec<u32>,
}

impl MaskSampler {
    pub fn new(scheme: UpdateMaskScheme, cells: usize) -> Self {
        let shuffle = match scheme {
            UpdateMaskScheme::Bernoulli => Vec::new(),
            UpdateMaskScheme::ShuffleMap { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut v: Vec<u32> = sample(&mut rng, cells, cells / 2)
                    .into_iter()
                    .map(|i| i as u32)
                    .collect();
                v.sort_unstable();
                v
            }
        };
        MaskSampler {
            scheme,
            cells,
            shuffle,
        }
    }

    pub fn scheme(&self) -> UpdateMaskScheme {
        self.scheme
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// The precomputed shuffle map (empty for Bernoulli).
    pub fn shuffle_map(&self) -> &[u32] {
        &self.shuffle
    }

    /// Draws one step's mask into `out` (resized to `N`).
    pub fn sample(&self, rng: &mut impl Rng, out: &mut Vec<bool>) {
        out.clear();
        match self.scheme {
            UpdateMaskScheme::Bernoulli => out.extend((0..self.cells).map(|_| rng.gen_bool(0.5))),
            UpdateMaskScheme::ShuffleMap { .. } => {
                out.resize(self.cells, false);
                if self.cells == 0 {
                    return;
                }
                let offset = rng.gen_range(0..self.cells);
                for &i in &self.shuffle {
                    out[(i as usize + offset) % self.cells] = true;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_map_updates_exactly_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = Vec::new();
        for n in [1usize, 2, 7, 642, 1001] {
            let s = MaskSampler::new(UpdateMaskScheme::ShuffleMap { seed: 9 }, n);
            assert_eq!(s.shuffle_map().len(), n / 2);
            assert!(s.shuffle_map().windows(2).all(|w| w[0] < w[1]));
            for _ in 0..20 {
                s.sample(&mut rng, &mut m);
                assert_eq!(m.len(), n);
                assert_eq!(m.iter().filter(|&&b| b).count(), n / 2);
            }
        }
    }

    #[test]
    fn bernoulli_fraction_within_five_sigma() {
        let n = 10_000;
        let s = MaskSampler::new(UpdateMaskScheme::Bernoulli, n);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut m = Vec::new();
        s.sample(&mut rng, &mut m);
        let k = m.iter().filter(|&&b| b).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((k - n as f64 / 2.0).abs() <= 5.0 * sigma, "{k}");
    }
}
