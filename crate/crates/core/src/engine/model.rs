use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sh::ShBasisConfig;
use crate::{Error, Real, Result};

/// How state channels map to output attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// albedo(3) normal(3) height roughness ao
    Pbr,
    /// color(3) displacement
    ColorGeo,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::Pbr => "pbr",
            Layout::ColorGeo => "color_geo",
        }
    }

    /// Channels a state needs to carry this layout.
    pub fn min_channels(self) -> usize {
        match self {
            Layout::Pbr => 9,
            Layout::ColorGeo => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelConfig {
    pub channels: usize,
    pub hidden: usize,
    pub condition_dim: usize,
    pub sh: ShBasisConfig,
    pub layout: Layout,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            channels: 16,
            hidden: 128,
            condition_dim: 0,
            sh: ShBasisConfig::default(),
            layout: Layout::Pbr,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.hidden == 0 {
            return Err(Error::InvalidArgument(format!(
                "channels and hidden must be positive (got {} and {})",
                self.channels, self.hidden
            )));
        }
        Ok(())
    }

    /// Width of the MLP input `[s | z | h]`.
    pub fn input_dim(&self) -> usize {
        self.channels + self.perception_dim() + self.condition_dim
    }

    pub fn perception_dim(&self) -> usize {
        self.sh.basis_count() * self.channels
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }
}

/// Trainable parameters of the two-layer MLP, both layers with bias.
pub fn param_count(config: &ModelConfig) -> usize {
    let h = config.hidden;
    config.input_dim() * h + h + h * config.channels + config.channels
}

/// A trained update rule together with its lineage.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights<T> {
    pub config: ModelConfig,
    /// `hidden x input_dim`
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    /// `channels x hidden`
    pub w2: Array2<T>,
    pub b2: Array1<T>,
    pub lineage_id: String,
    pub parent_id: Option<String>,
    /// Full ancestry, nearest first. `ancestors[0] == parent_id` when present.
    pub ancestors: Vec<String>,
    pub name: String,
}

impl<T: Real> ModelWeights<T> {
    pub fn zeros(config: ModelConfig) -> Self {
        let (c, h, i) = (config.channels, config.hidden, config.input_dim());
        ModelWeights {
            config,
            w1: Array2::zeros((h, i)),
            b1: Array1::zeros(h),
            w2: Array2::zeros((c, h)),
            b2: Array1::zeros(c),
            lineage_id: String::new(),
            parent_id: None,
            ancestors: Vec::new(),
            name: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let (c, h, i) = (self.config.channels, self.config.hidden, self.config.input_dim());
        let shapes = [
            ("W1", self.w1.dim(), (h, i)),
            ("b1", (self.b1.len(), 1), (h, 1)),
            ("W2", self.w2.dim(), (c, h)),
            ("b2", (self.b2.len(), 1), (c, 1)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::Shape(format!("{name} is {got:?}, config requires {want:?}")));
            }
        }
        if self.params().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("weights contain non-finite values".into()));
        }
        Ok(())
    }

    /// All parameters in the order W1, b1, W2, b2 (row-major).
    pub fn params(&self) -> impl Iterator<Item = T> + '_ {
        self.w1
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(self.b2.iter())
            .copied()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> + '_ {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }

    /// The ancestry chain starting with this model itself.
    pub fn lineage(&self) -> Vec<&str> {
        let mut chain = vec![self.lineage_id.as_str()];
        if self.ancestors.is_empty() {
            chain.extend(self.parent_id.as_deref());
        } else {
            chain.extend(self.ancestors.iter().map(String::as_str));
        }
        chain
    }

    pub fn cast<U: Real>(&self) -> ModelWeights<U> {
        let c = |v: &T| U::of(v.as_f64());
        ModelWeights {
            config: self.config,
            w1: self.w1.map(c),
            b1: self.b1.map(c),
            w2: self.w2.map(c),
            b2: self.b2.map(c),
            lineage_id: self.lineage_id.clone(),
            parent_id: self.parent_id.clone(),
            ancestors: self.ancestors.clone(),
            name: self.name.clone(),
        }
    }
}

pub enum InitScheme<'a, T> {
    /// Glorot-uniform first layer, zero biases and zero output layer.
    Random { seed: u64 },
    /// Copy of a trained parent, linked into its lineage.
    FromParent(&'a ModelWeights<T>),
}

pub(crate) fn lineage_uuid(rng: &mut impl Rng) -> String {
    uuid::Builder::from_random_bytes(rng.gen()).into_uuid().to_string()
}

pub fn init_weights<T: Real>(config: ModelConfig, scheme: InitScheme<'_, T>) -> Result<ModelWeights<T>> {
    config.validate()?;
    match scheme {
        InitScheme::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = ModelWeights::zeros(config);
            let fan = (config.input_dim() + config.hidden) as f64;
            let limit = (6.0 / fan).sqrt();
            w.w1.mapv_inplace(|_| T::of(rng.gen_range(-limit..limit)));
            w.lineage_id = lineage_uuid(&mut rng);
            Ok(w)
        }
        InitScheme::FromParent(parent) => {
            if parent.config != config {
                return Err(Error::Incompatible(format!(
                    "parent config {:?} differs from requested {:?}",
                    parent.config, config
                )));
            }
            let mut child = parent.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(parent.lineage_id.as_bytes()));
            child.lineage_id = lineage_uuid(&mut rng);
            child.parent_id = Some(parent.lineage_id.clone());
            child.ancestors = parent.lineage().into_iter().map(str::to_owned).collect();
            Ok(child)
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    /// Nearest shared ancestor, searched from `a`'s side.
    pub common_ancestor: Option<String>,
}

/// Two models are graft-compatible when their ancestry chains meet and their
/// configurations agree.
pub fn check_compatibility<T: Real>(a: &ModelWeights<T>, b: &ModelWeights<T>) -> Compatibility {
    let chain_b = b.lineage();
    let common = a
        .lineage()
        .into_iter()
        .find(|id| !id.is_empty() && chain_b.contains(id))
        .map(str::to_owned);
    Compatibility {
        compatible: common.is_some() && a.config == b.config,
        common_ancestor: common,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(c: usize, h: usize, d: usize) -> ModelConfig {
        ModelConfig {
            channels: c,
            hidden: h,
            condition_dim: d,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(param_count(&cfg(16, 128, 0)), 12432);
        assert_eq!(param_count(&cfg(32, 128, 3)), 25120);
        assert_eq!(param_count(&cfg(16, 128, 3)), 12816);
        let w = ModelWeights::<f32>::zeros(cfg(16, 128, 3));
        assert_eq!(w.params().count(), 12816);
    }

    #[test]
    fn random_init_is_seeded_and_zero_output() {
        let a: ModelWeights<f64> = init_weights(cfg(4, 8, 0), InitScheme::Random { seed: 3 }).unwrap();
        let b: ModelWeights<f64> = init_weights(cfg(4, 8, 0), InitScheme::Random { seed: 3 }).unwrap();
        assert_eq!(a, b);
        assert!(a.w2.iter().chain(a.b2.iter()).chain(a.b1.iter()).all(|&v| v == 0.0));
        let limit = (6.0f64 / (20.0 + 8.0)).sqrt();
        assert!(a.w1.iter().all(|v| v.abs() <= limit));
        assert!(a.w1.iter().any(|&v| v != 0.0));
        a.validate().unwrap();
    }

    #[test]
    fn from_parent_copies_and_links() {
        let mut p: ModelWeights<f32> = init_weights(cfg(4, 8, 0), InitScheme::Random { seed: 1 }).unwrap();
        p.w2.fill(0.25);
        let c = init_weights(p.config, InitScheme::FromParent(&p)).unwrap();
        assert_eq!((&c.w1, &c.b1, &c.w2, &c.b2), (&p.w1, &p.b1, &p.w2, &p.b2));
        assert_eq!(c.parent_id.as_deref(), Some(p.lineage_id.as_str()));
        assert_ne!(c.lineage_id, p.lineage_id);
        assert!(init_weights(cfg(5, 8, 0), InitScheme::FromParent(&p)).is_err());
    }

    #[test]
    fn compatibility_rules() {
        let p: ModelWeights<f32> = init_weights(cfg(4, 8, 0), InitScheme::Random { seed: 1 }).unwrap();
        let c1 = init_weights(p.config, InitScheme::FromParent(&p)).unwrap();
        let mut c2 = init_weights(p.config, InitScheme::FromParent(&p)).unwrap();
        c2.lineage_id = "sibling".into();
        let g = init_weights(c1.config, InitScheme::FromParent(&c1)).unwrap();
        let other: ModelWeights<f32> = init_weights(cfg(4, 8, 0), InitScheme::Random { seed: 2 }).unwrap();

        let same = check_compatibility(&p, &p);
        assert!(same.compatible);
        assert_eq!(same.common_ancestor.as_deref(), Some(p.lineage_id.as_str()));

        let sib = check_compatibility(&c1, &c2);
        assert!(sib.compatible);
        assert_eq!(sib.common_ancestor.as_deref(), Some(p.lineage_id.as_str()));

        let grand = check_compatibility(&g, &c2);
        assert_eq!(grand.common_ancestor.as_deref(), Some(p.lineage_id.as_str()));

        let roots = check_compatibility(&p, &other);
        assert!(!roots.compatible);
        assert_eq!(roots.common_ancestor, None);
    }

    #[test]
    fn shape_validation() {
        let mut w = ModelWeights::<f64>::zeros(cfg(4, 8, 0));
        w.b2 = Array1::zeros(3);
        assert!(matches!(w.validate(), Err(Error::Shape(_))));
    }
}
