use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::engine::{Layout, ModelConfig, ModelWeights};
use crate::sh::ShBasisConfig;
use crate::{Error, Real, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const INPUT_ORDER: &str = "s|z|h";

#[derive(Debug, Serialize, Deserialize)]
struct ConfigJson {
    channels: usize,
    hidden: usize,
    condition_dim: usize,
    sh_degree: u8,
    layout: Layout,
    basis_order: Vec<String>,
    input_order: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightJson {
    format_version: u32,
    name: String,
    lineage_id: String,
    parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ancestors: Vec<String>,
    config: ConfigJson,
    #[serde(rename = "W1")]
    w1: Vec<f64>,
    b1: Vec<f64>,
    #[serde(rename = "W2")]
    w2: Vec<f64>,
    b2: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RegistryJson {
    models: Vec<WeightJson>,
}

/// A collection of models stored in one file.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry<T> {
    pub models: Vec<ModelWeights<T>>,
}

impl<T: Real> Registry<T> {
    pub fn get(&self, name_or_id: &str) -> Option<&ModelWeights<T>> {
        self.models
            .iter()
            .find(|m| m.name == name_or_id || m.lineage_id == name_or_id)
    }
}

fn flat<T: Real>(v: impl IntoIterator<Item = T>) -> Vec<f64> {
    v.into_iter().map(|x| x.as_f64()).collect()
}

fn to_json<T: Real>(w: &ModelWeights<T>) -> Result<WeightJson> {
    w.validate()?;
    let c = &w.config;
    Ok(WeightJson {
        format_version: FORMAT_VERSION,
        name: w.name.clone(),
        lineage_id: w.lineage_id.clone(),
        parent_id: w.parent_id.clone(),
        ancestors: w.ancestors.clone(),
        config: ConfigJson {
            channels: c.channels,
            hidden: c.hidden,
            condition_dim: c.condition_dim,
            sh_degree: c.sh.degree(),
            layout: c.layout,
            basis_order: c.sh.basis_names().iter().map(|s| s.to_string()).collect(),
            input_order: INPUT_ORDER.to_string(),
        },
        // standard layout iteration is row-major
        w1: flat(w.w1.iter().copied()),
        b1: flat(w.b1.iter().copied()),
        w2: flat(w.w2.iter().copied()),
        b2: flat(w.b2.iter().copied()),
    })
}

fn matrix<T: Real>(name: &str, rows: usize, cols: usize, v: &[f64]) -> Result<Array2<T>> {
    if v.len() != rows * cols {
        return Err(Error::Format(format!("{name} has {} values, expected {rows}x{cols}", v.len())));
    }
    Ok(Array2::from_shape_vec((rows, cols), v.iter().map(|&x| T::of(x)).collect()).expect("length checked"))
}

fn vector<T: Real>(name: &str, len: usize, v: &[f64]) -> Result<Array1<T>> {
    if v.len() != len {
        return Err(Error::Format(format!("{name} has {} values, expected {len}", v.len())));
    }
    Ok(v.iter().map(|&x| T::of(x)).collect())
}

fn from_json<T: Real>(j: WeightJson) -> Result<ModelWeights<T>> {
    if j.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format_version {}", j.format_version)));
    }
    let sh = ShBasisConfig::new(j.config.sh_degree).map_err(|e| Error::Format(e.to_string()))?;
    if j.config.basis_order.iter().map(String::as_str).ne(sh.basis_names().iter().copied()) {
        return Err(Error::Format(format!("unexpected basis_order {:?}", j.config.basis_order)));
    }
    if j.config.input_order != INPUT_ORDER {
        return Err(Error::Format(format!("unexpected input_order {:?}", j.config.input_order)));
    }
    let config = ModelConfig {
        channels: j.config.channels,
        hidden: j.config.hidden,
        condition_dim: j.config.condition_dim,
        sh,
        layout: j.config.layout,
    };
    config.validate().map_err(|e| Error::Format(e.to_string()))?;
    let (c, h, i) = (config.channels, config.hidden, config.input_dim());
    let mut ancestors = j.ancestors;
    if ancestors.is_empty() {
        ancestors.extend(j.parent_id.clone());
    }
    let w = ModelWeights {
        config,
        w1: matrix("W1", h, i, &j.w1)?,
        b1: vector("b1", h, &j.b1)?,
        w2: matrix("W2", c, h, &j.w2)?,
        b2: vector("b2", c, &j.b2)?,
        lineage_id: j.lineage_id,
        parent_id: j.parent_id,
        ancestors,
        name: j.name,
    };
    w.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(w)
}

pub fn weights_to_json<T: Real>(w: &ModelWeights<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_json(w)?)?)
}

pub fn weights_from_json<T: Real>(s: &str) -> Result<ModelWeights<T>> {
    from_json(serde_json::from_str(s)?)
}

pub fn save_weights<T: Real>(path: impl AsRef<Path>, w: &ModelWeights<T>) -> Result<()> {
    fs::write(path, weights_to_json(w)?)?;
    Ok(())
}

pub fn load_weights<T: Real>(path: impl AsRef<Path>) -> Result<ModelWeights<T>> {
    weights_from_json(&fs::read_to_string(path)?)
}

pub fn save_registry<T: Real>(path: impl AsRef<Path>, registry: &Registry<T>) -> Result<()> {
    let models = registry.models.iter().map(to_json).collect::<Result<_>>()?;
    fs::write(path, serde_json::to_string(&RegistryJson { models })?)?;
    Ok(())
}

/// Loads either a registry or a single weight file.
pub fn load_models<T: Real>(path: impl AsRef<Path>) -> Result<Registry<T>> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let models = if value.get("models").is_some() {
        let r: RegistryJson = serde_json::from_value(value)?;
        r.models.into_iter().map(from_json).collect::<Result<_>>()?
    } else {
        vec![from_json(serde_json::from_value(value)?)?]
    };
    Ok(Registry { models })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{init_weights, InitScheme};

    fn model(seed: u64) -> ModelWeights<f64> {
        let cfg = ModelConfig { channels: 6, hidden: 10, ..Default::default() };
        let mut w = init_weights::<f64>(cfg, InitScheme::Random { seed }).unwrap();
        w.b2.iter_mut().enumerate().for_each(|(i, v)| *v = 0.1 * i as f64 - 1.0 / 3.0);
        w.name = format!("m{seed}");
        w
    }

    #[test]
    fn json_round_trip_is_exact() {
        let w = model(1);
        let back: ModelWeights<f64> = weights_from_json(&weights_to_json(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        let child = init_weights::<f64>(w.config, InitScheme::FromParent(&w)).unwrap();
        let back: ModelWeights<f64> = weights_from_json(&weights_to_json(&child).unwrap()).unwrap();
        assert_eq!(back, child);
        let w32: ModelWeights<f32> = w.cast();
        let back: ModelWeights<f32> = weights_from_json(&weights_to_json(&w32).unwrap()).unwrap();
        assert_eq!(back, w32);
    }

    #[test]
    fn header_fields() {
        let v: serde_json::Value = serde_json::from_str(&weights_to_json(&model(2)).unwrap()).unwrap();
        assert_eq!(v["config"]["basis_order"], serde_json::json!(["Y00", "Y1m1", "Y10", "Y11"]));
        assert_eq!(v["config"]["input_order"], "s|z|h");
        assert_eq!(v["config"]["layout"], "pbr");
        assert!(v["parent_id"].is_null());
        assert_eq!(v["W1"].as_array().unwrap().len(), 10 * (6 * 4 + 6));
    }

    #[test]
    fn rejects_bad_files() {
        let good = weights_to_json(&model(3)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["b1"] = serde_json::json!([1.0]);
        assert!(matches!(weights_from_json::<f64>(&v.to_string()), Err(Error::Format(_))));
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["config"]["input_order"] = "z|s|h".into();
        assert!(weights_from_json::<f64>(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["format_version"] = 99.into();
        assert!(weights_from_json::<f64>(&v.to_string()).is_err());
        assert!(weights_from_json::<f64>("{").is_err());
    }

    #[test]
    fn registry_files() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry { models: vec![model(4), model(5)] };
        let path = dir.path().join("reg.json");
        save_registry(&path, &reg).unwrap();
        let back: Registry<f64> = load_models(&path).unwrap();
        assert_eq!(back, reg);
        assert_eq!(back.get("m5").unwrap().name, "m5");
        let single = dir.path().join("one.json");
        save_weights(&single, &reg.models[0]).unwrap();
        assert_eq!(load_models::<f64>(&single).unwrap().models, vec![reg.models[0].clone()]);
    }
}
