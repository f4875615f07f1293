use crate::engine::Camera;
use crate::geom::{dot, Vec3};
use crate::{Error, Real, Result};

/// Loss weights for motion training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    /// Time scale `T` relating flow magnitude to the step gap.
    pub time_scale: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl MotionParams {
    pub const IMAGE: MotionParams = MotionParams { time_scale: 24.0, gamma: 1.5, lambda: 0.67 };
    pub const TEXT: MotionParams = MotionParams { time_scale: 10.0, gamma: 0.15, lambda: 0.67 };
}

/// Per-entry 2D motion with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T> {
    pub vectors: Vec<[T; 2]>,
    pub valid: Vec<bool>,
}

impl<T: Real> FlowField<T> {
    pub fn new(vectors: Vec<[T; 2]>, valid: Vec<bool>) -> Result<Self> {
        if vectors.len() != valid.len() {
            return Err(Error::Shape(format!("{} vectors but {} mask entries", vectors.len(), valid.len())));
        }
        Ok(FlowField { vectors, valid })
    }

    /// All entries valid.
    pub fn dense(vectors: Vec<[T; 2]>) -> Self {
        let valid = vec![true; vectors.len()];
        FlowField { vectors, valid }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Removes the component of `u` along the unit normal `n`.
pub fn tangent_project<T: Real>(u: Vec3<T>, n: Vec3<T>) -> Vec3<T> {
    let k = dot(u, n);
    [u[0] - k * n[0], u[1] - k * n[1], u[2] - k * n[2]]
}

/// Maps each tangent vector through the camera as a direction and keeps the
/// first two components. Entries whose normal faces away from `view_dir`
/// are marked invalid.
pub fn project_to_view<T: Real>(
    tangent: &[Vec3<T>],
    camera: &Camera,
    normals: &[Vec3<T>],
    view_dir: Vec3<T>,
) -> Result<FlowField<T>> {
    if tangent.len() != normals.len() {
        return Err(Error::Shape(format!("{} vectors but {} normals", tangent.len(), normals.len())));
    }
    let mut vectors = Vec::with_capacity(tangent.len());
    let mut valid = Vec::with_capacity(tangent.len());
    for (u, n) in tangent.iter().zip(normals) {
        let d = camera.transform_direction([u[0].as_f64(), u[1].as_f64(), u[2].as_f64()]);
        vectors.push([T::of(d[0]), T::of(d[1])]);
        valid.push(dot(*n, view_dir) < T::zero());
    }
    Ok(FlowField { vectors, valid })
}

const TARGET_EPS: f64 = 1e-8;

fn norm2<T: Real>(v: [T; 2]) -> T {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

fn valid_pairs<'a, T: Real>(
    gen: &'a FlowField<T>,
    target: &'a FlowField<T>,
) -> Result<Vec<([T; 2], [T; 2])>> {
    if gen.len() != target.len() {
        return Err(Error::Shape(format!("flow fields of length {} and {}", gen.len(), target.len())));
    }
    let eps = T::of(TARGET_EPS);
    let pairs: Vec<_> = (0..gen.len())
        .filter(|&i| gen.valid[i] && target.valid[i] && norm2(target.vectors[i]) > eps)
        .map(|i| (gen.vectors[i], target.vectors[i]))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoValidEntries);
    }
    Ok(pairs)
}

/// Mean cosine distance between generated and target flow. A zero generated
/// vector counts as distance 1.
pub fn l_dir<T: Real>(gen: &FlowField<T>, target: &FlowField<T>) -> Result<T> {
    let pairs = valid_pairs(gen, target)?;
    let total: T = pairs
        .iter()
        .map(|&(g, t)| {
            let ng = norm2(g);
            if ng == T::zero() {
                T::one()
            } else {
                T::one() - (g[0] * t[0] + g[1] * t[1]) / (ng * norm2(t))
            }
        })
        .sum();
    Ok(total / T::of(pairs.len() as f64))
}

/// Mean of `|T |gen| / (t2 - t1) - |target||`.
pub fn l_str<T: Real>(gen: &FlowField<T>, target: &FlowField<T>, time_scale: T, t1: i64, t2: i64) -> Result<T> {
    if t2 <= t1 {
        return Err(Error::InvalidArgument(format!("step gap must be positive, got t1={t1} t2={t2}")));
    }
    let pairs = valid_pairs(gen, target)?;
    let k = time_scale / T::of((t2 - t1) as f64);
    let total: T = pairs.iter().map(|&(g, t)| (k * norm2(g) - norm2(t)).abs()).sum();
    Ok(total / T::of(pairs.len() as f64))
}

pub fn l_mot<T: Real>(l_dir: T, l_str: T, gamma: T) -> T {
    if l_dir >= T::one() {
        l_dir
    } else {
        (T::one() - l_dir) * l_str + gamma * l_dir
    }
}

pub fn l_dyn<T: Real>(l_appr: T, l_mot: T, lambda: T) -> T {
    l_appr + lambda * l_mot
}
