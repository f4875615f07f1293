use serde::{Deserialize, Serialize};

use crate::geom::{norm, Vec3};
use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// Named target motion fields over vertex positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFieldSpec {
    PositiveX,
    NegativeX,
    PositiveY,
    NegativeY,
    GradYUp,
    GradYDown,
    CircularX,
    CircularY,
}

impl VectorFieldSpec {
    pub const ALL: [VectorFieldSpec; 8] = [
        Self::PositiveX,
        Self::NegativeX,
        Self::PositiveY,
        Self::NegativeY,
        Self::GradYUp,
        Self::GradYDown,
        Self::CircularX,
        Self::CircularY,
    ];

    /// Unnormalized field value at `p`.
    pub fn raw<T: Real>(self, p: Vec3<T>) -> Vec3<T> {
        let (o, l) = (T::zero(), T::one());
        let [x, y, z] = p;
        let circular = |f: &dyn Fn(T) -> Vec3<T>| {
            let r = norm(p);
            if r < T::of(1e-9) {
                [o; 3]
            } else {
                f(r)
            }
        };
        match self {
            Self::PositiveX => [l, o, o],
            Self::NegativeX => [-l, o, o],
            Self::PositiveY => [o, l, o],
            Self::NegativeY => [o, -l, o],
            Self::GradYUp => [o, z + l, o],
            Self::GradYDown => [o, -z - l, o],
            Self::CircularX => circular(&|r| [o, -z / r, y / r]),
            Self::CircularY => circular(&|r| [z / r, o, -x / r]),
        }
    }
}

/// Evaluates `spec` at every vertex and divides by the mean vector norm.
pub fn eval_vector_field<T: Real>(spec: VectorFieldSpec, mesh: &Mesh<T>) -> Result<Vec<Vec3<T>>> {
    let raw: Vec<Vec3<T>> = mesh.positions().iter().map(|&p| spec.raw(p)).collect();
    let mean = raw.iter().map(|&v| norm(v)).sum::<T>() / T::of(raw.len() as f64);
    if mean == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(raw.into_iter().map(|v| [v[0] / mean, v[1] / mean, v[2] / mean]).collect())
}
