//! Triangle meshes, the icosphere generator and the vertex adjacency graph.

mod adjacency;
mod icosphere;
mod obj;

pub use adjacency::{valence_stats, AdjacencyGraph, ValenceStats};
pub use icosphere::{generate_icosphere, MAX_ICOSPHERE_LEVEL};
pub use obj::{load_obj, parse_obj, write_obj};

use crate::geom::{self, Vec3};
use crate::{Error, Real, Result};

/// Vertex positions, triangles and area-weighted unit vertex normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    positions: Vec<Vec3<T>>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<Vec3<T>>,
}

impl<T: Real> Mesh<T> {
    /// Validates the topology and computes vertex normals.
    pub fn new(positions: Vec<Vec3<T>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices".into()));
        }
        let n = positions.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidMesh(format!("{n} vertices exceed the u32 index range")));
        }
        for (f, t) in triangles.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&v| v as usize >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {f} references vertex {bad} but the mesh has {n} vertices"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {f} is degenerate: {t:?}")));
            }
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex position".into()));
        }
        let normals = vertex_normals(&positions, &triangles);
        Ok(Mesh {
            positions,
            triangles,
            normals,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    /// Length of the axis-aligned bounding-box diagonal.
    pub fn bbox_diagonal(&self) -> T {
        let mut lo = self.positions[0];
        let mut hi = self.positions[0];
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        geom::norm(geom::sub(hi, lo))
    }

    pub fn cast<U: Real>(&self) -> Mesh<U> {
        Mesh {
            positions: self.positions.iter().map(|&p| geom::cast(p)).collect(),
            triangles: self.triangles.clone(),
            normals: self
                .normals
                .iter()
                .map(|&n| geom::normalize(geom::cast(n), U::zero()).unwrap_or([U::zero(), U::zero(), U::one()]))
                .collect(),
        }
    }
}

/// Area-weighted face-normal accumulation. Vertices that touch no face with
/// non-zero area fall back to +z.
fn vertex_normals<T: Real>(positions: &[Vec3<T>], triangles: &[[u32; 3]]) -> Vec<Vec3<T>> {
    // accumulate in f64 so f32 meshes get the same normals up to the final rounding
    let mut acc = vec![[0.0f64; 3]; positions.len()];
    for t in triangles {
        let [a, b, c] = t.map(|i| geom::cast::<T, f64>(positions[i as usize]));
        // |cross| is twice the face area
        let n = geom::cross(geom::sub(b, a), geom::sub(c, a));
        for &i in t {
            acc[i as usize] = geom::add(acc[i as usize], n);
        }
    }
    acc.into_iter()
        .map(|n| match geom::normalize(n, 0.0) {
            Some(u) => geom::cast(u),
            None => [T::zero(), T::zero(), T::one()],
        })
        .collect()
}
