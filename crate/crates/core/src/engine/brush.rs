use nalgebra::{Matrix4, Vector4};

use super::sim::GraftField;
use super::state::CellStateBuffer;
use crate::geom;
use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// A view-projection matrix, row-major, mapping world points to clip space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    view_projection: Matrix4<f64>,
    inverse: Matrix4<f64>,
}

impl Camera {
    pub fn new(rows: [[f64; 4]; 4]) -> Result<Self> {
        let m = Matrix4::from_fn(|r, c| rows[r][c]);
        let inverse = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("camera matrix is not invertible".into()))?;
        Ok(Camera {
            view_projection: m,
            inverse,
        })
    }

    /// Accepts 16 values in row-major order.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 16 {
            return Err(Error::InvalidArgument(format!("camera needs 16 values, got {}", v.len())));
        }
        let mut rows = [[0.0; 4]; 4];
        for (k, x) in v.iter().enumerate() {
            rows[k / 4][k % 4] = *x;
        }
        Self::new(rows)
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
            .unwrap()
    }

    /// Normalized device coordinates, or `None` behind the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<[f64; 3]> {
        let c = self.view_projection * Vector4::new(p[0], p[1], p[2], 1.0);
        (c.w > 0.0).then(|| [c.x / c.w, c.y / c.w, c.z / c.w])
    }

    /// Linear part applied to a direction (w = 0).
    pub fn transform_direction(&self, d: [f64; 3]) -> [f64; 3] {
        let c = self.view_projection * Vector4::new(d[0], d[1], d[2], 0.0);
        [c.x, c.y, c.z]
    }

    /// World-space direction of the viewing ray through an NDC point.
    pub fn ray_direction(&self, ndc_x: f64, ndc_y: f64) -> [f64; 3] {
        let unproject = |z: f64| {
            let h = self.inverse * Vector4::new(ndc_x, ndc_y, z, 1.0);
            [h.x / h.w, h.y / h.w, h.z / h.w]
        };
        geom::sub(unproject(1.0), unproject(-1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BrushMode {
    /// Reset cells to the seed state.
    Regenerate,
    /// Raise graft weights by `delta`, clamped to [0, 1].
    Graft { delta: f64 },
}

pub enum BrushTarget<'a, T> {
    States(&'a mut CellStateBuffer<T>),
    Graft(&'a mut GraftField<T>, f64),
}

/// Vertices whose projection lies within `radius` (NDC units) of `click` and
/// whose normal faces the camera. No occlusion test.
pub fn brush_selection<T: Real>(mesh: &Mesh<T>, camera: &Camera, click: [f64; 2], radius: f64) -> Vec<usize> {
    let r2 = radius * radius;
    mesh.positions()
        .iter()
        .zip(mesh.normals())
        .enumerate()
        .filter_map(|(i, (p, n))| {
            let ndc = camera.project(geom::cast(*p))?;
            let (dx, dy) = (ndc[0] - click[0], ndc[1] - click[1]);
            if dx * dx + dy * dy > r2 {
                return None;
            }
            let ray = camera.ray_direction(ndc[0], ndc[1]);
            (geom::dot(geom::cast::<T, f64>(*n), ray) < 0.0).then_some(i)
        })
        .collect()
}

/// Applies a brush stroke and returns the number of affected vertices.
pub fn apply_brush<T: Real>(
    target: BrushTarget<'_, T>,
    mesh: &Mesh<T>,
    camera: &Camera,
    click: [f64; 2],
    radius: f64,
) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("brush radius must be positive, got {radius}")));
    }
    let selected = brush_selection(mesh, camera, click, radius);
    match target {
        BrushTarget::States(states) => {
            if states.cells() != mesh.vertex_count() {
                return Err(Error::Shape("state and mesh sizes differ".into()));
            }
            for &i in &selected {
                states.values.row_mut(i).fill(T::zero());
            }
        }
        BrushTarget::Graft(field, delta) => {
            if field.alpha.len() != mesh.vertex_count() {
                return Err(Error::Shape("graft field and mesh sizes differ".into()));
            }
            let d = T::of(delta);
            for &i in &selected {
                field.alpha[i] = (field.alpha[i] + d).max(T::zero()).min(T::one());
            }
        }
    }
    Ok(selected.len())
}
