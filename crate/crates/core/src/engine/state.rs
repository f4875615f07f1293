use ndarray::Array2;

use crate::geom;
use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// The `N x C` cell states plus the number of steps taken so far.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStateBuffer<T> {
    pub values: Array2<T>,
    pub step_counter: u64,
}

impl<T: Real> CellStateBuffer<T> {
    /// The all-zero seed state.
    pub fn seed(cells: usize, channels: usize) -> Self {
        CellStateBuffer {
            values: Array2::zeros((cells, channels)),
            step_counter: 0,
        }
    }

    pub fn cells(&self) -> usize {
        self.values.nrows()
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Optional per-cell conditioning input, `N x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionField<T> {
    pub values: Array2<T>,
}

impl<T: Real> ConditionField<T> {
    pub fn none(cells: usize) -> Self {
        ConditionField {
            values: Array2::zeros((cells, 0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Motion positional encoding: a tangent vector field used as the
    /// condition. Rows must be orthogonal to the vertex normals.
    pub fn motion_encoding(tangent: &[[T; 3]], mesh: &Mesh<T>) -> Result<Self> {
        if tangent.len() != mesh.vertex_count() {
            return Err(Error::Shape(format!(
                "{} motion vectors for {} vertices",
                tangent.len(),
                mesh.vertex_count()
            )));
        }
        for (i, (v, n)) in tangent.iter().zip(mesh.normals()).enumerate() {
            if geom::dot(*v, *n).abs().as_f64() >= 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "motion vector at vertex {i} is not tangent to the surface"
                )));
            }
        }
        let values = Array2::from_shape_fn((tangent.len(), 3), |(i, k)| tangent[i][k]);
        Ok(ConditionField { values })
    }
}
