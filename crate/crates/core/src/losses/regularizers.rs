use ndarray::{Array2, ArrayView2};

use crate::mesh::AdjacencyGraph;
use crate::{Error, Real, Result};

pub const OVERFLOW_WEIGHT: f64 = 10_000.0;
pub const HF_XI: f64 = 0.01;

/// Mean distance of each state value from `[-1, 1]`.
pub fn overflow_loss<T: Real>(states: ArrayView2<T>) -> T {
    if states.is_empty() {
        return T::zero();
    }
    let total: T = states
        .iter()
        .map(|&s| (s - s.max(-T::one()).min(T::one())).abs())
        .sum();
    total / T::of(states.len() as f64)
}

/// Gradient of [`overflow_loss`], scaled by `weight`.
pub fn overflow_grad<T: Real>(states: ArrayView2<T>, weight: T) -> Array2<T> {
    let k = weight / T::of(states.len().max(1) as f64);
    states.mapv(|s| {
        if s > T::one() {
            k
        } else if s < -T::one() {
            -k
        } else {
            T::zero()
        }
    })
}

/// `sum_j (c_j - c_i)` over the graph neighbors of every vertex.
pub fn uniform_laplacian<T: Real>(values: &[T], graph: &AdjacencyGraph) -> Result<Vec<T>> {
    if values.len() != graph.vertex_count() {
        return Err(Error::Shape(format!(
            "{} values for a graph with {} vertices",
            values.len(),
            graph.vertex_count()
        )));
    }
    Ok((0..values.len())
        .map(|i| graph.neighbors(i).iter().map(|&j| values[j as usize] - values[i]).sum())
        .collect())
}

/// `max(0, mean(laplacian) - xi)`.
pub fn hf_constraint_from_laplacian<T: Real>(laplacian: &[T], xi: T) -> T {
    if laplacian.is_empty() {
        return T::zero();
    }
    let mean = laplacian.iter().copied().sum::<T>() / T::of(laplacian.len() as f64);
    (mean - xi).max(T::zero())
}

/// High-frequency penalty on a scalar geometry channel. On a symmetric graph
/// the mean Laplacian cancels to zero up to rounding, so this is zero for any
/// `xi` above the rounding level.
pub fn hf_constraint<T: Real>(geo: &[T], graph: &AdjacencyGraph, xi: T) -> Result<T> {
    Ok(hf_constraint_from_laplacian(&uniform_laplacian(geo, graph)?, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_icosphere, AdjacencyGraph};
    use ndarray::array;

    #[test]
    fn overflow_examples() {
        assert_eq!(overflow_loss(array![[0.3, -1.0], [1.0, 0.0]].view()), 0.0);
        assert_eq!(overflow_loss(array![[1.5]].view()), 0.5);
        assert_eq!(overflow_loss(array![[-2.0, 0.0]].view()), 0.5);
        let g = overflow_grad(array![[1.5, -3.0, 0.2]].view(), 3.0);
        assert_eq!(g, array![[1.0, -1.0, 0.0]]);
    }

    #[test]
    fn hf_examples() {
        let mesh = generate_icosphere::<f64>(2).unwrap();
        let graph = AdjacencyGraph::from_mesh(&mesh);
        let constant = vec![0.4; mesh.vertex_count()];
        assert_eq!(hf_constraint(&constant, &graph, HF_XI).unwrap(), 0.0);
        assert_eq!(hf_constraint_from_laplacian(&[HF_XI, HF_XI], HF_XI), 0.0);
        let lap = [HF_XI + 0.5; 4];
        assert!((hf_constraint_from_laplacian(&lap, HF_XI) - 0.5).abs() < 1e-15);
        assert!(hf_constraint(&constant[1..], &graph, HF_XI).is_err());
    }

    #[test]
    fn laplacian_on_path() {
        let graph = AdjacencyGraph::from_edges(3, [(0, 1), (1, 2)]);
        let lap = uniform_laplacian(&[0.0, 1.0, 4.0], &graph).unwrap();
        assert_eq!(lap, vec![1.0, 2.0, -3.0]);
    }
}
