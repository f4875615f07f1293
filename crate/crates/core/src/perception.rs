//! Spherical-harmonics message passing over the mesh graph.
//!
//! Each cell sums `Y_b(d_ij) * (s_j - s_i)` over its neighbors `j`, where
//! `d_ij` is the unit edge direction (optionally rotated about the vertex
//! normal). The output has one block of `C` channels per basis function,
//! in basis-major order.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::geom;
use crate::mesh::{AdjacencyGraph, Mesh};
use crate::sh::{rotate_about_normal, sh_basis, ShBasisConfig};
use crate::{Error, Real, Result};

/// Perception output `Z`, shape `N x (basis_count * C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionBuffer<T> {
    pub values: Array2<T>,
}

/// Rows per rayon task.
const ROW_CHUNK: usize = 256;

/// The perception stage as a fixed linear operator on the state matrix.
///
/// Edge weights are evaluated once per (mesh, degree, orientation) and reused
/// for every step and for the adjoint used by backpropagation.
#[derive(Debug, Clone)]
pub struct PerceptionOperator<T> {
    graph: AdjacencyGraph,
    config: ShBasisConfig,
    orientation: T,
    /// `basis_count` weights per directed edge, CSR order.
    weights: Vec<T>,
    /// For directed edge `i -> j`, the CSR slot of `j -> i`.
    reverse: Vec<usize>,
    skipped_edges: usize,
}

impl<T: Real> PerceptionOperator<T> {
    pub fn new(
        mesh: &Mesh<T>,
        graph: &AdjacencyGraph,
        config: ShBasisConfig,
        orientation: T,
    ) -> Result<Self> {
        if graph.vertex_count() != mesh.vertex_count() {
            return Err(Error::Shape(format!(
                "graph has {} vertices, mesh has {}",
                graph.vertex_count(),
                mesh.vertex_count()
            )));
        }
        let nb = config.basis_count();
        let pos = mesh.positions();
        let normals = mesh.normals();
        let mut weights = vec![T::zero(); graph.neighbor_indices().len() * nb];
        let mut skipped = 0;
        let mut basis = [T::zero(); ShBasisConfig::MAX_BASIS];
        for i in 0..graph.vertex_count() {
            let start = graph.offsets()[i];
            for (k, &j) in graph.neighbors(i).iter().enumerate() {
                let Some(mut d) = geom::normalize(geom::sub(pos[j as usize], pos[i]), T::zero()) else {
                    skipped += 1;
                    continue;
                };
                if orientation != T::zero() {
                    d = rotate_about_normal(d, normals[i], orientation);
                }
                sh_basis(d, config, &mut basis);
                let e = start + k;
                weights[e * nb..(e + 1) * nb].copy_from_slice(&basis[..nb]);
            }
        }
        if skipped > 0 {
            log::warn!("perception: {skipped} directed edges join coincident vertices and carry zero weight");
        }
        let mut reverse = vec![0usize; graph.neighbor_indices().len()];
        for i in 0..graph.vertex_count() {
            let start = graph.offsets()[i];
            for (k, &j) in graph.neighbors(i).iter().enumerate() {
                let back = graph
                    .neighbors(j as usize)
                    .binary_search(&(i as u32))
                    .expect("adjacency is symmetric");
                reverse[start + k] = graph.offsets()[j as usize] + back;
            }
        }
        Ok(PerceptionOperator {
            graph: graph.clone(),
            config,
            orientation,
            weights,
            reverse,
            skipped_edges: skipped,
        })
    }

    pub fn config(&self) -> ShBasisConfig {
        self.config
    }

    pub fn orientation(&self) -> T {
        self.orientation
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Directed edges that were given zero weight because both endpoints coincide.
    pub fn skipped_edges(&self) -> usize {
        self.skipped_edges
    }

    /// Basis weights of the directed edge in CSR slot `edge`.
    pub fn edge_weights(&self, edge: usize) -> &[T] {
        let nb = self.config.basis_count();
        &self.weights[edge * nb..(edge + 1) * nb]
    }

    pub fn apply(&self, states: ArrayView2<T>) -> Result<PerceptionBuffer<T>> {
        let n = self.vertex_count();
        if states.nrows() != n {
            return Err(Error::Shape(format!("state has {} rows, mesh has {n} vertices", states.nrows())));
        }
        let c = states.ncols();
        let nb = self.config.basis_count();
        let s = states.as_standard_layout();
        let s = s.as_slice().unwrap();
        let mut out = Array2::zeros((n, nb * c));
        let width = nb * c;
        out.as_slice_mut()
            .unwrap()
            .par_chunks_mut(ROW_CHUNK * width)
            .enumerate()
            .for_each(|(chunk, rows)| {
                for (r, z) in rows.chunks_mut(width).enumerate() {
                    let i = chunk * ROW_CHUNK + r;
                    let si = &s[i * c..(i + 1) * c];
                    let start = self.graph.offsets()[i];
                    for (k, &j) in self.graph.neighbors(i).iter().enumerate() {
                        let sj = &s[j as usize * c..(j as usize + 1) * c];
                        let w = self.edge_weights(start + k);
                        for (b, &wb) in w.iter().enumerate() {
                            let zb = &mut z[b * c..(b + 1) * c];
                            for ((zv, &a), &bb) in zb.iter_mut().zip(sj).zip(si) {
                                *zv += wb * (a - bb);
                            }
                        }
                    }
                }
            });
        Ok(PerceptionBuffer { values: out })
    }

    /// Adjoint: maps a gradient w.r.t. `Z` to a gradient w.r.t. the states.
    /// Each message `w (s_j - s_i)` sends `w g` to `s_j` and `-w g` to `s_i`.
    pub fn apply_adjoint(&self, grad_z: ArrayView2<T>, channels: usize) -> Array2<T> {
        let n = self.vertex_count();
        let nb = self.config.basis_count();
        let width = nb * channels;
        assert_eq!(grad_z.dim(), (n, width), "adjoint input shape");
        let g = grad_z.as_standard_layout();
        let g = g.as_slice().unwrap();
        let mut out = Array2::zeros((n, channels));
        out.as_slice_mut()
            .unwrap()
            .par_chunks_mut(ROW_CHUNK * channels)
            .enumerate()
            .for_each(|(chunk, rows)| {
                for (r, gs) in rows.chunks_mut(channels).enumerate() {
                    let i = chunk * ROW_CHUNK + r;
                    let gi = &g[i * width..(i + 1) * width];
                    let start = self.graph.offsets()[i];
                    for (k, &j) in self.graph.neighbors(i).iter().enumerate() {
                        let gj = &g[j as usize * width..(j as usize + 1) * width];
                        let w_out = self.edge_weights(start + k);
                        let w_in = self.edge_weights(self.reverse[start + k]);
                        for b in 0..nb {
                            let (wo, wi) = (w_out[b], w_in[b]);
                            let gib = &gi[b * channels..(b + 1) * channels];
                            let gjb = &gj[b * channels..(b + 1) * channels];
                            for ((o, &a), &bb) in gs.iter_mut().zip(gjb).zip(gib) {
                                *o += wi * a - wo * bb;
                            }
                        }
                    }
                }
            });
        out
    }
}

/// One-shot perception; builds a [`PerceptionOperator`] and applies it.
pub fn perceive<T: Real>(
    states: ArrayView2<T>,
    mesh: &Mesh<T>,
    graph: &AdjacencyGraph,
    config: ShBasisConfig,
    orientation: T,
) -> Result<PerceptionBuffer<T>> {
    PerceptionOperator::new(mesh, graph, config, orientation)?.apply(states)
}

/// 2D filters that have a functional form over (polar angle, distance).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFilter {
    SobelX,
    SobelY,
    /// Isotropic unit weight on every neighbor, the graph Laplacian in
    /// message-passing form.
    Laplacian,
    /// Spherical-harmonics basis `b` with the offset embedded in the z = 0 plane.
    Sh(usize),
}

/// Sobel-x weight as a function of polar angle and distance.
pub fn grid_sobel_x<T: Real>(phi: T, r: T) -> T {
    if r == T::zero() {
        return T::zero();
    }
    let c = phi.cos();
    let sign = if c > T::zero() {
        T::one()
    } else if c < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    T::of(2.0) * sign * c * c
}

/// Evaluates `filter` at each integer offset `(dx, dy)`.
///
/// Angles are taken from the offset components directly (`cos phi = dx / r`)
/// so integer stencils come out exact.
pub fn grid_kernel_sample<T: Real>(filter: GridFilter, offsets: &[(i32, i32)]) -> Result<Vec<T>> {
    if let GridFilter::Sh(b) = filter {
        if b >= ShBasisConfig::MAX_BASIS {
            return Err(Error::InvalidArgument(format!("no spherical-harmonics basis {b}")));
        }
    }
    let two = T::of(2.0);
    Ok(offsets
        .iter()
        .map(|&(dx, dy)| {
            if dx == 0 && dy == 0 {
                return T::zero();
            }
            let (x, y) = (T::of(dx as f64), T::of(dy as f64));
            let r2 = x * x + y * y;
            match filter {
                GridFilter::SobelX => two * x.signum() * x * x / r2,
                GridFilter::SobelY => two * y.signum() * y * y / r2,
                GridFilter::Laplacian => T::one(),
                GridFilter::Sh(b) => {
                    let r = r2.sqrt();
                    let mut out = [T::zero(); ShBasisConfig::MAX_BASIS];
                    sh_basis([x / r, y / r, T::zero()], ShBasisConfig::new(2).unwrap(), &mut out);
                    out[b]
                }
            }
        })
        .collect())
}

/// The 3x3 neighborhood in row-major order with y pointing up:
/// row 0 is `dy = +1`, column 0 is `dx = -1`.
pub fn stencil_3x3() -> Vec<(i32, i32)> {
    let mut v = Vec::with_capacity(9);
    for dy in [1, 0, -1] {
        for dx in [-1, 0, 1] {
            v.push((dx, dy));
        }
    }
    v
}
