//! Mesh neural cellular automata.
//!
//! Every vertex of a triangle mesh is a cell holding a small state vector.
//! Cells perceive their neighbors through spherical-harmonics weighted
//! differences and update with a shared two-layer MLP applied to a random
//! half of the cells each step. The crate covers the mesh substrate, the
//! perception operator, the update rule with grafting and brushes, the loss
//! functions, a backprop-through-time trainer and the file formats.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root pick the usual precision for each role.

pub mod engine;
pub mod error;
pub mod geom;
pub mod io;
pub mod losses;
pub mod mesh;
pub mod perception;
pub mod scalar;
pub mod sh;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh32 = mesh::Mesh<f32>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type Weights32 = engine::ModelWeights<f32>;
pub type Weights64 = engine::ModelWeights<f64>;
pub type Simulation32 = engine::Simulation<f32>;
pub type Simulation64 = engine::Simulation<f64>;
pub type States32 = engine::CellStateBuffer<f32>;
pub type States64 = engine::CellStateBuffer<f64>;
