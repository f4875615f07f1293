//! Command-line front end and websocket service for the `meshnca` engine.

pub mod bench;
pub mod mesh_source;
pub mod protocol;
pub mod server;
pub mod session;
pub mod target_csv;

pub use mesh_source::MeshSource;
