//! Training objectives as pure functions over caller-supplied tensors:
//! feature sets, embeddings and flow fields come from whatever network the
//! caller runs; nothing here evaluates a network.

mod appearance;
mod clip;
mod motion;
mod regularizers;
mod vector_field;

pub use appearance::{
    appearance_im, cosine_distance, l_m, l_m_grad, l_w, l_w_grad, relaxed_w, FeatureSet,
};
pub use clip::{
    average_embeddings, clip_directional, mes_dir_cosine, mes_dir_score, ClipBranches, EmbeddingVector,
};
pub use motion::{l_dir, l_dyn, l_mot, l_str, project_to_view, tangent_project, FlowField, MotionParams};
pub use regularizers::{
    hf_constraint, hf_constraint_from_laplacian, overflow_grad, overflow_loss, uniform_laplacian,
    HF_XI, OVERFLOW_WEIGHT,
};
pub use vector_field::{eval_vector_field, VectorFieldSpec};
