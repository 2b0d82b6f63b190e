//! Curvature tensors of spatial and space-time level sets.

pub mod jet;
pub mod stencils;
pub mod tensors;

pub use jet::{Jet, DEGENERACY_FLOOR};
pub use stencils::{field_jet, jet_from_field, node_jet, stencil_reach};
pub use tensors::{
    a_hat_explicit, a_hat_general, projection_shape_operator, spacetime_h_in_frame, spacetime_h_tensor,
    spacetime_shape_operator, spatial_curvature, spatial_curvature_in_frame, spatial_h_tensor, t_terms, upward_normals,
    Mode, ShapeReport,
};
