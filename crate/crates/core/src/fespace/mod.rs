//! Element-wise polynomial spaces, modal bases and polygon quadrature.

pub mod basis;
pub mod quadrature;
mod space;

pub use basis::{eval_modal, mode_indices, n_modes};
pub use quadrature::{element_quadrature, face_quadrature, gauss_legendre, polygon_rule, segment_rule, triangle_rule, QuadratureRule};
pub use space::{DgSpace, Tabulation};
