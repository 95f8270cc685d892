//! Sparse operators of the interior-penalty discretisations and the
//! assembled block systems.

pub mod oracle;
mod operators;
mod system;

pub use operators::{
    acoustic_penalty, assemble_acoustic, assemble_coupling, assemble_divdiv, assemble_elastic, assemble_mass,
    assemble_robin, body_load, Penalties,
};
pub(crate) use operators::{face_penalty, face_role, FaceOp, FaceRole};
pub use system::{build_block_system, BlockLayout, BlockSystem, Coefficients, LoadTerm, ProblemKind, ScalarField, VectorField};

#[cfg(test)]
mod tests;
