//! Unit Lipschitz vector fields and scalar test functions.

mod descriptor;
mod scalar;
mod vector;

pub use descriptor::Descriptor;
pub use scalar::{
    catalog_scalar_fields, unit_ball_volume, LpNorm, NormProvenance, Regularity, ScalarField,
    ScalarFn, BUMP_CUTOFF_SIGMAS,
};
pub use vector::{
    catalog_vector_fields, estimate_lipschitz, make_phase_field, PairSampler, PhaseFn,
    UnitVectorField, VectorFn,
};

pub(crate) use vector::uniform_in_box;
