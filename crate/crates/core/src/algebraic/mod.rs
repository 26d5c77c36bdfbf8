//! Lattices from totally real quartic fields.
//!
//! Quartic fields use the equation order `Z[θ]` with basis `1, θ, θ², θ³`;
//! biquadratic fields `Q(√p, √q)` use `1, √p, √q, √pq`. Both embed
//! through the four real embeddings, so every nonzero point has all
//! coordinates nonzero (full diversity) and `±(1, …, 1)` is the unique
//! shortest vector by the AM–GM inequality on the norm.

mod field;
pub mod poly;
mod sublattice;

pub use field::{
    embed, random_totally_real_quartic, real_roots, AlgebraicLattice, FieldSpec, DEFAULT_COEFF_BOUND, MAX_DRAWS,
};
pub use sublattice::{sublattice_of, sublattice_procedure, SublatticeResult};
