//! Exact noncommutative symplectic geometry of quiver path algebras.

pub mod algebra;
pub mod calogero;
pub mod darboux;
pub mod derivation;
pub mod dsl;
pub mod error;
pub mod forms;
pub mod matrix;
pub mod necklace;
pub mod path;
pub mod poly;
pub mod quiver;
pub mod random;
pub mod rep;
pub mod verify;
mod terms;

pub use algebra::{compose_paths, PathAlgebraElement};
pub use calogero::{cm_membership, cm_point, coadjoint_eval, CmPoint};
pub use darboux::{darboux_normalize, darboux_residual, FormalAutomorphism, TSeries};
pub use derivation::Derivation;
pub use dsl::{parse_expression, Expr};
pub use error::{Error, Result};
pub use forms::{derivation_from_oneform, symplectic_form, Form, FormWord, Letter, OmegaElement};
pub use matrix::Matrix;
pub use necklace::{
    bracket_tensor_oracle, hamiltonian_derivation, necklace_basis, necklace_bracket, project_to_necklace, Necklace,
    SymplecticData,
};
pub use path::Path;
pub use poly::Polynomial;
pub use quiver::{ArrowId, DoubledQuiver, Quiver, VertexId};
pub use rep::{
    moment_map, poisson_oracle, polarize, trace_evaluate, trace_polynomial, trace_vanishing_probe,
    verify_homomorphism, DimensionVector, EntryLayout, MomentValue, ProbeVerdict, RepPoint,
};

/// Exact coefficients used throughout.
pub type Rational = num_rational::BigRational;

/// `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}
