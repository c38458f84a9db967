//! Lattice sheaf cohomology of hyperplane arrangements.
//!
//! Everything is exact: scalars live in ℚ or a prime field, and every
//! dimension reported is a rank of an explicit matrix.

pub mod arrangement;
pub mod cech;
pub mod derivations;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod truncation;

pub use arrangement::{catalog, catalog_from_spec, parse_arrangement, Arrangement, FormProduct, Hyperplane};
pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use lattice::{IntersectionLattice, LatticeElement};
pub use linalg::{ExactMatrix, SparseVec, Subspace};
pub use derivations::{Derivations, DerivationSpace, ExponentMultiset, FreenessCertificate};
