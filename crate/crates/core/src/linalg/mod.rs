//! Dense linear algebra: row-major matrices and symmetric indefinite LDLᵀ.

mod ldlt;
mod mat;

pub use ldlt::{ldlt_factor, ldlt_solve, Inertia, LdltFactorization, Pivot};
pub use mat::Mat;
