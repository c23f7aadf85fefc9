//! Mode-wise compressed sensing of sparse matrices and tensors.
//!
//! A `d`-mode signal `X` is sampled as `Y = X x_1 U_1 x_2 U_2 ... x_d U_d`
//! with one small measurement matrix per mode, and recovered by l1
//! minimization either stage by stage ([`recovery::gtcs_s`]) or through a
//! rank-one decomposition of `Y` whose factors are recovered independently
//! ([`recovery::gtcs_p`]). A Kronecker-operator baseline ([`recovery::kcs_recover`])
//! and a benchmark harness ([`pipeline`]) are included.
//!
//! Tensors are stored column-major: the first index varies fastest.

pub mod decomp;
pub mod error;
pub mod io;
pub mod l1;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod sensing;
pub mod tensor;

pub use error::{Error, Result};
pub use l1::{L1Problem, L1Solution, L1Solver, SolverSettings};
pub use sensing::{Distribution, MeasurementEnsemble};
pub use tensor::{DenseMatrix, DenseTensor};
