//! Dense complex linear algebra for small dimensions (total dimension ≤ 16):
//! matrices, Hermitian eigendecomposition, matrix functions, entropies.
//!
//! All logarithms are base 2; entropies are in bits.

mod eigen;
mod functions;
mod matrix;
pub mod random;
mod state;

pub use eigen::HermitianEigen;
pub use functions::{
    entropy_bits, entropy_psd, matrix_pinv_sqrt, matrix_sqrt, partial_trace, relative_entropy, shannon_entropy,
    support_projector, von_neumann_entropy, EIG_ZERO, SUPPORT_LEAK_TOL,
};
pub use matrix::{pauli, tensor, tensor_all, ComplexMatrix, C64, ONE, ZERO};
pub use state::{DensityMatrix, ProbabilityVector, HERMITIAN_TOL, PROB_CLIP_TOL, PSD_TOL, TRACE_TOL};
