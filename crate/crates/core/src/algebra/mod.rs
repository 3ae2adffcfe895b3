//! Dense complex linear algebra: matrices, Kronecker products, the matrix
//! exponential, Jacobi SVD and Hermitian eigensolver, and row-major
//! vectorization of density operators.

mod decomp;
mod expm;
mod matrix;

pub use decomp::{eigh, min_eigenvalue, svd, Eigh, Svd};
pub use expm::{matexp, solve, unitary};
pub use matrix::{
    devectorize, kron, pauli_x, pauli_y, pauli_z, sigma_minus, sigma_plus, vectorize,
    ComplexMatrix, C64, I, ONE, ZERO,
};
