//! Dense matrix kernel: norms, column operations, Jacobi SVD, seeded sampling
//! and the on-disk matrix container.

mod io;
mod matrix;
mod random;
mod svd;

pub use io::{format_matrix, parse_matrix, read_matrix, write_matrix, MATRIX_MAGIC};
pub use matrix::{
    axpy, dot, induced_l1_norm, l1_distance, l1_norm, norm2, normalize_columns_l1,
    pairwise_l1_distances, DenseMatrix,
};
pub use random::{derive_seed, sample_dirichlet, RngStream, RNG_ALGORITHM};
pub use svd::{reduced_svd, Svd, MAX_SWEEPS};
