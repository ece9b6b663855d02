//! Unsupervised comparison detectors: PCA reconstruction error and Local
//! Outlier Factor. Both consume the same encoded matrix as the
//! autoencoder.

mod lof;
mod pca;

pub use lof::{lof_scores, lof_scores_encoded, LofConfig, LRD_SENTINEL};
pub use pca::{jacobi_eigen, pca_fit, pca_fit_encoded, pca_score, PcaModel, JACOBI_OFF_TOL};

use crate::data::EncodedMatrix;

/// Copies an encoded matrix into a flat row-major f64 buffer.
pub(crate) fn matrix_to_f64(matrix: &EncodedMatrix) -> Vec<f64> {
    let d = matrix.dim();
    let mut data = vec![0.0f64; matrix.n_rows() * d];
    for i in 0..matrix.n_rows() {
        matrix.row_f64_into(i, &mut data[i * d..(i + 1) * d]);
    }
    data
}
