//! PCA outlier scoring: squared residual off the top-c principal
//! subspace, with the eigendecomposition done by cyclic Jacobi rotations.

use crate::data::EncodedMatrix;
use crate::error::{Error, Result};

/// Jacobi sweeps stop once the off-diagonal Frobenius norm falls below
/// this bound.
pub const JACOBI_OFF_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Column means and the top-c orthonormal principal axes of a dataset.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `c` axes, each of length D, ordered by descending eigenvalue.
    pub axes: Vec<Vec<f64>>,
    /// All D eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn components(&self) -> usize {
        self.axes.len()
    }
}

/// Eigendecomposition of a symmetric matrix (row-major, d x d) by cyclic
/// Jacobi rotations. Returns (eigenvalues, eigenvectors as rows), sorted
/// by descending eigenvalue.
pub fn jacobi_eigen(matrix: &[f64], d: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if matrix.len() != d * d || d == 0 {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    // v holds the accumulated rotations; its COLUMNS are eigenvectors.
    let mut v = vec![0.0f64; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let off_norm = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                sum += 2.0 * a[p * d + q] * a[p * d + q];
            }
        }
        sum.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..d {
                    let aip = a[i * d + p];
                    let aiq = a[i * d + q];
                    a[i * d + p] = c * aip - s * aiq;
                    a[i * d + q] = s * aip + c * aiq;
                }
                for i in 0..d {
                    let api = a[p * d + i];
                    let aqi = a[q * d + i];
                    a[p * d + i] = c * api - s * aqi;
                    a[q * d + i] = s * api + c * aqi;
                }
                for i in 0..d {
                    let vip = v[i * d + p];
                    let viq = v[i * d + q];
                    v[i * d + p] = c * vip - s * viq;
                    v[i * d + q] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > JACOBI_OFF_TOL {
        return Err(Error::Numerical(format!(
            "Jacobi eigendecomposition did not reach off-diagonal norm {JACOBI_OFF_TOL} \
             within {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| {
        a[y * d + y]
            .partial_cmp(&a[x * d + x])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * d + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..d).map(|row| v[row * d + col]).collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// Fits PCA: column means, sample covariance, Jacobi eigendecomposition,
/// and the top-c eigenvectors as axes. Requires N > c and c < D.
pub fn pca_fit(data: &[f64], n_rows: usize, n_cols: usize, c: usize) -> Result<PcaModel> {
    if data.len() != n_rows * n_cols || n_rows == 0 || n_cols == 0 {
        return Err(Error::DimensionMismatch {
            expected: n_rows * n_cols,
            actual: data.len(),
        });
    }
    if c == 0 || c >= n_cols {
        return Err(Error::RejectedInput(format!(
            "component count must lie in 1..{n_cols}, got {c}"
        )));
    }
    if n_rows <= c {
        return Err(Error::RejectedInput(format!(
            "need more rows ({n_rows}) than components ({c})"
        )));
    }

    let mut mean = vec![0.0f64; n_cols];
    for row in data.chunks_exact(n_cols) {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n_rows as f64;
    }

    let denom = if n_rows > 1 { (n_rows - 1) as f64 } else { 1.0 };
    let mut cov = vec![0.0f64; n_cols * n_cols];
    let mut centered = vec![0.0f64; n_cols];
    for row in data.chunks_exact(n_cols) {
        for (cell, (&x, &m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *cell = x - m;
        }
        for i in 0..n_cols {
            let ci = centered[i];
            if ci != 0.0 {
                for j in i..n_cols {
                    cov[i * n_cols + j] += ci * centered[j];
                }
            }
        }
    }
    for i in 0..n_cols {
        for j in i..n_cols {
            let value = cov[i * n_cols + j] / denom;
            cov[i * n_cols + j] = value;
            cov[j * n_cols + i] = value;
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(&cov, n_cols)?;
    Ok(PcaModel {
        mean,
        axes: eigenvectors.into_iter().take(c).collect(),
        eigenvalues,
    })
}

/// [`pca_fit`] over an encoded matrix.
pub fn pca_fit_encoded(matrix: &EncodedMatrix, c: usize) -> Result<PcaModel> {
    let data = super::matrix_to_f64(matrix);
    pca_fit(&data, matrix.n_rows(), matrix.dim(), c)
}

/// Squared residual of `row` off the retained subspace:
/// `||(x - mean) - P P^T (x - mean)||^2`, evaluated through the
/// orthonormal-basis identity `||r||^2 - sum_c (v_c . r)^2`.
pub fn pca_score(model: &PcaModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: row.len(),
        });
    }
    let mut norm_sq = 0.0;
    let centered: Vec<f64> = row
        .iter()
        .zip(&model.mean)
        .map(|(&x, &m)| {
            let v = x - m;
            norm_sq += v * v;
            v
        })
        .collect();
    let mut projected_sq = 0.0;
    for axis in &model.axes {
        let coef: f64 = axis.iter().zip(&centered).map(|(&a, &r)| a * r).sum();
        projected_sq += coef * coef;
    }
    Ok((norm_sq - projected_sq).max(0.0))
}
