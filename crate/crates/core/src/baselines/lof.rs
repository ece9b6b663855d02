//! Local Outlier Factor over Euclidean distances, straight from the
//! Breunig et al. definitions with brute-force all-pairs distances.
//!
//! For every point p with k-distance kd(p) and neighborhood
//! N(p) = { o != p : d(p,o) <= kd(p) } (ties included):
//!
//! ```text
//! reach(p, o) = max(kd(o), d(p, o))
//! lrd(p)      = |N(p)| / sum_{o in N(p)} reach(p, o)
//! LOF(p)      = (sum_{o in N(p)} lrd(o) / |N(p)|) / lrd(p)
//! ```
//!
//! Reductions run over neighborhoods in ascending point index and
//! distances sum coordinates in ascending order, so results are exactly
//! reproducible. When every reachability distance of a point is zero
//! (duplicate-only neighborhoods) its lrd is pinned to [`LRD_SENTINEL`];
//! a dataset of pure duplicates then scores LOF = 1 everywhere.

use serde::{Deserialize, Serialize};

use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::util::{default_threads, parallel_fill};

/// Finite stand-in for the infinite density of an all-duplicate
/// neighborhood.
pub const LRD_SENTINEL: f64 = 1e12;

/// LOF parameters; distances are Euclidean over the encoded rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LofConfig {
    pub k: usize,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let diff = x - y;
        sum += diff * diff;
    }
    sum.sqrt()
}

/// LOF value per row. Requires 1 <= k < N.
pub fn lof_scores(data: &[f64], n_rows: usize, n_cols: usize, config: LofConfig) -> Result<Vec<f64>> {
    if data.len() != n_rows * n_cols || n_cols == 0 {
        return Err(Error::DimensionMismatch {
            expected: n_rows * n_cols,
            actual: data.len(),
        });
    }
    let k = config.k;
    if k == 0 || k >= n_rows {
        return Err(Error::RejectedInput(format!(
            "k must lie in 1..{n_rows}, got {k}"
        )));
    }
    let row = |i: usize| &data[i * n_cols..(i + 1) * n_cols];
    let threads = default_threads();

    // Pass 1: k-distance of every point (distance to its k-th nearest
    // other point).
    let mut k_dist = vec![0.0f64; n_rows];
    parallel_fill(&mut k_dist, threads, |p| {
        let mut dists: Vec<f64> = (0..n_rows)
            .filter(|&o| o != p)
            .map(|o| distance(row(p), row(o)))
            .collect();
        let (_, kth, _) = dists.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
        *kth
    });

    // Pass 2: local reachability density.
    let mut lrd = vec![0.0f64; n_rows];
    parallel_fill(&mut lrd, threads, |p| {
        let mut reach_sum = 0.0;
        let mut count = 0usize;
        for o in 0..n_rows {
            if o == p {
                continue;
            }
            let d = distance(row(p), row(o));
            if d <= k_dist[p] {
                reach_sum += k_dist[o].max(d);
                count += 1;
            }
        }
        if reach_sum > 0.0 {
            count as f64 / reach_sum
        } else {
            LRD_SENTINEL
        }
    });

    // Pass 3: the factor itself.
    let mut lof = vec![0.0f64; n_rows];
    parallel_fill(&mut lof, threads, |p| {
        let mut lrd_sum = 0.0;
        let mut count = 0usize;
        for (o, &lrd_o) in lrd.iter().enumerate() {
            if o == p {
                continue;
            }
            if distance(row(p), row(o)) <= k_dist[p] {
                lrd_sum += lrd_o;
                count += 1;
            }
        }
        (lrd_sum / count as f64) / lrd[p]
    });
    Ok(lof)
}

/// [`lof_scores`] over an encoded matrix.
pub fn lof_scores_encoded(matrix: &EncodedMatrix, config: LofConfig) -> Result<Vec<f64>> {
    let data = super::matrix_to_f64(matrix);
    lof_scores(&data, matrix.n_rows(), matrix.dim(), config)
}
