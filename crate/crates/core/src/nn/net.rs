//! Forward pass, cross-entropy loss, backpropagation, and reconstruction
//! error.

use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::nn::{Gradients, LayerGrads, LayerSpec, NetworkParams};

/// Bottleneck activations of one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector(pub Vec<f64>);

/// Per-layer post-activation values kept for backpropagation.
///
/// `activations[0]` is the input batch; `activations[l]` is the output of
/// weight layer `l`. All buffers are row-major `rows x layer_size`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
    rows: usize,
}

impl ForwardCache {
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Reconstruction batch (output of the final layer).
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache has layers")
    }

    /// Activation buffer after weight layer `l` (0 = input).
    pub fn activation(&self, l: usize) -> &[f64] {
        &self.activations[l]
    }

    /// Bottleneck activations, one vector per batch row.
    pub fn latents(&self, spec: &LayerSpec) -> Vec<LatentVector> {
        let z = spec.bottleneck_size();
        let buf = &self.activations[spec.bottleneck_index()];
        (0..self.rows)
            .map(|r| LatentVector(buf[r * z..(r + 1) * z].to_vec()))
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Runs the batch through the network: hidden layers apply
/// LReLU(v) = v for v >= 0 else slope * v, the output layer a sigmoid.
///
/// `batch` is row-major with `input_dim` columns; the returned cache
/// holds every layer's activations for a later [`backward`] call.
pub fn forward(params: &NetworkParams, spec: &LayerSpec, batch: &[f64]) -> Result<ForwardCache> {
    let d = spec.input_dim();
    if batch.is_empty() || !batch.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: batch.len(),
        });
    }
    params.validate(spec).map_err(|e| {
        Error::RejectedInput(format!("parameters do not match the layer spec: {e}"))
    })?;
    let rows = batch.len() / d;
    let slope = spec.leaky_slope();
    let last = params.layers.len() - 1;

    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(params.layers.len() + 1);
    activations.push(batch.to_vec());
    for (l, layer) in params.layers.iter().enumerate() {
        let prev = activations.last().unwrap();
        let (n_in, n_out) = (layer.in_dim, layer.out_dim);
        let mut z = vec![0.0f64; rows * n_out];
        for r in 0..rows {
            let out_row = &mut z[r * n_out..(r + 1) * n_out];
            out_row.copy_from_slice(&layer.biases);
            let in_row = &prev[r * n_in..(r + 1) * n_in];
            for (i, &x) in in_row.iter().enumerate() {
                if x != 0.0 {
                    let w_row = &layer.weights[i * n_out..(i + 1) * n_out];
                    for (acc, &w) in out_row.iter_mut().zip(w_row) {
                        *acc += x * w;
                    }
                }
            }
            if l == last {
                for v in out_row.iter_mut() {
                    *v = sigmoid(*v);
                }
            } else {
                for v in out_row.iter_mut() {
                    if *v < 0.0 {
                        *v *= slope;
                    }
                }
            }
        }
        activations.push(z);
    }
    Ok(ForwardCache { activations, rows })
}

/// Binary cross-entropy of one row:
/// `-sum_j [x_j ln xhat_j + (1 - x_j) ln(1 - xhat_j)]`, with `xhat`
/// clamped into `[log_clamp, 1 - log_clamp]` before the logarithms.
///
/// Every component of `x` must be exactly 0 or 1.
pub fn bce_loss(x: &[f64], xhat: &[f64], log_clamp: f64) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    let mut total = 0.0;
    for (&t, &p) in x.iter().zip(xhat) {
        let p = p.clamp(log_clamp, 1.0 - log_clamp);
        if t == 1.0 {
            total -= p.ln();
        } else if t == 0.0 {
            total -= (1.0 - p).ln();
        } else {
            return Err(Error::RejectedInput(format!(
                "target component must be 0 or 1, got {t}"
            )));
        }
    }
    Ok(total)
}

/// Exact gradients of the batch-mean BCE loss with respect to every
/// weight and bias.
///
/// The sigmoid + cross-entropy output gradient collapses to
/// `(xhat - x) / rows`; the LReLU derivative is 1 for positive
/// pre-activations, the slope for negative ones, and 1 at exactly zero.
pub fn backward(
    params: &NetworkParams,
    spec: &LayerSpec,
    batch: &[f64],
    cache: &ForwardCache,
) -> Result<Gradients> {
    let d = spec.input_dim();
    if cache.activations.len() != params.layers.len() + 1
        || cache.activations[0].len() != batch.len()
        || batch.len() != cache.rows * d
        || cache.activations[0] != batch
    {
        return Err(Error::RejectedInput(
            "activation cache does not correspond to this batch".into(),
        ));
    }
    for (l, layer) in params.layers.iter().enumerate() {
        if cache.activations[l + 1].len() != cache.rows * layer.out_dim {
            return Err(Error::RejectedInput(
                "activation cache does not match the network shape".into(),
            ));
        }
    }
    let rows = cache.rows;
    let slope = spec.leaky_slope();
    let inv_n = 1.0 / rows as f64;

    // Output delta: (xhat - x) / n.
    let output = cache.output();
    let mut delta: Vec<f64> = output
        .iter()
        .zip(batch)
        .map(|(&p, &t)| (p - t) * inv_n)
        .collect();

    let mut grads = Gradients::zeros_like(params);
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let (n_in, n_out) = (layer.in_dim, layer.out_dim);
        let prev = &cache.activations[l];
        let lg: &mut LayerGrads = &mut grads.layers[l];
        for r in 0..rows {
            let delta_row = &delta[r * n_out..(r + 1) * n_out];
            let prev_row = &prev[r * n_in..(r + 1) * n_in];
            for (o, &dv) in delta_row.iter().enumerate() {
                lg.d_biases[o] += dv;
            }
            for (i, &a) in prev_row.iter().enumerate() {
                if a != 0.0 {
                    let dw_row = &mut lg.d_weights[i * n_out..(i + 1) * n_out];
                    for (dw, &dv) in dw_row.iter_mut().zip(delta_row) {
                        *dw += a * dv;
                    }
                }
            }
        }
        if l > 0 {
            // Propagate to the previous layer and apply the LReLU
            // derivative read off the sign of its post-activation.
            let mut next_delta = vec![0.0f64; rows * n_in];
            for r in 0..rows {
                let delta_row = &delta[r * n_out..(r + 1) * n_out];
                let prev_row = &prev[r * n_in..(r + 1) * n_in];
                let nd_row = &mut next_delta[r * n_in..(r + 1) * n_in];
                for (i, nd) in nd_row.iter_mut().enumerate() {
                    let w_row = &layer.weights[i * n_out..(i + 1) * n_out];
                    let mut acc = 0.0;
                    for (&w, &dv) in w_row.iter().zip(delta_row) {
                        acc += w * dv;
                    }
                    *nd = if prev_row[i] < 0.0 { acc * slope } else { acc };
                }
            }
            delta = next_delta;
        }
    }
    Ok(grads)
}

/// Mean squared component-wise difference between one encoded row and its
/// reconstruction, divided by the encoded dimension D.
pub fn reconstruction_error(
    params: &NetworkParams,
    spec: &LayerSpec,
    row: &[f64],
) -> Result<f64> {
    if row.len() != spec.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.input_dim(),
            actual: row.len(),
        });
    }
    let cache = forward(params, spec, row)?;
    Ok(squared_error_mean(row, cache.output()))
}

fn squared_error_mean(x: &[f64], xhat: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&t, &p) in x.iter().zip(xhat) {
        let diff = t - p;
        total += diff * diff;
    }
    total / x.len() as f64
}

/// Reconstruction error for every row of an encoded dataset under one
/// trained model, in row order. Rows are processed in fixed-size batches.
pub fn reconstruction_errors(
    params: &NetworkParams,
    spec: &LayerSpec,
    matrix: &EncodedMatrix,
    batch_size: usize,
) -> Result<Vec<f64>> {
    let d = spec.input_dim();
    if matrix.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: matrix.dim(),
        });
    }
    let batch_size = batch_size.max(1);
    let mut errors = Vec::with_capacity(matrix.n_rows());
    let mut buf = vec![0.0f64; batch_size * d];
    let mut start = 0;
    while start < matrix.n_rows() {
        let end = (start + batch_size).min(matrix.n_rows());
        let rows = end - start;
        for (r, i) in (start..end).enumerate() {
            matrix.row_f64_into(i, &mut buf[r * d..(r + 1) * d]);
        }
        let cache = forward(params, spec, &buf[..rows * d])?;
        let output = cache.output();
        for r in 0..rows {
            errors.push(squared_error_mean(
                &buf[r * d..(r + 1) * d],
                &output[r * d..(r + 1) * d],
            ));
        }
        start = end;
    }
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{glorot_init, DenseLayer};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CLAMP: f64 = 1e-7;

    fn zero_params(spec: &LayerSpec) -> NetworkParams {
        let sizes = spec.layer_sizes();
        NetworkParams {
            layers: (0..spec.weight_layer_count())
                .map(|l| DenseLayer {
                    in_dim: sizes[l],
                    out_dim: sizes[l + 1],
                    weights: vec![0.0; sizes[l] * sizes[l + 1]],
                    biases: vec![0.0; sizes[l + 1]],
                })
                .collect(),
        }
    }

    #[test]
    fn forward_all_zero_params_gives_half() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let params = zero_params(&spec);
        let cache = forward(&params, &spec, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        for &v in cache.output() {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn forward_matches_hand_computed_example() {
        // 2-1-2 net, encoder weights [1, -1], decoder [1, 1], zero biases,
        // input (1, 0): hidden = 1, output = (sigmoid(1), sigmoid(1)).
        let spec = LayerSpec::new(vec![2, 1, 2], 0.4).unwrap();
        let params = NetworkParams {
            layers: vec![
                DenseLayer {
                    in_dim: 2,
                    out_dim: 1,
                    weights: vec![1.0, -1.0],
                    biases: vec![0.0],
                },
                DenseLayer {
                    in_dim: 1,
                    out_dim: 2,
                    weights: vec![1.0, 1.0],
                    biases: vec![0.0, 0.0],
                },
            ],
        };
        let cache = forward(&params, &spec, &[1.0, 0.0]).unwrap();
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((cache.output()[0] - expected).abs() < 1e-12);
        assert!((cache.output()[1] - expected).abs() < 1e-12);
        assert!((expected - 0.7311).abs() < 1e-4);
        assert_eq!(cache.latents(&spec)[0].0, vec![1.0]);
    }

    #[test]
    fn leaky_relu_scales_negative_preactivations() {
        // Input (0, 1) through encoder weights [1, -1] gives hidden
        // pre-activation -1, so LReLU with a = 0.4 yields -0.4.
        let spec = LayerSpec::new(vec![2, 1, 2], 0.4).unwrap();
        let mut params = zero_params(&spec);
        params.layers[0].weights = vec![1.0, -1.0];
        let cache = forward(&params, &spec, &[0.0, 1.0]).unwrap();
        assert_eq!(cache.latents(&spec)[0].0, vec![-0.4]);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let params = zero_params(&spec);
        assert!(matches!(
            forward(&params, &spec, &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bce_matches_direct_evaluation() {
        // x = (1, 0), xhat = (0.5, 0.5): loss = 2 ln 2.
        let loss = bce_loss(&[1.0, 0.0], &[0.5, 0.5], CLAMP).unwrap();
        assert!((loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((loss - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn bce_at_clamp_limits_is_nearly_zero() {
        let loss = bce_loss(&[1.0, 0.0], &[1.0 - CLAMP, CLAMP], CLAMP).unwrap();
        assert!(loss > 0.0);
        assert!((loss - 2.0 * CLAMP).abs() < 1e-12);
    }

    #[test]
    fn bce_rejects_non_binary_target() {
        assert!(matches!(
            bce_loss(&[0.5], &[0.5], CLAMP),
            Err(Error::RejectedInput(_))
        ));
    }

    proptest! {
        #[test]
        fn bce_bit_complement_symmetry(
            bits in proptest::collection::vec(0u8..2, 1..12),
            probs in proptest::collection::vec(0.001f64..0.999, 12)
        ) {
            let x: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
            let xhat = &probs[..x.len()];
            let flipped_x: Vec<f64> = x.iter().map(|&b| 1.0 - b).collect();
            let flipped_hat: Vec<f64> = xhat.iter().map(|&p| 1.0 - p).collect();
            let a = bce_loss(&x, xhat, CLAMP).unwrap();
            let b = bce_loss(&flipped_x, &flipped_hat, CLAMP).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn reconstruction_error_is_permutation_invariant(
            pairs in proptest::collection::vec((0u8..2, 0.0f64..1.0), 2..10),
            shift in 1usize..8
        ) {
            let x: Vec<f64> = pairs.iter().map(|&(b, _)| b as f64).collect();
            let xhat: Vec<f64> = pairs.iter().map(|&(_, p)| p).collect();
            let n = x.len();
            let rot = |v: &[f64]| -> Vec<f64> {
                (0..n).map(|i| v[(i + shift) % n]).collect()
            };
            let direct = squared_error_mean(&x, &xhat);
            let rotated = squared_error_mean(&rot(&x), &rot(&xhat));
            prop_assert!((direct - rotated).abs() <= 1e-15);
        }
    }

    #[test]
    fn reconstruction_error_examples() {
        // Identity reconstruction has zero error.
        assert_eq!(squared_error_mean(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        // D = 4 worked case: (0.01 + 0.01 + 0.04 + 0.04) / 4 = 0.025.
        let e = squared_error_mean(&[1.0, 0.0, 0.0, 1.0], &[0.9, 0.1, 0.2, 0.8]);
        assert!((e - 0.025).abs() < 1e-15);
    }

    fn total_mean_loss(
        params: &NetworkParams,
        spec: &LayerSpec,
        batch: &[f64],
        rows: usize,
    ) -> f64 {
        let cache = forward(params, spec, batch).unwrap();
        let d = spec.input_dim();
        let mut total = 0.0;
        for r in 0..rows {
            total += bce_loss(
                &batch[r * d..(r + 1) * d],
                &cache.output()[r * d..(r + 1) * d],
                CLAMP,
            )
            .unwrap();
        }
        total / rows as f64
    }

    #[test]
    fn backward_matches_central_finite_differences() {
        // Random 6-3-6 net, batch of 4 binary rows.
        let spec = LayerSpec::new(vec![6, 3, 6], 0.4).unwrap();
        let mut params = glorot_init(&spec, 99);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows = 4;
        let batch: Vec<f64> = (0..rows * 6)
            .map(|_| if rng.gen_bool(0.4) { 1.0 } else { 0.0 })
            .collect();
        let cache = forward(&params, &spec, &batch).unwrap();
        let grads = backward(&params, &spec, &batch, &cache).unwrap();

        let h = 1e-4;
        for l in 0..params.layers.len() {
            for wi in 0..params.layers[l].weights.len() {
                let orig = params.layers[l].weights[wi];
                params.layers[l].weights[wi] = orig + h;
                let plus = total_mean_loss(&params, &spec, &batch, rows);
                params.layers[l].weights[wi] = orig - h;
                let minus = total_mean_loss(&params, &spec, &batch, rows);
                params.layers[l].weights[wi] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.layers[l].d_weights[wi];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom <= 1e-6,
                    "layer {l} weight {wi}: analytic {analytic} numeric {numeric}"
                );
            }
            for bi in 0..params.layers[l].biases.len() {
                let orig = params.layers[l].biases[bi];
                params.layers[l].biases[bi] = orig + h;
                let plus = total_mean_loss(&params, &spec, &batch, rows);
                params.layers[l].biases[bi] = orig - h;
                let minus = total_mean_loss(&params, &spec, &batch, rows);
                params.layers[l].biases[bi] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.layers[l].d_biases[bi];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom <= 1e-6,
                    "layer {l} bias {bi}: analytic {analytic} numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_saturated_minimum() {
        // Huge decoder weights push the sigmoid output to the target
        // within clamp resolution; all gradients collapse.
        let spec = LayerSpec::new(vec![2, 1, 2], 0.4).unwrap();
        let params = NetworkParams {
            layers: vec![
                DenseLayer {
                    in_dim: 2,
                    out_dim: 1,
                    weights: vec![1.0, 1.0],
                    biases: vec![0.0],
                },
                DenseLayer {
                    in_dim: 1,
                    out_dim: 2,
                    weights: vec![50.0, -50.0],
                    biases: vec![0.0, 0.0],
                },
            ],
        };
        let batch = [1.0, 0.0];
        let cache = forward(&params, &spec, &batch).unwrap();
        let grads = backward(&params, &spec, &batch, &cache).unwrap();
        for lg in &grads.layers {
            for g in lg.d_weights.iter().chain(&lg.d_biases) {
                assert!(g.abs() <= 1e-6, "gradient {g} not at stationary point");
            }
        }
    }

    #[test]
    fn duplicated_batch_leaves_mean_gradient_unchanged() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let params = glorot_init(&spec, 17);
        let batch = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let doubled: Vec<f64> = batch.iter().chain(batch.iter()).copied().collect();
        let g1 = backward(&params, &spec, &batch, &forward(&params, &spec, &batch).unwrap()).unwrap();
        let g2 =
            backward(&params, &spec, &doubled, &forward(&params, &spec, &doubled).unwrap()).unwrap();
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (x, y) in a.d_weights.iter().zip(&b.d_weights) {
                assert!((x - y).abs() <= 1e-15, "{x} vs {y}");
            }
            for (x, y) in a.d_biases.iter().zip(&b.d_biases) {
                assert!((x - y).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn backward_rejects_mismatched_cache() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let params = glorot_init(&spec, 3);
        let batch_a = [1.0, 0.0, 0.0, 1.0];
        let batch_b = [0.0, 1.0, 1.0, 0.0];
        let cache = forward(&params, &spec, &batch_a).unwrap();
        assert!(matches!(
            backward(&params, &spec, &batch_b, &cache),
            Err(Error::RejectedInput(_))
        ));
    }
}
