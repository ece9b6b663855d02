//! Dense feed-forward autoencoder trained from scratch.
//!
//! The network is a mirror-symmetric encoder/decoder stack of fully
//! connected layers. Hidden layers use a leaky rectifier, the output
//! layer a sigmoid; training minimizes mean binary cross-entropy with
//! bias-corrected adaptive moment estimation. Everything runs in f64 and
//! is fully deterministic given a seed.

mod checkpoint;
mod net;
mod optim;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use net::{
    backward, bce_loss, forward, reconstruction_error, reconstruction_errors, ForwardCache,
    LatentVector,
};
pub use optim::{adam_step, AdamState};
pub use train::{train, train_with_observer, EpochRecord, TrainConfig, TrainTrace};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-layer activation kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    LeakyRelu { slope: f64 },
}

/// Output-layer activation kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Sigmoid,
}

/// Layer sizes and activations of a reconstruction network.
///
/// Sizes run input -> hidden... -> bottleneck -> ...hidden -> output and
/// must be mirror-symmetric about the central bottleneck, which has to be
/// strictly smaller than the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    layer_sizes: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
}

impl LayerSpec {
    /// Validates and constructs a spec with LReLU(`slope`) hidden layers
    /// and a sigmoid output.
    pub fn new(layer_sizes: Vec<usize>, slope: f64) -> Result<LayerSpec> {
        if layer_sizes.len() < 3 || layer_sizes.len().is_multiple_of(2) {
            return Err(Error::Config(format!(
                "layer sizes must be an odd-length list of at least 3 entries, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }
        let n = layer_sizes.len();
        for i in 0..n / 2 {
            if layer_sizes[i] != layer_sizes[n - 1 - i] {
                return Err(Error::Config(format!(
                    "layer sizes must be mirror-symmetric: size[{i}]={} vs size[{}]={}",
                    layer_sizes[i],
                    n - 1 - i,
                    layer_sizes[n - 1 - i]
                )));
            }
        }
        if layer_sizes[n / 2] >= layer_sizes[0] {
            return Err(Error::Config(format!(
                "bottleneck size {} must be smaller than the input size {}",
                layer_sizes[n / 2],
                layer_sizes[0]
            )));
        }
        if !(slope > 0.0 && slope < 1.0) {
            return Err(Error::Config(format!(
                "leaky slope must lie in (0, 1), got {slope}"
            )));
        }
        Ok(LayerSpec {
            layer_sizes,
            hidden_activation: HiddenActivation::LeakyRelu { slope },
            output_activation: OutputActivation::Sigmoid,
        })
    }

    /// Re-validates a spec that was deserialized from a checkpoint.
    pub fn validate(&self) -> Result<()> {
        let HiddenActivation::LeakyRelu { slope } = self.hidden_activation;
        LayerSpec::new(self.layer_sizes.clone(), slope).map(|_| ())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Encoded input (and output) dimension D.
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Index of the bottleneck within `layer_sizes`.
    pub fn bottleneck_index(&self) -> usize {
        self.layer_sizes.len() / 2
    }

    pub fn bottleneck_size(&self) -> usize {
        self.layer_sizes[self.bottleneck_index()]
    }

    /// Number of weight layers (= layer_sizes.len() - 1).
    pub fn weight_layer_count(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn leaky_slope(&self) -> f64 {
        let HiddenActivation::LeakyRelu { slope } = self.hidden_activation;
        slope
    }
}

/// One dense layer's parameters. Weights are row-major with shape
/// (in_dim, out_dim): `weights[i * out_dim + o]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// All weights and biases of an autoencoder, encoder layers first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub layers: Vec<DenseLayer>,
}

impl NetworkParams {
    /// Checks that shapes match `spec` and every value is finite.
    pub fn validate(&self, spec: &LayerSpec) -> Result<()> {
        let sizes = spec.layer_sizes();
        if self.layers.len() != spec.weight_layer_count() {
            return Err(Error::Config(format!(
                "{} weight layers, spec expects {}",
                self.layers.len(),
                spec.weight_layer_count()
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.in_dim != sizes[l]
                || layer.out_dim != sizes[l + 1]
                || layer.weights.len() != layer.in_dim * layer.out_dim
                || layer.biases.len() != layer.out_dim
            {
                return Err(Error::Config(format!(
                    "layer {l} shape mismatch against spec sizes {}x{}",
                    sizes[l],
                    sizes[l + 1]
                )));
            }
            if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("layer {l} contains non-finite values")));
            }
        }
        Ok(())
    }

    /// Total scalar parameter count.
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }
}

/// Gradients (or first/second moments) shaped like [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

impl Gradients {
    /// All-zero gradients shaped like `params`.
    pub fn zeros_like(params: &NetworkParams) -> Gradients {
        Gradients {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrads {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }
}

/// Initializes weights uniformly from
/// [-sqrt(6/(n_in+n_out)), +sqrt(6/(n_in+n_out))] and biases to zero,
/// deterministically for a given seed.
pub fn glorot_init(spec: &LayerSpec, seed: u64) -> NetworkParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = spec.layer_sizes();
    let mut layers = Vec::with_capacity(spec.weight_layer_count());
    for l in 0..spec.weight_layer_count() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        let weights = (0..n_in * n_out).map(|_| dist.sample(&mut rng)).collect();
        layers.push(DenseLayer {
            in_dim: n_in,
            out_dim: n_out,
            weights,
            biases: vec![0.0; n_out],
        });
    }
    NetworkParams { layers }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_rejects_asymmetric_sizes() {
        assert!(LayerSpec::new(vec![4, 3, 5], 0.4).is_err());
        assert!(LayerSpec::new(vec![4, 3, 4, 4], 0.4).is_err());
        assert!(LayerSpec::new(vec![4, 4, 4], 0.4).is_err()); // no bottleneck
        assert!(LayerSpec::new(vec![4, 3, 4], 0.0).is_err());
        assert!(LayerSpec::new(vec![4, 3, 4], 1.0).is_err());
        assert!(LayerSpec::new(vec![4, 3, 4], 0.4).is_ok());
    }

    #[test]
    fn spec_locates_bottleneck() {
        let spec = LayerSpec::new(vec![81, 8, 4, 3, 4, 8, 81], 0.4).unwrap();
        assert_eq!(spec.bottleneck_index(), 3);
        assert_eq!(spec.bottleneck_size(), 3);
        assert_eq!(spec.input_dim(), 81);
        assert_eq!(spec.weight_layer_count(), 6);
    }

    #[test]
    fn glorot_is_deterministic_per_seed() {
        let spec = LayerSpec::new(vec![6, 4, 3, 4, 6], 0.4).unwrap();
        let a = glorot_init(&spec, 7);
        let b = glorot_init(&spec, 7);
        assert_eq!(a, b);
        let c = glorot_init(&spec, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn glorot_respects_uniform_bound() {
        // A 4 -> 3 layer has bound sqrt(6/7) ~ 0.9258.
        let spec = LayerSpec::new(vec![4, 3, 4], 0.4).unwrap();
        let params = glorot_init(&spec, 123);
        let limit = (6.0f64 / 7.0).sqrt();
        for w in &params.layers[0].weights {
            assert!(w.abs() <= limit, "weight {w} exceeds {limit}");
        }
        // Decoder layer 3 -> 4 shares the same fan sum.
        for w in &params.layers[1].weights {
            assert!(w.abs() <= limit);
        }
    }

    #[test]
    fn glorot_biases_are_zero() {
        let spec = LayerSpec::new(vec![9, 5, 3, 5, 9], 0.4).unwrap();
        let params = glorot_init(&spec, 55);
        for layer in &params.layers {
            assert!(layer.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn params_validate_against_spec() {
        let spec = LayerSpec::new(vec![4, 3, 4], 0.4).unwrap();
        let mut params = glorot_init(&spec, 1);
        assert!(params.validate(&spec).is_ok());
        params.layers[0].weights[0] = f64::NAN;
        assert!(params.validate(&spec).is_err());
    }
}
