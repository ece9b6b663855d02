//! Mini-batch training loop.

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::nn::{adam_step, backward, forward, glorot_init, AdamState, LayerSpec, NetworkParams};
use crate::util::fmt_f64;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Consecutive epochs of insufficient improvement before stopping.
    pub patience: usize,
    /// Minimum relative epoch-loss improvement that counts as progress.
    pub min_rel_improvement: f64,
    /// Reconstructions are clamped into [log_clamp, 1 - log_clamp]
    /// before logarithms.
    pub log_clamp: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 128,
            max_epochs: 2000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
            patience: 25,
            min_rel_improvement: 1e-5,
            log_clamp: 1e-7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be >= 1".into()));
        }
        if !(self.log_clamp > 0.0 && self.log_clamp < 0.5) {
            return Err(Error::Config(format!(
                "log clamp must lie in (0, 0.5), got {}",
                self.log_clamp
            )));
        }
        Ok(())
    }
}

/// One completed epoch of the training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean BCE loss over all rows seen this epoch (measured before each
    /// batch update).
    pub mean_loss: f64,
    /// Mean loss restricted to each attribute's one-hot block.
    pub attribute_losses: Vec<f64>,
    /// Wall-clock seconds spent in the epoch. Diagnostic only; excluded
    /// from the emitted CSV so artifacts stay byte-reproducible.
    pub wall_secs: f64,
}

/// Per-epoch training history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    /// Epoch at which training stopped (== epochs.len()).
    pub stopped_epoch: usize,
}

impl TrainTrace {
    /// Writes the trace as CSV: epoch, mean loss, then one loss column
    /// per attribute. Floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let k = self.epochs.first().map_or(0, |e| e.attribute_losses.len());
        let mut header = String::from("epoch,mean_loss");
        for j in 0..k {
            header.push_str(&format!(",loss_attr{j}"));
        }
        writeln!(w, "{header}")?;
        for record in &self.epochs {
            let mut line = format!("{},{}", record.epoch, fmt_f64(record.mean_loss));
            for v in &record.attribute_losses {
                line.push(',');
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Trains an autoencoder on the encoded dataset.
///
/// Each epoch visits every row once in a freshly shuffled order, in
/// mini-batches of `config.batch_size` (the last partial batch is kept).
/// Training stops at `max_epochs`, or earlier once the relative
/// improvement of the epoch mean loss stays below
/// `config.min_rel_improvement` for `config.patience` consecutive epochs.
/// The run is fully determined by (seed, dataset, spec, config).
pub fn train(
    matrix: &EncodedMatrix,
    spec: &LayerSpec,
    config: &TrainConfig,
) -> Result<(NetworkParams, TrainTrace)> {
    train_with_observer(matrix, spec, config, |_, _| Ok(()))
}

/// [`train`] with a per-epoch callback receiving the epoch number and the
/// parameters after that epoch's updates.
pub fn train_with_observer<F>(
    matrix: &EncodedMatrix,
    spec: &LayerSpec,
    config: &TrainConfig,
    mut observer: F,
) -> Result<(NetworkParams, TrainTrace)>
where
    F: FnMut(usize, &NetworkParams) -> Result<()>,
{
    config.validate()?;
    let d = spec.input_dim();
    if matrix.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: matrix.dim(),
        });
    }
    let n = matrix.n_rows();
    if n == 0 {
        return Err(Error::RejectedInput("dataset is empty".into()));
    }
    let offsets = matrix.block_offsets().to_vec();
    let k = offsets.len() - 1;

    let mut params = glorot_init(spec, config.seed);
    let mut state = AdamState::new(&params);
    // Separate stream so the shuffle order is independent of how many
    // variates initialization consumed.
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_buf = vec![0.0f64; config.batch_size.min(n) * d];
    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut step = 0usize;
    let mut stall_streak = 0usize;

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0f64;
        let mut attr_sums = vec![0.0f64; k];

        for chunk in order.chunks(config.batch_size) {
            let rows = chunk.len();
            let batch = &mut batch_buf[..rows * d];
            for (r, &i) in chunk.iter().enumerate() {
                matrix.row_f64_into(i, &mut batch[r * d..(r + 1) * d]);
            }
            let cache = forward(&params, spec, batch)?;
            accumulate_bce(
                batch,
                cache.output(),
                &offsets,
                config.log_clamp,
                &mut loss_sum,
                &mut attr_sums,
            );
            if !loss_sum.is_finite() {
                return Err(Error::TrainingAborted {
                    epoch,
                    source: Box::new(Error::NonFiniteLoss),
                });
            }
            let grads = backward(&params, spec, batch, &cache)?;
            step += 1;
            adam_step(&mut params, &grads, &mut state, config, step).map_err(|e| {
                Error::TrainingAborted {
                    epoch,
                    source: Box::new(e),
                }
            })?;
        }

        let mean_loss = loss_sum / n as f64;
        let attribute_losses: Vec<f64> = attr_sums.iter().map(|s| s / n as f64).collect();
        epochs.push(EpochRecord {
            epoch,
            mean_loss,
            attribute_losses,
            wall_secs: started.elapsed().as_secs_f64(),
        });
        observer(epoch, &params)?;

        if epochs.len() >= 2 {
            let prev = epochs[epochs.len() - 2].mean_loss;
            let improvement = if prev > 0.0 { (prev - mean_loss) / prev } else { 0.0 };
            if improvement < config.min_rel_improvement {
                stall_streak += 1;
            } else {
                stall_streak = 0;
            }
            if stall_streak >= config.patience {
                break;
            }
        }
    }

    let stopped_epoch = epochs.len();
    Ok((params, TrainTrace { epochs, stopped_epoch }))
}

/// Adds each row's BCE terms to the running total and per-block sums.
fn accumulate_bce(
    batch: &[f64],
    output: &[f64],
    offsets: &[usize],
    clamp: f64,
    loss_sum: &mut f64,
    attr_sums: &mut [f64],
) {
    let d = *offsets.last().unwrap();
    let rows = batch.len() / d;
    for r in 0..rows {
        let x = &batch[r * d..(r + 1) * d];
        let xhat = &output[r * d..(r + 1) * d];
        for (j, w) in offsets.windows(2).enumerate() {
            let mut block = 0.0;
            for c in w[0]..w[1] {
                let p = xhat[c].clamp(clamp, 1.0 - clamp);
                block -= if x[c] == 1.0 { p.ln() } else { (1.0 - p).ln() };
            }
            attr_sums[j] += block;
            *loss_sum += block;
        }
    }
}
