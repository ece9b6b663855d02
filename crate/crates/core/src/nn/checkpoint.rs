//! Versioned model checkpoint serialization.
//!
//! Checkpoints are JSON documents carrying the layer spec, all weight
//! matrices row-major, the training configuration, the seed, and the
//! epoch at which training stopped. Floats round-trip bit-exactly.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{LayerSpec, NetworkParams, TrainConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub spec: LayerSpec,
    pub params: NetworkParams,
    pub train_config: TrainConfig,
    pub seed: u64,
    pub final_epoch: usize,
}

pub fn write_checkpoint<W: Write>(mut w: W, checkpoint: &Checkpoint) -> Result<()> {
    serde_json::to_writer(&mut w, checkpoint)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn save_checkpoint<P: AsRef<Path>>(path: P, checkpoint: &Checkpoint) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_checkpoint(std::io::BufWriter::new(file), checkpoint)
}

pub fn read_checkpoint<R: Read>(r: R) -> Result<Checkpoint> {
    let checkpoint: Checkpoint = serde_json::from_reader(r)?;
    if checkpoint.format_version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
            checkpoint.format_version
        )));
    }
    checkpoint.spec.validate()?;
    checkpoint.params.validate(&checkpoint.spec)?;
    Ok(checkpoint)
}

pub fn load_checkpoint<P: AsRef<Path>>(path: P) -> Result<Checkpoint> {
    let file = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::glorot_init;

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let spec = LayerSpec::new(vec![7, 4, 2, 4, 7], 0.4).unwrap();
        let params = glorot_init(&spec, 31);
        let checkpoint = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            spec,
            params,
            train_config: TrainConfig::default(),
            seed: 31,
            final_epoch: 120,
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &checkpoint).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back.final_epoch, 120);
        assert_eq!(back.spec, checkpoint.spec);
        for (a, b) in back.params.layers.iter().zip(&checkpoint.params.layers) {
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let checkpoint = Checkpoint {
            format_version: 99,
            params: glorot_init(&spec, 1),
            spec,
            train_config: TrainConfig::default(),
            seed: 1,
            final_epoch: 1,
        };
        let mut buf = Vec::new();
        serde_json::to_writer(&mut buf, &checkpoint).unwrap();
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }

    #[test]
    fn corrupt_shapes_are_rejected() {
        let spec = LayerSpec::new(vec![4, 2, 4], 0.4).unwrap();
        let mut checkpoint = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            params: glorot_init(&spec, 1),
            spec,
            train_config: TrainConfig::default(),
            seed: 1,
            final_epoch: 1,
        };
        checkpoint.params.layers[0].weights.pop();
        let mut buf = Vec::new();
        serde_json::to_writer(&mut buf, &checkpoint).unwrap();
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
