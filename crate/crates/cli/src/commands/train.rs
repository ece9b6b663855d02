//! `train`: fit one checkpoint per seed and emit per-epoch traces.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use ledgerlens_core::data::EncodedMatrix;
use ledgerlens_core::nn::{
    forward, reconstruction_errors, save_checkpoint, train_with_observer, Checkpoint, LayerSpec,
    NetworkParams, TrainConfig, CHECKPOINT_VERSION,
};
use ledgerlens_core::util::fmt_f64;
use ledgerlens_core::Result;
use serde::Serialize;

use crate::arch::resolve_arch;
use crate::opts::{TrainArgs, TrainKnobs};

#[derive(Debug, Serialize)]
pub struct TrainRunSummary {
    pub seed: u64,
    pub final_epoch: usize,
    pub final_loss: f64,
    pub checkpoint: String,
    pub trace: String,
}

#[derive(Debug, Serialize)]
pub struct TrainSummary {
    pub arch: Vec<usize>,
    pub encoded_dim: usize,
    pub runs: Vec<TrainRunSummary>,
}

pub fn train_config_from_knobs(knobs: &TrainKnobs, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: knobs.lr,
        batch_size: knobs.batch_size,
        max_epochs: knobs.epochs,
        patience: knobs.patience,
        min_rel_improvement: knobs.min_improvement,
        seed,
        ..TrainConfig::default()
    }
}

pub fn run_train(args: &TrainArgs) -> Result<TrainSummary> {
    let dataset = super::load_dataset(&args.data)?;
    let spec = resolve_arch(&args.arch, dataset.matrix.dim())?;
    train_config_from_knobs(&args.knobs, 0).validate()?;

    super::ensure_out_dir(&args.out)?;
    let latent_epochs: BTreeSet<usize> = args.latents_at.iter().copied().collect();
    let error_epochs: BTreeSet<usize> = args.errors_at.iter().copied().collect();
    let ids: Vec<&str> = dataset.entries.iter().map(|e| e.entry_id.as_str()).collect();

    let mut runs = Vec::new();
    for &seed in &args.seed {
        let config = train_config_from_knobs(&args.knobs, seed);
        let observer = |epoch: usize, params: &NetworkParams| -> Result<()> {
            if latent_epochs.contains(&epoch) {
                let path = args.out.join(format!("latents_epoch{epoch}_seed{seed}.csv"));
                write_latents(&path, params, &spec, &dataset.matrix, &ids)?;
            }
            if error_epochs.contains(&epoch) {
                let path = args.out.join(format!("errors_epoch{epoch}_seed{seed}.csv"));
                write_errors(&path, params, &spec, &dataset.matrix, &ids)?;
            }
            Ok(())
        };
        let (params, trace) = train_with_observer(&dataset.matrix, &spec, &config, observer)?;

        let checkpoint_path = args.out.join(format!("model_seed{seed}.json"));
        save_checkpoint(
            &checkpoint_path,
            &Checkpoint {
                format_version: CHECKPOINT_VERSION,
                spec: spec.clone(),
                params,
                train_config: config,
                seed,
                final_epoch: trace.stopped_epoch,
            },
        )?;
        let trace_path = args.out.join(format!("trace_seed{seed}.csv"));
        trace.write_csv(BufWriter::new(File::create(&trace_path)?))?;

        runs.push(TrainRunSummary {
            seed,
            final_epoch: trace.stopped_epoch,
            final_loss: trace.epochs.last().map_or(f64::NAN, |e| e.mean_loss),
            checkpoint: checkpoint_path.display().to_string(),
            trace: trace_path.display().to_string(),
        });
    }
    Ok(TrainSummary {
        arch: spec.layer_sizes().to_vec(),
        encoded_dim: dataset.matrix.dim(),
        runs,
    })
}

fn write_latents(
    path: &PathBuf,
    params: &NetworkParams,
    spec: &LayerSpec,
    matrix: &EncodedMatrix,
    ids: &[&str],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let z = spec.bottleneck_size();
    let header: Vec<String> = (0..z).map(|i| format!("z{i}")).collect();
    writeln!(w, "entry_id,{}", header.join(","))?;
    let d = spec.input_dim();
    let batch = 256usize;
    let mut buf = vec![0.0f64; batch * d];
    let mut start = 0;
    while start < matrix.n_rows() {
        let end = (start + batch).min(matrix.n_rows());
        let rows = end - start;
        for (r, i) in (start..end).enumerate() {
            matrix.row_f64_into(i, &mut buf[r * d..(r + 1) * d]);
        }
        let cache = forward(params, spec, &buf[..rows * d])?;
        for (r, latent) in cache.latents(spec).iter().enumerate() {
            let cells: Vec<String> = latent.0.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{},{}", ids[start + r], cells.join(","))?;
        }
        start = end;
    }
    Ok(())
}

fn write_errors(
    path: &PathBuf,
    params: &NetworkParams,
    spec: &LayerSpec,
    matrix: &EncodedMatrix,
    ids: &[&str],
) -> Result<()> {
    let errors = reconstruction_errors(params, spec, matrix, 256)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "entry_id,e")?;
    for (id, e) in ids.iter().zip(&errors) {
        writeln!(w, "{id},{}", fmt_f64(*e))?;
    }
    Ok(())
}
