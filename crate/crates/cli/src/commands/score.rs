//! `score`: reconstruction errors, AP/RE/AS, flagging, classification.

use std::fs::File;
use std::io::BufWriter;

use ledgerlens_core::nn::load_checkpoint;
use ledgerlens_core::scoring::{score_entries, write_score_csv, write_score_jsonl};
use ledgerlens_core::Result;
use serde::Serialize;

use crate::opts::ScoreArgs;

#[derive(Debug, Serialize)]
pub struct ScoreSummary {
    pub n: usize,
    pub flagged: usize,
    pub mode: String,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub scores_csv: String,
    pub scores_jsonl: String,
}

pub fn run_score(args: &ScoreArgs) -> Result<ScoreSummary> {
    let options = args.scoring.to_options()?;
    let checkpoint = load_checkpoint(&args.model)?;
    let dataset = super::load_dataset(&args.data)?;
    let set = score_entries(
        &checkpoint.params,
        &checkpoint.spec,
        &dataset.matrix,
        &dataset.entries,
        &options,
    )?;

    super::ensure_out_dir(&args.out)?;
    let csv_path = args.out.join("scores.csv");
    write_score_csv(&set, BufWriter::new(File::create(&csv_path)?))?;
    let jsonl_path = args.out.join("scores.jsonl");
    write_score_jsonl(&set, BufWriter::new(File::create(&jsonl_path)?))?;

    Ok(ScoreSummary {
        n: set.records.len(),
        flagged: set.flagged_count(),
        mode: options.mode.as_str().to_string(),
        alpha: options.alpha,
        beta: options.beta,
        tau: options.tau,
        scores_csv: csv_path.display().to_string(),
        scores_jsonl: jsonl_path.display().to_string(),
    })
}
