//! `evaluate`: detection metrics for a score file against ground truth.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use ledgerlens_core::metrics::{evaluate_score_set, format_table, EvaluationDocument, TableRow};
use ledgerlens_core::scoring::{read_score_csv, ScoreSet};
use ledgerlens_core::{Error, Result};

use crate::opts::EvaluateArgs;

pub fn run_evaluate(args: &EvaluateArgs) -> Result<EvaluationDocument> {
    let options = args.scoring.to_options()?;
    let records = read_score_csv(BufReader::new(File::open(&args.scores)?))?;
    let dataset = super::load_dataset(&args.data)?;
    if records.len() != dataset.entries.len() {
        return Err(Error::RejectedInput(format!(
            "score file has {} rows but the dataset has {}",
            records.len(),
            dataset.entries.len()
        )));
    }
    for (record, entry) in records.iter().zip(&dataset.entries) {
        if record.entry_id != entry.entry_id {
            return Err(Error::RejectedInput(format!(
                "score row '{}' does not match dataset entry '{}'",
                record.entry_id, entry.entry_id
            )));
        }
    }
    let labels = dataset.matrix.labels().to_vec();
    let set = ScoreSet { options, records };
    let document = evaluate_score_set(&set, &labels, args.k)?;

    super::ensure_out_dir(&args.out)?;
    let report_path = args.out.join("report.json");
    let mut w = BufWriter::new(File::create(&report_path)?);
    serde_json::to_writer_pretty(&mut w, &document)?;
    w.write_all(b"\n")?;

    let table = format_table(&[
        TableRow::from_report(format!("beta={}", options.beta), &document.beta_point),
        TableRow::from_report("recall-100 (RE)", &document.recall100_re),
        TableRow::from_report("recall-100 (AS)", &document.recall100_as),
    ]);
    eprint!("{table}");
    Ok(document)
}
