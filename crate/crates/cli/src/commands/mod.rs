//! Subcommand implementations.

mod evaluate;
mod generate;
mod score;
mod sweep;
mod train;

pub use evaluate::run_evaluate;
pub use generate::run_generate;
pub use score::run_score;
pub use sweep::run_sweep;
pub use train::run_train;

use std::path::Path;

use ledgerlens_core::data::{
    build_vocabulary, load_csv_auto, one_hot_encode, AttributeVocabulary, EncodedMatrix,
    JournalEntry,
};
use ledgerlens_core::scoring::ScoreOptions;
use ledgerlens_core::{Error, Result};

use crate::opts::ScoringKnobs;

/// A dataset loaded from CSV with its vocabulary and encoding.
pub struct LoadedDataset {
    pub schema: Vec<String>,
    pub entries: Vec<JournalEntry>,
    pub vocab: AttributeVocabulary,
    pub matrix: EncodedMatrix,
}

pub fn load_dataset(path: &Path) -> Result<LoadedDataset> {
    let (schema, entries) = load_csv_auto(path)?;
    let vocab = build_vocabulary(&entries)?;
    let matrix = one_hot_encode(&entries, &vocab)?;
    Ok(LoadedDataset {
        schema,
        entries,
        vocab,
        matrix,
    })
}

pub fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create output directory '{}': {e}", path.display()),
        ))
    })
}

impl ScoringKnobs {
    pub fn to_options(&self) -> Result<ScoreOptions> {
        let options = ScoreOptions {
            alpha: self.alpha,
            beta: self.beta,
            tau: self.tau,
            mode: self.mode.into(),
        };
        options.validate()?;
        Ok(options)
    }
}

/// Prints a machine-readable JSON document on stdout.
pub fn emit_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}
