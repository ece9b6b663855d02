//! `generate`: emit a synthetic labeled benchmark dataset.

use std::fs::File;
use std::io::BufWriter;

use ledgerlens_core::data::{build_vocabulary, write_csv, Label};
use ledgerlens_core::generator::{generate_population, GeneratorConfig};
use ledgerlens_core::Result;
use serde::Serialize;

use crate::opts::GenerateArgs;

#[derive(Debug, Serialize)]
pub struct GenerateSummary {
    pub n_rows: usize,
    pub n_regular: usize,
    pub n_global: usize,
    pub n_local: usize,
    pub attributes: usize,
    pub encoded_dim: usize,
    pub seed: u64,
    pub dataset: String,
    pub vocabulary: String,
}

pub fn run_generate(args: &GenerateArgs) -> Result<GenerateSummary> {
    let mut config = match &args.config {
        Some(path) => {
            let file = File::open(path)?;
            let config: GeneratorConfig = serde_json::from_reader(file)?;
            config
        }
        None => GeneratorConfig::desk_default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;

    let entries = generate_population(&config)?;
    let vocab = build_vocabulary(&entries)?;
    let schema: Vec<String> = config.attributes.iter().map(|a| a.name.clone()).collect();

    super::ensure_out_dir(&args.out)?;
    let dataset_path = args.out.join("dataset.csv");
    write_csv(BufWriter::new(File::create(&dataset_path)?), &schema, &entries)?;
    let vocab_path = args.out.join("vocab.json");
    vocab.write_json(&schema, BufWriter::new(File::create(&vocab_path)?))?;

    let count = |label: Label| entries.iter().filter(|e| e.label == label).count();
    Ok(GenerateSummary {
        n_rows: entries.len(),
        n_regular: count(Label::Regular),
        n_global: count(Label::GlobalAnomaly),
        n_local: count(Label::LocalAnomaly),
        attributes: schema.len(),
        encoded_dim: vocab.dim(),
        seed: config.seed,
        dataset: dataset_path.display().to_string(),
        vocabulary: vocab_path.display().to_string(),
    })
}
