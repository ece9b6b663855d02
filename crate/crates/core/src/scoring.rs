//! Anomaly scoring: attribute-probability score AP, normalized
//! reconstruction error RE, the combined score AS, threshold flagging,
//! and the global/local split.
//!
//! AP sums `ln(1 + n/N)` over an entry's attribute values (n = value
//! count in the scored population) and min-max normalizes the sums, so
//! frequent-valued entries score high. RE min-max normalizes the
//! autoencoder reconstruction errors. The combined score is
//! `AS = alpha * RE + (1 - alpha) * AP`; entries keep their AS when it
//! reaches the threshold beta and are zeroed otherwise. Flagged entries
//! split into local (AS >= tau) and global (AS < tau) anomalies.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::data::{EncodedMatrix, JournalEntry};
use crate::error::{Error, Result};
use crate::nn::{reconstruction_errors, LayerSpec, NetworkParams};
use crate::util::fmt_f64;

/// Value occurrence counts over the scored population plus each entry's
/// log-probability sum P.
#[derive(Debug, Clone)]
pub struct AttributeStats {
    counts: Vec<HashMap<String, u64>>,
    population: usize,
    p_sums: Vec<f64>,
}

impl AttributeStats {
    /// Population size N.
    pub fn population(&self) -> usize {
        self.population
    }

    /// Occurrence count of `value` for attribute `j`.
    pub fn count(&self, j: usize, value: &str) -> u64 {
        self.counts
            .get(j)
            .and_then(|m| m.get(value))
            .copied()
            .unwrap_or(0)
    }

    /// Per-entry log-probability sums, aligned with the input entries.
    pub fn p_sums(&self) -> &[f64] {
        &self.p_sums
    }
}

/// Counts every attribute value over the full population (anomalies
/// included; the method scores the same population it trains on) and
/// computes `P(x) = sum_j ln(1 + n_j / N)` per entry.
pub fn compute_attribute_stats(entries: &[JournalEntry]) -> Result<AttributeStats> {
    let first = entries
        .first()
        .ok_or_else(|| Error::RejectedInput("cannot compute stats on an empty population".into()))?;
    let k = first.attributes.len();
    let mut counts: Vec<HashMap<String, u64>> = vec![HashMap::new(); k];
    for entry in entries {
        if entry.attributes.len() != k {
            return Err(Error::RejectedInput(format!(
                "entry '{}' has {} attributes, expected {k}",
                entry.entry_id,
                entry.attributes.len()
            )));
        }
        for (j, value) in entry.attributes.iter().enumerate() {
            *counts[j].entry(value.clone()).or_insert(0) += 1;
        }
    }
    let n = entries.len() as f64;
    let p_sums = entries
        .iter()
        .map(|entry| {
            entry
                .attributes
                .iter()
                .enumerate()
                .map(|(j, value)| (1.0 + counts[j][value] as f64 / n).ln())
                .sum()
        })
        .collect();
    Ok(AttributeStats {
        counts,
        population: entries.len(),
        p_sums,
    })
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if hi == lo {
        // An all-identical population carries no rarity evidence.
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// Min-max normalized attribute probability score per entry.
pub fn ap_scores(stats: &AttributeStats) -> Vec<f64> {
    min_max_normalize(&stats.p_sums)
}

/// Min-max normalized reconstruction error per entry.
pub fn re_scores(raw_errors: &[f64]) -> Vec<f64> {
    min_max_normalize(raw_errors)
}

/// Combined score `alpha * RE + (1 - alpha) * AP` per entry.
pub fn anomaly_scores(re: &[f64], ap: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::RejectedInput(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if re.len() != ap.len() {
        return Err(Error::DimensionMismatch {
            expected: re.len(),
            actual: ap.len(),
        });
    }
    Ok(re
        .iter()
        .zip(ap)
        .map(|(&r, &a)| alpha * r + (1.0 - alpha) * a)
        .collect())
}

/// Applies the threshold: scores at or above `beta` are kept and flagged,
/// the rest are zeroed.
pub fn flag(anomaly_scores: &[f64], beta: f64) -> (Vec<f64>, Vec<bool>) {
    debug_assert!((0.0..=1.0).contains(&beta), "beta must lie in [0, 1]");
    let flagged: Vec<bool> = anomaly_scores.iter().map(|&s| s >= beta).collect();
    let kept = anomaly_scores
        .iter()
        .zip(&flagged)
        .map(|(&s, &f)| if f { s } else { 0.0 })
        .collect();
    (kept, flagged)
}

/// Anomaly class assigned to flagged entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyClass {
    None,
    Global,
    Local,
}

impl AnomalyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyClass::None => "none",
            AnomalyClass::Global => "global",
            AnomalyClass::Local => "local",
        }
    }

    fn parse(s: &str) -> Option<AnomalyClass> {
        match s {
            "none" => Some(AnomalyClass::None),
            "global" => Some(AnomalyClass::Global),
            "local" => Some(AnomalyClass::Local),
            _ => None,
        }
    }
}

/// Splits flagged entries at `tau`: local when AS >= tau, global below.
/// Unflagged entries are never classified.
pub fn classify(anomaly_scores: &[f64], flagged: &[bool], tau: f64) -> Vec<AnomalyClass> {
    debug_assert!(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
    anomaly_scores
        .iter()
        .zip(flagged)
        .map(|(&s, &f)| {
            if !f {
                AnomalyClass::None
            } else if s >= tau {
                AnomalyClass::Local
            } else {
                AnomalyClass::Global
            }
        })
        .collect()
}

/// How entries are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlagMode {
    /// Flag on the combined score: AS >= beta (scores below are zeroed).
    As,
    /// Flag on normalized reconstruction error alone: RE >= beta.
    ReOnly,
}

impl FlagMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FlagMode::As => "as",
            FlagMode::ReOnly => "re-only",
        }
    }
}

/// Scoring knobs. Defaults: alpha 0.3, beta 0.01, tau 0.4, AS flagging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub mode: FlagMode,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            alpha: 0.3,
            beta: 0.01,
            tau: 0.4,
            mode: FlagMode::As,
        }
    }
}

impl ScoreOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::RejectedInput(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::RejectedInput(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::RejectedInput(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// All scores of one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub entry_id: String,
    /// Raw reconstruction error E.
    pub raw_error: f64,
    pub re: f64,
    pub ap: f64,
    /// Combined score AS. Under AS flagging, scores below beta are zeroed.
    pub anomaly_score: f64,
    pub flagged: bool,
    pub class: AnomalyClass,
}

/// Scores of a whole population together with the parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub options: ScoreOptions,
    pub records: Vec<ScoreRecord>,
}

impl ScoreSet {
    pub fn flagged_count(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }

    /// Raw combined score (before any zeroing), recomputed from RE and AP.
    pub fn raw_anomaly_scores(&self) -> Vec<f64> {
        let alpha = self.options.alpha;
        self.records
            .iter()
            .map(|r| alpha * r.re + (1.0 - alpha) * r.ap)
            .collect()
    }
}

/// Scores a population given its raw reconstruction errors.
pub fn score_population(
    entry_ids: &[String],
    raw_errors: &[f64],
    stats: &AttributeStats,
    options: &ScoreOptions,
) -> Result<ScoreSet> {
    options.validate()?;
    if entry_ids.len() != raw_errors.len() || entry_ids.len() != stats.population() {
        return Err(Error::RejectedInput(format!(
            "ids ({}), errors ({}) and stats population ({}) must agree",
            entry_ids.len(),
            raw_errors.len(),
            stats.population()
        )));
    }
    let ap = ap_scores(stats);
    let re = re_scores(raw_errors);
    let combined = anomaly_scores(&re, &ap, options.alpha)?;
    let (scores, flagged) = match options.mode {
        FlagMode::As => flag(&combined, options.beta),
        FlagMode::ReOnly => {
            let flagged: Vec<bool> = re.iter().map(|&r| r >= options.beta).collect();
            (combined, flagged)
        }
    };
    let classes = classify(&scores, &flagged, options.tau);
    let records = entry_ids
        .iter()
        .enumerate()
        .map(|(i, id)| ScoreRecord {
            entry_id: id.clone(),
            raw_error: raw_errors[i],
            re: re[i],
            ap: ap[i],
            anomaly_score: scores[i],
            flagged: flagged[i],
            class: classes[i],
        })
        .collect();
    Ok(ScoreSet {
        options: *options,
        records,
    })
}

/// End-to-end scoring of an encoded population under a trained model:
/// reconstruction errors from the network, attribute statistics from the
/// entries, then AP/RE/AS, flagging, and classification.
pub fn score_entries(
    params: &NetworkParams,
    spec: &LayerSpec,
    matrix: &EncodedMatrix,
    entries: &[JournalEntry],
    options: &ScoreOptions,
) -> Result<ScoreSet> {
    if matrix.n_rows() != entries.len() {
        return Err(Error::RejectedInput(format!(
            "matrix has {} rows but {} entries were given",
            matrix.n_rows(),
            entries.len()
        )));
    }
    if matrix.dim() != spec.input_dim() {
        return Err(Error::Config(format!(
            "model expects {} encoded dimensions, dataset has {}",
            spec.input_dim(),
            matrix.dim()
        )));
    }
    let raw_errors = reconstruction_errors(params, spec, matrix, 256)?;
    let stats = compute_attribute_stats(entries)?;
    let ids: Vec<String> = entries.iter().map(|e| e.entry_id.clone()).collect();
    score_population(&ids, &raw_errors, &stats, options)
}

const SCORE_CSV_HEADER: &str = "entry_id,e,re,ap,as,flagged,class";

/// Writes scores as CSV with fixed field order
/// (entry_id, E, RE, AP, AS, flagged, class); floats carry 17 significant
/// digits so they round-trip exactly.
pub fn write_score_csv<W: Write>(set: &ScoreSet, mut w: W) -> Result<()> {
    writeln!(w, "{SCORE_CSV_HEADER}")?;
    for r in &set.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            csv_escape(&r.entry_id),
            fmt_f64(r.raw_error),
            fmt_f64(r.re),
            fmt_f64(r.ap),
            fmt_f64(r.anomaly_score),
            r.flagged,
            r.class.as_str()
        )?;
    }
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes scores as JSON lines with the same field order and float text
/// as the CSV form.
pub fn write_score_jsonl<W: Write>(set: &ScoreSet, mut w: W) -> Result<()> {
    for r in &set.records {
        writeln!(
            w,
            "{{\"entry_id\":{},\"e\":{},\"re\":{},\"ap\":{},\"as\":{},\"flagged\":{},\"class\":\"{}\"}}",
            serde_json::to_string(&r.entry_id)?,
            fmt_f64(r.raw_error),
            fmt_f64(r.re),
            fmt_f64(r.ap),
            fmt_f64(r.anomaly_score),
            r.flagged,
            r.class.as_str()
        )?;
    }
    Ok(())
}

/// Reads a score CSV written by [`write_score_csv`].
pub fn read_score_csv<R: BufRead>(r: R) -> Result<Vec<ScoreRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(r);
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = SCORE_CSV_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::RejectedInput(format!(
            "unexpected score file header: {headers:?}"
        )));
    }
    let mut records = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_f64 = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("bad float '{}'", field(i)),
            })
        };
        records.push(ScoreRecord {
            entry_id: field(0).to_string(),
            raw_error: parse_f64(1)?,
            re: parse_f64(2)?,
            ap: parse_f64(3)?,
            anomaly_score: parse_f64(4)?,
            flagged: match field(5) {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::MalformedRow {
                        line,
                        reason: format!("bad flag '{other}'"),
                    })
                }
            },
            class: AnomalyClass::parse(field(6)).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("bad class '{}'", field(6)),
            })?,
        });
    }
    Ok(records)
}
