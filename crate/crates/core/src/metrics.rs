//! Detection-quality metrics: confusion counts, precision/recall/F1,
//! top-k precision, ROC-AUC, and the recall-100% operating point.
//!
//! Anomalies (global or local) are the positive class; an entry is
//! predicted positive when its score reaches the threshold. Ranking ties
//! break by ascending ingestion order, ROC ties use the midpoint
//! convention, and the recall-100% threshold is the minimum score over
//! the true anomalies, mirroring the audit constraint that no known
//! anomaly may be missed.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::scoring::{FlagMode, ScoreSet};

/// Raw confusion counts at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl Confusion {
    /// Precision; 0 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        let predicted = self.true_pos + self.false_pos;
        if predicted == 0 {
            0.0
        } else {
            self.true_pos as f64 / predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let positives = self.true_pos + self.false_neg;
        if positives == 0 {
            0.0
        } else {
            self.true_pos as f64 / positives as f64
        }
    }

    /// F1 = 2pr / (p + r); 0 when p + r = 0.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn check_aligned(scores: &[f64], labels: &[Label]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::RejectedInput(format!(
            "{} scores against {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Confusion counts with predicted positive <=> score >= threshold.
pub fn confusion_at(scores: &[f64], labels: &[Label], threshold: f64) -> Result<Confusion> {
    check_aligned(scores, labels)?;
    let mut confusion = Confusion {
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for (&score, &label) in scores.iter().zip(labels) {
        match (score >= threshold, label.is_anomaly()) {
            (true, true) => confusion.true_pos += 1,
            (true, false) => confusion.false_pos += 1,
            (false, true) => confusion.false_neg += 1,
            (false, false) => confusion.true_neg += 1,
        }
    }
    Ok(confusion)
}

/// Indices sorted by descending score, ties by ascending ingestion order.
fn ranked_indices(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Fraction of true anomalies among the k highest-scored entries.
pub fn top_k_precision(scores: &[f64], labels: &[Label], k: usize) -> Result<f64> {
    check_aligned(scores, labels)?;
    if k == 0 || k > scores.len() {
        return Err(Error::RejectedInput(format!(
            "k must lie in 1..={}, got {k}",
            scores.len()
        )));
    }
    let hits = ranked_indices(scores)
        .iter()
        .take(k)
        .filter(|&&i| labels[i].is_anomaly())
        .count();
    Ok(hits as f64 / k as f64)
}

/// Area under the ROC curve as the Mann-Whitney statistic
/// `P(score_anomaly > score_regular) + 0.5 P(equal)`, computed exactly by
/// a rank sweep with midpoint tie handling.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    check_aligned(scores, labels)?;
    let n_pos = labels.iter().filter(|l| l.is_anomaly()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "ROC-AUC needs both an anomalous and a regular entry".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // Midrank sum over positives; ranks are 1-based, ties share their
    // average rank (exact in f64: averages of integers are half-integers).
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx].is_anomaly() {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Evaluation of one score vector at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub top_k_precision: f64,
    pub k: usize,
    pub roc_auc: f64,
    pub flagged_count: usize,
    pub flagged_fraction: f64,
    /// Recall over injected global anomalies, absent when none exist.
    pub global_recall: Option<f64>,
    /// Recall over injected local anomalies, absent when none exist.
    pub local_recall: Option<f64>,
}

/// Full evaluation of `scores` against ground truth at `threshold`.
pub fn evaluate_at(
    scores: &[f64],
    labels: &[Label],
    threshold: f64,
    k: usize,
) -> Result<EvaluationReport> {
    let confusion = confusion_at(scores, labels, threshold)?;
    let auc = roc_auc(scores, labels)?;
    let top_k = top_k_precision(scores, labels, k)?;
    let flagged_count = confusion.true_pos + confusion.false_pos;
    let class_recall = |class: Label| {
        let total = labels.iter().filter(|&&l| l == class).count();
        (total > 0).then(|| {
            let hit = scores
                .iter()
                .zip(labels)
                .filter(|&(&s, &l)| l == class && s >= threshold)
                .count();
            hit as f64 / total as f64
        })
    };
    Ok(EvaluationReport {
        threshold,
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        top_k_precision: top_k,
        k,
        roc_auc: auc,
        flagged_count,
        flagged_fraction: flagged_count as f64 / labels.len() as f64,
        global_recall: class_recall(Label::GlobalAnomaly),
        local_recall: class_recall(Label::LocalAnomaly),
    })
}

/// Lowest threshold at which every true anomaly is flagged: the minimum
/// anomaly score. Returns the threshold and the report computed there;
/// its recall is 1 by construction.
pub fn recall100_operating_point(
    scores: &[f64],
    labels: &[Label],
    k: usize,
) -> Result<(f64, EvaluationReport)> {
    check_aligned(scores, labels)?;
    let threshold = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.is_anomaly())
        .map(|(&s, _)| s)
        .fold(f64::INFINITY, f64::min);
    if !threshold.is_finite() {
        return Err(Error::UndefinedMetric(
            "recall-100% operating point needs at least one anomaly".into(),
        ));
    }
    let report = evaluate_at(scores, labels, threshold, k)?;
    Ok((threshold, report))
}

/// Evaluation document produced for one score set: the beta operating
/// point under the set's flag mode, plus recall-100% operating points on
/// the normalized reconstruction error and on the raw combined score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub n: usize,
    pub k: usize,
    pub n_global: usize,
    pub n_local: usize,
    pub mode: FlagMode,
    pub beta_point: EvaluationReport,
    pub recall100_re: EvaluationReport,
    pub recall100_as: EvaluationReport,
}

/// Evaluates a score set against labels. `k` defaults to the number of
/// injected anomalies.
pub fn evaluate_score_set(
    set: &ScoreSet,
    labels: &[Label],
    k: Option<usize>,
) -> Result<EvaluationDocument> {
    if set.records.len() != labels.len() {
        return Err(Error::RejectedInput(format!(
            "{} score records against {} labels",
            set.records.len(),
            labels.len()
        )));
    }
    let n_global = labels.iter().filter(|&&l| l == Label::GlobalAnomaly).count();
    let n_local = labels.iter().filter(|&&l| l == Label::LocalAnomaly).count();
    let n_anomalies = n_global + n_local;
    if n_anomalies == 0 {
        return Err(Error::UndefinedMetric(
            "evaluation requires ground-truth anomalies".into(),
        ));
    }
    let k = k.unwrap_or(n_anomalies);
    let re: Vec<f64> = set.records.iter().map(|r| r.re).collect();
    let raw_as = set.raw_anomaly_scores();
    let beta_scores = match set.options.mode {
        FlagMode::As => &raw_as,
        FlagMode::ReOnly => &re,
    };
    let beta_point = evaluate_at(beta_scores, labels, set.options.beta, k)?;
    let (_, recall100_re) = recall100_operating_point(&re, labels, k)?;
    let (_, recall100_as) = recall100_operating_point(&raw_as, labels, k)?;
    Ok(EvaluationDocument {
        n: labels.len(),
        k,
        n_global,
        n_local,
        mode: set.options.mode,
        beta_point,
        recall100_re,
        recall100_as,
    })
}

/// One row of the fixed-width comparison table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub model: String,
    pub precision: f64,
    pub f1: f64,
    pub top_k: f64,
    pub flagged_fraction: f64,
    pub flagged_count: f64,
}

impl TableRow {
    pub fn from_report(model: impl Into<String>, report: &EvaluationReport) -> TableRow {
        TableRow {
            model: model.into(),
            precision: report.precision,
            f1: report.f1,
            top_k: report.top_k_precision,
            flagged_fraction: report.flagged_fraction,
            flagged_count: report.flagged_count as f64,
        }
    }
}

/// Renders rows in the two-column-block layout of the published results
/// tables: precision, F1, top-k, then flagged share and count.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>9} {:>9} {:>7} {:>12} {:>11}\n",
        "Model", "Precision", "F1-Score", "Top-k", "Anomalies %", "Anomalies #"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<16} {:>9.4} {:>9.4} {:>7.4} {:>12.2} {:>11.0}\n",
            row.model,
            row.precision,
            row.f1,
            row.top_k,
            row.flagged_fraction * 100.0,
            row.flagged_count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use Label::{GlobalAnomaly as G, LocalAnomaly as L, Regular as R};

    #[test]
    fn perfect_separation_yields_perfect_metrics() {
        let scores = [0.9, 0.8, 0.1, 0.2];
        let labels = [G, L, R, R];
        let c = confusion_at(&scores, &labels, 0.5).unwrap();
        assert_eq!((c.precision(), c.recall(), c.f1()), (1.0, 1.0, 1.0));
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 1.0);
        assert_eq!(top_k_precision(&scores, &labels, 2).unwrap(), 1.0);
    }

    #[test]
    fn confusion_worked_example() {
        // 2 TP, 2 FP, 0 FN.
        let scores = [0.9, 0.8, 0.7, 0.6, 0.1];
        let labels = [G, L, R, R, R];
        let c = confusion_at(&scores, &labels, 0.5).unwrap();
        assert_eq!(c.true_pos, 2);
        assert_eq!(c.false_pos, 2);
        assert_eq!(c.false_neg, 0);
        assert_eq!(c.precision(), 0.5);
        assert_eq!(c.recall(), 1.0);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_predictions_have_zero_precision_and_f1() {
        let scores = [0.1, 0.2];
        let labels = [G, R];
        let c = confusion_at(&scores, &labels, 0.5).unwrap();
        assert_eq!(c.precision(), 0.0);
        assert_eq!(c.f1(), 0.0);
    }

    #[test]
    fn top_k_counts_ranked_anomalies() {
        // Anomalies at ranks 1 and 4 of 10, k = 2 -> 0.5.
        let mut scores = vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1];
        let mut labels = vec![R; 10];
        labels[0] = G;
        labels[3] = L;
        assert_eq!(top_k_precision(&scores, &labels, 2).unwrap(), 0.5);
        assert_eq!(top_k_precision(&scores, &labels, 4).unwrap(), 0.5);
        assert!(top_k_precision(&scores, &labels, 0).is_err());
        assert!(top_k_precision(&scores, &labels, 11).is_err());

        // Ties break toward earlier ingestion order.
        scores[1] = 0.9;
        labels[1] = G;
        labels[0] = R;
        assert_eq!(top_k_precision(&scores, &labels, 1).unwrap(), 0.0);
    }

    #[test]
    fn auc_pairwise_example() {
        // Scores (0.9, 0.2, 0.8, 0.1), labels (anom, reg, reg, anom):
        // 2 wins of 4 pairs.
        let scores = [0.9, 0.2, 0.8, 0.1];
        let labels = [G, R, R, L];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 0.5);
    }

    #[test]
    fn auc_tie_midpoint_and_inversion() {
        let scores = [0.5, 0.5, 0.1];
        let labels = [G, R, R];
        // Pairs: tie with the 0.5 regular (0.5 credit), win over 0.1.
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 0.75);

        let inverted: Vec<Label> = labels
            .iter()
            .map(|l| if l.is_anomaly() { R } else { G })
            .collect();
        let direct = roc_auc(&scores, &labels).unwrap();
        let flipped = roc_auc(&scores, &inverted).unwrap();
        assert!((direct + flipped - 1.0).abs() < 1e-15);
    }

    #[test]
    fn auc_requires_both_classes() {
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[R, R]),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(roc_auc(&[0.1, 0.2], &[G, L]).is_err());
    }

    #[test]
    fn recall100_threshold_is_min_anomaly_score() {
        let scores = [0.9, 0.3, 0.5, 0.2];
        let labels = [G, L, R, R];
        let (threshold, report) = recall100_operating_point(&scores, &labels, 2).unwrap();
        assert_eq!(threshold, 0.3);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.flagged_count, 3); // 0.9, 0.5, 0.3
        assert!((report.precision - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn recall100_weakest_anomaly_at_rank_100() {
        // 10000 entries with strictly decreasing scores; 20 anomalies, 19
        // in the top ranks plus one exactly at rank 100.
        let n = 10000;
        let scores: Vec<f64> = (0..n).map(|i| 1.0 - i as f64 / n as f64).collect();
        let mut labels = vec![R; n];
        for slot in labels.iter_mut().take(19) {
            *slot = G;
        }
        labels[99] = L;
        let (_, report) = recall100_operating_point(&scores, &labels, 20).unwrap();
        assert_eq!(report.flagged_count, 100);
        assert!((report.precision - 0.2).abs() < 1e-15);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.global_recall, Some(1.0));
        assert_eq!(report.local_recall, Some(1.0));
    }

    #[test]
    fn table_rendering_is_fixed_width() {
        let report = EvaluationReport {
            threshold: 0.1,
            precision: 0.0641,
            recall: 1.0,
            f1: 0.1204,
            top_k_precision: 0.6632,
            k: 30,
            roc_auc: 0.99,
            flagged_count: 1483,
            flagged_fraction: 0.0048,
            global_recall: Some(1.0),
            local_recall: Some(1.0),
        };
        let table = format_table(&[TableRow::from_report("AE 5", &report)]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("Model"));
        assert!(lines[1].contains("0.0641"));
        assert!(lines[1].contains("1483"));
    }

    proptest! {
        #[test]
        fn auc_is_invariant_under_strictly_increasing_transforms(
            raw in proptest::collection::vec(0u8..=255, 4..80),
            flips in proptest::collection::vec(any::<bool>(), 4..80)
        ) {
            let scores: Vec<f64> = raw.iter().map(|&v| v as f64 / 255.0).collect();
            let labels: Vec<Label> = flips
                .iter()
                .cycle()
                .take(scores.len())
                .map(|&b| if b { G } else { R })
                .collect();
            prop_assume!(labels.iter().any(|l| l.is_anomaly()));
            prop_assume!(labels.iter().any(|l| !l.is_anomaly()));
            let transformed: Vec<f64> = scores.iter().map(|&s| s * s + 3.0 * s).collect();
            let a = roc_auc(&scores, &labels).unwrap();
            let b = roc_auc(&transformed, &labels).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn auc_matches_brute_force_pair_count(
            raw in proptest::collection::vec(0u8..=15, 4..60),
            flips in proptest::collection::vec(any::<bool>(), 4..60)
        ) {
            let scores: Vec<f64> = raw.iter().map(|&v| v as f64 / 15.0).collect();
            let labels: Vec<Label> = flips
                .iter()
                .cycle()
                .take(scores.len())
                .map(|&b| if b { L } else { R })
                .collect();
            prop_assume!(labels.iter().any(|l| l.is_anomaly()));
            prop_assume!(labels.iter().any(|l| !l.is_anomaly()));
            let mut wins = 0.0f64;
            let mut pairs = 0.0f64;
            for (i, li) in labels.iter().enumerate() {
                if !li.is_anomaly() { continue; }
                for (j, lj) in labels.iter().enumerate() {
                    if lj.is_anomaly() { continue; }
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
            let brute = wins / pairs;
            let swept = roc_auc(&scores, &labels).unwrap();
            prop_assert_eq!(swept.to_bits(), brute.to_bits());
        }

        #[test]
        fn top_k_times_k_is_an_integer_hit_count(
            raw in proptest::collection::vec(0u8..=7, 2..50),
            flips in proptest::collection::vec(any::<bool>(), 2..50),
            k_seed in any::<u16>()
        ) {
            let scores: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let labels: Vec<Label> = flips
                .iter()
                .cycle()
                .take(scores.len())
                .map(|&b| if b { G } else { R })
                .collect();
            let k = (k_seed as usize % scores.len()) + 1;
            let rate = top_k_precision(&scores, &labels, k).unwrap();
            let count = rate * k as f64;
            prop_assert!((count - count.round()).abs() < 1e-9);
        }
    }
}
