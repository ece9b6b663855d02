//! `sweep`: the full comparison grid. Every (architecture, seed) leg is
//! trained, scored, and evaluated; PCA and LOF baseline rows are computed
//! on the same encoded matrix. Legs run concurrently up to the worker
//! count and results are assembled in a fixed order, so output files are
//! identical regardless of parallelism.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ledgerlens_core::baselines::{lof_scores_encoded, pca_fit_encoded, pca_score, LofConfig};
use ledgerlens_core::data::Label;
use ledgerlens_core::metrics::{
    evaluate_score_set, format_table, recall100_operating_point, EvaluationDocument,
    EvaluationReport, TableRow,
};
use ledgerlens_core::nn::train;
use ledgerlens_core::scoring::{compute_attribute_stats, score_population, ScoreSet};
use ledgerlens_core::util::fmt_f64;
use ledgerlens_core::{scoring, Error, Result};
use serde::Serialize;

use crate::arch::resolve_arch;
use crate::opts::SweepArgs;

use super::train::train_config_from_knobs;
use super::LoadedDataset;

#[derive(Debug, Clone, Serialize)]
pub struct LegResult {
    pub arch: String,
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_epoch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<EvaluationDocument>,
}

/// Mean and spread of one metric across seeds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    fn over(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        Stat {
            mean: values.iter().sum::<f64>() / n,
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Per-architecture aggregate over its successful seeds, reported at the
/// recall-100% operating point on RE.
#[derive(Debug, Clone, Serialize)]
pub struct ArchAggregate {
    pub arch: String,
    pub seeds_ok: usize,
    pub roc_auc_re: Stat,
    pub precision: Stat,
    pub f1: Stat,
    pub top_k_precision: Stat,
    pub flagged_count: Stat,
    pub flagged_fraction: Stat,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineRow {
    pub detector: String,
    pub param: usize,
    pub recall100: EvaluationReport,
    pub best: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub k: usize,
    pub aggregates: Vec<ArchAggregate>,
    pub legs: Vec<LegResult>,
    pub baselines: Vec<BaselineRow>,
}

pub fn run_sweep(args: &SweepArgs) -> Result<SweepReport> {
    let options = args.scoring.to_options()?;
    if args.arch.is_empty() {
        return Err(Error::Config("sweep needs at least one architecture".into()));
    }
    let dataset = super::load_dataset(&args.data)?;
    let d = dataset.matrix.dim();
    // Resolve every selector up front so configuration errors surface
    // before any training starts.
    let specs: Vec<_> = args
        .arch
        .iter()
        .map(|sel| resolve_arch(sel, d).map(|spec| (sel.clone(), spec)))
        .collect::<Result<_>>()?;
    train_config_from_knobs(&args.knobs, 0).validate()?;
    let labels = dataset.matrix.labels().to_vec();
    let n_anomalies = labels.iter().filter(|l| l.is_anomaly()).count();
    if n_anomalies == 0 {
        return Err(Error::UndefinedMetric(
            "sweep evaluation requires ground-truth anomalies".into(),
        ));
    }
    let k = args.k.unwrap_or(n_anomalies);

    // Train/score/evaluate legs, a worker pool over the (arch, seed) grid.
    let legs: Vec<(usize, u64)> = (0..specs.len())
        .flat_map(|a| args.seed.iter().map(move |&s| (a, s)))
        .collect();
    let workers = args
        .workers
        .unwrap_or_else(ledgerlens_core::util::default_threads)
        .clamp(1, legs.len().max(1));
    let results: Mutex<Vec<Option<LegResult>>> = Mutex::new(vec![None; legs.len()]);
    let next_leg = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = next_leg.fetch_add(1, Ordering::Relaxed);
                if job >= legs.len() {
                    break;
                }
                let (arch_idx, seed) = legs[job];
                let (name, spec) = &specs[arch_idx];
                let outcome = run_leg(&dataset, spec, seed, args, k, &labels);
                let result = match outcome {
                    Ok((final_epoch, report)) => LegResult {
                        arch: name.clone(),
                        seed,
                        status: "ok".into(),
                        error: None,
                        final_epoch: Some(final_epoch),
                        report: Some(report),
                    },
                    Err(e) => LegResult {
                        arch: name.clone(),
                        seed,
                        status: "failed".into(),
                        error: Some(e.to_string()),
                        final_epoch: None,
                        report: None,
                    },
                };
                results.lock().unwrap()[job] = Some(result);
            });
        }
    });
    let legs: Vec<LegResult> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every leg produced a result"))
        .collect();
    for leg in legs.iter().filter(|l| l.status == "failed") {
        eprintln!(
            "sweep: leg {} seed {} failed: {}",
            leg.arch,
            leg.seed,
            leg.error.as_deref().unwrap_or("unknown")
        );
    }

    let aggregates = aggregate(&specs, &legs);
    let (baselines, baseline_sets) =
        run_baselines(&dataset, &labels, k, args, &options)?;

    super::ensure_out_dir(&args.out)?;
    let report = SweepReport {
        n: labels.len(),
        k,
        aggregates,
        legs,
        baselines,
    };
    let report_path = args.out.join("sweep.json");
    let mut w = BufWriter::new(File::create(&report_path)?);
    serde_json::to_writer_pretty(&mut w, &report)?;
    w.write_all(b"\n")?;
    write_baseline_scores(&args.out.join("baseline_scores.csv"), &baseline_sets)?;

    let mut rows: Vec<TableRow> = report
        .aggregates
        .iter()
        .map(|agg| TableRow {
            model: agg.arch.clone(),
            precision: agg.precision.mean,
            f1: agg.f1.mean,
            top_k: agg.top_k_precision.mean,
            flagged_fraction: agg.flagged_fraction.mean,
            flagged_count: agg.flagged_count.mean,
        })
        .collect();
    for row in report.baselines.iter().filter(|b| b.best) {
        rows.push(TableRow::from_report(
            format!("{} ({})", row.detector, row.param),
            &row.recall100,
        ));
    }
    eprint!("{}", format_table(&rows));
    Ok(report)
}

fn run_leg(
    dataset: &LoadedDataset,
    spec: &ledgerlens_core::nn::LayerSpec,
    seed: u64,
    args: &SweepArgs,
    k: usize,
    labels: &[Label],
) -> Result<(usize, EvaluationDocument)> {
    let config = train_config_from_knobs(&args.knobs, seed);
    let (params, trace) = train(&dataset.matrix, spec, &config)?;
    let options = args.scoring.to_options()?;
    let set = scoring::score_entries(&params, spec, &dataset.matrix, &dataset.entries, &options)?;
    let document = evaluate_score_set(&set, labels, Some(k))?;
    Ok((trace.stopped_epoch, document))
}

fn aggregate(specs: &[(String, ledgerlens_core::nn::LayerSpec)], legs: &[LegResult]) -> Vec<ArchAggregate> {
    specs
        .iter()
        .map(|(name, _)| {
            let reports: Vec<&EvaluationDocument> = legs
                .iter()
                .filter(|l| &l.arch == name && l.status == "ok")
                .filter_map(|l| l.report.as_ref())
                .collect();
            let metric = |f: &dyn Fn(&EvaluationDocument) -> f64| -> Stat {
                if reports.is_empty() {
                    Stat { mean: f64::NAN, min: f64::NAN, max: f64::NAN }
                } else {
                    Stat::over(&reports.iter().map(|r| f(r)).collect::<Vec<_>>())
                }
            };
            ArchAggregate {
                arch: name.clone(),
                seeds_ok: reports.len(),
                roc_auc_re: metric(&|r| r.recall100_re.roc_auc),
                precision: metric(&|r| r.recall100_re.precision),
                f1: metric(&|r| r.recall100_re.f1),
                top_k_precision: metric(&|r| r.recall100_re.top_k_precision),
                flagged_count: metric(&|r| r.recall100_re.flagged_count as f64),
                flagged_fraction: metric(&|r| r.recall100_re.flagged_fraction),
            }
        })
        .collect()
}

/// Baseline score sets tagged by detector and parameter.
type TaggedScoreSets = Vec<(String, ScoreSet)>;

/// Runs the PCA and LOF grids and selects each detector's best parameter:
/// fewest entries flagged at the recall-100% point, ties broken by higher
/// ROC-AUC, then by the smaller parameter.
fn run_baselines(
    dataset: &LoadedDataset,
    labels: &[Label],
    k: usize,
    args: &SweepArgs,
    options: &ledgerlens_core::scoring::ScoreOptions,
) -> Result<(Vec<BaselineRow>, TaggedScoreSets)> {
    let stats = compute_attribute_stats(&dataset.entries)?;
    let ids: Vec<String> = dataset.entries.iter().map(|e| e.entry_id.clone()).collect();
    let mut rows: Vec<BaselineRow> = Vec::new();
    let mut raw_by_row: Vec<(String, usize, Vec<f64>)> = Vec::new();

    let d = dataset.matrix.dim();
    for &c in &args.pca_components {
        let model = pca_fit_encoded(&dataset.matrix, c)?;
        let mut buf = vec![0.0f64; d];
        let scores: Vec<f64> = (0..dataset.matrix.n_rows())
            .map(|i| {
                dataset.matrix.row_f64_into(i, &mut buf);
                pca_score(&model, &buf)
            })
            .collect::<Result<_>>()?;
        let (_, report) = recall100_operating_point(&scores, labels, k)?;
        rows.push(BaselineRow {
            detector: "pca".into(),
            param: c,
            recall100: report,
            best: false,
        });
        raw_by_row.push(("pca".into(), c, scores));
    }
    for &k_nn in &args.lof_k {
        let scores = lof_scores_encoded(&dataset.matrix, LofConfig { k: k_nn })?;
        let (_, report) = recall100_operating_point(&scores, labels, k)?;
        rows.push(BaselineRow {
            detector: "lof".into(),
            param: k_nn,
            recall100: report,
            best: false,
        });
        raw_by_row.push(("lof".into(), k_nn, scores));
    }

    let mut best_sets = Vec::new();
    for detector in ["pca", "lof"] {
        let best = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.detector == detector)
            .min_by(|(_, a), (_, b)| {
                a.recall100
                    .flagged_count
                    .cmp(&b.recall100.flagged_count)
                    .then(
                        b.recall100
                            .roc_auc
                            .partial_cmp(&a.recall100.roc_auc)
                            .unwrap_or(std::cmp::Ordering::Equal),
                    )
                    .then(a.param.cmp(&b.param))
            })
            .map(|(i, _)| i);
        if let Some(i) = best {
            rows[i].best = true;
            let (name, param, raw) = &raw_by_row[i];
            let set = score_population(&ids, raw, &stats, options)?;
            best_sets.push((format!("{name}_{param}"), set));
        }
    }
    Ok((rows, best_sets))
}

/// Baseline scores in the standard score layout plus a leading detector
/// tag column.
fn write_baseline_scores(path: &std::path::Path, sets: &[(String, ScoreSet)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "detector,entry_id,e,re,ap,as,flagged,class")?;
    for (tag, set) in sets {
        for r in &set.records {
            writeln!(
                w,
                "{tag},{},{},{},{},{},{},{}",
                r.entry_id,
                fmt_f64(r.raw_error),
                fmt_f64(r.re),
                fmt_f64(r.ap),
                fmt_f64(r.anomaly_score),
                r.flagged,
                r.class.as_str()
            )?;
        }
    }
    Ok(())
}
