// Temporary calibration probe for the desk-scale benchmark. Not shipped.
use std::time::Instant;

use ledgerlens_core::baselines::{lof_scores_encoded, pca_fit_encoded, pca_score, LofConfig};
use ledgerlens_core::data::{build_vocabulary, one_hot_encode, Label};
use ledgerlens_core::generator::{generate_population, GeneratorConfig};
use ledgerlens_core::metrics::{recall100_operating_point, roc_auc, top_k_precision};
use ledgerlens_core::nn::{train, LayerSpec, TrainConfig};
use ledgerlens_core::scoring::{score_entries, ScoreOptions};

fn main() {
    let config = GeneratorConfig::desk_default();
    let t0 = Instant::now();
    let entries = generate_population(&config).unwrap();
    let vocab = build_vocabulary(&entries).unwrap();
    let matrix = one_hot_encode(&entries, &vocab).unwrap();
    let labels = matrix.labels().to_vec();
    let d = matrix.dim();
    eprintln!("dataset: n={} d={} gen_time={:?}", matrix.n_rows(), d, t0.elapsed());

    let arch = |hidden: &[usize]| -> LayerSpec {
        let mut sizes = vec![d];
        sizes.extend_from_slice(hidden);
        sizes.push(d);
        LayerSpec::new(sizes, 0.4).unwrap()
    };
    let ae5 = arch(&[32, 16, 8, 4, 3, 4, 8, 16, 32]);
    let ae2 = arch(&[4, 3, 4]);

    let mut ae5_flagged = Vec::new();
    let mut ae2_flagged = Vec::new();
    for seed in 1..=5u64 {
        for (name, spec, flagged_out) in [
            ("AE5", &ae5, &mut ae5_flagged),
            ("AE2", &ae2, &mut ae2_flagged),
        ] {
            let t = Instant::now();
            let tc = TrainConfig {
                max_epochs: 500,
                seed,
                ..TrainConfig::default()
            };
            let (params, trace) = train(&matrix, spec, &tc).unwrap();
            let set = score_entries(&params, spec, &matrix, &entries, &ScoreOptions::default())
                .unwrap();
            let e: Vec<f64> = set.records.iter().map(|r| r.raw_error).collect();
            let auc = roc_auc(&e, &labels).unwrap();
            let (_, rep) = recall100_operating_point(&e, &labels, 30).unwrap();
            let top500 = top_k_precision(&e, &labels, 500).unwrap() * 500.0;
            let raw_as = set.raw_anomaly_scores();
            let mut glob: Vec<f64> = raw_as
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == Label::GlobalAnomaly)
                .map(|(&s, _)| s)
                .collect();
            let mut loc: Vec<f64> = raw_as
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == Label::LocalAnomaly)
                .map(|(&s, _)| s)
                .collect();
            glob.sort_by(f64::total_cmp);
            loc.sort_by(f64::total_cmp);
            let med = |v: &[f64]| v[v.len() / 2];
            flagged_out.push(rep.flagged_count);
            eprintln!(
                "{name} seed {seed}: epochs={} loss={:.4} auc={auc:.4} flagged@r100={} ({:.2}%) \
                 anoms_in_top500={top500:.0} med_as_local={:.3} med_as_global={:.3} time={:?}",
                trace.stopped_epoch,
                trace.epochs.last().unwrap().mean_loss,
                rep.flagged_count,
                rep.flagged_fraction * 100.0,
                med(&loc),
                med(&glob),
                t.elapsed()
            );
        }
    }

    let t = Instant::now();
    for c in [5, 10, 20, 30] {
        let model = pca_fit_encoded(&matrix, c).unwrap();
        let mut buf = vec![0.0f64; d];
        let scores: Vec<f64> = (0..matrix.n_rows())
            .map(|i| {
                matrix.row_f64_into(i, &mut buf);
                pca_score(&model, &buf).unwrap()
            })
            .collect();
        let auc = roc_auc(&scores, &labels).unwrap();
        let (_, rep) = recall100_operating_point(&scores, &labels, 30).unwrap();
        eprintln!(
            "PCA c={c}: auc={auc:.4} flagged@r100={} ({:.2}%)",
            rep.flagged_count,
            rep.flagged_fraction * 100.0
        );
    }
    eprintln!("pca time {:?}", t.elapsed());

    let t = Instant::now();
    for k in [10, 50] {
        let scores = lof_scores_encoded(&matrix, LofConfig { k }).unwrap();
        let auc = roc_auc(&scores, &labels).unwrap();
        let (_, rep) = recall100_operating_point(&scores, &labels, 30).unwrap();
        eprintln!(
            "LOF k={k}: auc={auc:.4} flagged@r100={} ({:.2}%) time={:?}",
            rep.flagged_count,
            rep.flagged_fraction * 100.0,
            t.elapsed()
        );
    }
    eprintln!("ae5 flagged: {ae5_flagged:?}");
    eprintln!("ae2 flagged: {ae2_flagged:?}");
}
