//! End-to-end harness tests on a small generated corpus: evaluation
//! structure, caching equivalence, worker-count independence, and report
//! export.

use std::path::Path;

use once_cell::sync::Lazy;
use tempfile::TempDir;

use sift_bench::{
    export_report, false_positive_curve, load_corpus, run_eval, true_positive_curve, Corpus,
    EvalMode, EvalOptions, EvalReport, FeatureStore, ThresholdGrid,
};
use sift_core::{DetectorParams, Deformation};

/// A compact corpus shared by every test in this file: four 160x160 scenes.
/// Detection runs once per image thanks to the shared store.
static FIXTURE: Lazy<(TempDir, Corpus, FeatureStore)> = Lazy::new(|| {
    let dir = tempfile::tempdir().expect("tempdir");
    sift_bench::synth::write_corpus(dir.path(), 4, 160, 901).expect("corpus");
    let corpus = load_corpus(dir.path()).expect("load");
    let store = FeatureStore::in_memory(DetectorParams::default());
    (dir, corpus, store)
});

fn opts(jobs: usize) -> EvalOptions {
    EvalOptions {
        ratio: 0.8,
        grid: ThresholdGrid::default(),
        jobs,
    }
}

fn report_bytes(report: &EvalReport, dir: &Path) -> Vec<(String, Vec<u8>)> {
    let files = export_report(report, dir, true).unwrap();
    files
        .iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn fp_evaluation_has_expected_shape() {
    let (_, corpus, store) = &*FIXTURE;
    let report = false_positive_curve(corpus, store, &opts(1)).unwrap();
    assert_eq!(report.mode, EvalMode::FalsePositive);
    assert_eq!(report.n_images, 4);
    assert_eq!(report.pairs.len(), 6);
    assert!(report.warnings.is_empty());

    // Pairs come in lexicographic order over the sorted corpus.
    let ids: Vec<(&str, &str)> = report
        .pairs
        .iter()
        .map(|p| (p.id_a.as_str(), p.id_b.as_str()))
        .collect();
    assert_eq!(ids[0], ("img00.pgm", "img01.pgm"));
    assert_eq!(ids[5], ("img02.pgm", "img03.pgm"));

    // The curve is a survival function over 51 default grid points.
    assert_eq!(report.curve.thresholds.len(), 51);
    assert!(report.curve.rates.windows(2).all(|w| w[1] <= w[0]));
    assert!(report.curve.rates.iter().all(|&r| (0.0..=1.0).contains(&r)));

    // Unrelated images should almost never clear a high threshold.
    assert!(report.curve.rate_at(0.5).unwrap() < 0.5);

    // Histogram normalization (or all-zero when nothing matched).
    let sum: f64 = report.dphi.probabilities().iter().sum();
    if report.dphi.is_empty() {
        assert_eq!(sum, 0.0);
    } else {
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tp_identity_scores_one_everywhere() {
    let (_, corpus, store) = &*FIXTURE;
    let deformation: Deformation = "rot:0".parse().unwrap();
    let report = true_positive_curve(corpus, &deformation, store, &opts(1)).unwrap();
    assert_eq!(report.pairs.len(), 4);
    assert_eq!(report.pairs[0].id_b, "rot:0(img00.pgm)");
    for pair in &report.pairs {
        assert!(pair.n_a > 0, "{} found no keypoints", pair.id_a);
        assert_eq!(pair.rate, 1.0, "{} not perfectly self-matched", pair.id_a);
    }
    // All orientation differences sit in the bin centered on zero.
    assert!((report.dphi.mass_near_bin(0, 0) - 1.0).abs() < 1e-12);
    for t in &report.curve.thresholds {
        if *t < 1.0 {
            assert_eq!(report.curve.rate_at(*t), Some(1.0));
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let (_, corpus, store) = &*FIXTURE;
    let deformation: Deformation = "rot:90".parse().unwrap();
    let serial = true_positive_curve(corpus, &deformation, store, &opts(1)).unwrap();
    let parallel = true_positive_curve(corpus, &deformation, store, &opts(8)).unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    assert_eq!(
        report_bytes(&serial, dir_a.path()),
        report_bytes(&parallel, dir_b.path())
    );
}

#[test]
fn disk_cache_round_trip_matches_cold_run() {
    let (dir, corpus, _) = &*FIXTURE;
    let _ = dir;
    let cache = tempfile::tempdir().unwrap();
    let cold_store =
        FeatureStore::with_disk_cache(DetectorParams::default(), cache.path().to_path_buf())
            .unwrap();
    let cold = false_positive_curve(corpus, &cold_store, &opts(1)).unwrap();

    // Kp files were written; a fresh store must reproduce the exact report.
    let kp_files = std::fs::read_dir(cache.path()).unwrap().count();
    assert_eq!(kp_files, 4);
    let warm_store =
        FeatureStore::with_disk_cache(DetectorParams::default(), cache.path().to_path_buf())
            .unwrap();
    let warm = false_positive_curve(corpus, &warm_store, &opts(1)).unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    assert_eq!(
        report_bytes(&cold, dir_a.path()),
        report_bytes(&warm, dir_b.path())
    );
}

#[test]
fn corrupt_corpus_entries_degrade_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    sift_bench::synth::write_corpus(dir.path(), 3, 160, 77).unwrap();
    std::fs::write(dir.path().join("broken.pgm"), b"P5 9 9 255").unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    assert_eq!(corpus.entries.len(), 4);

    let store = FeatureStore::in_memory(DetectorParams::default());
    let report = false_positive_curve(&corpus, &store, &opts(2)).unwrap();
    assert_eq!(report.n_images, 3);
    assert_eq!(report.pairs.len(), 3);
    assert_eq!(report.warnings.len(), 1);
    assert!(report.warnings[0].contains("broken.pgm"));
}

#[test]
fn tp_with_destructive_scaling_warns_instead_of_failing() {
    let (_, corpus, store) = &*FIXTURE;
    // 160 * 0.05 = 8px: too small for the detector's pyramid, so every pair
    // must score zero with a warning, not abort the evaluation.
    let deformation: Deformation = "scale:0.05".parse().unwrap();
    let report = true_positive_curve(corpus, &deformation, store, &opts(1)).unwrap();
    assert_eq!(report.pairs.len(), 4);
    assert_eq!(report.warnings.len(), 4);
    for pair in &report.pairs {
        assert_eq!(pair.rate, 0.0);
        assert_eq!(pair.n_matches, 0);
    }
    assert!(report.dphi.is_empty());
    assert!(report.dphi.probabilities().iter().all(|&p| p == 0.0));
}

#[test]
fn run_eval_enforces_mode_spec_pairing() {
    let (_, corpus, store) = &*FIXTURE;
    let rot: Deformation = "rot:90".parse().unwrap();
    assert!(run_eval(corpus, EvalMode::TruePositive, None, store, &opts(1)).is_err());
    assert!(run_eval(
        corpus,
        EvalMode::FalsePositive,
        Some(&rot),
        store,
        &opts(1)
    )
    .is_err());
    assert!(run_eval(corpus, EvalMode::FalsePositive, None, store, &opts(1)).is_ok());
}

#[test]
fn summary_line_has_contract_format() {
    let (_, corpus, store) = &*FIXTURE;
    let report = false_positive_curve(corpus, store, &opts(1)).unwrap();
    let line = report.summary_line();
    assert!(
        line.starts_with("pairs=6 P(0.5)="),
        "unexpected summary {line:?}"
    );
    let rate: f64 = line.rsplit('=').next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&rate));
}
