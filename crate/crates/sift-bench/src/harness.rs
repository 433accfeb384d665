//! Evaluation protocol: matching-rate curves and orientation-difference
//! statistics over an image corpus.
//!
//! Two experiments are supported. The *false-positive* run matches every
//! unordered pair of distinct corpus images and reports how often unrelated
//! images clear a rate threshold. The *true-positive* run matches each image
//! against a deformed copy of itself and reports how often the deformation is
//! survived. Both pool the orientation differences of all accepted matches
//! into a circular histogram.
//!
//! Results are deterministic: images are visited in corpus order, pairs in
//! lexicographic index order, and the worker count only changes wall-clock
//! time, never a single output bit.

use rayon::prelude::*;

use sift_core::{match_descriptors, Deformation, Error, Keypoint64, Result};

use crate::cache::{detector_fingerprint, FeatureStore};
use crate::corpus::{Corpus, LoadedImage};
use crate::grid::ThresholdGrid;

/// Which experiment a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    FalsePositive,
    TruePositive,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::FalsePositive => "fp",
            EvalMode::TruePositive => "tp",
        }
    }
}

/// Knobs shared by both experiments.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Nearest-neighbor distance ratio for descriptor matching.
    pub ratio: f64,
    /// Rate thresholds of the output curve.
    pub grid: ThresholdGrid,
    /// Worker threads; must be at least 1.
    pub jobs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ratio: 0.8,
            grid: ThresholdGrid::default(),
            jobs: 1,
        }
    }
}

/// Outcome of matching one image pair.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub id_a: String,
    pub id_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub n_matches: usize,
    pub rate: f64,
}

/// Fraction of pairs whose matching rate exceeds each threshold.
///
/// This is a survival function of the per-pair rates, so it is nonincreasing
/// in the threshold by construction.
#[derive(Debug, Clone)]
pub struct RateCurve {
    pub thresholds: Vec<f64>,
    pub rates: Vec<f64>,
}

impl RateCurve {
    pub fn from_pair_rates(grid: &ThresholdGrid, pair_rates: &[f64]) -> Self {
        let thresholds = grid.values();
        let n = pair_rates.len();
        let rates = thresholds
            .iter()
            .map(|&t| {
                if n == 0 {
                    0.0
                } else {
                    // Strict comparison: the image-match decision is r > r_T.
                    let hits = pair_rates.iter().filter(|&&r| r > t).count();
                    hits as f64 / n as f64
                }
            })
            .collect();
        RateCurve { thresholds, rates }
    }

    /// The curve value at the threshold closest to `t` (within 1e-9).
    pub fn rate_at(&self, t: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&x| (x - t).abs() < 1e-9)
            .map(|i| self.rates[i])
    }
}

/// Number of bins in the orientation-difference histogram.
pub const DPHI_BINS: usize = 64;

/// Circular histogram of match orientation differences in degrees.
///
/// The 64 bins are center-aligned: bin `k` is centered on `k * 5.625deg`, so
/// bin 0 collects differences near 0deg from both sides of the wrap-around.
/// An angle maps to the bin whose center is nearest.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPhiHistogram {
    pub counts: [u64; DPHI_BINS],
    pub n_matches: u64,
}

impl Default for DeltaPhiHistogram {
    fn default() -> Self {
        Self::new()
    }
}

impl DeltaPhiHistogram {
    pub fn new() -> Self {
        DeltaPhiHistogram {
            counts: [0; DPHI_BINS],
            n_matches: 0,
        }
    }

    /// Width of one bin: 360 / 64 = 5.625 degrees.
    pub fn bin_width() -> f64 {
        360.0 / DPHI_BINS as f64
    }

    /// Center angle of bin `k`.
    pub fn bin_center(k: usize) -> f64 {
        k as f64 * Self::bin_width()
    }

    /// Bin whose center is nearest to `delta_phi` (given in `[0, 360)`).
    /// Angles just under 360 wrap into bin 0.
    pub fn bin_index(delta_phi: f64) -> usize {
        let k = (delta_phi / Self::bin_width()).round() as i64;
        k.rem_euclid(DPHI_BINS as i64) as usize
    }

    pub fn add(&mut self, delta_phi: f64) {
        self.counts[Self::bin_index(delta_phi)] += 1;
        self.n_matches += 1;
    }

    pub fn add_all<I: IntoIterator<Item = f64>>(&mut self, angles: I) {
        for a in angles {
            self.add(a);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_matches == 0
    }

    /// Normalized bin masses. All zeros when the histogram is empty, so an
    /// empty pool is visible in the export rather than a division by zero.
    pub fn probabilities(&self) -> Vec<f64> {
        if self.n_matches == 0 {
            return vec![0.0; DPHI_BINS];
        }
        let n = self.n_matches as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Index of the most populated bin; ties resolve to the lowest index.
    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        best
    }

    pub fn max_probability(&self) -> f64 {
        self.probabilities()
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Probability mass within `radius_bins` of bin `center_bin`, counting
    /// circular neighbors.
    pub fn mass_near_bin(&self, center_bin: usize, radius_bins: usize) -> f64 {
        if self.n_matches == 0 {
            return 0.0;
        }
        let mut hits = 0u64;
        for d in 0..=radius_bins {
            let lo = (center_bin + DPHI_BINS - d) % DPHI_BINS;
            let hi = (center_bin + d) % DPHI_BINS;
            hits += self.counts[lo];
            if hi != lo {
                hits += self.counts[hi];
            }
        }
        hits as f64 / self.n_matches as f64
    }

    /// Total-variation distance between two histograms' distributions.
    pub fn total_variation(&self, other: &DeltaPhiHistogram) -> f64 {
        let p = self.probabilities();
        let q = other.probabilities();
        0.5 * p
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Everything an evaluation produces, ready for export.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub deformation: Option<Deformation>,
    /// The corpus path exactly as given on the command line.
    pub corpus_label: String,
    /// Images that were actually evaluated.
    pub n_images: usize,
    pub detector: String,
    pub ratio: f64,
    pub grid: ThresholdGrid,
    pub pairs: Vec<PairRecord>,
    pub curve: RateCurve,
    pub dphi: DeltaPhiHistogram,
    pub warnings: Vec<String>,
}

impl EvalReport {
    /// The one-line summary printed after an evaluation: the number of pairs
    /// and the curve value at the grid midpoint.
    pub fn summary_line(&self) -> String {
        let mid = self.grid.midpoint();
        let rate = self.curve.rate_at(mid).unwrap_or(0.0);
        format!("pairs={} P({})={:.6}", self.pairs.len(), mid, rate)
    }

    pub fn mean_pair_rate(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs.iter().map(|p| p.rate).sum::<f64>() / self.pairs.len() as f64
    }

    pub fn median_pair_rate(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let mut rates: Vec<f64> = self.pairs.iter().map(|p| p.rate).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = rates.len();
        if n % 2 == 1 {
            rates[n / 2]
        } else {
            0.5 * (rates[n / 2 - 1] + rates[n / 2])
        }
    }
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::InvalidArgument(
            "worker count must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))
}

/// Detects features for every loaded image in parallel. Images whose
/// detection fails are dropped with a warning so one bad input does not sink
/// the whole run.
fn detect_corpus(
    pool: &rayon::ThreadPool,
    images: Vec<LoadedImage>,
    store: &FeatureStore,
    warnings: &mut Vec<String>,
) -> Vec<(LoadedImage, std::sync::Arc<Vec<Keypoint64>>)> {
    let detected: Vec<Result<std::sync::Arc<Vec<Keypoint64>>>> =
        pool.install(|| images.par_iter().map(|li| store.features(&li.image)).collect());
    let mut kept = Vec::with_capacity(images.len());
    for (li, res) in images.into_iter().zip(detected) {
        match res {
            Ok(kps) => kept.push((li, kps)),
            Err(e) => warnings.push(format!("skipping {}: {e}", li.id)),
        }
    }
    kept
}

/// Matches every unordered pair of distinct corpus images.
pub fn false_positive_curve(
    corpus: &Corpus,
    store: &FeatureStore,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let pool = build_pool(opts.jobs)?;
    let (images, mut warnings) = corpus.load_images();
    let entries = detect_corpus(&pool, images, store, &mut warnings);
    if entries.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "false-positive evaluation needs at least two readable images, got {}",
            entries.len()
        )));
    }

    let mut index_pairs = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            index_pairs.push((i, j));
        }
    }

    let results: Vec<(PairRecord, Vec<f64>)> = pool.install(|| {
        index_pairs
            .par_iter()
            .map(|&(i, j)| {
                let (li_a, kps_a) = &entries[i];
                let (li_b, kps_b) = &entries[j];
                let res = match_descriptors(kps_a, kps_b, opts.ratio);
                let dphi = res.matches.iter().map(|m| m.delta_phi).collect();
                let record = PairRecord {
                    id_a: li_a.id.clone(),
                    id_b: li_b.id.clone(),
                    n_a: res.n_a,
                    n_b: res.n_b,
                    n_matches: res.matches.len(),
                    rate: res.rate,
                };
                (record, dphi)
            })
            .collect()
    });

    Ok(assemble_report(
        EvalMode::FalsePositive,
        None,
        corpus,
        entries.len(),
        store,
        opts,
        results,
        warnings,
    ))
}

/// Matches each corpus image against a deformed copy of itself.
///
/// When the deformed image is too small to run the detector (for example
/// after an aggressive downscale), the pair scores a rate of 0 and a warning
/// is recorded instead of failing the run.
pub fn true_positive_curve(
    corpus: &Corpus,
    deformation: &Deformation,
    store: &FeatureStore,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    deformation.validate()?;
    let pool = build_pool(opts.jobs)?;
    let (images, mut warnings) = corpus.load_images();
    let entries = detect_corpus(&pool, images, store, &mut warnings);
    if entries.is_empty() {
        return Err(Error::InvalidArgument(
            "true-positive evaluation needs at least one readable image".into(),
        ));
    }

    type TpOutcome = (PairRecord, Vec<f64>, Option<String>);
    let results: Vec<TpOutcome> = pool.install(|| {
        entries
            .par_iter()
            .map(|(li, kps_a)| {
                let id_b = format!("{}({})", deformation, li.id);
                let empty = |warning: String| {
                    (
                        PairRecord {
                            id_a: li.id.clone(),
                            id_b: id_b.clone(),
                            n_a: kps_a.len(),
                            n_b: 0,
                            n_matches: 0,
                            rate: 0.0,
                        },
                        Vec::new(),
                        Some(warning),
                    )
                };
                let deformed = match deformation.apply(&li.image) {
                    Ok(img) => img,
                    Err(e) => return empty(format!("{}: {e}", li.id)),
                };
                let kps_b = match store.features(&deformed) {
                    Ok(kps) => kps,
                    Err(e) => return empty(format!("{}: {e}", li.id)),
                };
                let res = match_descriptors(kps_a, &kps_b, opts.ratio);
                let dphi = res.matches.iter().map(|m| m.delta_phi).collect();
                let record = PairRecord {
                    id_a: li.id.clone(),
                    id_b,
                    n_a: res.n_a,
                    n_b: res.n_b,
                    n_matches: res.matches.len(),
                    rate: res.rate,
                };
                (record, dphi, None)
            })
            .collect()
    });

    let mut pair_results = Vec::with_capacity(results.len());
    for (record, dphi, warning) in results {
        if let Some(w) = warning {
            warnings.push(w);
        }
        pair_results.push((record, dphi));
    }

    Ok(assemble_report(
        EvalMode::TruePositive,
        Some(deformation.clone()),
        corpus,
        entries.len(),
        store,
        opts,
        pair_results,
        warnings,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    mode: EvalMode,
    deformation: Option<Deformation>,
    corpus: &Corpus,
    n_images: usize,
    store: &FeatureStore,
    opts: &EvalOptions,
    results: Vec<(PairRecord, Vec<f64>)>,
    warnings: Vec<String>,
) -> EvalReport {
    let mut pairs = Vec::with_capacity(results.len());
    let mut dphi = DeltaPhiHistogram::new();
    for (record, angles) in results {
        pairs.push(record);
        dphi.add_all(angles);
    }
    let pair_rates: Vec<f64> = pairs.iter().map(|p| p.rate).collect();
    let curve = RateCurve::from_pair_rates(&opts.grid, &pair_rates);
    EvalReport {
        mode,
        deformation,
        corpus_label: corpus.root.display().to_string(),
        n_images,
        detector: detector_fingerprint(store.params()),
        ratio: opts.ratio,
        grid: opts.grid.clone(),
        pairs,
        curve,
        dphi,
        warnings,
    }
}

/// Dispatches on the mode, enforcing that a deformation is given exactly for
/// true-positive runs.
pub fn run_eval(
    corpus: &Corpus,
    mode: EvalMode,
    deformation: Option<&Deformation>,
    store: &FeatureStore,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    match (mode, deformation) {
        (EvalMode::FalsePositive, None) => false_positive_curve(corpus, store, opts),
        (EvalMode::TruePositive, Some(d)) => true_positive_curve(corpus, d, store, opts),
        (EvalMode::FalsePositive, Some(_)) => Err(Error::InvalidArgument(
            "false-positive mode does not take a deformation spec".into(),
        )),
        (EvalMode::TruePositive, None) => Err(Error::InvalidArgument(
            "true-positive mode requires a deformation spec".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_index_is_center_aligned() {
        let w = DeltaPhiHistogram::bin_width();
        assert!((w - 5.625).abs() < 1e-12);
        assert_eq!(DeltaPhiHistogram::bin_index(0.0), 0);
        assert_eq!(DeltaPhiHistogram::bin_index(2.8), 0);
        assert_eq!(DeltaPhiHistogram::bin_index(2.9), 1);
        assert_eq!(DeltaPhiHistogram::bin_index(357.2), 0);
        assert_eq!(DeltaPhiHistogram::bin_index(354.0), 63);
        assert_eq!(DeltaPhiHistogram::bin_index(90.0), 16);
        assert!((DeltaPhiHistogram::bin_center(16) - 90.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_probabilities_are_normalized() {
        let mut h = DeltaPhiHistogram::new();
        h.add_all([0.0, 1.0, 90.0, 90.1, 180.0, 359.9]);
        assert_eq!(h.n_matches, 6);
        let p = h.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // 0.0, 1.0, and 359.9 all land in bin 0.
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert_eq!(h.mode_bin(), 0);
        assert!((h.max_probability() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_histogram_exports_zeros() {
        let h = DeltaPhiHistogram::new();
        assert!(h.is_empty());
        assert!(h.probabilities().iter().all(|&p| p == 0.0));
        assert_eq!(h.mass_near_bin(0, 3), 0.0);
    }

    #[test]
    fn mass_near_bin_wraps_circularly() {
        let mut h = DeltaPhiHistogram::new();
        h.add_all([0.0, 5.6, 354.4, 180.0]);
        // Bins 0, 1, 63, 32; one bin of slack around 0 covers the first three.
        assert!((h.mass_near_bin(0, 1) - 0.75).abs() < 1e-12);
        assert!((h.mass_near_bin(0, 0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn total_variation_bounds() {
        let mut a = DeltaPhiHistogram::new();
        let mut b = DeltaPhiHistogram::new();
        a.add_all([0.0, 0.0, 90.0]);
        b.add_all([0.1, 0.2, 90.2]);
        assert!(a.total_variation(&b) < 1e-12);
        let mut c = DeltaPhiHistogram::new();
        c.add_all([180.0]);
        assert!((a.total_variation(&c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_curve_is_a_survival_function() {
        let grid: ThresholdGrid = "0:0.25:1".parse().unwrap();
        let curve = RateCurve::from_pair_rates(&grid, &[0.1, 0.3, 0.3, 0.8]);
        assert_eq!(curve.thresholds.len(), 5);
        // P(r > 0) = 1, P(r > 0.25) = 3/4, P(r > 0.5) = 1/4, P(r > 0.75) =
        // 1/4, P(r > 1) = 0.
        assert_eq!(curve.rates, vec![1.0, 0.75, 0.25, 0.25, 0.0]);
        assert!(curve.rates.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(curve.rate_at(0.5), Some(0.25));
        assert_eq!(curve.rate_at(0.33), None);
    }

    #[test]
    fn threshold_comparison_is_strict() {
        let grid: ThresholdGrid = "0.5:0.5:1".parse().unwrap();
        let curve = RateCurve::from_pair_rates(&grid, &[0.5, 1.0]);
        // A pair at exactly the threshold does not count as exceeding it.
        assert_eq!(curve.rates, vec![0.5, 0.0]);
    }

    #[test]
    fn summary_line_quotes_grid_midpoint() {
        let report = EvalReport {
            mode: EvalMode::FalsePositive,
            deformation: None,
            corpus_label: "corpus".into(),
            n_images: 3,
            detector: String::new(),
            ratio: 0.8,
            grid: ThresholdGrid::default(),
            pairs: vec![
                PairRecord {
                    id_a: "a".into(),
                    id_b: "b".into(),
                    n_a: 10,
                    n_b: 12,
                    n_matches: 1,
                    rate: 0.1,
                },
                PairRecord {
                    id_a: "a".into(),
                    id_b: "c".into(),
                    n_a: 10,
                    n_b: 9,
                    n_matches: 6,
                    rate: 0.667,
                },
            ],
            curve: RateCurve::from_pair_rates(&ThresholdGrid::default(), &[0.1, 0.667]),
            dphi: DeltaPhiHistogram::new(),
            warnings: Vec::new(),
        };
        assert_eq!(report.summary_line(), "pairs=2 P(0.5)=0.500000");
        assert!((report.mean_pair_rate() - 0.3835).abs() < 1e-12);
        assert!((report.median_pair_rate() - 0.3835).abs() < 1e-12);
    }

    #[test]
    fn jobs_must_be_positive() {
        assert!(build_pool(0).is_err());
        assert!(build_pool(2).is_ok());
    }
}
