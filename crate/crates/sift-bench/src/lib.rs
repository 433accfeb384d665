//! Benchmark harness for `sift-core`.
//!
//! The library half of the `sift-bench` binary: corpus discovery, a
//! content-addressed feature cache, the false-positive / true-positive
//! evaluation protocol, deterministic report export, and a synthetic corpus
//! generator. The binary in `main.rs` is a thin argument-parsing shell over
//! these modules, which keeps every behavior reachable from integration
//! tests without spawning processes.

pub mod cache;
pub mod corpus;
pub mod grid;
pub mod harness;
pub mod report;
pub mod svg;
pub mod synth;

pub use cache::{detect_quantized, detector_fingerprint, image_key, FeatureStore};
pub use corpus::{load_corpus, Corpus, CorpusEntry, LoadedImage};
pub use grid::ThresholdGrid;
pub use harness::{
    false_positive_curve, run_eval, true_positive_curve, DeltaPhiHistogram, EvalMode, EvalOptions,
    EvalReport, PairRecord, RateCurve, DPHI_BINS,
};
pub use report::export_report;
