//! Report export: CSV tables, a configuration echo, and optional SVG plots.
//!
//! Exports are deterministic down to the byte — no timestamps, no map
//! iteration order, no locale-dependent formatting — so re-running an
//! evaluation over the same corpus reproduces the output directory exactly.
//! Floats are written with nine decimal places, enough for the curve and
//! histogram values (rationals with denominators up to the pair/match count)
//! to parse back within 1e-9.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sift_core::{Error, Result};

use crate::harness::{DeltaPhiHistogram, EvalMode, EvalReport, DPHI_BINS};
use crate::svg;

fn fmt9(v: f64) -> String {
    format!("{v:.9}")
}

/// `curve.csv`: one row per grid threshold.
pub fn curve_csv(report: &EvalReport) -> String {
    let mut out = String::from("r_T,rate\n");
    for (t, r) in report.curve.thresholds.iter().zip(&report.curve.rates) {
        let _ = writeln!(out, "{},{}", fmt9(*t), fmt9(*r));
    }
    out
}

/// `dphi.csv`: one row per histogram bin, probabilities normalized (or all
/// zero for an empty match pool).
pub fn dphi_csv(report: &EvalReport) -> String {
    let mut out = String::from("bin_center_deg,probability\n");
    let probs = report.dphi.probabilities();
    for (k, p) in probs.iter().enumerate().take(DPHI_BINS) {
        let _ = writeln!(out, "{},{}", fmt9(DeltaPhiHistogram::bin_center(k)), fmt9(*p));
    }
    out
}

/// `pairs.csv`: one row per evaluated image pair, in evaluation order.
pub fn pairs_csv(report: &EvalReport) -> String {
    let mut out = String::from("id_a,id_b,n_a,n_b,matches,r\n");
    for p in &report.pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.id_a,
            p.id_b,
            p.n_a,
            p.n_b,
            p.n_matches,
            fmt9(p.rate)
        );
    }
    out
}

/// `config.txt`: the settings that determine the numbers. The worker count is
/// deliberately absent — it cannot affect results and would break byte-level
/// comparison between runs with different `--jobs`.
pub fn config_txt(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode={}", report.mode.as_str());
    let _ = writeln!(out, "corpus={}", report.corpus_label);
    let _ = writeln!(out, "images={}", report.n_images);
    if let Some(d) = &report.deformation {
        let _ = writeln!(out, "deformation={d}");
    }
    let _ = writeln!(out, "ratio={}", report.ratio);
    let _ = writeln!(out, "grid={}", report.grid);
    let _ = writeln!(out, "detector={}", report.detector);
    out
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let res = std::fs::write(&tmp, contents)
        .and_then(|_| std::fs::rename(&tmp, path));
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res.map_err(Error::Io)
}

/// Writes the report into `out_dir` (created if missing) and returns the
/// paths written. With `plot`, adds self-rendered SVG charts.
pub fn export_report(report: &EvalReport, out_dir: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(Error::Io)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        write_atomic(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    emit("curve.csv", curve_csv(report))?;
    emit("dphi.csv", dphi_csv(report))?;
    emit("pairs.csv", pairs_csv(report))?;
    emit("config.txt", config_txt(report))?;
    if plot {
        let curve_title = match report.mode {
            EvalMode::FalsePositive => "False-positive matching rate".to_string(),
            EvalMode::TruePositive => match &report.deformation {
                Some(d) => format!("True-positive matching rate under {d}"),
                None => "True-positive matching rate".to_string(),
            },
        };
        emit("curve.svg", svg::render_curve(&report.curve, &curve_title))?;
        emit(
            "dphi.svg",
            svg::render_histogram(&report.dphi, "Orientation difference of matches"),
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ThresholdGrid;
    use crate::harness::{PairRecord, RateCurve};

    fn sample_report() -> EvalReport {
        let grid: ThresholdGrid = "0:0.5:1".parse().unwrap();
        let mut dphi = DeltaPhiHistogram::new();
        dphi.add_all([0.0, 90.0, 90.5]);
        EvalReport {
            mode: EvalMode::TruePositive,
            deformation: Some("rot:90".parse().unwrap()),
            corpus_label: "corpus".into(),
            n_images: 2,
            detector: "octave_scales=3".into(),
            ratio: 0.8,
            grid: grid.clone(),
            pairs: vec![PairRecord {
                id_a: "a.pgm".into(),
                id_b: "rot:90(a.pgm)".into(),
                n_a: 45,
                n_b: 44,
                n_matches: 30,
                rate: 30.0 / 44.0,
            }],
            curve: RateCurve::from_pair_rates(&grid, &[30.0 / 44.0]),
            dphi,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn csv_values_parse_back_within_1e9() {
        let report = sample_report();
        for line in curve_csv(&report).lines().skip(1) {
            let (t, r) = line.split_once(',').unwrap();
            let t: f64 = t.parse().unwrap();
            let r: f64 = r.parse().unwrap();
            let want = report.curve.rate_at(t).unwrap();
            assert!((r - want).abs() < 1e-9, "rate {r} vs {want}");
        }
        let probs = report.dphi.probabilities();
        for (k, line) in dphi_csv(&report).lines().skip(1).enumerate() {
            let (c, p) = line.split_once(',').unwrap();
            let c: f64 = c.parse().unwrap();
            let p: f64 = p.parse().unwrap();
            assert!((c - DeltaPhiHistogram::bin_center(k)).abs() < 1e-9);
            assert!((p - probs[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn pairs_csv_has_expected_row() {
        let report = sample_report();
        let text = pairs_csv(&report);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id_a,id_b,n_a,n_b,matches,r"));
        assert_eq!(
            lines.next(),
            Some("a.pgm,rot:90(a.pgm),45,44,30,0.681818182")
        );
    }

    #[test]
    fn config_echo_is_stable_and_jobs_free() {
        let report = sample_report();
        let text = config_txt(&report);
        assert_eq!(
            text,
            "mode=tp\ncorpus=corpus\nimages=2\ndeformation=rot:90\nratio=0.8\n\
             grid=0:0.5:1\ndetector=octave_scales=3\n"
        );
        assert!(!text.contains("jobs"));
    }

    #[test]
    fn export_is_byte_identical_across_runs() {
        let report = sample_report();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let files_a = export_report(&report, dir_a.path(), true).unwrap();
        let files_b = export_report(&report, dir_b.path(), true).unwrap();
        assert_eq!(files_a.len(), 6);
        for (a, b) in files_a.iter().zip(&files_b) {
            assert_eq!(a.file_name(), b.file_name());
            assert_eq!(
                std::fs::read(a).unwrap(),
                std::fs::read(b).unwrap(),
                "{:?} differs",
                a.file_name()
            );
        }
        // No stray temp files.
        let leftovers: Vec<_> = std::fs::read_dir(dir_a.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
