//! Minimal hand-rolled SVG charts for the evaluation reports.
//!
//! Rendering depends only on the data, so the files are byte-identical across
//! runs. Coordinates are emitted with two decimals to keep the output stable
//! and small.

use std::fmt::Write as _;

use crate::harness::{DeltaPhiHistogram, RateCurve, DPHI_BINS};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 58.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(f64::MIN_POSITIVE);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn open_svg(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>",
        px(WIDTH / 2.0),
        title
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = px(MARGIN_LEFT);
    let x1 = px(WIDTH - MARGIN_RIGHT);
    let y0 = px(HEIGHT - MARGIN_BOTTOM);
    let y1 = px(MARGIN_TOP);
    let _ = writeln!(
        out,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>",
        px((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
        px(HEIGHT - 14.0),
        x_label
    );
    let _ = writeln!(
        out,
        "  <text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        px((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        px((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        y_label
    );
    // Five ticks per axis.
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let tx = px(frame.x(fx));
        let ty = px(frame.y(fy));
        let _ = writeln!(
            out,
            "  <line x1=\"{tx}\" y1=\"{y0}\" x2=\"{tx}\" y2=\"{}\" stroke=\"black\"/>",
            px(HEIGHT - MARGIN_BOTTOM + 5.0)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{tx}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            px(HEIGHT - MARGIN_BOTTOM + 20.0),
            trim_tick(fx)
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{ty}\" x2=\"{x0}\" y2=\"{ty}\" stroke=\"black\"/>",
            px(MARGIN_LEFT - 5.0)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>",
            px(MARGIN_LEFT - 9.0),
            px(frame.y(fy) + 4.0),
            trim_tick(fy)
        );
    }
}

fn trim_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Renders a matching-rate curve as a polyline over its threshold grid.
pub fn render_curve(curve: &RateCurve, title: &str) -> String {
    let frame = Frame {
        x_min: *curve.thresholds.first().unwrap_or(&0.0),
        x_max: *curve.thresholds.last().unwrap_or(&1.0),
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, &frame, "rate threshold r_T", "P(r > r_T)");
    let mut points = String::new();
    for (t, r) in curve.thresholds.iter().zip(&curve.rates) {
        if !points.is_empty() {
            points.push(' ');
        }
        let _ = write!(points, "{},{}", px(frame.x(*t)), px(frame.y(*r)));
    }
    let _ = writeln!(
        out,
        "  <polyline points=\"{points}\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\"/>"
    );
    out.push_str("</svg>\n");
    out
}

/// Renders an orientation-difference histogram as a bar chart over 0..360
/// degrees.
pub fn render_histogram(hist: &DeltaPhiHistogram, title: &str) -> String {
    let probs = hist.probabilities();
    let y_max = probs.iter().cloned().fold(0.0f64, f64::max).max(1e-3);
    let frame = Frame {
        x_min: 0.0,
        x_max: 360.0,
        y_min: 0.0,
        y_max,
    };
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(
        &mut out,
        &frame,
        "orientation difference (deg)",
        "probability",
    );
    let half = DeltaPhiHistogram::bin_width() / 2.0;
    for (k, p) in probs.iter().enumerate().take(DPHI_BINS) {
        if *p <= 0.0 {
            continue;
        }
        let center = DeltaPhiHistogram::bin_center(k);
        // Bin 0 straddles the wrap-around; draw its left half at the right
        // edge of the chart.
        let segments: &[(f64, f64)] = if k == 0 {
            &[(0.0, half), (360.0 - half, 360.0)]
        } else {
            &[(center - half, center + half)]
        };
        for &(lo, hi) in segments {
            let x = frame.x(lo);
            let w = frame.x(hi) - x;
            let y = frame.y(*p);
            let h = frame.y(0.0) - y;
            let _ = writeln!(
                out,
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#912f2f\"/>",
                px(x),
                px(y),
                px(w),
                px(h)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
