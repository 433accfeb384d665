//! Synthetic benchmark corpus.
//!
//! Real benchmark photos cannot ship with the repository, so the harness can
//! generate a stand-in corpus: cluttered gray-scale scenes built from a smooth
//! illumination background, a few soft large shapes, oriented strokes, and a
//! dense field of small Gaussian blobs. Blobs are the main keypoint source;
//! shapes and strokes add larger-scale structure and orientation diversity.
//!
//! Everything is driven by a `ChaCha8` stream cipher RNG keyed on the corpus
//! seed and image index, so a given `(seed, count, size)` always produces the
//! same bytes. Content keeps a margin from the border: descriptors need a
//! full sampling window inside the image, and keypoints whose support is cut
//! off would silently vanish from every evaluation.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sift_core::{write_pgm, GrayImage64, Result};

/// Default number of corpus images.
pub const DEFAULT_COUNT: usize = 12;
/// Default square image size in pixels.
pub const DEFAULT_SIZE: usize = 256;

fn smootherstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn add_blob(buf: &mut [f64], w: usize, h: usize, cx: f64, cy: f64, sigma: f64, amp: f64) {
    let reach = (4.0 * sigma).ceil();
    let x_lo = ((cx - reach).floor().max(0.0)) as usize;
    let x_hi = ((cx + reach).ceil().min(w as f64 - 1.0)) as usize;
    let y_lo = ((cy - reach).floor().max(0.0)) as usize;
    let y_hi = ((cy + reach).ceil().min(h as f64 - 1.0)) as usize;
    let inv = 1.0 / (2.0 * sigma * sigma);
    for y in y_lo..=y_hi {
        let dy = y as f64 - cy;
        for x in x_lo..=x_hi {
            let dx = x as f64 - cx;
            buf[y * w + x] += amp * (-(dx * dx + dy * dy) * inv).exp();
        }
    }
}

fn add_disc(buf: &mut [f64], w: usize, h: usize, cx: f64, cy: f64, radius: f64, amp: f64, soft: f64) {
    let reach = (radius + 3.0 * soft).ceil();
    let x_lo = ((cx - reach).floor().max(0.0)) as usize;
    let x_hi = ((cx + reach).ceil().min(w as f64 - 1.0)) as usize;
    let y_lo = ((cy - reach).floor().max(0.0)) as usize;
    let y_hi = ((cy + reach).ceil().min(h as f64 - 1.0)) as usize;
    for y in y_lo..=y_hi {
        let dy = y as f64 - cy;
        for x in x_lo..=x_hi {
            let dx = x as f64 - cx;
            let d = (dx * dx + dy * dy).sqrt();
            buf[y * w + x] += amp * smootherstep((radius - d) / soft + 0.5);
        }
    }
}

fn add_stroke(
    buf: &mut [f64],
    w: usize,
    h: usize,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    half_width: f64,
    amp: f64,
) {
    let reach = 3.0 * half_width;
    let x_lo = ((x0.min(x1) - reach).floor().max(0.0)) as usize;
    let x_hi = ((x0.max(x1) + reach).ceil().min(w as f64 - 1.0)) as usize;
    let y_lo = ((y0.min(y1) - reach).floor().max(0.0)) as usize;
    let y_hi = ((y0.max(y1) + reach).ceil().min(h as f64 - 1.0)) as usize;
    let (ex, ey) = (x1 - x0, y1 - y0);
    let len_sq = (ex * ex + ey * ey).max(f64::MIN_POSITIVE);
    let inv = 1.0 / (2.0 * half_width * half_width);
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let (px, py) = (x as f64 - x0, y as f64 - y0);
            let t = ((px * ex + py * ey) / len_sq).clamp(0.0, 1.0);
            let (dx, dy) = (px - t * ex, py - t * ey);
            let d_sq = dx * dx + dy * dy;
            buf[y * w + x] += amp * (-d_sq * inv).exp();
        }
    }
}

/// Renders one synthetic scene. Different seeds give structurally unrelated
/// images; the same seed always gives the same image.
pub fn synth_image(seed: u64, width: usize, height: usize) -> GrayImage64 {
    assert!(width >= 64 && height >= 64, "corpus images must be at least 64x64");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width, height);
    let mut buf = vec![0.0f64; w * h];

    // Smooth illumination: a base level plus two broad cosine waves. Too
    // smooth to produce keypoints of its own, but it keeps flat regions from
    // being literally constant.
    let base = rng.gen_range(0.38..0.48);
    let mut waves = Vec::new();
    for _ in 0..2 {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let wavelength = rng.gen_range(0.45..1.1) * w.min(h) as f64;
        let amp = rng.gen_range(0.03..0.07);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        waves.push((angle.cos() / wavelength, angle.sin() / wavelength, amp, phase));
    }
    for y in 0..h {
        for x in 0..w {
            let mut v = base;
            for &(ux, uy, amp, phase) in &waves {
                v += amp
                    * (std::f64::consts::TAU * (x as f64 * ux + y as f64 * uy) + phase).cos();
            }
            buf[y * w + x] = v;
        }
    }

    // Margins keep descriptor windows inside the image (see module docs).
    // Small images scale them down proportionally; the full margin only fits
    // from roughly 200px upward.
    let min_dim = w.min(h) as f64;
    let disc_margin = 52.0f64.min(0.28 * min_dim);
    let stroke_margin = 44.0f64.min(0.24 * min_dim);
    let blob_margin = 36.0f64.min(0.18 * min_dim);
    let span = |rng: &mut ChaCha8Rng, extent: usize, margin: f64| -> f64 {
        rng.gen_range(margin..extent as f64 - margin)
    };

    // Per-image emphasis keeps the corpus heterogeneous: unrelated images
    // should not share a common structural style the matcher could latch on.
    let style = seed % 3;
    let disc_count = if style == 0 { 6 } else { 3 } + rng.gen_range(0..2);
    let stroke_count = if style == 1 { 14 } else { 7 } + rng.gen_range(0..4);
    let blob_count = w * h / if style == 2 { 280 } else { 340 };
    let coarse_count = 11 + rng.gen_range(0..4);

    for _ in 0..disc_count {
        let cx = span(&mut rng, w, disc_margin);
        let cy = span(&mut rng, h, disc_margin);
        let radius = rng.gen_range(14.0..38.0);
        let amp = rng.gen_range(0.10..0.22) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let soft = rng.gen_range(2.2..4.0);
        add_disc(&mut buf, w, h, cx, cy, radius, amp, soft);
    }

    for _ in 0..stroke_count {
        let x0 = span(&mut rng, w, stroke_margin);
        let y0 = span(&mut rng, h, stroke_margin);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(16.0..44.0);
        let x1 = (x0 + len * angle.cos()).clamp(stroke_margin, w as f64 - stroke_margin);
        let y1 = (y0 + len * angle.sin()).clamp(stroke_margin, h as f64 - stroke_margin);
        let half_width = rng.gen_range(1.3..2.3);
        let amp = rng.gen_range(0.12..0.24) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        add_stroke(&mut buf, w, h, x0, y0, x1, y1, half_width, amp);
    }

    // Coarse blobs detect one to two octaves up. They need a wider margin
    // (descriptor reach doubles per octave) and they are what keeps some
    // structure alive under long motion blurs, where fine speckle is erased.
    let coarse_margin = 64.0f64.min(0.3 * min_dim);
    for _ in 0..coarse_count {
        let cx = span(&mut rng, w, coarse_margin);
        let cy = span(&mut rng, h, coarse_margin);
        let sigma = rng.gen_range(3.5..6.5);
        let amp = rng.gen_range(0.18..0.30) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        add_blob(&mut buf, w, h, cx, cy, sigma, amp);
    }

    // A few strong, very coarse blobs in the central region. A long motion
    // blur attenuates a blob of size sigma by roughly sigma/sqrt(sigma^2 +
    // L^2/12); only structure this large keeps its DoG response above the
    // detector's contrast threshold around L = 30, which is what makes the
    // blur degradation gradual instead of a cliff.
    let mega_margin = 78.0f64.min(0.34 * min_dim);
    for _ in 0..3 + (seed % 2) as usize {
        let cx = span(&mut rng, w, mega_margin);
        let cy = span(&mut rng, h, mega_margin);
        let sigma = rng.gen_range(6.5..8.5);
        let amp = rng.gen_range(0.30..0.42) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        add_blob(&mut buf, w, h, cx, cy, sigma, amp);
    }

    for _ in 0..blob_count {
        let cx = span(&mut rng, w, blob_margin);
        let cy = span(&mut rng, h, blob_margin);
        let sigma = rng.gen_range(1.5..2.7);
        let amp = rng.gen_range(0.15..0.30) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        add_blob(&mut buf, w, h, cx, cy, sigma, amp);
    }

    for v in &mut buf {
        *v = v.clamp(0.03, 0.97);
    }
    GrayImage64::from_pixels(w, h, buf).expect("buffer matches its own dimensions")
}

/// Writes `count` images (`img00.pgm`, `img01.pgm`, ...) into `dir` and
/// returns their paths in name order.
pub fn write_corpus(dir: &Path, count: usize, size: usize, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(sift_core::Error::Io)?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let img = synth_image(seed.wrapping_add(i as u64), size, size);
        let path = dir.join(format!("img{i:02}.pgm"));
        write_pgm(&path, &img)?;
        paths.push(path);
    }
    Ok(paths)
}
