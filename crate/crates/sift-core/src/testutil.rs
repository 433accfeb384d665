//! Brute-force reference implementations and synthetic inputs used by the
//! test suites (this crate's and the benchmark harness'). Gated behind the
//! `testutil` feature; none of this is part of the library API proper.
//!
//! The references share the production contracts but none of the code:
//! full 2-D convolution instead of separable passes, neighbor-list scans
//! instead of early-exit loops, and a distance-matrix matcher instead of
//! the streaming nearest-neighbor search.

use rand::Rng;

use crate::keypoint::{Keypoint, RawExtremum, DESCRIPTOR_LEN};
use crate::matching::{Match, MatchResult, wrap_delta_phi};
use crate::pyramid::{DogOctave, DogPyramid, PyramidParams};
use crate::raster::{gaussian_kernel, GrayImage};

/// Full 2-D Gaussian convolution with the outer-product kernel and
/// replicated borders. Quadratic in the kernel radius; only for tests.
pub fn reference_gaussian_blur(img: &GrayImage<f64>, sigma: f64) -> GrayImage<f64> {
    let taps = gaussian_kernel::<f64>(sigma).unwrap();
    let r = taps.radius() as isize;
    let t = taps.taps();
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = 0.0;
        for ky in -r..=r {
            for kx in -r..=r {
                let w = t[(ky + r) as usize] * t[(kx + r) as usize];
                acc += w * img.get_clamped(x as isize + kx, y as isize + ky);
            }
        }
        acc
    })
}

/// Exhaustive 26-neighbor extremum scan over a DoG pyramid.
pub fn reference_extrema(dog: &DogPyramid<f64>) -> Vec<RawExtremum> {
    let mut out = Vec::new();
    for (o, oct) in dog.octaves.iter().enumerate() {
        let (w, h) = (oct.levels[0].width(), oct.levels[0].height());
        for l in 1..oct.levels.len() - 1 {
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let c = oct.levels[l].get(x, y);
                    let mut neighbors = Vec::with_capacity(26);
                    for dl in -1isize..=1 {
                        for dy in -1isize..=1 {
                            for dx in -1isize..=1 {
                                if dl == 0 && dy == 0 && dx == 0 {
                                    continue;
                                }
                                neighbors.push(
                                    oct.levels[(l as isize + dl) as usize]
                                        .get((x as isize + dx) as usize, (y as isize + dy) as usize),
                                );
                            }
                        }
                    }
                    let hi = neighbors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = neighbors.iter().cloned().fold(f64::INFINITY, f64::min);
                    if c > hi || c < lo {
                        out.push(RawExtremum { octave: o, level: l, x, y, value: c });
                    }
                }
            }
        }
    }
    out
}

/// Distance-matrix matcher implementing the same ratio/one-to-one rule as
/// `match_descriptors`, O(n_a * n_b) memory.
pub fn reference_match(
    set_a: &[Keypoint<f64>],
    set_b: &[Keypoint<f64>],
    ratio: f64,
) -> MatchResult {
    let (n_a, n_b) = (set_a.len(), set_b.len());
    let rate_of = |m: &Vec<Match>| {
        if n_a.min(n_b) == 0 {
            0.0
        } else {
            m.len() as f64 / n_a.min(n_b) as f64
        }
    };
    if n_a == 0 || n_b == 0 {
        let matches = Vec::new();
        let rate = rate_of(&matches);
        return MatchResult { matches, n_a, n_b, rate };
    }

    let dist: Vec<Vec<f64>> = set_a
        .iter()
        .map(|a| {
            set_b
                .iter()
                .map(|b| {
                    a.descriptor
                        .iter()
                        .zip(&b.descriptor)
                        .map(|(p, q)| (p - q).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();

    let mut accepted: Vec<Match> = Vec::new();
    for (i, row) in dist.iter().enumerate() {
        let mut order: Vec<usize> = (0..n_b).collect();
        order.sort_by(|&p, &q| row[p].partial_cmp(&row[q]).unwrap().then(p.cmp(&q)));
        let j = order[0];
        let d1 = row[j];
        let ok = if n_b == 1 {
            d1 == 0.0
        } else {
            d1 < ratio * row[order[1]]
        };
        if ok {
            accepted.push(Match {
                index_a: i,
                index_b: j,
                distance: d1,
                delta_phi: wrap_delta_phi(set_a[i].phi, set_b[j].phi),
            });
        }
    }

    let mut matches: Vec<Match> = Vec::new();
    for j in 0..n_b {
        let best = accepted
            .iter()
            .filter(|m| m.index_b == j)
            .min_by(|p, q| {
                (p.distance, p.index_a)
                    .partial_cmp(&(q.distance, q.index_a))
                    .unwrap()
            });
        if let Some(m) = best {
            matches.push(*m);
        }
    }
    matches.sort_by_key(|m| m.index_a);
    let rate = rate_of(&matches);
    MatchResult { matches, n_a, n_b, rate }
}

/// A negative-definite 3-D quadratic with a known interior stationary
/// point; its DoG stack exercises refinement against the closed form.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    /// Stationary point (x, y, level).
    pub center: [f64; 3],
    /// Diagonal curvature magnitudes (a, b, c).
    pub curv: [f64; 3],
    /// Cross-term coefficients (d, e, f) for xy, xl, yl.
    pub cross: [f64; 3],
    /// Peak value at the stationary point.
    pub peak: f64,
}

impl Quadratic {
    /// Draws a quadratic whose refinement must succeed: offsets within
    /// +-0.45 of the integer start, contrast above 0.05, nearly isotropic
    /// spatial curvature, and diagonally dominant (hence definite) Hessian.
    pub fn random(rng: &mut impl Rng, w: usize, h: usize) -> Self {
        let cx = rng.gen_range(2.0..(w as f64 - 3.0));
        let cy = rng.gen_range(2.0..(h as f64 - 3.0));
        let cl = 1.0 + rng.gen_range(-0.45..0.45);
        let center = [cx.round() + rng.gen_range(-0.45..0.45), cy.round() + rng.gen_range(-0.45..0.45), cl];
        let a: f64 = rng.gen_range(0.01..0.03);
        let b = rng.gen_range(0.6 * a..1.6 * a).min(0.03);
        let c: f64 = rng.gen_range(0.01..0.03);
        let small = 0.2 * a.min(b).min(c);
        Quadratic {
            center,
            curv: [a, b, c],
            cross: [
                rng.gen_range(-small..small),
                rng.gen_range(-small..small),
                rng.gen_range(-small..small),
            ],
            peak: rng.gen_range(0.1..0.4),
        }
    }

    pub fn eval(&self, x: f64, y: f64, l: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let dl = l - self.center[2];
        self.peak
            - self.curv[0] * dx * dx
            - self.curv[1] * dy * dy
            - self.curv[2] * dl * dl
            - self.cross[0] * dx * dy
            - self.cross[1] * dx * dl
            - self.cross[2] * dy * dl
    }

    /// Materializes the quadratic as a 3-level DoG octave.
    pub fn dog_octave(&self, w: usize, h: usize) -> DogOctave<f64> {
        DogOctave {
            levels: (0..3)
                .map(|l| GrayImage::from_fn(w, h, |x, y| self.eval(x as f64, y as f64, l as f64)))
                .collect(),
            level_sigmas: (0..3).map(|i| 1.6 * 2f64.powf(i as f64 / 3.0)).collect(),
            scale_factor: 1.0,
        }
    }

    /// The integer sample nearest the stationary point.
    pub fn start(&self) -> RawExtremum {
        RawExtremum {
            octave: 0,
            level: 1,
            x: self.center[0].round() as usize,
            y: self.center[1].round() as usize,
            value: self.peak,
        }
    }
}

/// Smooth deterministic-given-rng random image: a few low-frequency cosine
/// waves over a mid-gray base, guaranteed inside [0.05, 0.95].
pub fn random_smooth_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage<f64> {
    let terms: Vec<(f64, f64, f64, f64)> = (0..5)
        .map(|_| {
            (
                rng.gen_range(0.04..0.08),                      // amplitude
                rng.gen_range(0.02..0.25),                      // x frequency
                rng.gen_range(0.02..0.25),                      // y frequency
                rng.gen_range(0.0..std::f64::consts::TAU),      // phase
            )
        })
        .collect();
    GrayImage::from_fn(w, h, |x, y| {
        let mut v = 0.5;
        for &(amp, fx, fy, ph) in &terms {
            v += amp * (fx * x as f64 + fy * y as f64 + ph).cos();
        }
        v
    })
}

/// A random multi-octave DoG stack (values in roughly [-0.1, 0.1]) for
/// extrema-scan comparisons; not derived from any Gaussian pyramid.
pub fn random_dog_pyramid(rng: &mut impl Rng, w: usize, h: usize, levels: usize) -> DogPyramid<f64> {
    let octave = DogOctave {
        levels: (0..levels)
            .map(|_| GrayImage::from_fn(w, h, |_, _| rng.gen_range(-0.1..0.1)))
            .collect(),
        level_sigmas: (0..levels).map(|i| 1.6 * 2f64.powf(i as f64 / 3.0)).collect(),
        scale_factor: 1.0,
    };
    DogPyramid {
        octaves: vec![octave],
        params: PyramidParams::default(),
    }
}

/// Random keypoints with unit-norm non-negative descriptors, shaped like
/// real SIFT output.
pub fn random_keypoint_set(rng: &mut impl Rng, n: usize) -> Vec<Keypoint<f64>> {
    (0..n)
        .map(|_| {
            let mut descriptor = [0.0f64; DESCRIPTOR_LEN];
            for d in descriptor.iter_mut() {
                // Sparse, like trilinear-scattered gradient mass.
                *d = if rng.gen_bool(0.3) { rng.gen_range(0.0..1.0) } else { 0.0 };
            }
            let norm: f64 = descriptor.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for d in descriptor.iter_mut() {
                    *d /= norm;
                }
            } else {
                descriptor[0] = 1.0;
            }
            Keypoint {
                x: rng.gen_range(0.0..256.0),
                y: rng.gen_range(0.0..256.0),
                sigma: rng.gen_range(1.0..8.0),
                phi: rng.gen_range(0.0..360.0),
                response: rng.gen_range(0.03..0.3),
                descriptor,
            }
        })
        .collect()
}
