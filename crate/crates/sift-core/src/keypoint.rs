//! Keypoint detection and description.
//!
//! The pipeline runs in four stages: discrete extrema detection on the DoG
//! stack, sub-voxel refinement with contrast/edge filtering, orientation
//! assignment from a gradient histogram, and the 4x4x8 gradient descriptor.
//! Localization and histogram math run in `f64` regardless of the pixel
//! scalar; only pixel access and the stored descriptor use `T`.

use crate::error::{Error, Result};
use crate::pyramid::{DogOctave, DogPyramid, GaussianPyramid, PyramidParams};
use crate::raster::GrayImage;
use crate::scalar::Real;

/// Length of the 4x4 cells x 8 orientation bins descriptor.
pub const DESCRIPTOR_LEN: usize = 128;

/// Detection, refinement, and description parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    pub pyramid: PyramidParams,
    /// Minimum refined |DoG| response.
    pub contrast_threshold: f64,
    /// Principal-curvature ratio bound for the edge test.
    pub edge_ratio: f64,
    /// Iteration budget for sub-voxel refinement.
    pub max_refine_iterations: usize,
    /// Bin count of the orientation histogram.
    pub orientation_bins: usize,
    /// Secondary orientation peaks must reach this fraction of the maximum.
    pub peak_ratio: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            pyramid: PyramidParams::default(),
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            max_refine_iterations: 5,
            orientation_bins: 36,
            peak_ratio: 0.8,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        self.pyramid.validate()?;
        if !(self.contrast_threshold >= 0.0) || !self.contrast_threshold.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "contrast_threshold must be >= 0, got {}",
                self.contrast_threshold
            )));
        }
        if !(self.edge_ratio >= 1.0) || !self.edge_ratio.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "edge_ratio must be >= 1, got {}",
                self.edge_ratio
            )));
        }
        if self.max_refine_iterations < 1 {
            return Err(Error::InvalidArgument(
                "max_refine_iterations must be at least 1".into(),
            ));
        }
        if self.orientation_bins < 2 {
            return Err(Error::InvalidArgument(
                "orientation_bins must be at least 2".into(),
            ));
        }
        if !(self.peak_ratio > 0.0 && self.peak_ratio <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "peak_ratio must be in (0, 1], got {}",
                self.peak_ratio
            )));
        }
        Ok(())
    }
}

/// A discrete DoG extremum before refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawExtremum {
    pub octave: usize,
    pub level: usize,
    pub x: usize,
    pub y: usize,
    pub value: f64,
}

/// A refined scale-space location in octave coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedPoint {
    pub octave: usize,
    pub x_oct: f64,
    pub y_oct: f64,
    /// Fractional level index within the octave.
    pub level_f: f64,
    /// Octave-local blur `sigma0 * k^level_f`.
    pub sigma_oct: f64,
    /// `|D(x_hat)|`, the interpolated contrast.
    pub response: f64,
}

/// A described keypoint in input-image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Keypoint<T> {
    pub x: f64,
    pub y: f64,
    /// Absolute scale (blur in input pixels).
    pub sigma: f64,
    /// Orientation in degrees, `[0, 360)`.
    pub phi: f64,
    /// Interpolated DoG contrast.
    pub response: f64,
    pub descriptor: [T; DESCRIPTOR_LEN],
}

/// Maps an angle in degrees onto `[0, 360)`.
#[inline]
pub fn wrap_degrees(d: f64) -> f64 {
    let mut w = d % 360.0;
    if w < 0.0 {
        w += 360.0;
    }
    if w >= 360.0 {
        // Guards against -1e-20 % 360 + 360 rounding up to exactly 360.
        w = 0.0;
    }
    w
}

/// Gradient magnitude and orientation (degrees) from central pixel
/// differences; edge neighbors replicate. Zero gradients report (0, 0).
pub fn gradient_at<T: Real>(img: &GrayImage<T>, x: usize, y: usize) -> (f64, f64) {
    let gx = (img.get_clamped(x as isize + 1, y as isize)
        - img.get_clamped(x as isize - 1, y as isize))
    .widen();
    let gy = (img.get_clamped(x as isize, y as isize + 1)
        - img.get_clamped(x as isize, y as isize - 1))
    .widen();
    gradient_polar(gx, gy)
}

#[inline]
fn gradient_polar(gx: f64, gy: f64) -> (f64, f64) {
    let m = gx.hypot(gy);
    if m == 0.0 {
        return (0.0, 0.0);
    }
    (m, wrap_degrees(gy.atan2(gx).to_degrees()))
}

/// Scans every DoG octave for pixels strictly above or strictly below all
/// 26 space/scale neighbors. Only the middle `s` levels are eligible and a
/// one-pixel spatial margin is kept; ties never qualify.
pub fn detect_extrema<T: Real>(dog: &DogPyramid<T>) -> Vec<RawExtremum> {
    let mut out = Vec::new();
    for (o, oct) in dog.octaves.iter().enumerate() {
        let (w, h) = (oct.levels[0].width(), oct.levels[0].height());
        for l in 1..oct.levels.len() - 1 {
            let below = &oct.levels[l - 1];
            let here = &oct.levels[l];
            let above = &oct.levels[l + 1];
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let c = here.get(x, y);
                    if is_extremum(c, below, here, above, x, y) {
                        out.push(RawExtremum {
                            octave: o,
                            level: l,
                            x,
                            y,
                            value: c.widen(),
                        });
                    }
                }
            }
        }
    }
    out
}

#[inline]
fn is_extremum<T: Real>(
    c: T,
    below: &GrayImage<T>,
    here: &GrayImage<T>,
    above: &GrayImage<T>,
    x: usize,
    y: usize,
) -> bool {
    let mut maximal = true;
    let mut minimal = true;
    for img in [below, here, above] {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if std::ptr::eq(img, here) && dx == 0 && dy == 0 {
                    continue;
                }
                let n = img.get((x as isize + dx) as usize, (y as isize + dy) as usize);
                if c <= n {
                    maximal = false;
                }
                if c >= n {
                    minimal = false;
                }
                if !maximal && !minimal {
                    return false;
                }
            }
        }
    }
    maximal || minimal
}

/// 3-D gradient and Hessian of the DoG stack at an integer location,
/// from central differences.
struct LocalQuadric {
    value: f64,
    grad: [f64; 3],
    hess: [[f64; 3]; 3],
}

fn sample_quadric<T: Real>(oct: &DogOctave<T>, l: usize, x: usize, y: usize) -> LocalQuadric {
    let d = |dl: isize, dx: isize, dy: isize| -> f64 {
        oct.levels[(l as isize + dl) as usize]
            .get((x as isize + dx) as usize, (y as isize + dy) as usize)
            .widen()
    };
    let c = d(0, 0, 0);
    let dx = (d(0, 1, 0) - d(0, -1, 0)) / 2.0;
    let dy = (d(0, 0, 1) - d(0, 0, -1)) / 2.0;
    let dl = (d(1, 0, 0) - d(-1, 0, 0)) / 2.0;
    let dxx = d(0, 1, 0) - 2.0 * c + d(0, -1, 0);
    let dyy = d(0, 0, 1) - 2.0 * c + d(0, 0, -1);
    let dll = d(1, 0, 0) - 2.0 * c + d(-1, 0, 0);
    let dxy = (d(0, 1, 1) - d(0, -1, 1) - d(0, 1, -1) + d(0, -1, -1)) / 4.0;
    let dxl = (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0)) / 4.0;
    let dyl = (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1)) / 4.0;
    LocalQuadric {
        value: c,
        grad: [dx, dy, dl],
        hess: [[dxx, dxy, dxl], [dxy, dyy, dyl], [dxl, dyl, dll]],
    }
}

/// Solves `H u = -g`; `None` when `|det H| < 1e-12`.
fn solve_offset(q: &LocalQuadric) -> Option<[f64; 3]> {
    let h = &q.hess;
    let det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    let b = [-q.grad[0], -q.grad[1], -q.grad[2]];
    // Cramer's rule on the 3x3 system.
    let col = |i: usize| {
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = if c == i { b[r] } else { h[r][c] };
            }
        }
        (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            / det
    };
    Some([col(0), col(1), col(2)])
}

/// Refines a discrete extremum to sub-voxel precision and applies the
/// contrast and edge tests. Returns `None` when the point is rejected.
///
/// Each iteration solves the local quadratic model; offsets larger than
/// half a sample step the integer location by one along that axis. Points
/// that drift outside the valid interior, hit a singular Hessian, or fail
/// to converge within the iteration budget are dropped.
pub fn refine_extremum<T: Real>(
    oct: &DogOctave<T>,
    e: &RawExtremum,
    params: &DetectorParams,
) -> Option<RefinedPoint> {
    let (w, h) = (oct.levels[0].width(), oct.levels[0].height());
    let max_level = oct.levels.len() - 2; // interior DoG levels are 1..=s
    let (mut x, mut y, mut l) = (e.x as isize, e.y as isize, e.level as isize);
    let mut converged = None;
    for _ in 0..params.max_refine_iterations {
        let q = sample_quadric(oct, l as usize, x as usize, y as usize);
        let u = solve_offset(&q)?;
        if u[0].abs() <= 0.5 && u[1].abs() <= 0.5 && u[2].abs() <= 0.5 {
            converged = Some((q, u));
            break;
        }
        if u[0] > 0.5 {
            x += 1;
        } else if u[0] < -0.5 {
            x -= 1;
        }
        if u[1] > 0.5 {
            y += 1;
        } else if u[1] < -0.5 {
            y -= 1;
        }
        if u[2] > 0.5 {
            l += 1;
        } else if u[2] < -0.5 {
            l -= 1;
        }
        if x < 1 || x > w as isize - 2 || y < 1 || y > h as isize - 2 || l < 1 || l > max_level as isize
        {
            return None;
        }
    }
    let (q, u) = converged?;

    let d_hat = q.value + 0.5 * (q.grad[0] * u[0] + q.grad[1] * u[1] + q.grad[2] * u[2]);
    if d_hat.abs() < params.contrast_threshold {
        return None;
    }

    // Edge response from the 2x2 spatial Hessian.
    let (dxx, dyy, dxy) = (q.hess[0][0], q.hess[1][1], q.hess[0][1]);
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    let r = params.edge_ratio;
    if !(det > 0.0 && tr * tr * r < det * (r + 1.0) * (r + 1.0)) {
        return None;
    }

    let level_f = l as f64 + u[2];
    Some(RefinedPoint {
        octave: e.octave,
        x_oct: x as f64 + u[0],
        y_oct: y as f64 + u[1],
        level_f,
        sigma_oct: params.pyramid.level_sigma(level_f),
        response: d_hat.abs(),
    })
}

/// Smooths a circular histogram in place with the `[1/3, 1/3, 1/3]` box.
fn smooth_circular(hist: &mut [f64], passes: usize) {
    let n = hist.len();
    let mut tmp = vec![0.0; n];
    for _ in 0..passes {
        for i in 0..n {
            tmp[i] = (hist[(i + n - 1) % n] + hist[i] + hist[(i + 1) % n]) / 3.0;
        }
        hist.copy_from_slice(&tmp);
    }
}

/// Fractional bin positions of qualifying peaks: strict local maxima at or
/// above `peak_ratio` times the histogram maximum, each sharpened with a
/// three-point parabolic fit.
fn histogram_peaks(hist: &[f64], peak_ratio: f64) -> Vec<f64> {
    let n = hist.len();
    let max = hist.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for b in 0..n {
        let left = hist[(b + n - 1) % n];
        let center = hist[b];
        let right = hist[(b + 1) % n];
        if center > left && center > right && center >= peak_ratio * max {
            let denom = left - 2.0 * center + right;
            let delta = if denom == 0.0 {
                0.0
            } else {
                0.5 * (left - right) / denom
            };
            peaks.push(b as f64 + delta);
        }
    }
    peaks
}

/// Dominant gradient orientations (degrees) around a refined point.
///
/// Gradients inside a square window of radius `round(3 * 1.5 * sigma_oct)`
/// vote into a 36-bin histogram, weighted by a Gaussian of width
/// `1.5 * sigma_oct` centered on the sub-pixel location. Pixels outside the
/// image are skipped. The histogram is box-smoothed twice before peak
/// extraction.
pub fn assign_orientations<T: Real>(
    img: &GrayImage<T>,
    x: f64,
    y: f64,
    sigma_oct: f64,
    params: &DetectorParams,
) -> Vec<f64> {
    let bins = params.orientation_bins;
    let bin_width = 360.0 / bins as f64;
    let sigma_w = 1.5 * sigma_oct;
    let radius = ((3.0 * sigma_w).round() as isize).max(1);
    let (cx, cy) = (x.round() as isize, y.round() as isize);
    let inv_denom = 1.0 / (2.0 * sigma_w * sigma_w);

    let mut hist = vec![0.0f64; bins];
    for py in cy - radius..=cy + radius {
        if py < 0 || py >= img.height() as isize {
            continue;
        }
        for px in cx - radius..=cx + radius {
            if px < 0 || px >= img.width() as isize {
                continue;
            }
            let (m, theta) = gradient_at(img, px as usize, py as usize);
            if m == 0.0 {
                continue;
            }
            let dx = px as f64 - x;
            let dy = py as f64 - y;
            let w = (-(dx * dx + dy * dy) * inv_denom).exp();
            let bin = (theta / bin_width).round() as usize % bins;
            hist[bin] += m * w;
        }
    }

    smooth_circular(&mut hist, 2);
    histogram_peaks(&hist, params.peak_ratio)
        .into_iter()
        .map(|p| wrap_degrees(p * bin_width))
        .collect()
}

/// Builds the 128-d descriptor for a keypoint at (`x`, `y`) with local
/// blur `sigma_oct` and orientation `phi` degrees.
///
/// A 16x16 sample grid with spacing `sigma_oct`, rotated by `phi`, feeds
/// gradients (relative to `phi`) into 4x4 spatial cells of 8 orientation
/// bins via trilinear interpolation, Gaussian-weighted over the grid. The
/// result is unit-normalized, clamped at 0.2, and renormalized. Returns
/// `None` when the rotated grid's bounding circle leaves the image or all
/// gradients vanish.
pub fn compute_descriptor<T: Real>(
    img: &GrayImage<T>,
    x: f64,
    y: f64,
    sigma_oct: f64,
    phi: f64,
) -> Option<[T; DESCRIPTOR_LEN]> {
    let spacing = sigma_oct;
    // Circumradius of the rotated grid plus one pixel for the gradient
    // probes; circular, so the bound is rotation-invariant.
    let reach = 7.5 * std::f64::consts::SQRT_2 * spacing + 1.0;
    let (w, h) = (img.width() as f64 - 1.0, img.height() as f64 - 1.0);
    if x - reach < 0.0 || x + reach > w || y - reach < 0.0 || y + reach > h {
        return None;
    }

    let (sin_p, cos_p) = phi.to_radians().sin_cos();
    let mut acc = [0.0f64; DESCRIPTOR_LEN];
    for iv in 0..16 {
        let v = iv as f64 - 7.5;
        for iu in 0..16 {
            let u = iu as f64 - 7.5;
            let off_x = (cos_p * u - sin_p * v) * spacing;
            let off_y = (sin_p * u + cos_p * v) * spacing;
            let sx = x + off_x;
            let sy = y + off_y;
            let gx = (img.bilinear_clamped(T::of(sx + 1.0), T::of(sy))
                - img.bilinear_clamped(T::of(sx - 1.0), T::of(sy)))
            .widen();
            let gy = (img.bilinear_clamped(T::of(sx), T::of(sy + 1.0))
                - img.bilinear_clamped(T::of(sx), T::of(sy - 1.0)))
            .widen();
            let (m, theta) = gradient_polar(gx, gy);
            if m == 0.0 {
                continue;
            }
            let rel = wrap_degrees(theta - phi);
            let weight = (-(u * u + v * v) / 128.0).exp();
            let contrib = m * weight;

            // Trilinear scatter: cell coordinates in [-0.375, 3.375],
            // orientation bin in [0, 8) with wrap-around.
            let cu = u / 4.0 + 1.5;
            let cv = v / 4.0 + 1.5;
            let ob = rel / 45.0;
            let cu0 = cu.floor();
            let cv0 = cv.floor();
            let ob0 = ob.floor();
            let fu = cu - cu0;
            let fv = cv - cv0;
            let fo = ob - ob0;
            for (du, wu) in [(0, 1.0 - fu), (1, fu)] {
                let ci = cu0 as isize + du;
                if !(0..4).contains(&ci) || wu == 0.0 {
                    continue;
                }
                for (dv, wv) in [(0, 1.0 - fv), (1, fv)] {
                    let cj = cv0 as isize + dv;
                    if !(0..4).contains(&cj) || wv == 0.0 {
                        continue;
                    }
                    for (do_, wo) in [(0, 1.0 - fo), (1, fo)] {
                        let oi = (ob0 as isize + do_).rem_euclid(8) as usize;
                        acc[((cj as usize * 4) + ci as usize) * 8 + oi] +=
                            contrib * wu * wv * wo;
                    }
                }
            }
        }
    }

    let norm = acc.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return None;
    }
    for d in acc.iter_mut() {
        *d = (*d / norm).min(0.2);
    }
    let norm2 = acc.iter().map(|d| d * d).sum::<f64>().sqrt();
    let mut out = [T::zero(); DESCRIPTOR_LEN];
    for (o, d) in out.iter_mut().zip(acc.iter()) {
        *o = T::of(d / norm2);
    }
    Some(out)
}

/// Runs the full pipeline: pyramids, extrema, refinement, orientations,
/// and descriptors, reporting keypoints in input-image coordinates.
///
/// Output order is deterministic: ascending (octave, level, y, x) of the
/// source extremum, then orientation bin order.
pub fn detect_and_describe<T: Real>(
    img: &GrayImage<T>,
    params: &DetectorParams,
) -> Result<Vec<Keypoint<T>>> {
    params.validate()?;
    let gauss = GaussianPyramid::build(img, &params.pyramid)?;
    let dog = DogPyramid::build(&gauss);
    Ok(describe_from_pyramids(&gauss, &dog, params))
}

/// Same as [`detect_and_describe`] but reuses prebuilt pyramids.
pub fn describe_from_pyramids<T: Real>(
    gauss: &GaussianPyramid<T>,
    dog: &DogPyramid<T>,
    params: &DetectorParams,
) -> Vec<Keypoint<T>> {
    let max_gauss_level = params.pyramid.octave_scales as isize + 2;
    let mut out = Vec::new();
    for e in detect_extrema(dog) {
        let Some(r) = refine_extremum(&dog.octaves[e.octave], &e, params) else {
            continue;
        };
        let goct = &gauss.octaves[e.octave];
        let gl = (r.level_f.round() as isize).clamp(0, max_gauss_level) as usize;
        let gimg = &goct.levels[gl];
        for phi in assign_orientations(gimg, r.x_oct, r.y_oct, r.sigma_oct, params) {
            let Some(descriptor) = compute_descriptor(gimg, r.x_oct, r.y_oct, r.sigma_oct, phi)
            else {
                continue;
            };
            out.push(Keypoint {
                x: r.x_oct * goct.scale_factor,
                y: r.y_oct * goct.scale_factor,
                sigma: r.sigma_oct * goct.scale_factor,
                phi,
                response: r.response,
                descriptor,
            });
        }
    }
    out
}
