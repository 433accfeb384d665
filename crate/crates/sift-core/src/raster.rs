//! Grayscale raster, separable Gaussian convolution, and resampling
//! primitives shared by every stage of the pipeline.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major grayscale image with intensities nominally in `[0, 1]`.
///
/// Difference images (DoG levels) reuse this container with signed values;
/// the `[0, 1]` contract applies to loaded and warped images.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    /// Creates an image filled with `value`.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    /// Wraps an existing row-major buffer.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be >= 1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[T] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Pixel value at clamped integer coordinates (replicate border).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    pub fn min_max(&self) -> (T, T) {
        let mut lo = self.pixels[0];
        let mut hi = self.pixels[0];
        for &p in &self.pixels {
            if p < lo {
                lo = p;
            }
            if p > hi {
                hi = p;
            }
        }
        (lo, hi)
    }

    /// Bilinear sample at real coordinates; out-of-bounds coordinates are
    /// clamped to the valid pixel-center rectangle first. Exact pixel
    /// centers return the stored value.
    pub fn bilinear_sample(&self, x: T, y: T) -> Result<T> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample coordinate ({x}, {y})"
            )));
        }
        Ok(self.bilinear_clamped(x, y))
    }

    /// Infallible bilinear sampling; callers guarantee finite coordinates.
    #[inline]
    pub fn bilinear_clamped(&self, x: T, y: T) -> T {
        let max_x = T::of((self.width - 1) as f64);
        let max_y = T::of((self.height - 1) as f64);
        let x = x.max(T::zero()).min(max_x);
        let y = y.max(T::zero()).min(max_y);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let ix = x0.widen() as usize;
        let iy = y0.widen() as usize;
        let ix1 = (ix + 1).min(self.width - 1);
        let iy1 = (iy + 1).min(self.height - 1);
        let one = T::one();
        let p00 = self.get(ix, iy);
        let p10 = self.get(ix1, iy);
        let p01 = self.get(ix, iy1);
        let p11 = self.get(ix1, iy1);
        let top = p00 * (one - fx) + p10 * fx;
        let bot = p01 * (one - fx) + p11 * fx;
        top * (one - fy) + bot * fy
    }
}

/// Symmetric normalized 1-D convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D<T> {
    radius: usize,
    taps: Vec<T>,
}

impl<T: Real> Kernel1D<T> {
    pub fn new(taps: Vec<T>) -> Result<Self> {
        if taps.len() % 2 == 0 || taps.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "kernel needs an odd tap count, got {}",
                taps.len()
            )));
        }
        let radius = taps.len() / 2;
        let sum: T = taps.iter().copied().sum();
        // Tolerance scales with the scalar's precision: ~4e-13 for f64,
        // ~2e-4 for f32 at typical tap counts.
        let tol = T::of(64.0 * taps.len() as f64) * T::epsilon();
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "kernel taps must sum to 1, got {}",
                sum.widen()
            )));
        }
        for i in 0..taps.len() {
            if taps[i] <= T::zero() {
                return Err(Error::InvalidArgument("kernel taps must be positive".into()));
            }
            if taps[i] != taps[2 * radius - i] {
                return Err(Error::InvalidArgument("kernel taps must be symmetric".into()));
            }
        }
        Ok(Kernel1D { radius, taps })
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn taps(&self) -> &[T] {
        &self.taps
    }
}

/// Builds a normalized Gaussian kernel truncated at radius `ceil(4 sigma)`.
pub fn gaussian_kernel<T: Real>(sigma: f64) -> Result<Kernel1D<T>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gaussian sigma must be > 0, got {sigma}"
        )));
    }
    let radius = (4.0 * sigma).ceil() as usize;
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    let mut taps = Vec::with_capacity(2 * radius + 1);
    let mut sum = 0.0f64;
    for i in 0..=2 * radius {
        let d = i as f64 - radius as f64;
        let w = (-d * d * inv_two_sigma_sq).exp();
        sum += w;
        taps.push(w);
    }
    // Renormalize in f64, mirror the halves so symmetry is bit-exact in T.
    let taps: Vec<T> = taps.into_iter().map(|w| T::of(w / sum)).collect();
    let mut taps = taps;
    for i in 0..radius {
        taps[2 * radius - i] = taps[i];
    }
    Kernel1D::new(taps)
}

/// Separable convolution: a horizontal pass then a vertical pass with the
/// same kernel, replicating the nearest edge pixel outside the image.
pub fn convolve_separable<T: Real>(img: &GrayImage<T>, kernel: &Kernel1D<T>) -> GrayImage<T> {
    let horizontal = convolve_pass(img, kernel, true);
    convolve_pass(&horizontal, kernel, false)
}

fn convolve_pass<T: Real>(img: &GrayImage<T>, kernel: &Kernel1D<T>, horizontal: bool) -> GrayImage<T> {
    let (w, h) = (img.width(), img.height());
    let r = kernel.radius() as isize;
    let taps = kernel.taps();
    let mut out = GrayImage::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            if horizontal {
                for (t, &tap) in taps.iter().enumerate() {
                    let sx = x as isize + t as isize - r;
                    acc = acc + tap * img.get_clamped(sx, y as isize);
                }
            } else {
                for (t, &tap) in taps.iter().enumerate() {
                    let sy = y as isize + t as isize - r;
                    acc = acc + tap * img.get_clamped(x as isize, sy);
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Keeps every second pixel starting at (0, 0); output is
/// `floor(w/2) x floor(h/2)`.
pub fn downsample2<T: Real>(img: &GrayImage<T>) -> Result<GrayImage<T>> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::TooSmall(format!(
            "cannot downsample a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    let (w, h) = (img.width() / 2, img.height() / 2);
    Ok(GrayImage::from_fn(w, h, |x, y| img.get(2 * x, 2 * y)))
}

/// Bilinear 2x upsample (used when the pyramid doubles its input).
pub fn upsample2<T: Real>(img: &GrayImage<T>) -> GrayImage<T> {
    let (w, h) = (img.width() * 2, img.height() * 2);
    let half = T::of(0.5);
    GrayImage::from_fn(w, h, |x, y| {
        let sx = (T::of(x as f64) + half) / T::of(2.0) - half;
        let sy = (T::of(y as f64) + half) / T::of(2.0) - half;
        img.bilinear_clamped(sx, sy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img64(w: usize, h: usize, pixels: &[f64]) -> GrayImage<f64> {
        GrayImage::from_pixels(w, h, pixels.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_kernel_sigma_one() {
        let k = gaussian_kernel::<f64>(1.0).unwrap();
        assert_eq!(k.radius(), 4);
        let sum: f64 = k.taps().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let center = k.taps()[k.radius()];
        assert!(k.taps().iter().all(|&t| t <= center));
    }

    #[test]
    fn gaussian_kernel_tap_ratio() {
        // For sigma = 0.5 the center/next ratio is e^2; normalization
        // preserves ratios.
        let k = gaussian_kernel::<f64>(0.5).unwrap();
        let c = k.taps()[k.radius()];
        let n = k.taps()[k.radius() + 1];
        assert!((c / n - std::f64::consts::E.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_kernel_symmetric() {
        for sigma in [0.3, 0.8, 1.6, 3.2] {
            let k = gaussian_kernel::<f64>(sigma).unwrap();
            let r = k.radius();
            for i in 0..=r {
                assert_eq!(k.taps()[r - i], k.taps()[r + i]);
            }
        }
    }

    #[test]
    fn gaussian_kernel_rejects_bad_sigma() {
        assert!(gaussian_kernel::<f64>(0.0).is_err());
        assert!(gaussian_kernel::<f64>(-1.0).is_err());
        assert!(gaussian_kernel::<f64>(f64::NAN).is_err());
    }

    #[test]
    fn convolve_constant_is_identity() {
        let img = GrayImage::filled(9, 7, 0.42f64);
        let k = gaussian_kernel(1.6).unwrap();
        let out = convolve_separable(&img, &k);
        for &p in out.pixels() {
            assert!((p - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn convolve_one_pixel_image() {
        let img = img64(1, 1, &[0.7]);
        let k = gaussian_kernel(2.0).unwrap();
        let out = convolve_separable(&img, &k);
        assert_eq!(out.width(), 1);
        assert_eq!(out.height(), 1);
        assert!((out.get(0, 0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn convolve_stays_within_input_range() {
        let img = img64(4, 2, &[0.1, 0.9, 0.4, 0.3, 0.8, 0.2, 0.6, 0.5]);
        let k = gaussian_kernel(1.0).unwrap();
        let out = convolve_separable(&img, &k);
        for &p in out.pixels() {
            assert!(p >= 0.1 - 1e-12 && p <= 0.9 + 1e-12);
        }
    }

    #[test]
    fn bilinear_exact_center() {
        let img = img64(3, 4, &(0..12).map(|i| i as f64 / 11.0).collect::<Vec<_>>());
        assert_eq!(img.bilinear_sample(2.0, 3.0).unwrap(), img.pixels()[3 * 3 + 2]);
    }

    #[test]
    fn bilinear_midpoint() {
        let img = img64(2, 1, &[0.0, 1.0]);
        assert!((img.bilinear_sample(0.5, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_clamps_out_of_bounds() {
        let img = img64(2, 2, &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(img.bilinear_sample(-5.0, -5.0).unwrap(), 0.25);
        assert_eq!(img.bilinear_sample(100.0, 100.0).unwrap(), 1.0);
    }

    #[test]
    fn bilinear_rejects_non_finite() {
        let img = img64(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        assert!(img.bilinear_sample(f64::NAN, 0.0).is_err());
        assert!(img.bilinear_sample(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn downsample_keeps_even_pixels() {
        let img = GrayImage::from_fn(4, 4, |x, y| (y * 4 + x) as f64);
        let d = downsample2(&img).unwrap();
        assert_eq!(d.width(), 2);
        assert_eq!(d.height(), 2);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 0), 2.0);
        assert_eq!(d.get(0, 1), 8.0);
        assert_eq!(d.get(1, 1), 10.0);
    }

    #[test]
    fn downsample_floors_odd_dimensions() {
        let img = GrayImage::filled(5, 5, 0.0f64);
        let d = downsample2(&img).unwrap();
        assert_eq!((d.width(), d.height()), (2, 2));
    }

    #[test]
    fn downsample_rejects_thin_images() {
        let img = GrayImage::filled(1, 8, 0.0f64);
        assert!(matches!(downsample2(&img), Err(Error::TooSmall(_))));
    }

    #[test]
    fn upsample2_doubles_and_interpolates() {
        let img = img64(2, 1, &[0.0, 1.0]);
        let up = upsample2(&img);
        assert_eq!((up.width(), up.height()), (4, 2));
        // x=1 maps to source 0.25, x=2 to 0.75
        assert!((up.get(1, 0) - 0.25).abs() < 1e-15);
        assert!((up.get(2, 0) - 0.75).abs() < 1e-15);
    }
}
