//! Parametric image deformations: rotation, scaling, fish-eye, and motion
//! blur. All four are inverse maps with bilinear sampling, so outputs are
//! convex combinations of input pixels (plus the zero fill outside a
//! rotated canvas) and stay inside the input intensity range.
//!
//! Geometry convention: the image center is `((w-1)/2, (h-1)/2)` for every
//! rotational/radial map.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::keypoint::wrap_degrees;
use crate::raster::GrayImage;
use crate::scalar::Real;

/// A deformation kind plus its parameter, parseable from the CLI/CSV
/// spec-string forms `rot:90`, `scale:2`, `fisheye:1`, `blur:30`,
/// `blur:30@45`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deformation {
    /// Rotation by `theta` degrees counterclockwise in (x, y-down) axes.
    Rotation { theta: f64 },
    /// Uniform resampling by factor `alpha`.
    Scaling { alpha: f64 },
    /// Radial fish-eye of strength `beta`.
    Fisheye { beta: f64 },
    /// Line motion blur of `length` pixels along `angle` degrees.
    MotionBlur { length: usize, angle: f64 },
}

impl Deformation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Deformation::Rotation { theta } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "rotation angle must be finite, got {theta}"
                    )));
                }
            }
            Deformation::Scaling { alpha } => {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "scale factor must be > 0, got {alpha}"
                    )));
                }
            }
            Deformation::Fisheye { beta } => {
                if !(beta >= 0.0) || !beta.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "fisheye strength must be >= 0, got {beta}"
                    )));
                }
            }
            Deformation::MotionBlur { length, angle } => {
                if length < 1 {
                    return Err(Error::InvalidArgument(
                        "motion blur length must be >= 1".into(),
                    ));
                }
                if !angle.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "motion blur angle must be finite, got {angle}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Applies the deformation to `img`.
    pub fn apply<T: Real>(&self, img: &GrayImage<T>) -> Result<GrayImage<T>> {
        self.validate()?;
        match *self {
            Deformation::Rotation { theta } => Ok(rotate(img, theta)),
            Deformation::Scaling { alpha } => scale(img, alpha),
            Deformation::Fisheye { beta } => Ok(fisheye(img, beta)),
            Deformation::MotionBlur { length, angle } => Ok(motion_blur(img, length, angle)),
        }
    }
}

impl fmt::Display for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Deformation::Rotation { theta } => write!(f, "rot:{theta}"),
            Deformation::Scaling { alpha } => write!(f, "scale:{alpha}"),
            Deformation::Fisheye { beta } => write!(f, "fisheye:{beta}"),
            Deformation::MotionBlur { length, angle } => {
                if angle == 0.0 {
                    write!(f, "blur:{length}")
                } else {
                    write!(f, "blur:{length}@{angle}")
                }
            }
        }
    }
}

impl FromStr for Deformation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("deformation {s:?} is missing ':'")))?;
        let num = |tok: &str, what: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid {what} {tok:?} in deformation {s:?}")))
        };
        let deform = match kind {
            "rot" => Deformation::Rotation {
                theta: wrap_degrees(num(param, "angle")?),
            },
            "scale" => Deformation::Scaling {
                alpha: num(param, "factor")?,
            },
            "fisheye" => Deformation::Fisheye {
                beta: num(param, "strength")?,
            },
            "blur" => {
                let (len_tok, angle) = match param.split_once('@') {
                    Some((l, a)) => (l, wrap_degrees(num(a, "blur angle")?)),
                    None => (param, 0.0),
                };
                let length = len_tok.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("invalid blur length {len_tok:?} in deformation {s:?}"))
                })?;
                Deformation::MotionBlur { length, angle }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown deformation kind {other:?} (expected rot, scale, fisheye, or blur)"
                )))
            }
        };
        deform.validate()?;
        Ok(deform)
    }
}

/// Sine/cosine of an angle in degrees, exact at quarter turns so that
/// 0/90/180/270-degree rotations become pure index permutations.
fn sin_cos_deg(theta: f64) -> (f64, f64) {
    let t = wrap_degrees(theta);
    if t == 0.0 {
        (0.0, 1.0)
    } else if t == 90.0 {
        (1.0, 0.0)
    } else if t == 180.0 {
        (0.0, -1.0)
    } else if t == 270.0 {
        (-1.0, 0.0)
    } else {
        t.to_radians().sin_cos()
    }
}

/// Rotates by `theta` degrees about the image center onto the bounding
/// canvas of the rotated rectangle; samples mapping outside the input
/// become 0.
pub fn rotate<T: Real>(img: &GrayImage<T>, theta: f64) -> GrayImage<T> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let (sin_t, cos_t) = sin_cos_deg(theta);
    // The bounding box of the rotated w x h rectangle; the epsilon stops
    // float noise from adding a row at quarter turns.
    let out_w = (w * cos_t.abs() + h * sin_t.abs() - 1e-9).ceil().max(1.0) as usize;
    let out_h = (w * sin_t.abs() + h * cos_t.abs() - 1e-9).ceil().max(1.0) as usize;
    let cx_in = (w - 1.0) / 2.0;
    let cy_in = (h - 1.0) / 2.0;
    let cx_out = (out_w as f64 - 1.0) / 2.0;
    let cy_out = (out_h as f64 - 1.0) / 2.0;
    let (max_x, max_y) = (w - 1.0, h - 1.0);
    GrayImage::from_fn(out_w, out_h, |x, y| {
        let dx = x as f64 - cx_out;
        let dy = y as f64 - cy_out;
        // Inverse of the forward map [[cos, -sin], [sin, cos]].
        let sx = cos_t * dx + sin_t * dy + cx_in;
        let sy = -sin_t * dx + cos_t * dy + cy_in;
        if sx < 0.0 || sx > max_x || sy < 0.0 || sy > max_y {
            T::zero()
        } else {
            img.bilinear_clamped(T::of(sx), T::of(sy))
        }
    })
}

/// Resamples by `alpha`; output dimensions are `round(alpha * dim)`.
pub fn scale<T: Real>(img: &GrayImage<T>, alpha: f64) -> Result<GrayImage<T>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be > 0, got {alpha}"
        )));
    }
    let out_w = (alpha * img.width() as f64).round() as usize;
    let out_h = (alpha * img.height() as f64).round() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidArgument(format!(
            "scale factor {alpha} collapses {}x{} to {out_w}x{out_h}",
            img.width(),
            img.height()
        )));
    }
    Ok(GrayImage::from_fn(out_w, out_h, |x, y| {
        let sx = (x as f64 + 0.5) / alpha - 0.5;
        let sy = (y as f64 + 0.5) / alpha - 0.5;
        img.bilinear_clamped(T::of(sx), T::of(sy))
    }))
}

/// Radial fish-eye: output radius `rho` samples the input at
/// `rho * (1 + beta * rho^2) / (1 + beta)`, where `rho` is normalized by
/// half the image diagonal. Identity at `beta = 0`; the center and the
/// corner circle are fixed points.
pub fn fisheye<T: Real>(img: &GrayImage<T>, beta: f64) -> GrayImage<T> {
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let big_r = (cx * cx + cy * cy).sqrt().max(f64::MIN_POSITIVE);
    let inv_r2 = 1.0 / (big_r * big_r);
    let denom = 1.0 + beta;
    GrayImage::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let rho_sq = (dx * dx + dy * dy) * inv_r2;
        let factor = (1.0 + beta * rho_sq) / denom;
        img.bilinear_clamped(T::of(cx + dx * factor), T::of(cy + dy * factor))
    })
}

/// Line motion blur: averages `length` bilinear samples evenly spaced
/// along a segment of that length through each pixel at `angle` degrees,
/// clamped at the borders.
pub fn motion_blur<T: Real>(img: &GrayImage<T>, length: usize, angle: f64) -> GrayImage<T> {
    let length = length.max(1);
    let (sin_a, cos_a) = sin_cos_deg(angle);
    let offsets: Vec<(f64, f64)> = (0..length)
        .map(|i| {
            let t = i as f64 - (length as f64 - 1.0) / 2.0;
            (t * cos_a, t * sin_a)
        })
        .collect();
    let inv_l = T::of(1.0 / length as f64);
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = T::zero();
        for &(ox, oy) in &offsets {
            acc = acc + img.bilinear_clamped(T::of(x as f64 + ox), T::of(y as f64 + oy));
        }
        acc * inv_l
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| (y * w + x) as f64 / (w * h) as f64)
    }

    fn smooth(w: usize, h: usize) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| {
            0.5 + 0.4 * ((x as f64 / 7.0).sin() * (y as f64 / 9.0).cos())
        })
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = ramp(7, 5);
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn rotate_quarter_turn_permutes_pixels() {
        let img = ramp(4, 3);
        let r = rotate(&img, 90.0);
        assert_eq!((r.width(), r.height()), (3, 4));
        for y in 0..3 {
            for x in 0..4 {
                // Input (x, y) lands at (h - 1 - y, x).
                assert_eq!(r.get(3 - 1 - y, x), img.get(x, y));
            }
        }
    }

    #[test]
    fn rotate_half_turn_flips_both_axes() {
        let img = ramp(5, 4);
        let r = rotate(&img, 180.0);
        assert_eq!((r.width(), r.height()), (5, 4));
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(r.get(4 - x, 3 - y), img.get(x, y));
            }
        }
    }

    #[test]
    fn rotate_full_turn_matches_identity() {
        let img = ramp(6, 6);
        let r = rotate(&img, 360.0);
        assert_eq!((r.width(), r.height()), (6, 6));
        for (a, b) in r.pixels().iter().zip(img.pixels()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rotate_45_expands_canvas_and_zeroes_corners() {
        let img = GrayImage::filled(10, 10, 1.0f64);
        let r = rotate(&img, 45.0);
        let expect = (10.0 * 2f64.sqrt()).ceil() as usize;
        assert_eq!((r.width(), r.height()), (expect, expect));
        assert_eq!(r.get(0, 0), 0.0);
        assert_eq!(r.get(expect - 1, expect - 1), 0.0);
        let center = r.get(expect / 2, expect / 2);
        assert!((center - 1.0).abs() < 1e-12);
        for &p in r.pixels() {
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn rotate_round_trip_recovers_interior() {
        let img = smooth(40, 40);
        let back = rotate(&rotate(&img, 30.0), -30.0);
        // Compare the central region, offset by the canvas growth.
        let ox = (back.width() - img.width()) / 2;
        let oy = (back.height() - img.height()) / 2;
        let mut sum = 0.0;
        let mut n = 0.0;
        for y in 10..30 {
            for x in 10..30 {
                sum += (back.get(x + ox, y + oy) - img.get(x, y)).abs();
                n += 1.0;
            }
        }
        assert!(sum / n < 0.05, "round-trip mean abs diff {}", sum / n);
    }

    #[test]
    fn scale_one_is_identity() {
        let img = ramp(6, 4);
        assert_eq!(scale(&img, 1.0).unwrap(), img);
    }

    #[test]
    fn scale_two_hits_half_pixel_offsets() {
        let img = GrayImage::from_fn(4, 1, |x, _| x as f64);
        let s = scale(&img, 2.0).unwrap();
        assert_eq!((s.width(), s.height()), (8, 2));
        // x = 3 maps to source 1.25 on the ramp.
        assert!((s.get(3, 0) - 1.25).abs() < 1e-12);
        // Edges clamp: x = 0 maps to source -0.25.
        assert_eq!(s.get(0, 0), 0.0);
        assert_eq!(s.get(7, 0), 3.0);
    }

    #[test]
    fn scale_rejects_collapse_to_zero() {
        let img = ramp(4, 4);
        assert!(matches!(
            scale(&img, 0.05),
            Err(Error::InvalidArgument(_))
        ));
        assert!(scale(&img, 0.0).is_err());
    }

    #[test]
    fn scale_round_trip_is_close() {
        let img = smooth(32, 32);
        let back = scale(&scale(&img, 2.0).unwrap(), 0.5).unwrap();
        assert_eq!((back.width(), back.height()), (32, 32));
        let mad: f64 = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / img.pixels().len() as f64;
        assert!(mad < 0.05, "round-trip mean abs diff {mad}");
    }

    #[test]
    fn fisheye_zero_is_identity() {
        let img = ramp(9, 7);
        assert_eq!(fisheye(&img, 0.0), img);
    }

    #[test]
    fn fisheye_fixes_center_and_corners() {
        let img = ramp(11, 9);
        let f = fisheye(&img, 2.0);
        assert_eq!(f.get(5, 4), img.get(5, 4));
        for (x, y) in [(0, 0), (10, 0), (0, 8), (10, 8)] {
            assert!((f.get(x, y) - img.get(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn fisheye_magnifies_the_center() {
        // Interior radii contract toward the center: the sampled source
        // point sits strictly inside the output radius.
        for beta in [0.5, 1.0, 2.0] {
            for rho in [0.25, 0.5, 0.75] {
                let src = rho * (1.0 + beta * rho * rho) / (1.0 + beta);
                assert!(src < rho);
            }
            // And the map stays strictly increasing (no fold-over).
            let mut prev = 0.0;
            for i in 1..=100 {
                let rho = i as f64 / 100.0;
                let src = rho * (1.0 + beta * rho * rho) / (1.0 + beta);
                assert!(src > prev);
                prev = src;
            }
        }
    }

    #[test]
    fn motion_blur_length_one_is_identity() {
        let img = ramp(8, 5);
        assert_eq!(motion_blur(&img, 1, 0.0), img);
    }

    #[test]
    fn motion_blur_preserves_constant_images() {
        let img = GrayImage::filled(12, 12, 0.37f64);
        for len in [2, 5, 10] {
            let b = motion_blur(&img, len, 33.0);
            for &p in b.pixels() {
                assert!((p - 0.37).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn motion_blur_impulse_makes_streak() {
        let mut img = GrayImage::zeros(15, 15);
        img.set(7, 7, 1.0f64);
        let b = motion_blur(&img, 5, 0.0);
        for x in 5..=9 {
            assert!((b.get(x, 7) - 0.2).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(b.get(4, 7), 0.0);
        assert_eq!(b.get(10, 7), 0.0);
        assert_eq!(b.get(7, 6), 0.0);
    }

    #[test]
    fn motion_blur_respects_angle() {
        let mut img = GrayImage::zeros(15, 15);
        img.set(7, 7, 1.0f64);
        let b = motion_blur(&img, 5, 90.0);
        for y in 5..=9 {
            assert!((b.get(7, y) - 0.2).abs() < 1e-12);
        }
        assert_eq!(b.get(6, 7), 0.0);
    }

    #[test]
    fn motion_blur_keeps_interior_mean() {
        let img = smooth(48, 48);
        let b = motion_blur(&img, 10, 0.0);
        let mean = |im: &GrayImage<f64>| im.pixels().iter().sum::<f64>() / im.pixels().len() as f64;
        assert!((mean(&img) - mean(&b)).abs() < 1e-3);
    }

    #[test]
    fn deformations_preserve_intensity_range() {
        let img = smooth(24, 24);
        let deforms = [
            Deformation::Rotation { theta: 37.0 },
            Deformation::Scaling { alpha: 1.7 },
            Deformation::Fisheye { beta: 1.5 },
            Deformation::MotionBlur { length: 7, angle: 20.0 },
        ];
        for d in deforms {
            let out = d.apply(&img).unwrap();
            for &p in out.pixels() {
                assert!((0.0..=1.0).contains(&p), "{d}: pixel {p} out of range");
            }
        }
    }

    #[test]
    fn parses_all_spec_strings() {
        assert_eq!(
            "rot:90".parse::<Deformation>().unwrap(),
            Deformation::Rotation { theta: 90.0 }
        );
        assert_eq!(
            "scale:2.0".parse::<Deformation>().unwrap(),
            Deformation::Scaling { alpha: 2.0 }
        );
        assert_eq!(
            "fisheye:1.0".parse::<Deformation>().unwrap(),
            Deformation::Fisheye { beta: 1.0 }
        );
        assert_eq!(
            "blur:30".parse::<Deformation>().unwrap(),
            Deformation::MotionBlur { length: 30, angle: 0.0 }
        );
        assert_eq!(
            "blur:30@45".parse::<Deformation>().unwrap(),
            Deformation::MotionBlur { length: 30, angle: 45.0 }
        );
    }

    #[test]
    fn parse_normalizes_angles() {
        assert_eq!(
            "rot:-30".parse::<Deformation>().unwrap(),
            Deformation::Rotation { theta: 330.0 }
        );
        assert_eq!(
            "rot:360".parse::<Deformation>().unwrap(),
            Deformation::Rotation { theta: 0.0 }
        );
    }

    #[test]
    fn parse_errors_name_the_token() {
        let err = "swirl:3".parse::<Deformation>().unwrap_err().to_string();
        assert!(err.contains("swirl"), "{err}");
        let err = "rot:ninety".parse::<Deformation>().unwrap_err().to_string();
        assert!(err.contains("ninety"), "{err}");
        let err = "blur:2.5".parse::<Deformation>().unwrap_err().to_string();
        assert!(err.contains("2.5"), "{err}");
        assert!("rot90".parse::<Deformation>().is_err());
        assert!("scale:-1".parse::<Deformation>().is_err());
        assert!("blur:0".parse::<Deformation>().is_err());
        assert!("fisheye:-0.5".parse::<Deformation>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["rot:90", "scale:2", "fisheye:1.5", "blur:30", "blur:30@45"] {
            let d: Deformation = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
            let again: Deformation = d.to_string().parse().unwrap();
            assert_eq!(again, d);
        }
    }
}
