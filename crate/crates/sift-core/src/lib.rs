//! A from-scratch SIFT implementation: Gaussian/DoG scale space, keypoint
//! detection with sub-voxel refinement, orientation assignment, 128-d
//! descriptors, ratio-test matching, and the parametric image deformations
//! (rotation, scaling, fish-eye, motion blur) used to evaluate it.
//!
//! Everything pixel-valued is generic over the scalar type through the
//! [`Real`] trait (`f32` or `f64`); geometry, histogram, and localization
//! math always runs in `f64`. The concrete aliases below pin the two
//! supported precisions.
//!
//! ```
//! use sift_core::{detect_and_describe, DetectorParams, GrayImage64};
//!
//! let img = GrayImage64::from_fn(64, 64, |x, y| {
//!     let (dx, dy) = (x as f64 - 32.0, y as f64 - 32.0);
//!     0.1 + 0.8 * (-(dx * dx + dy * dy) / 12.0).exp()
//! });
//! let keypoints = detect_and_describe(&img, &DetectorParams::default()).unwrap();
//! assert!(!keypoints.is_empty());
//! ```

pub mod deform;
pub mod error;
pub mod files;
pub mod io;
pub mod keypoint;
pub mod matching;
pub mod pyramid;
pub mod raster;
pub mod scalar;
#[cfg(feature = "testutil")]
pub mod testutil;

pub use deform::Deformation;
pub use error::{Error, Result};
pub use files::{
    encode_keypoints, encode_matches, fmt_g6, load_keypoints, parse_keypoints, parse_matches,
    save_keypoints, save_matches,
};
pub use io::{encode_pgm, load_image, parse_pgm, quantize_u8, write_pgm};
pub use keypoint::{
    detect_and_describe, DetectorParams, Keypoint, RawExtremum, RefinedPoint, DESCRIPTOR_LEN,
};
pub use matching::{is_image_match, match_descriptors, wrap_delta_phi, Match, MatchResult};
pub use pyramid::{DogPyramid, GaussianPyramid, PyramidParams};
pub use raster::GrayImage;
pub use scalar::Real;

/// Single-precision image.
pub type GrayImage32 = raster::GrayImage<f32>;
/// Double-precision image (the default pipeline precision).
pub type GrayImage64 = raster::GrayImage<f64>;
/// Keypoint with a single-precision descriptor.
pub type Keypoint32 = keypoint::Keypoint<f32>;
/// Keypoint with a double-precision descriptor.
pub type Keypoint64 = keypoint::Keypoint<f64>;
