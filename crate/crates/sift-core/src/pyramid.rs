//! Gaussian scale space and its difference-of-Gaussians counterpart.
//!
//! Each octave holds `s + 3` progressively blurred images so that the DoG
//! stack keeps `s + 2` levels and extrema can be localized on the middle
//! `s` of them. Blur levels within an octave follow `sigma0 * k^i` with
//! `k = 2^(1/s)`; the next octave starts from the level with twice the
//! base blur, downsampled by two.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_pgm;
use crate::raster::{convolve_separable, downsample2, gaussian_kernel, upsample2, GrayImage};
use crate::scalar::Real;

/// Scale-space construction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidParams {
    /// Scales per octave (`s`); the octave stores `s + 3` Gaussian levels.
    pub octave_scales: usize,
    /// Base blur of level 0 in every octave.
    pub sigma0: f64,
    /// Blur assumed to be already present in the input image.
    pub assumed_input_blur: f64,
    /// Upsample the input 2x before building octave 0.
    pub initial_doubling: bool,
    /// Octaves stop once `min(width, height)` would drop below this.
    pub min_dimension: usize,
}

impl Default for PyramidParams {
    fn default() -> Self {
        PyramidParams {
            octave_scales: 3,
            sigma0: 1.6,
            assumed_input_blur: 0.5,
            initial_doubling: false,
            min_dimension: 16,
        }
    }
}

impl PyramidParams {
    pub fn validate(&self) -> Result<()> {
        if self.octave_scales < 1 {
            return Err(Error::InvalidArgument(
                "octave_scales must be at least 1".into(),
            ));
        }
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma0 must be a positive finite number, got {}",
                self.sigma0
            )));
        }
        if !(self.assumed_input_blur >= 0.0) || !self.assumed_input_blur.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "assumed_input_blur must be >= 0, got {}",
                self.assumed_input_blur
            )));
        }
        if self.sigma0 <= self.effective_input_blur() {
            return Err(Error::InvalidArgument(format!(
                "sigma0 ({}) must exceed the effective input blur ({})",
                self.sigma0,
                self.effective_input_blur()
            )));
        }
        if self.min_dimension < 4 {
            return Err(Error::InvalidArgument(
                "min_dimension must be at least 4".into(),
            ));
        }
        Ok(())
    }

    /// Scale step between adjacent levels: `2^(1/s)`.
    pub fn k(&self) -> f64 {
        2f64.powf(1.0 / self.octave_scales as f64)
    }

    /// Input blur as seen by octave 0 (doubling the image doubles it).
    pub fn effective_input_blur(&self) -> f64 {
        if self.initial_doubling {
            2.0 * self.assumed_input_blur
        } else {
            self.assumed_input_blur
        }
    }

    /// Octave-local blur of level `i`, possibly fractional.
    pub fn level_sigma(&self, level: f64) -> f64 {
        self.sigma0 * self.k().powf(level)
    }
}

/// One Gaussian octave: `s + 3` images at a fixed resolution.
#[derive(Debug, Clone)]
pub struct Octave<T> {
    pub levels: Vec<GrayImage<T>>,
    /// Octave-local blur per level (`sigma0 * k^i`).
    pub level_sigmas: Vec<f64>,
    /// Multiply octave coordinates by this to reach input coordinates.
    pub scale_factor: f64,
}

impl<T> Octave<T> {
    pub fn width(&self) -> usize
    where
        T: Real,
    {
        self.levels[0].width()
    }

    pub fn height(&self) -> usize
    where
        T: Real,
    {
        self.levels[0].height()
    }
}

#[derive(Debug, Clone)]
pub struct GaussianPyramid<T> {
    pub octaves: Vec<Octave<T>>,
    pub params: PyramidParams,
}

impl<T: Real> GaussianPyramid<T> {
    /// Builds the full Gaussian scale space for `input`.
    pub fn build(input: &GrayImage<T>, params: &PyramidParams) -> Result<Self> {
        params.validate()?;
        let base = if params.initial_doubling {
            upsample2(input)
        } else {
            input.clone()
        };
        if base.width().min(base.height()) < params.min_dimension {
            return Err(Error::TooSmall(format!(
                "{}x{} base image is below min_dimension {}",
                base.width(),
                base.height(),
                params.min_dimension
            )));
        }

        let s = params.octave_scales;
        let k = params.k();
        let level_sigmas: Vec<f64> = (0..s + 3).map(|i| params.level_sigma(i as f64)).collect();

        // Lift the base image from its assumed blur up to sigma0.
        let first_delta =
            (params.sigma0 * params.sigma0 - params.effective_input_blur().powi(2)).sqrt();
        let mut seed = if first_delta > 1e-10 {
            convolve_separable(&base, &gaussian_kernel(first_delta)?)
        } else {
            base
        };

        let base_scale = if params.initial_doubling { 0.5 } else { 1.0 };
        let mut octaves = Vec::new();
        loop {
            let mut levels = Vec::with_capacity(s + 3);
            levels.push(seed);
            for i in 1..s + 3 {
                // Incremental blur from level i-1 to level i.
                let inc = params.sigma0 * k.powi(i as i32 - 1) * (k * k - 1.0).sqrt();
                let blurred = convolve_separable(&levels[i - 1], &gaussian_kernel(inc)?);
                levels.push(blurred);
            }
            let next_seed = downsample2(&levels[s])?;
            octaves.push(Octave {
                levels,
                level_sigmas: level_sigmas.clone(),
                scale_factor: base_scale * 2f64.powi(octaves.len() as i32),
            });
            if next_seed.width().min(next_seed.height()) < params.min_dimension {
                break;
            }
            seed = next_seed;
        }

        Ok(GaussianPyramid {
            octaves,
            params: params.clone(),
        })
    }

    pub fn num_octaves(&self) -> usize {
        self.octaves.len()
    }

    /// Writes every Gaussian level to `dir` as `o{octave}_s{level}.pgm`.
    pub fn dump(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (o, octave) in self.octaves.iter().enumerate() {
            for (l, img) in octave.levels.iter().enumerate() {
                write_pgm(dir.join(format!("o{o}_s{l}.pgm")), img)?;
            }
        }
        Ok(())
    }
}

/// One DoG octave: `s + 2` difference images.
#[derive(Debug, Clone)]
pub struct DogOctave<T> {
    pub levels: Vec<GrayImage<T>>,
    pub level_sigmas: Vec<f64>,
    pub scale_factor: f64,
}

#[derive(Debug, Clone)]
pub struct DogPyramid<T> {
    pub octaves: Vec<DogOctave<T>>,
    pub params: PyramidParams,
}

impl<T: Real> DogPyramid<T> {
    /// Differences adjacent Gaussian levels: `dog[i] = g[i + 1] - g[i]`.
    pub fn build(gaussian: &GaussianPyramid<T>) -> Self {
        let octaves = gaussian
            .octaves
            .iter()
            .map(|oct| {
                let levels = oct
                    .levels
                    .windows(2)
                    .map(|pair| {
                        GrayImage::from_fn(pair[0].width(), pair[0].height(), |x, y| {
                            pair[1].get(x, y) - pair[0].get(x, y)
                        })
                    })
                    .collect();
                DogOctave {
                    levels,
                    level_sigmas: oct.level_sigmas.clone(),
                    scale_factor: oct.scale_factor,
                }
            })
            .collect();
        DogPyramid {
            octaves,
            params: gaussian.params.clone(),
        }
    }
}
