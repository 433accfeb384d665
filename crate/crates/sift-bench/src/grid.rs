//! Threshold grids for matching-rate curves.
//!
//! A grid is written `start:step:end` on the command line, e.g. `0:0.02:1`.
//! The endpoints are inclusive; the number of points is derived from the span
//! so that floating-point drift in `step` cannot drop the final threshold.

use std::fmt;
use std::str::FromStr;

use sift_core::{Error, Result};

/// An evenly spaced, strictly ascending set of rate thresholds in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    start: f64,
    step: f64,
    end: f64,
}

impl ThresholdGrid {
    /// Builds a grid after validating the endpoints.
    ///
    /// `step` must be positive and finite, `start` must not exceed `end`, and
    /// all points must lie in `[0, 1]` (up to rounding slack). A degenerate
    /// grid with `start == end` holds a single threshold.
    pub fn new(start: f64, step: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArgument(
                "threshold grid endpoints must be finite".into(),
            ));
        }
        if step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "threshold grid step must be positive, got {step}"
            )));
        }
        if end < start {
            return Err(Error::InvalidArgument(format!(
                "threshold grid end {end} is below start {start}"
            )));
        }
        if start < 0.0 || end > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "threshold grid {start}:{step}:{end} leaves the valid rate range [0, 1]"
            )));
        }
        Ok(Self { start, step, end })
    }

    /// Number of grid points, endpoints included.
    pub fn len(&self) -> usize {
        ((self.end - self.start) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The thresholds, strictly ascending. Each point is computed as
    /// `start + i * step` directly rather than by repeated addition, so the
    /// values are reproducible regardless of how the grid is traversed.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    /// The midpoint threshold quoted in the one-line evaluation summary.
    pub fn midpoint(&self) -> f64 {
        let v = self.values();
        v[v.len() / 2]
    }
}

impl Default for ThresholdGrid {
    /// The default evaluation grid: 51 thresholds from 0 to 1 in steps of 0.02.
    fn default() -> Self {
        Self {
            start: 0.0,
            step: 0.02,
            end: 1.0,
        }
    }
}

impl fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.end)
    }
}

impl FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "grid '{s}' must have the form start:step:end"
            )));
        }
        let mut nums = [0.0f64; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("grid '{s}': '{part}' is not a number")))?;
        }
        Self::new(nums[0], nums[1], nums[2])
    }
}
