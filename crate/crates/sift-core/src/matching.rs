//! Nearest-neighbor descriptor matching with the ratio test, plus the
//! matching-rate and orientation-difference bookkeeping built on top.

use crate::keypoint::{wrap_degrees, Keypoint, DESCRIPTOR_LEN};
use crate::scalar::Real;

/// One accepted correspondence between two keypoint sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub index_a: usize,
    pub index_b: usize,
    /// Euclidean distance between the two descriptors.
    pub distance: f64,
    /// Orientation difference `(phi_b - phi_a) mod 360`, degrees.
    pub delta_phi: f64,
}

/// Matching outcome for one image pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matches: Vec<Match>,
    pub n_a: usize,
    pub n_b: usize,
    /// `|matches| / min(n_a, n_b)`, or 0 when either set is empty.
    pub rate: f64,
}

impl MatchResult {
    fn new(matches: Vec<Match>, n_a: usize, n_b: usize) -> Self {
        let denom = n_a.min(n_b);
        let rate = if denom == 0 {
            0.0
        } else {
            matches.len() as f64 / denom as f64
        };
        MatchResult {
            matches,
            n_a,
            n_b,
            rate,
        }
    }
}

/// Orientation difference `(phi_b - phi_a) mod 360` on the full circle.
#[inline]
pub fn wrap_delta_phi(phi_a: f64, phi_b: f64) -> f64 {
    wrap_degrees(phi_b - phi_a)
}

/// Strict decision rule: a pair "matches as images" iff `rate > r_t`.
#[inline]
pub fn is_image_match(result: &MatchResult, r_t: f64) -> bool {
    result.rate > r_t
}

#[inline]
fn descriptor_distance_sq<T: Real>(a: &[T; DESCRIPTOR_LEN], b: &[T; DESCRIPTOR_LEN]) -> f64 {
    let mut sum = 0.0f64;
    for i in 0..DESCRIPTOR_LEN {
        let d = (a[i] - b[i]).widen();
        sum += d * d;
    }
    sum
}

/// Matches `set_a` against `set_b` with Lowe's ratio test and one-to-one
/// pruning.
///
/// Each descriptor in `set_a` takes its nearest and second-nearest
/// neighbors in `set_b` by Euclidean distance (distance ties keep the
/// lower `set_b` index). The candidate is accepted when `d1 / d2 < ratio`;
/// a singleton `set_b` offers no second neighbor, so it only accepts exact
/// (`d1 = 0`) matches. When several `set_a` entries claim the same
/// `set_b` index, the smallest `(distance, index_a)` wins.
pub fn match_descriptors<T: Real>(
    set_a: &[Keypoint<T>],
    set_b: &[Keypoint<T>],
    ratio: f64,
) -> MatchResult {
    assert!(
        ratio > 0.0 && ratio <= 1.0,
        "match ratio must be in (0, 1], got {ratio}"
    );
    if set_a.is_empty() || set_b.is_empty() {
        return MatchResult::new(Vec::new(), set_a.len(), set_b.len());
    }

    let mut candidates: Vec<Match> = Vec::new();
    for (i, a) in set_a.iter().enumerate() {
        let mut best_sq = f64::INFINITY;
        let mut second_sq = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, b) in set_b.iter().enumerate() {
            let d = descriptor_distance_sq(&a.descriptor, &b.descriptor);
            if d < best_sq {
                second_sq = best_sq;
                best_sq = d;
                best_j = j;
            } else if d < second_sq {
                second_sq = d;
            }
        }
        let d1 = best_sq.sqrt();
        let accepted = if set_b.len() == 1 {
            d1 == 0.0
        } else {
            d1 < ratio * second_sq.sqrt()
        };
        if accepted {
            candidates.push(Match {
                index_a: i,
                index_b: best_j,
                distance: d1,
                delta_phi: wrap_delta_phi(a.phi, set_b[best_j].phi),
            });
        }
    }

    // One-to-one: keep the best claimant of every set_b index.
    let mut winner: Vec<Option<Match>> = vec![None; set_b.len()];
    for m in candidates {
        let slot = &mut winner[m.index_b];
        let replace = match slot {
            None => true,
            Some(prev) => (m.distance, m.index_a) < (prev.distance, prev.index_a),
        };
        if replace {
            *slot = Some(m);
        }
    }
    let mut matches: Vec<Match> = winner.into_iter().flatten().collect();
    matches.sort_by_key(|m| m.index_a);
    MatchResult::new(matches, set_a.len(), set_b.len())
}
