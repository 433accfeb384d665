//! Text formats: the keypoint file (`# sift-bench keypoints v1 ...`) and
//! the match dump (`# sift-bench matches v1 ...`).
//!
//! Numeric fields are printed with 6 significant digits. Encoding is
//! idempotent across a parse/encode round trip, which lets cached
//! keypoint files stand in for in-memory features bit-for-bit.

use std::path::Path;

use crate::error::{Error, Result};
use crate::keypoint::{Keypoint, DESCRIPTOR_LEN};
use crate::matching::{Match, MatchResult};
use crate::scalar::Real;

const KEYPOINT_HEADER: &str = "# sift-bench keypoints v1 count=";
const MATCH_HEADER: &str = "# sift-bench matches v1 r=";

/// Formats with 6 significant digits, C `%g` style: positional notation
/// for decimal exponents in `[-4, 5]`, scientific otherwise, trailing
/// zeros stripped.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp.parse().expect("{:e} exponent is an integer");
    if (-4..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        strip_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", strip_zeros(mantissa.to_string()))
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// Renders keypoints in the v1 text format.
pub fn encode_keypoints<T: Real>(kps: &[Keypoint<T>]) -> String {
    let mut out = String::new();
    out.push_str(KEYPOINT_HEADER);
    out.push_str(&kps.len().to_string());
    out.push('\n');
    for k in kps {
        let mut fields = Vec::with_capacity(5 + DESCRIPTOR_LEN);
        fields.push(fmt_g6(k.x));
        fields.push(fmt_g6(k.y));
        fields.push(fmt_g6(k.sigma));
        fields.push(fmt_g6(k.phi));
        fields.push(fmt_g6(k.response));
        fields.extend(k.descriptor.iter().map(|d| fmt_g6(d.widen())));
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the v1 keypoint format, enforcing the header count and the
/// 5 + 128 fields per record.
pub fn parse_keypoints<T: Real>(text: &str) -> Result<Vec<Keypoint<T>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty keypoint file".into()))?;
    let count: usize = header
        .strip_prefix(KEYPOINT_HEADER)
        .ok_or_else(|| Error::Parse(format!("bad keypoint header {header:?}")))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad keypoint count in header {header:?}")))?;

    let mut kps = Vec::with_capacity(count);
    for (lineno, line) in lines {
        if kps.len() == count {
            return Err(Error::Parse(format!(
                "line {}: more than the declared {count} keypoints",
                lineno + 1
            )));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 + DESCRIPTOR_LEN {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                5 + DESCRIPTOR_LEN,
                tokens.len()
            )));
        }
        let mut nums = Vec::with_capacity(tokens.len());
        for t in &tokens {
            let v: f64 = t.parse().map_err(|_| {
                Error::Parse(format!("line {}: invalid number {t:?}", lineno + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "line {}: non-finite value {t:?}",
                    lineno + 1
                )));
            }
            nums.push(v);
        }
        let mut descriptor = [T::zero(); DESCRIPTOR_LEN];
        for (d, v) in descriptor.iter_mut().zip(&nums[5..]) {
            *d = T::of(*v);
        }
        kps.push(Keypoint {
            x: nums[0],
            y: nums[1],
            sigma: nums[2],
            phi: nums[3],
            response: nums[4],
            descriptor,
        });
    }
    if kps.len() != count {
        return Err(Error::Parse(format!(
            "header declares {count} keypoints but file has {}",
            kps.len()
        )));
    }
    Ok(kps)
}

pub fn save_keypoints<T: Real>(path: impl AsRef<Path>, kps: &[Keypoint<T>]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_keypoints(kps)).map_err(|e| Error::io_at(path, e))
}

pub fn load_keypoints<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Keypoint<T>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    parse_keypoints(&text)
}

/// Renders a match result in the v1 dump format.
pub fn encode_matches(result: &MatchResult) -> String {
    let mut out = String::new();
    out.push_str(MATCH_HEADER);
    out.push_str(&format!("{:.6}\n", result.rate));
    for m in &result.matches {
        out.push_str(&format!(
            "{} {} {} {}\n",
            m.index_a,
            m.index_b,
            fmt_g6(m.distance),
            fmt_g6(m.delta_phi)
        ));
    }
    out
}

/// Parses the v1 match dump into `(rate, matches)`.
pub fn parse_matches(text: &str) -> Result<(f64, Vec<Match>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty match file".into()))?;
    let rate: f64 = header
        .strip_prefix(MATCH_HEADER)
        .ok_or_else(|| Error::Parse(format!("bad match header {header:?}")))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad rate in header {header:?}")))?;
    let mut matches = Vec::new();
    for line in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 4 {
            return Err(Error::Parse(format!(
                "match line {line:?}: expected 4 fields"
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid number {s:?} in match line")))
        };
        matches.push(Match {
            index_a: t[0]
                .parse()
                .map_err(|_| Error::Parse(format!("invalid index {:?}", t[0])))?,
            index_b: t[1]
                .parse()
                .map_err(|_| Error::Parse(format!("invalid index {:?}", t[1])))?,
            distance: parse_f(t[2])?,
            delta_phi: parse_f(t[3])?,
        });
    }
    Ok((rate, matches))
}

pub fn save_matches(path: impl AsRef<Path>, result: &MatchResult) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_matches(result)).map_err(|e| Error::io_at(path, e))
}
