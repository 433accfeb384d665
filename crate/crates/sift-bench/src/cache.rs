//! Content-addressed feature cache.
//!
//! Detection is by far the most expensive step of an evaluation, and the same
//! image recurs in many pairs (and, for identity deformations, as its own
//! deformed copy). Keypoints are therefore cached under a SHA-256 key of the
//! pixel content plus the detector configuration, both in memory and —
//! optionally — as keypoint files on disk, so repeated runs skip detection.
//!
//! Cached and freshly detected features must be indistinguishable. Keypoint
//! files quantize values through their text format, so the store round-trips
//! every fresh detection through that same encoding before handing it out;
//! a cold run and a warm run then produce bit-identical results.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};
use sift_core::{
    detect_and_describe, encode_keypoints, parse_keypoints, DetectorParams, Error, GrayImage64,
    Keypoint64, Result,
};

/// Canonical rendering of the detector configuration, hashed into cache keys
/// and echoed into evaluation reports. Any parameter change changes the key.
pub fn detector_fingerprint(params: &DetectorParams) -> String {
    let p = &params.pyramid;
    format!(
        "octave_scales={} sigma0={} assumed_input_blur={} initial_doubling={} min_dimension={} \
         contrast_threshold={} edge_ratio={} max_refine_iterations={} orientation_bins={} \
         peak_ratio={}",
        p.octave_scales,
        p.sigma0,
        p.assumed_input_blur,
        p.initial_doubling,
        p.min_dimension,
        params.contrast_threshold,
        params.edge_ratio,
        params.max_refine_iterations,
        params.orientation_bins,
        params.peak_ratio,
    )
}

/// SHA-256 over the image dimensions, the raw pixel bytes, and the detector
/// fingerprint, rendered as lowercase hex.
pub fn image_key(img: &GrayImage64, params: &DetectorParams) -> String {
    let mut hasher = Sha256::new();
    hasher.update((img.width() as u64).to_le_bytes());
    hasher.update((img.height() as u64).to_le_bytes());
    for &p in img.pixels() {
        hasher.update(p.to_le_bytes());
    }
    hasher.update(detector_fingerprint(params).as_bytes());
    hex::encode(hasher.finalize())
}

/// Runs the detector and quantizes the result through the keypoint file
/// format, making in-memory features identical to features reloaded from disk.
pub fn detect_quantized(img: &GrayImage64, params: &DetectorParams) -> Result<Vec<Keypoint64>> {
    let kps = detect_and_describe(img, params)?;
    parse_keypoints(&encode_keypoints(&kps))
}

/// Feature store shared across evaluation workers.
pub struct FeatureStore {
    params: DetectorParams,
    disk: Option<PathBuf>,
    memory: Mutex<HashMap<String, Arc<Vec<Keypoint64>>>>,
}

impl FeatureStore {
    /// A purely in-memory store.
    pub fn in_memory(params: DetectorParams) -> Self {
        FeatureStore {
            params,
            disk: None,
            memory: Mutex::new(HashMap::new()),
        }
    }

    /// A store that additionally persists `<key>.kp` files under `dir`.
    pub fn with_disk_cache(params: DetectorParams, dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(Error::Io)?;
        Ok(FeatureStore {
            params,
            disk: Some(dir),
            memory: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    /// Returns the features for `img`, detecting on a miss. Detection runs
    /// outside the map lock; two workers racing on the same image do redundant
    /// work but write identical bytes, so the outcome does not depend on who
    /// wins.
    pub fn features(&self, img: &GrayImage64) -> Result<Arc<Vec<Keypoint64>>> {
        let key = image_key(img, &self.params);
        if let Some(hit) = self.memory.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        if let Some(dir) = &self.disk {
            let path = dir.join(format!("{key}.kp"));
            if path.is_file() {
                let kps = Arc::new(sift_core::load_keypoints::<f64>(&path)?);
                self.memory
                    .lock()
                    .unwrap()
                    .insert(key, Arc::clone(&kps));
                return Ok(kps);
            }
        }
        let kps = Arc::new(detect_quantized(img, &self.params)?);
        if let Some(dir) = &self.disk {
            let path = dir.join(format!("{key}.kp"));
            std::fs::write(&path, encode_keypoints(&kps)).map_err(Error::Io)?;
        }
        self.memory.lock().unwrap().insert(key, Arc::clone(&kps));
        Ok(kps)
    }
}
