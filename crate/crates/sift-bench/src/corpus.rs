//! Corpus discovery: find the images under a directory and give each one a
//! stable identifier (its file name). Entries are ordered lexicographically by
//! file name so every run visits pairs in the same order.

use std::path::{Path, PathBuf};

use sift_core::{load_image, Error, GrayImage64, Result};

/// One image in a corpus. `id` is the file name, used in reports.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub path: PathBuf,
}

/// A directory of benchmark images.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub entries: Vec<CorpusEntry>,
}

/// An image that was read and decoded successfully.
pub struct LoadedImage {
    pub id: String,
    pub image: GrayImage64,
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "pgm" || e == "png"
        })
        .unwrap_or(false)
}

/// Scans `root` for `.pgm` / `.png` files (non-recursive). Fails if the
/// directory cannot be read or contains no images at all — an empty corpus is
/// a configuration error, not an empty result.
pub fn load_corpus(root: &Path) -> Result<Corpus> {
    let dir = std::fs::read_dir(root).map_err(|e| {
        Error::InvalidArgument(format!("cannot read corpus directory {}: {e}", root.display()))
    })?;
    let mut entries = Vec::new();
    for item in dir {
        let item = item.map_err(Error::Io)?;
        let path = item.path();
        if path.is_file() && has_image_extension(&path) {
            let id = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            if !id.is_empty() {
                entries.push(CorpusEntry { id, path });
            }
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    if entries.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "corpus directory {} contains no .pgm or .png images",
            root.display()
        )));
    }
    Ok(Corpus {
        root: root.to_path_buf(),
        entries,
    })
}

impl Corpus {
    /// Decodes every entry. Unreadable or corrupt files are skipped with a
    /// warning rather than aborting the evaluation.
    pub fn load_images(&self) -> (Vec<LoadedImage>, Vec<String>) {
        let mut images = Vec::with_capacity(self.entries.len());
        let mut warnings = Vec::new();
        for entry in &self.entries {
            match load_image(&entry.path) {
                Ok(image) => images.push(LoadedImage {
                    id: entry.id.clone(),
                    image,
                }),
                Err(e) => warnings.push(format!("skipping {}: {e}", entry.id)),
            }
        }
        (images, warnings)
    }
}
