//! Generates a synthetic benchmark corpus.
//!
//! ```text
//! cargo run --release --example gen_corpus -- <dir> [count] [size] [seed]
//! ```
//!
//! Defaults: 12 images, 256x256, seed 1. The same arguments always produce
//! the same files, so a corpus can be regenerated instead of committed.

use std::path::PathBuf;

use sift_bench::synth::{write_corpus, DEFAULT_COUNT, DEFAULT_SIZE};

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: gen_corpus <dir> [count] [size] [seed]");
        std::process::exit(2);
    };
    let parse_or = |arg: Option<String>, default: u64, what: &str| -> u64 {
        match arg {
            None => default,
            Some(s) => s.parse().unwrap_or_else(|_| {
                eprintln!("invalid {what}: {s}");
                std::process::exit(2);
            }),
        }
    };
    let count = parse_or(args.next(), DEFAULT_COUNT as u64, "count") as usize;
    let size = parse_or(args.next(), DEFAULT_SIZE as u64, "size") as usize;
    let seed = parse_or(args.next(), 1, "seed");
    match write_corpus(&dir, count, size, seed) {
        Ok(paths) => println!("wrote {} images to {}", paths.len(), dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
