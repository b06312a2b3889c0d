//! Shared inputs for the pipeline benchmarks.

use std::path::{Path, PathBuf};

use urlscope_core::corpus::{load_snapshot, PageSnapshot};
use urlscope_core::evidence::EvidenceBundle;
use urlscope_core::pipeline::recorded_bundle;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

/// The recorded github.com evidence bundle.
pub fn github_bundle() -> EvidenceBundle {
    recorded_bundle(&fixtures_dir().join("github"), &Default::default()).expect("github fixture loads")
}

/// The github.com snapshot with its served scripts.
pub fn github_snapshot() -> PageSnapshot {
    load_snapshot(&fixtures_dir().join("github")).expect("github fixture loads")
}

pub fn synthetic_page(name: &str) -> PageSnapshot {
    load_snapshot(&fixtures_dir().join("synthetic").join(name)).expect("synthetic page loads")
}
