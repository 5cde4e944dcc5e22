pub mod budget;
pub mod characterize;
pub mod evaluate;
pub mod simulate;
pub mod validate;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub(crate) fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub(crate) fn ghz(f: f64) -> String {
    format!("{:.4} GHz", f * 1e-9)
}
