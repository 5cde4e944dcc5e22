//! Chamber scenario files (TOML or JSON).

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use eadf_core::ChamberSpec;

/// Parses and checks a scenario. `.json` files are read as JSON, anything
/// else as TOML. Parse errors carry the line and column of the problem.
pub fn load_chamber(path: &Path) -> Result<ChamberSpec> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    let spec = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => ChamberSpec::from_json(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?,
        _ => toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?,
    };
    spec.check()
        .with_context(|| format!("scenario {} is not consistent", path.display()))?;
    Ok(spec)
}
