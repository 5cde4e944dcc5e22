use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use eadf_core::container::{read_model, ContainerReader};
use eadf_core::{validate, PatternSet};

use crate::config::load_chamber;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// A pattern container, a model directory or a scenario file.
    pub path: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let path = &args.path;
    if path.is_file() {
        let spec = load_chamber(path)?;
        println!(
            "scenario ok: {} elements, {} frequencies, M={}, N={}",
            spec.elements.len(),
            spec.frequencies.len(),
            spec.grid.m(),
            spec.grid.n()
        );
        return Ok(());
    }
    if path.join("model.json").is_file() {
        let model = read_model(path)?;
        println!(
            "model ok: {} {} elements at {} Hz",
            model.mode,
            model.elements.len(),
            model.frequency_hz
        );
        return Ok(());
    }

    let mut reader =
        ContainerReader::open(path).with_context(|| format!("opening container {}", path.display()))?;
    let m = reader.manifest().clone();
    let grid = reader.grid();
    let mut count = 0;
    // one sweep in memory at a time
    for &id in &m.element_ids {
        for &pol in &m.polarizations {
            let set = PatternSet::new(grid, m.frequencies_hz.clone(), reader.read_sweep(id, pol)?);
            for d in validate(&set) {
                println!("{d}");
                count += 1;
            }
        }
    }
    println!(
        "container {}: {} elements x {} polarizations x {} frequencies on M={}, N={}, {count} diagnostics",
        path.display(),
        m.element_ids.len(),
        m.polarizations.len(),
        m.frequencies_hz.len(),
        m.m,
        m.n
    );
    if count > 0 {
        bail!("{count} diagnostics");
    }
    Ok(())
}
