use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use eadf_core::container::{ContainerWriter, PatternManifest};
use eadf_core::synth::simulate_element;

use super::ghz;
use crate::config::load_chamber;

/// SNR override: a level in dB or `none` for a noiseless set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr(pub Option<f64>);

impl FromStr for Snr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Snr(None));
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| Snr(Some(v)))
            .ok_or_else(|| format!("expected an SNR in dB or `none`, got {s:?}"))
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario file (TOML, or JSON with a `.json` extension).
    pub spec: PathBuf,
    /// Output container directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Override the scenario SNR (dB), `none` for noiseless.
    #[arg(long)]
    pub snr: Option<Snr>,
    /// Override the scenario noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(args: Args) -> Result<()> {
    let mut spec = load_chamber(&args.spec)?;
    if let Some(Snr(snr)) = args.snr {
        spec.snr_db = snr;
    }
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    spec.check()?;

    let ids = spec.elements.iter().map(|e| e.id).collect();
    let manifest = PatternManifest::new(spec.grid, spec.frequencies.clone(), ids, spec.polarizations.clone());
    let mut writer = ContainerWriter::create(&args.out, manifest)
        .with_context(|| format!("creating container {}", args.out.display()))?;
    // one element in memory at a time
    for (i, e) in spec.elements.iter().enumerate() {
        for p in simulate_element(&spec, i).with_context(|| format!("simulating element {}", e.id))? {
            writer.write(&p)?;
        }
    }
    writer.finish()?;

    let f = &spec.frequencies;
    let snr = match spec.snr_db {
        Some(v) => format!("{v} dB"),
        None => "noiseless".to_string(),
    };
    println!(
        "simulated {} elements x {} polarizations x {} frequencies ({} to {}) on M={}, N={}, SNR {snr}",
        spec.elements.len(),
        spec.polarizations.len(),
        f.len(),
        ghz(f[0]),
        ghz(f[f.len() - 1]),
        spec.grid.m(),
        spec.grid.n()
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_values() {
        assert_eq!("none".parse::<Snr>().unwrap(), Snr(None));
        assert_eq!("60".parse::<Snr>().unwrap(), Snr(Some(60.0)));
        assert!("loud".parse::<Snr>().is_err());
        assert!("inf".parse::<Snr>().is_err());
    }
}
