use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use eadf_core::container::{read_model, write_json};
use eadf_core::{max_spatial_freq, wavelength, Mode, SpatialFreqBudget, Vec3};
use serde::Serialize;

use super::ghz;
use crate::config::load_chamber;

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["model", "spec", "offset"])))]
pub struct Args {
    /// Use the phase centers of a saved enhanced model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Use the element positions of a scenario file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Phase-center offset `x,y,z` in meters; repeat for several elements.
    #[arg(long, value_parser = parse_offset)]
    pub offset: Vec<Vec3>,
    /// Frequency in Hz. Defaults to the model frequency or the scenario's
    /// center frequency; required with `--offset`.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_offset(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{s:?}: {e}"))?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z in meters, got {s:?}")),
    }
}

#[derive(Debug, Serialize)]
struct ElementBudget {
    element_id: u32,
    offset_m: Vec3,
    offset_wavelengths: f64,
    budget: SpatialFreqBudget,
}

#[derive(Debug, Serialize)]
struct Report {
    frequency_hz: f64,
    wavelength_m: f64,
    elements: Vec<ElementBudget>,
    array: SpatialFreqBudget,
}

fn step(s: Option<f64>) -> String {
    match s {
        Some(rad) => format!("{:.4}°", rad.to_degrees()),
        None => "unbounded".to_string(),
    }
}

pub fn run(args: Args) -> Result<()> {
    let (offsets, default_freq): (Vec<(u32, Vec3)>, Option<f64>) = if let Some(dir) = &args.model {
        let model = read_model(dir).with_context(|| format!("reading model {}", dir.display()))?;
        if model.mode == Mode::Conventional {
            eprintln!("note: conventional models carry no phase centers; every offset is zero");
        }
        let offsets = model
            .elements
            .iter()
            .map(|e| (e.element_id, e.phase_center.unwrap_or(Vec3::ZERO)))
            .collect();
        (offsets, Some(model.frequency_hz))
    } else if let Some(path) = &args.spec {
        let spec = load_chamber(path)?;
        let f = &spec.frequencies;
        let offsets = spec.elements.iter().map(|e| (e.id, e.position)).collect();
        (offsets, Some(f[(f.len() - 1) / 2]))
    } else {
        let offsets = (0u32..).zip(args.offset.iter().copied()).collect();
        (offsets, None)
    };
    let Some(frequency_hz) = args.freq.or(default_freq) else {
        bail!("--freq is required with --offset");
    };
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        bail!("--freq must be a positive frequency, got {frequency_hz}");
    }
    let lambda = wavelength(frequency_hz);
    let elements: Vec<ElementBudget> = offsets
        .into_iter()
        .map(|(element_id, d)| ElementBudget {
            element_id,
            offset_m: d,
            offset_wavelengths: d.norm() / lambda,
            budget: max_spatial_freq(d, lambda),
        })
        .collect();
    let array = SpatialFreqBudget::array_max(elements.iter().map(|e| &e.budget));

    println!("spatial-frequency budget at {} (λ = {:.4} mm)", ghz(frequency_hz), lambda * 1e3);
    println!(
        "{:>8} {:>10} {:>12} {:>12} {:>13} {:>13}",
        "element", "|d| (λ)", "f_θ (1/rad)", "f_φ (1/rad)", "zenith step", "azimuth step"
    );
    for e in &elements {
        let b = &e.budget;
        println!(
            "{:>8} {:>10.3} {:>12.3} {:>12.3} {:>13} {:>13}",
            e.element_id,
            e.offset_wavelengths,
            b.f_theta_max,
            b.f_phi_max,
            step(b.max_zenith_step),
            step(b.max_azimuth_step)
        );
    }
    println!(
        "{:>8} {:>10} {:>12.3} {:>12.3} {:>13} {:>13}",
        "array",
        "",
        array.f_theta_max,
        array.f_phi_max,
        step(array.max_zenith_step),
        step(array.max_azimuth_step)
    );
    if let Some(path) = &args.json {
        write_json(
            path,
            &Report {
                frequency_hz,
                wavelength_m: lambda,
                elements,
                array,
            },
        )?;
    }
    Ok(())
}
