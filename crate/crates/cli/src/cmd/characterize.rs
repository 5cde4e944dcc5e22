use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use eadf_core::container::{write_delay_map_csv, write_json, write_model, write_spectrum_csv, ContainerReader};
use eadf_core::phase_center::DEFAULT_THRESHOLD_DB;
use eadf_core::{Mode, Polarization};

use super::{ensure_dir, ghz};
use crate::pipeline::{build_model, frequency_index, resolve_centers, CenterRecord, CentersGrid};
use crate::steps;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Pattern container to characterize.
    pub input: PathBuf,
    /// Output directory for the model and its reports.
    #[arg(short, long)]
    pub out: PathBuf,
    /// `conventional` or `enhanced`.
    #[arg(long, default_value = "enhanced")]
    pub mode: Mode,
    /// Build grid step in degrees; the full container grid when omitted.
    #[arg(long)]
    pub step: Option<f64>,
    /// Frequency to model in Hz; the center of the sweep when omitted.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Main-coverage threshold below the pattern peak, in dB.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB)]
    pub threshold_db: f64,
    /// Fraction of EADF power kept by truncation, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub power_fraction: f64,
    /// Phase centers to use instead of fitting them (phase_centers.json).
    #[arg(long)]
    pub centers: Option<PathBuf>,
    /// Grid the phase centers are fitted on.
    #[arg(long, value_enum, default_value = "full")]
    pub centers_grid: CentersGrid,
}

pub fn run(args: Args) -> Result<()> {
    if !(args.power_fraction > 0.0 && args.power_fraction <= 1.0) {
        bail!("--power-fraction must be in (0, 1], got {}", args.power_fraction);
    }
    let mut reader = ContainerReader::open(&args.input)
        .with_context(|| format!("opening container {}", args.input.display()))?;
    let grid = reader.grid();
    let factors = match args.step {
        Some(s) => steps::factors(&grid, s)?,
        None => (1, 1),
    };
    let fi = frequency_index(&reader.manifest().frequencies_hz, args.freq)?;

    let (centers, fitted) = match args.mode {
        Mode::Enhanced => resolve_centers(
            &mut reader,
            args.centers.as_deref(),
            args.centers_grid,
            factors,
            args.threshold_db,
        )?,
        Mode::Conventional => Default::default(),
    };
    let slice = reader.read_frequency(fi)?;
    let model = build_model(&slice, factors, args.mode, &centers, args.power_fraction)?;

    ensure_dir(&args.out)?;
    write_model(&args.out, &model)?;
    let spectra = args.out.join("spectra");
    ensure_dir(&spectra)?;
    for e in &model.elements {
        for pol in [Polarization::H, Polarization::V] {
            if let Some(q) = e.eadf(pol) {
                write_spectrum_csv(&spectra.join(format!("e{}_{pol}.csv", e.element_id)), q)?;
            }
        }
    }
    if args.mode == Mode::Enhanced {
        let records: Vec<CenterRecord> = match &args.centers {
            Some(_) => centers
                .iter()
                .filter(|(id, _)| model.element_index(**id).is_some())
                .map(|(&element_id, &d_hat)| CenterRecord {
                    element_id,
                    d_hat,
                    polarization: None,
                    delta_tau_hat_s: None,
                    rms_residual_s: None,
                    n_directions_used: None,
                    condition_number: None,
                    unresolved_directions: None,
                })
                .collect(),
            None => fitted.iter().map(|f| f.record.clone()).collect(),
        };
        write_json(&args.out.join("phase_centers.json"), &records)?;
        if !fitted.is_empty() {
            let maps = args.out.join("delay_maps");
            ensure_dir(&maps)?;
            for f in &fitted {
                write_delay_map_csv(&maps.join(format!("e{}.csv", f.record.element_id)), &f.map)?;
            }
        }
    }

    let build = model.grid().context("model has no elements")?;
    println!(
        "{} model of {} elements at {} on M={}, N={} (factors {}x{})",
        args.mode,
        model.elements.len(),
        ghz(model.frequency_hz),
        build.m(),
        build.n(),
        factors.0,
        factors.1
    );
    for f in &fitted {
        let r = &f.record;
        let d = r.d_hat;
        println!(
            "  element {:>3}  d = ({:+.4}, {:+.4}, {:+.4}) mm  rms {:.3} ps  {} directions  cond {:.2}",
            r.element_id,
            d.x * 1e3,
            d.y * 1e3,
            d.z * 1e3,
            r.rms_residual_s.unwrap_or(f64::NAN) * 1e12,
            r.n_directions_used.unwrap_or(0),
            r.condition_number.unwrap_or(f64::NAN)
        );
        if let Some(n) = r.unresolved_directions.filter(|&n| n > 0) {
            eprintln!("  element {}: {n} directions without a delay estimate", r.element_id);
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
