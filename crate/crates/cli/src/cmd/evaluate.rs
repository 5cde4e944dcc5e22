use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eadf_core::container::{
    read_model, write_cdf_csv, write_json, write_rem_csv, CdfSummary, ContainerReader,
};
use eadf_core::metrics::grid_factors;
use eadf_core::phase_center::DEFAULT_THRESHOLD_DB;
use eadf_core::{rem_map, ArrayModel, Cdf, Mode, PatternSet, Polarization, RemOptions, RemReport, Vec3};
use rayon::prelude::*;
use serde::Serialize;

use super::ensure_dir;
use crate::pipeline::{build_model, frequency_index, resolve_centers, CentersGrid};
use crate::steps;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ground-truth pattern container, scored at full resolution.
    pub truth: PathBuf,
    /// Output directory for CDFs and summaries.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Evaluate a saved model directory.
    #[arg(long, conflicts_with = "steps")]
    pub model: Option<PathBuf>,
    /// Build and evaluate one model per step, e.g. `3,4.5,6`.
    #[arg(long, required_unless_present = "model")]
    pub steps: Option<String>,
    /// Container the step models are built from; the truth container when
    /// omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Mode of the step models.
    #[arg(long, default_value = "enhanced")]
    pub mode: Mode,
    /// Step of an extra conventional baseline model, in degrees.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Frequency in Hz; the model frequency or the sweep center by default.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Main-coverage threshold below the truth peak, in dB.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB)]
    pub threshold_db: f64,
    /// Score every direction instead of the main coverage.
    #[arg(long)]
    pub all_directions: bool,
    /// Also score the directions the model was built from.
    #[arg(long)]
    pub include_build_points: bool,
    /// Fraction of EADF power kept by truncation, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub power_fraction: f64,
    /// Phase centers to use instead of fitting them.
    #[arg(long)]
    pub centers: Option<PathBuf>,
    /// Grid the phase centers are fitted on.
    #[arg(long, value_enum, default_value = "full")]
    pub centers_grid: CentersGrid,
}

#[derive(Debug, Serialize)]
struct ElementSummary {
    element_id: u32,
    polarization: Polarization,
    count: usize,
    median_db: f64,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    label: String,
    mode: Mode,
    step_deg: Option<f64>,
    factors: (usize, usize),
    cdf_file: String,
    include_build_points: bool,
    pooled: CdfSummary,
    elements: Vec<ElementSummary>,
}

#[derive(Debug, Serialize)]
struct Summary {
    frequency_hz: f64,
    threshold_db: Option<f64>,
    runs: Vec<RunSummary>,
}

fn score(truth: &PatternSet, model: &ArrayModel, mut options: RemOptions) -> Result<(Vec<RemReport>, RemOptions)> {
    let build = model.grid().context("model has no elements")?;
    if grid_factors(&truth.grid, &build)? == (1, 1) && !options.include_build_points {
        // every truth direction is a build point
        options.include_build_points = true;
    }
    let reports = truth
        .patterns
        .par_iter()
        .filter(|p| model.element_index(p.element_id).is_some())
        .map(|p| rem_map(p, model, &options))
        .collect::<eadf_core::Result<Vec<_>>>()?;
    if reports.is_empty() {
        bail!("model and truth share no elements");
    }
    Ok((reports, options))
}

fn summarize(
    label: String,
    step_deg: Option<f64>,
    factors: (usize, usize),
    model: &ArrayModel,
    reports: &[RemReport],
    options: &RemOptions,
    cdf_path: &Path,
) -> Result<RunSummary> {
    let pooled = Cdf::pooled(reports.iter().map(|r| &r.cdf));
    write_cdf_csv(cdf_path, &pooled)?;
    Ok(RunSummary {
        label,
        mode: model.mode,
        step_deg,
        factors,
        cdf_file: cdf_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        include_build_points: options.include_build_points,
        pooled: CdfSummary::new(&pooled),
        elements: reports
            .iter()
            .map(|r| ElementSummary {
                element_id: r.element_id,
                polarization: r.polarization,
                count: r.cdf.len(),
                median_db: r.median_db,
            })
            .collect(),
    })
}

fn print_row(run: &RunSummary) {
    let p = &run.pooled;
    println!(
        "{:<22} median {:>9.2} dB   p5 {:>9.2}   p95 {:>9.2}   n = {}",
        run.label, p.median_db, p.p5_db, p.p95_db, p.count
    );
}

pub fn run(args: Args) -> Result<()> {
    if !(args.power_fraction > 0.0 && args.power_fraction <= 1.0) {
        bail!("--power-fraction must be in (0, 1], got {}", args.power_fraction);
    }
    let mut truth_reader = ContainerReader::open(&args.truth)
        .with_context(|| format!("opening truth container {}", args.truth.display()))?;
    let options = RemOptions {
        include_build_points: args.include_build_points,
        threshold_db: (!args.all_directions).then_some(args.threshold_db),
    };
    ensure_dir(&args.out)?;

    if let Some(dir) = &args.model {
        let model = read_model(dir).with_context(|| format!("reading model {}", dir.display()))?;
        if let Some(f) = args.freq.filter(|f| (f - model.frequency_hz).abs() > 1.0) {
            bail!("model is at {} Hz, --freq asks for {f} Hz", model.frequency_hz);
        }
        let fi = frequency_index(&truth_reader.manifest().frequencies_hz, Some(model.frequency_hz))?;
        let truth = truth_reader.read_frequency(fi)?;
        let build = model.grid().context("model has no elements")?;
        let factors = grid_factors(&truth.grid, &build)?;
        let (reports, used) = score(&truth, &model, options)?;
        for r in &reports {
            write_rem_csv(&args.out.join(format!("rem_e{}_{}.csv", r.element_id, r.polarization)), r)?;
        }
        let run = summarize(
            "model".to_string(),
            None,
            factors,
            &model,
            &reports,
            &used,
            &args.out.join("cdf.csv"),
        )?;
        print_row(&run);
        let summary = Summary {
            frequency_hz: model.frequency_hz,
            threshold_db: options.threshold_db,
            runs: vec![run],
        };
        write_json(&args.out.join("summary.json"), &summary)?;
        return Ok(());
    }

    let step_list = steps::parse_list(args.steps.as_deref().unwrap_or_default())?;
    let fi = frequency_index(&truth_reader.manifest().frequencies_hz, args.freq)?;
    let frequency_hz = truth_reader.manifest().frequencies_hz[fi];
    let truth = truth_reader.read_frequency(fi)?;

    let mut own_input;
    let input_reader = match &args.input {
        Some(path) => {
            own_input = ContainerReader::open(path)
                .with_context(|| format!("opening input container {}", path.display()))?;
            &mut own_input
        }
        None => &mut truth_reader,
    };
    if input_reader.grid() != truth.grid {
        bail!("input and truth containers are on different grids");
    }
    let input_fi = frequency_index(&input_reader.manifest().frequencies_hz, Some(frequency_hz))?;
    let input = input_reader.read_frequency(input_fi)?;

    let grid = truth.grid;
    let mut plan: Vec<(Mode, f64, (usize, usize))> = Vec::new();
    for &s in &step_list {
        plan.push((args.mode, s, steps::factors(&grid, s)?));
    }
    if let Some(s) = args.baseline {
        plan.push((Mode::Conventional, s, steps::factors(&grid, s)?));
    }

    // centers fitted on the full sweep are shared by every step
    let mut shared: Option<BTreeMap<u32, Vec3>> = None;
    let mut runs = Vec::new();
    for (mode, step, factors) in plan {
        let centers = match mode {
            Mode::Conventional => BTreeMap::new(),
            Mode::Enhanced => match (&shared, args.centers_grid, &args.centers) {
                (Some(c), _, _) => c.clone(),
                (None, grid_mode, file) => {
                    let (c, _) = resolve_centers(input_reader, file.as_deref(), grid_mode, factors, args.threshold_db)?;
                    if file.is_some() || grid_mode == CentersGrid::Full {
                        shared = Some(c.clone());
                    }
                    c
                }
            },
        };
        let model = build_model(&input, factors, mode, &centers, args.power_fraction)
            .with_context(|| format!("{mode} model at {step}°"))?;
        let (reports, used) = score(&truth, &model, options)?;
        let label = format!("{mode} {step}°");
        let cdf_path = args.out.join(format!("cdf_{mode}_{step}deg.csv"));
        let run = summarize(label, Some(step), factors, &model, &reports, &used, &cdf_path)?;
        print_row(&run);
        runs.push(run);
    }
    let summary = Summary {
        frequency_hz,
        threshold_db: options.threshold_db,
        runs,
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
