//! Characterization steps shared by `characterize` and `evaluate`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use eadf_core::container::{read_json, ContainerReader};
use eadf_core::phase_center::{
    build_element_model, delay_map_from_sweep, fitting_polarization, DelayMap,
};
use eadf_core::{
    fit_phase_center, subsample, ArrayModel, Mode, PatternSet, PhaseCenterEstimate, Polarization,
    RadiationPattern, Vec3,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CentersGrid {
    /// Fit on the full-resolution sweep of the container.
    Full,
    /// Fit on the sweep subsampled to the build step.
    Subsampled,
}

/// One entry of `phase_centers.json`. Only `element_id` and `d_hat` are
/// required when the file is fed back through `--centers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterRecord {
    pub element_id: u32,
    /// Meters.
    pub d_hat: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<Polarization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_tau_hat_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms_residual_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_directions_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unresolved_directions: Option<usize>,
}

impl CenterRecord {
    fn from_fit(element_id: u32, pol: Polarization, est: &PhaseCenterEstimate, map: &DelayMap) -> Self {
        CenterRecord {
            element_id,
            d_hat: est.d_hat,
            polarization: Some(pol),
            delta_tau_hat_s: Some(est.delta_tau_hat),
            rms_residual_s: Some(est.rms_residual),
            n_directions_used: Some(est.n_directions_used),
            condition_number: Some(est.condition_number),
            unresolved_directions: Some(map.diagnostics.len()),
        }
    }
}

pub struct FittedCenter {
    pub record: CenterRecord,
    pub map: DelayMap,
}

/// Index of `frequency_hz` in the sweep (within 1 Hz), or the center
/// frequency when none is given.
pub fn frequency_index(frequencies_hz: &[f64], frequency_hz: Option<f64>) -> Result<usize> {
    let Some(f) = frequency_hz else {
        if frequencies_hz.is_empty() {
            bail!("container holds no frequencies");
        }
        return Ok((frequencies_hz.len() - 1) / 2);
    };
    frequencies_hz
        .iter()
        .position(|&g| (g - f).abs() <= 1.0)
        .with_context(|| {
            format!(
                "{f} Hz is not a measured frequency ({} points from {} to {} Hz)",
                frequencies_hz.len(),
                frequencies_hz.first().copied().unwrap_or(f64::NAN),
                frequencies_hz.last().copied().unwrap_or(f64::NAN)
            )
        })
}

fn thinned(p: RadiationPattern, factors: (usize, usize)) -> Result<RadiationPattern> {
    if factors == (1, 1) {
        return Ok(p);
    }
    Ok(subsample(&p, factors.0, factors.1)?)
}

/// Fits the phase center of every element from its wideband sweep, one
/// element in memory at a time.
pub fn estimate_centers(
    reader: &mut ContainerReader,
    factors: (usize, usize),
    threshold_db: f64,
) -> Result<Vec<FittedCenter>> {
    let freqs = reader.manifest().frequencies_hz.clone();
    let center = reader.read_frequency(frequency_index(&freqs, None)?)?;
    let mut out = Vec::new();
    for id in reader.manifest().element_ids.clone() {
        let pol = fitting_polarization(&center, id)?;
        let sweep = reader
            .read_sweep(id, pol)?
            .into_iter()
            .map(|p| thinned(p, factors))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&RadiationPattern> = sweep.iter().collect();
        let map = delay_map_from_sweep(&refs, &freqs, threshold_db)
            .with_context(|| format!("delay map of element {id}"))?;
        let est = fit_phase_center(&map).with_context(|| format!("phase center of element {id}"))?;
        out.push(FittedCenter {
            record: CenterRecord::from_fit(id, pol, &est, &map),
            map,
        });
    }
    Ok(out)
}

pub fn read_centers(path: &Path) -> Result<Vec<CenterRecord>> {
    read_json(path).with_context(|| format!("reading phase centers from {}", path.display()))
}

/// Model of every element in `slice` (one frequency) on the grid subsampled
/// by `factors`.
pub fn build_model(
    slice: &PatternSet,
    factors: (usize, usize),
    mode: Mode,
    centers: &BTreeMap<u32, Vec3>,
    power_fraction: f64,
) -> Result<ArrayModel> {
    let f = *slice
        .frequencies_hz
        .first()
        .context("empty frequency slice")?;
    let mut elements = Vec::new();
    for id in slice.element_ids() {
        let patterns = slice
            .polarizations()
            .into_iter()
            .filter_map(|pol| slice.get(id, pol, f))
            .map(|p| thinned(p.clone(), factors))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&RadiationPattern> = patterns.iter().collect();
        let center = centers.get(&id).copied();
        if mode == Mode::Enhanced && center.is_none() {
            bail!("no phase center for element {id}");
        }
        elements.push(build_element_model(&refs, center, mode, power_fraction)?);
    }
    Ok(ArrayModel::new(f, mode, elements)?)
}


/// Phase centers for an enhanced build, read from `file` or fitted on the
/// sweep. Fitted centers come back with their delay maps.
pub fn resolve_centers(
    reader: &mut ContainerReader,
    file: Option<&Path>,
    grid: CentersGrid,
    factors: (usize, usize),
    threshold_db: f64,
) -> Result<(BTreeMap<u32, Vec3>, Vec<FittedCenter>)> {
    if let Some(path) = file {
        let records = read_centers(path)?;
        let centers = records.iter().map(|r| (r.element_id, r.d_hat)).collect();
        return Ok((centers, Vec::new()));
    }
    let fit_factors = match grid {
        CentersGrid::Full => (1, 1),
        CentersGrid::Subsampled => factors,
    };
    let fitted = estimate_centers(reader, fit_factors, threshold_db)?;
    let centers = fitted.iter().map(|f| (f.record.element_id, f.record.d_hat)).collect();
    Ok((centers, fitted))
}
