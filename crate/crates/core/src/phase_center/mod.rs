//! Phase-center estimation from wideband sweeps and phase compensation.
//!
//! Per element: main-coverage mask at the center frequency, one delay
//! estimate per covered direction, a linear least-squares fit of the delay
//! map, then compensation of the pattern at the characterized frequency.

mod delay;
mod fit;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;

pub use delay::{estimate_delay, DelayEstimator};
pub use fit::{
    build_delay_map, delay_map_from_sweep, fit_phase_center, DelayMap, PhaseCenterEstimate,
    MAX_CONDITION,
};

use crate::eadf::{forward, truncate, ArrayModel, ElementModel, Mode};
use crate::error::{Error, Result};
use crate::geometry::{unit_vector_at, wavelength, Vec3};
use crate::pattern::{extend, PatternSet, Polarization, RadiationPattern};

/// Default main-coverage threshold in dB below the pattern maximum.
pub const DEFAULT_THRESHOLD_DB: f64 = 13.0;

/// Directions whose gain is within `threshold_db` of the pattern maximum.
pub fn main_coverage_mask(pattern: &RadiationPattern, threshold_db: f64) -> Result<Array2<bool>> {
    if !pattern.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "element {} {} at {} Hz has non-finite samples",
            pattern.element_id, pattern.polarization, pattern.frequency_hz
        )));
    }
    let peak = pattern.data.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::AllMasked);
    }
    let floor = peak * 10f64.powf(-threshold_db / 10.0);
    Ok(pattern.data.mapv(|v| v.norm_sqr() >= floor))
}

/// Removes the phase of a phase-center offset `d_hat`:
/// `Ã = A·exp(-j2π uᵀd̂/λ)`.
pub fn compensate(pattern: &RadiationPattern, d_hat: Vec3, wavelength_m: f64) -> RadiationPattern {
    let grid = pattern.grid;
    let k = TAU / wavelength_m;
    let mut out = pattern.clone();
    for ((r, c), v) in out.data.indexed_iter_mut() {
        let u = unit_vector_at(grid.zenith(r), grid.azimuth(c));
        *v *= Complex64::cis(-k * u.dot(&d_hat));
    }
    out
}

/// EADFs of one element at one frequency. `patterns` holds the H and/or V
/// pattern of that element; in enhanced mode `center` is required and the
/// patterns are compensated before the transform.
pub fn build_element_model(
    patterns: &[&RadiationPattern],
    center: Option<Vec3>,
    mode: Mode,
    power_fraction: f64,
) -> Result<ElementModel> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::InvalidInput("no patterns for element".to_string()))?;
    let element_id = first.element_id;
    if mode == Mode::Enhanced && center.is_none() {
        return Err(Error::ModeMismatch(format!(
            "enhanced model of element {element_id} needs a phase center"
        )));
    }
    let mut model = ElementModel {
        element_id,
        h: None,
        v: None,
        phase_center: match mode {
            Mode::Conventional => None,
            Mode::Enhanced => center,
        },
    };
    for p in patterns {
        if p.element_id != element_id {
            return Err(Error::InvalidInput(format!(
                "mixed elements {} and {element_id} in one element model",
                p.element_id
            )));
        }
        let q = match (mode, center) {
            (Mode::Enhanced, Some(d)) => forward(&extend(&compensate(p, d, wavelength(p.frequency_hz)))),
            _ => forward(&extend(p)),
        };
        let q = if power_fraction < 1.0 {
            truncate(&q, power_fraction)?
        } else {
            q
        };
        match p.polarization {
            Polarization::H => model.h = Some(q),
            Polarization::V => model.v = Some(q),
        }
    }
    Ok(model)
}

/// Delay map and phase-center fit of one element sweep.
pub fn estimate_phase_center(
    sweep: &[&RadiationPattern],
    frequencies_hz: &[f64],
    threshold_db: f64,
) -> Result<(DelayMap, PhaseCenterEstimate)> {
    let map = delay_map_from_sweep(sweep, frequencies_hz, threshold_db)?;
    let est = fit_phase_center(&map)?;
    Ok((map, est))
}

/// Polarization used for phase-center fitting: the one with the strongest
/// peak at the center frequency, H on a tie.
pub fn fitting_polarization(set: &PatternSet, element_id: u32) -> Result<Polarization> {
    let center = set
        .frequencies_hz
        .get(set.center_frequency_index())
        .copied()
        .ok_or_else(|| Error::Missing("empty frequency list".to_string()))?;
    let mut best: Option<(Polarization, f64)> = None;
    for pol in set.polarizations() {
        if let Some(p) = set.get(element_id, pol, center) {
            let peak = p.peak_magnitude();
            if best.is_none_or(|(_, b)| peak > b) {
                best = Some((pol, peak));
            }
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::Missing(format!("element {element_id} at {center} Hz")))
}

/// Phase centers of every element in `set`, keyed by element id.
pub fn estimate_phase_centers(
    set: &PatternSet,
    threshold_db: f64,
) -> Result<BTreeMap<u32, PhaseCenterEstimate>> {
    let mut out = BTreeMap::new();
    for id in set.element_ids() {
        let pol = fitting_polarization(set, id)?;
        let map = build_delay_map(set, id, pol, threshold_db)?;
        out.insert(id, fit_phase_center(&map)?);
    }
    Ok(out)
}

/// Array model at `frequency_hz` from the patterns in `set`. Enhanced mode
/// needs a center for every element in `centers`.
pub fn build_model(
    set: &PatternSet,
    frequency_hz: f64,
    mode: Mode,
    centers: &BTreeMap<u32, Vec3>,
    power_fraction: f64,
) -> Result<ArrayModel> {
    let fi = set
        .frequency_index(frequency_hz)
        .ok_or_else(|| Error::Missing(format!("frequency {frequency_hz} Hz not in set")))?;
    let f = set.frequencies_hz[fi];
    let mut elements = Vec::new();
    for id in set.element_ids() {
        let patterns: Vec<&RadiationPattern> = set
            .polarizations()
            .into_iter()
            .filter_map(|pol| set.get(id, pol, f))
            .collect();
        let center = centers.get(&id).copied();
        elements.push(build_element_model(&patterns, center, mode, power_fraction)?);
    }
    ArrayModel::new(f, mode, elements)
}

/// Conventional model: raw patterns, no compensation, no truncation.
pub fn build_conventional_model(set: &PatternSet, frequency_hz: f64) -> Result<ArrayModel> {
    build_model(set, frequency_hz, Mode::Conventional, &BTreeMap::new(), 1.0)
}

/// Enhanced model with phase centers fitted from the full sweep in `set`.
pub fn build_enhanced_model(
    set: &PatternSet,
    frequency_hz: f64,
    threshold_db: f64,
) -> Result<ArrayModel> {
    build_enhanced_model_with_estimates(set, frequency_hz, threshold_db).map(|(m, _)| m)
}

pub fn build_enhanced_model_with_estimates(
    set: &PatternSet,
    frequency_hz: f64,
    threshold_db: f64,
) -> Result<(ArrayModel, BTreeMap<u32, PhaseCenterEstimate>)> {
    let estimates = estimate_phase_centers(set, threshold_db)?;
    let centers = estimates.iter().map(|(&id, e)| (id, e.d_hat)).collect();
    let model = build_model(set, frequency_hz, Mode::Enhanced, &centers, 1.0)?;
    Ok((model, estimates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AngularGrid;

    fn pattern(grid: AngularGrid, f: impl Fn(f64, f64) -> Complex64) -> RadiationPattern {
        let data = Array2::from_shape_fn(grid.shape(), |(r, c)| f(grid.zenith(r), grid.azimuth(c)));
        RadiationPattern::new(grid, 28.5e9, Polarization::V, 0, data).unwrap()
    }

    #[test]
    fn constant_magnitude_is_fully_covered() {
        let g = AngularGrid::new(6, 6).unwrap();
        let p = pattern(g, |t, ph| Complex64::cis(t + 3.0 * ph));
        assert!(main_coverage_mask(&p, 13.0).unwrap().iter().all(|&m| m));
    }

    #[test]
    fn single_strong_entry() {
        let g = AngularGrid::new(6, 6).unwrap();
        let mut p = pattern(g, |_, _| Complex64::new(1e-3, 0.0));
        p.data[[2, 3]] = Complex64::new(1.0, 0.0);
        let mask = main_coverage_mask(&p, 13.0).unwrap();
        assert_eq!(mask.iter().filter(|&&m| m).count(), 1);
        assert!(mask[[2, 3]]);
    }

    #[test]
    fn zero_pattern_is_all_masked() {
        let g = AngularGrid::new(4, 4).unwrap();
        let p = pattern(g, |_, _| Complex64::new(0.0, 0.0));
        assert!(matches!(main_coverage_mask(&p, 13.0), Err(Error::AllMasked)));
    }

    #[test]
    fn compensation_cancels_an_exact_offset() {
        let g = AngularGrid::new(30, 30).unwrap();
        let lambda = wavelength(28.5e9);
        let d = Vec3::new(0.01, -0.3, 0.2);
        let p = pattern(g, |t, ph| Complex64::cis(TAU / lambda * unit_vector_at(t, ph).dot(&d)));
        let out = compensate(&p, d, lambda);
        assert!(out.data.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        assert_eq!(compensate(&p, Vec3::ZERO, lambda), p);
    }

    #[test]
    fn enhanced_model_needs_centers() {
        let g = AngularGrid::new(4, 4).unwrap();
        let p = pattern(g, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(
            build_element_model(&[&p], None, Mode::Enhanced, 1.0),
            Err(Error::ModeMismatch(_))
        ));
        let conv = build_element_model(&[&p], None, Mode::Conventional, 1.0).unwrap();
        let enh = build_element_model(&[&p], Some(Vec3::ZERO), Mode::Enhanced, 1.0).unwrap();
        assert_eq!(conv.v, enh.v);
        assert!(conv.h.is_none());
    }
}
