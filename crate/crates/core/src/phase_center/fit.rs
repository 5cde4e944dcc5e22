use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::delay::DelayEstimator;
use super::main_coverage_mask;
use crate::error::{Error, Result};
use crate::geometry::{unit_vector_at, AngularGrid, Vec3, SPEED_OF_LIGHT};
use crate::pattern::{PatternSet, Polarization, RadiationPattern};

/// Largest design-matrix condition number accepted by [`fit_phase_center`].
pub const MAX_CONDITION: f64 = 1e8;

/// Per-direction delay estimates of one element and polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMap {
    pub grid: AngularGrid,
    /// Seconds; NaN where `mask` is false.
    pub delays: Array2<f64>,
    pub mask: Array2<bool>,
    /// Cells dropped because estimation failed, one line each.
    pub diagnostics: Vec<String>,
}

impl DelayMap {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCenterEstimate {
    /// Meters.
    pub d_hat: Vec3,
    /// Seconds.
    pub delta_tau_hat: f64,
    /// Seconds.
    pub rms_residual: f64,
    pub n_directions_used: usize,
    /// Of the design matrix with rows `[u_x, u_y, u_z, -1]`.
    pub condition_number: f64,
}

/// Delay map from the sweep of one element and polarization. `sweep[s]` must
/// be measured at `frequencies_hz[s]`; the mask comes from the center entry.
pub fn delay_map_from_sweep(
    sweep: &[&RadiationPattern],
    frequencies_hz: &[f64],
    threshold_db: f64,
) -> Result<DelayMap> {
    let estimator = DelayEstimator::new(frequencies_hz)?;
    if sweep.len() != frequencies_hz.len() {
        return Err(Error::InvalidInput(format!(
            "sweep has {} patterns for {} frequencies",
            sweep.len(),
            frequencies_hz.len()
        )));
    }
    let grid = sweep[0].grid;
    if let Some(p) = sweep.iter().find(|p| p.grid != grid) {
        return Err(Error::InvalidGrid(format!(
            "element {} at {} Hz is on a different grid",
            p.element_id, p.frequency_hz
        )));
    }
    let center = sweep[(sweep.len() - 1) / 2];
    let coverage = main_coverage_mask(center, threshold_db)?;

    let cells: Vec<(usize, usize)> = coverage
        .indexed_iter()
        .filter(|(_, &m)| m)
        .map(|(rc, _)| rc)
        .collect();
    let results: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(r, c)| {
            let responses: Vec<_> = sweep.iter().map(|p| p.data[[r, c]]).collect();
            estimator.estimate(&responses)
        })
        .collect();

    let mut delays = Array2::from_elem(grid.shape(), f64::NAN);
    let mut mask = Array2::from_elem(grid.shape(), false);
    let mut diagnostics = Vec::new();
    for (&(r, c), res) in cells.iter().zip(results) {
        match res {
            Ok(tau) => {
                delays[[r, c]] = tau;
                mask[[r, c]] = true;
            }
            Err(e) => diagnostics.push(format!("row {r} col {c}: {e}")),
        }
    }
    Ok(DelayMap {
        grid,
        delays,
        mask,
        diagnostics,
    })
}

pub fn build_delay_map(
    set: &PatternSet,
    element_id: u32,
    polarization: Polarization,
    threshold_db: f64,
) -> Result<DelayMap> {
    let sweep = set.sweep(element_id, polarization)?;
    delay_map_from_sweep(&sweep, &set.frequencies_hz, threshold_db)
}

/// Least-squares phase center from a delay map, under the delay model
/// `τ̂ = Δτ - uᵀd/c`.
///
/// Solved by SVD in distance units: rows `[u_x, u_y, u_z, -1]`, unknowns
/// `(d, cΔτ)`, right-hand side `-cτ̂`.
pub fn fit_phase_center(map: &DelayMap) -> Result<PhaseCenterEstimate> {
    let (rows, target) = design(map);
    let n = target.len();
    if n < 4 {
        return Err(Error::RankDeficient {
            rank: n.min(4),
            condition: f64::INFINITY,
        });
    }
    let a = DMatrix::from_row_slice(n, 4, &rows);
    let b = DVector::from_vec(target);
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > s_max * f64::EPSILON * n as f64)
        .count();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if rank < 4 || condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::RankDeficient { rank, condition });
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let residual = &a * &x - &b;
    let rms = (residual.norm_squared() / n as f64).sqrt() / SPEED_OF_LIGHT;
    Ok(PhaseCenterEstimate {
        d_hat: Vec3::new(x[0], x[1], x[2]),
        delta_tau_hat: x[3] / SPEED_OF_LIGHT,
        rms_residual: rms,
        n_directions_used: n,
        condition_number: condition,
    })
}

/// Design rows (flattened, four per direction) and right-hand side of the fit.
pub(crate) fn design(map: &DelayMap) -> (Vec<f64>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for ((r, c), &m) in map.mask.indexed_iter() {
        if !m {
            continue;
        }
        let u = unit_vector_at(map.grid.zenith(r), map.grid.azimuth(c));
        rows.extend_from_slice(&[u.x, u.y, u.z, -1.0]);
        target.push(-SPEED_OF_LIGHT * map.delays[[r, c]]);
    }
    (rows, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(grid: AngularGrid, d: Vec3, dtau: f64, mask: impl Fn(usize, usize) -> bool) -> DelayMap {
        let mut delays = Array2::from_elem(grid.shape(), f64::NAN);
        let mut m = Array2::from_elem(grid.shape(), false);
        for r in 0..=grid.m() {
            for c in 0..2 * grid.n() {
                if mask(r, c) {
                    let u = unit_vector_at(grid.zenith(r), grid.azimuth(c));
                    delays[[r, c]] = dtau - u.dot(&d) / SPEED_OF_LIGHT;
                    m[[r, c]] = true;
                }
            }
        }
        DelayMap {
            grid,
            delays,
            mask: m,
            diagnostics: vec![],
        }
    }

    #[test]
    fn zero_delays_give_zero_center() {
        let g = AngularGrid::new(12, 12).unwrap();
        let est = fit_phase_center(&map_from(g, Vec3::ZERO, 0.0, |_, _| true)).unwrap();
        assert_eq!(est.d_hat.norm(), 0.0);
        assert_eq!(est.delta_tau_hat, 0.0);
        assert_eq!(est.rms_residual, 0.0);
        assert_eq!(est.n_directions_used, 13 * 24);
    }

    #[test]
    fn exact_recovery_on_a_lobe() {
        let g = AngularGrid::new(120, 120).unwrap();
        let d = Vec3::new(0.01, -0.02, 0.2);
        // boresight lobe around +x
        let map = map_from(g, d, 5e-9, |r, c| {
            unit_vector_at(g.zenith(r), g.azimuth(c)).x > 0.5
        });
        let est = fit_phase_center(&map).unwrap();
        assert!((est.d_hat - d).norm() <= 1e-12 * d.norm(), "{:?}", est.d_hat);
        assert!((est.delta_tau_hat - 5e-9).abs() < 1e-20);
        // a one-sided lobe correlates u_x with the constant column
        assert!(est.condition_number < 100.0, "{}", est.condition_number);
    }

    #[test]
    fn too_few_or_collinear_directions() {
        let g = AngularGrid::new(12, 12).unwrap();
        let three = map_from(g, Vec3::ZERO, 0.0, |r, c| r == 6 && c < 3);
        assert!(matches!(fit_phase_center(&three), Err(Error::RankDeficient { .. })));
        // one zenith ring at the equator: u_z is identically zero
        let ring = map_from(g, Vec3::ZERO, 0.0, |r, _| r == 6);
        assert!(matches!(fit_phase_center(&ring), Err(Error::RankDeficient { .. })));
    }
}
