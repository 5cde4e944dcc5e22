//! Relative error magnitude (REM), its CDF, and EADF power spectra.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eadf::{ArrayModel, Eadf};
use crate::error::{Error, Result};
use crate::geometry::AngularGrid;
use crate::pattern::{Polarization, RadiationPattern};
use crate::phase_center::main_coverage_mask;

/// Floor applied to every dB value, so zero power stays finite.
pub const DB_FLOOR: f64 = -300.0;
pub const CDF_MIN_DB: f64 = -120.0;
pub const CDF_MAX_DB: f64 = 20.0;
pub const CDF_STEP_DB: f64 = 0.5;

/// `|truth - estimate| / |truth|`.
pub fn rem(truth: Complex64, estimate: Complex64) -> Result<f64> {
    let t = truth.norm();
    if t == 0.0 {
        return Err(Error::UndefinedAtZero);
    }
    Ok((truth - estimate).norm() / t)
}

/// Amplitude ratio in dB, `20·log10(x)`, floored.
pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (20.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Empirical distribution of REM values in dB.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cdf {
    sorted_db: Vec<f64>,
}

impl Cdf {
    pub fn from_db(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Cdf { sorted_db: values }
    }

    /// Merges several distributions, as when pooling elements.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Cdf>) -> Self {
        Cdf::from_db(parts.into_iter().flat_map(|c| c.sorted_db.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.sorted_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_db.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted_db
    }

    /// Lower-midpoint median; NaN when empty.
    pub fn median(&self) -> f64 {
        self.percentile(50.0)
    }

    /// Lower nearest-rank percentile, `p` in `[0, 100]`.
    pub fn percentile(&self, p: f64) -> f64 {
        let n = self.sorted_db.len();
        if n == 0 {
            return f64::NAN;
        }
        let idx = ((p / 100.0).clamp(0.0, 1.0) * (n - 1) as f64).floor() as usize;
        self.sorted_db[idx]
    }

    /// `(edge, P(ε_dB ≤ edge))` at 0.5 dB steps over [-120, 20] dB. Values
    /// above the last edge are counted in it, so the curve ends at 1.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted_db.len();
        let edges = ((CDF_MAX_DB - CDF_MIN_DB) / CDF_STEP_DB).round() as usize;
        (0..=edges)
            .map(|i| {
                let edge = CDF_MIN_DB + i as f64 * CDF_STEP_DB;
                let p = if n == 0 {
                    0.0
                } else if i == edges {
                    1.0
                } else {
                    self.sorted_db.partition_point(|&v| v <= edge) as f64 / n as f64
                };
                (edge, p)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemOptions {
    /// Also score directions that were part of the model's build grid.
    pub include_build_points: bool,
    /// Main-coverage threshold of the truth pattern; `None` scores every
    /// direction.
    pub threshold_db: Option<f64>,
}

impl Default for RemOptions {
    fn default() -> Self {
        RemOptions {
            include_build_points: false,
            threshold_db: Some(crate::phase_center::DEFAULT_THRESHOLD_DB),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemReport {
    pub element_id: u32,
    pub polarization: Polarization,
    pub frequency_hz: f64,
    pub grid: AngularGrid,
    /// Linear REM per direction; NaN where the truth is zero.
    pub rem: Array2<f64>,
    pub mask: Array2<bool>,
    pub cdf: Cdf,
    pub median_db: f64,
}

/// Subsampling factors that take `truth` onto `build`.
pub fn grid_factors(truth: &AngularGrid, build: &AngularGrid) -> Result<(usize, usize)> {
    if !truth.m().is_multiple_of(build.m()) || !truth.n().is_multiple_of(build.n()) {
        return Err(Error::InvalidGrid(format!(
            "model grid M={}, N={} is not a subsampling of the truth grid M={}, N={}",
            build.m(),
            build.n(),
            truth.m(),
            truth.n()
        )));
    }
    Ok((truth.m() / build.m(), truth.n() / build.n()))
}

/// REM of `model` against every direction of `truth`.
pub fn rem_map(truth: &RadiationPattern, model: &ArrayModel, options: &RemOptions) -> Result<RemReport> {
    let index = model
        .element_index(truth.element_id)
        .ok_or_else(|| Error::Missing(format!("element {} not in model", truth.element_id)))?;
    if (model.frequency_hz - truth.frequency_hz).abs() > 1.0 {
        return Err(Error::InvalidInput(format!(
            "model is at {} Hz, truth at {} Hz",
            model.frequency_hz, truth.frequency_hz
        )));
    }
    let grid = truth.grid;
    let build = model
        .grid()
        .ok_or_else(|| Error::Missing("model has no elements".to_string()))?;
    let (zf, af) = grid_factors(&grid, &build)?;

    let estimate = model.element_response_grid(index, truth.polarization, &grid.zeniths(), &grid.azimuths())?;
    let coverage = match options.threshold_db {
        Some(t) => main_coverage_mask(truth, t)?,
        None => Array2::from_elem(grid.shape(), true),
    };

    let mut rem_values = Array2::from_elem(grid.shape(), f64::NAN);
    let mut mask = Array2::from_elem(grid.shape(), false);
    let mut db = Vec::new();
    for ((r, c), t) in truth.data.indexed_iter() {
        let Ok(e) = rem(*t, estimate[[r, c]]) else {
            continue;
        };
        rem_values[[r, c]] = e;
        let on_build = r % zf == 0 && c % af == 0;
        if coverage[[r, c]] && (options.include_build_points || !on_build) {
            mask[[r, c]] = true;
            db.push(to_db(e));
        }
    }
    if db.is_empty() {
        return Err(Error::InvalidInput("no directions left to evaluate".to_string()));
    }
    let cdf = Cdf::from_db(db);
    Ok(RemReport {
        element_id: truth.element_id,
        polarization: truth.polarization,
        frequency_hz: truth.frequency_hz,
        grid,
        rem: rem_values,
        mask,
        median_db: cdf.median(),
        cdf,
    })
}

/// `10·log10(|Q|²/max|Q|²)` over the stored window, floored.
pub fn eadf_power_spectrum(q: &Eadf) -> Array2<f64> {
    let peak = q.data.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    q.data.mapv(|v| {
        if peak == 0.0 || v.norm_sqr() == 0.0 {
            DB_FLOOR
        } else {
            (10.0 * (v.norm_sqr() / peak).log10()).max(DB_FLOOR)
        }
    })
}

/// Share of EADF power with `|k| ≤ half_k` and `|l| ≤ half_l`.
pub fn central_power_fraction(q: &Eadf, half_k: i64, half_l: i64) -> f64 {
    let total = q.power();
    if total == 0.0 {
        return 0.0;
    }
    let mut inner = 0.0;
    for ((i, j), v) in q.data.indexed_iter() {
        let k = q.window.k_min + i as i64;
        let l = q.window.l_min + j as i64;
        if k.abs() <= half_k && l.abs() <= half_l {
            inner += v.norm_sqr();
        }
    }
    inner / total
}

/// Power share of the central window of half the width on both axes.
pub fn quarter_window_power_fraction(q: &Eadf) -> f64 {
    central_power_fraction(q, q.grid.m() as i64 / 2, q.grid.n() as i64 / 2)
}

/// Fraction of zenith frequencies `k` whose strongest coefficient lies
/// within `within_db` of the spectrum peak.
pub fn zenith_occupancy(q: &Eadf, within_db: f64) -> f64 {
    let spectrum = eadf_power_spectrum(q);
    let rows = spectrum.nrows();
    let strong = spectrum
        .rows()
        .into_iter()
        .filter(|row| row.iter().any(|&v| v >= -within_db))
        .count();
    strong as f64 / rows as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eadf::SpectralWindow;

    #[test]
    fn rem_basics() {
        let t = Complex64::new(0.3, -2.0);
        assert_eq!(rem(t, t).unwrap(), 0.0);
        assert_eq!(rem(t, Complex64::new(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(to_db(1.0), 0.0);
        assert_eq!(to_db(0.0), DB_FLOOR);
        assert!(matches!(
            rem(Complex64::new(0.0, 0.0), t),
            Err(Error::UndefinedAtZero)
        ));
        // the main-coverage level reported for real measurements
        let e = 10f64.powf(-25.0 / 20.0);
        assert!((to_db(rem(Complex64::new(1.0, 0.0), Complex64::new(1.0 + e, 0.0)).unwrap()) + 25.0).abs() < 1e-12);
    }

    #[test]
    fn rem_is_scale_covariant() {
        let t = Complex64::new(1.5, 0.25);
        let e = Complex64::new(1.4, 0.3);
        let c = Complex64::new(-2.0, 7.0);
        assert!((rem(c * t, c * e).unwrap() - rem(t, e).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn lower_midpoint_median_and_points() {
        let cdf = Cdf::from_db(vec![-10.0, -30.0, -20.0, -40.0]);
        assert_eq!(cdf.median(), -30.0);
        let pts = cdf.points();
        assert_eq!(pts.len(), 281);
        assert_eq!(pts[0], (-120.0, 0.0));
        assert_eq!(pts.last().unwrap().1, 1.0);
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1));
        let at = |edge: f64| pts.iter().find(|p| p.0 == edge).unwrap().1;
        assert_eq!(at(-30.0), 0.5);
        assert_eq!(at(-29.5), 0.5);
        // values above the last edge land in it
        let hot = Cdf::from_db(vec![35.0]);
        assert_eq!(hot.points()[279].1, 0.0);
        assert_eq!(hot.points()[280].1, 1.0);
    }

    #[test]
    fn dc_spectrum_is_floored_elsewhere() {
        let g = AngularGrid::new(3, 3).unwrap();
        let mut data = Array2::zeros(g.extended_shape());
        data[[3, 3]] = Complex64::new(2.0, 0.0);
        let q = Eadf::new(g, SpectralWindow::full(&g), data).unwrap();
        let s = eadf_power_spectrum(&q);
        assert_eq!(s[[3, 3]], 0.0);
        assert_eq!(s.iter().filter(|&&v| v == DB_FLOOR).count(), 35);
        assert_eq!(quarter_window_power_fraction(&q), 1.0);
        assert!((zenith_occupancy(&q, 30.0) - 1.0 / 6.0).abs() < 1e-15);
    }
}
