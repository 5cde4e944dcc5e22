use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Largest local spatial frequencies (cycles per radian) a phase-center
/// offset can produce over the sphere, and the matching Nyquist angle steps.
///
/// A step of `None` means unbounded (zero spatial frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialFreqBudget {
    pub f_theta_max: f64,
    pub f_phi_max: f64,
    pub max_zenith_step: Option<f64>,
    pub max_azimuth_step: Option<f64>,
}

impl SpatialFreqBudget {
    pub fn from_frequencies(f_theta_max: f64, f_phi_max: f64) -> Self {
        let step = |f: f64| (f > 0.0).then(|| 1.0 / (2.0 * f));
        SpatialFreqBudget {
            f_theta_max,
            f_phi_max,
            max_zenith_step: step(f_theta_max),
            max_azimuth_step: step(f_phi_max),
        }
    }

    /// The array budget is set by the element with the highest frequencies,
    /// taken per axis.
    pub fn array_max<'a>(budgets: impl IntoIterator<Item = &'a SpatialFreqBudget>) -> Self {
        let (ft, fp) = budgets
            .into_iter()
            .fold((0.0_f64, 0.0_f64), |(ft, fp), b| {
                (ft.max(b.f_theta_max), fp.max(b.f_phi_max))
            });
        SpatialFreqBudget::from_frequencies(ft, fp)
    }
}

/// Zenith frequency is bounded by `|d|/λ`, azimuth frequency by the
/// horizontal part `√(x² + y²)/λ`.
pub fn max_spatial_freq(d: Vec3, wavelength: f64) -> SpatialFreqBudget {
    assert!(wavelength > 0.0, "wavelength must be positive");
    let horizontal = d.x.hypot(d.y);
    SpatialFreqBudget::from_frequencies(d.norm() / wavelength, horizontal / wavelength)
}
