//! Effective aperture distribution function (EADF) characterization of
//! antenna arrays.
//!
//! The crate covers the full chain from chamber measurements to an analytic
//! array model:
//!
//! - [`pattern`]: measured patterns on a zenith/azimuth grid, full-sphere
//!   extension and grid subsampling.
//! - [`eadf`]: the 2D spatial-frequency transform, reconstruction at arbitrary
//!   directions, truncation, polarimetric array responses and Nyquist budgets.
//! - [`phase_center`]: wideband delay estimation, least-squares phase-center
//!   fitting and phase compensation (the enhanced EADF).
//! - [`synth`]: a synthetic anechoic chamber with known ground truth.
//! - [`metrics`]: relative error magnitude maps, CDFs and EADF spectra.
//! - [`container`]: the on-disk pattern/model container and CSV/JSON exports.

pub mod container;
pub mod eadf;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pattern;
pub mod phase_center;
pub mod synth;

pub use num_complex::Complex64;

pub use crate::eadf::{
    array_response, forward, max_spatial_freq, reconstruct, truncate, ArrayModel, Eadf,
    ElementModel, Mode, SpatialFreqBudget, SpectralWindow,
};
pub use crate::error::{Error, Result};
pub use crate::geometry::{
    grid_directions, unit_vector, wavelength, AngularGrid, Direction, Vec3, SPEED_OF_LIGHT,
};
pub use crate::metrics::{eadf_power_spectrum, rem, rem_map, Cdf, RemOptions, RemReport};
pub use crate::pattern::{
    extend, subsample, validate, Diagnostic, ExtendedPattern, PatternSet, Polarization,
    RadiationPattern,
};
pub use crate::phase_center::{
    build_delay_map, build_enhanced_model, compensate, estimate_delay, fit_phase_center,
    main_coverage_mask, DelayEstimator, DelayMap, PhaseCenterEstimate,
};
pub use crate::synth::{apply_offset, sample_a0, simulate, ChamberSpec, ElementSpec, PatternModel};
