//! Fixtures shared by the benchmarks.

use eadf_core::synth::{linspace, ChamberSpec, ElementSpec, PatternModel};
use eadf_core::{AngularGrid, Polarization, Vec3};

/// One patch element of the 28.5 GHz scenario on an `m × m` grid with
/// `s` frequencies, noiseless unless `snr_db` is given.
pub fn patch_chamber(m: usize, s: usize, snr_db: Option<f64>) -> ChamberSpec {
    ChamberSpec {
        elements: vec![ElementSpec {
            id: 0,
            position: Vec3::new(0.0, 0.003, 0.2),
            pattern: PatternModel::Patch {
                order: 2.0,
                boresight_theta_deg: 90.0,
                boresight_phi_deg: 0.0,
            },
            delta_tau: 5e-9,
        }],
        grid: AngularGrid::new(m, m).expect("grid of at least 2"),
        frequencies: linspace(27e9, 30e9, s),
        snr_db,
        rng_seed: 7,
        polarizations: vec![Polarization::V],
    }
}
