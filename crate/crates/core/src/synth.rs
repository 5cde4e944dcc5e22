//! Synthetic anechoic chamber with known ground truth.
//!
//! Element responses follow `a(f, θ, φ) = a₀(θ, φ)·exp(j2π uᵀd/λ)·exp(-j2πfΔτ)`
//! with a frequency-independent `a₀`, plus optional circular Gaussian noise.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eadf::{reconstruct_at, reconstruct_grid, Eadf, SpectralWindow};
use crate::error::{Error, Result};
use crate::geometry::{unit_vector_at, wavelength, AngularGrid, Direction, Vec3, SPEED_OF_LIGHT};
use crate::pattern::{PatternSet, Polarization, RadiationPattern};

/// Back-lobe level of the patch model relative to its peak.
pub const PATCH_BACK_LOBE_DB: f64 = -30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PatternModel {
    /// Unit response in every direction.
    Omni,
    /// `cos^q Δ` on the front hemisphere and a `-30 dB·cos²Δ` back lobe,
    /// `Δ` being the angle from boresight.
    Patch {
        order: f64,
        boresight_theta_deg: f64,
        boresight_phi_deg: f64,
    },
    /// Seeded random Fourier series with `|k| ≤ k_theta`, `|l| ≤ k_phi`.
    #[serde(rename = "bandlimited")]
    BandLimited { k_theta: usize, k_phi: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub id: u32,
    /// True phase center in meters.
    #[serde(with = "vec3_array")]
    pub position: Vec3,
    pub pattern: PatternModel,
    /// Fixed delay offset in seconds.
    #[serde(default)]
    pub delta_tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberSpec {
    pub elements: Vec<ElementSpec>,
    pub grid: AngularGrid,
    /// Accepts either an explicit list or `{ start_hz, stop_hz, count }`.
    #[serde(deserialize_with = "frequency_plan")]
    pub frequencies: Vec<f64>,
    /// `None` gives a noiseless set.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_polarizations")]
    pub polarizations: Vec<Polarization>,
}

fn default_polarizations() -> Vec<Polarization> {
    vec![Polarization::V]
}

mod vec3_array {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec3, D::Error> {
        <[f64; 3]>::deserialize(d).map(Vec3::from)
    }
}

fn frequency_plan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Plan {
        List(Vec<f64>),
        Linear { start_hz: f64, stop_hz: f64, count: usize },
    }
    Ok(match Plan::deserialize(d)? {
        Plan::List(v) => v,
        Plan::Linear {
            start_hz,
            stop_hz,
            count,
        } => linspace(start_hz, stop_hz, count),
    })
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl ChamberSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks frequency spacing, id uniqueness, band limits and that every
    /// true delay stays inside the unambiguous delay range.
    pub fn check(&self) -> Result<()> {
        let f = &self.frequencies;
        if f.is_empty() || f.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidInput("frequencies must be positive".to_string()));
        }
        if f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("frequencies must be strictly increasing".to_string()));
        }
        let spacing = if f.len() > 1 {
            let df = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
            if f.windows(2).any(|w| ((w[1] - w[0]) - df).abs() > 1e-6 * df) {
                return Err(Error::InvalidInput("frequencies must be uniformly spaced".to_string()));
            }
            Some(df)
        } else {
            None
        };
        if self.polarizations.is_empty() {
            return Err(Error::InvalidInput("no polarizations requested".to_string()));
        }
        let mut ids: Vec<u32> = self.elements.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate element ids".to_string()));
        }
        for e in &self.elements {
            check_band_limit(&e.pattern, &self.grid)?;
            if !e.position.is_finite() || !e.delta_tau.is_finite() {
                return Err(Error::InvalidInput(format!("element {} is not finite", e.id)));
            }
            if let Some(df) = spacing {
                let worst = e.delta_tau.abs() + e.position.norm() / SPEED_OF_LIGHT;
                if worst >= 0.5 / df {
                    return Err(Error::InvalidInput(format!(
                        "element {}: delays up to {worst:.3e} s exceed the unambiguous range ±{:.3e} s",
                        e.id,
                        0.5 / df
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_band_limit(model: &PatternModel, grid: &AngularGrid) -> Result<()> {
    if let PatternModel::BandLimited { k_theta, k_phi, .. } = *model {
        if k_theta >= grid.m() || k_phi >= grid.n() {
            return Err(Error::BandLimitViolation {
                k_theta,
                k_phi,
                m: grid.m(),
                n: grid.n(),
            });
        }
    }
    Ok(())
}

/// Spectrum of a band-limited element; H and V draw distinct series.
///
/// Coefficients satisfy `c[k, l] = (-1)^l c[-k, l]`, which makes the series
/// obey `a(-θ, φ+π) = a(θ, φ)`; its sphere extension is then band-limited
/// too.
fn bandlimited_spectrum(k_theta: usize, k_phi: usize, seed: u64, polarization: Polarization) -> Eadf {
    let grid = AngularGrid::new(k_theta.max(1) + 1, k_phi.max(1) + 1)
        .expect("grid sizes are at least 2");
    let window = SpectralWindow::centered(&grid, k_theta, k_phi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(polarization.index() as u64);
    let (rows, cols) = (window.rows(), window.cols());
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let g = Array2::from_shape_fn((rows, cols), |_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * scale
    });
    let kt = k_theta as i64;
    let data = Array2::from_shape_fn((rows, cols), |(i, j)| {
        let k = i as i64 - kt;
        let l = j as i64 + window.l_min;
        let mirror = g[[(-k + kt) as usize, j]];
        let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (g[[i, j]] + mirror * sign) * 0.5
    });
    Eadf::new(grid, window, data).expect("window fits the helper grid")
}

fn patch_value(order: f64, boresight: Vec3, theta: f64, phi: f64) -> Complex64 {
    let cos_delta = unit_vector_at(theta, phi).dot(&boresight).clamp(-1.0, 1.0);
    let back = 10f64.powf(PATCH_BACK_LOBE_DB / 20.0);
    let v = if cos_delta > 0.0 {
        cos_delta.powf(order)
    } else {
        back * cos_delta * cos_delta
    };
    Complex64::new(v, 0.0)
}

fn patch_boresight(theta_deg: f64, phi_deg: f64) -> Vec3 {
    unit_vector_at(theta_deg.to_radians(), phi_deg.to_radians())
}

/// `a₀` of one element at an arbitrary direction.
pub fn evaluate_a0(spec: &ElementSpec, polarization: Polarization, dir: Direction) -> Complex64 {
    match spec.pattern {
        PatternModel::Omni => Complex64::new(1.0, 0.0),
        PatternModel::Patch {
            order,
            boresight_theta_deg,
            boresight_phi_deg,
        } => patch_value(
            order,
            patch_boresight(boresight_theta_deg, boresight_phi_deg),
            dir.theta,
            dir.phi,
        ),
        PatternModel::BandLimited { k_theta, k_phi, seed } => {
            reconstruct_at(&bandlimited_spectrum(k_theta, k_phi, seed, polarization), dir.theta, dir.phi)
        }
    }
}

/// Noiseless response `a₀·exp(j2π uᵀd/λ)·exp(-j2πfΔτ)` at any direction.
pub fn ground_truth(
    spec: &ElementSpec,
    polarization: Polarization,
    frequency_hz: f64,
    dir: Direction,
) -> Complex64 {
    let u = unit_vector_at(dir.theta, dir.phi);
    let phase = TAU / wavelength(frequency_hz) * u.dot(&spec.position) - TAU * frequency_hz * spec.delta_tau;
    evaluate_a0(spec, polarization, dir) * Complex64::cis(phase)
}

fn a0_grid(spec: &ElementSpec, polarization: Polarization, grid: &AngularGrid) -> Result<Array2<Complex64>> {
    check_band_limit(&spec.pattern, grid)?;
    Ok(match spec.pattern {
        PatternModel::Omni => Array2::from_elem(grid.shape(), Complex64::new(1.0, 0.0)),
        PatternModel::Patch {
            order,
            boresight_theta_deg,
            boresight_phi_deg,
        } => {
            let b = patch_boresight(boresight_theta_deg, boresight_phi_deg);
            Array2::from_shape_fn(grid.shape(), |(r, c)| {
                patch_value(order, b, grid.zenith(r), grid.azimuth(c))
            })
        }
        PatternModel::BandLimited { k_theta, k_phi, seed } => reconstruct_grid(
            &bandlimited_spectrum(k_theta, k_phi, seed, polarization),
            &grid.zeniths(),
            &grid.azimuths(),
        ),
    })
}

/// `a₀` sampled on `grid`, tagged with `frequency_hz` and polarization V.
pub fn sample_a0(spec: &ElementSpec, grid: &AngularGrid, frequency_hz: f64) -> Result<RadiationPattern> {
    sample_a0_pol(spec, Polarization::V, grid, frequency_hz)
}

pub fn sample_a0_pol(
    spec: &ElementSpec,
    polarization: Polarization,
    grid: &AngularGrid,
    frequency_hz: f64,
) -> Result<RadiationPattern> {
    let data = a0_grid(spec, polarization, grid)?;
    RadiationPattern::new(*grid, frequency_hz, polarization, spec.id, data)
}

/// `a[r, c] = a₀[r, c]·exp(+j2π uᵀd/λ)`.
pub fn apply_offset(a0: &RadiationPattern, d: Vec3, wavelength_m: f64) -> RadiationPattern {
    let grid = a0.grid;
    let k = TAU / wavelength_m;
    let mut out = a0.clone();
    for ((r, c), v) in out.data.indexed_iter_mut() {
        *v *= Complex64::cis(k * unit_vector_at(grid.zenith(r), grid.azimuth(c)).dot(&d));
    }
    out
}

/// Noise stream of one pattern; independent of generation order.
fn noise_rng(chamber: &ChamberSpec, element_index: usize, pol_index: usize, freq_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(chamber.rng_seed);
    let npol = chamber.polarizations.len();
    let s = chamber.frequencies.len();
    rng.set_stream(((element_index * npol + pol_index) * s + freq_index) as u64);
    rng
}

/// All patterns of element `element_index`, ordered polarization-major then
/// by frequency.
pub fn simulate_element(chamber: &ChamberSpec, element_index: usize) -> Result<Vec<RadiationPattern>> {
    let spec = chamber
        .elements
        .get(element_index)
        .ok_or_else(|| Error::InvalidInput(format!("no element at index {element_index}")))?;
    let grid = chamber.grid;
    // uᵀd per grid cell, shared by all frequencies
    let path = Array2::from_shape_fn(grid.shape(), |(r, c)| {
        unit_vector_at(grid.zenith(r), grid.azimuth(c)).dot(&spec.position)
    });
    let mut out = Vec::with_capacity(chamber.polarizations.len() * chamber.frequencies.len());
    for (pi, &pol) in chamber.polarizations.iter().enumerate() {
        let a0 = a0_grid(spec, pol, &grid)?;
        let peak_power = a0.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let sigma = chamber
            .snr_db
            .map(|snr| (peak_power / 10f64.powf(snr / 10.0) / 2.0).sqrt());
        for (si, &f) in chamber.frequencies.iter().enumerate() {
            let k = TAU / wavelength(f);
            let delay = -TAU * f * spec.delta_tau;
            let mut data = Array2::from_shape_fn(grid.shape(), |(r, c)| {
                a0[[r, c]] * Complex64::cis(k * path[[r, c]] + delay)
            });
            if let Some(sigma) = sigma {
                let mut rng = noise_rng(chamber, element_index, pi, si);
                for v in data.iter_mut() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *v += Complex64::new(re, im) * sigma;
                }
            }
            out.push(RadiationPattern::new(grid, f, pol, spec.id, data)?);
        }
    }
    Ok(out)
}

/// Full measurement set. Memory grows with elements × polarizations ×
/// frequencies × grid size; large scenarios should go through
/// [`simulate_element`] one element at a time.
pub fn simulate(chamber: &ChamberSpec) -> Result<PatternSet> {
    chamber.check()?;
    let mut patterns = Vec::new();
    for i in 0..chamber.elements.len() {
        patterns.extend(simulate_element(chamber, i)?);
    }
    Ok(PatternSet::new(chamber.grid, chamber.frequencies.clone(), patterns))
}
