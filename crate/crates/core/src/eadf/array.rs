use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::transform::{reconstruct_at, reconstruct_grid, Eadf};
use crate::error::{Error, Result};
use crate::geometry::{unit_vector_at, wavelength, AngularGrid, Direction, Vec3};
use crate::pattern::Polarization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// EADFs of the raw measured patterns.
    Conventional,
    /// EADFs of phase-compensated patterns; the offset phase is re-applied
    /// analytically at evaluation time.
    Enhanced,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" => Ok(Mode::Conventional),
            "enhanced" => Ok(Mode::Enhanced),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Conventional => "conventional",
            Mode::Enhanced => "enhanced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementModel {
    pub element_id: u32,
    pub h: Option<Eadf>,
    pub v: Option<Eadf>,
    /// Estimated phase center in meters; required in enhanced mode.
    pub phase_center: Option<Vec3>,
}

impl ElementModel {
    pub fn eadf(&self, polarization: Polarization) -> Option<&Eadf> {
        match polarization {
            Polarization::H => self.h.as_ref(),
            Polarization::V => self.v.as_ref(),
        }
    }

    fn any_eadf(&self) -> Option<&Eadf> {
        self.h.as_ref().or(self.v.as_ref())
    }
}

/// Polarimetric model of a whole array at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayModel {
    pub frequency_hz: f64,
    pub mode: Mode,
    pub elements: Vec<ElementModel>,
}

impl ArrayModel {
    /// Requires at least one EADF per element, all on one grid.
    pub fn new(frequency_hz: f64, mode: Mode, elements: Vec<ElementModel>) -> Result<Self> {
        if frequency_hz.is_nan() || frequency_hz <= 0.0 {
            return Err(Error::InvalidInput(format!("frequency must be positive, got {frequency_hz}")));
        }
        let mut grid: Option<AngularGrid> = None;
        for e in &elements {
            if e.any_eadf().is_none() {
                return Err(Error::InvalidInput(format!("element {} has no EADF", e.element_id)));
            }
            for q in [e.h.as_ref(), e.v.as_ref()].into_iter().flatten() {
                match grid {
                    None => grid = Some(q.grid),
                    Some(g) if g != q.grid => {
                        return Err(Error::InvalidInput(format!(
                            "element {} is on a different grid than the rest of the array",
                            e.element_id
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(ArrayModel {
            frequency_hz,
            mode,
            elements,
        })
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency_hz)
    }

    pub fn grid(&self) -> Option<AngularGrid> {
        self.elements.first().and_then(|e| e.any_eadf()).map(|q| q.grid)
    }

    pub fn element_index(&self, element_id: u32) -> Option<usize> {
        self.elements.iter().position(|e| e.element_id == element_id)
    }

    /// Phase center used at evaluation time; zero for conventional models.
    fn offset(&self, index: usize) -> Result<Vec3> {
        let e = &self.elements[index];
        match self.mode {
            Mode::Conventional => Ok(Vec3::ZERO),
            Mode::Enhanced => match e.phase_center {
                Some(d) if d.is_finite() => Ok(d),
                Some(_) => Err(Error::ModeMismatch(format!(
                    "element {} has a non-finite phase center",
                    e.element_id
                ))),
                None => Err(Error::ModeMismatch(format!(
                    "enhanced model lacks a phase center for element {}",
                    e.element_id
                ))),
            },
        }
    }

    fn steering(&self, offset: Vec3, theta: f64, phi: f64) -> Complex64 {
        if offset == Vec3::ZERO {
            return Complex64::new(1.0, 0.0);
        }
        let u = unit_vector_at(theta, phi);
        Complex64::cis(TAU / self.wavelength() * u.dot(&offset))
    }

    /// Response of one element and polarization; zero if that polarization
    /// was not characterized.
    pub fn element_response(&self, index: usize, polarization: Polarization, dir: Direction) -> Result<Complex64> {
        let offset = self.offset(index)?;
        Ok(match self.elements[index].eadf(polarization) {
            Some(q) => reconstruct_at(q, dir.theta, dir.phi) * self.steering(offset, dir.theta, dir.phi),
            None => Complex64::new(0.0, 0.0),
        })
    }

    /// [`ArrayModel::element_response`] over the tensor grid `thetas × phis`.
    pub fn element_response_grid(
        &self,
        index: usize,
        polarization: Polarization,
        thetas: &[f64],
        phis: &[f64],
    ) -> Result<Array2<Complex64>> {
        let offset = self.offset(index)?;
        let Some(q) = self.elements[index].eadf(polarization) else {
            return Ok(Array2::zeros((thetas.len(), phis.len())));
        };
        let mut out = reconstruct_grid(q, thetas, phis);
        if offset != Vec3::ZERO {
            for ((i, j), v) in out.indexed_iter_mut() {
                *v *= self.steering(offset, thetas[i], phis[j]);
            }
        }
        Ok(out)
    }
}

/// `P × 2` matrix of element responses, columns H and V. In enhanced mode each
/// row is multiplied by `exp(j2π uᵀd̂/λ)` of that element; both columns share
/// the factor.
pub fn array_response(model: &ArrayModel, dir: Direction) -> Result<Array2<Complex64>> {
    let mut out = Array2::zeros((model.elements.len(), 2));
    for (p, e) in model.elements.iter().enumerate() {
        let beta = model.steering(model.offset(p)?, dir.theta, dir.phi);
        for pol in [Polarization::H, Polarization::V] {
            if let Some(q) = e.eadf(pol) {
                out[[p, pol.index()]] = reconstruct_at(q, dir.theta, dir.phi) * beta;
            }
        }
    }
    Ok(out)
}
