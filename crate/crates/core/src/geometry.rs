//! Directions, sampling grids and 3D vectors in the chamber coordinate system.
//!
//! Zenith `theta` is measured from the +z axis and azimuth `phi` from the +x
//! axis. All angles are radians.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength in meters for a frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// A direction on the (possibly extended) sphere.
///
/// `phi` is normalized to `[0, 2π)`. `theta` is kept as given: measured data
/// live on `[0, π]`, but the EADF interpolant is defined on the full circle
/// `[0, 2π)` and evaluation there is legitimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        debug_assert!(theta.is_finite() && phi.is_finite());
        Direction {
            theta,
            phi: normalize_angle(phi),
        }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Direction::new(theta_deg.to_radians(), phi_deg.to_radians())
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can return exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Equiangular measurement grid: `M + 1` zenith rows `0, π/M, …, π` and `2N`
/// azimuth columns `0, π/N, …, (2N−1)π/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridShape")]
pub struct AngularGrid {
    m: usize,
    n: usize,
}

#[derive(Deserialize)]
struct GridShape {
    m: usize,
    n: usize,
}

impl TryFrom<GridShape> for AngularGrid {
    type Error = Error;

    fn try_from(g: GridShape) -> Result<Self> {
        AngularGrid::new(g.m, g.n)
    }
}

impl AngularGrid {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidGrid(format!(
                "half-resolutions must be at least 2, got M={m}, N={n}"
            )));
        }
        Ok(AngularGrid { m, n })
    }

    /// Zenith half-resolution `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Azimuth half-resolution `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Shape of a measured pattern on this grid, `(M + 1, 2N)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.m + 1, 2 * self.n)
    }

    /// Shape of the full-sphere extension, `(2M, 2N)`.
    pub fn extended_shape(&self) -> (usize, usize) {
        (2 * self.m, 2 * self.n)
    }

    pub fn zenith_step(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn azimuth_step(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn zenith(&self, row: usize) -> f64 {
        row as f64 * PI / self.m as f64
    }

    pub fn azimuth(&self, col: usize) -> f64 {
        col as f64 * PI / self.n as f64
    }

    pub fn zeniths(&self) -> Vec<f64> {
        (0..=self.m).map(|r| self.zenith(r)).collect()
    }

    pub fn azimuths(&self) -> Vec<f64> {
        (0..2 * self.n).map(|c| self.azimuth(c)).collect()
    }

    pub fn direction(&self, row: usize, col: usize) -> Direction {
        Direction::new(self.zenith(row), self.azimuth(col))
    }

    /// Number of directions, `(M + 1)·2N`.
    pub fn len(&self) -> usize {
        (self.m + 1) * 2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All grid directions in row-major order (zenith rows, then azimuth), the
/// same order as pattern matrices.
pub fn grid_directions(grid: &AngularGrid) -> Vec<Direction> {
    let (rows, cols) = grid.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(grid.direction(r, c));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Unit vector `[sinθ cosφ, sinθ sinφ, cosθ]`.
pub fn unit_vector(dir: Direction) -> Vec3 {
    unit_vector_at(dir.theta, dir.phi)
}

pub(crate) fn unit_vector_at(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}
