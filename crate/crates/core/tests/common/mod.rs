#![allow(dead_code)]

use std::f64::consts::PI;

use eadf_core::{AngularGrid, Complex64, Polarization, RadiationPattern};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Literal double sum over the extended pattern, `O((MN)²)`.
pub fn brute_force_eadf(c: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = c.dim();
    let (m, n) = (rows / 2, cols / 2);
    let norm = 1.0 / (4 * m * n) as f64;
    Array2::from_shape_fn((rows, cols), |(kk, ll)| {
        let k = kk as f64 - m as f64;
        let l = ll as f64 - n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((mi, ni), v) in c.indexed_iter() {
            let phase = -PI * k * mi as f64 / m as f64 - PI * l * ni as f64 / n as f64;
            acc += v * Complex64::cis(phase);
        }
        acc * norm
    })
}

/// A random trigonometric series `Σ c_kl e^{j(kθ + lφ)}` with `|k| ≤ kt`,
/// `|l| ≤ kp`, obeying `a(-θ, φ+π) = a(θ, φ)` so it is a valid sphere
/// pattern. Evaluated term by term, independently of the library.
#[derive(Debug, Clone)]
pub struct Series {
    pub kt: i64,
    pub kp: i64,
    pub coeffs: Vec<(i64, i64, Complex64)>,
}

impl Series {
    pub fn random(kt: usize, kp: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kt, kp) = (kt as i64, kp as i64);
        let mut g = std::collections::HashMap::new();
        for k in -kt..=kt {
            for l in -kp..=kp {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                g.insert((k, l), v);
            }
        }
        let mut coeffs = Vec::new();
        for k in -kt..=kt {
            for l in -kp..=kp {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.push((k, l, (g[&(k, l)] + g[&(-k, l)] * sign) * 0.5));
            }
        }
        Series { kt, kp, coeffs }
    }

    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, l, c)| c * Complex64::cis(k as f64 * theta + l as f64 * phi))
            .sum()
    }

    pub fn peak_on(&self, grid: &AngularGrid) -> f64 {
        let mut peak: f64 = 0.0;
        for r in 0..=grid.m() {
            for c in 0..2 * grid.n() {
                peak = peak.max(self.eval(grid.zenith(r), grid.azimuth(c)).norm());
            }
        }
        peak
    }

    pub fn sample(&self, grid: AngularGrid, frequency_hz: f64) -> RadiationPattern {
        let data = Array2::from_shape_fn(grid.shape(), |(r, c)| self.eval(grid.zenith(r), grid.azimuth(c)));
        RadiationPattern::new(grid, frequency_hz, Polarization::V, 0, data).unwrap()
    }
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_pattern(grid: AngularGrid, seed: u64) -> RadiationPattern {
    let (r, c) = grid.shape();
    RadiationPattern::new(grid, 28.5e9, Polarization::H, 1, random_matrix(r, c, seed)).unwrap()
}

pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
