//! Wideband propagation-delay estimation from a frequency sweep.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Zero-padding factor of the coarse delay spectrum.
const OVERSAMPLING: usize = 8;
/// Golden-section stops at this fraction of the delay resolution `1/(SΔf)`.
const GOLDEN_RESOLUTION: f64 = 1e-4;
const NEWTON_ITERATIONS: usize = 8;
const SPACING_TOLERANCE: f64 = 1e-6;

/// Maximizes `|Σ_s a(f_s) exp(j2π f_s τ)|²` over the unambiguous delay
/// interval `(-1/(2Δf), 1/(2Δf)]`.
///
/// The estimator is built once per frequency list and reused for every
/// direction; it holds the FFT plan of the coarse search.
pub struct DelayEstimator {
    spacing: f64,
    /// Angular offsets `2πΔf (s - (S-1)/2)`, centered for conditioning.
    omegas: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    fft_len: usize,
}

impl std::fmt::Debug for DelayEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DelayEstimator")
            .field("spacing", &self.spacing)
            .field("points", &self.omegas.len())
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl DelayEstimator {
    pub fn new(frequencies_hz: &[f64]) -> Result<Self> {
        let s = frequencies_hz.len();
        if s < 2 {
            return Err(Error::InvalidInput(format!(
                "delay estimation needs at least two frequencies, got {s}"
            )));
        }
        let spacing = (frequencies_hz[s - 1] - frequencies_hz[0]) / (s - 1) as f64;
        if spacing.is_nan() || spacing <= 0.0
            || frequencies_hz
                .windows(2)
                .any(|w| ((w[1] - w[0]) - spacing).abs() > SPACING_TOLERANCE * spacing)
        {
            return Err(Error::InvalidInput(
                "frequencies must be strictly increasing and uniformly spaced".to_string(),
            ));
        }
        let center = (s - 1) as f64 / 2.0;
        let omegas = (0..s)
            .map(|i| TAU * spacing * (i as f64 - center))
            .collect();
        let fft_len = (OVERSAMPLING * s).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_inverse(fft_len);
        Ok(DelayEstimator {
            spacing,
            omegas,
            fft,
            fft_len,
        })
    }

    pub fn frequency_spacing(&self) -> f64 {
        self.spacing
    }

    /// Width of the unambiguous delay interval, `1/Δf`.
    pub fn unambiguous_range(&self) -> f64 {
        1.0 / self.spacing
    }

    /// Objective value at delay `tau`.
    pub fn objective(&self, responses: &[Complex64], tau: f64) -> f64 {
        self.sums(responses, tau).0.norm_sqr()
    }

    /// `F(τ)`, `F'(τ)`, `F''(τ)` of the centered delay transform.
    fn sums(&self, responses: &[Complex64], tau: f64) -> (Complex64, Complex64, Complex64) {
        let mut f0 = Complex64::new(0.0, 0.0);
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut f2 = Complex64::new(0.0, 0.0);
        for (&a, &w) in responses.iter().zip(&self.omegas) {
            let term = a * Complex64::cis(w * tau);
            f0 += term;
            f1 += term * Complex64::new(0.0, w);
            f2 -= term * (w * w);
        }
        (f0, f1, f2)
    }

    pub fn estimate(&self, responses: &[Complex64]) -> Result<f64> {
        if responses.len() != self.omegas.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} responses, got {}",
                self.omegas.len(),
                responses.len()
            )));
        }
        if responses.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::DegenerateInput("non-finite response".to_string()));
        }
        if responses.iter().all(|v| v.norm_sqr() == 0.0) {
            return Err(Error::DegenerateInput("all responses are zero".to_string()));
        }

        let coarse = self.coarse_peak(responses);
        let step = 1.0 / (self.fft_len as f64 * self.spacing);
        let resolution = GOLDEN_RESOLUTION / (self.omegas.len() as f64 * self.spacing);
        let mut tau = self.golden(responses, coarse - step, coarse + step, resolution);

        // Newton on the derivative for the last digits; only accepted while
        // the curvature says we sit on a maximum and the step stays local.
        for _ in 0..NEWTON_ITERATIONS {
            let (f0, f1, f2) = self.sums(responses, tau);
            let d1 = 2.0 * (f0.conj() * f1).re;
            let d2 = 2.0 * (f1.norm_sqr() + (f0.conj() * f2).re);
            if d2.is_nan() || d2 >= 0.0 {
                break;
            }
            let delta = -d1 / d2;
            if !delta.is_finite() || delta.abs() > step {
                break;
            }
            tau += delta;
            if delta.abs() <= 1e-9 * resolution {
                break;
            }
        }
        Ok(self.wrap(tau))
    }

    /// Maximum of the zero-padded delay spectrum; ties go to the smallest |τ|.
    fn coarse_peak(&self, responses: &[Complex64]) -> f64 {
        let len = self.fft_len;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..responses.len()].copy_from_slice(responses);
        self.fft.process(&mut buf);

        let to_tau = |i: usize| {
            let signed = if i > len / 2 { i as f64 - len as f64 } else { i as f64 };
            signed / (len as f64 * self.spacing)
        };
        let peak = buf.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let tie = peak * (1.0 - 1e-12);
        buf.iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() >= tie)
            .map(|(i, _)| to_tau(i))
            .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)))
            .unwrap_or(0.0)
    }

    fn golden(&self, responses: &[Complex64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.objective(responses, x1);
        let mut f2 = self.objective(responses, x2);
        while hi - lo > tol {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.objective(responses, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.objective(responses, x1);
            }
        }
        0.5 * (lo + hi)
    }

    fn wrap(&self, tau: f64) -> f64 {
        let range = self.unambiguous_range();
        let half = 0.5 * range;
        let mut t = (tau + half).rem_euclid(range) - half;
        if t <= -half {
            t += range;
        }
        t
    }
}

/// One-shot convenience wrapper around [`DelayEstimator`].
pub fn estimate_delay(responses: &[Complex64], frequencies_hz: &[f64]) -> Result<f64> {
    DelayEstimator::new(frequencies_hz)?.estimate(responses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn band(start: f64, stop: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect()
    }

    fn delayed(freqs: &[f64], tau: f64) -> Vec<Complex64> {
        freqs.iter().map(|&f| Complex64::cis(-TAU * f * tau)).collect()
    }

    #[test]
    fn flat_response_has_zero_delay() {
        let freqs = band(27e9, 30e9, 301);
        let ones = vec![Complex64::new(1.0, 0.0); 301];
        assert_eq!(estimate_delay(&ones, &freqs).unwrap().abs(), 0.0);
    }

    #[test]
    fn one_nanosecond_matches_dense_grid_search() {
        let freqs = band(27e9, 30e9, 301);
        let resp = delayed(&freqs, 1e-9);
        let est = DelayEstimator::new(&freqs).unwrap();
        // oracle: exhaustive scan at 1e-5 ns over ±2 ns
        let mut best = (f64::MIN, 0.0);
        let mut t = -2e-9;
        while t <= 2e-9 {
            let j = est.objective(&resp, t);
            if j > best.0 {
                best = (j, t);
            }
            t += 1e-14;
        }
        assert!((best.1 - 1e-9).abs() < 1e-14);
        let tau = est.estimate(&resp).unwrap();
        assert!((tau - best.1).abs() < 1e-12, "{tau} vs {}", best.1);
        assert!((tau - 1e-9).abs() < 1e-18);
    }

    #[test]
    fn noisy_delay_stays_close() {
        let freqs = band(27e9, 30e9, 301);
        let est = DelayEstimator::new(&freqs).unwrap();
        let truth = 0.667e-9;
        let sigma = (1e-6_f64 / 2.0).sqrt(); // 60 dB SNR on a unit response
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut errors: Vec<f64> = (0..100)
            .map(|_| {
                let resp: Vec<Complex64> = delayed(&freqs, truth)
                    .into_iter()
                    .map(|v| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        v + Complex64::new(re, im) * sigma
                    })
                    .collect();
                (est.estimate(&resp).unwrap() - truth).abs()
            })
            .collect();
        errors.sort_by(f64::total_cmp);
        assert!(errors[94] < 0.01e-9, "95th percentile {}", errors[94]);
    }

    #[test]
    fn scaling_does_not_move_the_peak() {
        let freqs = band(1e9, 2e9, 41);
        let resp = delayed(&freqs, 3.3e-9);
        let scaled: Vec<_> = resp.iter().map(|v| v * Complex64::new(-0.3, 2.0)).collect();
        let a = estimate_delay(&resp, &freqs).unwrap();
        let b = estimate_delay(&scaled, &freqs).unwrap();
        assert!((a - b).abs() < 1e-20);
    }

    #[test]
    fn result_lies_in_unambiguous_interval() {
        let freqs = band(27e9, 30e9, 301); // Δf = 10 MHz, range ±50 ns
        let est = DelayEstimator::new(&freqs).unwrap();
        for tau in [-49e-9, 49.9e-9, 70e-9, -0.5e-9] {
            let t = est.estimate(&delayed(&freqs, tau)).unwrap();
            assert!(t > -50e-9 && t <= 50e-9);
            let aliased = (tau + 50e-9).rem_euclid(100e-9) - 50e-9;
            assert!((t - aliased).abs() < 1e-15, "{t} vs {aliased}");
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let freqs = band(1e9, 2e9, 11);
        assert!(matches!(
            estimate_delay(&[Complex64::new(0.0, 0.0); 11], &freqs),
            Err(Error::DegenerateInput(_))
        ));
        assert!(estimate_delay(&[Complex64::new(1.0, 0.0)], &[1e9]).is_err());
        assert!(DelayEstimator::new(&[1e9, 1.1e9, 1.3e9]).is_err());
        assert!(estimate_delay(&[Complex64::new(1.0, 0.0); 10], &freqs).is_err());
    }
}
