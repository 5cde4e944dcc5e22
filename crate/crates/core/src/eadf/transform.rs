use ndarray::{s, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{AngularGrid, Direction};
use crate::pattern::ExtendedPattern;

/// Inclusive range of retained integer spatial frequencies.
///
/// Zenith frequencies run over `[-M, M-1]`, azimuth over `[-N, N-1]`; a full
/// window covers both completely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SpectralWindow {
    pub k_min: i64,
    pub k_max: i64,
    pub l_min: i64,
    pub l_max: i64,
}

impl SpectralWindow {
    pub fn full(grid: &AngularGrid) -> Self {
        let (m, n) = (grid.m() as i64, grid.n() as i64);
        SpectralWindow {
            k_min: -m,
            k_max: m - 1,
            l_min: -n,
            l_max: n - 1,
        }
    }

    /// Window `|k| ≤ half_k`, `|l| ≤ half_l`, clipped to the grid's range.
    pub fn centered(grid: &AngularGrid, half_k: usize, half_l: usize) -> Self {
        let (m, n) = (grid.m() as i64, grid.n() as i64);
        let (hk, hl) = (half_k as i64, half_l as i64);
        SpectralWindow {
            k_min: (-hk).max(-m),
            k_max: hk.min(m - 1),
            l_min: (-hl).max(-n),
            l_max: hl.min(n - 1),
        }
    }

    pub fn rows(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn cols(&self) -> usize {
        (self.l_max - self.l_min + 1) as usize
    }

    pub fn contains(&self, k: i64, l: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k) && (self.l_min..=self.l_max).contains(&l)
    }
}

/// A (possibly truncated) EADF. `data[[i, j]]` is the coefficient of
/// `exp(j(kθ + lφ))` with `k = window.k_min + i`, `l = window.l_min + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eadf {
    pub grid: AngularGrid,
    pub window: SpectralWindow,
    pub data: Array2<Complex64>,
}

impl Eadf {
    pub fn new(grid: AngularGrid, window: SpectralWindow, data: Array2<Complex64>) -> Result<Self> {
        let full = SpectralWindow::full(&grid);
        if window.k_min > window.k_max
            || window.l_min > window.l_max
            || window.k_min < full.k_min
            || window.k_max > full.k_max
            || window.l_min < full.l_min
            || window.l_max > full.l_max
        {
            return Err(Error::InvalidInput(format!(
                "spectral window {window:?} outside grid range {full:?}"
            )));
        }
        if data.dim() != (window.rows(), window.cols()) {
            return Err(Error::ShapeMismatch {
                expected: (window.rows(), window.cols()),
                actual: data.dim(),
            });
        }
        Ok(Eadf { grid, window, data })
    }

    pub fn is_truncated(&self) -> bool {
        self.window != SpectralWindow::full(&self.grid)
    }

    /// Coefficient at integer frequency `(k, l)`; zero outside the window.
    pub fn coefficient(&self, k: i64, l: i64) -> Complex64 {
        if self.window.contains(k, l) {
            self.data[[
                (k - self.window.k_min) as usize,
                (l - self.window.l_min) as usize,
            ]]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Sum of squared coefficient magnitudes.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Zero-padded copy on the full `2M × 2N` frequency range, DC at `(M, N)`.
    pub fn to_full(&self) -> Array2<Complex64> {
        let (rows, cols) = self.grid.extended_shape();
        let mut full = Array2::zeros((rows, cols));
        let r0 = (self.window.k_min + self.grid.m() as i64) as usize;
        let c0 = (self.window.l_min + self.grid.n() as i64) as usize;
        full.slice_mut(s![r0..r0 + self.window.rows(), c0..c0 + self.window.cols()])
            .assign(&self.data);
        full
    }
}

/// Centered 2D spatial spectrum with `1/(4MN)` normalization:
///
/// `Q[k, l] = 1/(4MN) Σ_{m,n} C[m, n] exp(-jπ k m / M) exp(-jπ l n / N)`
///
/// for `k ∈ [-M, M-1]`, `l ∈ [-N, N-1]`. With this scaling
/// [`reconstruct`] interpolates the extended pattern exactly at the samples.
pub fn forward(ext: &ExtendedPattern) -> Eadf {
    let grid = ext.grid;
    let (rows, cols) = grid.extended_shape();
    let mut planner = FftPlanner::<f64>::new();

    let mut buf: Vec<Complex64> = ext.data.iter().copied().collect();
    let row_fft = planner.plan_fft_forward(cols);
    row_fft.process(&mut buf);

    let mut transposed = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            transposed[c * rows + r] = buf[r * cols + c];
        }
    }
    let col_fft = planner.plan_fft_forward(rows);
    col_fft.process(&mut transposed);

    // DFT bin (k mod 2M) goes to row k + M, same for columns
    let scale = 1.0 / (rows * cols) as f64;
    let (m, n) = (grid.m(), grid.n());
    let data = Array2::from_shape_fn((rows, cols), |(i, j)| {
        let bin_k = (i + m) % rows;
        let bin_l = (j + n) % cols;
        transposed[bin_l * rows + bin_k] * scale
    });
    Eadf {
        grid,
        window: SpectralWindow::full(&grid),
        data,
    }
}

fn phasors(angle: f64, lo: i64, hi: i64) -> Vec<Complex64> {
    (lo..=hi)
        .map(|k| Complex64::cis(k as f64 * angle))
        .collect()
}

/// `ω_θᵀ Q ω_φ` with `ω_θ[k] = exp(jkθ)`, `ω_φ[l] = exp(jlφ)` over the
/// retained window.
pub fn reconstruct(q: &Eadf, dir: Direction) -> Complex64 {
    reconstruct_at(q, dir.theta, dir.phi)
}

/// [`reconstruct`] on raw angles, without azimuth normalization.
pub fn reconstruct_at(q: &Eadf, theta: f64, phi: f64) -> Complex64 {
    let w = &q.window;
    let wt = phasors(theta, w.k_min, w.k_max);
    let wp = phasors(phi, w.l_min, w.l_max);
    let mut acc = Complex64::new(0.0, 0.0);
    for (row, &a) in q.data.rows().into_iter().zip(&wt) {
        let inner: Complex64 = row.iter().zip(&wp).map(|(&c, &b)| c * b).sum();
        acc += a * inner;
    }
    acc
}

/// Evaluates the interpolant on the tensor grid `thetas × phis`; entry
/// `[i, j]` is the response at `(thetas[i], phis[j])`.
pub fn reconstruct_grid(q: &Eadf, thetas: &[f64], phis: &[f64]) -> Array2<Complex64> {
    let w = &q.window;
    let wt = Array2::from_shape_fn((thetas.len(), w.rows()), |(i, k)| {
        Complex64::cis((w.k_min + k as i64) as f64 * thetas[i])
    });
    let wp = Array2::from_shape_fn((w.cols(), phis.len()), |(l, j)| {
        Complex64::cis((w.l_min + l as i64) as f64 * phis[j])
    });
    wt.dot(&q.data).dot(&wp)
}

/// Keeps the smallest centered rectangular window holding at least
/// `power_fraction` of the total power. Ties in area go to the window with
/// more power, then to the narrower zenith extent.
pub fn truncate(q: &Eadf, power_fraction: f64) -> Result<Eadf> {
    if !(power_fraction > 0.0 && power_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "power fraction must lie in (0, 1], got {power_fraction}"
        )));
    }
    if q.is_truncated() {
        return Err(Error::InvalidInput(
            "EADF is already truncated".to_string(),
        ));
    }
    if power_fraction == 1.0 {
        return Ok(q.clone());
    }

    let (m, n) = (q.grid.m(), q.grid.n());
    let (rows, cols) = q.data.dim();
    // prefix[i][j] = power in rows < i, cols < j
    let mut prefix = Array2::<f64>::zeros((rows + 1, cols + 1));
    for i in 0..rows {
        for j in 0..cols {
            prefix[[i + 1, j + 1]] =
                q.data[[i, j]].norm_sqr() + prefix[[i, j + 1]] + prefix[[i + 1, j]] - prefix[[i, j]];
        }
    }
    let total = prefix[[rows, cols]];
    let target = power_fraction * total;

    let mut best: Option<(usize, f64, usize, usize)> = None;
    for half_k in 0..=m {
        for half_l in 0..=n {
            let win = SpectralWindow::centered(&q.grid, half_k, half_l);
            let (r0, r1) = ((win.k_min + m as i64) as usize, (win.k_max + m as i64) as usize + 1);
            let (c0, c1) = ((win.l_min + n as i64) as usize, (win.l_max + n as i64) as usize + 1);
            let power = prefix[[r1, c1]] - prefix[[r0, c1]] - prefix[[r1, c0]] + prefix[[r0, c0]];
            if power < target {
                continue;
            }
            let area = win.rows() * win.cols();
            let better = match best {
                None => true,
                Some((a, p, _, _)) => area < a || (area == a && power > p),
            };
            if better {
                best = Some((area, power, half_k, half_l));
            }
            // wider azimuth windows at this zenith width only grow the area
            break;
        }
    }
    let (_, _, half_k, half_l) = best.unwrap_or((0, 0.0, m, n));
    let window = SpectralWindow::centered(&q.grid, half_k, half_l);
    let r0 = (window.k_min + m as i64) as usize;
    let c0 = (window.l_min + n as i64) as usize;
    let data = q
        .data
        .slice(s![r0..r0 + window.rows(), c0..c0 + window.cols()])
        .to_owned();
    Eadf::new(q.grid, window, data)
}
