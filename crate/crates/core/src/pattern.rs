//! Measured radiation patterns, full-sphere extension and grid subsampling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AngularGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            other => Err(Error::InvalidInput(format!("unknown polarization {other:?}"))),
        }
    }
}

/// Complex gains of one element, one polarization, one frequency, sampled on
/// an [`AngularGrid`]. Row `r` is zenith `rπ/M`, column `c` is azimuth `cπ/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPattern {
    pub grid: AngularGrid,
    pub frequency_hz: f64,
    pub polarization: Polarization,
    pub element_id: u32,
    pub data: Array2<Complex64>,
}

impl RadiationPattern {
    /// Checks the matrix shape against the grid. Entry finiteness is reported
    /// by [`validate`] rather than enforced here.
    pub fn new(
        grid: AngularGrid,
        frequency_hz: f64,
        polarization: Polarization,
        element_id: u32,
        data: Array2<Complex64>,
    ) -> Result<Self> {
        if data.dim() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                actual: data.dim(),
            });
        }
        Ok(RadiationPattern {
            grid,
            frequency_hz,
            polarization,
            element_id,
            data,
        })
    }

    /// Same metadata, new samples.
    pub fn with_data(&self, data: Array2<Complex64>) -> Result<Self> {
        RadiationPattern::new(
            self.grid,
            self.frequency_hz,
            self.polarization,
            self.element_id,
            data,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Peak magnitude over the grid.
    pub fn peak_magnitude(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.norm()))
    }
}

/// Full-sphere extension of a pattern on a `2M × 2N` grid with zeniths
/// `0, π/M, …, (2M−1)π/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPattern {
    pub grid: AngularGrid,
    pub data: Array2<Complex64>,
}

impl ExtendedPattern {
    pub fn new(grid: AngularGrid, data: Array2<Complex64>) -> Result<Self> {
        if data.dim() != grid.extended_shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.extended_shape(),
                actual: data.dim(),
            });
        }
        Ok(ExtendedPattern { grid, data })
    }
}

/// Continues a pattern through the poles: rows `M+1 … 2M−1` are the interior
/// rows `M−1 … 1` shifted by `N` columns (half a turn in azimuth), so that
/// `C[M + r, c] = A[M − r, (c + N) mod 2N]`. Pure copies, no arithmetic.
pub fn extend(pattern: &RadiationPattern) -> ExtendedPattern {
    let grid = pattern.grid;
    let (m, n) = (grid.m(), grid.n());
    let cols = 2 * n;
    let mut data = Array2::zeros((2 * m, cols));
    data.slice_mut(s![..=m, ..]).assign(&pattern.data);
    for r in 1..m {
        for c in 0..cols {
            data[[m + r, c]] = pattern.data[[m - r, (c + n) % cols]];
        }
    }
    ExtendedPattern { grid, data }
}

/// Keeps every `zenith_factor`-th row and `azimuth_factor`-th column, anchored
/// at `(θ, φ) = (0, 0)`.
pub fn subsample(
    pattern: &RadiationPattern,
    zenith_factor: usize,
    azimuth_factor: usize,
) -> Result<RadiationPattern> {
    let (m, n) = (pattern.grid.m(), pattern.grid.n());
    check_factor("zenith", zenith_factor, m)?;
    check_factor("azimuth", azimuth_factor, n)?;
    let grid = AngularGrid::new(m / zenith_factor, n / azimuth_factor)?;
    let data = pattern
        .data
        .slice(s![..;zenith_factor, ..;azimuth_factor])
        .to_owned();
    pattern.with_data_on(grid, data)
}

impl RadiationPattern {
    fn with_data_on(&self, grid: AngularGrid, data: Array2<Complex64>) -> Result<Self> {
        RadiationPattern::new(
            grid,
            self.frequency_hz,
            self.polarization,
            self.element_id,
            data,
        )
    }
}

fn check_factor(axis: &'static str, factor: usize, size: usize) -> Result<()> {
    if factor == 0 || !size.is_multiple_of(factor) {
        return Err(Error::NonDivisibleFactor { axis, factor, size });
    }
    Ok(())
}

/// A wideband, multi-element, polarimetric measurement set on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub grid: AngularGrid,
    pub frequencies_hz: Vec<f64>,
    pub patterns: Vec<RadiationPattern>,
}

impl PatternSet {
    /// No consistency checks beyond what the caller passes in; run
    /// [`validate`] before relying on completeness.
    pub fn new(grid: AngularGrid, frequencies_hz: Vec<f64>, patterns: Vec<RadiationPattern>) -> Self {
        PatternSet {
            grid,
            frequencies_hz,
            patterns,
        }
    }

    pub fn element_ids(&self) -> Vec<u32> {
        let ids: BTreeSet<u32> = self.patterns.iter().map(|p| p.element_id).collect();
        ids.into_iter().collect()
    }

    pub fn polarizations(&self) -> Vec<Polarization> {
        let pols: BTreeSet<Polarization> = self.patterns.iter().map(|p| p.polarization).collect();
        pols.into_iter().collect()
    }

    /// Index of the frequency closest to `frequency_hz`, if within 1 Hz.
    pub fn frequency_index(&self, frequency_hz: f64) -> Option<usize> {
        self.frequencies_hz
            .iter()
            .position(|&f| (f - frequency_hz).abs() <= 1.0)
    }

    /// Index of the center frequency of the sweep (lower middle for even counts).
    pub fn center_frequency_index(&self) -> usize {
        self.frequencies_hz.len().saturating_sub(1) / 2
    }

    pub fn get(
        &self,
        element_id: u32,
        polarization: Polarization,
        frequency_hz: f64,
    ) -> Option<&RadiationPattern> {
        self.patterns.iter().find(|p| {
            p.element_id == element_id
                && p.polarization == polarization
                && (p.frequency_hz - frequency_hz).abs() <= 1.0
        })
    }

    /// All frequencies of one element/polarization, ordered as `frequencies_hz`.
    pub fn sweep(&self, element_id: u32, polarization: Polarization) -> Result<Vec<&RadiationPattern>> {
        self.frequencies_hz
            .iter()
            .map(|&f| {
                self.get(element_id, polarization, f).ok_or_else(|| {
                    Error::Missing(format!(
                        "element {element_id} {polarization} at {f} Hz"
                    ))
                })
            })
            .collect()
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    GridMismatch {
        element_id: u32,
        polarization: Polarization,
        frequency_hz: f64,
        grid: AngularGrid,
    },
    DuplicateKey {
        element_id: u32,
        polarization: Polarization,
        frequency_hz: f64,
    },
    MissingCell {
        element_id: u32,
        polarization: Polarization,
        frequency_hz: f64,
    },
    NonFinite {
        element_id: u32,
        polarization: Polarization,
        frequency_hz: f64,
        row: usize,
        col: usize,
    },
    NonIncreasingFrequencies,
    NonUniformSpacing {
        index: usize,
        spacing_hz: f64,
        expected_hz: f64,
    },
    UnlistedFrequency {
        element_id: u32,
        frequency_hz: f64,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::GridMismatch {
                element_id,
                polarization,
                frequency_hz,
                grid,
            } => write!(
                f,
                "element {element_id} {polarization} at {frequency_hz} Hz is on grid M={} N={}, expected the set grid",
                grid.m(),
                grid.n()
            ),
            Diagnostic::DuplicateKey {
                element_id,
                polarization,
                frequency_hz,
            } => write!(f, "duplicate pattern for element {element_id} {polarization} at {frequency_hz} Hz"),
            Diagnostic::MissingCell {
                element_id,
                polarization,
                frequency_hz,
            } => write!(f, "missing pattern for element {element_id} {polarization} at {frequency_hz} Hz"),
            Diagnostic::NonFinite {
                element_id,
                polarization,
                frequency_hz,
                row,
                col,
            } => write!(
                f,
                "non-finite sample in element {element_id} {polarization} at {frequency_hz} Hz, row {row}, col {col}"
            ),
            Diagnostic::NonIncreasingFrequencies => f.write_str("frequencies are not strictly increasing"),
            Diagnostic::NonUniformSpacing {
                index,
                spacing_hz,
                expected_hz,
            } => write!(
                f,
                "non-uniform frequency spacing at index {index}: {spacing_hz} Hz (expected {expected_hz} Hz)"
            ),
            Diagnostic::UnlistedFrequency {
                element_id,
                frequency_hz,
            } => write!(f, "element {element_id} has a pattern at unlisted frequency {frequency_hz} Hz"),
        }
    }
}

/// Relative tolerance on frequency spacing.
const SPACING_TOLERANCE: f64 = 1e-6;

/// Reports grid mismatches, duplicate or missing cells, non-finite samples and
/// frequency-list problems. An empty result means the set is usable.
pub fn validate(set: &PatternSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let freqs = &set.frequencies_hz;
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        out.push(Diagnostic::NonIncreasingFrequencies);
    } else if freqs.len() >= 3 {
        let expected = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
        for (i, w) in freqs.windows(2).enumerate() {
            let spacing = w[1] - w[0];
            if (spacing - expected).abs() > SPACING_TOLERANCE * expected {
                out.push(Diagnostic::NonUniformSpacing {
                    index: i + 1,
                    spacing_hz: spacing,
                    expected_hz: expected,
                });
            }
        }
    }

    let mut seen: BTreeMap<(u32, Polarization, usize), usize> = BTreeMap::new();
    for p in &set.patterns {
        if p.grid != set.grid {
            out.push(Diagnostic::GridMismatch {
                element_id: p.element_id,
                polarization: p.polarization,
                frequency_hz: p.frequency_hz,
                grid: p.grid,
            });
        }
        match set.frequency_index(p.frequency_hz) {
            Some(fi) => {
                let count = seen.entry((p.element_id, p.polarization, fi)).or_insert(0);
                *count += 1;
                if *count == 2 {
                    out.push(Diagnostic::DuplicateKey {
                        element_id: p.element_id,
                        polarization: p.polarization,
                        frequency_hz: p.frequency_hz,
                    });
                }
            }
            None => out.push(Diagnostic::UnlistedFrequency {
                element_id: p.element_id,
                frequency_hz: p.frequency_hz,
            }),
        }
        if let Some(((row, col), _)) = p
            .data
            .indexed_iter()
            .find(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
        {
            out.push(Diagnostic::NonFinite {
                element_id: p.element_id,
                polarization: p.polarization,
                frequency_hz: p.frequency_hz,
                row,
                col,
            });
        }
    }

    // Every (element, polarization) pair that appears must cover all frequencies.
    let pairs: BTreeSet<(u32, Polarization)> = set
        .patterns
        .iter()
        .map(|p| (p.element_id, p.polarization))
        .collect();
    for (element_id, polarization) in pairs {
        for (fi, &f) in freqs.iter().enumerate() {
            if !seen.contains_key(&(element_id, polarization, fi)) {
                out.push(Diagnostic::MissingCell {
                    element_id,
                    polarization,
                    frequency_hz: f,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(m: usize, n: usize) -> AngularGrid {
        AngularGrid::new(m, n).unwrap()
    }

    fn pattern_from(grid: AngularGrid, f: impl Fn(usize, usize) -> Complex64) -> RadiationPattern {
        let data = Array2::from_shape_fn(grid.shape(), |(r, c)| f(r, c));
        RadiationPattern::new(grid, 28.5e9, Polarization::V, 0, data).unwrap()
    }

    fn arbitrary_pattern(m: usize, n: usize, seed: u64) -> RadiationPattern {
        // cheap deterministic pseudo-random fill, no arithmetic structure
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = grid(m, n);
        let data = Array2::from_shape_fn(g.shape(), |_| Complex64::new(next(), next()));
        RadiationPattern::new(g, 28.5e9, Polarization::V, 0, data).unwrap()
    }

    #[test]
    fn shape_is_checked() {
        let g = grid(2, 2);
        let err = RadiationPattern::new(g, 1e9, Polarization::H, 0, Array2::zeros((4, 4)));
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn constant_pattern_extends_to_constant() {
        let a = pattern_from(grid(2, 2), |_, _| Complex64::new(1.0, 0.0));
        let c = extend(&a);
        assert_eq!(c.data.dim(), (4, 4));
        assert!(c.data.iter().all(|&v| v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn single_entry_lands_where_expected() {
        // 1-based A[2,1] = 5 with M=N=2 goes to 1-based C[4,3].
        let a = pattern_from(grid(2, 2), |r, c| {
            if (r, c) == (1, 0) {
                Complex64::new(5.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let c = extend(&a);
        assert_eq!(c.data[[3, 2]], Complex64::new(5.0, 0.0));
        assert_eq!(c.data[[1, 0]], Complex64::new(5.0, 0.0));
        let nonzero = c.data.iter().filter(|v| v.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn subsample_three_degree_grid() {
        let a = arbitrary_pattern(120, 120, 3);
        let b = subsample(&a, 2, 2).unwrap();
        assert_eq!((b.grid.m(), b.grid.n()), (60, 60));
        assert!((b.grid.zenith_step().to_degrees() - 3.0).abs() < 1e-12);
        assert_eq!(b.data[[10, 7]], a.data[[20, 14]]);
    }

    #[test]
    fn subsample_identity_and_errors() {
        let a = arbitrary_pattern(6, 4, 9);
        assert_eq!(subsample(&a, 1, 1).unwrap(), a);
        let a = arbitrary_pattern(120, 120, 1);
        assert!(matches!(
            subsample(&a, 7, 1),
            Err(Error::NonDivisibleFactor { factor: 7, size: 120, .. })
        ));
        assert!(matches!(subsample(&a, 1, 0), Err(Error::NonDivisibleFactor { .. })));
    }

    fn small_set(freqs: Vec<f64>) -> PatternSet {
        let g = grid(3, 3);
        let mut patterns = Vec::new();
        for id in 0..2u32 {
            for &f in &freqs {
                let mut p = pattern_from(g, |_, _| Complex64::new(1.0, 0.0));
                p.element_id = id;
                p.frequency_hz = f;
                patterns.push(p);
            }
        }
        PatternSet::new(g, freqs, patterns)
    }

    #[test]
    fn complete_set_validates_clean() {
        let set = small_set(vec![27e9, 27.01e9, 27.02e9]);
        assert!(validate(&set).is_empty());
    }

    #[test]
    fn nan_is_reported_with_location() {
        let mut set = small_set(vec![27e9, 27.01e9, 27.02e9]);
        set.patterns[4].data[[2, 5]] = Complex64::new(f64::NAN, 0.0);
        let diags = validate(&set);
        assert_eq!(
            diags,
            vec![Diagnostic::NonFinite {
                element_id: 1,
                polarization: Polarization::V,
                frequency_hz: 27.01e9,
                row: 2,
                col: 5
            }]
        );
        assert!(diags[0].to_string().contains("row 2, col 5"));
    }

    #[test]
    fn non_uniform_spacing_is_reported() {
        let set = small_set(vec![27e9, 27.01e9, 27.03e9]);
        let diags = validate(&set);
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::NonUniformSpacing { .. })));
    }

    #[test]
    fn missing_duplicate_and_grid_mismatch() {
        let mut set = small_set(vec![27e9, 27.01e9, 27.02e9]);
        set.patterns.remove(0);
        let mut dup = set.patterns[0].clone();
        dup.grid = grid(2, 2);
        dup.data = Array2::zeros((3, 4));
        set.patterns.push(dup);
        let diags = validate(&set);
        assert!(diags.contains(&Diagnostic::MissingCell {
            element_id: 0,
            polarization: Polarization::V,
            frequency_hz: 27e9
        }));
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::DuplicateKey { .. })));
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::GridMismatch { .. })));
    }

    proptest! {
        #[test]
        fn extension_keeps_measured_rows(m in 2usize..12, n in 2usize..12, seed in any::<u64>()) {
            let a = arbitrary_pattern(m, n, seed);
            let c = extend(&a);
            prop_assert_eq!(c.data.slice(s![..=m, ..]).to_owned(), a.data.clone());
        }

        #[test]
        fn extension_is_antipodally_consistent(m in 2usize..12, n in 2usize..12, seed in any::<u64>()) {
            let a = arbitrary_pattern(m, n, seed);
            let c = extend(&a);
            for r in 1..m {
                for col in 0..2 * n {
                    // bit-exact copy, compare the raw representation
                    let lhs = c.data[[m + r, col]];
                    let rhs = c.data[[m - r, (col + n) % (2 * n)]];
                    prop_assert_eq!(lhs.re.to_bits(), rhs.re.to_bits());
                    prop_assert_eq!(lhs.im.to_bits(), rhs.im.to_bits());
                }
            }
        }

        #[test]
        fn subsampling_composes(
            (a_z, c_z) in (1usize..4, 1usize..4),
            (b_a, d_a) in (1usize..4, 1usize..4),
            seed in any::<u64>(),
        ) {
            let m = a_z * c_z * 2;
            let n = b_a * d_a * 3;
            let p = arbitrary_pattern(m, n, seed);
            let twice = subsample(&subsample(&p, a_z, b_a).unwrap(), c_z, d_a).unwrap();
            let once = subsample(&p, a_z * c_z, b_a * d_a).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
