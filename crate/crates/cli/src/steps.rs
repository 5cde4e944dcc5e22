//! Angle steps in degrees and the grid subsampling factors behind them.

use anyhow::{bail, Context, Result};
use eadf_core::AngularGrid;

const TOLERANCE: f64 = 1e-9;

/// Degrees between grid rows when every `factor`-th row of an `m`-row
/// half circle is kept.
fn step_of(factor: usize, m: usize) -> f64 {
    180.0 * factor as f64 / m as f64
}

fn factor_for(step_deg: f64, m: usize) -> Option<usize> {
    let exact = step_deg * m as f64 / 180.0;
    let f = exact.round();
    if f < 1.0 || (exact - f).abs() > TOLERANCE * exact.max(1.0) {
        return None;
    }
    let f = f as usize;
    (m.is_multiple_of(f) && m / f >= 2).then_some(f)
}

/// Steps (degrees) reachable on both axes of `grid`, finest first.
pub fn admissible_steps(grid: &AngularGrid) -> Vec<f64> {
    (1..=grid.m() / 2)
        .filter(|&f| grid.m().is_multiple_of(f))
        .map(|f| step_of(f, grid.m()))
        .filter(|&s| factor_for(s, grid.n()).is_some())
        .collect()
}

/// Zenith and azimuth subsampling factors for a common angle step.
pub fn factors(grid: &AngularGrid, step_deg: f64) -> Result<(usize, usize)> {
    match (factor_for(step_deg, grid.m()), factor_for(step_deg, grid.n())) {
        (Some(zf), Some(af)) if step_deg.is_finite() => Ok((zf, af)),
        _ => bail!(
            "a {step_deg}° step does not subsample the M={}, N={} grid; admissible steps: {}",
            grid.m(),
            grid.n(),
            join(&admissible_steps(grid))
        ),
    }
}

pub fn join(steps: &[f64]) -> String {
    steps.iter().map(|s| format!("{s}")).collect::<Vec<_>>().join(", ")
}

/// Comma-separated list of degrees, e.g. `3,4.5,6`.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("{s:?} is not an angle step in degrees"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_steps_of_the_reference_grid() {
        let g = AngularGrid::new(120, 120).unwrap();
        assert_eq!(
            admissible_steps(&g),
            [1.5, 3.0, 4.5, 6.0, 7.5, 9.0, 12.0, 15.0, 18.0, 22.5, 30.0, 36.0, 45.0, 60.0, 90.0]
        );
        assert_eq!(factors(&g, 4.5).unwrap(), (3, 3));
        assert_eq!(factors(&g, 60.0).unwrap(), (40, 40));
    }

    #[test]
    fn rejected_step_lists_the_alternatives() {
        let g = AngularGrid::new(120, 120).unwrap();
        let msg = factors(&g, 7.0).unwrap_err().to_string();
        assert!(msg.contains("1.5, 3, 4.5, 6, 7.5, 9"), "{msg}");
        assert!(factors(&g, 180.0).is_err());
        assert!(factors(&g, 0.0).is_err());
    }

    #[test]
    fn axes_with_different_resolution() {
        let g = AngularGrid::new(60, 90).unwrap();
        assert_eq!(factors(&g, 6.0).unwrap(), (2, 3));
        // 9° is a whole number of zenith rows but not of azimuth columns
        assert!(factors(&g, 9.0).is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("3, 4.5,60").unwrap(), [3.0, 4.5, 60.0]);
        assert!(parse_list("3,x").is_err());
    }
}
