mod common;

use common::{max_abs, max_diff, random_matrix, random_pattern, Series};
use eadf_core::metrics::Cdf;
use eadf_core::phase_center::DelayMap;
use eadf_core::{
    compensate, estimate_delay, extend, fit_phase_center, forward, reconstruct, rem, subsample,
    truncate, unit_vector, AngularGrid, Complex64, Direction, ExtendedPattern, Vec3,
    SPEED_OF_LIGHT,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = AngularGrid> {
    (2usize..12, 2usize..12).prop_map(|(m, n)| AngularGrid::new(m, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parseval(grid in grid_strategy(), seed in any::<u64>()) {
        let p = random_pattern(grid, seed);
        let ext = extend(&p);
        let q = forward(&ext);
        let lhs = q.power();
        let rhs: f64 = ext.data.iter().map(|v| v.norm_sqr()).sum::<f64>()
            / (4 * grid.m() * grid.n()) as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn linearity(grid in grid_strategy(), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (r, c) = grid.extended_shape();
        let c1 = random_matrix(r, c, seed);
        let c2 = random_matrix(r, c, seed.wrapping_add(1));
        let (a, b) = (Complex64::new(a, 0.5), Complex64::new(-0.25, b));
        let combo = c1.mapv(|v| v * a) + c2.mapv(|v| v * b);
        let q = |d: Array2<Complex64>| forward(&ExtendedPattern::new(grid, d).unwrap()).to_full();
        let lhs = q(combo);
        let rhs = q(c1).mapv(|v| v * a) + q(c2).mapv(|v| v * b);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn two_pi_periodicity(grid in grid_strategy(), seed in any::<u64>(), t in 0.0f64..6.3, p in 0.0f64..6.3) {
        let q = forward(&extend(&random_pattern(grid, seed)));
        let base = reconstruct(&q, Direction::new(t, p));
        let scale = base.norm().max(1.0);
        let tau = std::f64::consts::TAU;
        prop_assert!((reconstruct(&q, Direction::new(t + tau, p)) - base).norm() <= 1e-12 * scale);
        let unwrapped = Direction { theta: t, phi: p + tau };
        prop_assert!((reconstruct(&q, unwrapped) - base).norm() <= 1e-12 * scale);
    }

    #[test]
    fn antipodal_identity_of_band_limited_interpolants(
        kt in 1usize..6, kp in 1usize..6, seed in any::<u64>(), t in 0.0f64..6.3, p in 0.0f64..6.3,
    ) {
        let grid = AngularGrid::new(kt + 2, kp + 3).unwrap();
        let series = Series::random(kt, kp, seed);
        let q = forward(&extend(&series.sample(grid, 1e9)));
        let a = reconstruct(&q, Direction::new(t, p));
        let b = reconstruct(&q, Direction::new(std::f64::consts::TAU - t, p + std::f64::consts::PI));
        prop_assert!((a - b).norm() <= 1e-10 * series.peak_on(&grid).max(1.0));
    }

    #[test]
    fn truncation_is_monotone_and_bounded(seed in any::<u64>(), f1 in 0.05f64..1.0, f2 in 0.05f64..1.0) {
        let grid = AngularGrid::new(6, 5).unwrap();
        let q = forward(&extend(&random_pattern(grid, seed)));
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let (tl, th) = (truncate(&q, lo).unwrap(), truncate(&q, hi).unwrap());
        prop_assert!(tl.power() <= th.power() * (1.0 + 1e-12));
        // pointwise error² ≤ discarded power × 4MN at every grid direction
        let discarded = q.power() - tl.power();
        let bound = discarded * (4 * grid.m() * grid.n()) as f64;
        for r in 0..=grid.m() {
            for c in 0..2 * grid.n() {
                let d = Direction::new(grid.zenith(r), grid.azimuth(c));
                let e = (reconstruct(&q, d) - reconstruct(&tl, d)).norm_sqr();
                prop_assert!(e <= bound * (1.0 + 1e-9) + 1e-24);
            }
        }
    }

    #[test]
    fn subsample_composes(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..3, d in 1usize..3) {
        let grid = AngularGrid::new(2 * a * c * 2, 2 * b * d * 2).unwrap();
        let p = random_pattern(grid, seed);
        let twice = subsample(&subsample(&p, a, b).unwrap(), c, d).unwrap();
        prop_assert_eq!(twice, subsample(&p, a * c, b * d).unwrap());
    }

    #[test]
    fn compensation_round_trip_and_additivity(
        seed in any::<u64>(),
        d1 in prop::array::uniform3(-0.3f64..0.3),
        d2 in prop::array::uniform3(-0.3f64..0.3),
    ) {
        let grid = AngularGrid::new(8, 8).unwrap();
        let p = random_pattern(grid, seed);
        let lambda = eadf_core::wavelength(28.5e9);
        let (d1, d2) = (Vec3::from(d1), Vec3::from(d2));
        let back = compensate(&compensate(&p, d1, lambda), -d1, lambda);
        prop_assert!(max_diff(&back.data, &p.data) <= 1e-12 * max_abs(&p.data));
        let chained = compensate(&compensate(&p, d1, lambda), d2, lambda);
        let joint = compensate(&p, d1 + d2, lambda);
        prop_assert!(max_diff(&chained.data, &joint.data) <= 1e-12 * max_abs(&p.data));
    }

    #[test]
    fn ls_residuals_are_orthogonal_to_the_design(seed in any::<u64>()) {
        let grid = AngularGrid::new(24, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let dtau: f64 = rng.random_range(-10e-9..10e-9);
        let mut delays = Array2::from_elem(grid.shape(), f64::NAN);
        let mut mask = Array2::from_elem(grid.shape(), false);
        for r in 0..=grid.m() {
            for c in 0..2 * grid.n() {
                if rng.random_bool(0.6) {
                    let u = unit_vector(grid.direction(r, c));
                    let noise: f64 = rng.random_range(-5e-12..5e-12);
                    delays[[r, c]] = dtau - u.dot(&d) / SPEED_OF_LIGHT + noise;
                    mask[[r, c]] = true;
                }
            }
        }
        let map = DelayMap { grid, delays: delays.clone(), mask: mask.clone(), diagnostics: vec![] };
        let est = fit_phase_center(&map).unwrap();
        // residual in distance units against columns [u_x, u_y, u_z, -1]
        let mut dots = [0.0f64; 4];
        let mut scale = [0.0f64; 4];
        for ((r, c), &m) in mask.indexed_iter() {
            if !m { continue; }
            let u = unit_vector(grid.direction(r, c));
            let model = est.delta_tau_hat - u.dot(&est.d_hat) / SPEED_OF_LIGHT;
            let res = SPEED_OF_LIGHT * (model - delays[[r, c]]);
            for (i, col) in [u.x, u.y, u.z, -1.0].into_iter().enumerate() {
                dots[i] += res * col;
                scale[i] += col * col;
            }
        }
        // cosine between the residual vector and each design column
        let res_norm = SPEED_OF_LIGHT * est.rms_residual * (est.n_directions_used as f64).sqrt();
        for i in 0..4 {
            let cosine = dots[i] / (res_norm * scale[i].sqrt());
            prop_assert!(cosine.abs() <= 1e-9, "column {i}: cosine {cosine}");
        }
    }

    #[test]
    fn rem_is_scale_covariant(
        tr in -5.0f64..5.0, ti in -5.0f64..5.0, er in -5.0f64..5.0, ei in -5.0f64..5.0,
        k in 0usize..4,
    ) {
        prop_assume!(tr != 0.0 || ti != 0.0);
        let (t, e) = (Complex64::new(tr, ti), Complex64::new(er, ei));
        // powers of two and the imaginary unit scale without rounding
        let c = [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, -4.0)][k];
        prop_assert_eq!(rem(c * t, c * e).unwrap(), rem(t, e).unwrap());
    }

    #[test]
    fn rem_is_scale_covariant_for_any_scale(
        tr in -5.0f64..5.0, ti in -5.0f64..5.0, er in -5.0f64..5.0, ei in -5.0f64..5.0,
        cr in -100.0f64..100.0, ci in -100.0f64..100.0,
    ) {
        prop_assume!(tr.hypot(ti) > 1e-3 && cr.hypot(ci) > 1e-3);
        let (t, e, c) = (Complex64::new(tr, ti), Complex64::new(er, ei), Complex64::new(cr, ci));
        let base = rem(t, e).unwrap();
        // arbitrary complex scales only round in the last bits
        prop_assert!((rem(c * t, c * e).unwrap() - base).abs() <= 1e-14 * base.max(1.0));
    }

    #[test]
    fn delay_argmax_ignores_global_scaling(seed in any::<u64>(), tau in -20e-9f64..20e-9, sr in -3.0f64..3.0, si in -3.0f64..3.0) {
        prop_assume!(sr.abs() + si.abs() > 1e-3);
        let freqs: Vec<f64> = (0..41).map(|i| 27e9 + i as f64 * 25e6).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let resp: Vec<Complex64> = freqs.iter().map(|&f| {
            Complex64::cis(-std::f64::consts::TAU * f * tau) * rng.random_range(0.5..1.5)
        }).collect();
        let s = Complex64::new(sr, si);
        let scaled: Vec<Complex64> = resp.iter().map(|v| v * s).collect();
        let a = estimate_delay(&resp, &freqs).unwrap();
        let b = estimate_delay(&scaled, &freqs).unwrap();
        prop_assert!((a - b).abs() <= 1e-18, "{a} vs {b}");
    }

    #[test]
    fn cdf_ignores_direction_order(mut values in prop::collection::vec(-150.0f64..30.0, 1..200), seed in any::<u64>()) {
        let a = Cdf::from_db(values.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..values.len()).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let b = Cdf::from_db(values.clone());
        prop_assert_eq!(a.points(), b.points());
        values.sort_by(f64::total_cmp);
        prop_assert_eq!(a.median(), values[(values.len() - 1) / 2]);
    }
}
