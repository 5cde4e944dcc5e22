use criterion::{criterion_group, criterion_main, Criterion};
use eadf_bench::patch_chamber;
use eadf_core::phase_center::delay_map_from_sweep;
use eadf_core::synth::simulate_element;
use eadf_core::{fit_phase_center, DelayEstimator};
use num_complex::Complex64;

fn delay(c: &mut Criterion) {
    let freqs: Vec<f64> = (0..301).map(|i| 27e9 + i as f64 * 10e6).collect();
    let responses: Vec<Complex64> = freqs
        .iter()
        .map(|&f| Complex64::cis(-std::f64::consts::TAU * f * 0.667e-9))
        .collect();
    let est = DelayEstimator::new(&freqs).unwrap();
    c.bench_function("estimate_delay_301", |b| b.iter(|| est.estimate(&responses).unwrap()));

    let chamber = patch_chamber(30, 301, Some(60.0));
    let sweep = simulate_element(&chamber, 0).unwrap();
    let refs: Vec<_> = sweep.iter().collect();
    let mut group = c.benchmark_group("phase_center");
    group.sample_size(10);
    group.bench_function("delay_map_and_fit_m30_s301", |b| {
        b.iter(|| {
            let map = delay_map_from_sweep(&refs, &chamber.frequencies, 13.0).unwrap();
            fit_phase_center(&map).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, delay);
criterion_main!(benches);
