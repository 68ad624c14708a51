use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsd_core::analysis::{wigner, PhaseSpaceGrid};
use qsd_core::detectors::{DetectorKind, DetectorModel};
use qsd_core::optics::{beam_splitter_unitary, BeamSplitterParams};
use qsd_core::{realistic_truncation, ClickPattern, Correction, CutoffDim, QsdConfig, C64};

fn splitter(c: &mut Criterion) {
    let params = BeamSplitterParams::from_transmittance(0.5).unwrap();
    let mut group = c.benchmark_group("beam_splitter_unitary");
    for levels in [8, 16, 24] {
        let cut = CutoffDim::new(levels).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(levels), &cut, |b, &cut| {
            b.iter(|| beam_splitter_unitary(params, cut))
        });
    }
    group.finish();
}

fn truncation(c: &mut Criterion) {
    let mut group = c.benchmark_group("realistic_truncation");
    for (kind, mean) in [
        (DetectorKind::Cpc, 1.0),
        (DetectorKind::Spc, 1.0),
        (DetectorKind::Cpc, 4.0),
    ] {
        let d = DetectorModel::new(kind, 0.7, kind.typical_dark_rate(), 1e-8).unwrap();
        let cfg = QsdConfig::new(C64::new(f64::sqrt(mean), 0.0), d).unwrap();
        group.bench_function(format!("{kind}_alpha_sq_{mean}"), |b| {
            b.iter(|| {
                realistic_truncation(&cfg, ClickPattern::standard(), Correction::Auto).unwrap()
            })
        });
    }
    group.finish();
}

fn wigner_grid(c: &mut Criterion) {
    let d = DetectorModel::new(DetectorKind::Cpc, 0.7, 100.0, 1e-8).unwrap();
    let cfg = QsdConfig::new(C64::new(0.0, 0.8f64.sqrt()), d).unwrap();
    let rho = realistic_truncation(&cfg, ClickPattern::standard(), Correction::Auto)
        .unwrap()
        .state;
    let grid = PhaseSpaceGrid::default();
    c.bench_function("wigner_201x201", |b| {
        b.iter(|| wigner(&rho, &grid).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = splitter, truncation, wigner_grid
}
criterion_main!(benches);
