use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rlldpc::decoder::{batch_decode, batch_decode_sequential, DecoderConfig, Frame};
use rlldpc::ensemble::snr_for_efficiency;
use rlldpc::matrix::{build_base, Scale};
use rlldpc::sim::simulate_frame_data;

fn bench_batch(c: &mut Criterion) {
    let code = build_base(Scale::new(1, 25), 1).expect("scale 1/25 is valid");
    let h = &code.matrix;
    let snr = snr_for_efficiency(0.02, 0.90).unwrap();
    let frames: Vec<Frame> = (0..8)
        .map(|f| {
            let d = simulate_frame_data(h, snr, 1, 0, f).unwrap();
            (d.llrs, d.syndrome)
        })
        .collect();
    let cfg = DecoderConfig {
        max_iterations: 50,
        ..Default::default()
    };
    let mut group = c.benchmark_group("batch_decode_n40000");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", frames.len()), &frames, |b, fr| {
        b.iter(|| batch_decode(h, fr, &cfg))
    });
    group.bench_with_input(BenchmarkId::new("sequential", frames.len()), &frames, |b, fr| {
        b.iter(|| batch_decode_sequential(h, fr, &cfg))
    });
    group.finish();
}

criterion_group!(benches, bench_batch);
criterion_main!(benches);
