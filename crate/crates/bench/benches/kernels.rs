use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gsmvlc::channel::{build_gain_matrix, osnr_to_sigma, Geometry};
use gsmvlc::demapper::Demapper;
use gsmvlc::gsm::{ConstellationKind, GsmConfig, GsmConstellation};
use gsmvlc::ldpc::{encode, BpDecoder};
use gsmvlc::link::{CodeSpec, LinkConfig, LinkSystem, StopRule};
use gsmvlc::protograph::{lift, make_ar4ja, CodeFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_lift(c: &mut Criterion) {
    let base = make_ar4ja(0);
    c.bench_function("lift ar4ja Z=1800", |b| b.iter(|| lift(black_box(&base), 1800, 1).unwrap()));
}

fn bench_decode(c: &mut Criterion) {
    let code = lift(&make_ar4ja(0), 1800, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    let cw = encode(&code, &info).unwrap();
    let llr: Vec<f64> = (0..code.n())
        .map(|i| {
            if code.punctured_bits().contains(&i) {
                0.0
            } else {
                let s = 1.0 - 2.0 * cw.bits[i] as f64;
                2.0 * s + 1.2 * rng.random_range(-1.0..1.0)
            }
        })
        .collect();
    c.bench_function("bp 20 iterations ar4ja Z=1800", |b| {
        b.iter_batched(
            || BpDecoder::new(&code),
            |mut dec| dec.run(&code, black_box(&llr), 20),
            BatchSize::LargeInput,
        )
    });
}

fn bench_demap(c: &mut Criterion) {
    let h = build_gain_matrix(&Geometry::default()).unwrap();
    for m in [2, 4] {
        let con = GsmConstellation::build(GsmConfig::new(4, 2, m, 1.0).unwrap(), ConstellationKind::SserGsm).unwrap();
        let dem = Demapper::new(&con, &h);
        let sigma = osnr_to_sigma(&h, &con, 0.5, 6.0);
        let y = dem.point(3).to_vec();
        let la = vec![0.5; con.rho()];
        let mut metric = vec![0.0; dem.size()];
        let mut out = vec![0.0; con.rho()];
        c.bench_function(&format!("demap one symbol rho={}", con.rho()), |b| {
            b.iter(|| dem.extrinsic_into(black_box(&y), sigma, &la, &mut metric, &mut out))
        });
    }
}

fn bench_frame(c: &mut Criterion) {
    let sys = LinkSystem::new(&LinkConfig {
        code: CodeSpec { family: CodeFamily::Ar4ja, e: 0, z: 1800, info_bits: Some(3600) },
        kind: ConstellationKind::SserGsm,
        gsm: GsmConfig::new(4, 2, 2, 1.0).unwrap(),
        geometry: Geometry::default(),
        demap_mode: Default::default(),
        osnr_db: vec![8.0],
        g1: 20,
        g2: 4,
        stop: StopRule::default(),
        seed: 1,
    })
    .unwrap();
    let sigma = sys.sigma(8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let info: Vec<u8> = (0..sys.code().k()).map(|_| rng.random_range(0..2u8)).collect();
    let mut group = c.benchmark_group("link");
    group.sample_size(10);
    group.bench_function("frame ar4ja Z=1800 at 8 dB", |b| b.iter(|| sys.run_frame(&info, sigma, &mut rng).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_lift, bench_decode, bench_demap, bench_frame);
criterion_main!(benches);
