use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kit_core::ainfty::dual_space;
use kit_core::cc2::{cc2_differential, random_morphism};
use kit_core::fixtures;
use kit_core::homology::smith_normal_form;
use kit_core::sign_lab::{sweep, Mutation, SweepBounds};
use kit_core::strip_lab::{gamma_pde, StripOptions};
use kit_core::IntMatrix;

fn cc2(c: &mut Criterion) {
    let a = fixtures::exterior_one(8);
    let dual = dual_space(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = random_morphism(&a, &dual, &a.space, 1, 4, 0.5, &mut rng);
    c.bench_function("cc2_differential/exterior/arity5", |b| b.iter(|| cc2_differential(&a, black_box(&psi), 5)));
}

fn signs(c: &mut Criterion) {
    let bounds = SweepBounds { max_kl: 2, max_j: 2, max_n: 2, max_degree: 2 };
    c.bench_function("sign_sweep/small", |b| b.iter(|| sweep(black_box(bounds), Mutation::None)));
}

fn gamma(c: &mut Criterion) {
    let p = fixtures::strip_tanh();
    let opts = StripOptions { levels: 1, ..StripOptions::default() };
    let mut g = c.benchmark_group("gamma_pde");
    g.sample_size(10);
    g.bench_function("tanh", |b| b.iter(|| gamma_pde(black_box(&p), &opts)));
    g.finish();
}

fn snf(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = IntMatrix::zeros(30, 30);
    for i in 0..30 {
        for j in 0..30 {
            m.set(i, j, BigInt::from(rng.gen_range(-9i64..=9)));
        }
    }
    c.bench_function("smith_normal_form/30x30", |b| b.iter(|| smith_normal_form(black_box(&m))));
}

criterion_group!(benches, cc2, signs, gamma, snf);
criterion_main!(benches);
