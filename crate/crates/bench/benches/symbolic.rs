use carnot_core::algebra::StratifiedLieAlgebra;
use carnot_core::group::CarnotGroup;
use carnot_core::opcalc::{Pbw, RewriteStrategy};
use carnot_core::rumin::RuminComplex;
use carnot_core::scalar::Rat;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn rumin(c: &mut Criterion) {
    for alg in [StratifiedLieAlgebra::heisenberg(1), StratifiedLieAlgebra::engel()] {
        c.bench_function(&format!("rumin_build/{}", alg.name()), |b| b.iter(|| RuminComplex::build(black_box(&alg)).unwrap()));
        let cx = RuminComplex::build(&alg).unwrap();
        c.bench_function(&format!("rumin_verify/{}", alg.name()), |b| b.iter(|| cx.verify()));
    }
}

fn pbw(c: &mut Criterion) {
    let alg = StratifiedLieAlgebra::engel();
    let pbw = Pbw::new(&alg);
    let word = [3u8, 2, 1, 0, 3, 1, 0, 2];
    for s in [RewriteStrategy::LeftmostInversion, RewriteStrategy::RightmostInversion] {
        c.bench_function(&format!("pbw_normal_order/engel/{s:?}"), |b| b.iter(|| pbw.normal_order(black_box(&word), s)));
    }
}

fn group_law(c: &mut Criterion) {
    let group = CarnotGroup::new(StratifiedLieAlgebra::engel());
    let p: Vec<Rat> = [1, -2, 3, 5].iter().map(|&v| Rat::new(v.into(), 3.into())).collect();
    let q: Vec<Rat> = [-4, 1, 2, -1].iter().map(|&v| Rat::new(v.into(), 7.into())).collect();
    c.bench_function("bch_product/engel/rational", |b| b.iter(|| group.product(black_box(&p), black_box(&q)).unwrap()));
}

criterion_group!(benches, rumin, pbw, group_law);
criterion_main!(benches);
