use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sbk::maps::{compose, link_from_3point, link_from_6point};
use sbk::par;
use sbk::ratfun::RatFun;
use sbk::severi_brauer::{coordinate_point, cyclic_extension, make_surface, second_3point, sixpoint_from_sqrt};
use sbk::words::hexagon;

fn bench(c: &mut Criterion) {
    let (l, g) = cyclic_extension(2, &RatFun::var(0), "a");
    let s = make_surface(&l, &g, &RatFun::var(1)).unwrap();
    let (p, q) = (coordinate_point(&s), second_3point(&s).unwrap());
    let link3 = link_from_3point(&s, &q).unwrap();
    let six = sixpoint_from_sqrt(&s, &RatFun::var(1)).unwrap();

    let mut group = c.benchmark_group("compose");
    group.sample_size(10);
    for sequential in [true, false] {
        let label = if sequential { "sequential" } else { "parallel" };
        par::set_sequential(sequential);
        group.bench_with_input(BenchmarkId::new("link3_round_trip", label), &link3, |b, l| {
            b.iter(|| compose(&l.backward.map, &l.forward.map).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("link6_build", label), &six, |b, six| b.iter(|| link_from_6point(&s, six).unwrap()));
        group.bench_with_input(BenchmarkId::new("hexagon", label), &(&p, &q), |b, (p, q)| b.iter(|| hexagon(&s, p, q).unwrap()));
    }
    par::set_sequential(false);
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
