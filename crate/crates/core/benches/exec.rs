use std::hint::black_box;

use compdyn::dynam::{oapply_cpg_with, oapply_undirected_with, Kind};
use compdyn::exec::{self, Exec};
use compdyn::modelspec::{builtin, Model};
use compdyn::random::{self, Sizes};
use compdyn::wiring::{grid, UWDiagram};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn heat_step(c: &mut Criterion) {
    let params = [("alpha".to_string(), 0.1)].into_iter().collect();
    let Model::Machine(cell) = builtin("heat_node", &params).unwrap().instantiate().unwrap() else {
        unreachable!()
    };
    let mut group = c.benchmark_group("heat_grid_step");
    for side in [16, 64, 128] {
        let g = grid(side, side).unwrap();
        let cells = vec![cell.clone(); side * side];
        let mut rng = StdRng::seed_from_u64(1);
        let x = random::point(&mut rng, side * side);
        let boundary = vec![0.0; g.n_outer()];
        for (name, policy) in POLICIES {
            let sys = oapply_cpg_with(&g, &cells, policy).unwrap();
            group.bench_with_input(BenchmarkId::new(name, side), &x, |b, x| {
                b.iter(|| sys.eval_dynamics(black_box(&boundary), black_box(x)).unwrap())
            });
        }
    }
    group.finish();
}

fn shared_chain(c: &mut Criterion) {
    // n two-port sharers in a ring, each sharing one state with the next
    let mut group = c.benchmark_group("sharer_ring_step");
    let sizes = Sizes { states: 8, ..Sizes::default() };
    for n in [64, 512] {
        let boxes: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let d = UWDiagram::new(n, &boxes, vec![]).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let sharers: Vec<_> = (0..n).map(|_| random::sharer(&mut rng, Kind::Continuous, 2, &sizes)).collect();
        for (name, policy) in POLICIES {
            let sys = oapply_undirected_with(&d, &sharers, policy).unwrap();
            let x = random::point(&mut rng, sys.n_states());
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| sys.eval_dynamics(black_box(x)).unwrap())
            });
        }
    }
    group.finish();
}

fn batch_eval(c: &mut Criterion) {
    // independent evaluation points, as in a parameter or initial-value sweep
    let sizes = Sizes { boxes: 6, ..Sizes::default() };
    let mut rng = StdRng::seed_from_u64(3);
    let d = random::dwd(&mut rng, 2, 2, 4, &sizes);
    let ms = random::machines_for(&mut rng, Kind::Continuous, &d.signature(), &sizes);
    let sys = compdyn::dynam::oapply_directed(&d, &ms).unwrap();
    let points: Vec<(Vec<f64>, Vec<f64>)> =
        (0..4096).map(|_| (random::point(&mut rng, 2), random::point(&mut rng, sys.n_states()))).collect();
    let mut group = c.benchmark_group("batch_eval");
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| exec::map(policy, black_box(&points), |(a, x)| sys.eval_dynamics(a, x).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, heat_step, shared_chain, batch_eval);
criterion_main!(benches);
