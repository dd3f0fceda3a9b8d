use compdyn::dynam::{
    euler_directed, euler_undirected, oapply_cpg, oapply_cpg_with, oapply_directed, oapply_directed_with,
    oapply_undirected, oapply_undirected_with, undirected_state_map, Kind, Machine, ResourceSharer,
};
use compdyn::exec::Exec;
use compdyn::finset::FinFunction;
use compdyn::random::{self, Sizes};
use compdyn::wiring::{ocompose_dwd, ocompose_uwd, ocompose_uwd_traced, DWDiagram, UWDiagram};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn kind_for(seed: u64) -> Kind {
    if seed.is_multiple_of(2) {
        Kind::Continuous
    } else {
        Kind::Discrete
    }
}

#[test]
fn directed_functoriality() {
    let sizes = Sizes::default();
    for seed in 0..60 {
        let mut rng = StdRng::seed_from_u64(seed);
        let kind = kind_for(seed);
        let (outer, inners) = random::nested_dwd(&mut rng, &sizes);
        let ms: Vec<Vec<Machine>> =
            inners.iter().map(|d| random::machines_for(&mut rng, kind, &d.signature(), &sizes)).collect();
        let flat = oapply_directed(&ocompose_dwd(&outer, &inners).unwrap(), &ms.concat()).unwrap();
        let parts: Vec<Machine> = inners.iter().zip(&ms).map(|(d, m)| oapply_directed(d, m).unwrap()).collect();
        let nested = oapply_directed(&outer, &parts).unwrap();
        assert_eq!(flat.n_states(), nested.n_states());
        for _ in 0..20 {
            let a = random::point(&mut rng, flat.n_inputs());
            let x = random::point(&mut rng, flat.n_states());
            let (u, v) = (flat.eval_dynamics(&a, &x).unwrap(), nested.eval_dynamics(&a, &x).unwrap());
            assert!(close(&u, &v, 1e-9), "seed {seed}: {u:?} vs {v:?}");
            assert!(close(&flat.eval_readout(&x).unwrap(), &nested.eval_readout(&x).unwrap(), 1e-9));
        }
    }
}

/// Sends primitive states, outer junctions and inner junctions (in that
/// order) to the states of the flattened and of the nested composite.
fn state_maps(
    outer: &UWDiagram,
    inners: &[UWDiagram],
    sharers: &[Vec<ResourceSharer>],
) -> (FinFunction, FinFunction) {
    let flat_sharers = sharers.concat();
    let (flat_d, trace) = ocompose_uwd_traced(outer, inners).unwrap();
    let flat_po = undirected_state_map(&flat_d, &flat_sharers).unwrap();
    let to_flat = flat_po.inj_left.copair(&trace.compose(&flat_po.inj_right).unwrap()).unwrap();

    let parts: Vec<ResourceSharer> = inners.iter().zip(sharers).map(|(d, s)| oapply_undirected(d, s).unwrap()).collect();
    let outer_po = undirected_state_map(outer, &parts).unwrap();
    let mut prim = Vec::new();
    let mut inner_j = Vec::new();
    let mut offset = 0;
    for ((d, s), part) in inners.iter().zip(sharers).zip(&parts) {
        let po = undirected_state_map(d, s).unwrap();
        let lift = |k: usize| outer_po.inj_left.as_slice()[offset + k];
        prim.extend(po.inj_left.as_slice().iter().map(|&k| lift(k)));
        inner_j.extend(po.inj_right.as_slice().iter().map(|&k| lift(k)));
        offset += part.n_states();
    }
    let map: Vec<usize> = prim.into_iter().chain(outer_po.inj_right.as_slice().iter().copied()).chain(inner_j).collect();
    let to_nested = FinFunction::new(map, outer_po.apex_size).unwrap();
    (to_flat, to_nested)
}

/// The bijection `nested -> flat` induced by two surjections with equal kernels.
fn align(to_flat: &FinFunction, to_nested: &FinFunction) -> Vec<usize> {
    assert!(to_flat.is_surjective() && to_nested.is_surjective());
    assert_eq!(to_flat.cod(), to_nested.cod());
    let mut bij = vec![usize::MAX; to_nested.cod()];
    for (&f, &n) in to_flat.as_slice().iter().zip(to_nested.as_slice()) {
        assert!(bij[n] == usize::MAX || bij[n] == f, "kernels differ");
        bij[n] = f;
    }
    bij
}

#[test]
fn undirected_functoriality() {
    let sizes = Sizes::default();
    for seed in 0..60 {
        let mut rng = StdRng::seed_from_u64(seed);
        let kind = kind_for(seed);
        let (outer, inners) = random::nested_uwd(&mut rng, &sizes);
        let sharers: Vec<Vec<ResourceSharer>> =
            inners.iter().map(|d| random::sharers_for(&mut rng, kind, &d.signature(), &sizes)).collect();
        let flat = oapply_undirected(&ocompose_uwd(&outer, &inners).unwrap(), &sharers.concat()).unwrap();
        let parts: Vec<ResourceSharer> =
            inners.iter().zip(&sharers).map(|(d, s)| oapply_undirected(d, s).unwrap()).collect();
        let nested = oapply_undirected(&outer, &parts).unwrap();

        let (to_flat, to_nested) = state_maps(&outer, &inners, &sharers);
        let bij = align(&to_flat, &to_nested);
        assert_eq!(flat.n_states(), nested.n_states());
        let ported: Vec<usize> = nested.portmap().as_slice().iter().map(|&s| bij[s]).collect();
        assert_eq!(flat.portmap().as_slice(), &ported[..]);
        for _ in 0..20 {
            let y = random::point(&mut rng, nested.n_states());
            let mut x = vec![0.0; flat.n_states()];
            for (n, &f) in bij.iter().enumerate() {
                x[f] = y[n];
            }
            let (u, v) = (flat.eval_dynamics(&x).unwrap(), nested.eval_dynamics(&y).unwrap());
            let v: Vec<f64> = (0..v.len()).map(|f| v[bij.iter().position(|&b| b == f).unwrap()]).collect();
            assert!(close(&u, &v, 1e-9), "seed {seed}: {u:?} vs {v:?}");
        }
    }
}

#[test]
fn directed_euler_is_natural() {
    let sizes = Sizes::default();
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random::dwd(&mut rng, 2, 2, 1, &sizes);
        let ms = random::machines_for(&mut rng, Kind::Continuous, &d.signature(), &sizes);
        let h = rng.random_range(0.001..0.1);
        let a = euler_directed(&oapply_directed(&d, &ms).unwrap(), h).unwrap();
        let stepped: Vec<Machine> = ms.iter().map(|m| euler_directed(m, h).unwrap()).collect();
        let b = oapply_directed(&d, &stepped).unwrap();
        let (mut x, mut y) = (random::point(&mut rng, a.n_states()), vec![]);
        y.clone_from(&x);
        for _ in 0..100 {
            let input = random::point(&mut rng, 2);
            x = a.eval_dynamics(&input, &x).unwrap();
            y = b.eval_dynamics(&input, &y).unwrap();
            assert!(close(&x, &y, 1e-12), "seed {seed}");
        }
    }
}

#[test]
fn undirected_euler_is_natural() {
    let sizes = Sizes::default();
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random::uwd(&mut rng, 2, 1, &sizes);
        let ss = random::sharers_for(&mut rng, Kind::Continuous, &d.signature(), &sizes);
        let h = rng.random_range(0.001..0.1);
        let a = euler_undirected(&oapply_undirected(&d, &ss).unwrap(), h).unwrap();
        let stepped: Vec<ResourceSharer> = ss.iter().map(|s| euler_undirected(s, h).unwrap()).collect();
        let b = oapply_undirected(&d, &stepped).unwrap();
        assert_eq!(a.portmap(), b.portmap());
        let mut x = random::point(&mut rng, a.n_states());
        let mut y = x.clone();
        for _ in 0..100 {
            x = a.eval_dynamics(&x).unwrap();
            y = b.eval_dynamics(&y).unwrap();
            assert!(close(&x, &y, 1e-12), "seed {seed}");
        }
    }
}

#[test]
fn cpg_fast_path_matches_directed_view() {
    let sizes = Sizes { boxes: 9, ports: 4, states: 3, ..Sizes::default() };
    for seed in 0..40 {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random::cpg(&mut rng, seed as usize % 5, 1, &sizes);
        let ms: Vec<Machine> =
            g.signature().into_iter().map(|k| random::machine(&mut rng, kind_for(seed), k, k, &sizes)).collect();
        let fast = oapply_cpg(&g, &ms).unwrap();
        let slow = oapply_directed(&g.to_dwd(), &ms).unwrap();
        for _ in 0..20 {
            let a = random::point(&mut rng, g.n_outer());
            let x = random::point(&mut rng, fast.n_states());
            assert!(close(&fast.eval_dynamics(&a, &x).unwrap(), &slow.eval_dynamics(&a, &x).unwrap(), 1e-12));
            assert!(close(&fast.eval_readout(&x).unwrap(), &slow.eval_readout(&x).unwrap(), 1e-12));
        }
    }
}

#[test]
fn identity_diagrams_act_as_identities() {
    let sizes = Sizes::default();
    for seed in 0..30 {
        let mut rng = StdRng::seed_from_u64(seed);
        let (m, n) = (seed as usize % 3, seed as usize % 4);
        let mach = random::machine(&mut rng, Kind::Continuous, m, n, &sizes);
        let c = oapply_directed(&DWDiagram::identity(m, n), std::slice::from_ref(&mach)).unwrap();
        let a = random::point(&mut rng, m);
        let x = random::point(&mut rng, mach.n_states());
        assert!(close(&c.eval_dynamics(&a, &x).unwrap(), &mach.eval_dynamics(&a, &x).unwrap(), 1e-12));
        assert!(close(&c.eval_readout(&x).unwrap(), &mach.eval_readout(&x).unwrap(), 1e-12));

        let s = random::sharer(&mut rng, Kind::Discrete, n, &sizes);
        let d = UWDiagram::identity(n);
        let po = undirected_state_map(&d, std::slice::from_ref(&s)).unwrap();
        let c = oapply_undirected(&d, std::slice::from_ref(&s)).unwrap();
        // the identity glues no two states, so the state map is a bijection
        assert!(po.inj_left.is_bijective());
        let x = random::point(&mut rng, s.n_states());
        let lifted = c.eval_dynamics(&po.inj_left.pushforward_vec(&x).unwrap()).unwrap();
        assert!(close(&po.inj_left.pullback_vec(&lifted).unwrap(), &s.eval_dynamics(&x).unwrap(), 1e-12));
    }
}

#[test]
fn state_counts() {
    let sizes = Sizes::default();
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random::dwd(&mut rng, 1, 1, 0, &sizes);
        let ms = random::machines_for(&mut rng, Kind::Discrete, &d.signature(), &sizes);
        let c = oapply_directed(&d, &ms).unwrap();
        assert_eq!(c.n_states(), ms.iter().map(Machine::n_states).sum::<usize>());

        let d = random::uwd(&mut rng, 2, 0, &sizes);
        let ss = random::sharers_for(&mut rng, Kind::Continuous, &d.signature(), &sizes);
        let c = oapply_undirected(&d, &ss).unwrap();
        let po = undirected_state_map(&d, &ss).unwrap();
        assert_eq!(c.n_states(), po.apex_size);
        assert_eq!(c.portmap(), &d.junc_out_fn().compose(&po.inj_right).unwrap());
    }
}

#[test]
fn parallel_and_sequential_agree_exactly() {
    let sizes = Sizes { boxes: 8, ..Sizes::default() };
    for seed in 0..20 {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random::dwd(&mut rng, 2, 2, 1, &sizes);
        let ms = random::machines_for(&mut rng, Kind::Continuous, &d.signature(), &sizes);
        let (s, p) = (oapply_directed(&d, &ms).unwrap(), oapply_directed_with(&d, &ms, Exec::Parallel).unwrap());
        let a = random::point(&mut rng, 2);
        let x = random::point(&mut rng, s.n_states());
        assert_eq!(s.eval_dynamics(&a, &x).unwrap(), p.eval_dynamics(&a, &x).unwrap());

        let u = random::uwd(&mut rng, 2, 1, &sizes);
        let ss = random::sharers_for(&mut rng, Kind::Discrete, &u.signature(), &sizes);
        let (s, p) = (oapply_undirected(&u, &ss).unwrap(), oapply_undirected_with(&u, &ss, Exec::Parallel).unwrap());
        let x = random::point(&mut rng, s.n_states());
        assert_eq!(s.eval_dynamics(&x).unwrap(), p.eval_dynamics(&x).unwrap());

        let g = random::cpg(&mut rng, 3, 1, &sizes);
        let ms: Vec<Machine> =
            g.signature().into_iter().map(|k| random::machine(&mut rng, Kind::Continuous, k, k, &sizes)).collect();
        let (s, p) = (oapply_cpg(&g, &ms).unwrap(), oapply_cpg_with(&g, &ms, Exec::Parallel).unwrap());
        let a = random::point(&mut rng, 3);
        let x = random::point(&mut rng, s.n_states());
        assert_eq!(s.eval_dynamics(&a, &x).unwrap(), p.eval_dynamics(&a, &x).unwrap());
    }
}
