use proptest::prelude::*;

use ringbal::gapcover::{Convention, CoverFamily};
use ringbal::potentials::{
    all_hop_potentials, brute_force_expected_map, hop_potential, ExpectedMap,
};
use ringbal::process::{gap, ProcessState, Simulation};
use ringbal::rng::child_stream;
use ringbal::{ProcessKind, Topology, TopologyKind, WeightDistribution};

fn loads(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (5..=max_n).prop_flat_map(|n| prop::collection::vec(-100.0f64..100.0, n))
}

fn process() -> impl Strategy<Value = ProcessKind> {
    prop_oneof![
        Just(ProcessKind::Averaging),
        Just(ProcessKind::TwoChoice),
        (0.0f64..=1.0).prop_map(|beta| ProcessKind::Hybrid { beta }),
    ]
}

fn weights() -> impl Strategy<Value = WeightDistribution> {
    prop_oneof![
        Just(WeightDistribution::Unit),
        Just(WeightDistribution::UniformSecondMomentOne),
        Just(WeightDistribution::ExponentialSecondMomentOne),
    ]
}

fn topology() -> impl Strategy<Value = TopologyKind> {
    prop_oneof![Just(TopologyKind::Cycle), Just(TopologyKind::Harary2)]
}

fn run(
    kind: TopologyKind,
    x: &[f64],
    process: ProcessKind,
    w: WeightDistribution,
    seed: u64,
    steps: u64,
) -> ProcessState {
    let t = Topology::new(kind, x.len()).unwrap();
    let mut sim = Simulation::new(t, process, &w, child_stream(seed, 0))
        .unwrap()
        .with_state(ProcessState::from_loads(x.to_vec()))
        .unwrap();
    sim.advance(steps);
    sim.state().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_load_is_conserved(x in loads(40), p in process(), w in weights(), kind in topology(), seed: u64) {
        let s = run(kind, &x, p, w, seed, 500);
        prop_assert_eq!(s.t(), 500);
        prop_assert!(s.conservation_residual().abs() <= s.conservation_budget());
    }

    #[test]
    fn averaging_commutes_with_shifts(x in loads(30), c in -1e3f64..1e3, w in weights(), seed: u64) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let a = run(TopologyKind::Cycle, &x, ProcessKind::Averaging, w, seed, 300);
        let b = run(TopologyKind::Cycle, &shifted, ProcessKind::Averaging, w, seed, 300);
        for (u, v) in a.loads().iter().zip(b.loads()) {
            prop_assert!((u + c - v).abs() <= 1e-9 * (1.0 + c.abs() + u.abs()));
        }
    }

    #[test]
    fn gap_is_shift_invariant_and_scales(x in loads(40), c in -1e3f64..1e3, a in -10.0f64..10.0) {
        let g = gap(&x);
        prop_assert!(g >= 0.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        prop_assert!((gap(&shifted) - g).abs() <= 1e-9 * (g + c.abs()));
        let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
        prop_assert!((gap(&scaled) - a.abs() * g).abs() <= 1e-9 * (1.0 + a.abs() * g));
    }

    #[test]
    fn potentials_respect_ring_symmetries(x in loads(40), r in 0usize..40) {
        let n = x.len();
        let phi = all_hop_potentials(&x);
        let rotated: Vec<f64> = (0..n).map(|i| x[(i + r) % n]).collect();
        let reversed: Vec<f64> = x.iter().rev().copied().collect();
        let rot = all_hop_potentials(&rotated);
        let rev = all_hop_potentials(&reversed);
        let mean = x.iter().sum::<f64>() / n as f64;
        let spread: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let scale = 1.0 + phi.max_abs();
        for k in 1..n {
            prop_assert!((phi.get(k) - phi.get(n - k)).abs() <= 1e-9 * scale);
            prop_assert!((phi.get(k) - rot.get(k)).abs() <= 1e-9 * scale);
            prop_assert!((phi.get(k) - rev.get(k)).abs() <= 1e-9 * scale);
            prop_assert_eq!(phi.get(k), hop_potential(&x, k).unwrap());
        }
        // Σ_k φ_k = 2n·Σ_i (x_i − x̄)²
        let total: f64 = phi.values().iter().sum();
        prop_assert!((total - 2.0 * n as f64 * spread).abs() <= 1e-9 * (1.0 + total));
    }

    #[test]
    fn closed_form_matches_enumeration(x in loads(24), w in 0.0f64..3.0, kind in topology()) {
        let t = Topology::new(kind, x.len()).unwrap();
        let closed = ExpectedMap::for_topology(&t).apply(&all_hop_potentials(&x), w * w).unwrap();
        let brute = brute_force_expected_map(&x, &t, w);
        let scale = brute.max_abs().max(1.0);
        for (a, b) in closed.values().iter().zip(brute.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn covering_inequalities_hold(x in (3usize..48).prop_flat_map(|n| prop::collection::vec(-50.0f64..50.0, n))) {
        let n = x.len();
        let mut conventions = vec![Convention::General];
        if n.is_power_of_two() {
            conventions.push(Convention::PowerOfTwo);
        }
        for c in conventions {
            let f = CoverFamily::new(n, c).unwrap();
            for k in f.union_levels() {
                for i in 0..n {
                    let r = f.check_union(&x, k, i).unwrap();
                    prop_assert!(r.holds(), "union k={} i={}: {:?}", k, i, r);
                }
            }
            for k in f.edge_sum_levels() {
                let r = f.check_sum_of_edges(&x, k).unwrap();
                prop_assert!(r.holds(), "edge sum k={}: {:?}", k, r);
            }
            prop_assert!(f.check_closing_step(&x).holds());
            prop_assert!(f.chained_bound(&x).holds());
        }
    }

    #[test]
    fn cover_levels_partition_the_ring(n in 3usize..200, i in 0usize..200) {
        let f = CoverFamily::for_n(n).unwrap();
        for k in 0..=f.top_level() {
            let set = f.set(k, i).unwrap();
            let mut m = set.members.clone();
            m.sort_unstable();
            m.dedup();
            prop_assert_eq!(m.len(), set.members.len());
            prop_assert!(m.iter().all(|&v| v < n));
        }
        // the top set anchored at i, shifted over one period, covers the ring
        let top = f.top_level();
        let offs = f.offsets(top);
        let wrap = n - offs[offs.len() - 1] + offs[0];
        let width = offs.windows(2).map(|w| w[1] - w[0]).fold(wrap, usize::max);
        let mut seen = vec![false; n];
        for a in i..i + width {
            for v in f.set(top, a).unwrap().members {
                seen[v] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn one_step_touches_only_the_edge(x in loads(30), p in process(), w in weights(), kind in topology(), seed: u64) {
        let t = Topology::new(kind, x.len()).unwrap();
        let mut sim = Simulation::new(t, p, &w, child_stream(seed, 1))
            .unwrap()
            .with_state(ProcessState::from_loads(x.clone()))
            .unwrap();
        let out = sim.step();
        let (u, v) = out.edge;
        let hop = (v + x.len() - u) % x.len();
        prop_assert!(kind.hop_classes().contains(&hop));
        for (i, (a, b)) in x.iter().zip(sim.state().loads()).enumerate() {
            if i != u && i != v {
                prop_assert_eq!(a, b);
            }
        }
    }
}
