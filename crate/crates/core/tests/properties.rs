use corrmatch_core::analytics::{census_no_odd_y_chain, min_weight_ratio, pl_basic, pl_ideal};
use corrmatch_core::circuit::{build_cycle_circuit, detection_events, propagate, sample_noise, Fault, NoiseModel};
use corrmatch_core::harness::{run, DecoderKind, Mode, TrialConfig};
use corrmatch_core::matching::{brute_force_mwpm, mwpm, WeightMatrix};
use corrmatch_core::{build_layout, DetectorModel};
use num_traits::One;
use proptest::prelude::*;

fn weight_matrix() -> impl Strategy<Value = WeightMatrix> {
    (1usize..=6).prop_flat_map(|half| {
        let n = 2 * half;
        let cells = n * (n - 1) / 2;
        // Small integer weights force ties; occasional gaps remove edges.
        prop::collection::vec(
            prop_oneof![8 => (1u32..6).prop_map(f64::from), 1 => Just(f64::INFINITY), 3 => 0.01f64..10.0],
            cells,
        )
        .prop_map(move |w| {
            let mut m = WeightMatrix::new(n);
            let mut it = w.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    m.set(i, j, it.next().unwrap());
                }
            }
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn blossom_matches_brute_force(m in weight_matrix()) {
        match brute_force_mwpm(&m) {
            Ok(best) => {
                let got = mwpm(&m).unwrap();
                prop_assert!((got.total_weight - best.total_weight).abs() <= 1e-9 * best.total_weight.max(1.0));
                let mut covered = vec![false; m.len()];
                for &(a, b) in &got.pairs {
                    prop_assert!(!covered[a] && !covered[b]);
                    covered[a] = true;
                    covered[b] = true;
                }
                prop_assert!(covered.iter().all(|&c| c));
            }
            Err(_) => prop_assert!(mwpm(&m).is_err()),
        }
    }

    #[test]
    fn leading_order_ratio_is_power_of_two(half in 1usize..=10, p in 1e-6f64..0.2) {
        let d = 2 * half;
        let ratio = pl_basic(d, p).unwrap() / pl_ideal(d, p).unwrap();
        prop_assert!((ratio / 2f64.powi(half as i32) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fault_effects_add_linearly() {
    let layout = build_layout(3).unwrap();
    let circuit = build_cycle_circuit(&layout, 2).unwrap();
    let noise = NoiseModel::new(0.01).unwrap();
    for seed in 0..200u64 {
        let a = sample_noise(&circuit, &noise, seed);
        let b = sample_noise(&circuit, &noise, seed + 10_000);
        let ea = detection_events(&propagate(&circuit, &a), &layout);
        let eb = detection_events(&propagate(&circuit, &b), &layout);
        let mut both: Vec<Fault> = a.iter().chain(&b).cloned().collect();
        both.sort_by_key(|f| f.gate);
        let eab = detection_events(&propagate(&circuit, &both), &layout);
        assert_eq!(eab, ea.symmetric_difference(&eb), "seed {seed}");
    }
}

#[test]
fn source_table_reproduces_propagation() {
    // Sampling source ids and combining their traced effects must agree
    // with propagating the same faults through the circuit.
    use rand::SeedableRng;
    let layout = build_layout(3).unwrap();
    let circuit = build_cycle_circuit(&layout, 3).unwrap();
    let model = DetectorModel::circuit_level(&layout, 3, 0.02).unwrap();
    let table = model.sources();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut ids = Vec::new();
    for _ in 0..300 {
        table.sample(&mut rng, &mut ids);
        let faults: Vec<Fault> = ids
            .iter()
            .map(|&i| {
                let s = &table.sources()[i as usize];
                Fault {
                    gate: s.location,
                    kind: s.fault,
                }
            })
            .collect();
        let record = propagate(&circuit, &faults);
        let (events, flips) = table.syndrome_of(&ids);
        assert_eq!(events, detection_events(&record, &layout));
        for basis in corrmatch_core::Basis::BOTH {
            let actual = record.final_frame().parity(basis, layout.logical_observable(basis));
            assert_eq!(flips[basis.index()], actual);
        }
    }
}

#[test]
fn noise_sampling_is_reproducible() {
    let layout = build_layout(3).unwrap();
    let circuit = build_cycle_circuit(&layout, 3).unwrap();
    let noise = NoiseModel::new(0.05).unwrap();
    assert_eq!(sample_noise(&circuit, &noise, 77), sample_noise(&circuit, &noise, 77));
    assert_ne!(sample_noise(&circuit, &noise, 77), sample_noise(&circuit, &noise, 78));
}

#[test]
fn min_weight_ratio_decreases_toward_one() {
    let mut previous = min_weight_ratio(2).unwrap();
    for n in (4..=200).step_by(2) {
        let r = min_weight_ratio(n).unwrap();
        assert!(r < previous, "n = {n}");
        assert!(r > num_rational::BigRational::one());
        previous = r;
    }
    let at_100 = min_weight_ratio(100).unwrap();
    assert!(at_100 < num_rational::BigRational::new(105.into(), 100.into()));
    assert!(previous < num_rational::BigRational::new(102.into(), 100.into()));
}

#[test]
fn census_fraction_shrinks_with_length() {
    let f: Vec<f64> = [12, 16, 20]
        .iter()
        .map(|&n| census_no_odd_y_chain(n, n / 2).unwrap().fraction)
        .collect();
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
}

#[test]
fn census_matches_transfer_count() {
    // Independent count: dynamic programming over sites with state
    // (errors placed, parity of the current Y run).
    fn dp(n: u32, k: u32) -> u64 {
        // ways[placed][state]; state 0 = not in a Y run, 1 = odd run, 2 = even run
        let k = k as usize;
        let mut ways = vec![[0u64; 3]; k + 1];
        ways[0][0] = 1;
        for _ in 0..n {
            let mut next = vec![[0u64; 3]; k + 1];
            for placed in 0..=k {
                let [none, odd, even] = ways[placed];
                let closed = none + even;
                // Empty site or X error ends a run; an odd run is fatal.
                next[placed][0] += closed;
                if placed < k {
                    next[placed + 1][0] += closed;
                    next[placed + 1][1] += none + even;
                    next[placed + 1][2] += odd;
                }
            }
            ways = next;
        }
        ways[k][0] + ways[k][2]
    }
    for (n, k) in [(2, 1), (6, 3), (10, 5), (14, 7), (20, 10)] {
        assert_eq!(census_no_odd_y_chain(n, k).unwrap().no_odd_chain, dp(n, k), "n = {n}");
    }
}

#[test]
fn worker_count_does_not_change_totals() {
    let base = TrialConfig::new(Mode::FaultTolerant3d, DecoderKind::Correlated, 3, 5e-3, 20_000, 99);
    let one = run(&TrialConfig {
        workers: 1,
        ..base.clone()
    })
    .unwrap();
    let three = run(&TrialConfig { workers: 3, ..base }).unwrap();
    assert!(one.failures_x > 0);
    assert_eq!((one.failures_x, one.failures_z), (three.failures_x, three.failures_z));
}
