mod common;

use common::{scenario, support};
use corrmatch_core::correlated::{find_unit_matches, CorrelatedDecoder, PairDecoder};
use corrmatch_core::matching::{decode, Decoder, JITTER_EPSILON};
use corrmatch_core::{
    build_layout, compose, ideal_syndrome, logical_failure, Basis, Coord, DetectorModel, Error, Pauli, SyndromeInstance,
};

#[test]
fn no_events_no_correction() {
    let layout = build_layout(5).unwrap();
    let model = DetectorModel::perfect_measurement(&layout, 0.01).unwrap();
    let out = decode(model.graph(Basis::X), &[], 3).unwrap();
    assert!(out.correction.is_empty());
    assert!(out.pairs.is_empty());
    assert!(!out.logical_flip);
}

#[test]
fn unknown_vertex_rejected() {
    let layout = build_layout(3).unwrap();
    let model = DetectorModel::perfect_measurement(&layout, 0.01).unwrap();
    let g = model.graph(Basis::X);
    assert!(matches!(decode(g, &[g.boundary()], 1), Err(Error::UnknownVertex(_))));
    assert!(matches!(decode(g, &[999], 1), Err(Error::UnknownVertex(999))));
}

#[test]
fn adjacent_events_use_the_shared_edge() {
    // An X error in the bulk of d = 5 flips two neighbouring Z stabilizers.
    let s = scenario(5, &[(4, 4, Pauli::X)]);
    let model = DetectorModel::perfect_measurement(&s.layout, 0.01).unwrap();
    let g = model.graph(Basis::X);
    let events = s.syndrome.get(Basis::X);
    assert_eq!(events.len(), 2);
    for seed in 0..20 {
        let out = decode(g, events, seed).unwrap();
        assert_eq!(out.correction.len(), 1);
        let e = g.edge(out.correction[0]);
        assert_eq!((e.a, e.b), (events[0], events[1]));
        assert_eq!(find_unit_matches(&out).len(), 1);
    }
}

/// Z at (2,0) and Y at (2,2) on d = 4: a single X-stabilizer event that is
/// two edges from either side boundary.
fn ambiguous() -> common::Scenario {
    scenario(4, &[(2, 0, Pauli::Z), (2, 2, Pauli::Y)])
}

#[test]
fn ambiguous_event_has_two_minimum_corrections() {
    let s = ambiguous();
    assert_eq!(s.syndrome.get(Basis::Z).len(), 1);
    assert_eq!(s.syndrome.get(Basis::X).len(), 2);
    let model = DetectorModel::perfect_measurement(&s.layout, 1e-3).unwrap();
    let g = model.graph(Basis::Z);
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..200 {
        let out = decode(g, s.syndrome.get(Basis::Z), seed).unwrap();
        assert_eq!(out.correction.len(), 2);
        let frame = model.correction_frame(Basis::Z, &out.correction).unwrap();
        seen.insert(support(&s.layout, &frame, Basis::Z));
    }
    let left = vec![Coord::new(2, 0), Coord::new(2, 2)];
    let right = vec![Coord::new(2, 4), Coord::new(2, 6)];
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![left, right]);
}

#[test]
fn correlated_decoding_fixes_the_ambiguous_case() {
    let s = ambiguous();
    let model = DetectorModel::perfect_measurement(&s.layout, 1e-3).unwrap();
    let mut correlated = CorrelatedDecoder::new(&model);
    let mut independent = PairDecoder::new(&model);
    let mut independent_failures = 0;
    for seed in 0..200 {
        let out = correlated.decode(&s.syndrome, seed).unwrap();
        // The Y error's X part is a unit match that reweights exactly one
        // edge of the other graph to -ln 0.5.
        assert_eq!(find_unit_matches(&out.first_pass[Basis::X.index()]).len(), 1);
        let rw = &out.reweights[Basis::Z.index()];
        assert_eq!(rw.len(), 1);
        assert!((rw.entries[0].weight - 0.5f64.ln().abs()).abs() < 1e-15);
        assert!(out.reweights[Basis::X.index()].is_empty());
        let fixed = residual(&model, &s, &out.output);
        let outcome = logical_failure(&fixed, &s.layout).unwrap();
        assert!(!outcome.x && !outcome.z, "seed {seed}");

        let plain = independent.decode(&s.syndrome, seed).unwrap();
        let outcome = logical_failure(&residual(&model, &s, &plain), &s.layout).unwrap();
        independent_failures += usize::from(outcome.z);
    }
    assert!(independent_failures > 50 && independent_failures < 150);
}

fn residual(
    model: &DetectorModel,
    s: &common::Scenario,
    out: &[corrmatch_core::Decoding; 2],
) -> corrmatch_core::PauliFrame {
    let mut frame = s.error.clone();
    for basis in Basis::BOTH {
        let c = model.correction_frame(basis, &out[basis.index()].correction).unwrap();
        frame = compose(&frame, &c).unwrap();
    }
    frame
}

#[test]
fn even_y_chain_can_give_no_helpful_reweighting() {
    // Two adjacent Y errors: the X parts produce a square of four events
    // with two equally light matchings.
    let s = scenario(4, &[(2, 0, Pauli::Y), (2, 2, Pauli::Y)]);
    assert_eq!(s.syndrome.get(Basis::X).len(), 4);
    assert_eq!(s.syndrome.get(Basis::Z).len(), 1);
    let model = DetectorModel::perfect_measurement(&s.layout, 1e-3).unwrap();
    let mut correlated = CorrelatedDecoder::new(&model);
    let mut independent = PairDecoder::new(&model);
    let helpful: Vec<Coord> = vec![Coord::new(2, 0), Coord::new(2, 2)];
    let (mut unhelpful, mut useful) = (0, 0);
    for seed in 0..200 {
        let out = correlated.decode(&s.syndrome, seed).unwrap();
        let plain = independent.decode(&s.syndrome, seed).unwrap();
        let frame = model
            .correction_frame(Basis::X, &out.first_pass[Basis::X.index()].correction)
            .unwrap();
        let matched_on = support(&s.layout, &frame, Basis::X);
        if matched_on == helpful {
            useful += 1;
            let outcome = logical_failure(&residual(&model, &s, &out.output), &s.layout).unwrap();
            assert!(!outcome.z);
        } else {
            // Matched across the rungs: the reweighted edges do not touch
            // either boundary path, so nothing changes.
            unhelpful += 1;
            assert_eq!(matched_on, vec![Coord::new(1, 1), Coord::new(3, 1)]);
            assert_eq!(
                out.output[Basis::Z.index()].correction,
                plain[Basis::Z.index()].correction
            );
        }
    }
    assert!(useful > 0 && unhelpful > 0);
}

#[test]
fn closure_in_both_modes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let layout = build_layout(5).unwrap();
    let perfect = DetectorModel::perfect_measurement(&layout, 0.05).unwrap();
    let circuit = DetectorModel::circuit_level(&layout, 3, 5e-3).unwrap();
    for model in [&perfect, &circuit] {
        let mut decoders = Basis::BOTH.map(|b| Decoder::new(model.graph(b)));
        let mut faults = Vec::new();
        for _ in 0..300 {
            model.sources().sample(&mut rng, &mut faults);
            let (syndrome, _) = model.sources().syndrome_of(&faults);
            for basis in Basis::BOTH {
                let g = model.graph(basis);
                let events = syndrome.get(basis);
                let out = decoders[basis.index()].decode(events, rng.random()).unwrap();
                let mut ends: Vec<u32> = out
                    .correction
                    .iter()
                    .flat_map(|&e| [g.edge(e).a, g.edge(e).b])
                    .filter(|&v| v != g.boundary())
                    .collect();
                assert_eq!(corrmatch_core::circuit::cancel_pairs(&mut ends), events);
                if model.is_perfect_measurement() {
                    let frame = model.correction_frame(basis, &out.correction).unwrap();
                    let ideal = SyndromeInstance::from(&ideal_syndrome(&frame, &layout).unwrap());
                    assert_eq!(ideal.get(basis), events);
                }
            }
        }
    }
}

#[test]
fn jitter_bound_and_stability() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let layout = build_layout(5).unwrap();
    let model = DetectorModel::circuit_level(&layout, 3, 4e-3).unwrap();
    let g = model.graph(Basis::X);
    let mut decoder = Decoder::new(g);
    let mut faults = Vec::new();
    let mut checked = 0;
    while checked < 300 {
        model.sources().sample(&mut rng, &mut faults);
        let (syndrome, _) = model.sources().syndrome_of(&faults);
        let events = syndrome.get(Basis::X);
        if events.is_empty() {
            continue;
        }
        checked += 1;
        let exact = decoder.decode_exact(events).unwrap();
        let jittered = decoder.decode(events, rng.random()).unwrap();
        assert!(jittered.path_weight <= exact.path_weight * (1.0 + JITTER_EPSILON) + 1e-12);
        assert!(exact.path_weight <= jittered.path_weight + 1e-12);
        // The jittered choice is optimal for the true weights up to the
        // perturbation size, so any strictly better matching would have won.
        assert!((jittered.path_weight - exact.path_weight).abs() <= exact.path_weight * JITTER_EPSILON + 1e-12);
    }
}

#[test]
fn no_reweights_means_identical_output() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let layout = build_layout(3).unwrap();
    for model in [
        DetectorModel::perfect_measurement(&layout, 0.05).unwrap(),
        DetectorModel::circuit_level(&layout, 3, 5e-3).unwrap(),
    ] {
        let mut correlated = CorrelatedDecoder::new(&model);
        let mut independent = PairDecoder::new(&model);
        let mut faults = Vec::new();
        let mut quiet = 0;
        for _ in 0..2000 {
            model.sources().sample(&mut rng, &mut faults);
            let (syndrome, _) = model.sources().syndrome_of(&faults);
            let seed = rng.random();
            let out = correlated.decode(&syndrome, seed).unwrap();
            let plain = independent.decode(&syndrome, seed).unwrap();
            assert_eq!(out.first_pass, plain);
            for basis in Basis::BOTH {
                let b = basis.index();
                if out.reweights[b].is_empty() {
                    quiet += 1;
                    assert_eq!(out.output[b], plain[b]);
                }
                for r in &out.reweights[b].entries {
                    assert!(r.probability > 0.0 && r.probability < 1.0);
                    assert!(r.weight > 0.0 && r.weight.is_finite());
                }
            }
        }
        assert!(quiet > 0);
    }
}

#[test]
fn decoder_is_reusable_after_reweighting() {
    let s = ambiguous();
    let model = DetectorModel::perfect_measurement(&s.layout, 1e-3).unwrap();
    let g = model.graph(Basis::Z);
    let mut d = Decoder::new(g);
    let before = d.decode(s.syndrome.get(Basis::Z), 4).unwrap();
    d.set_weight(0, 0.1);
    d.set_weight(1, 0.1);
    d.reset_weights();
    assert_eq!(d.decode(s.syndrome.get(Basis::Z), 4).unwrap(), before);
    for e in 0..g.edges().len() as u32 {
        assert_eq!(d.weight(e), g.edge(e).weight);
    }
}
