//! Two-pass correlated decoding.
//!
//! Pass 1 matches both graphs independently. Every matched pair joined by a
//! single detector-graph edge is taken as evidence that one of that edge's
//! faults happened; faults with a component in the other basis raise the
//! probability of their linked edge there. Pass 2 re-matches the reweighted
//! graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::SyndromeInstance;
use crate::code::Basis;
use crate::error::{Error, Result};
use crate::matching::{Decoder, Decoding, MatchedPair};
use crate::tracer::{DetectorGraph, DetectorModel};

/// Probabilities are clamped below this before taking `-ln`.
pub const MAX_REWEIGHT_PROBABILITY: f64 = 1.0 - 1e-9;

/// Probability assigned to the partner edge of a unit match with perfect
/// syndrome measurement.
pub const PERFECT_REWEIGHT_PROBABILITY: f64 = 0.5;

/// How conditional probability mass combines with an edge's prior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReweightRule {
    /// `p_new = 1 - (1 - p_old)(1 - q)`.
    #[default]
    IndependentOr,
    /// `p_new = q`.
    Replace,
}

/// One edge of the target graph with its new probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reweight {
    pub basis: Basis,
    pub edge: u32,
    pub probability: f64,
    pub weight: f64,
    /// Matched edges of the other graph that caused this entry.
    pub triggers: Vec<u32>,
}

/// Reweights for one target graph, at most one entry per edge, sorted by
/// edge id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReweightSet {
    pub entries: Vec<Reweight>,
}

impl ReweightSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, edge: u32) -> Option<&Reweight> {
        self.entries
            .binary_search_by_key(&edge, |r| r.edge)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn apply(&self, decoder: &mut Decoder<'_>) {
        for r in &self.entries {
            decoder.set_weight(r.edge, r.weight);
        }
    }
}

fn entry(basis: Basis, edge: u32, probability: f64, triggers: Vec<u32>) -> Reweight {
    let probability = probability.min(MAX_REWEIGHT_PROBABILITY);
    Reweight {
        basis,
        edge,
        probability,
        weight: -probability.ln(),
        triggers,
    }
}

/// Matched pairs whose path is exactly one detector-graph edge.
pub fn find_unit_matches(decoding: &Decoding) -> Vec<&MatchedPair> {
    decoding.pairs.iter().filter(|p| p.is_unit()).collect()
}

/// Perfect-measurement rule: the other-basis edge of the matched data qubit
/// gets probability one half.
pub fn reweight_2d(units: &[&MatchedPair], matched: &DetectorGraph, other: &DetectorGraph) -> ReweightSet {
    let mut targets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for pair in units {
        let e = pair.path[0];
        for link in &matched.edge(e).correlations {
            targets.entry(link.edge).or_default().push(e);
        }
    }
    ReweightSet {
        entries: targets
            .into_iter()
            .map(|(edge, triggers)| entry(other.basis(), edge, PERFECT_REWEIGHT_PROBABILITY, triggers))
            .collect(),
    }
}

/// Circuit-level rule: condition on one of the matched edge's faults having
/// happened and push each fault's conditional probability onto its linked
/// edge in the other graph.
pub fn reweight_3d(
    units: &[&MatchedPair],
    matched: &DetectorGraph,
    other: &DetectorGraph,
    model: &DetectorModel,
    rule: ReweightRule,
) -> Result<ReweightSet> {
    // Per target edge: product of (1 - q) over triggers, and the triggers.
    let mut targets: BTreeMap<u32, (f64, Vec<u32>)> = BTreeMap::new();
    let mut per_trigger: BTreeMap<u32, f64> = BTreeMap::new();
    for pair in units {
        let e = pair.path[0];
        let edge = matched.edge(e);
        if edge.sources.is_empty() {
            return Err(Error::EmptySourceList(e));
        }
        let total: f64 = edge
            .sources
            .iter()
            .map(|&s| model.sources().sources()[s as usize].probability)
            .sum();
        per_trigger.clear();
        for link in &edge.correlations {
            *per_trigger.entry(link.edge).or_insert(0.0) += link.probability / total;
        }
        for (&target, &q) in &per_trigger {
            let slot = targets.entry(target).or_insert((1.0, Vec::new()));
            slot.0 *= 1.0 - q.min(1.0);
            slot.1.push(e);
        }
    }
    let entries = targets
        .into_iter()
        .map(|(edge, (keep, triggers))| {
            let p_old = other.edge(edge).probability;
            let p_new = match rule {
                ReweightRule::IndependentOr => 1.0 - (1.0 - p_old) * keep,
                ReweightRule::Replace => 1.0 - keep,
            };
            entry(other.basis(), edge, p_new, triggers)
        })
        .collect();
    Ok(ReweightSet { entries })
}

/// Output of one correlated decode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedDecoding {
    /// Independent decodings, indexed by `Basis::index()`.
    pub first_pass: [Decoding; 2],
    /// Reweights applied to each graph, indexed by target basis.
    pub reweights: [ReweightSet; 2],
    /// Final decodings, indexed by `Basis::index()`.
    pub output: [Decoding; 2],
}

/// Independent MWPM of both graphs, reusable across trials.
#[derive(Clone, Debug)]
pub struct PairDecoder<'m> {
    decoders: [Decoder<'m>; 2],
}

impl<'m> PairDecoder<'m> {
    pub fn new(model: &'m DetectorModel) -> Self {
        Self {
            decoders: Basis::BOTH.map(|b| Decoder::new(model.graph(b))),
        }
    }

    pub fn decode(&mut self, syndrome: &SyndromeInstance, seed: u64) -> Result<[Decoding; 2]> {
        let x = self.decoders[0].decode(syndrome.get(Basis::X), seed)?;
        let z = self.decoders[1].decode(syndrome.get(Basis::Z), seed)?;
        Ok([x, z])
    }
}

/// Two-pass correlated decoder, reusable across trials.
#[derive(Clone, Debug)]
pub struct CorrelatedDecoder<'m> {
    model: &'m DetectorModel,
    decoders: [Decoder<'m>; 2],
    rule: ReweightRule,
}

impl<'m> CorrelatedDecoder<'m> {
    pub fn new(model: &'m DetectorModel) -> Self {
        Self::with_rule(model, ReweightRule::default())
    }

    pub fn with_rule(model: &'m DetectorModel, rule: ReweightRule) -> Self {
        Self {
            model,
            decoders: Basis::BOTH.map(|b| Decoder::new(model.graph(b))),
            rule,
        }
    }

    pub fn rule(&self) -> ReweightRule {
        self.rule
    }

    /// Reweights of the graph `target` implied by a decoding of the other one.
    pub fn reweights_for(&self, target: Basis, other_decoding: &Decoding) -> Result<ReweightSet> {
        let units = find_unit_matches(other_decoding);
        let matched = self.model.graph(target.other());
        let graph = self.model.graph(target);
        if units.is_empty() {
            return Ok(ReweightSet::default());
        }
        if self.model.is_perfect_measurement() {
            Ok(reweight_2d(&units, matched, graph))
        } else {
            reweight_3d(&units, matched, graph, self.model, self.rule)
        }
    }

    pub fn decode(&mut self, syndrome: &SyndromeInstance, seed: u64) -> Result<CorrelatedDecoding> {
        let first_pass = [
            self.decoders[0].decode(syndrome.get(Basis::X), seed)?,
            self.decoders[1].decode(syndrome.get(Basis::Z), seed)?,
        ];
        let reweights = [
            self.reweights_for(Basis::X, &first_pass[1])?,
            self.reweights_for(Basis::Z, &first_pass[0])?,
        ];
        let mut output = first_pass.clone();
        for basis in Basis::BOTH {
            let b = basis.index();
            if reweights[b].is_empty() {
                continue;
            }
            let decoder = &mut self.decoders[b];
            reweights[b].apply(decoder);
            let redone = decoder.decode(syndrome.get(basis), seed);
            decoder.reset_weights();
            output[b] = redone?;
        }
        Ok(CorrelatedDecoding {
            first_pass,
            reweights,
            output,
        })
    }
}

/// One-shot correlated decode with the default rule.
pub fn correlated_decode(model: &DetectorModel, syndrome: &SyndromeInstance, seed: u64) -> Result<CorrelatedDecoding> {
    CorrelatedDecoder::new(model).decode(syndrome, seed)
}
