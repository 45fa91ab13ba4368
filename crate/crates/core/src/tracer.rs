//! Single-fault tracing and detector-graph assembly.
//!
//! Every nontrivial outcome of every noisy location is propagated on its own
//! to find the detection events it causes in each basis. Sources landing on
//! the same pair of detectors are merged into one weighted edge; sources
//! with components in both bases link the two graphs together.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_cycle_circuit, cancel_pairs, detection_events, propagate_from, Circuit, FailureSampler, Fault, FaultKind,
    NoiseModel, SyndromeInstance,
};
use crate::code::{ideal_syndrome, Basis, CodeLayout, Pauli, PauliFrame};
use crate::error::{Error, Result};

/// One possible single fault.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSource {
    /// Gate id in circuit mode, data-qubit id in perfect-measurement mode.
    pub location: usize,
    pub fault: FaultKind,
    pub probability: f64,
    /// Detection events per basis (`Basis::index()`), sorted, at most two.
    pub events: [Vec<u32>; 2],
    /// Whether this fault alone flips the logical observable of each basis.
    pub logical_flip: [bool; 2],
}

/// A noisy location: its outcomes occupy a contiguous source range and are
/// equiprobable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseLocation {
    pub first_source: u32,
    pub outcomes: u32,
}

/// All single faults of a noise setting.
#[derive(Clone, Debug)]
pub struct SourceTable {
    p: f64,
    /// Detectors per basis: `stabilizers * layers`.
    detectors: [u32; 2],
    layers: u32,
    sources: Vec<ErrorSource>,
    locations: Vec<NoiseLocation>,
}

impl SourceTable {
    /// Table from explicit sources. Consecutive sources sharing a location
    /// form one noisy location that fails with probability `p`.
    pub fn from_sources(p: f64, layers: u32, detectors_per_layer: [u32; 2], sources: Vec<ErrorSource>) -> Self {
        let mut locations: Vec<NoiseLocation> = Vec::new();
        for (i, src) in sources.iter().enumerate() {
            if i > 0 && sources[i - 1].location == src.location {
                locations.last_mut().unwrap().outcomes += 1;
            } else {
                locations.push(NoiseLocation {
                    first_source: i as u32,
                    outcomes: 1,
                });
            }
        }
        Self {
            p,
            detectors: detectors_per_layer.map(|d| d * layers),
            layers,
            sources,
            locations,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sources(&self) -> &[ErrorSource] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn locations(&self) -> &[NoiseLocation] {
        &self.locations
    }

    pub fn num_detectors(&self, basis: Basis) -> u32 {
        self.detectors[basis.index()]
    }

    pub fn layers(&self) -> u32 {
        self.layers
    }

    /// Samples one trial's faults as source ids, in location order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u32>) {
        out.clear();
        FailureSampler::new(self.p).for_each_failure(rng, self.locations.len(), |i, rng| {
            let loc = self.locations[i];
            let pick = if loc.outcomes == 1 {
                0
            } else {
                rng.random_range(0..loc.outcomes)
            };
            out.push(loc.first_source + pick);
        });
    }

    /// Detection events and logical flips of a set of faults, by linearity.
    pub fn syndrome_of(&self, source_ids: &[u32]) -> (SyndromeInstance, [bool; 2]) {
        let mut syndrome = SyndromeInstance::default();
        let mut flips = [false; 2];
        for (b, flip) in flips.iter_mut().enumerate() {
            let mut v: Vec<u32> = Vec::new();
            for &s in source_ids {
                let src = &self.sources[s as usize];
                v.extend_from_slice(&src.events[b]);
                *flip ^= src.logical_flip[b];
            }
            syndrome.events[b] = cancel_pairs(&mut v);
        }
        (syndrome, flips)
    }
}

/// Sources for perfect stabilizer measurement: each data qubit suffers X, Y
/// or Z with probability p/3 each and a single ideal syndrome is taken.
pub fn trace_perfect_measurement(layout: &CodeLayout, p: f64) -> Result<SourceTable> {
    NoiseModel::new(p)?;
    let n = layout.num_data_qubits();
    let detectors = [
        layout.detecting(Basis::X).len() as u32,
        layout.detecting(Basis::Z).len() as u32,
    ];
    let mut table = SourceTable {
        p,
        detectors,
        layers: 1,
        sources: Vec::new(),
        locations: Vec::new(),
    };
    if p == 0.0 {
        return Ok(table);
    }
    for q in 0..n {
        table.locations.push(NoiseLocation {
            first_source: table.sources.len() as u32,
            outcomes: 3,
        });
        for pauli in Pauli::NONTRIVIAL {
            let mut frame = PauliFrame::identity(n);
            frame.set(q, pauli);
            let syndrome = ideal_syndrome(&frame, layout)?;
            let events = Basis::BOTH.map(|b| syndrome.detecting(b).iter().map(|&s| s as u32).collect::<Vec<_>>());
            let logical_flip = Basis::BOTH.map(|b| frame.parity(b, layout.logical_observable(b)));
            table.sources.push(ErrorSource {
                location: q,
                fault: FaultKind::Single(pauli),
                probability: p / 3.0,
                events,
                logical_flip,
            });
        }
    }
    Ok(table)
}

/// Traces every nontrivial channel outcome of every gate of `circuit`.
pub fn trace_all_single_faults(circuit: &Circuit, noise: &NoiseModel) -> Result<SourceTable> {
    let layout = circuit.layout();
    let layers = (circuit.rounds() + 1) as u32;
    let detectors = Basis::BOTH.map(|b| layout.detecting(b).len() as u32 * layers);
    let mut table = SourceTable {
        p: noise.p(),
        detectors,
        layers,
        sources: Vec::new(),
        locations: Vec::new(),
    };
    if noise.p() == 0.0 {
        return Ok(table);
    }
    for (g, gate) in circuit.gates().iter().enumerate() {
        let channel = NoiseModel::channel(gate.kind);
        let probability = noise.outcome_probability(gate.kind);
        table.locations.push(NoiseLocation {
            first_source: table.sources.len() as u32,
            outcomes: channel.len() as u32,
        });
        for kind in channel {
            let fault = Fault { gate: g, kind };
            let record = propagate_from(circuit, &[fault], gate.step as usize);
            let syndrome = detection_events(&record, layout);
            let logical_flip = Basis::BOTH.map(|b| record.final_frame().parity(b, layout.logical_observable(b)));
            table.sources.push(ErrorSource {
                location: g,
                fault: kind,
                probability,
                events: syndrome.events,
                logical_flip,
            });
        }
    }
    Ok(table)
}

/// Link from an edge to an edge of the other basis' graph, through one
/// source that has components in both bases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLink {
    pub edge: u32,
    pub source: u32,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorEdge {
    pub a: u32,
    /// Equal to the graph's boundary vertex for boundary edges.
    pub b: u32,
    pub probability: f64,
    pub weight: f64,
    pub logical_flip: bool,
    pub source_count: usize,
    pub sources: Vec<u32>,
    pub correlations: Vec<CorrelationLink>,
}

/// Weighted detector graph for one error basis. Vertices `0..detectors` are
/// detection sites (`layer * detectors_per_layer + stabilizer`); vertex
/// `detectors` is the single boundary vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GraphDocument", try_from = "GraphDocument")]
pub struct DetectorGraph {
    basis: Basis,
    detectors_per_layer: u32,
    layers: u32,
    edges: Vec<DetectorEdge>,
    adjacency_start: Vec<u32>,
    adjacency: Vec<(u32, u32)>,
}

impl DetectorGraph {
    pub fn new(basis: Basis, detectors_per_layer: u32, layers: u32, edges: Vec<DetectorEdge>) -> Result<Self> {
        let boundary = detectors_per_layer * layers;
        let mut degree = vec![0u32; boundary as usize + 2];
        for e in &edges {
            if e.a > boundary || e.b > boundary || e.a == e.b {
                return Err(Error::InvalidArgument(format!("edge ({}, {}) out of range", e.a, e.b)));
            }
            degree[e.a as usize + 1] += 1;
            degree[e.b as usize + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let adjacency_start = degree.clone();
        let mut fill = degree;
        let mut adjacency = vec![(0, 0); edges.len() * 2];
        for (id, e) in edges.iter().enumerate() {
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                adjacency[fill[u as usize] as usize] = (v, id as u32);
                fill[u as usize] += 1;
            }
        }
        Ok(Self {
            basis,
            detectors_per_layer,
            layers,
            edges,
            adjacency_start,
            adjacency,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn detectors_per_layer(&self) -> u32 {
        self.detectors_per_layer
    }

    pub fn layers(&self) -> u32 {
        self.layers
    }

    pub fn num_detectors(&self) -> u32 {
        self.detectors_per_layer * self.layers
    }

    pub fn boundary(&self) -> u32 {
        self.num_detectors()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_detectors() as usize + 1
    }

    pub fn edges(&self) -> &[DetectorEdge] {
        &self.edges
    }

    pub fn edge(&self, id: u32) -> &DetectorEdge {
        &self.edges[id as usize]
    }

    /// `(neighbor, edge id)` pairs of vertex `v`.
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        let s = self.adjacency_start[v as usize] as usize;
        let e = self.adjacency_start[v as usize + 1] as usize;
        &self.adjacency[s..e]
    }

    pub fn find_edge(&self, u: u32, v: u32) -> Option<u32> {
        self.neighbors(u).iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Interchange form of a [`DetectorGraph`]; field order is the key order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDocument {
    pub basis: Basis,
    pub detectors_per_layer: u32,
    pub layers: u32,
    pub boundary: u32,
    pub edges: Vec<DetectorEdge>,
}

impl From<DetectorGraph> for GraphDocument {
    fn from(g: DetectorGraph) -> Self {
        GraphDocument {
            basis: g.basis,
            detectors_per_layer: g.detectors_per_layer,
            layers: g.layers,
            boundary: g.boundary(),
            edges: g.edges,
        }
    }
}

impl TryFrom<GraphDocument> for DetectorGraph {
    type Error = Error;

    fn try_from(doc: GraphDocument) -> Result<Self> {
        if doc.boundary != doc.detectors_per_layer * doc.layers {
            return Err(Error::InvalidArgument(
                "boundary id does not match detector count".into(),
            ));
        }
        DetectorGraph::new(doc.basis, doc.detectors_per_layer, doc.layers, doc.edges)
    }
}

/// Both detector graphs plus the source table they were built from.
#[derive(Clone, Debug)]
pub struct DetectorModel {
    sources: SourceTable,
    graphs: [DetectorGraph; 2],
    /// Edge of each basis a source contributes to, if any.
    source_edges: Vec<[Option<u32>; 2]>,
}

impl DetectorModel {
    pub fn sources(&self) -> &SourceTable {
        &self.sources
    }

    pub fn graph(&self, basis: Basis) -> &DetectorGraph {
        &self.graphs[basis.index()]
    }

    pub fn source_edge(&self, source: u32, basis: Basis) -> Option<u32> {
        self.source_edges[source as usize][basis.index()]
    }

    /// Perfect-measurement model for distance `d`.
    pub fn perfect_measurement(layout: &CodeLayout, p: f64) -> Result<Self> {
        build_detector_graphs(trace_perfect_measurement(layout, p)?)
    }

    pub fn is_perfect_measurement(&self) -> bool {
        self.sources.layers == 1
    }

    /// Data-qubit Pauli frame of a set of edges of a perfect-measurement
    /// graph. Each such edge belongs to exactly one data qubit.
    pub fn correction_frame(&self, basis: Basis, correction: &[u32]) -> Result<PauliFrame> {
        if !self.is_perfect_measurement() {
            return Err(Error::InvalidArgument(
                "correction frames need a perfect-measurement model".into(),
            ));
        }
        let pauli = match basis {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        };
        let mut frame = PauliFrame::identity(self.sources.locations.len());
        for &e in correction {
            let edge = self.graph(basis).edge(e);
            let src = *edge.sources.first().ok_or(Error::EmptySourceList(e))?;
            frame.apply(self.sources.sources[src as usize].location, pauli);
        }
        Ok(frame)
    }

    /// Circuit-level model with `rounds` noisy cycles and a final ideal readout.
    pub fn circuit_level(layout: &CodeLayout, rounds: usize, p: f64) -> Result<Self> {
        let circuit = build_cycle_circuit(layout, rounds)?;
        build_detector_graphs(trace_all_single_faults(&circuit, &NoiseModel::new(p)?)?)
    }
}

/// Probability that at least one of two independent events occurs.
fn independent_or(acc: f64, p: f64) -> f64 {
    1.0 - (1.0 - acc) * (1.0 - p)
}

pub fn build_detector_graphs(sources: SourceTable) -> Result<DetectorModel> {
    let mut source_edges = vec![[None, None]; sources.len()];
    let mut graphs = Vec::with_capacity(2);
    for basis in Basis::BOTH {
        let b = basis.index();
        let boundary = sources.detectors[b];
        let mut keyed: HashMap<(u32, u32), u32> = HashMap::new();
        let mut edges: Vec<DetectorEdge> = Vec::new();
        for (id, src) in sources.sources.iter().enumerate() {
            let ev = &src.events[b];
            let key = match ev.len() {
                0 => {
                    if src.logical_flip[b] {
                        return Err(Error::UndetectableFault { location: src.location });
                    }
                    continue;
                }
                1 => (ev[0], boundary),
                2 => (ev[0].min(ev[1]), ev[0].max(ev[1])),
                count => {
                    return Err(Error::TooManyEvents {
                        location: src.location,
                        count,
                    })
                }
            };
            let edge_id = *keyed.entry(key).or_insert_with(|| {
                edges.push(DetectorEdge {
                    a: key.0,
                    b: key.1,
                    probability: 0.0,
                    weight: f64::INFINITY,
                    logical_flip: src.logical_flip[b],
                    source_count: 0,
                    sources: Vec::new(),
                    correlations: Vec::new(),
                });
                edges.len() as u32 - 1
            });
            let edge = &mut edges[edge_id as usize];
            if edge.logical_flip != src.logical_flip[b] {
                return Err(Error::LogicalParityConflict { a: key.0, b: key.1 });
            }
            edge.probability = independent_or(edge.probability, src.probability);
            edge.sources.push(id as u32);
            source_edges[id][b] = Some(edge_id);
        }
        for e in &mut edges {
            e.source_count = e.sources.len();
            e.weight = -e.probability.ln();
        }
        graphs.push((basis, boundary, edges));
    }

    // Correlation links through sources present in both graphs.
    for (id, pair) in source_edges.iter().enumerate() {
        if let [Some(ex), Some(ez)] = *pair {
            let probability = sources.sources[id].probability;
            graphs[0].2[ex as usize].correlations.push(CorrelationLink {
                edge: ez,
                source: id as u32,
                probability,
            });
            graphs[1].2[ez as usize].correlations.push(CorrelationLink {
                edge: ex,
                source: id as u32,
                probability,
            });
        }
    }

    let layers = sources.layers;
    let mut built = graphs
        .into_iter()
        .map(|(basis, boundary, edges)| DetectorGraph::new(basis, boundary / layers, layers, edges));
    let x = built.next().unwrap()?;
    let z = built.next().unwrap()?;
    Ok(DetectorModel {
        sources,
        graphs: [x, z],
        source_edges,
    })
}
