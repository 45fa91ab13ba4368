use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::paths::Frontier;
use super::{mwpm, Matching, WeightMatrix};
use crate::circuit::cancel_pairs;
use crate::error::{Error, Result};
use crate::tracer::DetectorGraph;

/// Relative size of the per-trial tie-breaking perturbation.
pub const JITTER_EPSILON: f64 = 1e-6;

/// Deterministic uniform value in `[0, 1)` for edge `edge` under `seed`.
pub fn jitter_unit(seed: u64, edge: u32) -> f64 {
    let mut z = seed ^ (u64::from(edge) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One matched pair expanded to detector-graph edges. `second` is the
/// boundary vertex when the event was matched to a boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub first: u32,
    pub second: u32,
    pub path: Vec<u32>,
}

impl MatchedPair {
    pub fn is_unit(&self) -> bool {
        self.path.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    /// Matching on the syndrome graph: nodes `0..k` are the events in input
    /// order, node `k + i` is event `i`'s boundary companion.
    pub matching: Matching,
    /// Event pairs and event-boundary pairs; companion pairs are omitted.
    pub pairs: Vec<MatchedPair>,
    /// Edges flipped an odd number of times by the matched paths, sorted.
    pub correction: Vec<u32>,
    /// Whether applying the correction flips the logical observable.
    pub logical_flip: bool,
    /// Sum of the unperturbed edge weights along all matched paths.
    pub path_weight: f64,
}

impl Decoding {
    fn empty() -> Self {
        Self {
            matching: Matching {
                pairs: vec![],
                total_weight: 0.0,
            },
            pairs: vec![],
            correction: vec![],
            logical_flip: false,
            path_weight: 0.0,
        }
    }
}

/// Complete graph on the events of one trial, with boundary companions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyndromeGraph {
    pub events: Vec<u32>,
    /// Upper triangle of the `2k x 2k` weight matrix, row-major; `null`
    /// for missing edges.
    pub weights: Vec<Vec<Option<f64>>>,
}

impl SyndromeGraph {
    pub fn num_nodes(&self) -> usize {
        2 * self.events.len()
    }

    pub fn weight_matrix(&self) -> WeightMatrix {
        let n = self.num_nodes();
        let mut m = WeightMatrix::new(n);
        for (i, row) in self.weights.iter().enumerate() {
            for (offset, w) in row.iter().enumerate() {
                if let Some(w) = w {
                    m.set(i, i + 1 + offset, *w);
                }
            }
        }
        m
    }
}

/// MWPM decoder bound to one detector graph. Holds the per-trial weight
/// copy and search scratch, so one instance per worker.
#[derive(Clone, Debug)]
pub struct Decoder<'g> {
    graph: &'g DetectorGraph,
    weights: Vec<f64>,
    touched: Vec<u32>,
    dist: Vec<f64>,
    seen: Vec<u32>,
    settled: Vec<u32>,
    stamp: u32,
    event_slot: Vec<u32>,
    event_stamp: Vec<u32>,
    pred: Vec<u32>,
    heap: BinaryHeap<Frontier>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g DetectorGraph) -> Self {
        let n = graph.num_vertices();
        Self {
            graph,
            weights: graph.edges().iter().map(|e| e.weight).collect(),
            touched: Vec::new(),
            dist: vec![f64::INFINITY; n],
            seen: vec![0; n],
            settled: vec![0; n],
            stamp: 0,
            event_slot: vec![0; n],
            event_stamp: vec![0; n],
            pred: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    pub fn graph(&self) -> &'g DetectorGraph {
        self.graph
    }

    /// Current weight of an edge, including any trial-local override.
    pub fn weight(&self, edge: u32) -> f64 {
        self.weights[edge as usize]
    }

    /// Overrides one edge weight until [`Decoder::reset_weights`].
    pub fn set_weight(&mut self, edge: u32, weight: f64) {
        self.weights[edge as usize] = weight;
        self.touched.push(edge);
    }

    pub fn reset_weights(&mut self) {
        for e in self.touched.drain(..) {
            self.weights[e as usize] = self.graph.edge(e).weight;
        }
    }

    /// Decodes with tie-breaking perturbation derived from `seed`.
    pub fn decode(&mut self, events: &[u32], seed: u64) -> Result<Decoding> {
        self.run(events, Some(seed))
    }

    /// Decodes with the unperturbed weights; ties resolve deterministically.
    pub fn decode_exact(&mut self, events: &[u32]) -> Result<Decoding> {
        self.run(events, None)
    }

    /// The syndrome graph the decoder would match for these events.
    pub fn syndrome_graph(&mut self, events: &[u32], seed: Option<u64>) -> Result<SyndromeGraph> {
        self.validate(events)?;
        let m = self.contract(events, seed);
        let n = m.len();
        let weights = (0..n)
            .map(|i| {
                (i + 1..n)
                    .map(|j| Some(m.get(i, j)).filter(|w| w.is_finite()))
                    .collect()
            })
            .collect();
        Ok(SyndromeGraph {
            events: events.to_vec(),
            weights,
        })
    }

    fn validate(&self, events: &[u32]) -> Result<()> {
        let limit = self.graph.num_detectors();
        for (i, &e) in events.iter().enumerate() {
            if e >= limit {
                return Err(Error::UnknownVertex(e));
            }
            if i > 0 && events[i - 1] >= e {
                return Err(Error::InvalidArgument("events must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    fn run(&mut self, events: &[u32], seed: Option<u64>) -> Result<Decoding> {
        self.validate(events)?;
        if events.is_empty() {
            return Ok(Decoding::empty());
        }
        let k = events.len();
        let weights = self.contract(events, seed);
        let matching = mwpm(&weights)?;
        let boundary = self.graph.boundary();
        let mut pairs = Vec::with_capacity(k);
        for &(u, v) in &matching.pairs {
            if u >= k {
                continue;
            }
            let (second, path) = if v < k {
                (events[v], self.recover(u, events[u], events[v]))
            } else {
                debug_assert_eq!(v, u + k);
                (boundary, self.recover(u, events[u], boundary))
            };
            pairs.push(MatchedPair {
                first: events[u],
                second,
                path,
            });
        }
        let mut all: Vec<u32> = pairs.iter().flat_map(|p| p.path.iter().copied()).collect();
        let path_weight = all.iter().map(|&e| self.weights[e as usize]).sum();
        let correction = cancel_pairs(&mut all);
        let logical_flip = correction
            .iter()
            .fold(false, |acc, &e| acc ^ self.graph.edge(e).logical_flip);
        Ok(Decoding {
            matching,
            pairs,
            correction,
            logical_flip,
            path_weight,
        })
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }

    /// Shortest paths from every event; fills the syndrome-graph weights and
    /// leaves per-source predecessors in `self.pred`.
    fn contract(&mut self, events: &[u32], seed: Option<u64>) -> WeightMatrix {
        let k = events.len();
        let n = self.graph.num_vertices();
        let boundary = self.graph.boundary();
        if u64::from(self.stamp) + k as u64 + 1 >= u64::from(u32::MAX) {
            self.stamp = 0;
            self.seen.fill(0);
            self.settled.fill(0);
            self.event_stamp.fill(0);
        }
        let marker = self.next_stamp();
        for (i, &e) in events.iter().enumerate() {
            self.event_slot[e as usize] = i as u32;
            self.event_stamp[e as usize] = marker;
        }
        if self.pred.len() < k * n {
            self.pred.resize(k * n, u32::MAX);
        }
        let mut m = WeightMatrix::new(2 * k);
        for (i, &source) in events.iter().enumerate() {
            let stamp = self.next_stamp();
            // Events after i, plus the boundary.
            let mut remaining = k - i;
            let pred = &mut self.pred[i * n..(i + 1) * n];
            self.heap.clear();
            self.dist[source as usize] = 0.0;
            self.seen[source as usize] = stamp;
            self.heap.push(Frontier {
                distance: 0.0,
                vertex: source,
            });
            let mut to_boundary = f64::INFINITY;
            while let Some(Frontier { distance: d, vertex: u }) = self.heap.pop() {
                if self.settled[u as usize] == stamp {
                    continue;
                }
                self.settled[u as usize] = stamp;
                if u == boundary {
                    to_boundary = d;
                    remaining -= 1;
                    if remaining == 0 {
                        break;
                    }
                    continue;
                }
                if u != source && self.event_stamp[u as usize] == marker {
                    let j = self.event_slot[u as usize] as usize;
                    if j > i {
                        m.set(i, j, d);
                        remaining -= 1;
                        if remaining == 0 {
                            break;
                        }
                    }
                }
                for &(v, e) in self.graph.neighbors(u) {
                    let mut w = self.weights[e as usize];
                    if let Some(s) = seed {
                        w *= 1.0 + JITTER_EPSILON * jitter_unit(s, e);
                    }
                    let nd = d + w;
                    let vi = v as usize;
                    if self.seen[vi] != stamp || nd < self.dist[vi] {
                        self.seen[vi] = stamp;
                        self.dist[vi] = nd;
                        pred[vi] = e;
                        self.heap.push(Frontier {
                            distance: nd,
                            vertex: v,
                        });
                    }
                }
            }
            m.set(i, k + i, to_boundary);
        }
        for a in k..2 * k {
            for b in a + 1..2 * k {
                m.set(a, b, 0.0);
            }
        }
        m
    }

    /// Edge path from `events[i]` to vertex `target`, source first.
    fn recover(&self, i: usize, source: u32, target: u32) -> Vec<u32> {
        let n = self.graph.num_vertices();
        let pred = &self.pred[i * n..(i + 1) * n];
        let mut path = Vec::new();
        let mut v = target;
        while v != source {
            let e = pred[v as usize];
            path.push(e);
            let edge = self.graph.edge(e);
            v = if edge.a == v { edge.b } else { edge.a };
        }
        path.reverse();
        path
    }
}

/// One-shot decode of `events` on `graph`.
pub fn decode(graph: &DetectorGraph, events: &[u32], seed: u64) -> Result<Decoding> {
    Decoder::new(graph).decode(events, seed)
}
