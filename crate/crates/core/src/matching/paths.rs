use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::tracer::DetectorGraph;

/// Heap entry ordered so that `BinaryHeap` pops the smallest distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Frontier {
    pub distance: f64,
    pub vertex: u32,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPaths {
    pub source: u32,
    /// `f64::INFINITY` for unreachable vertices.
    pub distance: Vec<f64>,
    /// Edge used to reach each vertex.
    pub predecessor: Vec<Option<u32>>,
}

impl ShortestPaths {
    /// Edge ids from the source to `target`, in walking order from the source.
    pub fn path_to(&self, graph: &DetectorGraph, target: u32) -> Option<Vec<u32>> {
        if self.distance[target as usize].is_infinite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = target;
        while v != self.source {
            let e = self.predecessor[v as usize]?;
            path.push(e);
            let edge = graph.edge(e);
            v = if edge.a == v { edge.b } else { edge.a };
        }
        path.reverse();
        Some(path)
    }
}

/// Single-source Dijkstra over `graph` with per-edge weights from `weight`.
/// Paths never pass through the boundary vertex; it can only be an endpoint.
pub fn shortest_paths(graph: &DetectorGraph, source: u32, weight: impl Fn(u32) -> f64) -> ShortestPaths {
    let n = graph.num_vertices();
    let mut distance = vec![f64::INFINITY; n];
    let mut predecessor = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    distance[source as usize] = 0.0;
    heap.push(Frontier {
        distance: 0.0,
        vertex: source,
    });
    while let Some(Frontier { distance: d, vertex: u }) = heap.pop() {
        if done[u as usize] {
            continue;
        }
        done[u as usize] = true;
        if u == graph.boundary() && u != source {
            continue;
        }
        for &(v, e) in graph.neighbors(u) {
            let nd = d + weight(e);
            if nd < distance[v as usize] {
                distance[v as usize] = nd;
                predecessor[v as usize] = Some(e);
                heap.push(Frontier {
                    distance: nd,
                    vertex: v,
                });
            }
        }
    }
    ShortestPaths {
        source,
        distance,
        predecessor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_layout, Basis};
    use crate::tracer::{DetectorEdge, DetectorModel};

    fn edge(a: u32, b: u32, w: f64) -> DetectorEdge {
        DetectorEdge {
            a,
            b,
            probability: (-w).exp(),
            weight: w,
            logical_flip: false,
            source_count: 0,
            sources: vec![],
            correlations: vec![],
        }
    }

    #[test]
    fn triangle_prefers_two_hops() {
        // Vertices 0, 1, 2; boundary is 3 and unused.
        let g = DetectorGraph::new(Basis::X, 3, 1, vec![edge(0, 1, 1.0), edge(1, 2, 1.0), edge(0, 2, 3.0)]).unwrap();
        let sp = shortest_paths(&g, 0, |e| g.edge(e).weight);
        assert_eq!(sp.distance[0], 0.0);
        assert_eq!(sp.distance[2], 2.0);
        assert_eq!(sp.path_to(&g, 2).unwrap(), vec![0, 1]);
        assert!(sp.distance[3].is_infinite());
        assert!(sp.path_to(&g, 3).is_none());
    }

    #[test]
    fn boundary_is_not_a_shortcut() {
        // 0 - B - 1 is cheap, but paths may not pass through B.
        let g = DetectorGraph::new(Basis::X, 2, 1, vec![edge(0, 2, 0.1), edge(1, 2, 0.1), edge(0, 1, 5.0)]).unwrap();
        let sp = shortest_paths(&g, 0, |e| g.edge(e).weight);
        assert_eq!(sp.distance[1], 5.0);
        assert_eq!(sp.distance[2], 0.1);
    }

    #[test]
    fn uniform_graph_distance_is_hop_count() {
        let layout = build_layout(5).unwrap();
        let model = DetectorModel::perfect_measurement(&layout, 0.01).unwrap();
        let g = model.graph(Basis::Z);
        let w = g.edges()[0].weight;
        let stabs = layout.detecting(Basis::Z);
        let sp = shortest_paths(g, 0, |e| g.edge(e).weight);
        for (v, s) in stabs.iter().enumerate() {
            let hops = (s.site.row.abs_diff(stabs[0].site.row) + s.site.col.abs_diff(stabs[0].site.col)) / 2;
            assert!((sp.distance[v] - w * hops as f64).abs() < 1e-9);
        }
    }
}
