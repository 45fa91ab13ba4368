//! Closed-form leading-order error rates and exhaustive path combinatorics.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{build_layout, Basis, Coord};
use crate::error::{Error, Result};
use crate::tracer::{DetectorGraph, DetectorModel};

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Weight of minimum-length error patterns relative to patterns with one
/// extra error on a length-`n` path: `C(n, ceil(n/2)) / C(n, ceil(n/2) + 1)`.
pub fn min_weight_ratio(n: u64) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ratio needs a path of length at least 2, got {n}"
        )));
    }
    let k = n.div_ceil(2);
    Ok(BigRational::new(
        BigInt::from(binomial(n, k)),
        BigInt::from(binomial(n, k + 1)),
    ))
}

fn leading_order(d: usize, p: f64, per_site: f64, what: &'static str) -> Result<f64> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::OddDistance { what, distance: d });
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0, 1), got {p}")));
    }
    let half = (d / 2) as u64;
    let paths = binomial(d as u64, half).to_f64().unwrap_or(f64::INFINITY);
    Ok(half as f64 * paths * per_site.powi(half as i32))
}

/// First-order logical error rate of independent matching with perfect
/// syndrome measurement, even `d`.
pub fn pl_basic(d: usize, p: f64) -> Result<f64> {
    leading_order(d, p, 2.0 * p / 3.0, "pl_basic")
}

/// First-order logical error rate when each X and Y contributes only its
/// own probability, even `d`.
pub fn pl_ideal(d: usize, p: f64) -> Result<f64> {
    leading_order(d, p, p / 3.0, "pl_ideal")
}

/// Result of the odd-Y-chain enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n: u32,
    pub k: u32,
    pub total: u64,
    pub no_odd_chain: u64,
    pub fraction: f64,
}

pub const CENSUS_MAX_SITES: u32 = 24;

/// Whether every maximal run of set bits in `mask` has even length.
pub fn runs_all_even(mut mask: u32) -> bool {
    while mask != 0 {
        mask >>= mask.trailing_zeros();
        let run = mask.trailing_ones();
        if run % 2 == 1 {
            return false;
        }
        mask = mask.checked_shr(run).unwrap_or(0);
    }
    true
}

/// Enumerates every choice of `k` error sites on a path of `n` sites and
/// every X/Y labeling of them, counting strings with no odd-length run of
/// Y at consecutive sites.
pub fn census_no_odd_y_chain(n: u32, k: u32) -> Result<Census> {
    if n > CENSUS_MAX_SITES {
        return Err(Error::InvalidArgument(format!(
            "census is exhaustive and limited to {CENSUS_MAX_SITES} sites, got {n}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("cannot place {k} errors on {n} sites")));
    }
    let even: Vec<bool> = (0..1u32 << n).map(runs_all_even).collect();
    let subsets = k_subsets(n, k);
    let no_odd_chain: u64 = subsets
        .par_iter()
        .map(|&positions| {
            // All submasks of `positions`, including empty and full.
            let mut count = 0u64;
            let mut y = positions;
            loop {
                count += u64::from(even[y as usize]);
                if y == 0 {
                    break;
                }
                y = (y - 1) & positions;
            }
            count
        })
        .sum();
    let total = subsets.len() as u64 * (1u64 << k);
    Ok(Census {
        n,
        k,
        total,
        no_odd_chain,
        fraction: no_odd_chain as f64 / total as f64,
    })
}

/// All `n`-bit masks with exactly `k` set bits, ascending.
fn k_subsets(n: u32, k: u32) -> Vec<u32> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    while v < 1u64 << n {
        out.push(v as u32);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Number of self-avoiding walks with exactly `length` edges from `from` to
/// `to` in `graph`. The boundary vertex may only end a walk.
pub fn count_walks(graph: &DetectorGraph, from: u32, to: u32, length: usize) -> u64 {
    fn go(graph: &DetectorGraph, v: u32, to: u32, left: usize, visited: &mut [bool]) -> u64 {
        if v == to {
            return u64::from(left == 0);
        }
        if left == 0 || v == graph.boundary() {
            return 0;
        }
        let mut total = 0;
        for &(w, _) in graph.neighbors(v) {
            if !visited[w as usize] {
                visited[w as usize] = true;
                total += go(graph, w, to, left - 1, visited);
                visited[w as usize] = false;
            }
        }
        total
    }
    let mut visited = vec![false; graph.num_vertices()];
    visited[from as usize] = true;
    go(graph, from, to, length, &mut visited)
}

/// Path counts for two events that minimum-weight matching sends to
/// opposite boundaries although many longer paths join them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCounts {
    pub distance: usize,
    pub events: [Coord; 2],
    /// Length of the shortest event-event paths and their number.
    pub pair_length: usize,
    pub pair_paths: u64,
    /// Number of boundary matchings of minimum total length, and of that
    /// length plus one.
    pub boundary_length: usize,
    pub boundary_min: u64,
    pub boundary_next: u64,
    /// Error rate above which pairing is more likely than the boundary
    /// matching, as `numerator / denominator`.
    pub crossover_numerator: i64,
    pub crossover_denominator: i64,
}

impl PathCounts {
    pub fn crossover(&self) -> BigRational {
        BigRational::new(self.crossover_numerator.into(), self.crossover_denominator.into())
    }
}

/// Counts pairing paths and boundary matchings for two X-stabilizer events
/// of a distance-`d` perfect-measurement Z-error graph, given by stabilizer
/// index.
pub fn count_paths(d: usize, a: usize, b: usize) -> Result<PathCounts> {
    let layout = build_layout(d)?;
    let model = DetectorModel::perfect_measurement(&layout, 0.01)?;
    let graph = model.graph(Basis::Z);
    let stabs = layout.detecting(Basis::Z);
    if a >= stabs.len() || b >= stabs.len() || a == b {
        return Err(Error::InvalidArgument("events must be two distinct stabilizers".into()));
    }
    let (va, vb) = (a as u32, b as u32);
    let boundary = graph.boundary();
    let hop = |v: u32| -> usize {
        let mut len = 0;
        while count_walks(graph, v, boundary, len) == 0 {
            len += 1;
        }
        len
    };
    let (sa, sb) = (stabs[a].site, stabs[b].site);
    let pair_length = (sa.row.abs_diff(sb.row) + sa.col.abs_diff(sb.col)) / 2;
    let pair_paths = count_walks(graph, va, vb, pair_length);
    let (ha, hb) = (hop(va), hop(vb));
    let boundary_length = ha + hb;
    let boundary_min = count_walks(graph, va, boundary, ha) * count_walks(graph, vb, boundary, hb);
    let boundary_next = count_walks(graph, va, boundary, ha) * count_walks(graph, vb, boundary, hb + 1)
        + count_walks(graph, va, boundary, ha + 1) * count_walks(graph, vb, boundary, hb);
    if pair_length != boundary_length + 1 {
        return Err(Error::InvalidArgument(format!(
            "pair paths of length {pair_length} do not compete with boundary matchings of length {boundary_length}"
        )));
    }
    // pair_paths p^(L+1) = boundary_min p^L + boundary_next p^(L+1)
    let denominator = pair_paths as i64 - boundary_next as i64;
    if denominator <= 0 {
        return Err(Error::InvalidArgument(
            "pairing never dominates at leading order".into(),
        ));
    }
    let crossover = BigRational::new((boundary_min as i64).into(), denominator.into());
    Ok(PathCounts {
        distance: d,
        events: [sa, sb],
        pair_length,
        pair_paths,
        boundary_length,
        boundary_min,
        boundary_next,
        crossover_numerator: crossover.numer().to_i64().unwrap_or(0),
        crossover_denominator: crossover.denom().to_i64().unwrap_or(0),
    })
}

/// The distance-9 instance: events three stabilizer columns from opposite
/// boundaries, offset by three columns and four rows.
pub fn count_example_paths() -> Result<PathCounts> {
    let d = 9;
    let layout = build_layout(d)?;
    let index = |row: usize, col: usize| {
        layout
            .detecting(Basis::Z)
            .iter()
            .position(|s| s.site == Coord::new(2 * row, 2 * col + 1))
            .expect("stabilizer exists")
    };
    count_paths(d, index(2, 2), index(6, 5))
}
