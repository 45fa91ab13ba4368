//! Exact minimum-weight perfect matching of detection events.

mod blossom;
mod decoder;
mod paths;

pub use blossom::max_weight_matching;
pub use decoder::{decode, jitter_unit, Decoder, Decoding, MatchedPair, SyndromeGraph, JITTER_EPSILON};
pub use paths::{shortest_paths, ShortestPaths};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric weight matrix; `f64::INFINITY` marks a missing edge.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            w: vec![f64::INFINITY; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn set(&mut self, i: usize, j: usize, w: f64) {
        self.w[i * self.n + j] = w;
        self.w[j * self.n + i] = w;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if a.is_nan() || a != b || a == f64::NEG_INFINITY {
                    return Err(Error::InvalidWeights);
                }
            }
        }
        Ok(())
    }
}

/// A perfect matching, pairs stored as `(low, high)` in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: f64,
}

impl Matching {
    fn from_pairs(mut pairs: Vec<(usize, usize)>, weights: &WeightMatrix) -> Self {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        let total_weight = pairs.iter().map(|&(i, j)| weights.get(i, j)).sum();
        Self { pairs, total_weight }
    }

    /// Partner of node `v`.
    pub fn partner(&self, v: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Integer resolution used when handing weights to the blossom solver.
const WEIGHT_BITS: i32 = 40;

/// Exact minimum-weight perfect matching.
pub fn mwpm(weights: &WeightMatrix) -> Result<Matching> {
    let n = weights.len();
    if n % 2 == 1 {
        return Err(Error::OddNodeCount(n));
    }
    weights.validate()?;
    if n == 0 {
        return Ok(Matching {
            pairs: vec![],
            total_weight: 0.0,
        });
    }
    if n == 2 {
        if weights.get(0, 1).is_infinite() {
            return Err(Error::NoPerfectMatching);
        }
        return Ok(Matching::from_pairs(vec![(0, 1)], weights));
    }

    let mut max_abs: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let w = weights.get(i, j);
            if w.is_finite() {
                max_abs = max_abs.max(w.abs());
            }
        }
    }
    let scale = 2f64.powi(WEIGHT_BITS) / max_abs.max(1.0);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    let mut max_int = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let w = weights.get(i, j);
            if w.is_finite() {
                let wi = (w * scale).round() as i64;
                max_int = max_int.max(wi);
                edges.push((i, j, wi));
            }
        }
    }
    // Minimum weight perfect == maximum weight among maximum-cardinality
    // matchings after negation; the offset keeps weights positive.
    let offset = max_int + 1;
    for e in &mut edges {
        e.2 = offset - e.2;
    }
    let mates = max_weight_matching(n, &edges, true);
    let mut pairs = Vec::with_capacity(n / 2);
    for (v, m) in mates.iter().enumerate() {
        match m {
            Some(u) if *u > v => pairs.push((v, *u)),
            Some(_) => {}
            None => return Err(Error::NoPerfectMatching),
        }
    }
    Ok(Matching::from_pairs(pairs, weights))
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive minimum over all (n-1)!! pairings. Test oracle.
pub fn brute_force_mwpm(weights: &WeightMatrix) -> Result<Matching> {
    let n = weights.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyNodes {
            max: BRUTE_FORCE_LIMIT,
            got: n,
        });
    }
    if n % 2 == 1 {
        return Err(Error::OddNodeCount(n));
    }
    weights.validate()?;

    fn search(
        weights: &WeightMatrix,
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        acc: f64,
        best: &mut Option<(f64, Vec<(usize, usize)>)>,
    ) {
        let Some(i) = used.iter().position(|&u| !u) else {
            if best.as_ref().is_none_or(|(w, _)| acc < *w) {
                *best = Some((acc, current.clone()));
            }
            return;
        };
        used[i] = true;
        for j in i + 1..used.len() {
            let w = weights.get(i, j);
            if used[j] || w.is_infinite() {
                continue;
            }
            used[j] = true;
            current.push((i, j));
            search(weights, used, current, acc + w, best);
            current.pop();
            used[j] = false;
        }
        used[i] = false;
    }

    let mut best = None;
    search(weights, &mut vec![false; n], &mut Vec::new(), 0.0, &mut best);
    let (_, pairs) = best.ok_or(Error::NoPerfectMatching)?;
    Ok(Matching::from_pairs(pairs, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_matchings() {
        let m = WeightMatrix::from_fn(2, |_, _| 3.0);
        assert_eq!(mwpm(&m).unwrap().pairs, vec![(0, 1)]);
        assert_eq!(brute_force_mwpm(&m).unwrap().pairs, vec![(0, 1)]);
        assert!(matches!(mwpm(&WeightMatrix::new(3)), Err(Error::OddNodeCount(3))));
        assert!(matches!(
            brute_force_mwpm(&WeightMatrix::new(14)),
            Err(Error::TooManyNodes { .. })
        ));
        assert_eq!(mwpm(&WeightMatrix::new(0)).unwrap().pairs, vec![]);
    }

    #[test]
    fn two_cheap_pairs() {
        let m = WeightMatrix::from_fn(4, |i, j| {
            if (i, j) == (0, 1) || (i, j) == (2, 3) {
                1.0
            } else {
                10.0
            }
        });
        let got = mwpm(&m).unwrap();
        assert_eq!(got.pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(got.total_weight, 2.0);
    }

    #[test]
    fn degenerate_square() {
        let m = WeightMatrix::from_fn(4, |_, _| 1.5);
        assert_eq!(brute_force_mwpm(&m).unwrap().total_weight, 3.0);
        assert_eq!(mwpm(&m).unwrap().total_weight, 3.0);
    }

    #[test]
    fn six_on_a_line() {
        let m = WeightMatrix::from_fn(6, |i, j| (j - i) as f64);
        let brute = brute_force_mwpm(&m).unwrap();
        assert_eq!(brute.pairs, vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(brute.total_weight, 3.0);
        assert_eq!(mwpm(&m).unwrap(), brute);
    }

    #[test]
    fn missing_edges_respected() {
        // Only the perfect matching {0-3, 1-2} uses existing edges.
        let mut m = WeightMatrix::new(4);
        m.set(0, 1, 1.0);
        m.set(0, 3, 5.0);
        m.set(1, 2, 5.0);
        assert_eq!(mwpm(&m).unwrap().pairs, vec![(0, 3), (1, 2)]);
        let mut none = WeightMatrix::new(4);
        none.set(0, 1, 1.0);
        assert!(matches!(mwpm(&none), Err(Error::NoPerfectMatching)));
        assert!(matches!(brute_force_mwpm(&none), Err(Error::NoPerfectMatching)));
    }

    #[test]
    fn rejects_nan() {
        let mut m = WeightMatrix::from_fn(2, |_, _| 1.0);
        m.set(0, 1, f64::NAN);
        assert!(matches!(mwpm(&m), Err(Error::InvalidWeights)));
    }
}
