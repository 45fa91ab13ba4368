//! Planar surface-code geometry, Pauli frames and ideal syndrome extraction.
//!
//! Sites live on a `(2d-1) x (2d-1)` integer grid. Data qubits occupy the
//! even/even and odd/odd sites; X stabilizers sit at (even row, odd column)
//! and Z stabilizers at (odd row, even column). With this convention the
//! X-error chains terminate on the top and bottom edges (so logical X runs
//! top to bottom along a column) and Z-error chains terminate on the left and
//! right edges.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli with phases discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_components(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn has(self, basis: Basis) -> bool {
        match basis {
            Basis::X => self.has_x(),
            Basis::Z => self.has_z(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }
}

impl Mul for Pauli {
    type Output = Pauli;

    fn mul(self, rhs: Pauli) -> Pauli {
        Pauli::from_components(self.has_x() ^ rhs.has_x(), self.has_z() ^ rhs.has_z())
    }
}

/// Pauli error component. Used both to name an error type and the detector
/// graph that tracks it: the X graph is built from Z-stabilizer outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::X, Basis::Z];

    pub fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Z => 1,
        }
    }

    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::X => "x",
            Basis::Z => "z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Grid (Manhattan) adjacency.
    pub fn is_adjacent(self, other: Coord) -> bool {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col) == 1
    }
}

/// Compass direction from a stabilizer site to one of its data qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    West,
    East,
    South,
}

impl Direction {
    fn index(self) -> usize {
        match self {
            Direction::North => 0,
            Direction::West => 1,
            Direction::East => 2,
            Direction::South => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilizer {
    pub site: Coord,
    /// Adjacent data qubits in ascending index order.
    pub qubits: Vec<usize>,
    neighbors: [Option<usize>; 4],
}

impl Stabilizer {
    pub fn neighbor(&self, direction: Direction) -> Option<usize> {
        self.neighbors[direction.index()]
    }
}

/// Which pair of opposite patch edges a basis' error chains may end on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySides {
    TopBottom,
    LeftRight,
}

/// Distance-`d` planar surface-code patch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    distance: usize,
    data_qubits: Vec<Coord>,
    x_stabilizers: Vec<Stabilizer>,
    z_stabilizers: Vec<Stabilizer>,
    logical_x: Vec<usize>,
    logical_z: Vec<usize>,
    grid: Vec<Option<usize>>,
}

impl CodeLayout {
    pub fn new(distance: usize) -> Result<Self> {
        build_layout(distance)
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn grid_size(&self) -> usize {
        2 * self.distance - 1
    }

    pub fn num_data_qubits(&self) -> usize {
        self.data_qubits.len()
    }

    pub fn data_qubits(&self) -> &[Coord] {
        &self.data_qubits
    }

    pub fn x_stabilizers(&self) -> &[Stabilizer] {
        &self.x_stabilizers
    }

    pub fn z_stabilizers(&self) -> &[Stabilizer] {
        &self.z_stabilizers
    }

    /// Stabilizers whose outcomes flag errors with a component in `basis`.
    pub fn detecting(&self, basis: Basis) -> &[Stabilizer] {
        match basis {
            Basis::X => &self.z_stabilizers,
            Basis::Z => &self.x_stabilizers,
        }
    }

    pub fn logical_x_support(&self) -> &[usize] {
        &self.logical_x
    }

    pub fn logical_z_support(&self) -> &[usize] {
        &self.logical_z
    }

    /// Support that detects a logical flip caused by `basis`-type errors:
    /// X errors are caught by logical Z and vice versa.
    pub fn logical_observable(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::X => &self.logical_z,
            Basis::Z => &self.logical_x,
        }
    }

    pub fn boundary_sides(&self, basis: Basis) -> BoundarySides {
        match basis {
            Basis::X => BoundarySides::TopBottom,
            Basis::Z => BoundarySides::LeftRight,
        }
    }

    pub fn qubit_at(&self, coord: Coord) -> Option<usize> {
        let n = self.grid_size();
        if coord.row >= n || coord.col >= n {
            return None;
        }
        self.grid[coord.row * n + coord.col]
    }

    /// Serializable snapshot of the geometry.
    pub fn to_document(&self) -> LayoutDocument {
        let stab = |s: &Stabilizer| StabilizerDocument {
            site: s.site,
            qubits: s.qubits.clone(),
        };
        LayoutDocument {
            distance: self.distance,
            data_qubits: self.data_qubits.clone(),
            x_stabilizers: self.x_stabilizers.iter().map(stab).collect(),
            z_stabilizers: self.z_stabilizers.iter().map(stab).collect(),
            logical_x_support: self.logical_x.clone(),
            logical_z_support: self.logical_z.clone(),
            x_error_boundaries: self.boundary_sides(Basis::X),
            z_error_boundaries: self.boundary_sides(Basis::Z),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerDocument {
    pub site: Coord,
    pub qubits: Vec<usize>,
}

/// JSON form of a [`CodeLayout`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub distance: usize,
    pub data_qubits: Vec<Coord>,
    pub x_stabilizers: Vec<StabilizerDocument>,
    pub z_stabilizers: Vec<StabilizerDocument>,
    pub logical_x_support: Vec<usize>,
    pub logical_z_support: Vec<usize>,
    pub x_error_boundaries: BoundarySides,
    pub z_error_boundaries: BoundarySides,
}

pub fn build_layout(distance: usize) -> Result<CodeLayout> {
    if distance < 2 {
        return Err(Error::InvalidDistance(distance));
    }
    let n = 2 * distance - 1;
    let mut grid = vec![None; n * n];
    let mut data_qubits = Vec::with_capacity(distance * distance + (distance - 1) * (distance - 1));
    for row in 0..n {
        for col in 0..n {
            if row % 2 == col % 2 {
                grid[row * n + col] = Some(data_qubits.len());
                data_qubits.push(Coord::new(row, col));
            }
        }
    }

    let at = |row: isize, col: isize| -> Option<usize> {
        if row < 0 || col < 0 || row as usize >= n || col as usize >= n {
            None
        } else {
            grid[row as usize * n + col as usize]
        }
    };

    let mut x_stabilizers = Vec::new();
    let mut z_stabilizers = Vec::new();
    for row in 0..n {
        for col in 0..n {
            if row % 2 == col % 2 {
                continue;
            }
            let (r, c) = (row as isize, col as isize);
            let neighbors = [at(r - 1, c), at(r, c - 1), at(r, c + 1), at(r + 1, c)];
            let mut qubits: Vec<usize> = neighbors.iter().flatten().copied().collect();
            qubits.sort_unstable();
            let stabilizer = Stabilizer {
                site: Coord::new(row, col),
                qubits,
                neighbors,
            };
            if row % 2 == 0 {
                x_stabilizers.push(stabilizer);
            } else {
                z_stabilizers.push(stabilizer);
            }
        }
    }

    // Leftmost column carries logical X; top row carries logical Z.
    let logical_x = (0..distance).map(|i| grid[(2 * i) * n].unwrap()).collect();
    let logical_z = (0..distance).map(|i| grid[2 * i].unwrap()).collect();

    Ok(CodeLayout {
        distance,
        data_qubits,
        x_stabilizers,
        z_stabilizers,
        logical_x,
        logical_z,
        grid,
    })
}

/// Accumulated X/Z error record on a register of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    len: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    pub fn identity(len: usize) -> Self {
        let words = len.div_ceil(64);
        Self {
            len,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut frame = Self::identity(paulis.len());
        for (q, &p) in paulis.iter().enumerate() {
            frame.set(q, p);
        }
        frame
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn bit(&self, basis: Basis, q: usize) -> bool {
        match basis {
            Basis::X => self.x_bit(q),
            Basis::Z => self.z_bit(q),
        }
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_components(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.len, "qubit {q} out of range for frame of {}", self.len);
        let mask = 1u64 << (q % 64);
        let w = q / 64;
        self.x[w] = (self.x[w] & !mask) | if p.has_x() { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if p.has_z() { mask } else { 0 };
    }

    /// Multiplies `p` onto qubit `q`.
    pub fn apply(&mut self, q: usize, p: Pauli) {
        assert!(q < self.len, "qubit {q} out of range for frame of {}", self.len);
        let mask = 1u64 << (q % 64);
        if p.has_x() {
            self.x[q / 64] ^= mask;
        }
        if p.has_z() {
            self.z[q / 64] ^= mask;
        }
    }

    pub fn toggle(&mut self, basis: Basis, q: usize) {
        let mask = 1u64 << (q % 64);
        match basis {
            Basis::X => self.x[q / 64] ^= mask,
            Basis::Z => self.z[q / 64] ^= mask,
        }
    }

    pub fn clear(&mut self, q: usize) {
        self.set(q, Pauli::I);
    }

    /// Parity of the `basis` components over `support`.
    pub fn parity(&self, basis: Basis, support: &[usize]) -> bool {
        support.iter().fold(false, |acc, &q| acc ^ self.bit(basis, q))
    }

    /// Number of qubits with a nontrivial Pauli.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Number of qubits whose Pauli has a `basis` component.
    pub fn weight_in(&self, basis: Basis) -> usize {
        let words = match basis {
            Basis::X => &self.x,
            Basis::Z => &self.z,
        };
        words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn compose(&self, other: &PauliFrame) -> Result<PauliFrame> {
        compose(self, other)
    }
}

/// Composition of frames; phases are dropped so this is a bitwise XOR.
pub fn compose(a: &PauliFrame, b: &PauliFrame) -> Result<PauliFrame> {
    if a.len != b.len {
        return Err(Error::SizeMismatch {
            expected: a.len,
            actual: b.len,
        });
    }
    Ok(PauliFrame {
        len: a.len,
        x: a.x.iter().zip(&b.x).map(|(p, q)| p ^ q).collect(),
        z: a.z.iter().zip(&b.z).map(|(p, q)| p ^ q).collect(),
    })
}

/// Violated stabilizers of each type, as sorted index lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Syndrome {
    pub x_stabilizers: Vec<usize>,
    pub z_stabilizers: Vec<usize>,
}

impl Syndrome {
    pub fn is_empty(&self) -> bool {
        self.x_stabilizers.is_empty() && self.z_stabilizers.is_empty()
    }

    /// Violated stabilizers that flag `basis`-type errors.
    pub fn detecting(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::X => &self.z_stabilizers,
            Basis::Z => &self.x_stabilizers,
        }
    }
}

/// Perfect-measurement syndrome of `frame`.
pub fn ideal_syndrome(frame: &PauliFrame, layout: &CodeLayout) -> Result<Syndrome> {
    check_frame(frame, layout)?;
    let violated = |stabs: &[Stabilizer], basis: Basis| -> Vec<usize> {
        stabs
            .iter()
            .enumerate()
            .filter(|(_, s)| frame.parity(basis, &s.qubits))
            .map(|(i, _)| i)
            .collect()
    };
    Ok(Syndrome {
        // X stabilizers anticommute with Z components.
        x_stabilizers: violated(&layout.x_stabilizers, Basis::Z),
        z_stabilizers: violated(&layout.z_stabilizers, Basis::X),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalOutcome {
    /// Residual implements logical X (an X-type failure).
    pub x: bool,
    /// Residual implements logical Z.
    pub z: bool,
}

impl LogicalOutcome {
    pub fn get(&self, basis: Basis) -> bool {
        match basis {
            Basis::X => self.x,
            Basis::Z => self.z,
        }
    }
}

/// Decides whether a syndrome-free residual acts as a logical operator.
pub fn logical_failure(residual: &PauliFrame, layout: &CodeLayout) -> Result<LogicalOutcome> {
    if !ideal_syndrome(residual, layout)?.is_empty() {
        return Err(Error::NonzeroSyndrome);
    }
    Ok(LogicalOutcome {
        x: residual.parity(Basis::X, &layout.logical_z),
        z: residual.parity(Basis::Z, &layout.logical_x),
    })
}

fn check_frame(frame: &PauliFrame, layout: &CodeLayout) -> Result<()> {
    if frame.len() != layout.num_data_qubits() {
        return Err(Error::SizeMismatch {
            expected: layout.num_data_qubits(),
            actual: frame.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts() {
        for (d, data, stabs) in [(2, 5, 2), (3, 13, 6), (4, 25, 12), (7, 85, 42)] {
            let layout = build_layout(d).unwrap();
            assert_eq!(layout.num_data_qubits(), data);
            assert_eq!(layout.num_data_qubits(), d * d + (d - 1) * (d - 1));
            assert_eq!(layout.x_stabilizers().len(), stabs);
            assert_eq!(layout.z_stabilizers().len(), stabs);
        }
    }

    #[test]
    fn rejects_tiny_distance() {
        assert!(matches!(build_layout(1), Err(Error::InvalidDistance(1))));
        assert!(matches!(build_layout(0), Err(Error::InvalidDistance(0))));
    }

    #[test]
    fn stabilizer_membership() {
        for d in 2..=6 {
            let layout = build_layout(d).unwrap();
            let n = layout.num_data_qubits();
            let mut x_count = vec![0; n];
            let mut z_count = vec![0; n];
            for s in layout.x_stabilizers() {
                assert!((2..=4).contains(&s.qubits.len()));
                for &q in &s.qubits {
                    assert!(layout.data_qubits()[q].is_adjacent(s.site));
                    x_count[q] += 1;
                }
            }
            for s in layout.z_stabilizers() {
                assert!((2..=4).contains(&s.qubits.len()));
                for &q in &s.qubits {
                    z_count[q] += 1;
                }
            }
            let last = layout.grid_size() - 1;
            for (q, c) in layout.data_qubits().iter().enumerate() {
                assert!(x_count[q] <= 2 && z_count[q] <= 2);
                let bulk = c.row > 0 && c.col > 0 && c.row < last && c.col < last;
                if bulk {
                    assert_eq!((x_count[q], z_count[q]), (2, 2), "bulk qubit {c:?}");
                }
            }
        }
    }

    #[test]
    fn logical_supports() {
        for d in 2..=7 {
            let layout = build_layout(d).unwrap();
            let lx = layout.logical_x_support();
            let lz = layout.logical_z_support();
            assert_eq!(lx.len(), d);
            assert_eq!(lz.len(), d);
            let shared = lx.iter().filter(|q| lz.contains(q)).count();
            assert_eq!(shared, 1);
        }
        let layout = build_layout(3).unwrap();
        let cols: Vec<Coord> = layout
            .logical_x_support()
            .iter()
            .map(|&q| layout.data_qubits()[q])
            .collect();
        assert_eq!(cols, vec![Coord::new(0, 0), Coord::new(2, 0), Coord::new(4, 0)]);
    }

    #[test]
    fn pauli_algebra() {
        assert_eq!(Pauli::X * Pauli::Z, Pauli::Y);
        assert_eq!(Pauli::Y * Pauli::Y, Pauli::I);
        assert_eq!(Pauli::Y * Pauli::X, Pauli::Z);
        let mut a = PauliFrame::identity(3);
        a.set(1, Pauli::X);
        let mut b = PauliFrame::identity(3);
        b.set(1, Pauli::Z);
        assert_eq!(compose(&a, &b).unwrap().get(1), Pauli::Y);
        assert!(compose(&a, &a).unwrap().is_identity());
        assert_eq!(compose(&PauliFrame::identity(3), &a).unwrap(), a);
        assert!(matches!(
            compose(&a, &PauliFrame::identity(4)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn syndrome_examples() {
        let layout = build_layout(4).unwrap();
        let n = layout.num_data_qubits();
        assert!(ideal_syndrome(&PauliFrame::identity(n), &layout).unwrap().is_empty());

        let q = layout.qubit_at(Coord::new(3, 3)).unwrap();
        let mut f = PauliFrame::identity(n);
        f.set(q, Pauli::Z);
        let s = ideal_syndrome(&f, &layout).unwrap();
        assert_eq!(s.x_stabilizers.len(), 2);
        assert!(s.z_stabilizers.is_empty());

        // Y next to a Z on the left boundary: one X-stabilizer event in the
        // middle of the row and a pair of Z-stabilizer events around the Y.
        let mut f = PauliFrame::identity(n);
        f.set(layout.qubit_at(Coord::new(2, 0)).unwrap(), Pauli::Z);
        f.set(layout.qubit_at(Coord::new(2, 2)).unwrap(), Pauli::Y);
        let s = ideal_syndrome(&f, &layout).unwrap();
        assert_eq!(s.x_stabilizers.len(), 1);
        assert_eq!(layout.x_stabilizers()[s.x_stabilizers[0]].site, Coord::new(2, 3));
        assert_eq!(s.z_stabilizers.len(), 2);

        assert!(ideal_syndrome(&PauliFrame::identity(n + 1), &layout).is_err());
    }

    #[test]
    fn logical_failure_examples() {
        let layout = build_layout(4).unwrap();
        let n = layout.num_data_qubits();
        let none = logical_failure(&PauliFrame::identity(n), &layout).unwrap();
        assert_eq!(none, LogicalOutcome { x: false, z: false });

        let mut lx = PauliFrame::identity(n);
        for &q in layout.logical_x_support() {
            lx.set(q, Pauli::X);
        }
        assert_eq!(
            logical_failure(&lx, &layout).unwrap(),
            LogicalOutcome { x: true, z: false }
        );

        for stab in layout.x_stabilizers().iter().chain(layout.z_stabilizers()) {
            let p = if layout.x_stabilizers().contains(stab) {
                Pauli::X
            } else {
                Pauli::Z
            };
            let mut f = PauliFrame::identity(n);
            for &q in &stab.qubits {
                f.set(q, p);
            }
            assert_eq!(logical_failure(&f, &layout).unwrap(), LogicalOutcome::default());
        }

        let mut bad = PauliFrame::identity(n);
        bad.set(7, Pauli::X);
        assert!(matches!(logical_failure(&bad, &layout), Err(Error::NonzeroSyndrome)));
    }

    /// Exhaustive search over X-error supports: the lightest undetectable
    /// logical X error has exactly `d` qubits, and there are exactly `d` of
    /// them.
    #[test]
    fn minimum_logical_weight_is_distance() {
        for d in 2..=4 {
            let layout = build_layout(d).unwrap();
            let n = layout.num_data_qubits();
            let mut min_weight = usize::MAX;
            let mut count_at_min = 0;
            // Enumerate supports up to weight d.
            let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, vec![])];
            while let Some((start, chosen)) = stack.pop() {
                if !chosen.is_empty() {
                    let mut f = PauliFrame::identity(n);
                    for &q in &chosen {
                        f.set(q, Pauli::X);
                    }
                    let s = ideal_syndrome(&f, &layout).unwrap();
                    if s.is_empty() && logical_failure(&f, &layout).unwrap().x {
                        match chosen.len().cmp(&min_weight) {
                            std::cmp::Ordering::Less => {
                                min_weight = chosen.len();
                                count_at_min = 1;
                            }
                            std::cmp::Ordering::Equal => count_at_min += 1,
                            std::cmp::Ordering::Greater => {}
                        }
                    }
                }
                if chosen.len() == d {
                    continue;
                }
                for q in start..n {
                    let mut next = chosen.clone();
                    next.push(q);
                    stack.push((q + 1, next));
                }
            }
            assert_eq!(min_weight, d, "d={d}");
            assert_eq!(count_at_min, d, "d={d}");
        }
    }

    #[test]
    fn layout_json_is_stable() {
        let layout = build_layout(2).unwrap();
        let doc: LayoutDocument = serde_json::from_str(&layout.to_json().unwrap()).unwrap();
        assert_eq!(doc, layout.to_document());
        assert_eq!(doc.x_stabilizers[0].site, Coord::new(0, 1));
        assert_eq!(doc.x_stabilizers[0].qubits, vec![0, 1, 2]);
    }
}
