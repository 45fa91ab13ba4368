//! Nearest-neighbour syndrome-extraction circuits, gate-level depolarizing
//! noise and Pauli-frame propagation.
//!
//! Qubit ids: data qubits first (same order as the layout), then one ancilla
//! per X stabilizer, then one per Z stabilizer. Every round spans six time
//! steps: ancilla initialization, four CNOT layers and ancilla measurement.
//! Qubits not acted on in a step receive an explicit idle gate.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{Basis, CodeLayout, Coord, Direction, Pauli, PauliFrame, Syndrome};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    InitZ,
    InitX,
    Cnot,
    MeasureZ,
    MeasureX,
    Idle,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::InitZ => "init_z",
            GateKind::InitX => "init_x",
            GateKind::Cnot => "cnot",
            GateKind::MeasureZ => "measure_z",
            GateKind::MeasureX => "measure_x",
            GateKind::Idle => "idle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    /// `targets[1]` is only meaningful for CNOT (control, target).
    pub targets: [u32; 2],
    pub step: u32,
}

impl Gate {
    pub fn targets(&self) -> &[u32] {
        if self.kind == GateKind::Cnot {
            &self.targets
        } else {
            &self.targets[..1]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitRole {
    Data,
    /// Ancilla of the X stabilizer with this index.
    XAncilla(usize),
    /// Ancilla of the Z stabilizer with this index.
    ZAncilla(usize),
}

/// Which stabilizer outcome a measurement gate produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementSlot {
    /// Error basis flagged by this stabilizer (Z stabilizers flag X errors).
    pub basis: Basis,
    pub stabilizer: usize,
    pub round: usize,
}

/// Data CNOT order for Z stabilizers.
pub const Z_SCHEDULE: [Direction; 4] = [Direction::North, Direction::West, Direction::East, Direction::South];
/// Data CNOT order for X stabilizers.
pub const X_SCHEDULE: [Direction; 4] = [Direction::North, Direction::East, Direction::West, Direction::South];

pub const STEPS_PER_ROUND: usize = 6;

#[derive(Clone, Debug)]
pub struct Circuit {
    layout: CodeLayout,
    rounds: usize,
    roles: Vec<QubitRole>,
    gates: Vec<Gate>,
    /// Index of the first gate of every step, plus a final sentinel.
    step_starts: Vec<usize>,
    measurement_slots: Vec<Option<MeasurementSlot>>,
}

impl Circuit {
    pub fn layout(&self) -> &CodeLayout {
        &self.layout
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn num_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn num_data_qubits(&self) -> usize {
        self.layout.num_data_qubits()
    }

    pub fn roles(&self) -> &[QubitRole] {
        &self.roles
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_steps(&self) -> usize {
        self.step_starts.len() - 1
    }

    pub fn step(&self, step: usize) -> &[Gate] {
        &self.gates[self.step_starts[step]..self.step_starts[step + 1]]
    }

    pub fn measurement_slot(&self, gate: usize) -> Option<MeasurementSlot> {
        self.measurement_slots[gate]
    }

    /// Grid coordinate of any circuit qubit (ancillas sit on their stabilizer site).
    pub fn coord(&self, qubit: usize) -> Coord {
        match self.roles[qubit] {
            QubitRole::Data => self.layout.data_qubits()[qubit],
            QubitRole::XAncilla(s) => self.layout.x_stabilizers()[s].site,
            QubitRole::ZAncilla(s) => self.layout.z_stabilizers()[s].site,
        }
    }

    /// Line-oriented dump: one gate per line as `step kind target...`, then
    /// one `readout` line per data qubit for the final ideal readout.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            write!(out, "{} {}", gate.step, gate.kind.name()).unwrap();
            for t in gate.targets() {
                write!(out, " {t}").unwrap();
            }
            out.push('\n');
        }
        let final_step = self.num_steps();
        for q in 0..self.num_data_qubits() {
            writeln!(out, "{final_step} readout {q}").unwrap();
        }
        out
    }
}

pub fn build_cycle_circuit(layout: &CodeLayout, rounds: usize) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("a circuit needs at least one round".into()));
    }
    let num_data = layout.num_data_qubits();
    let nx = layout.x_stabilizers().len();
    let nz = layout.z_stabilizers().len();
    let mut roles = vec![QubitRole::Data; num_data];
    roles.extend((0..nx).map(QubitRole::XAncilla));
    roles.extend((0..nz).map(QubitRole::ZAncilla));
    let num_qubits = roles.len();
    let x_anc = |s: usize| (num_data + s) as u32;
    let z_anc = |s: usize| (num_data + nx + s) as u32;

    let mut gates = Vec::new();
    let mut step_starts = Vec::new();
    let mut measurement_slots = Vec::new();
    let mut busy = vec![false; num_qubits];

    let push = |gates: &mut Vec<Gate>, slots: &mut Vec<Option<MeasurementSlot>>, gate: Gate, slot| {
        gates.push(gate);
        slots.push(slot);
    };

    for round in 0..rounds {
        for layer in 0..STEPS_PER_ROUND {
            let step = (round * STEPS_PER_ROUND + layer) as u32;
            step_starts.push(gates.len());
            busy.iter_mut().for_each(|b| *b = false);
            match layer {
                0 => {
                    for s in 0..nx {
                        let g = Gate {
                            kind: GateKind::InitX,
                            targets: [x_anc(s), 0],
                            step,
                        };
                        push(&mut gates, &mut measurement_slots, g, None);
                        busy[x_anc(s) as usize] = true;
                    }
                    for s in 0..nz {
                        let g = Gate {
                            kind: GateKind::InitZ,
                            targets: [z_anc(s), 0],
                            step,
                        };
                        push(&mut gates, &mut measurement_slots, g, None);
                        busy[z_anc(s) as usize] = true;
                    }
                }
                1..=4 => {
                    let k = layer - 1;
                    // X stabilizer: ancilla controls the data qubit.
                    for (s, stab) in layout.x_stabilizers().iter().enumerate() {
                        if let Some(q) = stab.neighbor(X_SCHEDULE[k]) {
                            let g = Gate {
                                kind: GateKind::Cnot,
                                targets: [x_anc(s), q as u32],
                                step,
                            };
                            push(&mut gates, &mut measurement_slots, g, None);
                            busy[x_anc(s) as usize] = true;
                            busy[q] = true;
                        }
                    }
                    // Z stabilizer: data qubit controls the ancilla.
                    for (s, stab) in layout.z_stabilizers().iter().enumerate() {
                        if let Some(q) = stab.neighbor(Z_SCHEDULE[k]) {
                            debug_assert!(!busy[q], "schedule collision on data qubit {q}");
                            let g = Gate {
                                kind: GateKind::Cnot,
                                targets: [q as u32, z_anc(s)],
                                step,
                            };
                            push(&mut gates, &mut measurement_slots, g, None);
                            busy[z_anc(s) as usize] = true;
                            busy[q] = true;
                        }
                    }
                }
                _ => {
                    for s in 0..nx {
                        let g = Gate {
                            kind: GateKind::MeasureX,
                            targets: [x_anc(s), 0],
                            step,
                        };
                        let slot = MeasurementSlot {
                            basis: Basis::Z,
                            stabilizer: s,
                            round,
                        };
                        push(&mut gates, &mut measurement_slots, g, Some(slot));
                        busy[x_anc(s) as usize] = true;
                    }
                    for s in 0..nz {
                        let g = Gate {
                            kind: GateKind::MeasureZ,
                            targets: [z_anc(s), 0],
                            step,
                        };
                        let slot = MeasurementSlot {
                            basis: Basis::X,
                            stabilizer: s,
                            round,
                        };
                        push(&mut gates, &mut measurement_slots, g, Some(slot));
                        busy[z_anc(s) as usize] = true;
                    }
                }
            }
            for (q, &used) in busy.iter().enumerate() {
                if !used {
                    let g = Gate {
                        kind: GateKind::Idle,
                        targets: [q as u32, 0],
                        step,
                    };
                    push(&mut gates, &mut measurement_slots, g, None);
                }
            }
        }
    }
    step_starts.push(gates.len());

    Ok(Circuit {
        layout: layout.clone(),
        rounds,
        roles,
        gates,
        step_starts,
        measurement_slots,
    })
}

/// A nontrivial outcome of one gate's noise channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// Pauli applied after a single-qubit gate (init, idle) or onto a data
    /// qubit in perfect-measurement mode.
    Single(Pauli),
    /// Pauli pair applied after a CNOT, on (control, target).
    Pair(Pauli, Pauli),
    /// The reported measurement outcome is flipped.
    Flip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fault {
    pub gate: usize,
    pub kind: FaultKind,
}

/// Balanced depolarizing noise: every gate fails with probability `p`, the
/// failure being uniform over the channel's nontrivial outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing probability {p} outside [0, 1)"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Nontrivial outcomes of the channel attached to a gate kind.
    pub fn channel(kind: GateKind) -> Vec<FaultKind> {
        match kind {
            GateKind::Idle => Pauli::NONTRIVIAL.iter().map(|&p| FaultKind::Single(p)).collect(),
            GateKind::Cnot => {
                let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
                let mut out = Vec::with_capacity(15);
                for &a in &all {
                    for &b in &all {
                        if !(a.is_identity() && b.is_identity()) {
                            out.push(FaultKind::Pair(a, b));
                        }
                    }
                }
                out
            }
            GateKind::InitZ => vec![FaultKind::Single(Pauli::X)],
            GateKind::InitX => vec![FaultKind::Single(Pauli::Z)],
            GateKind::MeasureZ | GateKind::MeasureX => vec![FaultKind::Flip],
        }
    }

    /// Probability of one specific nontrivial outcome of `kind`'s channel.
    pub fn outcome_probability(&self, kind: GateKind) -> f64 {
        self.p / Self::channel(kind).len() as f64
    }
}

/// Samples locations that fail independently with a common probability by
/// skipping geometrically distributed gaps.
#[derive(Clone, Copy, Debug)]
pub struct FailureSampler {
    p: f64,
    inv_log_q: f64,
}

impl FailureSampler {
    pub fn new(p: f64) -> Self {
        let inv_log_q = if p > 0.0 { 1.0 / (1.0 - p).ln() } else { 0.0 };
        Self { p, inv_log_q }
    }

    /// Calls `hit` with the index of every failing location in `0..len`, in
    /// increasing order.
    pub fn for_each_failure<R: Rng + ?Sized>(&self, rng: &mut R, len: usize, mut hit: impl FnMut(usize, &mut R)) {
        if self.p <= 0.0 {
            return;
        }
        let mut i = 0usize;
        loop {
            // 1 - u lies in (0, 1], so the log is finite.
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = (u.ln() * self.inv_log_q).floor();
            if gap >= (len - i) as f64 {
                return;
            }
            i += gap as usize;
            hit(i, rng);
            i += 1;
            if i >= len {
                return;
            }
        }
    }
}

pub fn sample_noise(circuit: &Circuit, noise: &NoiseModel, seed: u64) -> Vec<Fault> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_noise_with(circuit, noise, &mut rng)
}

pub fn sample_noise_with<R: Rng + ?Sized>(circuit: &Circuit, noise: &NoiseModel, rng: &mut R) -> Vec<Fault> {
    let mut faults = Vec::new();
    let gates = circuit.gates();
    FailureSampler::new(noise.p()).for_each_failure(rng, gates.len(), |g, rng| {
        let channel = NoiseModel::channel(gates[g].kind);
        let kind = channel[rng.random_range(0..channel.len())];
        faults.push(Fault { gate: g, kind });
    });
    faults
}

/// Outcome bits of every stabilizer measurement plus the final data frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    rounds: usize,
    /// Indexed by `Basis::index()`; `round * num_stabilizers + stabilizer`.
    outcomes: [Vec<bool>; 2],
    final_frame: PauliFrame,
}

impl MeasurementRecord {
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Outcome of the stabilizer flagging `basis` errors, at `round`.
    pub fn outcome(&self, basis: Basis, stabilizer: usize, round: usize) -> bool {
        let per = self.outcomes[basis.index()].len() / self.rounds;
        self.outcomes[basis.index()][round * per + stabilizer]
    }

    /// Data-qubit error frame at the final ideal readout.
    pub fn final_frame(&self) -> &PauliFrame {
        &self.final_frame
    }
}

/// Pauli-frame propagation of `faults` through `circuit`.
pub fn propagate(circuit: &Circuit, faults: &[Fault]) -> MeasurementRecord {
    let mut sorted: Vec<Fault> = faults.to_vec();
    sorted.sort_by_key(|f| f.gate);
    propagate_from(circuit, &sorted, 0)
}

/// Propagation starting at `first_step`; all faults must sit at or after it.
pub(crate) fn propagate_from(circuit: &Circuit, sorted_faults: &[Fault], first_step: usize) -> MeasurementRecord {
    let layout = circuit.layout();
    let rounds = circuit.rounds();
    let mut frame = PauliFrame::identity(circuit.num_qubits());
    let mut outcomes = [
        vec![false; layout.z_stabilizers().len() * rounds],
        vec![false; layout.x_stabilizers().len() * rounds],
    ];
    let mut next_fault = 0;
    let start = circuit.step_starts[first_step];
    for (offset, gate) in circuit.gates()[start..].iter().enumerate() {
        let g = start + offset;
        let [a, b] = gate.targets.map(|t| t as usize);
        let mut flip = false;
        match gate.kind {
            GateKind::InitZ | GateKind::InitX => frame.clear(a),
            GateKind::Cnot => {
                if frame.x_bit(a) {
                    frame.toggle(Basis::X, b);
                }
                if frame.z_bit(b) {
                    frame.toggle(Basis::Z, a);
                }
            }
            GateKind::Idle | GateKind::MeasureZ | GateKind::MeasureX => {}
        }
        while next_fault < sorted_faults.len() && sorted_faults[next_fault].gate == g {
            match sorted_faults[next_fault].kind {
                FaultKind::Single(p) => frame.apply(a, p),
                FaultKind::Pair(p, q) => {
                    frame.apply(a, p);
                    frame.apply(b, q);
                }
                FaultKind::Flip => flip ^= true,
            }
            next_fault += 1;
        }
        let measured = match gate.kind {
            GateKind::MeasureZ => Some(frame.x_bit(a)),
            GateKind::MeasureX => Some(frame.z_bit(a)),
            _ => None,
        };
        if let Some(bit) = measured {
            let slot = circuit.measurement_slots[g].expect("measurement gate without slot");
            let per = outcomes[slot.basis.index()].len() / rounds;
            outcomes[slot.basis.index()][slot.round * per + slot.stabilizer] = bit ^ flip;
        }
    }
    debug_assert_eq!(
        next_fault,
        sorted_faults.len(),
        "fault references a gate outside the circuit"
    );

    let num_data = circuit.num_data_qubits();
    let mut final_frame = PauliFrame::identity(num_data);
    for q in 0..num_data {
        final_frame.set(q, frame.get(q));
    }
    MeasurementRecord {
        rounds,
        outcomes,
        final_frame,
    }
}

/// Observed detection events for one trial. Vertex ids follow the detector
/// graph convention `layer * stabilizers_per_layer + stabilizer`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyndromeInstance {
    /// Indexed by `Basis::index()`, each sorted ascending.
    pub events: [Vec<u32>; 2],
}

impl SyndromeInstance {
    pub fn get(&self, basis: Basis) -> &[u32] {
        &self.events[basis.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.events.iter().all(Vec::is_empty)
    }

    /// Symmetric difference with another instance.
    pub fn symmetric_difference(&self, other: &SyndromeInstance) -> SyndromeInstance {
        let mut out = SyndromeInstance::default();
        for b in 0..2 {
            let mut v: Vec<u32> = self.events[b].iter().chain(&other.events[b]).copied().collect();
            out.events[b] = cancel_pairs(&mut v);
        }
        out
    }
}

impl From<&Syndrome> for SyndromeInstance {
    /// Perfect-measurement events: one layer, vertex id = stabilizer index.
    fn from(s: &Syndrome) -> Self {
        Self {
            events: Basis::BOTH.map(|b| s.detecting(b).iter().map(|&i| i as u32).collect()),
        }
    }
}

/// Sorts `v` and removes values that appear an even number of times.
pub fn cancel_pairs(v: &mut [u32]) -> Vec<u32> {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

/// Differences of temporally consecutive outcomes per stabilizer. The final
/// layer compares the last measured round against the ideal readout of the
/// data qubits, so every error chain terminates.
pub fn detection_events(record: &MeasurementRecord, layout: &CodeLayout) -> SyndromeInstance {
    let mut out = SyndromeInstance::default();
    for basis in Basis::BOTH {
        let stabs = layout.detecting(basis);
        let m = stabs.len();
        let events = &mut out.events[basis.index()];
        for (s, stab) in stabs.iter().enumerate() {
            let mut previous = false;
            for round in 0..record.rounds {
                let now = record.outcome(basis, s, round);
                if now != previous {
                    events.push((round * m + s) as u32);
                }
                previous = now;
            }
            let ideal = record.final_frame.parity(basis, &stab.qubits);
            if ideal != previous {
                events.push((record.rounds * m + s) as u32);
            }
        }
        events.sort_unstable();
    }
    out
}
