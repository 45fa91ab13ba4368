//! Planar surface code simulation with independent and correlated
//! minimum-weight perfect-matching decoders.

pub mod analytics;
pub mod circuit;
pub mod code;
pub mod correlated;
pub mod error;
pub mod harness;
pub mod matching;
pub mod tracer;

pub use circuit::{
    build_cycle_circuit, detection_events, propagate, sample_noise, Circuit, Fault, FaultKind, Gate, GateKind,
    MeasurementRecord, NoiseModel, SyndromeInstance,
};
pub use code::{
    build_layout, compose, ideal_syndrome, logical_failure, Basis, CodeLayout, Coord, LogicalOutcome, Pauli,
    PauliFrame, Stabilizer, Syndrome,
};
pub use correlated::{
    correlated_decode, find_unit_matches, reweight_2d, reweight_3d, CorrelatedDecoder, CorrelatedDecoding, PairDecoder,
    ReweightRule, ReweightSet,
};
pub use error::{Error, Result};
pub use harness::{fit_slope, run, sweep, wilson_interval, DecoderKind, Mode, TrialConfig, TrialStats};
pub use matching::{brute_force_mwpm, decode, mwpm, shortest_paths, Decoder, Decoding, Matching, WeightMatrix};
pub use tracer::{
    build_detector_graphs, trace_all_single_faults, trace_perfect_measurement, DetectorEdge, DetectorGraph,
    DetectorModel, ErrorSource, SourceTable,
};
