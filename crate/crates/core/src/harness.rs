//! Monte Carlo estimation of logical error rates.
//!
//! Trials are grouped into fixed-size batches and batches into fixed-size
//! waves. Each trial draws from its own generator seeded by a hash of the
//! master seed and the trial index, so totals do not depend on how many
//! workers run the batches.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::rngs::SmallRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::code::{build_layout, Basis};
use crate::correlated::{CorrelatedDecoder, PairDecoder};
use crate::error::{Error, Result};
use crate::tracer::DetectorModel;

/// Threshold scales quoted in report captions.
pub const THRESHOLD_PERFECT_MEASUREMENT: f64 = 1e-2;
pub const THRESHOLD_CIRCUIT_LEVEL: f64 = 2e-4;

const BATCH_TRIALS: u64 = 4096;
const WAVE_BATCHES: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "perfect2d")]
    Perfect2d,
    #[serde(rename = "fault_tolerant3d")]
    FaultTolerant3d,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Perfect2d => "perfect2d",
            Mode::FaultTolerant3d => "fault_tolerant3d",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect2d" => Ok(Mode::Perfect2d),
            "fault_tolerant3d" => Ok(Mode::FaultTolerant3d),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Independent,
    Correlated,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Independent => "independent",
            DecoderKind::Correlated => "correlated",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(DecoderKind::Independent),
            "correlated" => Ok(DecoderKind::Correlated),
            _ => Err(Error::InvalidConfig(format!("unknown decoder {s:?}"))),
        }
    }
}

/// Stop a cell once both limits are reached. Checked between waves, so the
/// stopping point is independent of the worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub min_trials: u64,
    pub max_failures: u64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            min_trials: 0,
            max_failures: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub mode: Mode,
    pub decoder: DecoderKind,
    pub d: usize,
    pub p: f64,
    /// Noisy rounds in fault-tolerant mode; defaults to `d`.
    pub rounds: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub early_stop: Option<EarlyStop>,
    /// Skip decoding of trials whose outcome is fixed by the code distance.
    /// Never changes results; off only for equivalence checks.
    pub shortcut: bool,
}

impl TrialConfig {
    pub fn new(mode: Mode, decoder: DecoderKind, d: usize, p: f64, trials: u64, seed: u64) -> Self {
        Self {
            mode,
            decoder,
            d,
            p,
            rounds: None,
            trials,
            seed,
            workers: 1,
            early_stop: None,
            shortcut: true,
        }
    }

    /// Rounds actually simulated: 1 with perfect measurement.
    pub fn effective_rounds(&self) -> usize {
        match self.mode {
            Mode::Perfect2d => 1,
            Mode::FaultTolerant3d => self.rounds.unwrap_or(self.d),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("p must lie in [0, 0.5), got {}", self.p)));
        }
        if self.d < 3 {
            return Err(Error::InvalidConfig(format!(
                "distance must be at least 3, got {}",
                self.d
            )));
        }
        if self.rounds == Some(0) {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub mode: Mode,
    pub decoder: DecoderKind,
    pub d: usize,
    pub p: f64,
    pub rounds: usize,
    pub trials: u64,
    pub failures_x: u64,
    pub failures_z: u64,
    /// X-basis logical error rate: per trial with perfect measurement, per
    /// round in fault-tolerant mode.
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub stopped_early: bool,
    pub wall_time_s: f64,
}

impl TrialStats {
    pub fn failures(&self, basis: Basis) -> u64 {
        match basis {
            Basis::X => self.failures_x,
            Basis::Z => self.failures_z,
        }
    }

    /// Per-trial X-basis failure fraction, before any per-round scaling.
    pub fn trial_failure_rate(&self) -> f64 {
        self.failures_x as f64 / self.trials as f64
    }
}

/// Seed of trial `index` under `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ 0x6A09_E667_F3BC_C909;
    z = z.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-round rate from a failure probability over `rounds` rounds.
pub fn per_round(p_fail: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - p_fail).powf(1.0 / rounds as f64)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(failures: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || failures > trials {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= failures <= trials and trials > 0, got {failures}/{trials}"
        )));
    }
    if !(0.0..1.0).contains(&confidence) || confidence == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = z * z;
    let center = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if failures == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((low, high))
}

/// Least-squares slope of `ln p_l` against `ln p` over points with nonzero
/// `p_l`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(p, pl)| *p > 0.0 && *pl > 0.0)
        .map(|(p, pl)| (p.ln(), pl.ln()))
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 3 points with failures, got {}",
            used.len()
        )));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|u| u.0).sum::<f64>() / n;
    let my = used.iter().map(|u| u.1).sum::<f64>() / n;
    let sxy: f64 = used.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = used.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("slope fit needs distinct p values".into()));
    }
    Ok(sxy / sxx)
}

/// Builds the detector model a configuration decodes with.
pub fn build_model(config: &TrialConfig) -> Result<DetectorModel> {
    let layout = build_layout(config.d)?;
    match config.mode {
        Mode::Perfect2d => DetectorModel::perfect_measurement(&layout, config.p),
        Mode::FaultTolerant3d => DetectorModel::circuit_level(&layout, config.effective_rounds(), config.p),
    }
}

enum TrialDecoder<'m> {
    Independent(PairDecoder<'m>),
    Correlated(CorrelatedDecoder<'m>),
}

impl<'m> TrialDecoder<'m> {
    fn new(model: &'m DetectorModel, kind: DecoderKind) -> Self {
        match kind {
            DecoderKind::Independent => TrialDecoder::Independent(PairDecoder::new(model)),
            DecoderKind::Correlated => TrialDecoder::Correlated(CorrelatedDecoder::new(model)),
        }
    }
}

/// Reusable per-worker state for running trials of one model.
pub struct TrialRunner<'m> {
    model: &'m DetectorModel,
    decoder: TrialDecoder<'m>,
    faults: Vec<u32>,
    always_corrected: usize,
}

impl<'m> TrialRunner<'m> {
    pub fn new(model: &'m DetectorModel, kind: DecoderKind) -> Self {
        Self {
            model,
            decoder: TrialDecoder::new(model, kind),
            faults: Vec::new(),
            always_corrected: 0,
        }
    }

    /// Skips decoding for trials with at most `(d - 1) / 2` faults where
    /// that cannot change the outcome: independent matching on a graph with
    /// uniform weights picks a correction no heavier than the error, so
    /// their sum stays below the code distance.
    pub fn with_distance_shortcut(mut self, d: usize) -> Self {
        let uniform = Basis::BOTH.iter().all(|&b| {
            let edges = self.model.graph(b).edges();
            edges.iter().all(|e| e.weight == edges[0].weight)
        });
        if self.model.is_perfect_measurement() && uniform && matches!(self.decoder, TrialDecoder::Independent(_)) {
            self.always_corrected = (d - 1) / 2;
        }
        self
    }

    /// Runs one trial; returns whether each basis suffered a logical error.
    pub fn run(&mut self, seed: u64) -> Result<[bool; 2]> {
        let mut rng = SmallRng::seed_from_u64(seed);
        let sources = self.model.sources();
        sources.sample(&mut rng, &mut self.faults);
        if self.faults.len() <= self.always_corrected || self.faults.is_empty() {
            return Ok([false; 2]);
        }
        let (syndrome, flips) = sources.syndrome_of(&self.faults);
        if syndrome.is_empty() {
            return Ok(flips);
        }
        let corrections = match &mut self.decoder {
            TrialDecoder::Independent(d) => d.decode(&syndrome, seed)?.map(|c| c.logical_flip),
            TrialDecoder::Correlated(d) => d.decode(&syndrome, seed)?.output.map(|c| c.logical_flip),
        };
        Ok([flips[0] ^ corrections[0], flips[1] ^ corrections[1]])
    }
}

/// Runs one configuration.
pub fn run(config: &TrialConfig) -> Result<TrialStats> {
    config.validate()?;
    let model = build_model(config)?;
    run_with_model(config, &model)
}

/// Runs one configuration against a prebuilt model.
pub fn run_with_model(config: &TrialConfig, model: &DetectorModel) -> Result<TrialStats> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let batches = config.trials.div_ceil(BATCH_TRIALS);
    let mut failures = [0u64; 2];
    let mut done = 0u64;
    let mut stopped_early = false;
    let mut wave_start = 0;
    while wave_start < batches {
        let wave_end = (wave_start + WAVE_BATCHES).min(batches);
        let results: Vec<Result<[u64; 2]>> = pool.install(|| {
            (wave_start..wave_end)
                .into_par_iter()
                .map_init(
                    || {
                        let runner = TrialRunner::new(model, config.decoder);
                        if config.shortcut {
                            runner.with_distance_shortcut(config.d)
                        } else {
                            runner
                        }
                    },
                    |runner, batch| {
                        let first = batch * BATCH_TRIALS;
                        let last = (first + BATCH_TRIALS).min(config.trials);
                        let mut f = [0u64; 2];
                        for i in first..last {
                            let out = runner.run(child_seed(config.seed, i))?;
                            f[0] += u64::from(out[0]);
                            f[1] += u64::from(out[1]);
                        }
                        Ok(f)
                    },
                )
                .collect()
        });
        for r in results {
            let f = r?;
            failures[0] += f[0];
            failures[1] += f[1];
        }
        done = (wave_end * BATCH_TRIALS).min(config.trials);
        wave_start = wave_end;
        if let Some(stop) = config.early_stop {
            if wave_start < batches && done >= stop.min_trials && failures[0] >= stop.max_failures {
                stopped_early = true;
                break;
            }
        }
    }
    let rounds = config.effective_rounds();
    let (low, high) = wilson_interval(failures[0], done, 0.95)?;
    let scale = |x: f64| match config.mode {
        Mode::Perfect2d => x,
        Mode::FaultTolerant3d => per_round(x, rounds),
    };
    Ok(TrialStats {
        mode: config.mode,
        decoder: config.decoder,
        d: config.d,
        p: config.p,
        rounds,
        trials: done,
        failures_x: failures[0],
        failures_z: failures[1],
        p_l: scale(failures[0] as f64 / done as f64),
        ci_low: scale(low),
        ci_high: scale(high),
        seed: config.seed,
        stopped_early,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One run per `(d, p)` pair, `d` outermost.
pub fn sweep(ds: &[usize], ps: &[f64], base: &TrialConfig) -> Result<Vec<TrialStats>> {
    if ds.is_empty() || ps.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one d and one p".into()));
    }
    let mut out = Vec::with_capacity(ds.len() * ps.len());
    for &d in ds {
        for &p in ps {
            let config = TrialConfig { d, p, ..base.clone() };
            out.push(run(&config)?);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow {
    mode: Mode,
    decoder: DecoderKind,
    d: usize,
    p: f64,
    rounds: usize,
    trials: u64,
    failures_x: u64,
    failures_z: u64,
    p_l: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "mode",
    "decoder",
    "d",
    "p",
    "rounds",
    "trials",
    "failures_x",
    "failures_z",
    "p_l",
    "ci_low",
    "ci_high",
    "seed",
];

pub fn write_csv<W: Write>(stats: &[TrialStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if stats.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for s in stats {
        w.serialize(CsvRow {
            mode: s.mode,
            decoder: s.decoder,
            d: s.d,
            p: s.p,
            rounds: s.rounds,
            trials: s.trials,
            failures_x: s.failures_x,
            failures_z: s.failures_z,
            p_l: s.p_l,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            seed: s.seed,
        })?;
    }
    w.flush()?;
    Ok(())
}
