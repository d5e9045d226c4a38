//! Monte-Carlo memory experiments: compile, lower, verify, sample, decode.

mod fit;
mod results;
mod stats;

pub use fit::{fit_curve, formula, published_fit, FitResult, FitRow, PUBLISHED_FITS};
pub use results::{export_results, read_results, write_results, CSV_COLUMNS};
pub use stats::{per_round, total_from_per_round, wilson_interval, Z95};

use serde::{Deserialize, Serialize};

use crate::catalog::builtin_code;
use crate::circuit::{build_memory_experiment, NoiseModel};
use crate::code::{BBCode, Basis};
use crate::decoder::{Decoder, DecoderConfig};
use crate::dem::detector_error_model;
use crate::error::{Error, Result};
use crate::layout::LayoutKind;
use crate::machine::Parallelism;
use crate::sim::{sample, verify_memory};

pub const DEFAULT_P_GRID: [f64; 6] = [1e-3, 2e-3, 3e-3, 5e-3, 7e-3, 1e-2];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub code: String,
    pub layout: LayoutKind,
    pub basis: Basis,
    pub p_values: Vec<f64>,
    pub tau_s: u32,
    pub tau_m: u32,
    /// Defaults to the code's known distance.
    pub rounds: Option<usize>,
    pub shots: usize,
    pub seed: u64,
    pub decoder: DecoderConfig,
    pub parallelism: Parallelism,
}

impl ExperimentSpec {
    /// Defaults follow the layout's hardware model: flat modules are short
    /// chains with parallel gates and faster transport.
    pub fn new(code: &str, layout: LayoutKind) -> Self {
        let flat = layout == LayoutKind::Flat;
        Self {
            code: code.to_owned(),
            layout,
            basis: Basis::Z,
            p_values: DEFAULT_P_GRID.to_vec(),
            tau_s: if flat { NoiseModel::FLAT_TAU_S } else { NoiseModel::LONG_CHAIN_TAU_S },
            tau_m: NoiseModel::DEFAULT_TAU_M,
            rounds: None,
            shots: 10_000,
            seed: 0,
            decoder: DecoderConfig::default(),
            parallelism: if flat { Parallelism::Full } else { Parallelism::ChainSequential },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Experiment("at least one shot is required".into()));
        }
        if let Some(&p) = self.p_values.iter().find(|&&p| !(0.0..1.0).contains(&p)) {
            return Err(Error::Experiment(format!("p = {p} is outside [0, 1)")));
        }
        if self.rounds == Some(0) {
            return Err(Error::Experiment("at least one round is required".into()));
        }
        self.decoder.validate()
    }

    fn rounds_for(&self, code: &BBCode) -> Result<usize> {
        self.rounds.or(code.known_distance).ok_or_else(|| {
            Error::Experiment(format!("code {} has no known distance; set the number of rounds", code.name))
        })
    }

    /// Seed of the point at `p`: a hash of every field that shapes the
    /// experiment except the shot count, mixed with the master seed.
    pub fn point_seed(&self, p: f64, rounds: usize) -> u64 {
        let key = format!(
            "{}|{}|{}|{:016x}|{}|{}|{}|{}|{:?}",
            self.code,
            self.layout,
            self.basis,
            p.to_bits(),
            self.tau_s,
            self.tau_m,
            rounds,
            self.decoder.label(),
            self.parallelism
        );
        // 64-bit FNV-1a, then a splitmix finalizer with the master seed.
        let h = key.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        let mut z = h ^ self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorEstimate {
    pub code: String,
    pub layout: String,
    pub basis: Basis,
    pub p: f64,
    pub tau_s: u32,
    pub tau_m: u32,
    #[serde(rename = "T")]
    pub rounds: usize,
    pub shots: usize,
    pub failures: usize,
    pub p_fail_total: f64,
    #[serde(rename = "p_L_round")]
    pub p_l_round: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub decoder: String,
    pub timestamp: String,
}

impl LogicalErrorEstimate {
    /// Same estimate with the timestamp blanked, for determinism checks.
    pub fn without_timestamp(&self) -> Self {
        Self { timestamp: String::new(), ..self.clone() }
    }
}

/// Everything produced for one grid point, before statistics.
pub struct PointRun {
    pub rounds: usize,
    pub seed: u64,
    pub failure_flags: Vec<bool>,
    pub shift_channels: usize,
}

/// Compiles, verifies, samples and decodes one point of the grid.
pub fn run_point(code: &BBCode, spec: &ExperimentSpec, p: f64) -> Result<PointRun> {
    let rounds = spec.rounds_for(code)?;
    let noise = NoiseModel::new(p, spec.tau_m, spec.tau_s);
    let memory = build_memory_experiment(code, spec.layout, spec.basis, rounds, &noise, spec.parallelism)?;
    verify_memory(&memory)?;
    let dem = detector_error_model(memory.circuit())?;
    let seed = spec.point_seed(p, rounds);
    let batch = sample(memory.circuit(), spec.shots, seed)?;
    let failure_flags = Decoder::new(&dem, spec.decoder)?.failure_flags(&batch)?;
    Ok(PointRun { rounds, seed, failure_flags, shift_channels: memory.lowered.shift_channels })
}

fn estimate(code: &BBCode, spec: &ExperimentSpec, p: f64, run: &PointRun) -> LogicalErrorEstimate {
    let failures = run.failure_flags.iter().filter(|&&f| f).count();
    let total = failures as f64 / spec.shots as f64;
    let (lo, hi) = wilson_interval(failures, spec.shots);
    LogicalErrorEstimate {
        code: code.name.clone(),
        layout: spec.layout.name().to_owned(),
        basis: spec.basis,
        p,
        tau_s: spec.tau_s,
        tau_m: spec.tau_m,
        rounds: run.rounds,
        shots: spec.shots,
        failures,
        p_fail_total: total,
        p_l_round: per_round(total, run.rounds),
        ci_low: per_round(lo, run.rounds),
        ci_high: per_round(hi, run.rounds),
        seed: run.seed,
        decoder: spec.decoder.label(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

/// One estimate per value of `spec.p_values`, in order.
pub fn run_on_code(code: &BBCode, spec: &ExperimentSpec) -> Result<Vec<LogicalErrorEstimate>> {
    spec.validate()?;
    spec.p_values
        .iter()
        .map(|&p| Ok(estimate(code, spec, p, &run_point(code, spec, p)?)))
        .collect()
}

/// [`run_on_code`] for a code from the built-in catalog.
pub fn run_memory_experiment(spec: &ExperimentSpec) -> Result<Vec<LogicalErrorEstimate>> {
    run_on_code(&builtin_code(&spec.code)?, spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularityReport {
    pub p: f64,
    /// Rate `p` with noisy shifts.
    pub noisy_shifts: LogicalErrorEstimate,
    /// Rate `2p` with noiseless shifts.
    pub noiseless_shifts: LogicalErrorEstimate,
    /// Shift-noise channels in the noiseless-shift circuit; always zero.
    pub noiseless_shift_channels: usize,
    pub verdict: Verdict,
}

/// Decides `noisy < noiseless` only when the 95% intervals are disjoint.
pub fn modularity_verdict(noisy: &LogicalErrorEstimate, noiseless: &LogicalErrorEstimate) -> Verdict {
    if noisy.failures == 0 && noiseless.failures == 0 {
        Verdict::Inconclusive
    } else if noisy.ci_high < noiseless.ci_low {
        Verdict::Confirmed
    } else if noisy.ci_low > noiseless.ci_high {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    }
}

/// For each `p` in `base.p_values`, compares `p` with shift noise
/// `base.tau_s` against `2p` with noiseless shifts.
pub fn modularity_comparison(code: &BBCode, base: &ExperimentSpec) -> Result<Vec<ModularityReport>> {
    base.validate()?;
    if let Some(&p) = base.p_values.iter().find(|&&p| 2.0 * p >= 1.0) {
        return Err(Error::Experiment(format!("2p = {} is not below 1", 2.0 * p)));
    }
    let quiet = ExperimentSpec { tau_s: 0, ..base.clone() };
    base.p_values
        .iter()
        .map(|&p| {
            let a = run_point(code, base, p)?;
            let b = run_point(code, &quiet, 2.0 * p)?;
            let noisy_shifts = estimate(code, base, p, &a);
            let noiseless_shifts = estimate(code, &quiet, 2.0 * p, &b);
            let verdict = modularity_verdict(&noisy_shifts, &noiseless_shifts);
            Ok(ModularityReport { p, noisy_shifts, noiseless_shifts, noiseless_shift_channels: b.shift_channels, verdict })
        })
        .collect()
}
