//! Run configuration. A TOML file may set any experiment field; flags given
//! on the command line override it, and built-in defaults fill the rest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use modarray::decoder::DecoderConfig;
use modarray::experiment::{ExperimentSpec, DEFAULT_P_GRID};
use modarray::layout::LayoutKind;
use modarray::{Basis, Parallelism};

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// TOML file with experiment fields; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Code name from the built-in catalog [default: bb72].
    #[arg(long, global = true)]
    pub code: Option<String>,
    /// cyclic, sparse, flat, interleaved-gates or concurrent-rounds [default: sparse].
    #[arg(long, global = true)]
    pub layout: Option<String>,
    /// Memory basis, X or Z [default: Z].
    #[arg(long, global = true)]
    pub basis: Option<String>,
    /// Physical error rate; repeat for a grid [default: 1e-3 .. 1e-2].
    #[arg(long = "p", global = true, value_name = "P")]
    pub p: Vec<f64>,
    /// Idle rounds per shift [default: 10 for flat, 30 otherwise].
    #[arg(long, global = true)]
    pub tau_s: Option<u32>,
    /// Idle rounds per measurement [default: 30].
    #[arg(long, global = true)]
    pub tau_m: Option<u32>,
    /// Syndrome rounds [default: the code distance].
    #[arg(long, global = true)]
    pub rounds: Option<usize>,
    /// Shots per grid point [default: 10000].
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; CSV output is appended.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Progress on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub code: Option<String>,
    pub layout: Option<String>,
    pub basis: Option<String>,
    pub p: Option<Vec<f64>>,
    pub tau_s: Option<u32>,
    pub tau_m: Option<u32>,
    pub rounds: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub decoder: Option<DecoderConfig>,
    pub parallelism: Option<Parallelism>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

/// Flags merged over the file. Fields left unset by both stay `None` so
/// commands can tell an explicit choice from a default.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub code: Option<String>,
    pub layout: Option<LayoutKind>,
    pub basis: Option<Basis>,
    pub p: Option<Vec<f64>>,
    pub tau_s: Option<u32>,
    pub tau_m: Option<u32>,
    pub rounds: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub decoder: DecoderConfig,
    pub parallelism: Option<Parallelism>,
    pub verbose: bool,
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let layout = flags.layout.clone().or(file.layout).map(|s| s.parse::<LayoutKind>()).transpose()?;
        let basis = flags.basis.clone().or(file.basis).map(|s| s.parse::<Basis>()).transpose()?;
        let p = if flags.p.is_empty() { file.p } else { Some(flags.p.clone()) };
        let decoder = file.decoder.unwrap_or_default();
        decoder.validate()?;
        let cfg = Self {
            code: flags.code.clone().or(file.code),
            layout,
            basis,
            p,
            tau_s: flags.tau_s.or(file.tau_s),
            tau_m: flags.tau_m.or(file.tau_m),
            rounds: flags.rounds.or(file.rounds),
            shots: flags.shots.or(file.shots),
            seed: flags.seed.or(file.seed),
            out: flags.out.clone().or(file.out),
            decoder,
            parallelism: file.parallelism,
            verbose: flags.verbose,
        };
        if cfg.rounds == Some(0) {
            bail!("--rounds must be at least 1");
        }
        Ok(cfg)
    }

    pub fn code_name(&self) -> &str {
        self.code.as_deref().unwrap_or("bb72")
    }

    pub fn layout_kind(&self) -> LayoutKind {
        self.layout.unwrap_or(LayoutKind::Sparse)
    }

    pub fn memory_basis(&self) -> Basis {
        self.basis.unwrap_or(Basis::Z)
    }

    /// The experiment described by this configuration, validated.
    pub fn spec(&self) -> Result<ExperimentSpec> {
        let base = ExperimentSpec::new(self.code_name(), self.layout_kind());
        let spec = ExperimentSpec {
            basis: self.memory_basis(),
            p_values: self.p.clone().unwrap_or_else(|| DEFAULT_P_GRID.to_vec()),
            tau_s: self.tau_s.unwrap_or(base.tau_s),
            tau_m: self.tau_m.unwrap_or(base.tau_m),
            rounds: self.rounds,
            shots: self.shots.unwrap_or(base.shots),
            seed: self.seed.unwrap_or(base.seed),
            decoder: self.decoder,
            parallelism: self.parallelism.unwrap_or(base.parallelism),
            ..base
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "code = \"bb90\"\nlayout = \"flat\"\np = [0.001, 0.002]\nshots = 50\n[decoder]\nosd_order = 2\n")
            .unwrap();
        let flags = Flags { config: Some(path), shots: Some(7), ..Flags::default() };
        let spec = RunConfig::resolve(&flags).unwrap().spec().unwrap();
        assert_eq!(spec.code, "bb90");
        assert_eq!(spec.layout, LayoutKind::Flat);
        assert_eq!(spec.p_values, vec![0.001, 0.002]);
        assert_eq!(spec.shots, 7);
        assert_eq!(spec.tau_s, 10);
        assert_eq!(spec.decoder.osd_order, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "shot = 3\n").unwrap();
        let flags = Flags { config: Some(path), ..Flags::default() };
        assert!(RunConfig::resolve(&flags).is_err());
    }

    #[test]
    fn defaults() {
        let spec = RunConfig::resolve(&Flags::default()).unwrap().spec().unwrap();
        assert_eq!((spec.code.as_str(), spec.layout, spec.basis), ("bb72", LayoutKind::Sparse, Basis::Z));
        assert_eq!((spec.tau_s, spec.tau_m, spec.shots), (30, 30, 10_000));
    }
}
