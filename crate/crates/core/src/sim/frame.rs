//! Pauli-frame sampling, 64 shots per machine word.
//!
//! Shots are grouped in blocks of 64; block `b` draws from the ChaCha8
//! stream `b` of the master seed, so a batch depends only on the circuit,
//! the seed and the shot count, never on the number of worker threads.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{NoisyCircuit, Op};
use crate::code::Basis;
use crate::error::{Error, Result};
use crate::machine::{Gate1, Gate2};

/// Detection events and observable flips, one bit row per shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotBatch {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub seed: u64,
    det_words: usize,
    obs_words: usize,
    detectors: Vec<u64>,
    observables: Vec<u64>,
}

const MAGIC: &[u8; 4] = b"CQSB";
const VERSION: u32 = 1;

impl ShotBatch {
    /// All-zero batch.
    pub fn empty(shots: usize, num_detectors: usize, num_observables: usize, seed: u64) -> Self {
        let det_words = num_detectors.div_ceil(64);
        let obs_words = num_observables.div_ceil(64);
        Self {
            shots,
            num_detectors,
            num_observables,
            seed,
            det_words,
            obs_words,
            detectors: vec![0; shots * det_words],
            observables: vec![0; shots * obs_words],
        }
    }

    /// Detection events of shot `s`, bit `d` of the returned words.
    pub fn detector_words(&self, s: usize) -> &[u64] {
        &self.detectors[s * self.det_words..(s + 1) * self.det_words]
    }

    pub fn observable_words(&self, s: usize) -> &[u64] {
        &self.observables[s * self.obs_words..(s + 1) * self.obs_words]
    }

    pub fn detector(&self, s: usize, d: usize) -> bool {
        self.detector_words(s)[d / 64] >> (d % 64) & 1 == 1
    }

    pub fn observable(&self, s: usize, o: usize) -> bool {
        self.observable_words(s)[o / 64] >> (o % 64) & 1 == 1
    }

    pub fn set_detector(&mut self, s: usize, d: usize, value: bool) {
        let w = &mut self.detectors[s * self.det_words + d / 64];
        *w = (*w & !(1 << (d % 64))) | (value as u64) << (d % 64);
    }

    pub fn set_observable(&mut self, s: usize, o: usize, value: bool) {
        let w = &mut self.observables[s * self.obs_words + o / 64];
        *w = (*w & !(1 << (o % 64))) | (value as u64) << (o % 64);
    }

    /// Indices of fired detectors in shot `s`.
    pub fn fired(&self, s: usize) -> Vec<usize> {
        (0..self.num_detectors).filter(|&d| self.detector(s, d)).collect()
    }

    /// Number of shots with at least one fired detector.
    pub fn nontrivial_shots(&self) -> usize {
        (0..self.shots).filter(|&s| self.detector_words(s).iter().any(|&w| w != 0)).count()
    }

    fn pack(bits: usize, words: &[u64], out: &mut Vec<u8>) {
        let bytes = bits.div_ceil(8);
        let mut row: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        row.truncate(bytes);
        out.extend(row);
    }

    /// Binary export: `"CQSB"`, then little-endian `u32` version, `u64`
    /// shots, `u64` detectors, `u64` observables, `u64` seed; then for every
    /// shot its detector bitmap followed by its observable bitmap, each
    /// padded to whole bytes, bit `k` of a bitmap in byte `k / 8` at bit
    /// position `k % 8`.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let mut out = Vec::with_capacity(36 + self.shots * (self.num_detectors + self.num_observables).div_ceil(8));
        out.extend(MAGIC);
        out.extend(VERSION.to_le_bytes());
        for v in [self.shots as u64, self.num_detectors as u64, self.num_observables as u64, self.seed] {
            out.extend(v.to_le_bytes());
        }
        for s in 0..self.shots {
            Self::pack(self.num_detectors, self.detector_words(s), &mut out);
            Self::pack(self.num_observables, self.observable_words(s), &mut out);
        }
        w.write_all(&out)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let bad = |m: &str| Error::Parse { line: 0, msg: format!("shot batch: {m}") };
        if buf.len() < 40 || &buf[..4] != MAGIC {
            return Err(bad("missing header"));
        }
        if u32::from_le_bytes(buf[4..8].try_into().unwrap()) != VERSION {
            return Err(bad("unsupported version"));
        }
        let field = |k: usize| u64::from_le_bytes(buf[8 + 8 * k..16 + 8 * k].try_into().unwrap()) as usize;
        let (shots, nd, no, seed) = (field(0), field(1), field(2), field(3) as u64);
        let (bd, bo) = (nd.div_ceil(8), no.div_ceil(8));
        if buf.len() != 40 + shots * (bd + bo) {
            return Err(bad("length does not match header"));
        }
        let mut batch = Self::empty(shots, nd, no, seed);
        let unpack = |bytes: &[u8], words: &mut [u64]| {
            for (k, &b) in bytes.iter().enumerate() {
                words[k / 8] |= (b as u64) << (8 * (k % 8));
            }
        };
        for s in 0..shots {
            let row = &buf[40 + s * (bd + bo)..40 + (s + 1) * (bd + bo)];
            let (dw, ow) = (batch.det_words, batch.obs_words);
            unpack(&row[..bd], &mut batch.detectors[s * dw..(s + 1) * dw]);
            unpack(&row[bd..], &mut batch.observables[s * ow..(s + 1) * ow]);
        }
        Ok(batch)
    }
}

/// Positions `k` in `0..len` hit by independent Bernoulli(`p`) trials, found
/// by geometric skipping.
fn bernoulli_hits(rng: &mut ChaCha8Rng, p: f64, len: usize, mut hit: impl FnMut(&mut ChaCha8Rng, usize)) {
    if p <= 0.0 || len == 0 {
        return;
    }
    if p >= 1.0 {
        (0..len).for_each(|k| hit(rng, k));
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k = 0usize;
    loop {
        let u: f64 = rng.gen();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if !gap.is_finite() || gap >= (len - k) as f64 {
            return;
        }
        k += gap as usize;
        hit(rng, k);
        k += 1;
        if k >= len {
            return;
        }
    }
}

/// Frames for 64 shots: bit `s` of `x[q]` is an X error on qubit `q` in
/// shot `s`.
struct Frame {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Frame {
    /// `pauli` bit 0 is the X part and bit 1 the Z part.
    fn apply(&mut self, q: usize, bit: u64, pauli: u32) {
        if pauli & 1 != 0 {
            self.x[q] ^= bit;
        }
        if pauli & 2 != 0 {
            self.z[q] ^= bit;
        }
    }
}

fn run_block(circuit: &NoisyCircuit, rng: &mut ChaCha8Rng, records: &mut [u64]) {
    let n = circuit.num_qubits;
    let mut f = Frame { x: vec![0; n], z: vec![0; n] };
    let mut next = 0usize;
    for op in &circuit.ops {
        match op {
            Op::Tick => {}
            Op::Reset { targets, .. } => {
                for &q in targets {
                    f.x[q as usize] = 0;
                    f.z[q as usize] = 0;
                }
            }
            Op::Gate1 { kind, targets } => {
                for &q in targets {
                    let q = q as usize;
                    match kind {
                        Gate1::H => std::mem::swap(&mut f.x[q], &mut f.z[q]),
                        Gate1::S | Gate1::SDag => f.z[q] ^= f.x[q],
                        Gate1::X | Gate1::Y | Gate1::Z => {}
                    }
                }
            }
            Op::Gate2 { kind, pairs } => {
                for &(c, t) in pairs {
                    let (c, t) = (c as usize, t as usize);
                    match kind {
                        Gate2::CX => {
                            f.x[t] ^= f.x[c];
                            f.z[c] ^= f.z[t];
                        }
                        Gate2::CZ => {
                            f.z[c] ^= f.x[t];
                            f.z[t] ^= f.x[c];
                        }
                        Gate2::CY => {
                            let (xc, xt, zt) = (f.x[c], f.x[t], f.z[t]);
                            f.z[c] ^= xt ^ zt;
                            f.x[t] ^= xc;
                            f.z[t] ^= xc;
                        }
                    }
                }
            }
            Op::Measure { basis, reset, flip, targets } => {
                let start = next;
                for &q in targets {
                    let q = q as usize;
                    records[next] = match basis {
                        Basis::Z => f.x[q],
                        Basis::X => f.z[q],
                    };
                    if *reset {
                        f.x[q] = 0;
                        f.z[q] = 0;
                    }
                    next += 1;
                }
                bernoulli_hits(rng, *flip, targets.len() * 64, |_, k| records[start + k / 64] ^= 1 << (k % 64));
            }
            Op::Depolarize1 { p, targets } => {
                bernoulli_hits(rng, *p, targets.len() * 64, |rng, k| {
                    let pauli = rng.gen_range(1..4u32);
                    f.apply(targets[k / 64] as usize, 1 << (k % 64), pauli);
                });
            }
            Op::Depolarize2 { p, pairs } => {
                bernoulli_hits(rng, *p, pairs.len() * 64, |rng, k| {
                    let pauli = rng.gen_range(1..16u32);
                    let (a, b) = pairs[k / 64];
                    let bit = 1 << (k % 64);
                    f.apply(a as usize, bit, pauli & 3);
                    f.apply(b as usize, bit, pauli >> 2);
                });
            }
            Op::XError { p, targets } => {
                bernoulli_hits(rng, *p, targets.len() * 64, |_, k| f.x[targets[k / 64] as usize] ^= 1 << (k % 64));
            }
            Op::ZError { p, targets } => {
                bernoulli_hits(rng, *p, targets.len() * 64, |_, k| f.z[targets[k / 64] as usize] ^= 1 << (k % 64));
            }
        }
    }
}

/// Samples `shots` noisy runs of `circuit`. Detection events are flips
/// relative to the noiseless reference, so the circuit must be
/// deterministic without noise.
pub fn sample(circuit: &NoisyCircuit, shots: usize, seed: u64) -> Result<ShotBatch> {
    circuit.check_references()?;
    let nd = circuit.detectors.len();
    let no = circuit.observables.len();
    let m = circuit.num_measurements();
    let blocks = shots.div_ceil(64);
    let per_block: Vec<(Vec<u64>, Vec<u64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut records = vec![0u64; m];
            run_block(circuit, &mut rng, &mut records);
            let fold = |sets: &[Vec<usize>]| -> Vec<u64> {
                sets.iter().map(|set| set.iter().fold(0u64, |acc, &r| acc ^ records[r])).collect()
            };
            (fold(&circuit.detectors), fold(&circuit.observables))
        })
        .collect();

    let mut batch = ShotBatch::empty(shots, nd, no, seed);
    for (b, (dets, obs)) in per_block.iter().enumerate() {
        for s in 0..64.min(shots - b * 64) {
            let shot = b * 64 + s;
            for (d, &word) in dets.iter().enumerate() {
                if word >> s & 1 == 1 {
                    batch.detectors[shot * batch.det_words + d / 64] |= 1 << (d % 64);
                }
            }
            for (o, &word) in obs.iter().enumerate() {
                if word >> s & 1 == 1 {
                    batch.observables[shot * batch.obs_words + o / 64] |= 1 << (o % 64);
                }
            }
        }
    }
    Ok(batch)
}
