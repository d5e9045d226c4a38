//! Belief propagation with ordered-statistics post-processing on detector
//! error models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dem::DetectorErrorModel;
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::sim::ShotBatch;

const MAX_LLR: f64 = 50.0;
pub const MAX_OSD_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BpVariant {
    MinSum { scale: f64 },
    ProductSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub bp_iterations: usize,
    pub bp_variant: BpVariant,
    pub osd_order: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { bp_iterations: 100, bp_variant: BpVariant::MinSum { scale: 0.8 }, osd_order: 0 }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bp_iterations == 0 {
            return Err(Error::Decoder("bp_iterations must be at least 1".into()));
        }
        if self.osd_order > MAX_OSD_ORDER {
            return Err(Error::Decoder(format!("osd_order is limited to {MAX_OSD_ORDER}")));
        }
        if let BpVariant::MinSum { scale } = self.bp_variant {
            if !(scale > 0.0 && scale <= 1.0) {
                return Err(Error::Decoder(format!("min-sum scale {scale} is outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Short tag recorded next to every estimate.
    pub fn label(&self) -> String {
        let bp = match self.bp_variant {
            BpVariant::MinSum { scale } => format!("ms{scale}"),
            BpVariant::ProductSum => "ps".into(),
        };
        format!("bp-{bp}-{}+osd{}", self.bp_iterations, self.osd_order)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub prediction: BitVector,
    /// BP alone reproduced the syndrome.
    pub converged: bool,
    /// Sum of prior log-likelihood ratios of the chosen mechanisms.
    pub weight: f64,
}

/// Tanner graph of a detector error model, ready for repeated decoding.
pub struct Decoder {
    cfg: DecoderConfig,
    num_detectors: usize,
    num_observables: usize,
    det_words: usize,
    prior: Vec<f64>,
    check_ptr: Vec<usize>,
    /// Variable at each edge, edges grouped by check.
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    /// Edge ids grouped by variable.
    var_edges: Vec<u32>,
    columns: Vec<Vec<u64>>,
    obs: Vec<Vec<u32>>,
}

fn llr(p: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    ((1.0 - p) / p).ln().clamp(-MAX_LLR, MAX_LLR)
}

fn xor_into(dst: &mut Vec<u64>, src: &[u64]) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0);
    }
    dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s);
}

fn bit(words: &[u64], i: usize) -> bool {
    words.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                wi * 64 + tz
            })
        })
    })
}

/// Incremental reliability-ordered elimination. Each basis vector is a
/// column combination reduced against all earlier ones, so it vanishes on
/// their pivot rows.
struct Elimination {
    vecs: Vec<Vec<u64>>,
    pivot_row: Vec<usize>,
    /// Bit `k` set: pivot column `k` takes part in the combination.
    combs: Vec<Vec<u64>>,
    pivot_cols: Vec<usize>,
}

impl Elimination {
    fn reduce(&self, v: &mut [u64], comb: &mut Vec<u64>) {
        for k in 0..self.vecs.len() {
            if bit(v, self.pivot_row[k]) {
                v.iter_mut().zip(&self.vecs[k]).for_each(|(a, b)| *a ^= b);
                xor_into(comb, &self.combs[k]);
            }
        }
    }
}

impl Decoder {
    pub fn new(dem: &DetectorErrorModel, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let nd = dem.num_detectors;
        let det_words = nd.div_ceil(64);
        let mut check_deg = vec![0usize; nd];
        for m in &dem.mechanisms {
            for &d in &m.detectors {
                if d as usize >= nd {
                    return Err(Error::Dimension(format!("mechanism flips detector {d} of {nd}")));
                }
                check_deg[d as usize] += 1;
            }
            if let Some(&o) = m.observables.iter().find(|&&o| o as usize >= dem.num_observables) {
                return Err(Error::Dimension(format!("mechanism flips observable {o} of {}", dem.num_observables)));
            }
        }
        let mut check_ptr = vec![0usize; nd + 1];
        for d in 0..nd {
            check_ptr[d + 1] = check_ptr[d] + check_deg[d];
        }
        let mut fill = check_ptr.clone();
        let mut edge_var = vec![0u32; check_ptr[nd]];
        let mut var_ptr = vec![0usize; dem.mechanisms.len() + 1];
        let mut var_edges = Vec::with_capacity(edge_var.len());
        let mut columns = Vec::with_capacity(dem.mechanisms.len());
        for (v, m) in dem.mechanisms.iter().enumerate() {
            let mut col = vec![0u64; det_words];
            for &d in &m.detectors {
                let e = fill[d as usize];
                fill[d as usize] += 1;
                edge_var[e] = v as u32;
                var_edges.push(e as u32);
                col[d as usize / 64] ^= 1 << (d % 64);
            }
            var_ptr[v + 1] = var_edges.len();
            columns.push(col);
        }
        Ok(Self {
            cfg,
            num_detectors: nd,
            num_observables: dem.num_observables,
            det_words,
            prior: dem.mechanisms.iter().map(|m| llr(m.probability)).collect(),
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            columns,
            obs: dem.mechanisms.iter().map(|m| m.observables.clone()).collect(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    fn syndrome_matches(&self, hard: &[bool], syndrome: &[u64]) -> bool {
        (0..self.num_detectors).all(|c| {
            let parity = self.edge_var[self.check_ptr[c]..self.check_ptr[c + 1]]
                .iter()
                .fold(false, |acc, &v| acc ^ hard[v as usize]);
            parity == bit(syndrome, c)
        })
    }

    fn check_update(&self, syndrome: &[u64], v2c: &[f32], c2v: &mut [f32]) {
        for c in 0..self.num_detectors {
            let edges = self.check_ptr[c]..self.check_ptr[c + 1];
            let flip = bit(syndrome, c);
            match self.cfg.bp_variant {
                BpVariant::MinSum { scale } => {
                    let (mut min1, mut min2, mut arg) = (f32::INFINITY, f32::INFINITY, usize::MAX);
                    let mut neg = flip;
                    for e in edges.clone() {
                        let a = v2c[e].abs();
                        neg ^= v2c[e] < 0.0;
                        if a < min1 {
                            (min2, min1, arg) = (min1, a, e);
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    for e in edges {
                        let mag = scale as f32 * if e == arg { min2 } else { min1 };
                        let sign = if neg ^ (v2c[e] < 0.0) { -1.0 } else { 1.0 };
                        c2v[e] = sign * mag.min(MAX_LLR as f32);
                    }
                }
                BpVariant::ProductSum => {
                    let t: Vec<f64> = edges.clone().map(|e| (v2c[e] as f64 / 2.0).tanh()).collect();
                    let mut suffix = vec![1.0; t.len() + 1];
                    for i in (0..t.len()).rev() {
                        suffix[i] = suffix[i + 1] * t[i];
                    }
                    let mut prefix = if flip { -1.0 } else { 1.0 };
                    for (i, e) in edges.enumerate() {
                        let prod = (prefix * suffix[i + 1]).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                        c2v[e] = (2.0 * prod.atanh()).clamp(-MAX_LLR, MAX_LLR) as f32;
                        prefix *= t[i];
                    }
                }
            }
        }
    }

    /// Returns the posterior LLRs averaged over all iterations, the last
    /// hard decision and whether it reproduced the syndrome. Averaging damps
    /// the oscillation of non-converging runs before reliability ordering.
    fn belief_propagation(&self, syndrome: &[u64]) -> (Vec<f64>, Vec<bool>, bool) {
        let nv = self.prior.len();
        let mut v2c = vec![0.0f32; self.edge_var.len()];
        for v in 0..nv {
            for &e in &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]] {
                v2c[e as usize] = self.prior[v] as f32;
            }
        }
        let mut c2v = vec![0.0f32; v2c.len()];
        let mut sum = vec![0.0; nv];
        let mut hard = vec![false; nv];
        for it in 1..=self.cfg.bp_iterations {
            self.check_update(syndrome, &v2c, &mut c2v);
            for v in 0..nv {
                let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let total = self.prior[v] as f32 + edges.iter().map(|&e| c2v[e as usize]).sum::<f32>();
                for &e in edges {
                    v2c[e as usize] = (total - c2v[e as usize]).clamp(-MAX_LLR as f32, MAX_LLR as f32);
                }
                sum[v] += total as f64;
                hard[v] = total < 0.0;
            }
            if self.syndrome_matches(&hard, syndrome) {
                sum.iter_mut().for_each(|x| *x /= it as f64);
                return (sum, hard, true);
            }
        }
        sum.iter_mut().for_each(|x| *x /= self.cfg.bp_iterations as f64);
        (sum, hard, false)
    }

    /// Ordered-statistics decoding: eliminate columns in posterior order
    /// until the syndrome lies in the span of the pivots and `osd_order`
    /// dependent columns have been seen, then sweep every subset of those.
    fn osd(&self, syndrome: &[u64], post: &[f64]) -> Result<Vec<bool>> {
        let mut order: Vec<usize> = (0..post.len()).filter(|&v| self.var_ptr[v + 1] > self.var_ptr[v]).collect();
        order.sort_by(|&a, &b| post[a].total_cmp(&post[b]).then(a.cmp(&b)));

        let mut el = Elimination { vecs: Vec::new(), pivot_row: Vec::new(), combs: Vec::new(), pivot_cols: Vec::new() };
        let mut s = syndrome[..self.det_words].to_vec();
        let mut s_comb: Vec<u64> = Vec::new();
        let mut free: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut in_span = s.iter().all(|&w| w == 0);
        for &v in &order {
            if in_span && free.len() >= self.cfg.osd_order {
                break;
            }
            let mut col = self.columns[v].clone();
            let mut comb = Vec::new();
            el.reduce(&mut col, &mut comb);
            let lead = ones(&col).next();
            match lead {
                None => {
                    if free.len() < self.cfg.osd_order {
                        free.push((v, comb));
                    }
                }
                Some(row) => {
                    let k = el.vecs.len();
                    comb.resize(k / 64 + 1, 0);
                    comb[k / 64] ^= 1 << (k % 64);
                    if bit(&s, row) {
                        s.iter_mut().zip(&col).for_each(|(a, b)| *a ^= b);
                        xor_into(&mut s_comb, &comb);
                    }
                    el.vecs.push(col);
                    el.pivot_row.push(row);
                    el.combs.push(comb);
                    el.pivot_cols.push(v);
                    in_span = s.iter().all(|&w| w == 0);
                }
            }
        }
        if !in_span {
            return Err(Error::Decoder("syndrome lies outside the column space of the error model".into()));
        }

        let nv = post.len();
        let pick = |comb: &[u64], flips: usize| {
            let mut e = vec![false; nv];
            for k in ones(comb) {
                e[el.pivot_cols[k]] = true;
            }
            for (j, (v, _)) in free.iter().enumerate() {
                if flips >> j & 1 == 1 {
                    e[*v] = true;
                }
            }
            e
        };
        let weight = |e: &[bool]| e.iter().zip(&self.prior).filter(|(&b, _)| b).map(|(_, w)| w).sum::<f64>();
        let mut best = pick(&s_comb, 0);
        let mut best_w = weight(&best);
        for flips in 1..(1usize << free.len()) {
            let mut comb = s_comb.clone();
            for (j, (_, c)) in free.iter().enumerate() {
                if flips >> j & 1 == 1 {
                    xor_into(&mut comb, c);
                }
            }
            let e = pick(&comb, flips);
            let w = weight(&e);
            if w < best_w {
                (best, best_w) = (e, w);
            }
        }
        Ok(best)
    }

    fn decode_words(&self, syndrome: &[u64]) -> Result<DecodeResult> {
        if syndrome.iter().all(|&w| w == 0) {
            return Ok(DecodeResult { prediction: BitVector::zeros(self.num_observables), converged: true, weight: 0.0 });
        }
        let (post, hard, converged) = self.belief_propagation(syndrome);
        let chosen = if converged { hard } else { self.osd(syndrome, &post)? };
        let mut prediction = BitVector::zeros(self.num_observables);
        let mut weight = 0.0;
        for v in (0..chosen.len()).filter(|&v| chosen[v]) {
            weight += self.prior[v];
            for &o in &self.obs[v] {
                prediction.flip(o as usize);
            }
        }
        Ok(DecodeResult { prediction, converged, weight })
    }

    pub fn decode(&self, events: &BitVector) -> Result<DecodeResult> {
        if events.len() != self.num_detectors {
            return Err(Error::Dimension(format!(
                "{} detection events for {} detectors",
                events.len(),
                self.num_detectors
            )));
        }
        self.decode_words(events.words())
    }

    /// Per shot, whether the predicted observable flips differ from the
    /// sampled ones in any coordinate.
    pub fn failure_flags(&self, batch: &ShotBatch) -> Result<Vec<bool>> {
        if batch.num_detectors != self.num_detectors || batch.num_observables != self.num_observables {
            return Err(Error::Dimension(format!(
                "batch has {} detectors and {} observables, model has {} and {}",
                batch.num_detectors, batch.num_observables, self.num_detectors, self.num_observables
            )));
        }
        (0..batch.shots)
            .into_par_iter()
            .map(|s| Ok(self.decode_words(batch.detector_words(s))?.prediction.words() != batch.observable_words(s)))
            .collect()
    }

    pub fn count_failures(&self, batch: &ShotBatch) -> Result<usize> {
        Ok(self.failure_flags(batch)?.into_iter().filter(|&f| f).count())
    }
}

pub fn decode(dem: &DetectorErrorModel, events: &BitVector, cfg: &DecoderConfig) -> Result<DecodeResult> {
    Decoder::new(dem, *cfg)?.decode(events)
}

pub fn decode_batch(dem: &DetectorErrorModel, batch: &ShotBatch, cfg: &DecoderConfig) -> Result<usize> {
    Decoder::new(dem, *cfg)?.count_failures(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::Mechanism;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mech(p: f64, d: &[u32], o: &[u32]) -> Mechanism {
        Mechanism { probability: p, detectors: d.to_vec(), observables: o.to_vec() }
    }

    /// Three bit flips, detectors on neighbouring pairs, logical read on bit 0.
    fn repetition(p: f64) -> DetectorErrorModel {
        DetectorErrorModel {
            num_detectors: 2,
            num_observables: 1,
            mechanisms: vec![mech(p, &[0], &[0]), mech(p, &[0, 1], &[]), mech(p, &[1], &[])],
        }
    }

    fn configs() -> Vec<DecoderConfig> {
        let mut v = vec![DecoderConfig::default()];
        v.push(DecoderConfig { bp_variant: BpVariant::ProductSum, ..Default::default() });
        v.push(DecoderConfig { bp_iterations: 1, osd_order: 2, ..Default::default() });
        v
    }

    #[test]
    fn zero_syndrome() {
        let r = decode(&repetition(0.1), &BitVector::zeros(2), &DecoderConfig::default()).unwrap();
        assert!(r.converged && r.prediction.is_zero() && r.weight == 0.0);
    }

    #[test]
    fn repetition_matches_maximum_likelihood() {
        let p = 0.1;
        let dem = repetition(p);
        for cfg in configs() {
            let mut failure = 0.0;
            for pattern in 0u32..8 {
                let prob: f64 = (0..3).map(|k| if pattern >> k & 1 == 1 { p } else { 1.0 - p }).product();
                let mut events = BitVector::zeros(2);
                let mut logical = false;
                for (k, m) in dem.mechanisms.iter().enumerate() {
                    if pattern >> k & 1 == 1 {
                        m.detectors.iter().for_each(|&d| events.flip(d as usize));
                        logical ^= !m.observables.is_empty();
                    }
                }
                let r = decode(&dem, &events, &cfg).unwrap();
                // Majority vote on the three bits.
                let ml = pattern.count_ones() >= 2;
                assert_eq!(r.prediction.get(0) ^ logical, ml, "{cfg:?} pattern {pattern:03b}");
                if r.prediction.get(0) != logical {
                    failure += prob;
                }
            }
            assert!((failure - (3.0 * p * p * (1.0 - p) + p * p * p)).abs() < 1e-12, "{cfg:?}: {failure}");
            assert!((failure - 0.028).abs() < 1e-12);
        }
    }

    /// Twenty mechanisms with distinct signatures of weight one to three on
    /// ten detectors, as the error-model builder merges equal signatures.
    fn toy(seed: u64) -> DetectorErrorModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mechanisms: Vec<Mechanism> = Vec::new();
        while mechanisms.len() < 20 {
            let w = rng.gen_range(1..=3);
            let mut d: Vec<u32> = (0..10).collect();
            for i in 0..w {
                let j = rng.gen_range(i..10);
                d.swap(i, j);
            }
            let mut d = d[..w].to_vec();
            d.sort_unstable();
            if mechanisms.iter().any(|m| m.detectors == d) {
                continue;
            }
            let o: Vec<u32> = (0..2).filter(|_| rng.gen_bool(0.3)).collect();
            mechanisms.push(mech(rng.gen_range(0.01..0.05), &d, &o));
        }
        DetectorErrorModel { num_detectors: 10, num_observables: 2, mechanisms }
    }

    /// Minimum explanation weight of every syndrome, by exhaustive search
    /// over all mechanism subsets.
    fn brute_force_weights(dem: &DetectorErrorModel) -> Vec<f64> {
        let mut best = vec![f64::INFINITY; 1 << dem.num_detectors];
        let sig: Vec<usize> = dem.mechanisms.iter().map(|m| m.detectors.iter().fold(0, |s, &d| s ^ 1 << d)).collect();
        let w: Vec<f64> = dem.mechanisms.iter().map(|m| llr(m.probability)).collect();
        for set in 0u32..1 << dem.mechanisms.len() {
            let (mut s, mut t) = (0usize, 0.0);
            for k in (0..dem.mechanisms.len()).filter(|k| set >> k & 1 == 1) {
                s ^= sig[k];
                t += w[k];
            }
            best[s] = best[s].min(t);
        }
        best
    }

    #[test]
    fn toy_single_mechanisms_recovered() {
        for seed in 0..3 {
            let dem = toy(seed);
            let optimum = brute_force_weights(&dem);
            for cfg in configs() {
                let dec = Decoder::new(&dem, cfg).unwrap();
                for (k, m) in dem.mechanisms.iter().enumerate() {
                    let events = BitVector::from_indices(10, m.detectors.iter().map(|&d| d as usize));
                    let s = m.detectors.iter().fold(0usize, |s, &d| s ^ 1 << d);
                    let own = llr(m.probability);
                    let r = dec.decode(&events).unwrap();
                    assert!(r.weight <= own + 1e-9, "seed {seed} {cfg:?} mechanism {k}: {r:?}");
                    // The oracle confirms the mechanism is the unique best explanation.
                    assert!((optimum[s] - own).abs() < 1e-9);
                    let expect = BitVector::from_indices(2, m.observables.iter().map(|&o| o as usize));
                    assert_eq!(r.prediction, expect, "seed {seed} {cfg:?} mechanism {k}");
                }
            }
        }
    }

    #[test]
    fn infeasible_syndrome_is_an_error() {
        let dem = DetectorErrorModel { num_detectors: 2, num_observables: 0, mechanisms: vec![mech(0.1, &[0], &[])] };
        let cfg = DecoderConfig { bp_iterations: 3, ..Default::default() };
        assert!(decode(&dem, &BitVector::from_indices(2, [1]), &cfg).is_err());
        assert!(decode(&dem, &BitVector::zeros(3), &cfg).is_err());
    }

    #[test]
    fn injected_observable_flip_fails() {
        let dem = repetition(0.1);
        let mut batch = ShotBatch::empty(5, 2, 1, 0);
        assert_eq!(decode_batch(&dem, &batch, &DecoderConfig::default()).unwrap(), 0);
        batch.set_observable(3, 0, true);
        assert_eq!(decode_batch(&dem, &batch, &DecoderConfig::default()).unwrap(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(DecoderConfig { bp_iterations: 0, ..Default::default() }.validate().is_err());
        assert!(DecoderConfig { bp_variant: BpVariant::MinSum { scale: 1.5 }, ..Default::default() }.validate().is_err());
        assert_eq!(DecoderConfig::default().label(), "bp-ms0.8-100+osd0");
    }
}
