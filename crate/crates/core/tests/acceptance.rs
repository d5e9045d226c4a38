//! Acceptance run: one PASS/FAIL line per criterion. Failing criteria are
//! reported, not hidden; the process exits zero so that the rest of the test
//! suite still runs, and the summary line carries the verdict.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modarray::catalog::builtin_codes;
use modarray::circuit::{build_memory_experiment, NoiseModel};
use modarray::decoder::{Decoder, DecoderConfig};
use modarray::dem::{DetectorErrorModel, Mechanism};
use modarray::experiment::{
    fit_curve, modularity_comparison, run_on_code, ExperimentSpec, LogicalErrorEstimate, Verdict, PUBLISHED_FITS,
};
use modarray::layout::{cyclic_depth_bound, cyclic_layout, depth_table, sparse_cyclic_layout, LayoutKind};
use modarray::machine::validate_program;
use modarray::sim::{cyclic_oracle_equivalence, verify_memory};
use modarray::{BBCode, Basis, BitVector, Parallelism, Pauli, PauliOperator};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn codes() -> Vec<BBCode> {
    builtin_codes().expect("built-in catalog loads")
}

fn j_count(code: &BBCode, swapped: bool) -> usize {
    let (ia, ja) = code.a.exponent_sets();
    let (ib, jb) = code.b.exponent_sets();
    if swapped {
        ia.union(&ib).count()
    } else {
        ja.union(&jb).count()
    }
}

fn depth_formula() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for code in codes() {
        for swapped in [false, true] {
            for basis in [Basis::X, Basis::Z] {
                let expected = j_count(&code, swapped) + code.omega + 2;
                let got = sparse_cyclic_layout(&code, basis, swapped)
                    .and_then(|c| Ok(validate_program(&c.program)?.total_depth));
                match got {
                    Ok(d) if d == expected => {}
                    Ok(d) => {
                        pass = false;
                        lines.push(format!("{} {basis} swapped={swapped}: depth {d}, formula {expected}", code.name));
                    }
                    Err(e) => {
                        pass = false;
                        lines.push(format!("{} {basis} swapped={swapped}: {e}", code.name));
                    }
                }
            }
        }
        lines.push(format!("{} depth {}", code.name, j_count(&code, false) + code.omega + 2));
    }
    outcome(pass, lines.join("; "))
}

fn table_one() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for code in codes() {
        for t in [1, 5, 10] {
            let table = match depth_table(&code, t) {
                Ok(t) => t,
                Err(e) => return outcome(false, format!("{} T={t}: {e}", code.name)),
            };
            for row in &table.rows {
                let names = ["gates", "shifts", "meas"];
                for (k, name) in names.iter().enumerate() {
                    checked += 1;
                    if row.measured[k] != row.expected[k] {
                        failures.push(format!(
                            "{} T={t} {} {name}: measured {} closed form {}",
                            code.name, row.layout, row.measured[k], row.expected[k]
                        ));
                    }
                }
            }
        }
    }
    let mut detail = format!("{} of {checked} cells match", checked - failures.len());
    if !failures.is_empty() {
        let shown: Vec<_> = failures.iter().take(4).cloned().collect();
        detail += &format!("; mismatches include {}", shown.join(", "));
    }
    outcome(failures.is_empty(), detail)
}

fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliOperator {
    loop {
        let terms: Vec<Pauli> = (0..n).map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]).collect();
        if terms.iter().any(|&p| p != Pauli::I) {
            return PauliOperator::from_support(n, terms.into_iter().enumerate()).expect("terms fit");
        }
    }
}

/// `r` pairwise commuting non-identity operators on `n` qubits.
fn random_commuting(rng: &mut impl Rng, n: usize, r: usize) -> Vec<PauliOperator> {
    let mut out: Vec<PauliOperator> = Vec::new();
    while out.len() < r {
        let p = random_pauli(rng, n);
        if out.iter().all(|q| q.commutes_with(&p)) {
            out.push(p);
        }
    }
    out
}

fn proposition_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst = (0i64, String::new());
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let cells = rng.gen_range(2..=6);
        let num = rng.gen_range(1..=((cells - 1) * n).min(12));
        let r = rng.gen_range(1..=12);
        let ops = random_commuting(&mut rng, num, r);
        let depth = match cyclic_layout(&ops, n, cells).and_then(|c| Ok(validate_program(&c.program)?.total_depth)) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("N={num} r={r} n={n} L={cells}: {e}")),
        };
        let bound = cyclic_depth_bound(r, n, cells);
        if depth > bound {
            violations += 1;
        }
        let slack = depth as i64 - bound as i64;
        if worst.1.is_empty() || slack > worst.0 {
            worst = (slack, format!("N={num} r={r} n={n} L={cells}: depth {depth} bound {bound}"));
        }
    }
    outcome(violations == 0, format!("{violations} of 100 exceed the bound; tightest {}", worst.1))
}

fn anticommuting_pair(ops: &[PauliOperator]) -> bool {
    ops.iter().enumerate().any(|(i, a)| ops[i + 1..].iter().any(|b| !a.commutes_with(b)))
}

fn sequential_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let (mut worst_tv, mut worst_fid, mut with_anti) = (0.0f64, 1.0f64, 0);
    for k in 0..200 {
        let n = rng.gen_range(1..=2);
        let cells = rng.gen_range(2..=4);
        let num = rng.gen_range(1..=((cells - 1) * n).min(4));
        let r = rng.gen_range(1..=4);
        let mut ops: Vec<PauliOperator> = (0..r).map(|_| random_pauli(&mut rng, num)).collect();
        // Every other list is forced to contain an anticommuting pair.
        if k % 2 == 0 && r >= 2 && !anticommuting_pair(&ops) {
            for _ in 0..100 {
                ops[r - 1] = random_pauli(&mut rng, num);
                if anticommuting_pair(&ops) {
                    break;
                }
            }
        }
        with_anti += anticommuting_pair(&ops) as usize;
        match cyclic_oracle_equivalence(&ops, n, cells) {
            Ok(rep) => {
                worst_tv = worst_tv.max(rep.tv_distance);
                worst_fid = worst_fid.min(rep.min_fidelity);
            }
            Err(e) => return outcome(false, format!("list {k}: {e}")),
        }
    }
    outcome(
        worst_tv <= 1e-9 && worst_fid > 1.0 - 1e-9 && with_anti > 0,
        format!("max TV {worst_tv:.2e}, min fidelity {worst_fid:.12}, {with_anti} lists with anticommuting pairs"),
    )
}

fn default_parallelism(kind: LayoutKind) -> Parallelism {
    ExperimentSpec::new("", kind).parallelism
}

fn noiseless_determinism() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for code in codes() {
        let rounds = code.known_distance.unwrap_or(3);
        for kind in LayoutKind::ALL {
            for basis in [Basis::X, Basis::Z] {
                count += 1;
                let res = build_memory_experiment(
                    &code,
                    kind,
                    basis,
                    rounds,
                    &NoiseModel::noiseless(),
                    default_parallelism(kind),
                )
                .and_then(|m| verify_memory(&m));
                match res {
                    Ok(v) => {
                        let stabilizers = code.n - code.k;
                        if v.group_rank != stabilizers || !v.determinism.is_deterministic() {
                            bad.push(format!("{} {kind} {basis}: rank {} of {stabilizers}", code.name, v.group_rank));
                        }
                    }
                    Err(e) => bad.push(format!("{} {kind} {basis}: {e}", code.name)),
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{} of {count} circuits verified{}", count - bad.len(), if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }))
}

fn code_parameters() -> Outcome {
    let expect: HashMap<&str, (usize, usize)> = [("bb72", (72, 12)), ("bb90", (90, 8)), ("bb108", (108, 8)), ("bb144", (144, 12))].into();
    let mut seen = Vec::new();
    let mut pass = true;
    for code in codes() {
        let Some(&(n, k)) = expect.get(code.name.as_str()) else { continue };
        let commute = code.hx.mul(&code.hz.transpose()).map(|m| m.is_zero()).unwrap_or(false);
        // k recomputed from ranks, independently of the loader.
        let rank_k = code.n - code.hx.rank() - code.hz.rank();
        let ok = code.n == n && code.k == k && rank_k == k && code.omega == 6 && commute;
        pass &= ok;
        seen.push(format!("{} [[{}, {}]] w={}", code.name, code.n, rank_k, code.omega));
    }
    outcome(pass && seen.len() == 4, seen.join(", "))
}

fn spec(code: &str, p: &[f64], shots: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec { p_values: p.to_vec(), shots, seed, ..ExperimentSpec::new(code, LayoutKind::Sparse) }
}

fn code_named(name: &str) -> BBCode {
    codes().into_iter().find(|c| c.name == name).expect("catalog code")
}

fn describe(e: &LogicalErrorEstimate) -> String {
    format!("p={} {}/{} failures, p_L_round {:.3e} [{:.3e}, {:.3e}]", e.p, e.failures, e.shots, e.p_l_round, e.ci_low, e.ci_high)
}

fn monte_carlo_vs_fit() -> Outcome {
    let s = spec("bb72", &[2e-3], 20_000, 1);
    let est = match run_on_code(&code_named("bb72"), &s) {
        Ok(mut v) => v.remove(0),
        Err(e) => return outcome(false, e.to_string()),
    };
    let target = PUBLISHED_FITS[0].evaluate(2e-3);
    let ratio = est.p_l_round / target;
    outcome((1.0 / 3.0..=3.0).contains(&ratio), format!("{}; fit {target:.3e}; ratio {ratio:.2}", describe(&est)))
}

fn distance_slope() -> Outcome {
    let s = spec("bb72", &[5e-3, 1e-2], 4_000, 2);
    let est = match run_on_code(&code_named("bb72"), &s) {
        Ok(v) => v,
        Err(e) => return outcome(false, e.to_string()),
    };
    let measured = est[1].p_l_round / est[0].p_l_round;
    let row = &PUBLISHED_FITS[0];
    let predicted = row.evaluate(1e-2) / row.evaluate(5e-3);
    let q = measured / predicted;
    outcome(
        (0.5..=2.0).contains(&q),
        format!("{}; {}; measured ratio {measured:.3}, model ratio {predicted:.3}", describe(&est[0]), describe(&est[1])),
    )
}

fn modularity() -> Outcome {
    let s = spec("bb72", &[4e-3], 10_000, 3);
    match modularity_comparison(&code_named("bb72"), &s) {
        Ok(r) => {
            let r = &r[0];
            outcome(
                r.verdict == Verdict::Confirmed && r.noiseless_shift_channels == 0,
                format!(
                    "tau_s=30 {}; tau_s=0 {}; verdict {:?}",
                    describe(&r.noisy_shifts),
                    describe(&r.noiseless_shifts),
                    r.verdict
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn fit_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    for row in &PUBLISHED_FITS {
        let pts: Vec<(f64, f64)> = [1e-3, 2e-3, 3e-3, 5e-3, 7e-3, 1e-2].iter().map(|&p| (p, row.evaluate(p))).collect();
        match fit_curve(&pts, row.d) {
            Ok(f) => {
                for (a, b) in [(f.c0, row.c0), (f.c1, row.c1), (f.c2, row.c2)] {
                    worst = worst.max(((a - b) / b).abs());
                }
            }
            Err(e) => return outcome(false, format!("{} {}: {e}", row.code, row.layout)),
        }
    }
    outcome(worst < 1e-3, format!("{} rows, max relative error {worst:.2e}", PUBLISHED_FITS.len()))
}

fn mech(p: f64, d: &[u32], o: &[u32]) -> Mechanism {
    Mechanism { probability: p, detectors: d.to_vec(), observables: o.to_vec() }
}

fn decoder_oracle() -> Outcome {
    let p = 0.1;
    let rep = DetectorErrorModel {
        num_detectors: 2,
        num_observables: 1,
        mechanisms: vec![mech(p, &[0], &[0]), mech(p, &[0, 1], &[]), mech(p, &[1], &[])],
    };
    let dec = Decoder::new(&rep, DecoderConfig::default()).unwrap();
    let mut failure = 0.0;
    let mut ml_agree = true;
    for pattern in 0u32..8 {
        let prob: f64 = (0..3).map(|k| if pattern >> k & 1 == 1 { p } else { 1.0 - p }).product();
        let mut events = BitVector::zeros(2);
        for (k, m) in rep.mechanisms.iter().enumerate() {
            if pattern >> k & 1 == 1 {
                m.detectors.iter().for_each(|&d| events.flip(d as usize));
            }
        }
        let predicted = dec.decode(&events).unwrap().prediction.get(0);
        let actual = pattern & 1 == 1;
        // Majority vote is the maximum-likelihood decision at p < 1/2.
        ml_agree &= (predicted != actual) == (pattern.count_ones() >= 2);
        if predicted != actual {
            failure += prob;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
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
    let toy = DetectorErrorModel { num_detectors: 10, num_observables: 2, mechanisms };
    let dec = Decoder::new(&toy, DecoderConfig::default()).unwrap();
    let recovered = toy
        .mechanisms
        .iter()
        .filter(|m| {
            let events = BitVector::from_indices(10, m.detectors.iter().map(|&d| d as usize));
            let expect = BitVector::from_indices(2, m.observables.iter().map(|&o| o as usize));
            dec.decode(&events).map(|r| r.prediction == expect).unwrap_or(false)
        })
        .count();
    outcome(
        (failure - 0.028f64).abs() < 1e-12 && ml_agree && recovered == 20,
        format!("repetition failure {failure:.6}, agrees with ML: {ml_agree}; toy {recovered}/20 recovered"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("depth formula for the sparse layout", depth_formula),
        ("layer-count table, T in {1, 5, 10}", table_one),
        ("cyclic layout depth bound", proposition_bound),
        ("sequential-measurement equivalence", sequential_equivalence),
        ("noiseless determinism", noiseless_determinism),
        ("code parameters", code_parameters),
        ("decoder oracle", decoder_oracle),
        ("fit round trip", fit_round_trip),
        ("Monte-Carlo vs published fit", monte_carlo_vs_fit),
        ("distance slope", distance_slope),
        ("modularity factor 2", modularity),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut passed = 0;
    let mut run = 0;
    for (name, check) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        run += 1;
        let start = Instant::now();
        let o = check();
        passed += o.pass as usize;
        println!(
            "{} {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {passed} of {run} criteria pass");
}
