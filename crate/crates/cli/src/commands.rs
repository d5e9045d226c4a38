use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modarray::catalog::{builtin_code, builtin_codes};
use modarray::circuit::{build_memory_experiment, NoiseModel};
use modarray::experiment::{
    export_results, fit_curve, modularity_comparison, per_round, published_fit, read_results, run_on_code,
    write_results, ExperimentSpec, LogicalErrorEstimate, Verdict,
};
use modarray::layout::{compile_code, depth_table, flat_cyclic_layout, sparse_cyclic_layout, LayoutKind};
use modarray::machine::{validate_program, write_program};
use modarray::sim::{cyclic_oracle_equivalence, verify_memory};
use modarray::{BBCode, Basis, Error, Pauli, PauliOperator};

use crate::config::RunConfig;

/// `Ok(false)` means a check ran and failed; the diagnostic is already on
/// stderr.
pub type Outcome = Result<bool>;

fn code(cfg: &RunConfig) -> Result<BBCode> {
    Ok(builtin_code(cfg.code_name())?)
}

fn rounds_or_distance(cfg: &RunConfig, code: &BBCode) -> Result<usize> {
    cfg.rounds
        .or(code.known_distance)
        .ok_or_else(|| anyhow!("{} has no known distance; pass --rounds", code.name))
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

pub fn catalog() -> Outcome {
    println!("{:<8} {:>4} {:>4} {:>4} {:>3} {:>3} {:>3}", "code", "n", "k", "d", "w", "l", "m");
    for c in builtin_codes()? {
        let d = c.known_distance.map_or("-".to_owned(), |d| d.to_string());
        println!(
            "{:<8} {:>4} {:>4} {:>4} {:>3} {:>3} {:>3}",
            c.name, c.n, c.k, d, c.omega, c.params.ell, c.params.m
        );
    }
    Ok(true)
}

pub fn compile(cfg: &RunConfig) -> Outcome {
    let code = code(cfg)?;
    let compiled = compile_code(&code, cfg.layout_kind(), cfg.rounds.unwrap_or(1))?;
    validate_program(&compiled.program)?;
    emit(cfg, &write_program(&compiled.program))?;
    Ok(true)
}

/// Depth of one single-basis round for the sparse and flat layouts, whose
/// rounds are built from such passes; amortized depth per round otherwise.
fn round_depth(code: &BBCode, kind: LayoutKind, basis: Basis) -> Result<usize> {
    let depth = |c: &modarray::layout::CompiledLayout| -> Result<usize> { Ok(validate_program(&c.program)?.total_depth) };
    Ok(match kind {
        LayoutKind::Sparse => depth(&sparse_cyclic_layout(code, basis, false)?)?,
        LayoutKind::Flat => depth(&flat_cyclic_layout(code, basis)?)?,
        _ => depth(&compile_code(code, kind, 2)?)? - depth(&compile_code(code, kind, 1)?)?,
    })
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let code = code(cfg)?;
    let spec = cfg.spec()?;
    let rounds = rounds_or_distance(cfg, &code)?;
    let memory =
        build_memory_experiment(&code, spec.layout, spec.basis, rounds, &NoiseModel::noiseless(), spec.parallelism)?;
    let report = match verify_memory(&memory) {
        Ok(r) => r,
        Err(Error::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    println!("depth {}", round_depth(&code, spec.layout, spec.basis)?);
    println!(
        "{} {} basis {}, {rounds} rounds: {} detectors and {} observables deterministic",
        code.name, spec.layout, spec.basis, report.determinism.detectors, report.determinism.observables
    );
    println!("{} tagged measurements generate a group of rank {}", report.tagged_measurements, report.group_rank);
    if report.group_rank != code.n - code.k {
        eprintln!("measured group rank {} differs from n - k = {}", report.group_rank, code.n - code.k);
        return Ok(false);
    }
    Ok(true)
}

pub fn depth(cfg: &RunConfig) -> Outcome {
    let code = code(cfg)?;
    let table = depth_table(&code, cfg.rounds.unwrap_or(1))?;
    let names = ["gates", "shifts", "meas", "depth/round"];
    println!("{}, T = {} (measured / closed form)", table.code, table.rounds);
    println!("{:<18} {:>12} {:>12} {:>12} {:>12}", "layout", names[0], names[1], names[2], names[3]);
    let mut ok = true;
    for row in &table.rows {
        let cells: Vec<String> = (0..4)
            .map(|k| {
                let mark = if row.column_matches()[k] { "" } else { "*" };
                format!("{}{mark} / {}", row.measured[k], row.expected[k])
            })
            .collect();
        println!("{:<18} {:>12} {:>12} {:>12} {:>12}", row.layout.name(), cells[0], cells[1], cells[2], cells[3]);
        for k in (0..4).filter(|&k| !row.column_matches()[k]) {
            eprintln!(
                "{} {}: measured {} but the closed form gives {}",
                row.layout, names[k], row.measured[k], row.expected[k]
            );
            ok = false;
        }
    }
    Ok(ok)
}

fn print_estimate(e: &LogicalErrorEstimate) {
    println!(
        "p={:.2e} T={} shots={} failures={} p_L_round={:.3e} [{:.3e}, {:.3e}]",
        e.p, e.rounds, e.shots, e.failures, e.p_l_round, e.ci_low, e.ci_high
    );
}

pub fn experiment(cfg: &RunConfig) -> Outcome {
    let spec = cfg.spec()?;
    let code = builtin_code(&spec.code)?;
    let mut estimates = Vec::new();
    for &p in &spec.p_values {
        let one = ExperimentSpec { p_values: vec![p], ..spec.clone() };
        let e = run_on_code(&code, &one)?.remove(0);
        if cfg.verbose {
            eprintln!("{} {} p={p:.2e}: {} of {} shots failed", spec.code, spec.layout, e.failures, e.shots);
        }
        estimates.push(e);
    }
    match &cfg.out {
        Some(path) => {
            export_results(&estimates, path)?;
            estimates.iter().for_each(print_estimate);
        }
        None => write_results(&estimates, std::io::stdout().lock())?,
    }
    Ok(true)
}

pub fn modularity(cfg: &RunConfig) -> Outcome {
    let spec = cfg.spec()?;
    let code = builtin_code(&spec.code)?;
    let reports = modularity_comparison(&code, &spec)?;
    let mut ok = true;
    for r in &reports {
        let (a, b) = (&r.noisy_shifts, &r.noiseless_shifts);
        println!(
            "p={:.2e}: tau_s={} {:.3e} [{:.3e}, {:.3e}] vs 2p noiseless shifts {:.3e} [{:.3e}, {:.3e}]: {:?}",
            r.p, a.tau_s, a.p_l_round, a.ci_low, a.ci_high, b.p_l_round, b.ci_low, b.ci_high, r.verdict
        );
        if r.noiseless_shift_channels != 0 {
            eprintln!("p={:.2e}: noiseless-shift circuit has {} shift noise channels", r.p, r.noiseless_shift_channels);
            ok = false;
        }
        if r.verdict == Verdict::Refuted {
            eprintln!("p={:.2e}: noisy shifts at p are worse than noiseless shifts at 2p", r.p);
            ok = false;
        }
    }
    if let Some(path) = &cfg.out {
        let rows: Vec<LogicalErrorEstimate> =
            reports.iter().flat_map(|r| [r.noisy_shifts.clone(), r.noiseless_shifts.clone()]).collect();
        export_results(&rows, path)?;
    }
    Ok(ok)
}

/// `(p, shots, failures)` summed over rows with equal `p`.
type Pooled = (f64, usize, usize);

/// Rows sharing every setting but `p` form one curve; repeated `p` values
/// are pooled.
pub fn fit(cfg: &RunConfig, input: &Path) -> Outcome {
    let rows = read_results(input)?;
    let mut curves: BTreeMap<String, (LogicalErrorEstimate, BTreeMap<u64, Pooled>)> = BTreeMap::new();
    for e in rows {
        if cfg.code.as_deref().is_some_and(|c| c != e.code) || cfg.layout.is_some_and(|l| l.name() != e.layout) {
            continue;
        }
        let key = format!(
            "{} {} basis {} tau_s={} tau_m={} T={} {}",
            e.code, e.layout, e.basis, e.tau_s, e.tau_m, e.rounds, e.decoder
        );
        let (_, points) = curves.entry(key).or_insert_with(|| (e.clone(), BTreeMap::new()));
        let pt = points.entry(e.p.to_bits()).or_insert((e.p, 0, 0));
        pt.1 += e.shots;
        pt.2 += e.failures;
    }
    if curves.is_empty() {
        eprintln!("{} has no matching rows", input.display());
        return Ok(false);
    }
    let mut ok = true;
    for (key, (first, points)) in &curves {
        let d = builtin_code(&first.code)?
            .known_distance
            .ok_or_else(|| anyhow!("{} has no known distance", first.code))?;
        let pts: Vec<(f64, f64)> = points
            .values()
            .map(|&(p, shots, failures)| (p, per_round(failures as f64 / shots as f64, first.rounds)))
            .collect();
        match fit_curve(&pts, d) {
            Ok(f) => {
                println!("{key}: c0={:.4} c1={:.3} c2={:.1} residual={:.3e}", f.c0, f.c1, f.c2, f.residual_norm);
                let layout: Option<LayoutKind> = first.layout.parse().ok();
                if let Some(row) = layout.and_then(|l| published_fit(&first.code, l)) {
                    println!("  published: c0={} c1={} c2={}", row.c0, row.c1, row.c2);
                    for &(p, pl) in &pts {
                        println!("  p={p:.2e}: measured {pl:.3e}, fit {:.3e}, published {:.3e}", f.evaluate(p), row.evaluate(p));
                    }
                }
            }
            Err(e) => {
                eprintln!("{key}: {e}");
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliOperator {
    loop {
        let terms: Vec<(usize, Pauli)> = (0..n)
            .map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]))
            .filter(|&(_, p)| p != Pauli::I)
            .collect();
        if !terms.is_empty() {
            return PauliOperator::from_support(n, terms).expect("indices are in range");
        }
    }
}

/// Random lists of at most 6 operators on at most 6 qubits, compiled with
/// the cyclic layout and compared with measuring them one at a time.
pub fn oracle(cfg: &RunConfig, instances: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let (mut checked, mut skipped, mut worst_tv, mut worst_fid) = (0, 0, 0.0f64, 1.0f64);
    let mut failures = Vec::new();
    for _ in 0..instances {
        let n = rng.gen_range(1..=3);
        let num: usize = rng.gen_range(1..=6);
        let cells = num.div_ceil(n) + rng.gen_range(1..=2);
        let r = rng.gen_range(1..=6);
        let ops: Vec<PauliOperator> = (0..r).map(|_| random_pauli(&mut rng, num)).collect();
        let label = ops.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ");
        match cyclic_oracle_equivalence(&ops, n, cells) {
            Ok(rep) => {
                checked += 1;
                worst_tv = worst_tv.max(rep.tv_distance);
                worst_fid = worst_fid.min(rep.min_fidelity);
                if rep.tv_distance > 1e-9 || rep.min_fidelity < 1.0 - 1e-9 {
                    failures.push(format!("[{label}] n={n} L={cells}: TV {:.3e}", rep.tv_distance));
                }
            }
            Err(Error::SizeGuard(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    println!(
        "{checked} lists checked, {skipped} beyond the oracle's size limits; max TV {worst_tv:.3e}, min fidelity {worst_fid:.12}"
    );
    for f in &failures {
        eprintln!("not equivalent: {f}");
    }
    Ok(failures.is_empty())
}
