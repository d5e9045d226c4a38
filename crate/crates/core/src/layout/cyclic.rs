//! Cyclic layout: measures an arbitrary list of Pauli operators using
//! ancilla modules that travel once around the moving row.
//!
//! Data qubit `q` sits in fixed cell `q / n`, slot `q % n`. Operators are
//! loaded `n` at a time onto the module in the last moving cell, gated as
//! that module passes the first `L - 1` cells, and read out when it returns.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::code::{BBCode, Basis};
use crate::error::{Error, Result};
use crate::machine::{ArrayConfig, Gate2, Instruction, MachineProgram, Parallelism, QubitAddr};
use crate::pauli::{Pauli, PauliOperator};

use super::{CompiledLayout, MeasTag};

/// Gate lists up to this size are scheduled optimally.
const EXACT_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicPlacement {
    pub module_size: usize,
    pub cells: usize,
}

impl CyclicPlacement {
    /// `2*ell` qubits per module over `m + 1` cells.
    pub fn for_code(code: &BBCode) -> Self {
        Self { module_size: 2 * code.params.ell, cells: code.params.m + 1 }
    }
}

#[derive(Clone, Copy, Debug)]
struct PairGate {
    anc: usize,
    data: usize,
    pauli: Pauli,
}

fn anticommute(a: Pauli, b: Pauli) -> bool {
    a != b && a != Pauli::I && b != Pauli::I
}

/// Candidate schedules for the gates between one ancilla module and one
/// data module. Reordering two gates on one data qubit whose Paulis
/// anticommute multiplies the circuit by a CZ between their ancillas; such
/// CZs commute with every controlled Pauli and cancel in pairs. Each option
/// carries the parity of those reorderings per ancilla pair, as a bit mask.
/// The list-order schedule, with mask zero, is always present.
fn pair_options(gates: &[PairGate], n: usize) -> Vec<PairOption> {
    let g = gates.len();
    let mut preds = vec![0u64; g];
    for b in 0..g {
        for a in 0..b {
            if gates[a].data == gates[b].data && anticommute(gates[a].pauli, gates[b].pauli) {
                preds[b] |= 1 << a;
            }
        }
    }
    if g > EXACT_LIMIT {
        return vec![PairOption { mask: 0, layers: greedy_schedule(gates, &preds) }];
    }
    let base = exact_schedule(gates, &preds);
    let mut options = if n <= MASK_SLOTS { parity_options(gates, &preds, base.len()) } else { Vec::new() };
    if !options.iter().any(|o| o.mask == 0 && o.layers.len() <= base.len()) {
        options.retain(|o| o.mask != 0);
        options.push(PairOption { mask: 0, layers: base });
    }
    options
}

/// Gates of one module pair and their layers.
type Stop = (Vec<PairGate>, Vec<Vec<usize>>);

#[derive(Clone, Debug)]
struct PairOption {
    mask: u64,
    layers: Vec<Vec<usize>>,
}

/// Ancilla slots below this fit a pair mask in 64 bits.
const MASK_SLOTS: usize = 8;

const SEARCH_BUDGET: usize = 1 << 20;

fn pair_bit(a: usize, b: usize) -> u64 {
    1 << (a.min(b) * MASK_SLOTS + a.max(b))
}

/// Fewest layers, at most `max_layers`, for each reachable parity mask.
fn parity_options(gates: &[PairGate], preds: &[u64], max_layers: usize) -> Vec<PairOption> {
    let g = gates.len();
    if g == 0 {
        return vec![PairOption { mask: 0, layers: Vec::new() }];
    }
    let mut anc_load: HashMap<usize, usize> = Default::default();
    let mut dat_load: HashMap<usize, usize> = Default::default();
    for gate in gates {
        *anc_load.entry(gate.anc).or_default() += 1;
        *dat_load.entry(gate.data).or_default() += 1;
    }
    let lower = anc_load.values().chain(dat_load.values()).copied().max().unwrap_or(0);
    let mut found: BTreeMap<u64, Vec<Vec<usize>>> = Default::default();
    let mut budget = SEARCH_BUDGET;
    for layers in lower..=max_layers {
        let mut search = ParitySearch {
            gates,
            preds,
            layers,
            times: vec![0; g],
            anc_used: vec![0; layers],
            dat_used: vec![0; layers],
            budget: &mut budget,
            found: &mut found,
        };
        if search.run(0).is_none() {
            break;
        }
    }
    found.into_iter().map(|(mask, layers)| PairOption { mask, layers }).collect()
}

struct ParitySearch<'a> {
    gates: &'a [PairGate],
    preds: &'a [u64],
    layers: usize,
    times: Vec<usize>,
    anc_used: Vec<u64>,
    dat_used: Vec<u64>,
    budget: &'a mut usize,
    found: &'a mut BTreeMap<u64, Vec<Vec<usize>>>,
}

impl ParitySearch<'_> {
    /// Visits every assignment; `None` when the budget is exhausted.
    fn run(&mut self, k: usize) -> Option<()> {
        if k == self.gates.len() {
            let mask = self.mask();
            self.found.entry(mask).or_insert_with(|| {
                let mut out = vec![Vec::new(); self.layers];
                for (k, &t) in self.times.iter().enumerate() {
                    out[t].push(k);
                }
                out
            });
            return Some(());
        }
        let (a, d) = (self.gates[k].anc, self.gates[k].data);
        for t in 0..self.layers {
            if self.anc_used[t] >> a & 1 == 1 || self.dat_used[t] >> d & 1 == 1 {
                continue;
            }
            *self.budget = self.budget.checked_sub(1)?;
            self.times[k] = t;
            self.anc_used[t] |= 1 << a;
            self.dat_used[t] |= 1 << d;
            let done = self.run(k + 1);
            self.anc_used[t] &= !(1 << a);
            self.dat_used[t] &= !(1 << d);
            done?;
        }
        Some(())
    }

    fn mask(&self) -> u64 {
        let mut mask = 0;
        for (b, &p) in self.preds.iter().enumerate() {
            for a in (0..b).filter(|&a| p >> a & 1 == 1) {
                if self.times[b] < self.times[a] {
                    mask ^= pair_bit(self.gates[a].anc, self.gates[b].anc);
                }
            }
        }
        mask
    }
}

/// Picks one option per stop of an ancilla module's trip so the masks
/// cancel, minimising first the layers above `n` and then the total.
fn plan_trip(stops: &[Vec<PairOption>], n: usize) -> Vec<Vec<Vec<usize>>> {
    // mask -> (cost, chosen option per stop so far)
    let mut states: BTreeMap<u64, ((usize, usize), Vec<usize>)> = BTreeMap::from([(0, ((0, 0), Vec::new()))]);
    for options in stops {
        let mut next: BTreeMap<u64, ((usize, usize), Vec<usize>)> = Default::default();
        for (&mask, (cost, picks)) in &states {
            for (i, o) in options.iter().enumerate() {
                let len = o.layers.len();
                let c = (cost.0 + len.max(n), cost.1 + len);
                let m = mask ^ o.mask;
                if next.get(&m).is_none_or(|(best, _)| c < *best) {
                    let mut p = picks.clone();
                    p.push(i);
                    next.insert(m, (c, p));
                }
            }
        }
        states = next;
    }
    let (_, picks) = &states[&0];
    stops.iter().zip(picks).map(|(o, &i)| o[i].layers.clone()).collect()
}

fn is_matching(gates: &[PairGate], set: u64) -> bool {
    let mut anc = HashSet::new();
    let mut dat = HashSet::new();
    (0..gates.len()).filter(|&k| set >> k & 1 == 1).all(|k| anc.insert(gates[k].anc) && dat.insert(gates[k].data))
}

fn exact_schedule(gates: &[PairGate], preds: &[u64]) -> Vec<Vec<usize>> {
    let g = gates.len();
    let full: u64 = if g == 64 { u64::MAX } else { (1u64 << g) - 1 };
    let mut parent: Vec<Option<(u64, u64)>> = vec![None; 1 << g];
    let mut seen = vec![false; 1 << g];
    seen[0] = true;
    let mut queue = VecDeque::from([0u64]);
    while let Some(done) = queue.pop_front() {
        if done == full {
            break;
        }
        let avail: u64 = (0..g)
            .filter(|&k| done >> k & 1 == 0 && preds[k] & !done == 0)
            .fold(0, |acc, k| acc | 1 << k);
        // enumerate non-empty subsets of the available gates
        let mut sub = avail;
        while sub != 0 {
            let next = done | sub;
            if !seen[next as usize] && is_matching(gates, sub) {
                seen[next as usize] = true;
                parent[next as usize] = Some((done, sub));
                queue.push_back(next);
            }
            sub = (sub - 1) & avail;
        }
    }
    let mut layers = Vec::new();
    let mut cur = full;
    while cur != 0 {
        let (prev, sub) = parent[cur as usize].expect("every gate set is reachable");
        layers.push((0..g).filter(|&k| sub >> k & 1 == 1).collect());
        cur = prev;
    }
    layers.reverse();
    layers
}

fn greedy_schedule(gates: &[PairGate], _preds: &[u64]) -> Vec<Vec<usize>> {
    let g = gates.len();
    let mut done = vec![false; g];
    let mut remaining = g;
    let mut layers = Vec::new();
    while remaining > 0 {
        let mut anc = HashSet::new();
        let mut dat = HashSet::new();
        let mut layer = Vec::new();
        for k in 0..g {
            if done[k] {
                continue;
            }
            // an earlier unscheduled gate on the same data qubit blocks this one
            let blocked = (0..k).any(|a| !done[a] && !layer.contains(&a) && gates[a].data == gates[k].data);
            if blocked || dat.contains(&gates[k].data) || anc.contains(&gates[k].anc) {
                dat.insert(gates[k].data);
                continue;
            }
            anc.insert(gates[k].anc);
            dat.insert(gates[k].data);
            layer.push(k);
        }
        for &k in &layer {
            done[k] = true;
        }
        remaining -= layer.len();
        layers.push(layer);
    }
    layers
}

fn gate_kind(p: Pauli) -> Gate2 {
    match p {
        Pauli::X => Gate2::CX,
        Pauli::Y => Gate2::CY,
        Pauli::Z => Gate2::CZ,
        Pauli::I => unreachable!("identity factors produce no gate"),
    }
}

/// Builds the program; `tags[k]` is the operator index read out by the
/// `k`-th measured qubit.
fn build(ops: &[PauliOperator], n: usize, cells: usize) -> Result<(MachineProgram, Vec<QubitAddr>, Vec<Option<usize>>)> {
    let r = ops.len();
    if r == 0 {
        return Err(Error::Layout("no operators to measure".into()));
    }
    if n == 0 || cells < 2 {
        return Err(Error::Layout("cyclic layout needs n >= 1 and L >= 2".into()));
    }
    let num = ops[0].num_qubits();
    if ops.iter().any(|o| o.num_qubits() != num) {
        return Err(Error::Layout("operators act on different numbers of qubits".into()));
    }
    if num > (cells - 1) * n {
        return Err(Error::Layout(format!(
            "{num} data qubits exceed the {} slots of the first {} fixed cells",
            (cells - 1) * n,
            cells - 1
        )));
    }
    let config = ArrayConfig { moving_rows: 1, cells, module_size: n, flat: false, parallelism: Parallelism::Full };
    let data: Vec<QubitAddr> = (0..num).map(|q| QubitAddr::new(0, q / n, q % n)).collect();
    let mut qubits = data.clone();
    for h in 0..cells {
        qubits.extend((0..n).map(|s| QubitAddr::new(1, h, s)));
    }
    let mut program = MachineProgram::new(config, qubits);
    let module = |h: usize| (0..n).map(|s| QubitAddr::new(1, h, s)).collect::<Vec<_>>();

    let mut assigned: Vec<Vec<Option<usize>>> = vec![vec![None; n]; cells];
    let mut next = 0usize;
    let pair_gates = |slots: &[Option<usize>], c: usize| {
        let mut gates = Vec::new();
        for (slot, op) in slots.iter().enumerate() {
            let Some(op) = op else { continue };
            for j in 0..n {
                let q = c * n + j;
                if q < num && ops[*op].get(q) != Pauli::I {
                    gates.push(PairGate { anc: slot, data: j, pauli: ops[*op].get(q) });
                }
            }
        }
        gates
    };
    // plans[h][c]: gates and layers of module `h` at cell `c` on its current trip.
    let mut plans: Vec<Vec<Stop>> = vec![Vec::new(); cells];
    let mut load = |h: usize, assigned: &mut Vec<Vec<Option<usize>>>, plans: &mut Vec<Vec<_>>| {
        for s in assigned[h].iter_mut() {
            *s = (next < r).then_some(next);
            next += 1;
        }
        let gates: Vec<Vec<PairGate>> = (0..cells - 1).map(|c| pair_gates(&assigned[h], c)).collect();
        let options: Vec<Vec<PairOption>> = gates.iter().map(|g| pair_options(g, n)).collect();
        plans[h] = gates.into_iter().zip(plan_trip(&options, n)).collect();
    };
    program.push_layer(vec![Instruction::Prep { basis: Basis::X, targets: module(cells - 1) }]);
    load(cells - 1, &mut assigned, &mut plans);

    let mut tags = Vec::new();
    let mut offset = 0usize;
    let iterations = r.div_ceil(n) + cells;
    for _ in 0..iterations {
        program.push_layer(vec![Instruction::Shift { row: 1, s: 1 }]);
        offset = (offset + 1) % cells;
        let home = |c: usize| (c + cells - offset) % cells;

        let mut layers: Vec<Vec<Instruction>> = Vec::new();
        for c in 0..cells - 1 {
            let h = home(c);
            let Some((gates, plan)) = plans[h].get(c) else { continue };
            for (depth, layer) in plan.iter().enumerate() {
                if layers.len() <= depth {
                    layers.resize_with(depth + 1, Vec::new);
                }
                layers[depth].extend(layer.iter().map(|&k| {
                    let g = gates[k];
                    Instruction::Gate2 {
                        kind: gate_kind(g.pauli),
                        control: QubitAddr::new(1, h, g.anc),
                        target: QubitAddr::new(0, c, g.data),
                    }
                }));
            }
        }
        let last = home(cells - 1);
        tags.extend(assigned[last].iter().copied());
        let meas = Instruction::Measure { basis: Basis::X, reset: true, targets: module(last) };
        if layers.is_empty() {
            layers.push(vec![meas]);
        } else {
            layers[0].insert(0, meas);
        }
        for l in layers {
            program.push_layer(l);
        }
        load(last, &mut assigned, &mut plans);
    }
    Ok((program, data, tags))
}

/// Measures `paulis` in list order on a `2 x cells` array of `module_size`
/// qubit modules.
pub fn cyclic_layout(paulis: &[PauliOperator], module_size: usize, cells: usize) -> Result<CompiledLayout> {
    let (program, data, tags) = build(paulis, module_size, cells)?;
    Ok(CompiledLayout {
        program,
        data,
        generators: paulis.to_vec(),
        measurements: tags.into_iter().map(|t| t.map(|g| MeasTag { generator: g, round: 0 })).collect(),
    })
}

/// `rounds` rounds of the code's generators, fed to the cyclic layout as one
/// list.
pub fn cyclic_layout_code(code: &BBCode, placement: CyclicPlacement, rounds: usize) -> Result<CompiledLayout> {
    let gens = code.stabilizer_code().generators().to_vec();
    let per = gens.len();
    let ops: Vec<PauliOperator> = (0..rounds).flat_map(|_| gens.iter().cloned()).collect();
    let (program, data, tags) = build(&ops, placement.module_size, placement.cells)?;
    Ok(CompiledLayout {
        program,
        data,
        generators: gens,
        measurements: tags
            .into_iter()
            .map(|t| t.map(|k| MeasTag { generator: k % per, round: k / per }))
            .collect(),
    })
}

/// Depth bound `3 + (ceil(r/n) + L - 1)(n + 1)`.
pub fn cyclic_depth_bound(r: usize, n: usize, cells: usize) -> usize {
    3 + (r.div_ceil(n) + cells - 1) * (n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::validate_program;

    fn ops(list: &[&str]) -> Vec<PauliOperator> {
        list.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn small_instance_within_bound() {
        let c = cyclic_layout(&ops(&["ZZ", "XX"]), 1, 3).unwrap();
        let r = validate_program(&c.program).unwrap();
        assert!(r.total_depth <= cyclic_depth_bound(2, 1, 3));
        assert_eq!(cyclic_depth_bound(2, 1, 3), 11);
        let measured: Vec<_> = c.measurements.iter().flatten().map(|t| t.generator).collect();
        assert_eq!(measured, vec![0, 1]);
    }

    #[test]
    fn anticommuting_pair_needs_three_layers() {
        let gates = [
            PairGate { anc: 0, data: 0, pauli: Pauli::X },
            PairGate { anc: 0, data: 1, pauli: Pauli::X },
            PairGate { anc: 1, data: 0, pauli: Pauli::Z },
            PairGate { anc: 1, data: 1, pauli: Pauli::Z },
        ];
        let opts = pair_options(&gates, 2);
        let even = opts.iter().filter(|o| o.mask == 0).map(|o| o.layers.len()).min();
        assert_eq!(even, Some(3));
        // Two layers reorder exactly one data qubit.
        assert!(opts.iter().any(|o| o.mask == pair_bit(0, 1) && o.layers.len() == 2));
        let commuting = [
            PairGate { anc: 0, data: 0, pauli: Pauli::Z },
            PairGate { anc: 0, data: 1, pauli: Pauli::Z },
            PairGate { anc: 1, data: 0, pauli: Pauli::Z },
            PairGate { anc: 1, data: 1, pauli: Pauli::Z },
        ];
        let opts = pair_options(&commuting, 2);
        assert_eq!(opts.len(), 1);
        assert_eq!((opts[0].mask, opts[0].layers.len()), (0, 2));
    }

    #[test]
    fn odd_stops_cancel_over_a_trip() {
        let gates = [
            PairGate { anc: 0, data: 0, pauli: Pauli::X },
            PairGate { anc: 0, data: 1, pauli: Pauli::X },
            PairGate { anc: 1, data: 0, pauli: Pauli::Z },
            PairGate { anc: 1, data: 1, pauli: Pauli::Z },
        ];
        let one = pair_options(&gates, 2);
        assert_eq!(plan_trip(std::slice::from_ref(&one), 2)[0].len(), 3);
        let two = plan_trip(&[one.clone(), one], 2);
        assert_eq!(two.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2]);
    }

    #[test]
    fn lone_anticommuting_block_costs_one_layer() {
        // With L = 2 each trip has one stop, so no odd stop can be cancelled.
        let list = ops(&["XX", "ZZ", "XX", "ZZ"]);
        let c = cyclic_layout(&list, 2, 2).unwrap();
        let depth = validate_program(&c.program).unwrap().total_depth;
        assert_eq!(depth, cyclic_depth_bound(4, 2, 2) + 1);
    }

    #[test]
    fn greedy_respects_order_and_matching() {
        let gates: Vec<PairGate> = (0..16)
            .map(|k| PairGate { anc: k / 4, data: k % 4, pauli: if k % 3 == 0 { Pauli::X } else { Pauli::Z } })
            .collect();
        let layers = greedy_schedule(&gates, &[]);
        let mut when = [0; 16];
        for (d, l) in layers.iter().enumerate() {
            let mut a = HashSet::new();
            let mut q = HashSet::new();
            for &k in l {
                assert!(a.insert(gates[k].anc) && q.insert(gates[k].data));
                when[k] = d;
            }
        }
        for b in 0..16 {
            for a in 0..b {
                if gates[a].data == gates[b].data {
                    assert!(when[a] < when[b]);
                }
            }
        }
    }

    #[test]
    fn capacity_is_checked() {
        assert!(cyclic_layout(&ops(&["ZZZ"]), 1, 3).is_err());
    }
}
