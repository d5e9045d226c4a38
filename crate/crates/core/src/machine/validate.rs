use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::{ArrayConfig, Instruction, MachineProgram, Parallelism, ProgramError, QubitAddr};

/// Where every module currently sits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positions {
    cells: usize,
    module_size: usize,
    row_offset: Vec<i64>,
    intra_offset: HashMap<(usize, usize), i64>,
}

impl Positions {
    pub fn initial(config: &ArrayConfig) -> Self {
        Self {
            cells: config.cells,
            module_size: config.module_size,
            row_offset: vec![0; config.rows()],
            intra_offset: HashMap::new(),
        }
    }

    /// Current cell of the module with home cell `module` on `row`.
    pub fn cell(&self, row: usize, module: usize) -> usize {
        (module as i64 + self.row_offset[row]).rem_euclid(self.cells as i64) as usize
    }

    /// Current position of a qubit inside its (flat) module.
    pub fn slot_position(&self, addr: QubitAddr) -> usize {
        let off = self.intra_offset.get(&addr.module_id()).copied().unwrap_or(0);
        (addr.slot as i64 + off).rem_euclid(self.module_size as i64) as usize
    }

    pub fn row_offset(&self, row: usize) -> usize {
        self.row_offset[row].rem_euclid(self.cells as i64) as usize
    }

    pub fn intra_offset(&self, row: usize, module: usize) -> usize {
        let off = self.intra_offset.get(&(row, module)).copied().unwrap_or(0);
        off.rem_euclid(self.module_size as i64) as usize
    }

    fn shift_row(&mut self, row: usize, s: i64) {
        let l = self.cells as i64;
        self.row_offset[row] = (self.row_offset[row] + s).rem_euclid(l);
    }

    fn shift_module(&mut self, row: usize, module: usize, s: i64) {
        let n = self.module_size as i64;
        let e = self.intra_offset.entry((row, module)).or_insert(0);
        *e = (*e + s).rem_euclid(n);
    }
}

/// Moves every module of moving row `row` from cell `i` to `(i + s) mod L`.
/// Returns `None` for the fixed row or a row that does not exist.
pub fn apply_shift(positions: &Positions, row: usize, s: i64) -> Option<Positions> {
    if row == 0 || row >= positions.row_offset.len() {
        return None;
    }
    let mut next = positions.clone();
    next.shift_row(row, s);
    Some(next)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    pub two_qubit_layers: usize,
    pub shift_layers: usize,
    /// Shift layers in which at least one module changes cell.
    pub moving_shift_layers: usize,
    pub intra_shift_layers: usize,
    pub meas_reset_layers: usize,
    pub prep_layers: usize,
    pub single_qubit_layers: usize,
    pub total_depth: usize,
    pub total_cx: usize,
}

/// Checks every layer against the machine rules while tracking module
/// positions, and classifies each layer for depth accounting.
///
/// A layer holding a two-qubit gate counts as a gate layer even if it also
/// measures other qubits.
pub fn validate_program(program: &MachineProgram) -> Result<DepthReport, ProgramError> {
    let cfg = &program.config;
    let declared: HashSet<QubitAddr> = program.qubits.iter().copied().collect();
    let mut pos = Positions::initial(cfg);
    let mut report = DepthReport::default();

    for (li, layer) in program.layers.iter().enumerate() {
        if layer.is_empty() {
            continue;
        }
        let shifts = layer
            .iter()
            .filter(|i| matches!(i, Instruction::Shift { .. } | Instruction::IntraShift { .. }))
            .count();
        if shifts > 0 && shifts != layer.len() {
            return Err(ProgramError::MixedShiftLayer { layer: li });
        }
        if shifts > 0 {
            let global = layer.iter().any(Instruction::is_shift);
            if global && layer.iter().any(|i| !i.is_shift()) {
                return Err(ProgramError::MixedShiftLayer { layer: li });
            }
            let mut moved = false;
            let mut rows_seen = HashSet::new();
            for ins in layer {
                match *ins {
                    Instruction::Shift { row, s } => {
                        if row == 0 {
                            return Err(ProgramError::FixedRowShift { layer: li });
                        }
                        if row > cfg.moving_rows {
                            return Err(ProgramError::BadRow { layer: li, row });
                        }
                        if !rows_seen.insert((row, usize::MAX)) {
                            return Err(ProgramError::DoubleShift { layer: li, row });
                        }
                        moved |= s.rem_euclid(cfg.cells as i64) != 0;
                        pos.shift_row(row, s);
                    }
                    Instruction::IntraShift { row, module, s } => {
                        if !cfg.flat {
                            return Err(ProgramError::IntraShiftNotFlat { layer: li });
                        }
                        if row > cfg.moving_rows || module >= cfg.cells {
                            return Err(ProgramError::BadRow { layer: li, row });
                        }
                        if !rows_seen.insert((row, module)) {
                            return Err(ProgramError::DoubleShift { layer: li, row });
                        }
                        moved |= s.rem_euclid(cfg.module_size as i64) != 0;
                        pos.shift_module(row, module, s);
                    }
                    _ => unreachable!(),
                }
            }
            if global {
                report.shift_layers += 1;
                report.moving_shift_layers += usize::from(moved);
            } else {
                report.intra_shift_layers += 1;
            }
            report.total_depth += 1;
            continue;
        }

        let mut used: HashSet<QubitAddr> = HashSet::new();
        let mut gates_per_module: HashMap<(usize, usize), usize> = HashMap::new();
        let mut use_qubit = |addr: QubitAddr| -> Result<(), ProgramError> {
            if !declared.contains(&addr) {
                return Err(ProgramError::BadAddress { layer: li, addr });
            }
            if !used.insert(addr) {
                return Err(ProgramError::Overlap { layer: li, addr });
            }
            Ok(())
        };
        let (mut has2, mut has_meas, mut has_prep) = (false, false, false);
        for ins in layer {
            match ins {
                Instruction::Prep { targets, .. } => {
                    has_prep = true;
                    for &t in targets {
                        use_qubit(t)?;
                    }
                }
                Instruction::Measure { targets, .. } => {
                    has_meas = true;
                    for &t in targets {
                        use_qubit(t)?;
                    }
                }
                Instruction::Gate1 { target, .. } => use_qubit(*target)?,
                Instruction::Gate2 { control, target, .. } => {
                    let (c, t) = (*control, *target);
                    use_qubit(c)?;
                    use_qubit(t)?;
                    has2 = true;
                    report.total_cx += 1;
                    if c.module_id() != t.module_id() {
                        let aligned = c.row != t.row
                            && (c.row == 0 || t.row == 0)
                            && pos.cell(c.row, c.module) == pos.cell(t.row, t.module);
                        if !aligned {
                            return Err(ProgramError::Misaligned { layer: li, control: c, target: t });
                        }
                        if cfg.flat && pos.slot_position(c) != pos.slot_position(t) {
                            return Err(ProgramError::FlatPosition { layer: li, control: c, target: t });
                        }
                    }
                    if cfg.parallelism == Parallelism::ChainSequential {
                        let mut modules = vec![c.module_id()];
                        if t.module_id() != c.module_id() {
                            modules.push(t.module_id());
                        }
                        for m in modules {
                            let n = gates_per_module.entry(m).or_insert(0);
                            *n += 1;
                            if *n > 1 {
                                return Err(ProgramError::Sequential { layer: li, row: m.0, module: m.1 });
                            }
                        }
                    }
                }
                Instruction::Shift { .. } | Instruction::IntraShift { .. } => unreachable!(),
            }
        }
        if has2 {
            report.two_qubit_layers += 1;
        } else if has_meas {
            report.meas_reset_layers += 1;
        } else if has_prep {
            report.prep_layers += 1;
        } else {
            report.single_qubit_layers += 1;
        }
        report.total_depth += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{Gate2, Parallelism};
    use super::*;
    use crate::code::Basis;
    use proptest::prelude::*;

    fn cfg(cells: usize) -> ArrayConfig {
        ArrayConfig { moving_rows: 1, cells, module_size: 2, flat: false, parallelism: Parallelism::Full }
    }

    fn two_cell_program(shift: Option<i64>) -> MachineProgram {
        let qubits = vec![QubitAddr::new(0, 0, 0), QubitAddr::new(1, 1, 0)];
        let mut p = MachineProgram::new(cfg(2), qubits);
        if let Some(s) = shift {
            p.push_layer(vec![Instruction::Shift { row: 1, s }]);
        }
        p.push_layer(vec![Instruction::Gate2 {
            kind: Gate2::CX,
            control: QubitAddr::new(1, 1, 0),
            target: QubitAddr::new(0, 0, 0),
        }]);
        p
    }

    #[test]
    fn shift_wraps_around() {
        let c = cfg(3);
        let p = apply_shift(&Positions::initial(&c), 1, 1).unwrap();
        assert_eq!(p.cell(1, 2), 0);
        let full = apply_shift(&Positions::initial(&c), 1, 3).unwrap();
        assert_eq!(full, Positions::initial(&c));
        let back = apply_shift(&p, 1, -1).unwrap();
        assert_eq!(back.cell(1, 2), 2);
    }

    #[test]
    fn fixed_row_cannot_shift() {
        assert!(apply_shift(&Positions::initial(&cfg(3)), 0, 1).is_none());
    }

    #[test]
    fn unaligned_gate_rejected() {
        assert!(matches!(validate_program(&two_cell_program(None)), Err(ProgramError::Misaligned { .. })));
    }

    #[test]
    fn gate_after_shift_is_legal() {
        let r = validate_program(&two_cell_program(Some(-1))).unwrap();
        assert_eq!((r.shift_layers, r.two_qubit_layers, r.total_depth, r.total_cx), (1, 1, 2, 1));
    }

    #[test]
    fn overlap_rejected() {
        let q = QubitAddr::new(0, 0, 0);
        let mut p = MachineProgram::new(cfg(1), vec![q]);
        p.push_layer(vec![
            Instruction::Prep { basis: Basis::X, targets: vec![q] },
            Instruction::Measure { basis: Basis::X, reset: false, targets: vec![q] },
        ]);
        assert!(matches!(validate_program(&p), Err(ProgramError::Overlap { .. })));
    }

    #[test]
    fn intra_shift_needs_flat() {
        let mut p = MachineProgram::new(cfg(1), vec![]);
        p.push_layer(vec![Instruction::IntraShift { row: 1, module: 0, s: 1 }]);
        assert!(matches!(validate_program(&p), Err(ProgramError::IntraShiftNotFlat { .. })));
    }

    #[test]
    fn chain_mode_limits_gates_per_module() {
        let qs = vec![
            QubitAddr::new(0, 0, 0),
            QubitAddr::new(0, 0, 1),
            QubitAddr::new(1, 0, 0),
            QubitAddr::new(1, 0, 1),
        ];
        let mut p = MachineProgram::new(cfg(1).with_parallelism(Parallelism::ChainSequential), qs.clone());
        p.push_layer(vec![
            Instruction::Gate2 { kind: Gate2::CX, control: qs[2], target: qs[0] },
            Instruction::Gate2 { kind: Gate2::CX, control: qs[3], target: qs[1] },
        ]);
        assert!(matches!(validate_program(&p), Err(ProgramError::Sequential { .. })));
        p.config.parallelism = Parallelism::Full;
        assert!(validate_program(&p).is_ok());
    }

    #[test]
    fn flat_gates_need_equal_positions() {
        let c = ArrayConfig { flat: true, ..cfg(1) };
        let a = QubitAddr::new(1, 0, 0);
        let d = QubitAddr::new(0, 0, 1);
        let mut p = MachineProgram::new(c, vec![a, d]);
        p.push_layer(vec![Instruction::Gate2 { kind: Gate2::CX, control: a, target: d }]);
        assert!(matches!(validate_program(&p), Err(ProgramError::FlatPosition { .. })));
        p.layers.insert(0, vec![Instruction::IntraShift { row: 1, module: 0, s: 1 }]);
        let r = validate_program(&p).unwrap();
        assert_eq!(r.intra_shift_layers, 1);
    }

    proptest! {
        #[test]
        fn shifts_compose_additively(l in 1usize..9, s1 in -20i64..20, s2 in -20i64..20) {
            let c = cfg(l);
            let start = Positions::initial(&c);
            let two = apply_shift(&apply_shift(&start, 1, s1).unwrap(), 1, s2).unwrap();
            let one = apply_shift(&start, 1, s1 + s2).unwrap();
            for m in 0..l {
                prop_assert_eq!(two.cell(1, m), one.cell(1, m));
            }
        }
    }
}
