//! Layer counts of the BB layouts against their closed forms.

use serde::Serialize;

use crate::code::BBCode;
use crate::error::Result;
use crate::machine::{validate_program, DepthReport};

use super::{compile_code, LayoutKind};

/// Counts as `[two-qubit layers, shift layers, measurement layers, amortized
/// depth per round]`. For the sparse and flat layouts the measurement
/// column also counts ancilla preparations; the interleaved layouts prepare
/// once up front and that layer is reported as `setup_layers`.
#[derive(Clone, Debug, Serialize)]
pub struct DepthRow {
    pub layout: LayoutKind,
    pub measured: [usize; 4],
    pub expected: [usize; 4],
    pub moving_shift_layers: usize,
    pub setup_layers: usize,
}

impl DepthRow {
    pub fn column_matches(&self) -> [bool; 4] {
        std::array::from_fn(|k| self.measured[k] == self.expected[k])
    }

    pub fn matches(&self) -> bool {
        self.column_matches().iter().all(|&b| b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthTable {
    pub code: String,
    pub rounds: usize,
    pub rows: Vec<DepthRow>,
}

impl serde::Serialize for LayoutKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn columns(kind: LayoutKind, r: &DepthReport) -> [usize; 3] {
    match kind {
        LayoutKind::Sparse => [r.two_qubit_layers, r.shift_layers, r.meas_reset_layers + r.prep_layers],
        LayoutKind::Flat => [
            r.two_qubit_layers,
            r.shift_layers + r.intra_shift_layers,
            r.meas_reset_layers + r.prep_layers,
        ],
        _ => [r.two_qubit_layers, r.shift_layers, r.meas_reset_layers],
    }
}

pub fn closed_form(code: &BBCode, kind: LayoutKind, t: usize) -> [usize; 4] {
    let w = code.omega;
    let (_, ja) = code.a.exponent_sets();
    let (_, jb) = code.b.exponent_sets();
    let j = ja.union(&jb).count();
    match kind {
        LayoutKind::Sparse => [2 * w * t, 2 * t * j, 4 * t, 2 * j + 2 * w + 4],
        LayoutKind::Flat => [2 * w * t, 4 * w * t, 4 * t, 6 * w + 4],
        LayoutKind::InterleavedGates => [w * t + 1, w * t + 1, 2 * t, 2 * w + 2],
        LayoutKind::ConcurrentRounds => [w * t + w, t * j + ja.len(), 2 * t, j + w + 2],
        LayoutKind::Cyclic => [0; 4],
    }
}

pub fn depth_table(code: &BBCode, rounds: usize) -> Result<DepthTable> {
    let kinds = [LayoutKind::Sparse, LayoutKind::Flat, LayoutKind::InterleavedGates, LayoutKind::ConcurrentRounds];
    let mut rows = Vec::new();
    for kind in kinds {
        let now = validate_program(&compile_code(code, kind, rounds)?.program)?;
        let next = validate_program(&compile_code(code, kind, rounds + 1)?.program)?;
        let c = columns(kind, &now);
        rows.push(DepthRow {
            layout: kind,
            measured: [c[0], c[1], c[2], next.total_depth - now.total_depth],
            expected: closed_form(code, kind, rounds),
            moving_shift_layers: now.moving_shift_layers,
            setup_layers: if matches!(kind, LayoutKind::Sparse | LayoutKind::Flat) { 0 } else { now.prep_layers },
        });
    }
    Ok(DepthTable { code: code.name.clone(), rounds, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_code;

    #[test]
    fn bb144_amortized_depths() {
        let t = depth_table(&builtin_code("bb144").unwrap(), 3).unwrap();
        let amort: Vec<usize> = t.rows.iter().map(|r| r.measured[3]).collect();
        assert_eq!(amort, vec![24, 40, 14, 12]);
        for r in &t.rows[..3] {
            assert!(r.matches(), "{r:?}");
        }
    }
}
