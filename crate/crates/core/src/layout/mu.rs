//! Gate orderings for the interleaved layout.
//!
//! A tuple pairs an optional Z-side action (a monomial of `A^T` or `B^T`
//! applied by the Z ancillas to data block `u_z`) with an optional X-side
//! action (a monomial of `A` or `B` applied by the X ancillas to block `u_x`).

use std::collections::BTreeMap;

use crate::code::BBCode;
use crate::error::{Error, Result};
use crate::poly::Monomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MuAction {
    pub u: usize,
    pub mono: Monomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MuTuple {
    pub z: Option<MuAction>,
    pub x: Option<MuAction>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuSchedule {
    pub tuples: Vec<MuTuple>,
    /// Emit a shift layer only when some row has to move. When false, every
    /// tuple step gets its own shift layer.
    pub merge_alignments: bool,
}

fn z(u: usize, mono: Monomial) -> Option<MuAction> {
    Some(MuAction { u, mono })
}

impl MuSchedule {
    /// Checks that the Z side covers `A^T` on block 1 and `B^T` on block 0,
    /// the X side covers `A` on block 0 and `B` on block 1, each exactly once,
    /// and that the two sides of a tuple touch different data blocks.
    pub fn validate(&self, code: &BBCode) -> Result<()> {
        let p = code.params;
        let mut want_z: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
        let mut want_x: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
        for t in code.a.terms() {
            *want_z.entry((1, t.transpose(p))).or_default() += 1;
            *want_x.entry((0, *t)).or_default() += 1;
        }
        for t in code.b.terms() {
            *want_z.entry((0, t.transpose(p))).or_default() += 1;
            *want_x.entry((1, *t)).or_default() += 1;
        }
        for (k, t) in self.tuples.iter().enumerate() {
            if let (Some(a), Some(b)) = (t.z, t.x) {
                if a.u == b.u {
                    return Err(Error::Layout(format!("tuple {k}: both sides act on data block {}", a.u)));
                }
            }
            for (side, want) in [(t.z, &mut want_z), (t.x, &mut want_x)] {
                if let Some(a) = side {
                    match want.get_mut(&(a.u, a.mono)) {
                        Some(c) if *c > 0 => *c -= 1,
                        _ => return Err(Error::Layout(format!("tuple {k}: action {a:?} is not owed"))),
                    }
                }
            }
        }
        if want_z.values().chain(want_x.values()).any(|&c| c != 0) {
            return Err(Error::Layout("schedule does not cover every monomial action".into()));
        }
        Ok(())
    }
}

/// The seven-step ordering that interleaves X and Z gates, for weight-3 `A`
/// and `B` indexed in catalog term order.
pub fn mu_interleaved_gates(code: &BBCode) -> Result<MuSchedule> {
    if code.a.weight() != 3 || code.b.weight() != 3 {
        return Err(Error::Layout(format!(
            "interleaved-gates ordering needs weight-3 polynomials, got {} and {}",
            code.a.weight(),
            code.b.weight()
        )));
    }
    let p = code.params;
    let a = code.a.terms();
    let b = code.b.terms();
    let at = |k: usize| a[k].transpose(p);
    let bt = |k: usize| b[k].transpose(p);
    let tuples = vec![
        MuTuple { z: z(1, at(0)), x: None },
        MuTuple { z: z(1, at(2)), x: z(0, a[1]) },
        MuTuple { z: z(0, bt(0)), x: z(1, b[1]) },
        MuTuple { z: z(0, bt(1)), x: z(1, b[0]) },
        MuTuple { z: z(0, bt(2)), x: z(1, b[2]) },
        MuTuple { z: z(1, at(1)), x: z(0, a[0]) },
        MuTuple { z: None, x: z(0, a[2]) },
    ];
    Ok(MuSchedule { tuples, merge_alignments: false })
}

/// Orders monomials by y-exponent group, moving the group of `pivot` to the
/// front or the back.
fn grouped(terms: &[Monomial], pivot: Option<usize>, pivot_last: bool) -> Vec<Monomial> {
    let mut t = terms.to_vec();
    t.sort_by_key(|m| {
        let rank = match pivot {
            Some(j) if m.j == j => if pivot_last { 2 } else { 0 },
            _ => 1,
        };
        (rank, m.j, m.i)
    });
    t
}

/// `mu_Z` over `A`, then `mu_ZX` over `B`, then `mu_X` over `A`.
///
/// Monomials are grouped by y-exponent. The group of the smallest exponent
/// shared by `A` and `B` ends the `A` order and starts the `B` order, so
/// the rows are already aligned when one part hands over to the next.
pub fn mu_concurrent_rounds(code: &BBCode) -> MuSchedule {
    let p = code.params;
    let (_, ja) = code.a.exponent_sets();
    let (_, jb) = code.b.exponent_sets();
    let pivot = ja.intersection(&jb).next().copied();
    let a = grouped(code.a.terms(), pivot, true);
    let b = grouped(code.b.terms(), pivot, false);
    let mut tuples = Vec::new();
    tuples.extend(a.iter().map(|m| MuTuple { z: z(1, m.transpose(p)), x: None }));
    tuples.extend(b.iter().map(|m| MuTuple { z: z(0, m.transpose(p)), x: z(1, *m) }));
    tuples.extend(a.iter().map(|m| MuTuple { z: None, x: z(0, *m) }));
    MuSchedule { tuples, merge_alignments: true }
}
