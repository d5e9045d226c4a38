//! Stabilizer simulation: symbolic tableau verification, Pauli-frame
//! sampling and a dense oracle for small systems.

mod dense;
mod frame;
mod tableau;
mod verify;

pub use dense::{cyclic_oracle_equivalence, dense_sequential_oracle, paulis_from_strs, EquivalenceReport, OracleBranch};
pub use frame::{sample, ShotBatch};
pub use tableau::{Affine, Tableau};
pub use verify::{check_determinism, verify_memory, verify_noiseless, DeterminismReport, MemoryVerification};
