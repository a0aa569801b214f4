//! Synthesis of the quantum Schur transform as explicit two-level rotations.
//!
//! The transform maps the computational basis of `n` qudits onto a basis
//! organized by irreducible representations: a partition label, a state
//! inside the unitary-group irrep, and a multiplicity index carrying the
//! symmetric-group action. It is built iteratively, coupling one site at a
//! time with Clebsch-Gordan blocks, and every elementary step is emitted as
//! a sequence of two-level rotations suitable for direct compilation.
//!
//! Crate layout:
//!
//! * [`combinatorics`] - partitions, tableaux, and exact dimension counts.
//! * [`linalg`] - complex dense/sparse helpers, matrix exponential, Haar
//!   sampling.
//! * [`cg`] - Clebsch-Gordan blocks, closed form for qubits and a general
//!   realization-based engine for qudits.
//! * [`layout`] - the register layout (partition, state, multiplicity
//!   digits), label codecs, ancilla schedule, and multiplicity labeling.
//! * [`circuit`] - assembly of the full iteration sequence and expansion
//!   into explicit matrices.
//! * [`twolevel`] - Givens-style decomposition into two-level rotations,
//!   sequence-length accounting, and runtime bounds.
//! * [`verifier`] - independent checks that the compiled transform
//!   diagonalizes total spin and block-diagonalizes both group actions.
//! * [`stream`] - a plain-text gate stream format with deterministic
//!   output and a replay loader.

pub mod cg;
pub mod circuit;
pub mod combinatorics;
pub mod error;
pub mod half;
pub mod layout;
pub mod linalg;
pub mod stream;
pub mod twolevel;
pub mod verifier;

pub use cg::{cg_block_for_slot, cg_qubit, couple, spin_of, CgBlock, CgOutput, Realization};
pub use circuit::{
    build_schur_circuit, ColumnMatrix, IterationStep, OccupiedRow, SchurCircuit, SlotBlock,
};
pub use combinatorics::{
    dim_q, multiplicity, partitions, semistandard_tableaux, standard_tableaux, Partition, Tableau,
};
pub use error::{Result, SchurError};
pub use half::HalfInt;
pub use layout::{
    ancilla_schedule, branch_rank, iteration_dims, layout_for, multiplicity_labeling,
    valid_sources, BasisLayout, IterationDims, MultiplicityLabeling, SchurLabel, SlotInfo,
};
pub use stream::{parse_stream, render_stream, StreamFile, StreamStep};
pub use twolevel::{
    analytic_bound, decompose, decompose_perm, direct_decompose_baseline, fault_tolerant_estimate,
    qudit_bound, reconstruct, sequence_length, step_rotations, within_analytic_bound,
    SequenceReport, TwoLevelRotation,
};
pub use verifier::{
    check_casimir_diagonalization, check_completeness, check_spin_diagonalization,
    check_symmetric_rep_blocks, check_unitary_rep_blocks, run_all, CheckReport, SpinOperators,
};
