//! Assembly of the full reduction circuit.
//!
//! The circuit reduces sites one at a time. Step `k` (for `k = 1..n-1`)
//! takes a register already organized as `seq x column` with column
//! capacity `C_k`, brings in site `k+1` and the step's fresh ancilla
//! digits, and acts on the local space of one column:
//!
//! ```text
//! local index = a * (C_k d) + c * d + x,    dimension L_k = A_k C_k d
//! ```
//!
//! with `a` the ancilla value, `c` the old column content and `x` the new
//! site. Two local unitaries are applied, both replicated over every seq
//! column:
//!
//! 1. the super coupling operator: one Clebsch-Gordan block per partition
//!    slot, sitting on the `a = 0` slice, identity elsewhere;
//! 2. a relabeling permutation that routes each coupled output `(lambda, s)`
//!    of slot `mu` to `b * C_{k+1} + slot(lambda) * T_{k+1} + s`, where `b`
//!    is the branch rank of `mu` among the sources of `lambda`.
//!
//! Afterwards the same integers are re-read as `seq' x column'` with
//! `seq' = seq * d^beta + b`; conservation `A_k C_k d = d^beta C_{k+1}`
//! makes the re-reading exact. Indices not carrying amplitude ("ghosts")
//! are kept fixed by the permutation whenever their position is not needed
//! as a target; bijectivity forces the remaining few to shuffle.

use std::collections::BTreeMap;

use crate::cg::{cg_block_for_slot, couple, CgBlock, Realization};
use crate::combinatorics::{partitions, Partition};
use crate::error::{Result, SchurError};
use crate::layout::{
    branch_rank, iteration_dims, layout_for, multiplicity_labeling, BasisLayout, IterationDims,
    MultiplicityLabeling,
};
use crate::linalg::{SparseOp, C64, ONE};

/// One partition slot's coupling block inside a step's local space.
#[derive(Clone, Debug)]
pub struct SlotBlock {
    pub shape: Partition,
    /// First local index of the block: `slot_index * T_k * d`.
    pub base: usize,
    pub block: CgBlock,
}

/// One coupling step, fully instantiated.
#[derive(Clone, Debug)]
pub struct IterationStep {
    pub dims: IterationDims,
    /// `A_k C_k d`, the dimension the local operators act on.
    pub local_dim: usize,
    /// Seq columns present when this step runs; its operators are
    /// replicated over all of them.
    pub reps: u64,
    pub slots: Vec<SlotBlock>,
    /// Relabeling permutation: content at local index `i` moves to
    /// `reorder[i]`.
    pub reorder: Vec<usize>,
}

impl IterationStep {
    /// Column of the super coupling operator at local index `lc`.
    fn cg_column(&self, lc: usize, d: usize) -> Vec<(usize, C64)> {
        let t_cap = self.dims.stat_cap_before;
        if lc < self.dims.col_before * d {
            let c = lc / d;
            let x = lc % d;
            let j = c / t_cap;
            let t = c % t_cap;
            if let Some(sb) = self.slots.get(j) {
                let q = sb.block.matrix.ncols() / d;
                if t < q {
                    let bcol = t * d + x;
                    return (0..sb.block.matrix.nrows())
                        .filter_map(|r| {
                            let v = sb.block.matrix[(r, bcol)];
                            (v.norm() > 1e-15).then_some((sb.base + r, v))
                        })
                        .collect();
                }
            }
        }
        vec![(lc, ONE)]
    }

    /// Composed local operator of the step: relabeling after coupling.
    pub fn local_operator(&self, d: usize) -> SparseOp {
        let cols = (0..self.local_dim)
            .map(|lc| {
                let mut col: Vec<(usize, C64)> = self
                    .cg_column(lc, d)
                    .into_iter()
                    .map(|(r, v)| (self.reorder[r], v))
                    .collect();
                col.sort_by_key(|e| e.0);
                col
            })
            .collect();
        SparseOp {
            dim: self.local_dim,
            cols,
        }
    }

    pub fn ancilla_capacity(&self, d: usize) -> usize {
        d.pow(self.dims.ancilla_digits as u32)
    }
}

/// The assembled circuit for `n` sites of dimension `d`.
#[derive(Clone, Debug)]
pub struct SchurCircuit {
    pub n: u32,
    pub d: usize,
    pub layout: BasisLayout,
    pub labeling: MultiplicityLabeling,
    pub steps: Vec<IterationStep>,
}

pub fn build_schur_circuit(n: u32, d: usize) -> SchurCircuit {
    assert!(n >= 1 && d >= 2);
    let mut reals: BTreeMap<Partition, Realization> = BTreeMap::new();
    if d > 2 {
        reals.insert(Partition::new(&[1]), Realization::defining(d));
    }
    let mut steps = Vec::new();
    let mut reps: u64 = 1;

    for dims in iteration_dims(n, d) {
        let k = dims.k;
        let t_cur = dims.stat_cap_before;
        let t_next = dims.stat_cap_after;
        let local_dim = dims.col_before * d * d.pow(dims.ancilla_digits as u32);

        let mut slot_blocks = Vec::new();
        let mut next_reals: BTreeMap<Partition, Realization> = BTreeMap::new();
        for (j, shape) in partitions(k, d).iter().enumerate() {
            let block = if d == 2 {
                cg_block_for_slot(shape, 2)
            } else {
                let (block, outs) = couple(&reals[shape]).expect("chain stays invariant");
                for out in outs {
                    next_reals
                        .entry(out.shape.clone())
                        .or_insert_with(|| out.compacted());
                }
                block
            };
            slot_blocks.push(SlotBlock {
                shape: shape.clone(),
                base: j * t_cur * d,
                block,
            });
        }

        let next_slot_index: BTreeMap<Partition, usize> = partitions(k + 1, d)
            .into_iter()
            .enumerate()
            .map(|(j, s)| (s, j))
            .collect();

        let mut reorder = vec![usize::MAX; local_dim];
        let mut taken = vec![false; local_dim];
        for sb in &slot_blocks {
            for out in &sb.block.outputs {
                let b = branch_rank(&out.shape, &sb.shape, d).expect("source of its own growth");
                let jp = next_slot_index[&out.shape];
                for (s, r) in out.rows.clone().enumerate() {
                    let tgt = b * dims.col_after + jp * t_next + s;
                    reorder[sb.base + r] = tgt;
                    taken[tgt] = true;
                }
            }
        }
        let mut displaced = Vec::new();
        for (i, slot) in reorder.iter_mut().enumerate() {
            if *slot == usize::MAX {
                if taken[i] {
                    displaced.push(i);
                } else {
                    *slot = i;
                    taken[i] = true;
                }
            }
        }
        let free: Vec<usize> = (0..local_dim).filter(|&t| !taken[t]).collect();
        assert_eq!(displaced.len(), free.len());
        for (&src, &tgt) in displaced.iter().zip(&free) {
            reorder[src] = tgt;
        }

        steps.push(IterationStep {
            dims,
            local_dim,
            reps,
            slots: slot_blocks,
            reorder,
        });
        reps *= (d as u64).pow(dims.seq_growth as u32);
        if d > 2 {
            reals = next_reals;
        }
    }

    SchurCircuit {
        n,
        d,
        layout: layout_for(n, d),
        labeling: multiplicity_labeling(n, d),
        steps,
    }
}

/// A tall column-sparse matrix: the circuit applied to a restricted set of
/// input columns.
#[derive(Clone, Debug)]
pub struct ColumnMatrix {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, C64)>>,
}

impl ColumnMatrix {
    pub fn to_dense(&self) -> crate::linalg::CMat {
        let mut m = crate::linalg::CMat::zeros(self.nrows, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// A fully labeled occupied row of the final register.
#[derive(Clone, Debug)]
pub struct OccupiedRow {
    pub index: usize,
    pub shape: Partition,
    /// 0-based multiplicity column.
    pub column: u64,
    /// 0-based state index inside the irrep.
    pub stat: usize,
}

impl SchurCircuit {
    fn check_cap(&self, cap: u128) -> Result<usize> {
        let required = self.layout.dimension();
        if required > cap {
            return Err(SchurError::SpaceCapExceeded { required, cap });
        }
        Ok(required as usize)
    }

    /// Applies the whole circuit to every computational input (ancillas
    /// fixed to zero): a `d^total x d^n` isometry, input site 0 as the most
    /// significant input digit.
    pub fn expand_restricted(&self, cap: u128) -> Result<ColumnMatrix> {
        let nrows = self.check_cap(cap)?;
        let d = self.d;
        let mut cols: Vec<Vec<(usize, C64)>> = (0..d).map(|x| vec![(x, ONE)]).collect();
        for step in &self.steps {
            let op = step.local_operator(d);
            let c_k = step.dims.col_before;
            let mut next = Vec::with_capacity(cols.len() * d);
            for col in &cols {
                for x in 0..d {
                    let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                    for &(i, amp) in col {
                        let local = (i % c_k) * d + x;
                        let s = i / c_k;
                        for &(lp, w) in &op.cols[local] {
                            *acc.entry(s * step.local_dim + lp).or_insert(C64::new(0.0, 0.0)) +=
                                amp * w;
                        }
                    }
                    next.push(
                        acc.into_iter()
                            .filter(|(_, v)| v.norm() > 1e-15)
                            .collect(),
                    );
                }
            }
            cols = next;
        }
        Ok(ColumnMatrix { nrows, cols })
    }

    /// Final-register index holding a given computational input before the
    /// circuit runs (all ancillas zero).
    pub fn occupied_input_index(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.n as usize);
        assert!(digits.iter().all(|&x| x < self.d));
        let mut idx = digits[0];
        for step in &self.steps {
            let c_k = step.dims.col_before;
            idx = (idx / c_k) * step.local_dim + (idx % c_k) * self.d + digits[step.dims.k as usize];
        }
        idx
    }

    /// For one step, the local coordinate and residual coordinate of every
    /// final-register index: later steps' insertions are peeled off in
    /// reverse. Indices sharing a residual differ only in the step's local
    /// space, so a local operator lifts to pairs with equal residual.
    pub fn step_coordinates(&self, step_index: usize, dim: usize) -> Vec<(usize, usize)> {
        let d = self.d;
        let step = &self.steps[step_index];
        let mut coords = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut x = i;
            let mut fut = 0usize;
            let mut fcap = 1usize;
            for later in self.steps[step_index + 1..].iter().rev() {
                let cd = later.dims.col_before * d;
                let acd = cd * later.ancilla_capacity(d);
                let s = x / acd;
                let rem = x % acd;
                let a = rem / cd;
                let c = (rem % cd) / d;
                let xd = rem % d;
                x = s * later.dims.col_before + c;
                fut = fut * (later.ancilla_capacity(d) * d) + a * d + xd;
                fcap *= later.ancilla_capacity(d) * d;
            }
            coords.push((x % step.local_dim, (x / step.local_dim) * fcap + fut));
        }
        coords
    }

    /// The circuit as one unitary on the entire final register (all ancilla
    /// input values included). Only feasible for small registers.
    pub fn expand_full(&self, cap: u128) -> Result<SparseOp> {
        let dim = self.check_cap(cap)?;
        let mut u = SparseOp::identity(dim);
        for (ki, step) in self.steps.iter().enumerate() {
            let op = step.local_operator(self.d);
            let coords = self.step_coordinates(ki, dim);
            let mut inv = vec![0usize; dim];
            for (i, &(l, r)) in coords.iter().enumerate() {
                inv[r * step.local_dim + l] = i;
            }
            let cols = (0..dim)
                .map(|i| {
                    let (l, r) = coords[i];
                    let mut col: Vec<(usize, C64)> = op.cols[l]
                        .iter()
                        .map(|&(lp, w)| (inv[r * step.local_dim + lp], w))
                        .collect();
                    col.sort_by_key(|e| e.0);
                    col
                })
                .collect();
            let lifted = SparseOp { dim, cols };
            u = lifted.compose(&u);
        }
        Ok(u)
    }

    /// All occupied rows of the final register, sorted by index.
    pub fn occupied_outputs(&self) -> Vec<OccupiedRow> {
        let col_cap = self.layout.column_capacity() as usize;
        let stat_cap = self.d.pow(self.layout.stat_size as u32);
        let mut rows = Vec::new();
        for (j, slot) in self.layout.slots.iter().enumerate() {
            for (col, _) in self.labeling.occupied(&slot.shape) {
                for s in 0..slot.dim_q {
                    rows.push(OccupiedRow {
                        index: *col as usize * col_cap + j * stat_cap + s,
                        shape: slot.shape.clone(),
                        column: *col,
                        stat: s,
                    });
                }
            }
        }
        rows.sort_by_key(|r| r.index);
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_residual, CMat};

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts)
    }

    #[test]
    fn trivial_circuit_for_one_site() {
        let c = build_schur_circuit(1, 2);
        assert!(c.steps.is_empty());
        let m = c.expand_restricted(1 << 14).unwrap();
        assert_eq!(m.nrows, 2);
        assert_eq!(m.cols.len(), 2);
        assert!(max_abs(&(m.to_dense() - CMat::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn two_qubits_give_triplet_and_singlet() {
        let c = build_schur_circuit(2, 2);
        assert_eq!(c.steps.len(), 1);
        assert_eq!(c.steps[0].local_dim, 8);
        assert_eq!(c.steps[0].reps, 1);

        let m = c.expand_restricted(1 << 14).unwrap();
        assert_eq!(m.nrows, 8);
        let occ = c.occupied_outputs();
        let rows: Vec<usize> = occ.iter().map(|r| r.index).collect();
        assert_eq!(rows, vec![0, 1, 2, 4]);

        let dense = m.to_dense();
        let restricted = CMat::from_fn(4, 4, |r, cidx| dense[(rows[r], cidx)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CMat::from_row_slice(
            4,
            4,
            &[
                ONE,
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                ONE,
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs(&(restricted - expect)) < 1e-12);
    }

    #[test]
    fn reorder_is_a_permutation_every_step() {
        for (n, d) in [(6u32, 2usize), (4, 3), (3, 4)] {
            let c = build_schur_circuit(n, d);
            for step in &c.steps {
                let mut sorted = step.reorder.clone();
                sorted.sort_unstable();
                assert!(sorted.into_iter().eq(0..step.local_dim), "k={}", step.dims.k);
                let op = step.local_operator(d);
                assert!(unitarity_residual(&op.to_dense()) < 1e-10);
            }
        }
    }

    #[test]
    fn restricted_expansion_is_an_isometry_with_known_support() {
        for (n, d) in [(3u32, 2usize), (4, 2), (5, 2), (3, 3), (2, 4)] {
            let c = build_schur_circuit(n, d);
            let m = c.expand_restricted(1 << 14).unwrap();
            assert_eq!(m.cols.len(), d.pow(n));
            let dense = m.to_dense();
            let gram = dense.adjoint() * &dense;
            assert!(
                max_abs(&(gram - CMat::identity(m.cols.len(), m.cols.len()))) < 1e-10,
                "isometry n={n} d={d}"
            );
            // support is exactly the occupied rows
            let occ: std::collections::BTreeSet<usize> =
                c.occupied_outputs().iter().map(|r| r.index).collect();
            assert_eq!(occ.len(), d.pow(n), "occupied count n={n} d={d}");
            for col in &m.cols {
                for &(i, _) in col {
                    assert!(occ.contains(&i), "stray amplitude at row {i} n={n} d={d}");
                }
            }
            // restricted square matrix is unitary
            let rows: Vec<usize> = occ.into_iter().collect();
            let sq = CMat::from_fn(rows.len(), rows.len(), |r, cidx| dense[(rows[r], cidx)]);
            assert!(unitarity_residual(&sq) < 1e-10, "n={n} d={d}");
        }
    }

    #[test]
    fn full_expansion_is_unitary_and_extends_the_restriction() {
        for (n, d) in [(3u32, 2usize), (4, 2), (3, 3)] {
            let c = build_schur_circuit(n, d);
            let full = c.expand_full(1 << 14).unwrap();
            assert!(unitarity_residual(&full.to_dense()) < 1e-10, "n={n} d={d}");

            let m = c.expand_restricted(1 << 14).unwrap();
            for v in 0..d.pow(n) {
                let mut digits = vec![0usize; n as usize];
                let mut rest = v;
                for i in (0..n as usize).rev() {
                    digits[i] = rest % d;
                    rest /= d;
                }
                let input = c.occupied_input_index(&digits);
                let mut expect = vec![C64::new(0.0, 0.0); m.nrows];
                for &(i, w) in &m.cols[v] {
                    expect[i] = w;
                }
                let mut got = vec![C64::new(0.0, 0.0); m.nrows];
                for &(i, w) in &full.cols[input] {
                    got[i] = w;
                }
                for i in 0..m.nrows {
                    assert!((expect[i] - got[i]).norm() < 1e-12, "col {v} row {i}");
                }
            }
        }
    }

    #[test]
    fn four_qubit_structure() {
        let c = build_schur_circuit(4, 2);
        assert_eq!(c.steps.len(), 3);
        let shapes: Vec<Partition> = c.layout.slots.iter().map(|s| s.shape.clone()).collect();
        assert_eq!(shapes, vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]);
        // step k=3 couples slots of weight 3
        let step = &c.steps[2];
        let slot_shapes: Vec<Partition> = step.slots.iter().map(|s| s.shape.clone()).collect();
        assert_eq!(slot_shapes, vec![p(&[3]), p(&[2, 1])]);
        assert_eq!(step.reps, 2); // one branch digit was recorded at k=2
        assert_eq!(step.dims.col_before * 2 * 4, step.local_dim);
    }

    #[test]
    fn expansion_respects_the_space_cap() {
        let c = build_schur_circuit(10, 2);
        let err = c.expand_restricted(1 << 14).unwrap_err();
        match err {
            SchurError::SpaceCapExceeded { required, cap } => {
                assert_eq!(required, 1 << 15);
                assert_eq!(cap, 1 << 14);
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn qutrit_pair_block_structure() {
        let c = build_schur_circuit(2, 3);
        let m = c.expand_restricted(1 << 14).unwrap();
        let occ = c.occupied_outputs();
        assert_eq!(occ.len(), 9);
        // six symmetric rows then three antisymmetric rows
        let shapes: Vec<&Partition> = occ.iter().map(|r| &r.shape).collect();
        assert_eq!(shapes.iter().filter(|s| ***s == p(&[2])).count(), 6);
        assert_eq!(shapes.iter().filter(|s| ***s == p(&[1, 1])).count(), 3);
        let dense = m.to_dense();
        for r in &occ {
            for (cidx, _) in m.cols.iter().enumerate() {
                let v = dense[(r.index, cidx)];
                if v.norm() < 1e-12 {
                    continue;
                }
                let (x, y) = (cidx / 3, cidx % 3);
                let mirror = dense[(r.index, y * 3 + x)];
                if r.shape == p(&[2]) {
                    assert!((v - mirror).norm() < 1e-10);
                } else {
                    assert!((v + mirror).norm() < 1e-10);
                }
            }
        }
    }
}
