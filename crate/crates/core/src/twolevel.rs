//! Reduction of unitaries to two-level rotations, and gate counting.
//!
//! A two-level rotation acts on exactly two basis indices and is identity
//! everywhere else. Any unitary factors into such rotations by Givens
//! elimination; the counts of those factors, per coupling step and in
//! total, are the cost model the rest of the crate reports against.

use crate::circuit::{build_schur_circuit, IterationStep};
use crate::error::{Result, SchurError};
use crate::linalg::{unitarity_residual, CMat, C64, ONE, ZERO};

/// Entries at or below this magnitude are treated as exact zeros.
pub const ZERO_TOL: f64 = 1e-12;
/// Required closeness of the reassembled product to the input.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

/// A unitary supported on two basis indices `p < q`, identity elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelRotation {
    /// Coupling step the rotation belongs to; 0 for standalone use.
    pub iteration: u32,
    pub p: usize,
    pub q: usize,
    /// Row-major 2x2 block acting on `(p, q)`.
    pub m: [C64; 4],
    /// Whether the rotation is implicitly repeated over every seq column.
    pub replicated_over_seq: bool,
}

impl TwoLevelRotation {
    pub fn new(p: usize, q: usize, m: [C64; 4]) -> Self {
        assert!(p < q, "index pair must be ordered");
        Self {
            iteration: 0,
            p,
            q,
            m,
            replicated_over_seq: false,
        }
    }

    /// Unitarity defect of the 2x2 block.
    pub fn residual(&self) -> f64 {
        let [a, b, c, d] = self.m;
        let g00 = a.conj() * a + c.conj() * c - ONE;
        let g01 = a.conj() * b + c.conj() * d;
        let g11 = b.conj() * b + d.conj() * d - ONE;
        g00.norm().max(g01.norm()).max(g11.norm())
    }

    /// Left-multiplies a dense matrix: `M <- R M`.
    pub fn apply_left(&self, m: &mut CMat) {
        let [a, b, c, d] = self.m;
        for col in 0..m.ncols() {
            let x = m[(self.p, col)];
            let y = m[(self.q, col)];
            m[(self.p, col)] = a * x + b * y;
            m[(self.q, col)] = c * x + d * y;
        }
    }
}

/// One diagonal phase rotation per entry with `|phase - 1| > ZERO_TOL`,
/// each sharing its two-level slot with a neighbor it leaves untouched.
fn phase_rotations(diag: &[C64]) -> Vec<TwoLevelRotation> {
    let dim = diag.len();
    let mut out = Vec::new();
    for (i, &phase) in diag.iter().enumerate() {
        if (phase - ONE).norm() <= ZERO_TOL {
            continue;
        }
        assert!(dim >= 2, "a global phase on one dimension has no two-level form");
        if i + 1 < dim {
            out.push(TwoLevelRotation::new(i, i + 1, [phase, ZERO, ZERO, ONE]));
        } else {
            out.push(TwoLevelRotation::new(i - 1, i, [ONE, ZERO, ZERO, phase]));
        }
    }
    out
}

/// Factors a unitary into two-level rotations, first applied first.
///
/// Elimination is column-major; within a column, below-diagonal entries are
/// removed top to bottom by a rotation pairing the diagonal row with the
/// target row, leaving the pivot real and nonnegative. Diagonal phases that
/// survive triangularization are emitted ahead of the inverted eliminators,
/// so the ordered product of the result reproduces the input.
pub fn decompose(u: &CMat) -> Result<Vec<TwoLevelRotation>> {
    let dim = u.nrows();
    assert_eq!(u.ncols(), dim, "square matrix required");
    let residual = unitarity_residual(u);
    if residual > UNITARY_TOL {
        return Err(SchurError::NotUnitary { residual });
    }

    let mut m = u.clone();
    let mut eliminators = Vec::new();
    for c in 0..dim {
        for r in c + 1..dim {
            let b = m[(r, c)];
            if b.norm() <= ZERO_TOL {
                continue;
            }
            let a = m[(c, c)];
            let rho = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (g00, g01) = (a.conj() / rho, b.conj() / rho);
            let (g10, g11) = (-b / rho, a / rho);
            for col in c..dim {
                let x = m[(c, col)];
                let y = m[(r, col)];
                m[(c, col)] = g00 * x + g01 * y;
                m[(r, col)] = g10 * x + g11 * y;
            }
            m[(r, c)] = ZERO;
            // the recorded factor is the inverse of the eliminator
            eliminators.push(TwoLevelRotation::new(
                c,
                r,
                [g00.conj(), g10.conj(), g01.conj(), g11.conj()],
            ));
        }
    }

    let diag: Vec<C64> = (0..dim).map(|i| m[(i, i)]).collect();
    let mut out = phase_rotations(&diag);
    out.extend(eliminators.into_iter().rev());
    Ok(out)
}

/// Specialized factorization of a permutation (`content at i moves to
/// perm[i]`): agrees entry-for-entry with `decompose` of the dense matrix,
/// but runs in linear memory. Every rotation has entries in {0, +1, -1}.
pub fn decompose_perm(perm: &[usize]) -> Vec<TwoLevelRotation> {
    let dim = perm.len();
    // pos[c]: current row of column c's single entry; sign[c]: its value;
    // at_row: inverse of pos
    let mut pos: Vec<usize> = perm.to_vec();
    let mut sign = vec![1.0f64; dim];
    let mut at_row = vec![usize::MAX; dim];
    for (c, &r) in pos.iter().enumerate() {
        assert!(r < dim && at_row[r] == usize::MAX, "not a permutation");
        at_row[r] = c;
    }

    let mut eliminators = Vec::new();
    for c in 0..dim {
        let r = pos[c];
        debug_assert!(r >= c, "rows above the pivot are already settled");
        if r == c {
            continue;
        }
        let s = sign[c];
        // the pivot at (c,c) is zero, so the eliminator is a signed swap;
        // its recorded inverse has rows [0, -s; s, 0]
        eliminators.push(TwoLevelRotation::new(
            c,
            r,
            [ZERO, C64::new(-s, 0.0), C64::new(s, 0.0), ZERO],
        ));
        // column c lands on its pivot with value s*s = +1; the column that
        // lived on row c is pushed down to row r with an extra -s factor
        let displaced = at_row[c];
        pos[c] = c;
        sign[c] = 1.0;
        at_row[c] = c;
        pos[displaced] = r;
        sign[displaced] *= -s;
        at_row[r] = displaced;
    }

    let diag: Vec<C64> = sign.iter().map(|&s| C64::new(s, 0.0)).collect();
    let mut out = phase_rotations(&diag);
    out.extend(eliminators.into_iter().rev());
    out
}

/// Ordered product of rotations on a `dim`-dimensional space.
pub fn reconstruct(rotations: &[TwoLevelRotation], dim: usize) -> CMat {
    let mut m = CMat::identity(dim, dim);
    for r in rotations {
        r.apply_left(&mut m);
    }
    m
}

/// All rotations implementing one coupling step, first applied first: the
/// per-slot coupling blocks (offset to their slot bases), then the signed
/// swaps of the relabeling permutation. Each rotation is stamped with the
/// step number and the replication flag.
pub fn step_rotations(step: &IterationStep) -> Vec<TwoLevelRotation> {
    let mut out = Vec::new();
    for sb in &step.slots {
        let rots = decompose(&sb.block.matrix).expect("coupling blocks are unitary");
        out.extend(rots.into_iter().map(|mut r| {
            r.p += sb.base;
            r.q += sb.base;
            r
        }));
    }
    out.extend(decompose_perm(&step.reorder));
    for r in &mut out {
        r.iteration = step.dims.k;
        r.replicated_over_seq = true;
    }
    out
}

/// Below-diagonal nonzero count of the permutation matrix with a 1 at
/// `(perm[c], c)` for every column: the cost model for relabeling steps.
fn perm_below_diagonal(perm: &[usize]) -> u64 {
    perm.iter().enumerate().filter(|&(c, &r)| r > c).count() as u64
}

/// Measured two-level counts for one full transform.
#[derive(Clone, Debug)]
pub struct SequenceReport {
    pub n: u32,
    pub d: usize,
    /// Count contributed by each coupling step, in step order; replicated
    /// rotations are counted once.
    pub per_iteration: Vec<u64>,
    pub total: u64,
    /// Analytic allowance for the total (cubic for d=2, `d(n+1)^(3d-1)`
    /// otherwise), as a real number.
    pub analytic_bound: f64,
    /// The empirical `n^3` envelope.
    pub cubic_envelope: u64,
}

impl SequenceReport {
    /// Exact integer comparison against the analytic allowance.
    pub fn within_analytic_bound(&self) -> bool {
        within_analytic_bound(self.total, self.n, self.d)
    }

    pub fn within_cubic_envelope(&self) -> bool {
        self.total <= self.cubic_envelope
    }
}

/// Real-valued allowance on the total count: `n^3/3 + 9n^2/4 + 13n/4 - 6`
/// for qubits, `d(n+1)^(3d-1)` for higher d.
pub fn analytic_bound(n: u32, d: usize) -> f64 {
    if d == 2 {
        let n = n as f64;
        n.powi(3) / 3.0 + 2.25 * n * n + 3.25 * n - 6.0
    } else {
        qudit_bound(n, d) as f64
    }
}

/// `total <= bound` decided in exact integer arithmetic.
pub fn within_analytic_bound(total: u64, n: u32, d: usize) -> bool {
    if d == 2 {
        // multiply the allowance by 12 to clear denominators
        let n = n as u128;
        12 * total as u128 + 72 <= 4 * n * n * n + 27 * n * n + 39 * n
    } else {
        total as u128 <= qudit_bound(n, d)
    }
}

/// Rotation-count allowance for the qudit path: `d(n+1)^(3d-1)`.
pub fn qudit_bound(n: u32, d: usize) -> u128 {
    (d as u128) * (n as u128 + 1).pow(3 * d as u32 - 1)
}

/// Counts the two-level rotations of the structured transform by
/// factoring every coupling block and pricing every relabeling at its
/// below-diagonal nonzeros. Replicated rotations are counted once.
pub fn sequence_length(n: u32, d: usize) -> SequenceReport {
    assert!(n >= 2 && d >= 2);
    let circuit = build_schur_circuit(n, d);
    let per_iteration: Vec<u64> = circuit
        .steps
        .iter()
        .map(|step| {
            let coupling: u64 = step
                .slots
                .iter()
                .map(|sb| {
                    decompose(&sb.block.matrix)
                        .expect("coupling blocks are unitary")
                        .len() as u64
                })
                .sum();
            coupling + perm_below_diagonal(&step.reorder)
        })
        .collect();
    let total = per_iteration.iter().sum();
    SequenceReport {
        n,
        d,
        per_iteration,
        total,
        analytic_bound: analytic_bound(n, d),
        cubic_envelope: (n as u64).pow(3),
    }
}

/// Two-level count of the unstructured alternative: the whole transform,
/// restricted to its occupied subspace (ghost indices complete it as
/// identity and contribute nothing), factored as one dense unitary.
pub fn direct_decompose_baseline(n: u32, d: usize) -> Result<u64> {
    assert!((2..=6).contains(&n), "direct factoring grows exponentially");
    let circuit = build_schur_circuit(n, d);
    let expanded = circuit.expand_restricted(1 << 14)?;
    let rows: Vec<usize> = circuit.occupied_outputs().iter().map(|r| r.index).collect();
    let dense = expanded.to_dense();
    let compact = CMat::from_fn(rows.len(), rows.len(), |r, c| dense[(rows[r], c)]);
    Ok(decompose(&compact)?.len() as u64)
}

/// Estimated fault-tolerant gate count for overall error `epsilon`: each of
/// the `m` rotations gets budget `epsilon/m` and is priced at
/// `ceil(n log2(1/delta))` basic gates for qubits, with the exponent on the
/// log raised to 3.97 for qudits. An estimate only; nothing is synthesized.
pub fn fault_tolerant_estimate(n: u32, d: usize, epsilon: f64) -> u64 {
    assert!(epsilon > 0.0 && epsilon < 1.0);
    let m = sequence_length(n, d).total;
    let log_inv_delta = (m as f64 / epsilon).log2();
    let per_rotation = if d == 2 {
        (n as f64 * log_inv_delta).ceil()
    } else {
        (n as f64 * log_inv_delta.powf(3.97)).ceil()
    };
    m * per_rotation as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cg::cg_qubit;
    use crate::circuit::build_schur_circuit;
    use crate::half::HalfInt;
    use crate::linalg::{haar_unitary, max_abs};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_reconstructs(u: &CMat, rots: &[TwoLevelRotation]) {
        for r in rots {
            assert!(r.residual() < 1e-12, "rotation block must be unitary");
        }
        let back = reconstruct(rots, u.nrows());
        assert!(
            max_abs(&(back - u)) < RECONSTRUCTION_TOL,
            "reconstruction drifted"
        );
    }

    #[test]
    fn identity_needs_no_rotations() {
        assert!(decompose(&CMat::identity(8, 8)).unwrap().is_empty());
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let mut m = CMat::identity(4, 4);
        m[(2, 2)] = C64::new(1.5, 0.0);
        match decompose(&m) {
            Err(SchurError::NotUnitary { residual }) => assert!(residual > 1.0),
            other => panic!("expected a unitarity error, got {other:?}"),
        }
    }

    #[test]
    fn spin_half_coupling_block_stays_within_side_bound() {
        let u = cg_qubit(HalfInt::HALF);
        let rots = decompose(&u).unwrap();
        assert!(rots.len() <= 8, "got {}", rots.len());
        assert_reconstructs(&u, &rots);
    }

    #[test]
    fn every_small_coupling_block_stays_within_twice_its_side() {
        for n in 2..=8u32 {
            let c = build_schur_circuit(n, 2);
            for step in &c.steps {
                for sb in &step.slots {
                    let side = sb.block.matrix.nrows();
                    let rots = decompose(&sb.block.matrix).unwrap();
                    assert!(
                        rots.len() <= 2 * side,
                        "side {side} took {} rotations",
                        rots.len()
                    );
                }
            }
        }
    }

    #[test]
    fn dense_random_count_matches_below_diagonal_plus_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u = haar_unitary(8, &mut rng);
        let below = 8 * 7 / 2; // every entry of a generic unitary is nonzero
        let det_phase = {
            let rots = decompose(&u).unwrap();
            assert_reconstructs(&u, &rots);
            let det = u.determinant();
            usize::from((det - ONE).norm() > ZERO_TOL) + below - rots.len()
        };
        assert_eq!(det_phase, 0, "count must be below-diagonal nonzeros + phases");
    }

    #[test]
    fn fifty_random_unitaries_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..50 {
            let side = 2 + (trial * 7) % 15; // cycles through 2..=16
            let u = haar_unitary(side, &mut rng);
            let rots = decompose(&u).unwrap();
            assert_reconstructs(&u, &rots);
        }
    }

    #[test]
    fn circuit_pieces_reconstruct() {
        for (n, d) in [(2u32, 2usize), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3)] {
            let c = build_schur_circuit(n, d);
            for step in &c.steps {
                let rots = step_rotations(step);
                assert!(rots.iter().all(|r| r.replicated_over_seq));
                assert!(rots.iter().all(|r| r.iteration == step.dims.k));
                let back = reconstruct(&rots, step.local_dim);
                let want = step.local_operator(d).to_dense();
                assert!(
                    max_abs(&(back - want)) < RECONSTRUCTION_TOL,
                    "step {} of n={n} d={d}",
                    step.dims.k
                );
            }
        }
    }

    #[test]
    fn permutations_factor_into_signed_swaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for dim in [2usize, 5, 8, 13, 16] {
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(&mut rng);
            let rots = decompose_perm(&perm);
            for r in &rots {
                for e in r.m {
                    assert!(e.im == 0.0 && (e.re == 0.0 || e.re.abs() == 1.0));
                }
            }
            // agrees with the dense path entry-for-entry
            let mut dense = CMat::zeros(dim, dim);
            for (c, &r) in perm.iter().enumerate() {
                dense[(r, c)] = ONE;
            }
            let dense_rots = decompose(&dense).unwrap();
            assert_eq!(rots, dense_rots);
            assert!(max_abs(&(reconstruct(&rots, dim) - dense)) == 0.0);
        }
    }

    #[test]
    fn relabeling_permutations_factor_exactly() {
        for (n, d) in [(6u32, 2usize), (4, 3)] {
            let c = build_schur_circuit(n, d);
            for step in &c.steps {
                let rots = decompose_perm(&step.reorder);
                let mut dense = CMat::zeros(step.local_dim, step.local_dim);
                for (src, &tgt) in step.reorder.iter().enumerate() {
                    dense[(tgt, src)] = ONE;
                }
                assert!(max_abs(&(reconstruct(&rots, step.local_dim) - dense)) == 0.0);
            }
        }
    }

    #[test]
    fn qubit_totals_meet_both_bounds_up_to_twenty() {
        for n in 2..=20u32 {
            let report = sequence_length(n, 2);
            assert_eq!(report.total, report.per_iteration.iter().sum::<u64>());
            assert!(
                report.within_analytic_bound(),
                "n={n}: {} > {}",
                report.total,
                report.analytic_bound
            );
            assert!(
                report.within_cubic_envelope(),
                "n={n}: {} > {}",
                report.total,
                report.cubic_envelope
            );
        }
    }

    #[test]
    fn qutrit_totals_meet_the_qudit_bound() {
        for n in 2..=5u32 {
            let report = sequence_length(n, 3);
            assert!(
                report.total as u128 <= qudit_bound(n, 3),
                "n={n}: {} > {}",
                report.total,
                qudit_bound(n, 3)
            );
        }
    }

    #[test]
    fn direct_baseline_overtakes_the_structured_count() {
        let direct_two = direct_decompose_baseline(2, 2).unwrap();
        assert!(direct_two > 0);
        let direct_five = direct_decompose_baseline(5, 2).unwrap();
        assert!(direct_five > sequence_length(5, 2).total);

        // the direct/structured ratio keeps growing from n = 4 on
        let ratios: Vec<(u64, u64)> = (4..=6u32)
            .map(|n| {
                (
                    direct_decompose_baseline(n, 2).unwrap(),
                    sequence_length(n, 2).total,
                )
            })
            .collect();
        for w in ratios.windows(2) {
            let ((d0, s0), (d1, s1)) = (w[0], w[1]);
            assert!(
                (d0 as u128) * (s1 as u128) <= (d1 as u128) * (s0 as u128),
                "ratio decreased: {d0}/{s0} then {d1}/{s1}"
            );
        }
    }

    #[test]
    fn fault_tolerant_estimate_prices_each_rotation() {
        let m = sequence_length(4, 2).total;
        let per = (4.0 * (m as f64 / 1e-3).log2()).ceil() as u64;
        assert_eq!(fault_tolerant_estimate(4, 2, 1e-3), m * per);

        let m3 = sequence_length(3, 3).total;
        let per3 = (3.0 * (m3 as f64 / 1e-2).log2().powf(3.97)).ceil() as u64;
        assert_eq!(fault_tolerant_estimate(3, 3, 1e-2), m3 * per3);
        // the qudit exponent must actually bite
        assert!(per3 > (3.0 * (m3 as f64 / 1e-2).log2()).ceil() as u64);
    }

    #[test]
    fn phase_partner_slot_is_left_untouched() {
        let mut diag = vec![ONE; 4];
        diag[3] = C64::new(0.0, 1.0);
        let rots = phase_rotations(&diag);
        assert_eq!(rots.len(), 1);
        assert_eq!((rots[0].p, rots[0].q), (2, 3));
        let m = reconstruct(&rots, 4);
        assert!(m[(2, 2)] == ONE && m[(3, 3)] == diag[3]);
    }
}

