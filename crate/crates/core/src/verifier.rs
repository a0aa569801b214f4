//! Independent certification of a compiled transform.
//!
//! Everything here is built from first principles — single-site spin
//! generators, site permutations, tensor powers — and never from the
//! circuit builder's own data structures, so agreement is a genuine
//! cross-check. Each check conjugates a brute-force operator on
//! `(C^d)^(x)n` by the compiled basis change and asserts the block
//! structure the Schur basis promises:
//!
//! * total spin (and the quadratic Casimir for general d) becomes diagonal;
//! * a tensor-power unitary becomes block-diagonal, with the block repeated
//!   identically across multiplicity columns;
//! * a site permutation mixes only multiplicity columns, acting identically
//!   on every state inside an irrep;
//! * dimensions and multiplicities add up to the full space exactly.

use std::collections::HashMap;

use crate::cg::spin_of;
use crate::circuit::{OccupiedRow, SchurCircuit};
use crate::combinatorics::{dim_q, multiplicity, partitions};
use crate::linalg::{haar_unitary, kron, max_abs, CMat, C64, ONE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIAG_TOL: f64 = 1e-10;
const EXPANSION_CAP: u128 = 1 << 14;

/// Global spin operators on `(C^2)^(x)n`, with hbar = 1.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub n: u32,
    /// Total spin squared, `(sum_i J_i)^2`.
    pub j_squared: CMat,
    /// Total z-projection, `sum_i J_i^z`.
    pub j_z: CMat,
}

fn single_site_spin() -> [CMat; 3] {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    let z = C64::new(0.0, 0.0);
    [
        CMat::from_row_slice(2, 2, &[z, h, h, z]),
        CMat::from_row_slice(2, 2, &[z, -ih, ih, z]),
        CMat::from_row_slice(2, 2, &[h, z, z, -h]),
    ]
}

/// Embeds a single-site operator at `site` (site 0 most significant).
fn at_site(op: &CMat, site: u32, n: u32, d: usize) -> CMat {
    let left = CMat::identity(d.pow(site), d.pow(site));
    let right = CMat::identity(d.pow(n - site - 1), d.pow(n - site - 1));
    kron(&kron(&left, op), &right)
}

impl SpinOperators {
    pub fn new(n: u32) -> Self {
        assert!(n >= 1);
        let dim = 2usize.pow(n);
        let site_ops = single_site_spin();
        let mut totals = [
            CMat::zeros(dim, dim),
            CMat::zeros(dim, dim),
            CMat::zeros(dim, dim),
        ];
        for site in 0..n {
            for (total, op) in totals.iter_mut().zip(&site_ops) {
                *total += at_site(op, site, n, 2);
            }
        }
        let mut j_squared = CMat::zeros(dim, dim);
        for j in &totals {
            j_squared += j * j;
        }
        SpinOperators {
            n,
            j_squared,
            j_z: totals[2].clone(),
        }
    }

    /// Hermiticity and commutation defects, for the oracle's own sanity.
    pub fn self_test_residual(&self) -> f64 {
        let herm2 = max_abs(&(&self.j_squared - self.j_squared.adjoint()));
        let hermz = max_abs(&(&self.j_z - self.j_z.adjoint()));
        let comm = max_abs(&(&self.j_squared * &self.j_z - &self.j_z * &self.j_squared));
        herm2.max(hermz).max(comm)
    }
}

/// Quadratic Casimir of the diagonal unitary-group action: `sum_{ij}
/// G_ij G_ji` with `G_ij = sum_sites |i><j|`. Diagonal on every irrep with
/// eigenvalue `sum_i lambda_i (lambda_i + d + 1 - 2i)`.
pub fn casimir_operator(n: u32, d: usize) -> CMat {
    let dim = d.pow(n);
    let mut globals = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut unit = CMat::zeros(d, d);
            unit[(i, j)] = ONE;
            let mut g = CMat::zeros(dim, dim);
            for site in 0..n {
                g += at_site(&unit, site, n, d);
            }
            globals.push(g);
        }
    }
    let mut c2 = CMat::zeros(dim, dim);
    for i in 0..d {
        for j in 0..d {
            c2 += &globals[i * d + j] * &globals[j * d + i];
        }
    }
    c2
}

pub fn casimir_eigenvalue(shape: &crate::combinatorics::Partition, d: usize) -> i64 {
    (1..=d)
        .map(|i| {
            let l = shape.part(i - 1) as i64;
            l * (l + d as i64 + 1 - 2 * i as i64)
        })
        .sum()
}

/// The matrix permuting site contents: site `i`'s digit moves to `s[i]`.
pub fn site_permutation_matrix(n: u32, d: usize, s: &[usize]) -> CMat {
    assert_eq!(s.len(), n as usize);
    let dim = d.pow(n);
    let mut m = CMat::zeros(dim, dim);
    for v in 0..dim {
        let mut digits = vec![0usize; n as usize];
        let mut rest = v;
        for i in (0..n as usize).rev() {
            digits[i] = rest % d;
            rest /= d;
        }
        let mut out = 0usize;
        let mut moved = vec![0usize; n as usize];
        for (i, &x) in digits.iter().enumerate() {
            moved[s[i]] = x;
        }
        for &x in &moved {
            out = out * d + x;
        }
        m[(out, v)] = ONE;
    }
    m
}

/// `u` applied to every site at once.
pub fn tensor_power_matrix(u: &CMat, n: u32) -> CMat {
    let mut q = CMat::identity(1, 1);
    for _ in 0..n {
        q = kron(&q, u);
    }
    q
}

/// Outcome of one verifier check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Largest magnitude found where the claimed structure demands zero
    /// (or the largest deviation from a predicted exact value).
    pub max_residual: f64,
    /// Key/value records for rendering.
    pub records: Vec<(String, String)>,
}

/// The compiled transform as a square unitary on the occupied subspace,
/// with every row labeled.
struct TransformedBasis {
    rows: Vec<OccupiedRow>,
    /// Per row: slot index in layout order.
    slot_of: Vec<usize>,
    /// (slot, column, stat) -> row position.
    position: HashMap<(usize, u64, usize), usize>,
    sq: CMat,
}

impl TransformedBasis {
    fn new(circuit: &SchurCircuit) -> Self {
        let expanded = circuit
            .expand_restricted(EXPANSION_CAP)
            .expect("verifier sizes stay under the expansion cap");
        let rows = circuit.occupied_outputs();
        let dense = expanded.to_dense();
        let sq = CMat::from_fn(rows.len(), rows.len(), |r, c| dense[(rows[r].index, c)]);
        let slot_index: HashMap<_, _> = circuit
            .layout
            .slots
            .iter()
            .enumerate()
            .map(|(j, s)| (s.shape.clone(), j))
            .collect();
        let slot_of: Vec<usize> = rows.iter().map(|r| slot_index[&r.shape]).collect();
        let position = rows
            .iter()
            .enumerate()
            .map(|(a, r)| ((slot_of[a], r.column, r.stat), a))
            .collect();
        TransformedBasis {
            rows,
            slot_of,
            position,
            sq,
        }
    }

    fn conjugate(&self, op: &CMat) -> CMat {
        &self.sq * op * self.sq.adjoint()
    }

    /// Occupied multiplicity columns of a slot.
    fn columns(&self, circuit: &SchurCircuit, slot: usize) -> Vec<u64> {
        circuit
            .labeling
            .occupied(&circuit.layout.slots[slot].shape)
            .iter()
            .map(|(c, _)| *c)
            .collect()
    }
}

/// Conjugates the global spin operators and demands exact diagonal
/// structure: eigenvalue `j(j+1)` on every row of a spin-`j` slot (with the
/// right multiplicities) and `j - stat` for the z-projection.
pub fn check_spin_diagonalization(circuit: &SchurCircuit) -> CheckReport {
    assert_eq!(circuit.d, 2, "spin operators act on qubit sites");
    let basis = TransformedBasis::new(circuit);
    let spin = SpinOperators::new(circuit.n);
    let t2 = basis.conjugate(&spin.j_squared);
    let tz = basis.conjugate(&spin.j_z);

    let mut resid: f64 = 0.0;
    let dim = basis.rows.len();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                resid = resid.max(t2[(a, b)].norm()).max(tz[(a, b)].norm());
            }
        }
    }
    for (a, row) in basis.rows.iter().enumerate() {
        let j = spin_of(&row.shape).as_f64();
        let m = j - row.stat as f64;
        resid = resid.max((t2[(a, a)] - C64::new(j * (j + 1.0), 0.0)).norm());
        resid = resid.max((tz[(a, a)] - C64::new(m, 0.0)).norm());
    }

    let mut records = Vec::new();
    let mut counts_ok = true;
    for slot in &circuit.layout.slots {
        let j = spin_of(&slot.shape);
        let eig = j.as_f64() * (j.as_f64() + 1.0);
        let measured = (0..dim)
            .filter(|&a| (t2[(a, a)].re - eig).abs() < 1e-8)
            .count() as u64;
        let expected = (j.twice() + 1) as u64 * multiplicity(&slot.shape);
        counts_ok &= measured == expected;
        records.push((
            format!("j={j}"),
            format!("eigenvalue {eig} multiplicity {measured} (expected {expected})"),
        ));
    }

    CheckReport {
        name: "spin-diagonalization",
        passed: resid <= DIAG_TOL && counts_ok,
        max_residual: resid,
        records,
    }
}

/// The general-d analogue of the spin check: the quadratic Casimir must
/// come out diagonal with the closed-form eigenvalue of each slot.
pub fn check_casimir_diagonalization(circuit: &SchurCircuit) -> CheckReport {
    let basis = TransformedBasis::new(circuit);
    let c2 = basis.conjugate(&casimir_operator(circuit.n, circuit.d));

    let mut resid: f64 = 0.0;
    let dim = basis.rows.len();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                resid = resid.max(c2[(a, b)].norm());
            }
        }
    }
    let mut records = Vec::new();
    for (a, row) in basis.rows.iter().enumerate() {
        let eig = casimir_eigenvalue(&row.shape, circuit.d) as f64;
        resid = resid.max((c2[(a, a)] - C64::new(eig, 0.0)).norm());
        if row.column == 0 && row.stat == 0 {
            records.push((format!("{}", row.shape), format!("casimir {eig}")));
        }
    }

    CheckReport {
        name: "casimir-diagonalization",
        passed: resid <= DIAG_TOL,
        max_residual: resid,
        records,
    }
}

/// Conjugates `samples` seeded Haar unitaries applied to every site and
/// demands block-diagonality over (slot, column) with the slot's block
/// repeated identically on every occupied column.
pub fn check_unitary_rep_blocks(circuit: &SchurCircuit, samples: usize) -> CheckReport {
    let basis = TransformedBasis::new(circuit);
    let dim = basis.rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c5a);
    let mut resid: f64 = 0.0;

    for _ in 0..samples {
        let u = haar_unitary(circuit.d, &mut rng);
        let w = basis.conjugate(&tensor_power_matrix(&u, circuit.n));
        for a in 0..dim {
            for b in 0..dim {
                let same_block = basis.slot_of[a] == basis.slot_of[b]
                    && basis.rows[a].column == basis.rows[b].column;
                if !same_block {
                    resid = resid.max(w[(a, b)].norm());
                }
            }
        }
        for (slot, info) in circuit.layout.slots.iter().enumerate() {
            let cols = basis.columns(circuit, slot);
            let block = |col: u64, s: usize, t: usize| {
                w[(
                    basis.position[&(slot, col, s)],
                    basis.position[&(slot, col, t)],
                )]
            };
            for &col in &cols[1..] {
                for s in 0..info.dim_q {
                    for t in 0..info.dim_q {
                        resid = resid.max((block(col, s, t) - block(cols[0], s, t)).norm());
                    }
                }
            }
        }
    }

    CheckReport {
        name: "unitary-rep-blocks",
        passed: resid <= DIAG_TOL,
        max_residual: resid,
        records: vec![("samples".into(), samples.to_string())],
    }
}

/// Conjugates every adjacent site transposition and demands that it
/// preserve (slot, stat) — mixing only multiplicity columns — with the
/// mixing matrix independent of the stat index.
pub fn check_symmetric_rep_blocks(circuit: &SchurCircuit) -> CheckReport {
    let basis = TransformedBasis::new(circuit);
    let dim = basis.rows.len();
    let n = circuit.n as usize;
    let mut resid: f64 = 0.0;

    for i in 0..n.saturating_sub(1) {
        let mut s: Vec<usize> = (0..n).collect();
        s.swap(i, i + 1);
        let w = basis.conjugate(&site_permutation_matrix(circuit.n, circuit.d, &s));
        for a in 0..dim {
            for b in 0..dim {
                let same_sector = basis.slot_of[a] == basis.slot_of[b]
                    && basis.rows[a].stat == basis.rows[b].stat;
                if !same_sector {
                    resid = resid.max(w[(a, b)].norm());
                }
            }
        }
        for (slot, info) in circuit.layout.slots.iter().enumerate() {
            let cols = basis.columns(circuit, slot);
            let mixing = |s_idx: usize, ca: u64, cb: u64| {
                w[(
                    basis.position[&(slot, ca, s_idx)],
                    basis.position[&(slot, cb, s_idx)],
                )]
            };
            for &ca in &cols {
                for &cb in &cols {
                    for s_idx in 1..info.dim_q {
                        resid = resid.max((mixing(s_idx, ca, cb) - mixing(0, ca, cb)).norm());
                    }
                }
            }
        }
    }

    CheckReport {
        name: "symmetric-rep-blocks",
        passed: resid <= DIAG_TOL,
        max_residual: resid,
        records: vec![("transpositions".into(), n.saturating_sub(1).to_string())],
    }
}

/// Exact integer accounting: multiplicities times dimensions fill the whole
/// space.
pub fn check_completeness(n: u32, d: usize) -> CheckReport {
    assert!(n <= 10);
    let mut records = Vec::new();
    let mut sum: u128 = 0;
    for shape in partitions(n, d) {
        let m = multiplicity(&shape) as u128;
        let q = dim_q(&shape, d) as u128;
        sum += m * q;
        records.push((
            format!("{shape}"),
            format!("dim_q={q} multiplicity={m} summand={}", m * q),
        ));
    }
    let expected = (d as u128).pow(n);
    records.push(("total".into(), format!("{sum} (expected {expected})")));
    CheckReport {
        name: "completeness",
        passed: sum == expected,
        max_residual: if sum == expected { 0.0 } else { f64::INFINITY },
        records,
    }
}

/// The full certification suite for one circuit. The spin check runs for
/// qubit sites; higher local dimensions get the Casimir analogue.
pub fn run_all(circuit: &SchurCircuit, samples: usize) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    if circuit.d == 2 {
        reports.push(check_spin_diagonalization(circuit));
    } else {
        reports.push(check_casimir_diagonalization(circuit));
    }
    reports.push(check_unitary_rep_blocks(circuit, samples));
    reports.push(check_symmetric_rep_blocks(circuit));
    reports.push(check_completeness(circuit.n, circuit.d));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_schur_circuit;
    use rand::seq::SliceRandom;

    const SELF_TEST_TOL: f64 = 1e-12;

    #[test]
    fn spin_oracle_is_hermitian_and_commuting() {
        for n in 1..=5 {
            assert!(SpinOperators::new(n).self_test_residual() < SELF_TEST_TOL);
        }
    }

    #[test]
    fn site_permutation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 4u32;
        for _ in 0..5 {
            let mut s1: Vec<usize> = (0..4).collect();
            let mut s2: Vec<usize> = (0..4).collect();
            s1.shuffle(&mut rng);
            s2.shuffle(&mut rng);
            // composite: first s2 moves i to s2[i], then s1 moves that
            let comp: Vec<usize> = (0..4).map(|i| s1[s2[i]]).collect();
            let p = site_permutation_matrix(n, 2, &s1) * site_permutation_matrix(n, 2, &s2);
            let q = site_permutation_matrix(n, 2, &comp);
            assert!(max_abs(&(p - q)) < SELF_TEST_TOL);
        }
    }

    #[test]
    fn two_qubit_spin_spectrum_is_triplet_and_singlet() {
        let c = build_schur_circuit(2, 2);
        let report = check_spin_diagonalization(&c);
        assert!(report.passed, "residual {}", report.max_residual);

        let basis = TransformedBasis::new(&c);
        let t2 = basis.conjugate(&SpinOperators::new(2).j_squared);
        let diag: Vec<f64> = (0..4).map(|a| t2[(a, a)].re).collect();
        for (got, want) in diag.iter().zip([2.0, 2.0, 2.0, 0.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        let tz = basis.conjugate(&SpinOperators::new(2).j_z);
        let diag_z: Vec<f64> = (0..4).map(|a| tz[(a, a)].re).collect();
        for (got, want) in diag_z.iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn three_qubit_multiplicities_split_four_four() {
        let c = build_schur_circuit(3, 2);
        let report = check_spin_diagonalization(&c);
        assert!(report.passed);
        // j=3/2: 4 states x 1 copy; j=1/2: 2 states x 2 copies
        let find = |key: &str| {
            report
                .records
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .unwrap()
        };
        assert!(find("j=3/2").contains("multiplicity 4 (expected 4)"));
        assert!(find("j=1/2").contains("multiplicity 4 (expected 4)"));
    }

    #[test]
    fn spin_check_passes_through_six_qubits() {
        for n in 2..=6 {
            let c = build_schur_circuit(n, 2);
            let report = check_spin_diagonalization(&c);
            assert!(report.passed, "n={n} residual {}", report.max_residual);
        }
    }

    #[test]
    fn casimir_matches_spin_on_qubits_and_passes_on_qutrits() {
        // on qubit irreps C2 = 2 j(j+1) + n^2/2
        for n in 2..=4u32 {
            let c = build_schur_circuit(n, 2);
            for slot in &c.layout.slots {
                let j = spin_of(&slot.shape).as_f64();
                let expect = 2.0 * j * (j + 1.0) + (n * n) as f64 / 2.0;
                assert_eq!(casimir_eigenvalue(&slot.shape, 2) as f64, expect);
            }
            assert!(check_casimir_diagonalization(&c).passed);
        }
        for n in 2..=3 {
            let c = build_schur_circuit(n, 3);
            let report = check_casimir_diagonalization(&c);
            assert!(report.passed, "n={n} residual {}", report.max_residual);
        }
    }

    #[test]
    fn diagonal_unitary_gives_weight_phases_on_the_pair() {
        let c = build_schur_circuit(2, 2);
        assert!(check_unitary_rep_blocks(&c, 10).passed);

        let theta = 0.7f64;
        let u = CMat::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(1.0, theta),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                ONE,
            ],
        );
        let basis = TransformedBasis::new(&c);
        let w = basis.conjugate(&tensor_power_matrix(&u, 2));
        let phases = [2.0 * theta, theta, 0.0, theta];
        for (a, want) in phases.iter().enumerate() {
            assert!((w[(a, a)] - C64::from_polar(1.0, *want)).norm() < 1e-10);
            for b in 0..4 {
                if a != b {
                    assert!(w[(a, b)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn swapping_the_qubit_pair_flips_only_the_singlet() {
        let c = build_schur_circuit(2, 2);
        assert!(check_symmetric_rep_blocks(&c).passed);

        let basis = TransformedBasis::new(&c);
        let w = basis.conjugate(&site_permutation_matrix(2, 2, &[1, 0]));
        for (a, want) in [1.0, 1.0, 1.0, -1.0].iter().enumerate() {
            assert!((w[(a, a)] - C64::new(*want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn rep_block_checks_pass_on_small_circuits() {
        for (n, d) in [(3u32, 2usize), (4, 2), (5, 2), (2, 3), (3, 3)] {
            let c = build_schur_circuit(n, d);
            let unit = check_unitary_rep_blocks(&c, 5);
            assert!(unit.passed, "unitary n={n} d={d}: {}", unit.max_residual);
            let sym = check_symmetric_rep_blocks(&c);
            assert!(sym.passed, "symmetric n={n} d={d}: {}", sym.max_residual);
        }
    }

    #[test]
    fn completeness_counts_exactly() {
        let four = check_completeness(4, 2);
        assert!(four.passed);
        let summands: Vec<&str> = four
            .records
            .iter()
            .filter(|(k, _)| k != "total")
            .map(|(_, v)| v.as_str())
            .collect();
        assert_eq!(summands.len(), 3);
        assert!(summands[0].contains("dim_q=5 multiplicity=1"));
        assert!(summands[1].contains("dim_q=3 multiplicity=3"));
        assert!(summands[2].contains("dim_q=1 multiplicity=2"));

        assert!(check_completeness(1, 5).passed);
        assert!(check_completeness(6, 3).passed);
        for n in 1..=10 {
            assert!(check_completeness(n, 2).passed);
            assert!(check_completeness(n, 3).passed);
        }
    }

    #[test]
    fn full_suite_passes_on_representative_circuits() {
        for (n, d) in [(4u32, 2usize), (3, 3)] {
            for report in run_all(&build_schur_circuit(n, d), 5) {
                assert!(
                    report.passed,
                    "{} failed at n={n} d={d} with residual {}",
                    report.name, report.max_residual
                );
            }
        }
    }
}
