//! Partitions, Young tableaux, and the counting functions attached to them:
//!
//! * [`partitions`] enumerates partitions of `n` with bounded depth in the
//!   slot order used throughout the register layout (most symmetric first).
//! * [`dim_q`] gives the dimension of the unitary-group irrep `Q_lambda^d`
//!   by exact hook-content arithmetic.
//! * [`multiplicity`] gives the number of standard tableaux (the dimension
//!   of the symmetric-group irrep) by exact hook-length arithmetic.
//! * [`standard_tableaux`] / [`semistandard_tableaux`] enumerate fillings by
//!   brute force and act as the independent oracle for both formulas.
//!
//! All counting here is integer exact; floating point never enters.

use std::cmp::Ordering;
use std::fmt;

/// Integer partition with weakly decreasing positive parts.
///
/// Trailing zeros are stripped on construction, so `(4, 0)` and `(4)` are the
/// same value. The empty partition (weight 0) is allowed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from `parts`, stripping trailing zeros.
    ///
    /// Panics if the parts increase anywhere; callers pass literals or values
    /// already known to be sorted.
    pub fn new(parts: &[u32]) -> Self {
        let mut v: Vec<u32> = parts.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        assert!(
            v.windows(2).all(|w| w[0] >= w[1]),
            "partition parts must be weakly decreasing: {parts:?}"
        );
        assert!(v.iter().all(|&p| p > 0), "zero part before a positive part");
        Partition { parts: v }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts (number of rows of the diagram).
    pub fn degree(&self) -> usize {
        self.parts.len()
    }

    /// Row `i` (0-based), zero beyond the last row.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Adds one box at the end of row `j` (0-based) if the result is still a
    /// partition, respecting the depth bound `max_degree`.
    pub fn add_box(&self, j: usize, max_degree: usize) -> Option<Partition> {
        if j >= max_degree {
            return None;
        }
        if j > self.degree() {
            return None;
        }
        if j > 0 && self.part(j) + 1 > self.part(j - 1) {
            return None;
        }
        let mut parts = self.parts.clone();
        if j == parts.len() {
            parts.push(1);
        } else {
            parts[j] += 1;
        }
        Some(Partition { parts })
    }

    /// Removes one box from the end of row `j` (0-based) if the result is
    /// still a partition.
    pub fn remove_box(&self, j: usize) -> Option<Partition> {
        if j >= self.degree() {
            return None;
        }
        if self.part(j) <= self.part(j + 1) {
            return None;
        }
        let mut parts = self.parts.clone();
        parts[j] -= 1;
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Some(Partition { parts })
    }

    /// Conjugate partition (columns become rows).
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(0) as usize;
        let mut parts = Vec::with_capacity(cols);
        for j in 0..cols {
            parts.push(self.parts.iter().filter(|&&p| p as usize > j).count() as u32);
        }
        Partition { parts }
    }

    /// Renders the partition padded with explicit zeros up to `width` rows,
    /// e.g. `(4,0)` for presentation next to other weight-4 labels.
    pub fn padded(&self, width: usize) -> String {
        let mut out = String::from("(");
        for i in 0..width.max(self.degree()) {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&self.part(i).to_string());
        }
        out.push(')');
        out
    }
}

/// `Ord` follows the slot ordering of the register layout: partitions of the
/// same weight sort most-symmetric first, i.e. lexicographically descending
/// on the (zero padded) parts.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        let rows = self.degree().max(other.degree());
        for i in 0..rows {
            match other.part(i).cmp(&self.part(i)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `n` with at most `max_degree` rows, in slot order.
pub fn partitions(n: u32, max_degree: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut acc = Vec::new();
    gen_partitions(n, n, max_degree, &mut acc, &mut out);
    out
}

fn gen_partitions(remaining: u32, max_part: u32, rows_left: usize, acc: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition { parts: acc.clone() });
        return;
    }
    if rows_left == 0 {
        return;
    }
    let hi = max_part.min(remaining);
    let lo = remaining.div_ceil(rows_left as u32);
    let mut p = hi;
    while p >= lo {
        acc.push(p);
        gen_partitions(remaining - p, p, rows_left - 1, acc, out);
        acc.pop();
        if p == 0 {
            break;
        }
        p -= 1;
    }
}

fn hook_lengths(shape: &Partition) -> Vec<u64> {
    let conj = shape.conjugate();
    let mut hooks = Vec::new();
    for i in 0..shape.degree() {
        for j in 0..shape.part(i) as usize {
            let arm = shape.part(i) as u64 - j as u64 - 1;
            let leg = conj.part(j) as u64 - i as u64 - 1;
            hooks.push(arm + leg + 1);
        }
    }
    hooks
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Dimension of the unitary-group irrep `Q_lambda^d`: the number of
/// semistandard fillings of the diagram with entries in `1..=d`.
///
/// Computed by the hook-content product `prod (d + col - row) / hook`, which
/// is exact in integers. Returns 0 when the diagram is deeper than `d`.
pub fn dim_q(shape: &Partition, d: usize) -> u64 {
    if shape.degree() > d {
        return 0;
    }
    if shape.weight() == 0 {
        return 1;
    }
    let hooks = hook_lengths(shape);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    let mut cell = 0;
    for i in 0..shape.degree() {
        for j in 0..shape.part(i) as usize {
            // content j - i is > -d here because the diagram fits in d rows
            num *= (d as i64 + j as i64 - i as i64) as u128;
            den *= hooks[cell] as u128;
            let g = gcd(num, den);
            num /= g;
            den /= g;
            cell += 1;
        }
    }
    assert_eq!(den, 1, "hook-content product must be integral");
    u64::try_from(num).expect("dimension fits in u64")
}

/// Number of standard tableaux of the given shape: `n! / prod(hooks)`,
/// exact in integers. This is the multiplicity of `Q_lambda^d` inside the
/// n-fold tensor power.
pub fn multiplicity(shape: &Partition) -> u64 {
    let n = shape.weight() as u128;
    if n == 0 {
        return 1;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    let hooks = hook_lengths(shape);
    for (f, h) in (1..=n).zip(hooks.iter().map(|&h| h as u128)) {
        num *= f;
        den *= h;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    assert_eq!(den, 1, "hook-length product must divide n!");
    u64::try_from(num).expect("multiplicity fits in u64")
}

/// A filling of a Young diagram, one `Vec` per row.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Tableau {
    rows: Vec<Vec<u32>>,
}

impl Tableau {
    pub fn new(rows: Vec<Vec<u32>>) -> Self {
        Tableau { rows }
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn shape(&self) -> Partition {
        Partition::new(&self.rows.iter().map(|r| r.len() as u32).collect::<Vec<_>>())
    }

    /// Entries `1..=n` each once, rows and columns strictly increasing.
    pub fn is_standard(&self) -> bool {
        let n = self.rows.iter().map(|r| r.len()).sum::<usize>() as u32;
        let mut seen = vec![false; n as usize + 1];
        for r in &self.rows {
            for &e in r {
                if e == 0 || e > n || seen[e as usize] {
                    return false;
                }
                seen[e as usize] = true;
            }
        }
        self.rows_weak(false) && self.cols_strict()
    }

    /// Rows weakly increasing, columns strictly increasing, entries `<= max`.
    pub fn is_semistandard(&self, max: u32) -> bool {
        if self.rows.iter().flatten().any(|&e| e == 0 || e > max) {
            return false;
        }
        self.rows_weak(true) && self.cols_strict()
    }

    fn rows_weak(&self, allow_equal: bool) -> bool {
        self.rows.iter().all(|r| {
            r.windows(2)
                .all(|w| if allow_equal { w[0] <= w[1] } else { w[0] < w[1] })
        })
    }

    fn cols_strict(&self) -> bool {
        for i in 1..self.rows.len() {
            for j in 0..self.rows[i].len() {
                if self.rows[i - 1][j] >= self.rows[i][j] {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            for (j, e) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

/// All standard tableaux of `shape`, by direct recursive filling.
///
/// Entry `t` is placed in every row that still has room and whose previous
/// row is already strictly longer, so every branch yields a valid tableau.
pub fn standard_tableaux(shape: &Partition) -> Vec<Tableau> {
    let n = shape.weight();
    let mut fill: Vec<Vec<u32>> = (0..shape.degree()).map(|_| Vec::new()).collect();
    let mut out = Vec::new();
    fill_standard(shape, n, 1, &mut fill, &mut out);
    out
}

fn fill_standard(shape: &Partition, n: u32, next: u32, fill: &mut Vec<Vec<u32>>, out: &mut Vec<Tableau>) {
    if next > n {
        out.push(Tableau { rows: fill.clone() });
        return;
    }
    for i in 0..shape.degree() {
        let len = fill[i].len();
        if len as u32 >= shape.part(i) {
            continue;
        }
        if i > 0 && fill[i - 1].len() <= len {
            continue;
        }
        fill[i].push(next);
        fill_standard(shape, n, next + 1, fill, out);
        fill[i].pop();
    }
}

/// All semistandard tableaux of `shape` with entries in `1..=d`, by direct
/// cell-by-cell filling.
pub fn semistandard_tableaux(shape: &Partition, d: usize) -> Vec<Tableau> {
    let mut fill: Vec<Vec<u32>> = (0..shape.degree()).map(|_| Vec::new()).collect();
    let mut out = Vec::new();
    fill_semistandard(shape, d as u32, 0, &mut fill, &mut out);
    out
}

fn fill_semistandard(shape: &Partition, d: u32, row: usize, fill: &mut Vec<Vec<u32>>, out: &mut Vec<Tableau>) {
    if row == shape.degree() {
        out.push(Tableau { rows: fill.clone() });
        return;
    }
    let col = fill[row].len();
    if col as u32 == shape.part(row) {
        fill_semistandard(shape, d, row + 1, fill, out);
        return;
    }
    let mut lo = 1;
    if col > 0 {
        lo = lo.max(fill[row][col - 1]);
    }
    if row > 0 {
        lo = lo.max(fill[row - 1][col] + 1);
    }
    for e in lo..=d {
        fill[row].push(e);
        fill_semistandard(shape, d, row, fill, out);
        fill[row].pop();
    }
}
