//! Register layout of the reduced basis.
//!
//! After `n` sites are reduced, a basis state is a triple written in base-d
//! digits, most significant first:
//!
//! * `seq`  - multiplicity column, `max(n-2, 0)` digits, recording which
//!   branch was taken at every coupling step;
//! * `par`  - partition slot, enough digits to index the partitions of `n`
//!   with at most `d` rows, in slot order (most symmetric first);
//! * `stat` - state inside the unitary-group irrep, enough digits for the
//!   largest irrep dimension.
//!
//! Because digit counts are rounded up to whole powers of `d`, and because
//! branch ranks are packed positionally, not every index is used: the
//! occupied multiplicity columns of a slot form a sparse, strictly
//! increasing set. [`MultiplicityLabeling`] replays the branching schedule
//! symbolically to list those columns, pairing each with the standard
//! tableau that names the same copy of the irrep.

use std::collections::BTreeMap;

use crate::combinatorics::{dim_q, multiplicity, partitions, Partition, Tableau};
use crate::error::{Result, SchurError};

/// One partition slot of the final layout.
#[derive(Clone, Debug)]
pub struct SlotInfo {
    pub shape: Partition,
    /// Dimension of the unitary-group irrep carried in the `stat` digits.
    pub dim_q: usize,
    /// Number of occupied multiplicity columns.
    pub multiplicity: u64,
}

/// Digit layout of the reduced register for given `n` and `d`.
#[derive(Clone, Debug)]
pub struct BasisLayout {
    pub n: u32,
    pub d: usize,
    pub seq_size: usize,
    pub par_size: usize,
    pub stat_size: usize,
    pub slots: Vec<SlotInfo>,
}

/// Smallest `e` with `d^e >= x`.
fn ceil_log(x: u64, d: usize) -> usize {
    let mut e = 0;
    let mut cap = 1u64;
    while cap < x {
        cap = cap.saturating_mul(d as u64);
        e += 1;
    }
    e
}

fn pow_u128(d: usize, e: usize) -> u128 {
    (d as u128).pow(e as u32)
}

/// Digit sizes of the non-sequence part after `k` sites are reduced.
fn par_stat_sizes(k: u32, d: usize) -> (usize, usize) {
    let shapes = partitions(k, d);
    let par = ceil_log(shapes.len() as u64, d);
    let max_dim = shapes.iter().map(|s| dim_q(s, d)).max().unwrap_or(1);
    let stat = ceil_log(max_dim, d);
    (par, stat)
}

/// Seq digits consumed by coupling step `k` (the step that brings in site
/// `k+1`): the first step has a unique source, all later steps reserve one
/// digit for the branch rank.
pub fn seq_growth(k: u32) -> usize {
    usize::from(k >= 2)
}

pub fn layout_for(n: u32, d: usize) -> BasisLayout {
    assert!(n >= 1 && d >= 2);
    let (par_size, stat_size) = par_stat_sizes(n, d);
    let slots = partitions(n, d)
        .into_iter()
        .map(|shape| {
            let dim = dim_q(&shape, d) as usize;
            let mult = multiplicity(&shape);
            SlotInfo {
                shape,
                dim_q: dim,
                multiplicity: mult,
            }
        })
        .collect();
    BasisLayout {
        n,
        d,
        seq_size: (1..n).map(seq_growth).sum(),
        par_size,
        stat_size,
        slots,
    }
}

impl BasisLayout {
    pub fn total_digits(&self) -> usize {
        self.seq_size + self.par_size + self.stat_size
    }

    /// Full register dimension `d^total`.
    pub fn dimension(&self) -> u128 {
        pow_u128(self.d, self.total_digits())
    }

    /// Stride of one multiplicity column: `d^(par + stat)`.
    pub fn column_capacity(&self) -> u128 {
        pow_u128(self.d, self.par_size + self.stat_size)
    }

    pub fn slot_index(&self, shape: &Partition) -> Option<usize> {
        self.slots.iter().position(|s| &s.shape == shape)
    }

    /// Register index of a label: `(i-1) d^(par+stat) + (j-1) d^stat + (k-1)`.
    pub fn encode(&self, label: &SchurLabel) -> Result<u128> {
        self.validate(label)?;
        Ok((label.seq - 1) * self.column_capacity()
            + (label.slot as u128 - 1) * pow_u128(self.d, self.stat_size)
            + (label.stat as u128 - 1))
    }

    pub fn decode(&self, index: u128) -> Result<SchurLabel> {
        if index >= self.dimension() {
            return Err(SchurError::LabelOutOfRange {
                reason: format!("index {index} exceeds register dimension"),
            });
        }
        let stat_cap = pow_u128(self.d, self.stat_size);
        let label = SchurLabel {
            seq: index / self.column_capacity() + 1,
            slot: ((index % self.column_capacity()) / stat_cap) as usize + 1,
            stat: (index % stat_cap) as usize + 1,
        };
        self.validate(&label)?;
        Ok(label)
    }

    fn validate(&self, label: &SchurLabel) -> Result<()> {
        let seq_cap = pow_u128(self.d, self.seq_size);
        if label.seq == 0 || label.seq > seq_cap {
            return Err(SchurError::LabelOutOfRange {
                reason: format!("seq index {} outside 1..={seq_cap}", label.seq),
            });
        }
        if label.slot == 0 || label.slot > self.slots.len() {
            return Err(SchurError::LabelOutOfRange {
                reason: format!(
                    "slot index {} outside 1..={}",
                    label.slot,
                    self.slots.len()
                ),
            });
        }
        let dim = self.slots[label.slot - 1].dim_q;
        if label.stat == 0 || label.stat > dim {
            return Err(SchurError::LabelOutOfRange {
                reason: format!(
                    "state index {} outside 1..={dim} for slot {}",
                    label.stat,
                    self.slots[label.slot - 1].shape
                ),
            });
        }
        Ok(())
    }

    pub fn shape_of(&self, label: &SchurLabel) -> &Partition {
        &self.slots[label.slot - 1].shape
    }
}

/// Decoded basis label; all three components are 1-based. `seq` counts raw
/// multiplicity columns, occupied or not.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SchurLabel {
    pub seq: u128,
    pub slot: usize,
    pub stat: usize,
}

/// Digit accounting for one coupling step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationDims {
    /// Sites already reduced before the step; the step consumes site `k+1`.
    pub k: u32,
    /// Fresh ancilla digits brought in by this step.
    pub ancilla_digits: usize,
    /// Seq digits produced by this step.
    pub seq_growth: usize,
    /// Column capacity `d^(par+stat)` before the step.
    pub col_before: usize,
    /// Column capacity after the step.
    pub col_after: usize,
    /// State capacity `d^stat` before the step.
    pub stat_cap_before: usize,
    /// State capacity after the step.
    pub stat_cap_after: usize,
}

/// Per-step digit schedule for reducing `n` sites.
///
/// Conservation fixes the ancilla count: the local space of a step holds the
/// old column, the new site, and the ancillas, and is re-read as the new
/// column plus the branch digits, so
/// `col_before * d * d^ancilla = col_after * d^seq_growth`.
pub fn iteration_dims(n: u32, d: usize) -> Vec<IterationDims> {
    (1..n)
        .map(|k| {
            let (p0, s0) = par_stat_sizes(k, d);
            let (p1, s1) = par_stat_sizes(k + 1, d);
            let growth = seq_growth(k);
            let ancilla = (p1 + s1) - (p0 + s0) + growth - 1;
            IterationDims {
                k,
                ancilla_digits: ancilla,
                seq_growth: growth,
                col_before: d.pow((p0 + s0) as u32),
                col_after: d.pow((p1 + s1) as u32),
                stat_cap_before: d.pow(s0 as u32),
                stat_cap_after: d.pow(s1 as u32),
            }
        })
        .collect()
}

/// `(k, ancilla digits)` pairs of the schedule.
pub fn ancilla_schedule(n: u32, d: usize) -> Vec<(u32, usize)> {
    iteration_dims(n, d)
        .into_iter()
        .map(|it| (it.k, it.ancilla_digits))
        .collect()
}

/// Shapes one box smaller that can grow into `shape`, in slot order. The
/// position of a source in this list is its branch rank, which is the digit
/// recorded in the multiplicity column when the branch is taken.
pub fn valid_sources(shape: &Partition, d: usize) -> Vec<Partition> {
    let _ = d; // sources of a legal shape are legal for the same d
    let mut v: Vec<Partition> = (0..shape.degree())
        .filter_map(|j| shape.remove_box(j))
        .collect();
    v.sort();
    v
}

pub fn branch_rank(shape: &Partition, source: &Partition, d: usize) -> Option<usize> {
    valid_sources(shape, d).iter().position(|s| s == source)
}

/// Occupied multiplicity columns of every slot, each paired with the
/// standard tableau naming that copy of the irrep (the tableau records at
/// which row each site's box was added).
#[derive(Clone, Debug)]
pub struct MultiplicityLabeling {
    pub n: u32,
    pub d: usize,
    map: BTreeMap<Partition, Vec<(u64, Tableau)>>,
}

pub fn multiplicity_labeling(n: u32, d: usize) -> MultiplicityLabeling {
    assert!(n >= 1 && d >= 2);
    let mut level: BTreeMap<Partition, Vec<(u64, Tableau)>> = BTreeMap::new();
    level.insert(
        Partition::new(&[1]),
        vec![(0, Tableau::new(vec![vec![1]]))],
    );
    for k in 1..n {
        let b = (d as u64).pow(seq_growth(k) as u32);
        let mut next: BTreeMap<Partition, Vec<(u64, Tableau)>> = BTreeMap::new();
        for target in partitions(k + 1, d) {
            let mut entries = Vec::new();
            for (rank, source) in valid_sources(&target, d).iter().enumerate() {
                let row = (0..target.degree())
                    .find(|&j| source.add_box(j, d).as_ref() == Some(&target))
                    .expect("source grows into target");
                for (col, tab) in &level[source] {
                    let mut rows = tab.rows().to_vec();
                    if row == rows.len() {
                        rows.push(Vec::new());
                    }
                    rows[row].push(k + 1);
                    entries.push((col * b + rank as u64, Tableau::new(rows)));
                }
            }
            entries.sort_by_key(|e| e.0);
            next.insert(target, entries);
        }
        level = next;
    }
    MultiplicityLabeling { n, d, map: level }
}

impl MultiplicityLabeling {
    /// `(column, tableau)` pairs of a slot, columns strictly increasing.
    pub fn occupied(&self, shape: &Partition) -> &[(u64, Tableau)] {
        self.map.get(shape).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn shapes(&self) -> impl Iterator<Item = &Partition> {
        self.map.keys()
    }
}
