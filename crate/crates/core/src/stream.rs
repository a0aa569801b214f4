//! Plain-text gate stream: serialization of a compiled transform.
//!
//! The format is line-delimited and fully deterministic: a header block
//! describing the register (digit budget, slot map, multiplicity labels,
//! coupling-step shapes), then one `rot` record per two-level rotation in
//! application order. Floats are printed with 17 significant digits so the
//! file round-trips doubles exactly and identical inputs produce identical
//! bytes.
//!
//! Rotations flagged as replicated are stored once; the loader re-expands
//! them over every seq column (and over the digits later steps insert) when
//! replaying. Replay needs only header data — it re-derives the index
//! arithmetic from the recorded step table rather than trusting the
//! builder — so a successful replay genuinely certifies the file.

use std::fmt::Write as _;

use crate::circuit::SchurCircuit;
use crate::error::{Result, SchurError};
use crate::linalg::{CMat, C64};
use crate::twolevel::{step_rotations, TwoLevelRotation};

pub const FORMAT_VERSION: u32 = 1;

/// One coupling step as recorded in the header: everything the replayer
/// needs to lift that step's rotations onto the full register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamStep {
    pub k: u32,
    /// Dimension of the local space the step's rotations index into.
    pub local: usize,
    /// Seq columns present when the step runs.
    pub reps: u64,
    /// Fresh ancilla digits the step brings in.
    pub anc_digits: usize,
    /// Column capacity before the step.
    pub col_before: usize,
}

/// A parsed gate-stream file.
#[derive(Clone, Debug)]
pub struct StreamFile {
    pub n: u32,
    pub d: usize,
    pub par: usize,
    pub stat: usize,
    pub seq: usize,
    pub register: u128,
    pub ancillas: usize,
    /// `(shape text, irrep dimension, multiplicity)` in slot order.
    pub slots: Vec<(String, usize, u64)>,
    /// `(shape text, multiplicity column, tableau text)`.
    pub labels: Vec<(String, u64, String)>,
    pub steps: Vec<StreamStep>,
    /// Application order, first applied first.
    pub rotations: Vec<TwoLevelRotation>,
}

/// Renders a circuit as a gate-stream file.
pub fn render_stream(circuit: &SchurCircuit) -> String {
    let lay = &circuit.layout;
    let mut s = String::new();
    writeln!(s, "schurstream {FORMAT_VERSION}").unwrap();
    writeln!(s, "n {} d {}", circuit.n, circuit.d).unwrap();
    writeln!(
        s,
        "digits par {} stat {} seq {}",
        lay.par_size, lay.stat_size, lay.seq_size
    )
    .unwrap();
    writeln!(s, "register {}", lay.dimension()).unwrap();
    writeln!(s, "ancillas {}", lay.total_digits() - circuit.n as usize).unwrap();

    writeln!(s, "slots {}", lay.slots.len()).unwrap();
    for slot in &lay.slots {
        writeln!(s, "slot {} dim {} mult {}", slot.shape, slot.dim_q, slot.multiplicity).unwrap();
    }

    let label_count: usize = circuit
        .labeling
        .shapes()
        .map(|shape| circuit.labeling.occupied(shape).len())
        .sum();
    writeln!(s, "labels {label_count}").unwrap();
    for shape in circuit.labeling.shapes() {
        for (col, tableau) in circuit.labeling.occupied(shape) {
            writeln!(s, "label {shape} {col} {tableau}").unwrap();
        }
    }

    writeln!(s, "steps {}", circuit.steps.len()).unwrap();
    for step in &circuit.steps {
        writeln!(
            s,
            "step {} local {} reps {} anc {} col {}",
            step.dims.k,
            step.local_dim,
            step.reps,
            step.dims.ancilla_digits,
            step.dims.col_before
        )
        .unwrap();
    }

    let rotations: Vec<TwoLevelRotation> =
        circuit.steps.iter().flat_map(step_rotations).collect();
    writeln!(s, "body {}", rotations.len()).unwrap();
    for r in &rotations {
        write!(
            s,
            "rot {} {} {} {}",
            r.iteration,
            u8::from(r.replicated_over_seq),
            r.p,
            r.q
        )
        .unwrap();
        for e in r.m {
            write!(s, " {:.16e} {:.16e}", e.re, e.im).unwrap();
        }
        writeln!(s).unwrap();
    }
    writeln!(s, "end").unwrap();
    s
}

fn format_err(line_no: usize, msg: impl Into<String>) -> SchurError {
    SchurError::Format(format!("line {}: {}", line_no + 1, msg.into()))
}

/// Token cursor over one line.
struct Line<'a> {
    no: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> Line<'a> {
    fn tag(&mut self, want: &str) -> Result<()> {
        match self.tokens.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(format_err(self.no, format!("expected `{want}`, got `{t}`"))),
            None => Err(format_err(self.no, format!("expected `{want}`"))),
        }
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let token = self
            .tokens
            .next()
            .ok_or_else(|| format_err(self.no, format!("missing {what}")))?;
        token
            .parse()
            .map_err(|_| format_err(self.no, format!("bad {what}: `{token}`")))
    }

    fn rest(&mut self) -> String {
        self.tokens.by_ref().collect::<Vec<_>>().join(" ")
    }

    fn done(&mut self) -> Result<()> {
        match self.tokens.next() {
            None => Ok(()),
            Some(t) => Err(format_err(self.no, format!("trailing `{t}`"))),
        }
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn take(&mut self, want: &str) -> Result<Line<'a>> {
        let (no, raw) = self.iter.next().ok_or_else(|| {
            SchurError::Format(format!("unexpected end of file, wanted `{want}`"))
        })?;
        let mut line = Line {
            no,
            tokens: raw.split_whitespace(),
        };
        line.tag(want)?;
        Ok(line)
    }
}

/// Parses a gate-stream file, validating counts, index ranges, and the
/// unitarity of every rotation block.
pub fn parse_stream(text: &str) -> Result<StreamFile> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };

    let mut l = lines.take("schurstream")?;
    let version: u32 = l.next("version")?;
    if version != FORMAT_VERSION {
        return Err(format_err(l.no, format!("unsupported version {version}")));
    }
    l.done()?;

    let mut l = lines.take("n")?;
    let n: u32 = l.next("n")?;
    l.tag("d")?;
    let d: usize = l.next("d")?;
    l.done()?;
    if n < 1 || d < 2 {
        return Err(format_err(l.no, "need n >= 1 and d >= 2"));
    }

    let mut l = lines.take("digits")?;
    l.tag("par")?;
    let par: usize = l.next("par")?;
    l.tag("stat")?;
    let stat: usize = l.next("stat")?;
    l.tag("seq")?;
    let seq: usize = l.next("seq")?;
    l.done()?;

    let mut l = lines.take("register")?;
    let register: u128 = l.next("register dimension")?;
    l.done()?;
    if register != (d as u128).pow((par + stat + seq) as u32) {
        return Err(format_err(l.no, "register does not match the digit budget"));
    }

    let mut l = lines.take("ancillas")?;
    let ancillas: usize = l.next("ancilla count")?;
    l.done()?;

    let mut l = lines.take("slots")?;
    let slot_count: usize = l.next("slot count")?;
    l.done()?;
    let mut slots = Vec::with_capacity(slot_count);
    for _ in 0..slot_count {
        let mut l = lines.take("slot")?;
        let shape: String = l.next("shape")?;
        l.tag("dim")?;
        let dim: usize = l.next("dimension")?;
        l.tag("mult")?;
        let mult: u64 = l.next("multiplicity")?;
        l.done()?;
        slots.push((shape, dim, mult));
    }

    let mut l = lines.take("labels")?;
    let label_count: usize = l.next("label count")?;
    l.done()?;
    let mut labels = Vec::with_capacity(label_count);
    for _ in 0..label_count {
        let mut l = lines.take("label")?;
        let shape: String = l.next("shape")?;
        let col: u64 = l.next("column")?;
        let tableau = l.rest();
        labels.push((shape, col, tableau));
    }

    let mut l = lines.take("steps")?;
    let step_count: usize = l.next("step count")?;
    l.done()?;
    let mut steps = Vec::with_capacity(step_count);
    for i in 0..step_count {
        let mut l = lines.take("step")?;
        let k: u32 = l.next("step number")?;
        l.tag("local")?;
        let local: usize = l.next("local dimension")?;
        l.tag("reps")?;
        let reps: u64 = l.next("seq replication")?;
        l.tag("anc")?;
        let anc_digits: usize = l.next("ancilla digits")?;
        l.tag("col")?;
        let col_before: usize = l.next("column capacity")?;
        l.done()?;
        if k as usize != i + 1 {
            return Err(format_err(l.no, "steps must be consecutive from 1"));
        }
        if local != col_before * d * d.pow(anc_digits as u32) {
            return Err(format_err(l.no, "local dimension does not match its factors"));
        }
        steps.push(StreamStep {
            k,
            local,
            reps,
            anc_digits,
            col_before,
        });
    }

    let mut l = lines.take("body")?;
    let rot_count: usize = l.next("rotation count")?;
    l.done()?;
    let mut rotations = Vec::with_capacity(rot_count);
    for _ in 0..rot_count {
        let mut l = lines.take("rot")?;
        let iteration: u32 = l.next("step number")?;
        let replicated: u8 = l.next("replication flag")?;
        let p: usize = l.next("first index")?;
        let q: usize = l.next("second index")?;
        let mut m = [C64::new(0.0, 0.0); 4];
        for e in &mut m {
            let re: f64 = l.next("real part")?;
            let im: f64 = l.next("imaginary part")?;
            *e = C64::new(re, im);
        }
        l.done()?;
        let step = (iteration >= 1)
            .then(|| steps.get(iteration as usize - 1))
            .flatten()
            .ok_or_else(|| format_err(l.no, format!("unknown step {iteration}")))?;
        if p >= q || q >= step.local {
            return Err(format_err(l.no, "indices out of range for the step"));
        }
        let mut rotation = TwoLevelRotation::new(p, q, m);
        rotation.iteration = iteration;
        rotation.replicated_over_seq = replicated != 0;
        if rotation.residual() > 1e-10 {
            return Err(format_err(l.no, "rotation block is not unitary"));
        }
        rotations.push(rotation);
    }
    lines.take("end")?.done()?;

    Ok(StreamFile {
        n,
        d,
        par,
        stat,
        seq,
        register,
        ancillas,
        slots,
        labels,
        steps,
        rotations,
    })
}

impl StreamFile {
    /// Local and residual coordinates of every register index relative to
    /// one step, derived purely from the recorded step table: later steps'
    /// inserted digits are peeled off in reverse.
    fn step_coords(&self, step_idx: usize, dim: usize) -> Vec<(usize, usize)> {
        let d = self.d;
        let local = self.steps[step_idx].local;
        let mut coords = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut x = i;
            let mut fut = 0usize;
            let mut fcap = 1usize;
            for later in self.steps[step_idx + 1..].iter().rev() {
                let cd = later.col_before * d;
                let acap = d.pow(later.anc_digits as u32);
                let s = x / (cd * acap);
                let rem = x % (cd * acap);
                x = s * later.col_before + rem % cd / d;
                fut = fut * (acap * d) + rem / cd * d + rem % d;
                fcap *= acap * d;
            }
            coords.push((x % local, x / local * fcap + fut));
        }
        coords
    }

    /// Applies every rotation, in file order, to the identity on the full
    /// register: the reconstructed transform as a dense unitary.
    pub fn replay_dense(&self, cap: u128) -> Result<CMat> {
        if self.register > cap {
            return Err(SchurError::SpaceCapExceeded {
                required: self.register,
                cap,
            });
        }
        let dim = self.register as usize;
        let mut u = CMat::identity(dim, dim);
        let mut lift_cache: Vec<Option<Vec<usize>>> = vec![None; self.steps.len()];
        for r in &self.rotations {
            let step_idx = r.iteration as usize - 1;
            let lift = lift_cache[step_idx].get_or_insert_with(|| {
                // inverse of the (local, residual) split
                let coords = self.step_coords(step_idx, dim);
                let local = self.steps[step_idx].local;
                let mut inv = vec![0usize; dim];
                for (i, &(l, res)) in coords.iter().enumerate() {
                    inv[res * local + l] = i;
                }
                inv
            });
            let local = self.steps[step_idx].local;
            let residuals = if r.replicated_over_seq { dim / local } else { 1 };
            for res in 0..residuals {
                let ip = lift[res * local + r.p];
                let iq = lift[res * local + r.q];
                for col in 0..dim {
                    let x = u[(ip, col)];
                    let y = u[(iq, col)];
                    u[(ip, col)] = r.m[0] * x + r.m[1] * y;
                    u[(iq, col)] = r.m[2] * x + r.m[3] * y;
                }
            }
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_schur_circuit;
    use crate::linalg::max_abs;

    #[test]
    fn render_is_deterministic() {
        let a = render_stream(&build_schur_circuit(5, 2));
        let b = render_stream(&build_schur_circuit(5, 2));
        assert_eq!(a, b);
        assert!(a.ends_with("end\n"));
    }

    #[test]
    fn header_survives_a_round_trip() {
        let c = build_schur_circuit(4, 2);
        let file = parse_stream(&render_stream(&c)).unwrap();
        assert_eq!((file.n, file.d), (4, 2));
        assert_eq!((file.par, file.stat, file.seq), (2, 3, 2));
        assert_eq!(file.ancillas, 3);
        assert_eq!(file.register, 128);
        assert_eq!(file.slots.len(), 3);
        assert_eq!(file.slots[0], ("(4)".into(), 5, 1));
        assert_eq!(file.labels.len(), 6);
        assert_eq!(file.labels[1], ("(3,1)".into(), 0, "1,2,3/4".into()));
        assert_eq!(file.steps.len(), 3);
        assert_eq!(file.rotations.len(), 34);
    }

    #[test]
    fn one_site_file_is_header_only() {
        let c = build_schur_circuit(1, 2);
        let file = parse_stream(&render_stream(&c)).unwrap();
        assert!(file.rotations.is_empty());
        assert!(file.steps.is_empty());
        assert_eq!(file.ancillas, 0);
        let u = file.replay_dense(1 << 14).unwrap();
        assert!(max_abs(&(u - CMat::identity(2, 2))) == 0.0);
    }

    #[test]
    fn replay_matches_the_expanded_circuit() {
        for (n, d) in [(2u32, 2usize), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3)] {
            let c = build_schur_circuit(n, d);
            let file = parse_stream(&render_stream(&c)).unwrap();
            let replayed = file.replay_dense(1 << 14).unwrap();
            let want = c.expand_full(1 << 14).unwrap().to_dense();
            assert!(
                max_abs(&(replayed - want)) < 1e-10,
                "replay drifted for n={n} d={d}"
            );
        }
    }

    #[test]
    fn replay_respects_the_space_cap() {
        let c = build_schur_circuit(12, 2);
        let file = parse_stream(&render_stream(&c)).unwrap();
        match file.replay_dense(1 << 14) {
            Err(SchurError::SpaceCapExceeded { required, .. }) => {
                assert_eq!(required, 1 << 17)
            }
            other => panic!("expected a cap error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let c = build_schur_circuit(3, 2);
        let good = render_stream(&c);

        let missing = good.replace("end\n", "");
        assert!(parse_stream(&missing).is_err());

        let wrong_version = good.replace("schurstream 1", "schurstream 9");
        assert!(parse_stream(&wrong_version).is_err());

        // first rotation record: damage an amplitude so the block is not
        // unitary any more
        let line = good.lines().find(|l| l.starts_with("rot")).unwrap();
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut damaged_tokens = tokens.clone();
        damaged_tokens[5] = "9.0e0";
        let damaged = good.replace(line, &damaged_tokens.join(" "));
        match parse_stream(&damaged) {
            Err(SchurError::Format(msg)) => assert!(msg.contains("not unitary")),
            other => panic!("expected a format error, got {other:?}"),
        }

        let truncated: String = good
            .lines()
            .map(|l| {
                if l.starts_with("rot") {
                    l.rsplit_once(' ').unwrap().0.to_string()
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        assert!(parse_stream(&truncated).is_err());
    }

    #[test]
    fn rotation_floats_round_trip_exactly() {
        let c = build_schur_circuit(4, 2);
        let file = parse_stream(&render_stream(&c)).unwrap();
        let direct: Vec<TwoLevelRotation> =
            c.steps.iter().flat_map(crate::twolevel::step_rotations).collect();
        assert_eq!(file.rotations.len(), direct.len());
        for (a, b) in file.rotations.iter().zip(&direct) {
            assert_eq!((a.iteration, a.p, a.q), (b.iteration, b.p, b.q));
            assert_eq!(a.replicated_over_seq, b.replicated_over_seq);
            for (x, y) in a.m.iter().zip(&b.m) {
                assert!(x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
            }
        }
    }
}
