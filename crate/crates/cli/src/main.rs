//! Command-line front end: gate-stream generation, certification,
//! benchmark tables, and combinatorial dumps.
//!
//! Exit codes: 0 success, 1 verification/reconstruction failure, 2 usage
//! error, 3 resource cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use schur_core::{
    analytic_bound, build_schur_circuit, direct_decompose_baseline, layout_for, parse_stream,
    render_stream, run_all, sequence_length, spin_of, SchurError,
};

const EXPANSION_CAP: u128 = 1 << 14;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "schur",
    version,
    about = "Compiles the Schur transform on n qudits into two-level rotation streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a transform and write its gate stream
    Gen {
        /// Number of sites
        #[arg(long)]
        n: u32,
        /// Local dimension per site
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Output path (default: schur-n{n}-d{d}.gates)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also expand the full register and compare it against a replay
        /// of the written file (small n only)
        #[arg(long)]
        check_expand: bool,
    },
    /// Rebuild a transform and certify its representation structure
    Verify {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Random tensor-power unitaries to test against
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Tabulate measured rotation counts against the analytic bounds
    Bench {
        /// Largest site count; one row per n from 2 up
        #[arg(long)]
        max_n: u32,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also factor the expanded transform directly (n <= 6)
        #[arg(long)]
        include_direct: bool,
    },
    /// Dump partitions with irrep dimensions and multiplicities as CSV
    Tables {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // the workload is single-streamed; a THREADS override is accepted for
    // compatibility and results do not depend on it
    if let Ok(threads) = std::env::var("THREADS") {
        if threads.parse::<usize>().map_or(true, |t| t == 0) {
            eprintln!("THREADS must be a positive integer, got `{threads}`");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match Cli::parse().command {
        Command::Gen {
            n,
            d,
            output,
            check_expand,
        } => cmd_gen(n, d, output, check_expand),
        Command::Verify { n, d, samples } => cmd_verify(n, d, samples),
        Command::Bench {
            max_n,
            d,
            output,
            include_direct,
        } => cmd_bench(max_n, d, output, include_direct),
        Command::Tables { n, d, output } => cmd_tables(n, d, output),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(EXIT_USAGE)
}

fn write_output(path: Option<PathBuf>, text: &str) -> ExitCode {
    match path {
        Some(p) => match std::fs::write(&p, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("cannot write {}: {e}", p.display());
                ExitCode::from(EXIT_FAILURE)
            }
        },
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}

fn cmd_gen(n: u32, d: usize, output: Option<PathBuf>, check_expand: bool) -> ExitCode {
    if n < 1 || d < 2 {
        return usage_error("need --n >= 1 and --d >= 2");
    }
    let circuit = build_schur_circuit(n, d);
    let text = render_stream(&circuit);
    let file = parse_stream(&text).expect("freshly rendered streams are well-formed");
    let path = output.unwrap_or_else(|| PathBuf::from(format!("schur-n{n}-d{d}.gates")));
    if let Err(e) = std::fs::write(&path, &text) {
        eprintln!("cannot write {}: {e}", path.display());
        return ExitCode::from(EXIT_FAILURE);
    }
    println!(
        "wrote {}: {} two-level rotations, {} ancilla digits, register {}^{}",
        path.display(),
        file.rotations.len(),
        file.ancillas,
        d,
        file.par + file.stat + file.seq,
    );

    if check_expand {
        let want = match circuit.expand_full(EXPANSION_CAP) {
            Ok(op) => op.to_dense(),
            Err(SchurError::SpaceCapExceeded { required, cap }) => {
                eprintln!("full expansion needs dimension {required}, cap is {cap}");
                return ExitCode::from(EXIT_CAP);
            }
            Err(e) => {
                eprintln!("expansion failed: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
        };
        let got = file
            .replay_dense(EXPANSION_CAP)
            .expect("replay fits whenever expansion does");
        let err = (got - want)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if err > 1e-10 {
            eprintln!("replay deviates from the expanded transform by {err:.3e}");
            return ExitCode::from(EXIT_FAILURE);
        }
        println!("expansion check passed, max deviation {err:.3e}");
    }
    ExitCode::SUCCESS
}

fn cmd_verify(n: u32, d: usize, samples: usize) -> ExitCode {
    if n < 1 || d < 2 {
        return usage_error("need --n >= 1 and --d >= 2");
    }
    if layout_for(n, d).dimension() > EXPANSION_CAP {
        eprintln!(
            "verification expands the full register; n={n} d={d} exceeds the cap of {EXPANSION_CAP}"
        );
        return ExitCode::from(EXIT_CAP);
    }
    let circuit = build_schur_circuit(n, d);
    let mut all_passed = true;
    for report in run_all(&circuit, samples) {
        all_passed &= report.passed;
        println!(
            "check {} {} max_residual {:.3e}",
            report.name,
            if report.passed { "pass" } else { "FAIL" },
            report.max_residual
        );
        for (key, value) in &report.records {
            println!("  {key} = {value}");
        }
    }
    if all_passed {
        println!("all checks passed for n={n} d={d}");
        ExitCode::SUCCESS
    } else {
        println!("verification FAILED for n={n} d={d}");
        ExitCode::from(EXIT_FAILURE)
    }
}

fn cmd_bench(max_n: u32, d: usize, output: Option<PathBuf>, include_direct: bool) -> ExitCode {
    if !(2..=20).contains(&max_n) || d < 2 {
        return usage_error("need 2 <= --max-n <= 20 and --d >= 2");
    }
    let mut csv = String::from("n,structured_count,analytic_bound,cubic_envelope,direct_count\n");
    for n in 2..=max_n {
        let report = sequence_length(n, d);
        let direct = if include_direct && n <= 6 {
            direct_decompose_baseline(n, d)
                .expect("direct baseline fits under the cap for n <= 6")
                .to_string()
        } else {
            String::new()
        };
        csv.push_str(&format!(
            "{n},{},{:.4},{},{direct}\n",
            report.total,
            analytic_bound(n, d),
            report.cubic_envelope,
        ));
    }
    write_output(output, &csv)
}

fn cmd_tables(n: u32, d: usize, output: Option<PathBuf>) -> ExitCode {
    if !(1..=20).contains(&n) || d < 2 {
        return usage_error("need 1 <= --n <= 20 and --d >= 2");
    }
    let mut csv = String::from(if d == 2 {
        "lambda,dim_q,multiplicity,spin\n"
    } else {
        "lambda,dim_q,multiplicity\n"
    });
    for slot in layout_for(n, d).slots {
        csv.push_str(&format!(
            "\"{}\",{},{}",
            slot.shape.padded(d),
            slot.dim_q,
            slot.multiplicity
        ));
        if d == 2 {
            csv.push_str(&format!(",{}", spin_of(&slot.shape)));
        }
        csv.push('\n');
    }
    write_output(output, &csv)
}
