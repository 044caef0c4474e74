//! Command-line front end: verify / sweep / peaks / descent / tree / repl.
//!
//! Results go to standard output (or --out), diagnostics to standard
//! error. Exit codes: 0 success, 1 law failure (a counterexample was
//! found) or I/O failure, 2 usage error, 3 a trajectory exceeded the step
//! cap. Identical arguments produce byte-identical output regardless of
//! --workers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use collatz::core::{self, DEFAULT_STEP_CAP};
use collatz::laws::LawReport;
use collatz::nat::Nat;
use collatz::{descent, laws, peaks, sweep, tree};

#[derive(Parser)]
#[command(name = "collatz", version, about = "Trajectory analytics for the 3n+1 map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in law suites and report pass/fail per law
    Verify(VerifyArgs),
    /// Per-n records, record curves, or stopping-time outliers over a range
    Sweep(SweepArgs),
    /// Peak triples, peak histograms, and divisor predictions
    Peaks(PeaksArgs),
    /// Residue-class descent certificates mod 2^s
    Descent(DescentArgs),
    /// Inverse-tree parents, fans, and DOT graphs
    Tree(TreeArgs),
    /// Interactive inverse-tree navigation over stdin/stdout
    Repl,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run every law suite (the default when no --law is given)
    #[arg(long)]
    all: bool,
    /// Run only the law with this id (repeatable)
    #[arg(long)]
    law: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Bound on map applications per trajectory
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Upper bound (inclusive) on swept starting values
    #[arg(short, long)]
    max: u64,
    /// Emit the total-stopping-time record curve instead of records
    #[arg(long, conflicts_with = "outliers")]
    curve: bool,
    /// Emit starts whose stopping time is at least this threshold
    #[arg(long)]
    outliers: Option<u64>,
    /// Sweep every integer from 2 instead of odd numbers from 3
    #[arg(long)]
    include_even: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
}

#[derive(Args)]
struct PeaksArgs {
    /// Report the peak triple of this single start
    #[arg(short, long, conflicts_with_all = ["max", "histogram", "decompose"])]
    n: Option<u64>,
    /// Report triples for odd starts in 3..=max
    #[arg(short, long)]
    max: Option<u64>,
    /// With --max: histogram of peak values instead of triples
    #[arg(long, requires = "max")]
    histogram: bool,
    /// First odd start of the histogram population
    #[arg(long, default_value_t = 3, requires = "histogram")]
    from: u64,
    /// Show every pattern match and divisor prediction for this odd u
    #[arg(long)]
    decompose: Option<u64>,
    /// Largest pattern parameter t tried by --decompose
    #[arg(long, default_value_t = peaks::defaults::T_MAX)]
    t_max: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
}

#[derive(Args)]
struct DescentArgs {
    /// Certify one class, written as modulus:residue (e.g. 32:11)
    #[arg(long, value_parser = parse_class)]
    class: Option<ClassArg>,
    /// Enumerate all residues mod 2^s
    #[arg(long, conflicts_with = "class")]
    modulus_exp: Option<u32>,
    /// Symbolic step budget (default 4·s)
    #[arg(long)]
    steps: Option<u64>,
    /// With --modulus-exp: certified fraction for each s up to the bound
    #[arg(long, requires = "modulus_exp")]
    coverage: bool,
    /// With --class: split an undetermined class this many extra bits
    #[arg(long, requires = "class", default_value_t = 0)]
    refine: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct ClassArg {
    modulus: u64,
    residue: u64,
}

fn parse_class(s: &str) -> Result<ClassArg, String> {
    let (m, r) = s
        .split_once(':')
        .ok_or_else(|| format!("expected modulus:residue, got {s:?}"))?;
    let modulus = m.parse().map_err(|_| format!("bad modulus {m:?}"))?;
    let residue = r.parse().map_err(|_| format!("bad residue {r:?}"))?;
    Ok(ClassArg { modulus, residue })
}

#[derive(Args)]
struct TreeArgs {
    /// Run the interactive navigation loop
    #[arg(long)]
    repl: bool,
    /// Print the fan (doubling chain + right branch) of this value
    #[arg(long, conflicts_with = "repl")]
    fan: Option<u64>,
    /// Print both parents of this value
    #[arg(long, conflicts_with_all = ["repl", "fan"])]
    parents: Option<u64>,
    /// Doublings per fan
    #[arg(long, default_value_t = tree::DEFAULT_FAN_DEPTH)]
    depth: u32,
    /// Root of the emitted DOT graph
    #[arg(long, default_value_t = 1)]
    root: u64,
    /// Levels of the emitted DOT graph
    #[arg(long, default_value_t = 5)]
    levels: u32,
    /// Keep the 1 -> 4 cycle edge instead of hiding it
    #[arg(long)]
    include_trivial_cycle: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// 0 success, 1 law/I-O failure, 2 usage, 3 step-cap report.
const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_REPORT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(core::Error),
    Usage(String),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(core::Error::CapExceeded { .. }) => EXIT_REPORT,
            CliError::Core(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<core::Error> for CliError {
    fn from(e: core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<laws::Error> for CliError {
    fn from(e: laws::Error) -> Self {
        match e {
            laws::Error::Core(c) => CliError::Core(c),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<descent::Error> for CliError {
    fn from(e: descent::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<peaks::Error> for CliError {
    fn from(e: peaks::Error) -> Self {
        match e {
            peaks::Error::Core(c) => CliError::Core(c),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Opens --out or stdout.
fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Verify(args) => run_verify(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Peaks(args) => run_peaks(args),
        Command::Descent(args) => run_descent(args),
        Command::Tree(args) => run_tree(args),
        Command::Repl => {
            let stdin = io::stdin();
            let stdout = io::stdout();
            tree::repl(stdin.lock(), stdout.lock())?;
            Ok(0)
        }
    }
}

fn run_verify(args: VerifyArgs) -> Result<u8, CliError> {
    let mut reports: Vec<LawReport> = laws::run_all(args.step_cap)?;
    reports.push(descent::verify_catalog(1000));
    reports.extend(peaks::run_all(args.step_cap));

    if !args.law.is_empty() {
        let known: Vec<String> = reports.iter().map(|r| r.law.clone()).collect();
        for requested in &args.law {
            if !known.contains(requested) {
                return Err(CliError::Usage(format!(
                    "unknown law {requested:?}; available: {}",
                    known.join(", ")
                )));
            }
        }
        reports.retain(|r| args.law.contains(&r.law));
    }

    let mut w = sink(&args.out)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &reports).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        _ => {
            for report in &reports {
                writeln!(w, "{report}")?;
            }
        }
    }
    w.flush()?;

    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        eprintln!("{failed} law(s) failed");
        Ok(EXIT_FAILURE)
    } else {
        Ok(0)
    }
}

fn run_sweep(args: SweepArgs) -> Result<u8, CliError> {
    if args.max < 3 {
        return Err(CliError::Usage("--max must be at least 3".into()));
    }
    let mut w = sink(&args.out)?;

    if args.curve {
        let curve = sweep::record_curve(args.max, args.step_cap, args.workers);
        match args.format {
            Format::Json => {
                serde_json::to_writer(&mut w, &curve).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "n,total")?;
                for (n, total) in curve {
                    writeln!(w, "{n},{total}")?;
                }
            }
        }
        w.flush()?;
        return Ok(0);
    }

    if let Some(threshold) = args.outliers {
        let outliers = sweep::stopping_time_outliers(args.max, threshold, args.step_cap, args.workers);
        match args.format {
            Format::Json => {
                serde_json::to_writer(&mut w, &outliers).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "n,stop")?;
                for (n, stop) in outliers {
                    writeln!(w, "{n},{stop}")?;
                }
            }
        }
        w.flush()?;
        return Ok(0);
    }

    let out = sweep::sweep(args.max, args.include_even, args.step_cap, args.workers);
    match args.format {
        Format::Json => sweep::emit_json_lines(&out.records, &mut w)?,
        _ => sweep::emit_csv(&out.records, &mut w)?,
    }
    w.flush()?;

    if out.failures.is_empty() {
        Ok(0)
    } else {
        for f in &out.failures {
            eprintln!("n={}: {}", f.n, f.error);
        }
        Ok(EXIT_REPORT)
    }
}

fn run_peaks(args: PeaksArgs) -> Result<u8, CliError> {
    let mut w = sink(&args.out)?;

    if let Some(u) = args.decompose {
        if u % 2 == 0 {
            return Err(CliError::Usage(format!("--decompose needs an odd u, got {u}")));
        }
        let decompositions = peaks::decompose_all(&Nat::from(u), args.t_max);
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &decompositions).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "t,pattern,k,l,e,divisor,v")?;
                for d in &decompositions {
                    writeln!(
                        w,
                        "{},{:?},{},{},{},{},{}",
                        d.t,
                        d.pattern,
                        d.k,
                        d.l.as_ref().map_or_else(|| "-".into(), Nat::to_string),
                        d.e.map_or_else(|| "-".into(), |e| e.to_string()),
                        d.predicted_divisor,
                        d.predicted_v
                    )?;
                }
            }
        }
        w.flush()?;
        return Ok(0);
    }

    if let Some(n) = args.n {
        let triple = peaks::peak_triple(&Nat::from(n), args.step_cap)?;
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &triple).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "n={} peak={}", triple.start, triple.peak)?;
                match &triple.odd_before {
                    Some(u) => writeln!(w, "u={u}")?,
                    None => writeln!(w, "u=- (start is the peak)")?,
                }
                writeln!(w, "v={}", triple.odd_after)?;
            }
        }
        w.flush()?;
        return Ok(0);
    }

    let Some(max) = args.max else {
        return Err(CliError::Usage(
            "peaks needs one of --n, --max, or --decompose".into(),
        ));
    };
    if max < 3 {
        return Err(CliError::Usage("--max must be at least 3".into()));
    }

    if args.histogram {
        if args.from.is_multiple_of(2) || args.from < 1 {
            return Err(CliError::Usage("--from must be a positive odd number".into()));
        }
        let hist = sweep::peak_histogram_odds(args.from, max, args.step_cap, args.workers);
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &hist).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "peak,count")?;
                for (peak, count) in &hist.counts {
                    writeln!(w, "{peak},{count}")?;
                }
            }
        }
        w.flush()?;
        if let Some((peak, count)) = hist.modal() {
            eprintln!(
                "population {} ({} starts): modal peak {} with {} ({:.2}%)",
                hist.population,
                hist.population_size,
                peak,
                count,
                100.0 * hist.share(count)
            );
        }
        return Ok(0);
    }

    // Triple rows for odd n in 3..=max.
    match args.format {
        Format::Json => {
            let mut n = 3u64;
            while n <= max {
                let triple = peaks::peak_triple(&Nat::from(n), args.step_cap)?;
                serde_json::to_writer(&mut w, &triple).map_err(io::Error::from)?;
                writeln!(w)?;
                n += 2;
            }
        }
        _ => {
            writeln!(w, "n,peak,u,v")?;
            let mut n = 3u64;
            while n <= max {
                let triple = peaks::peak_triple(&Nat::from(n), args.step_cap)?;
                writeln!(
                    w,
                    "{},{},{},{}",
                    n,
                    triple.peak,
                    triple
                        .odd_before
                        .as_ref()
                        .map_or_else(|| "-".into(), Nat::to_string),
                    triple.odd_after
                )?;
                n += 2;
            }
        }
    }
    w.flush()?;
    Ok(0)
}

fn run_descent(args: DescentArgs) -> Result<u8, CliError> {
    let mut w = sink(&args.out)?;

    if let Some(arg) = &args.class {
        let class = descent::ResidueClass::new(arg.modulus, arg.residue)?;
        let budget = args
            .steps
            .unwrap_or_else(|| descent::default_max_steps(class.exponent()));
        if args.refine > 0 {
            let leaves = descent::refine_frontier(&class, args.refine);
            write_outcomes(&mut w, args.format, &leaves)?;
        } else {
            let outcome = descent::certify(&class, budget);
            write_outcomes(&mut w, args.format, &[(class, outcome)])?;
        }
        w.flush()?;
        return Ok(0);
    }

    if let Some(s) = args.modulus_exp {
        if s == 0 || s > 24 {
            return Err(CliError::Usage("--modulus-exp must be in 1..=24".into()));
        }
        if args.coverage {
            let rows = descent::descent_coverage(s);
            match args.format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &rows).map_err(io::Error::from)?;
                    writeln!(w)?;
                }
                _ => {
                    writeln!(w, "s,certified,total,fraction")?;
                    for row in rows {
                        writeln!(
                            w,
                            "{},{},{},{:.6}",
                            row.exponent,
                            row.certified,
                            row.total,
                            row.fraction()
                        )?;
                    }
                }
            }
        } else {
            let budget = args.steps.unwrap_or_else(|| descent::default_max_steps(s as u64));
            let outcomes = descent::enumerate(s, budget);
            write_outcomes(&mut w, args.format, &outcomes)?;
        }
        w.flush()?;
        return Ok(0);
    }

    // Default: check the certified-class catalog.
    let report = descent::verify_catalog(1000);
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        _ => writeln!(w, "{report}")?,
    }
    w.flush()?;
    Ok(if report.passed() { 0 } else { EXIT_FAILURE })
}

fn write_outcomes(
    w: &mut dyn Write,
    format: Format,
    outcomes: &[(descent::ResidueClass, descent::DescentOutcome)],
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &outcomes).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        _ => {
            writeln!(w, "class,status,steps,final")?;
            for (class, outcome) in outcomes {
                match outcome {
                    descent::DescentOutcome::Certified(cert) => {
                        writeln!(w, "{class},certified,{},{}", cert.steps, cert.final_form)?;
                    }
                    descent::DescentOutcome::Undetermined {
                        steps_taken,
                        blocking,
                        ..
                    } => {
                        writeln!(w, "{class},undetermined,{steps_taken},{blocking}")?;
                    }
                    descent::DescentOutcome::Refined(children) => {
                        let kids: Vec<String> =
                            children.iter().map(|c| c.to_string()).collect();
                        writeln!(w, "{class},refined,-,{}", kids.join(" "))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_tree(args: TreeArgs) -> Result<u8, CliError> {
    if args.repl {
        let stdin = io::stdin();
        let mut w = sink(&args.out)?;
        tree::repl(stdin.lock(), &mut w)?;
        w.flush()?;
        return Ok(0);
    }

    let mut w = sink(&args.out)?;

    if let Some(n) = args.parents {
        let node = tree::parents(&Nat::from(n))?;
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &node).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => {
                writeln!(w, "node {}", node.value)?;
                writeln!(w, "  left parent: {}", node.left_parent)?;
                match &node.right_parent {
                    Some(r) => writeln!(w, "  right parent: {r}")?,
                    None => writeln!(w, "  right parent: none")?,
                }
            }
        }
        w.flush()?;
        return Ok(0);
    }

    if let Some(n) = args.fan {
        if n == 0 {
            return Err(CliError::Usage("--fan needs a positive value".into()));
        }
        let report = tree::fan(&Nat::from(n), args.depth, args.include_trivial_cycle)?;
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            _ => tree::write_fan(&report, &mut w)?,
        }
        w.flush()?;
        return Ok(0);
    }

    // Default: DOT graph from the root.
    let dot = tree::emit_dot(&Nat::from(args.root), args.levels, args.include_trivial_cycle);
    w.write_all(dot.as_bytes())?;
    w.flush()?;
    Ok(0)
}
