use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infobalance::encodings::holevo_check;
use infobalance::families::{self, FAMILY_NAMES};
use infobalance::io;
use infobalance::measures::BalanceReport;
use infobalance::objects::{purify, random_instrument};
use infobalance::recovery::recovery_report;
use infobalance::{Error, Instrument, LabeledState};

#[derive(Parser, Debug)]
#[command(name = "infobalance", version, about = "Information balance of quantum measurements")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Input state: maximally-mixed, pure, plus, diag:p0,p1,..., random:SEED, or a state file
    #[arg(long, global = true, default_value = "maximally-mixed")]
    state: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress the version banner on stderr
    #[arg(long, global = true)]
    quiet: bool,

    /// Report entropies in nats instead of bits
    #[arg(long, global = true)]
    nats: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the instrument invariants of a file
    Validate { file: PathBuf },
    /// Information gain, disturbance, noise and per-outcome balance
    Analyze {
        /// Instrument file or family spec `name[:param]`
        instrument: String,
    },
    /// Balance along a parameter grid of a built-in family
    Sweep {
        /// One of filter, partial-dephasing, depolarizing, projective
        #[arg(long)]
        family: String,
        /// Comma-separated grid; defaults to `--points` evenly spaced values in [0, 1]
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Petz recovery fidelity against the disturbance thresholds
    Recover { instrument: String },
    /// Write a Haar-random instrument
    Random {
        #[arg(long, default_value_t = 2)]
        d_in: usize,
        #[arg(long, default_value_t = 2)]
        d_out: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: usize,
        #[arg(long, default_value_t = 1)]
        multiplicity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized check of I(X:M) <= iota over reference-side encodings
    Holevo {
        instrument: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

enum Failure {
    Domain(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Input(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let invariant = matches!(&e, Error::Parse { message, .. } if message.starts_with("invariant violated"));
        match e {
            Error::Parse { .. } if !invariant => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CmdResult = Result<String, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

fn load_instrument(spec: &str) -> Result<Instrument, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(io::read_instrument(&read_text(path)?)?);
    }
    match families::instrument_from_spec(spec) {
        Err(Error::UnknownFamily(_)) => Err(Failure::Input(format!(
            "`{spec}` is neither a file nor a family ({})",
            FAMILY_NAMES.join(", ")
        ))),
        other => Ok(other?),
    }
}

fn load_state(spec: &str, d: usize) -> Result<LabeledState, Failure> {
    if let Some(state) = families::preset_state(spec, d) {
        return Ok(state?);
    }
    let state = io::read_state(&read_text(Path::new(spec))?)?;
    if state.dim() != d {
        return Err(Failure::Domain(format!(
            "state has dimension {}, instrument input dimension is {d}",
            state.dim()
        )));
    }
    Ok(state.relabel(vec![infobalance::Subsystem::new("Q", d)])?)
}

fn unit(g: &Global) -> (f64, &'static str) {
    if g.nats {
        (std::f64::consts::LN_2, "nats")
    } else {
        (1.0, "bits")
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_validate(file: &Path, g: &Global) -> CmdResult {
    let instr = io::read_instrument_unvalidated(&read_text(file)?)?;
    let report = instr.validate();
    let text = match g.format {
        Format::Json => to_json(&report),
        _ => {
            let mut out = String::new();
            let _ = writeln!(out, "d_in {}  d_out {}  outcomes {}", instr.d_in(), instr.d_out(), instr.n_outcomes());
            let _ = writeln!(out, "max |sum E^dag E - I| = {:.3e}", report.tp_deviation);
            for line in report.failures() {
                let _ = writeln!(out, "FAIL {line}");
            }
            let _ = writeln!(out, "{}", if report.passed { "valid" } else { "invalid" });
            out
        }
    };
    if report.passed {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Domain(report.failures().join("; ")))
    }
}

fn report_for(instr: &Instrument, g: &Global) -> Result<BalanceReport, Failure> {
    let rho = load_state(&g.state, instr.d_in())?;
    Ok(infobalance::balance_report(instr, &rho)?.scaled(unit(g).0))
}

fn cmd_analyze(spec: &str, g: &Global) -> CmdResult {
    let instr = load_instrument(spec)?;
    let report = report_for(&instr, g)?;
    Ok(match g.format {
        Format::Json => report.to_json() + "\n",
        Format::Table => report.to_table(unit(g).1),
        Format::Csv => format!("{}\n{}\n", BalanceReport::csv_header(), report.csv_row(None)),
    })
}

fn cmd_sweep(family: &str, grid: Option<&[f64]>, points: usize, out: Option<&Path>, g: &Global) -> CmdResult {
    if !FAMILY_NAMES.contains(&family) {
        return Err(Failure::Domain(format!(
            "unknown family `{family}` (expected one of {})",
            FAMILY_NAMES.join(", ")
        )));
    }
    let grid: Vec<f64> = match grid {
        Some(values) => values.to_vec(),
        None if points >= 2 => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
        None => vec![0.0; points.min(1)],
    };
    if grid.is_empty() {
        return Err(Failure::Domain("empty parameter grid".into()));
    }
    let mut csv = String::from(BalanceReport::csv_header());
    csv.push('\n');
    for &t in &grid {
        let instr = families::family_instrument(family, Some(t))?;
        let report = report_for(&instr, g)?;
        csv.push_str(&report.csv_row(Some(t)));
        csv.push('\n');
    }
    write_output(out, &csv)
}

fn cmd_recover(spec: &str, g: &Global) -> CmdResult {
    let instr = load_instrument(spec)?;
    let rho = load_state(&g.state, instr.d_in())?;
    let r = recovery_report(&instr, &rho)?;
    let (scale, unit_name) = unit(g);
    Ok(match g.format {
        Format::Json => to_json(&r),
        Format::Csv => format!(
            "delta,fidelity,optimal_threshold,guaranteed_threshold,fano_bound,fano_holds\n{},{},{},{},{},{}\n",
            r.delta * scale,
            r.fidelity,
            r.optimal_threshold,
            r.guaranteed_threshold,
            r.fano.bound * scale,
            r.fano.holds
        ),
        Format::Table => {
            let flag = |b: bool| if b { "PASS" } else { "FAIL" };
            let mut out = String::new();
            let _ = writeln!(out, "{:<28}{:>12.6} {unit_name}", "delta", r.delta * scale);
            let _ = writeln!(out, "{:<28}{:>12.6}", "corrected F_e (Petz)", r.fidelity);
            let _ = writeln!(
                out,
                "{:<28}{:>12.6}  {}",
                "1 - 2 sqrt(delta)",
                r.optimal_threshold,
                flag(r.meets_optimal)
            );
            let _ = writeln!(
                out,
                "{:<28}{:>12.6}  {}",
                "1 - 4 sqrt(delta)",
                r.guaranteed_threshold,
                flag(r.meets_guaranteed)
            );
            let _ = writeln!(
                out,
                "{:<28}{:>12.6} {unit_name}  {}",
                "fano bound f(1 - F_e)",
                r.fano.bound * scale,
                flag(r.fano.holds)
            );
            if r.completed {
                let _ = writeln!(out, "off-support completion used");
            }
            out
        }
    })
}

fn cmd_random(d_in: usize, d_out: usize, n: usize, mult: usize, out: Option<&Path>, g: &Global) -> CmdResult {
    let instr = random_instrument(g.seed, d_in, d_out, n, mult)?;
    write_output(out, &io::write_instrument(&instr))
}

fn cmd_holevo(spec: &str, trials: usize, g: &Global) -> CmdResult {
    let instr = load_instrument(spec)?;
    let rho = load_state(&g.state, instr.d_in())?;
    let r = holevo_check(&purify(&rho), &instr, trials, g.seed)?;
    let (scale, unit_name) = unit(g);
    let shown = r.scaled(scale);
    let text = match g.format {
        Format::Json => to_json(&shown),
        Format::Csv => format!(
            "iota,max_classical_mi,margin,n_trials,seed\n{},{},{},{},{}\n",
            shown.iota, shown.max_classical_mi, shown.margin, shown.n_trials, shown.seed
        ),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "{:<20}{:>12.6} {unit_name}", "iota", shown.iota);
            let _ = writeln!(out, "{:<20}{:>12.6} {unit_name}", "best I(X:M)", shown.max_classical_mi);
            let _ = writeln!(out, "{:<20}{:>12.6} {unit_name}", "margin", shown.margin);
            let _ = writeln!(out, "{:<20}{:>12}", "trials", shown.n_trials);
            out
        }
    };
    if r.all_within {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Domain(format!(
            "classical mutual information {} exceeds iota {}",
            r.max_classical_mi, r.iota
        )))
    }
}

fn run(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { file } => cmd_validate(file, g),
        Command::Analyze { instrument } => cmd_analyze(instrument, g),
        Command::Sweep {
            family,
            grid,
            points,
            out,
        } => cmd_sweep(family, grid.as_deref(), *points, out.as_deref(), g),
        Command::Recover { instrument } => cmd_recover(instrument, g),
        Command::Random {
            d_in,
            d_out,
            outcomes,
            multiplicity,
            out,
        } => cmd_random(*d_in, *d_out, *outcomes, *multiplicity, out.as_deref(), g),
        Command::Holevo { instrument, trials } => cmd_holevo(instrument, *trials, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if !cli.global.quiet {
        eprintln!("infobalance {}", env!("CARGO_PKG_VERSION"));
    }
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
