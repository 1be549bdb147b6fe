//! `knotflow` command-line front end.
//!
//! Exit codes: 0 success, 1 a checked property failed (or a computation did
//! not converge), 2 invalid input. Messages go to standard error; output
//! files are written atomically, so a failed run leaves none behind.

mod commands;
mod config;
mod expr;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use knotflow::Error;

use expr::parse_number;

const CSV_COLUMNS: &str = "CSV outputs carry a header row. Columns:
  flow integrate    t,x,y,z        accepted steps, coordinates reduced to [0, 2 pi)
  flow splitting    y,distance     signed gap z_u - z_s between the manifolds on x = x_saddle + pi
  contact annulus   theta,z,r      surface grid, theta-major within each z row

Numeric values accept expressions such as pi/2 or -3*pi/4. A file of key=value
lines passed with --config stands in for flags; flags on the command line win.
Relative --out paths resolve against $KNOTFLOW_OUT_DIR when it is set.";

#[derive(Parser, Debug)]
#[command(name = "knotflow", version, about = "Beltrami fields, Reeb dynamics and template knots", after_help = CSV_COLUMNS)]
struct Cli {
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Checks on ABC fields.
    #[command(subcommand)]
    Beltrami(BeltramiCmd),
    /// Streamlines, periodic orbits and manifold splitting.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Characteristic-foliation annuli.
    #[command(subcommand)]
    Contact(ContactCmd),
    /// Lorenz-like templates and their periodic orbits.
    #[command(subcommand)]
    Template(TemplateCmd),
    /// The standard tight contact form on the unit 3-sphere.
    #[command(subcommand)]
    Tight(TightCmd),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct AbcArgs {
    #[arg(long = "A", value_parser = parse_number, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long = "B", value_parser = parse_number, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long = "C", value_parser = parse_number, allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Subcommand, Debug)]
enum BeltramiCmd {
    /// Curl, divergence and Reeb residuals on random points plus a
    /// singularity certificate. JSON report.
    Check(commands::CheckArgs),
}

#[derive(Subcommand, Debug)]
enum FlowCmd {
    /// Integrate one streamline. CSV t,x,y,z.
    Integrate(commands::IntegrateArgs),
    /// Find a periodic orbit through a section by shooting. JSON.
    Orbit(commands::OrbitArgs),
    /// Splitting of the saddle-orbit manifolds of (1, B, C). CSV y,distance.
    Splitting(commands::SplittingArgs),
}

#[derive(Subcommand, Debug)]
enum ContactCmd {
    /// Build an annulus realizing a circle map and measure the roundtrip.
    /// Grid CSV to --out, JSON summary to standard output.
    Annulus(commands::AnnulusArgs),
}

#[derive(Subcommand, Debug)]
enum TemplateCmd {
    /// Aperiodic cyclic words up to a length, one per line.
    Words(commands::WordsArgs),
    /// Knot invariants of every orbit up to a length. JSON lines.
    Knots(commands::KnotsArgs),
    /// Linking number of two orbits.
    Link(commands::LinkArgs),
}

#[derive(Subcommand, Debug)]
enum TightCmd {
    /// Reeb field of the tight form at a point of the sphere. JSON.
    Reeb(commands::ReebArgs),
}

/// Why a run ended unsuccessfully.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or values.
    Input(String),
    /// A checked property failed or a computation did not converge.
    Property(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotNormalized { .. }
            | Error::InvalidParams
            | Error::NotOnSphere { .. }
            | Error::WrongParams { .. }
            | Error::NotMonotone { .. }
            | Error::PeriodicWord(_)
            | Error::SameOrbit(..)
            | Error::InvalidInput(_) => Failure::Input(e.to_string()),
            _ => Failure::Property(e.to_string()),
        }
    }
}

/// Where the primary output goes.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn new(out: Option<PathBuf>) -> Self {
        let path = out.map(|p| match std::env::var_os("KNOTFLOW_OUT_DIR") {
            Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
            _ => p,
        });
        Self { path }
    }

    pub fn path(&self) -> Option<&PathBuf> {
        self.path.as_ref()
    }

    /// Write `content` to the output path atomically, or to standard output.
    pub fn emit(&self, content: &str) -> Result<(), Failure> {
        match &self.path {
            Some(p) => write_atomic(p, content),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(content.as_bytes())
                    .and_then(|_| so.flush())
                    .map_err(|e| Failure::Property(format!("cannot write output: {e}")))
            }
        }
    }
}

pub fn write_atomic(path: &PathBuf, content: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(content.as_bytes()).map_err(io)?;
    // the temporary file is deleted on drop if anything above failed
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Parse `argv`, run the subcommand and return the process exit code.
pub fn run(argv: Vec<String>) -> u8 {
    let argv = match config::expand_argv(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let sink = Sink::new(cli.out);
    let result = match cli.command {
        Command::Beltrami(BeltramiCmd::Check(a)) => commands::beltrami_check(&a, &sink),
        Command::Flow(FlowCmd::Integrate(a)) => commands::flow_integrate(&a, &sink),
        Command::Flow(FlowCmd::Orbit(a)) => commands::flow_orbit(&a, &sink),
        Command::Flow(FlowCmd::Splitting(a)) => commands::flow_splitting(&a, &sink),
        Command::Contact(ContactCmd::Annulus(a)) => commands::contact_annulus(&a, &sink),
        Command::Template(TemplateCmd::Words(a)) => commands::template_words(&a, &sink),
        Command::Template(TemplateCmd::Knots(a)) => commands::template_knots(&a, &sink),
        Command::Template(TemplateCmd::Link(a)) => commands::template_link(&a, &sink),
        Command::Tight(TightCmd::Reeb(a)) => commands::tight_reeb(&a, &sink),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Property(msg)) => {
            eprintln!("violation: {msg}");
            1
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}
