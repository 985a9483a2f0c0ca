mod commands;
mod output;
mod parse;
mod svg;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use confocal::{Ellipsoid, Sigma};

/// Billiards inside ellipsoids: orbits, frequency maps, ranges and
/// periodic trajectories.
#[derive(Parser)]
#[command(name = "confocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the billiard map and record impact points and caustics.
    Orbit(commands::orbit::OrbitArgs),
    /// Level curves of the caustic parameter on the planar phase cylinder.
    PhasePortrait(commands::orbit::PortraitArgs),
    /// Frequency map at one caustic parameter, edges included.
    Freq(commands::freq::FreqArgs),
    /// Frequencies and normalized Jacobian over a grid of one component.
    FreqGrid(commands::freq::GridArgs),
    /// Boundary of the frequency range of each caustic type.
    Range(commands::range::RangeArgs),
    /// Bifurcation curve c = g(b) for a fixed frequency.
    Bifurcate(commands::range::BifurcateArgs),
    /// Algebraic closure residuals for m = n+1, ..., mmax.
    Cayley(commands::periodic::CayleyArgs),
    /// Periodic trajectory with a prescribed rational frequency.
    Periodic(commands::periodic::PeriodicArgs),
    /// Lower bounds on the period for every caustic type.
    LowerBounds(commands::periodic::BoundsArgs),
}

/// Options shared by every subcommand.
#[derive(Args, Clone)]
pub struct Common {
    /// Write every artifact to <OUT>.csv, <OUT>.json or <OUT>.svg instead
    /// of printing the primary one.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Seed for anything drawn at random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    pub fn sink(&self) -> output::Sink {
        output::Sink::new(self.out.clone())
    }
}

/// Comma-separated numbers; fractions `p/q` are exact.
#[derive(Clone, Debug)]
pub struct Numbers(pub Vec<f64>);

fn numbers(s: &str) -> Result<Numbers, String> {
    parse::list(s).map(Numbers)
}

pub fn ellipsoid(axes: &Numbers) -> Result<Ellipsoid, Failure> {
    Ok(Ellipsoid::from_unsorted(&axes.0)?)
}

/// `(a, b, c)` of a three-dimensional ellipsoid, largest first.
pub fn three_axes(e: &Ellipsoid) -> Result<(f64, f64, f64), Failure> {
    match e.semiaxes() {
        [c, b, a] => Ok((*a, *b, *c)),
        _ => Err(Failure::Usage(format!("expected three semiaxes, got {}", e.dim()))),
    }
}

pub fn sigma_of(s: &str) -> Result<Sigma, String> {
    parse::sigma(s)
}

pub enum Failure {
    Lib(confocal::Error),
    Usage(String),
    Io(io::Error),
}

impl From<confocal::Error> for Failure {
    fn from(e: confocal::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numeric() => 3,
            Failure::Lib(_) | Failure::Usage(_) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("CONFOCAL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("CONFOCAL_THREADS must be a count, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Orbit(a) => commands::orbit::orbit(&a),
        Command::PhasePortrait(a) => commands::orbit::portrait(&a),
        Command::Freq(a) => commands::freq::freq(&a),
        Command::FreqGrid(a) => commands::freq::grid(&a),
        Command::Range(a) => commands::range::range(&a),
        Command::Bifurcate(a) => commands::range::bifurcate(&a),
        Command::Cayley(a) => commands::periodic::cayley(&a),
        Command::Periodic(a) => commands::periodic::periodic(&a),
        Command::LowerBounds(a) => commands::periodic::lower_bounds(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("confocal: {e}");
            ExitCode::from(e.code())
        }
    }
}
