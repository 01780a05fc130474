use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "polyscan", version, about = "Polynomial endomorphisms of F_q^3: scans, classes and censuses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orders of GL_n(F_q) and Aff_n(F_q).
    Counts {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
    },
    /// Exhaustive scan of a coefficient space.
    Scan(ScanArgs),
    Classify {
        #[command(subcommand)]
        what: Classify,
    },
    /// Tame-equivalence classes of the maps in a record file.
    Closure(ClosureArgs),
    /// Extension bijection signatures of the maps in a record file.
    Signature {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        rmax: u32,
    },
    Lfpe {
        #[command(subcommand)]
        what: Lfpe,
    },
    /// Polynomial inverse of a map.
    Invert(MapArgs),
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Renders a table from CSV or record files.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub q: u64,
    /// id-affine-deg2, homog-cubic or dependence-deg2.
    #[arg(long)]
    pub shape: String,
    /// mock, auto or bijection.
    #[arg(long)]
    pub predicate: String,
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpoint of an interrupted run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Scan the full space instead of the trace-kernel restriction.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Subcommand, Debug)]
pub enum Classify {
    /// Classes under conjugation by GL_3(F_q).
    LinearOrbits {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ClosureArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Map literals, one per line.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long)]
    pub dmax: u32,
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Move degree of the seeded stage; defaults to max(deg, dmax / 2).
    #[arg(long)]
    pub gen: Option<u32>,
    /// Search depth of the seeded stage.
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Extension degrees in the signature invariant.
    #[arg(long)]
    pub rmax: Option<u32>,
}

#[derive(Args, Debug)]
pub struct MapArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub q: u64,
}

#[derive(Args, Debug)]
pub struct CapArgs {
    #[arg(long, default_value_t = 512)]
    pub k_max: u32,
    #[arg(long, default_value_t = 64)]
    pub deg_cap: u32,
}

#[derive(Subcommand, Debug)]
pub enum Lfpe {
    /// Locally finite pairs (α, F) over affine orbit representatives.
    Census {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        deg: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// pairs or classes; defaults to the published convention for q.
        #[arg(long)]
        count: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Order and minimal polynomial of one automorphism.
    Analyze {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        caps: CapArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Bijectivity of x^4+x^2+x, x^8+x^4+x and x^8+x^2+x over F_{2^r}.
    LemmaL1 {
        #[arg(long)]
        rmax: u32,
    },
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// T1-classes, F2-deg3-classes, F2-lfpe, F3-lfpe or counts.
    #[arg(long)]
    pub table: String,
    #[arg(long = "in", num_args = 0..)]
    pub input: Vec<PathBuf>,
    /// csv or text.
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A predicate or verification did not hold.
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
