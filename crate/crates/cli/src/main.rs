//! `resgraph` command-line front end.
//!
//! Exit codes: 0 on success, 1 on data errors, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use resgraph::{FeatureMask, MeasureKind};

mod commands;
mod timing;

#[derive(Debug, Parser)]
#[command(name = "resgraph", version, about = "Residue contact graph descriptors and nearest-neighbor classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a reference database from a manifest of labeled PDB files.
    BuildDb(BuildDbArgs),
    /// Append structures to an existing reference database.
    Add(AddArgs),
    /// Predict the class of one or more query structures.
    Classify(ClassifyArgs),
    /// Leave-one-out accuracy over a database for each (measure, k) pair.
    Evaluate(EvaluateArgs),
    /// Recursive feature elimination on one database.
    Rfe(RfeArgs),
    /// Score attributes by how often RFE keeps them across datasets, measures and k.
    ScoreAttributes(ScoreArgs),
    /// Summaries of one structure's contact graph or of a database.
    Stats(StatsArgs),
    /// Single-threaded per-phase timing on synthetic query chains.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Distance measure: euclidean, std-euclidean, cosine, manhattan, correlation,
    /// minkowski, chebyshev, canberra or braycurtis.
    #[arg(long, default_value = "std-euclidean")]
    distance: MeasureKind,
    /// Order p of the minkowski measure.
    #[arg(long, default_value_t = 2.0, value_parser = parse_order)]
    minkowski_p: f64,
}

#[derive(Debug, Args)]
struct BuildDbArgs {
    /// CSV manifest with `path` and `label` columns; paths are relative to the manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Output database file.
    #[arg(long)]
    out: PathBuf,
    /// Contact threshold in angstroms.
    #[arg(long, default_value_t = 7.0, value_parser = parse_delta)]
    delta: f64,
    /// Worker threads for descriptor computation.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    jobs: usize,
    /// Write a CSV build report listing added and failed structures.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AddArgs {
    /// Existing database file.
    #[arg(long)]
    db: PathBuf,
    /// CSV manifest of the structures to add.
    #[arg(long)]
    manifest: PathBuf,
    /// Output database file; defaults to rewriting `--db` in place.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for descriptor computation.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Reference database file.
    #[arg(long)]
    db: PathBuf,
    /// Query PDB file, or a directory whose .pdb/.ent files are all classified.
    #[arg(long)]
    query: PathBuf,
    /// Number of nearest neighbors.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    k: usize,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Attribute subset, e.g. `A15,A17,A12`.
    #[arg(long)]
    mask: Option<FeatureMask>,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for query descriptor computation.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    jobs: usize,
    /// Print a per-phase timing report to stderr.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Reference database file.
    #[arg(long)]
    db: PathBuf,
    /// Comma-separated list of k values.
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_positive)]
    k: Vec<usize>,
    /// Comma-separated list of distance measures.
    #[arg(long, value_delimiter = ',', default_value = "std-euclidean")]
    distance: Vec<MeasureKind>,
    /// Order p of the minkowski measure.
    #[arg(long, default_value_t = 2.0, value_parser = parse_order)]
    minkowski_p: f64,
    /// Attribute subset, e.g. `A15,A17,A12`.
    #[arg(long)]
    mask: Option<FeatureMask>,
    /// Write the accuracy table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every leave-one-out prediction to this file.
    #[arg(long)]
    per_query: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RfeArgs {
    /// Reference database file.
    #[arg(long)]
    db: PathBuf,
    /// Number of nearest neighbors.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    k: usize,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Write the elimination trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Database files, one per dataset.
    #[arg(long, num_args = 1.., required = true)]
    dbs: Vec<PathBuf>,
    /// Comma-separated list of distance measures.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "manhattan,braycurtis,std-euclidean,canberra,cosine"
    )]
    measures: Vec<MeasureKind>,
    /// Comma-separated list of k values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5", value_parser = parse_positive)]
    ks: Vec<usize>,
    /// Order p of the minkowski measure.
    #[arg(long, default_value_t = 2.0, value_parser = parse_order)]
    minkowski_p: f64,
    /// Write the score table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct StatsSource {
    /// PDB file: report the contact graph's size and component count.
    #[arg(long)]
    pdb: Option<PathBuf>,
    /// Database file: report per-attribute statistics.
    #[arg(long)]
    db: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    source: StatsSource,
    /// Contact threshold in angstroms (with `--pdb`).
    #[arg(long, default_value_t = 7.0, value_parser = parse_delta)]
    delta: f64,
    /// Write the contact graph in dump format to this file (with `--pdb`).
    #[arg(long, requires = "pdb")]
    dump_graph: Option<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "reference")]
struct BenchReference {
    /// Reference database to classify against.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Use this many random reference rows instead of a database file.
    #[arg(long, value_parser = parse_positive)]
    synthetic_rows: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    reference: BenchReference,
    /// Number of synthetic query chains.
    #[arg(long, default_value_t = 100, value_parser = parse_positive)]
    queries: usize,
    /// Residues per query chain.
    #[arg(long, default_value_t = 150, value_parser = parse_positive)]
    residues: usize,
    /// Seed for query chains and synthetic rows.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Contact threshold in angstroms for the query graphs; defaults to the
    /// database's threshold, or 7 with `--synthetic-rows`.
    #[arg(long, value_parser = parse_delta)]
    delta: Option<f64>,
    /// Number of nearest neighbors.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    k: usize,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Accepted for symmetry with other subcommands; bench always reports timing.
    #[arg(long)]
    timing: bool,
    /// Write the timing report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    resgraph::GraphBuildParams::new(v).map(|_| v).map_err(|e| e.to_string())
}

fn parse_order(s: &str) -> Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    resgraph::DistanceMeasure::minkowski(p).map(|_| p).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
