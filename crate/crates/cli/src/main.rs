//! `macfb`: rate regions, reduction checks and coding simulations for the
//! two-user MAC with state information and feedback.

mod doc;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macfb_core::hull::hull_area;
use macfb_core::prob::entropy_of;
use macfb_core::region::DEFAULT_SEED;
use macfb_core::sim::CodeParams;
use macfb_core::{
    check_reductions, run_simulation, search_theorem, Cardinalities, Causality, Feedback,
    SchemeKind, SearchParams, Theorem,
};
use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Size(String),
    /// A reduction check exceeded its tolerance.
    Identity(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Size(m) | CliError::Identity(m) => f.write_str(m),
        }
    }
}

impl From<macfb_core::Error> for CliError {
    fn from(e: macfb_core::Error) -> Self {
        match e {
            macfb_core::Error::Size(_) => CliError::Size(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Size(_) => 2,
            CliError::Identity(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "macfb", version, about = "Rate regions and coding simulations for the state-dependent MAC with feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a region, write its points as CSV and print the hull as JSON.
    Region(RegionArgs),
    /// Monte Carlo simulation of the block-Markov scheme.
    Simulate(SimulateArgs),
    /// Check the identities that tie the regions together.
    Reduce(ReduceArgs),
    /// Alphabet sizes, state entropies and kernel statistics.
    Info(InfoArgs),
    /// Sample several regions with the same draws and summarize them.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SearchArgs {
    /// Channel document (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Dirichlet concentration of the sampled pmfs.
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    #[arg(long = "card-u", default_value_t = 2)]
    card_u: usize,
    #[arg(long = "card-v1", default_value_t = 2)]
    card_v1: usize,
    #[arg(long = "card-v2", default_value_t = 2)]
    card_v2: usize,
}

impl SearchArgs {
    fn params(&self) -> SearchParams {
        SearchParams {
            cards: Cardinalities { u: self.card_u, v1: self.card_v1, v2: self.card_v2 },
            samples: self.samples,
            concentration: self.concentration,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// 1-6, no-feedback or cover-leung.
    #[arg(long)]
    theorem: Theorem,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// Comma-separated region identifiers.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    theorems: Vec<Theorem>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    FullNoncausal,
    FullCausal,
    FullStrict,
    PartialNoncausal,
    PartialCausal,
    PartialStrict,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Lag of the strictly causal encoders.
    #[arg(long, default_value_t = 1)]
    lag: usize,
    #[arg(long, default_value_t = 0.0)]
    r0: f64,
    #[arg(long, default_value_t = 0.0)]
    r1: f64,
    #[arg(long, default_value_t = 0.0)]
    r2: f64,
    #[arg(long, default_value_t = 0.0)]
    rp1: f64,
    #[arg(long, default_value_t = 0.0)]
    rp2: f64,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Redraw repeated codewords inside each book.
    #[arg(long)]
    distinct_codewords: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimulateArgs {
    fn kind(&self) -> Result<SchemeKind, CliError> {
        let strict = Causality::StrictlyCausal { lag: self.lag };
        let (fb, c) = match self.kind {
            Kind::FullNoncausal => (Feedback::TwoSided, Causality::NonCausal),
            Kind::FullCausal => (Feedback::TwoSided, Causality::Causal),
            Kind::FullStrict => (Feedback::TwoSided, strict),
            Kind::PartialNoncausal => (Feedback::Partial, Causality::NonCausal),
            Kind::PartialCausal => (Feedback::Partial, Causality::Causal),
            Kind::PartialStrict => (Feedback::Partial, strict),
        };
        Ok(SchemeKind::new(fb, c)?)
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Prints `text` and, when asked, also writes it to `out`.
fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    if let Some(path) = out {
        output::write_atomic(path, text)?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_region(a: &RegionArgs) -> Result<(), CliError> {
    let d = doc::load(&a.search.config)?;
    let cloud = search_theorem(a.theorem, &d.model, &d.kernel, &a.search.params())?;
    let csv = output::region_csv(&cloud);
    let svg = a.svg.as_ref().map(|_| output::region_svg(&cloud));
    output::write_atomic(&a.out, &csv)?;
    if let (Some(path), Some(svg)) = (&a.svg, svg) {
        output::write_atomic(path, &svg)?;
    }
    print!("{}", pretty(&json!({ "theorem": a.theorem.label(), "hull": cloud.hull })));
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<(), CliError> {
    let d = doc::load(&a.search.config)?;
    let search = a.search.params();
    let mut regions = Vec::new();
    for &t in &a.theorems {
        let cloud = search_theorem(t, &d.model, &d.kernel, &search)?;
        regions.push(json!({
            "theorem": t.label(),
            "max_r1": cloud.max_r1(),
            "max_r2": cloud.max_r2(),
            "area": hull_area(&cloud.hull),
            "hull": cloud.hull,
        }));
    }
    emit(&pretty(&json!({ "seed": search.seed, "samples": search.samples, "regions": regions })), a.out.as_ref())
}

fn cmd_reduce(a: &ReduceArgs) -> Result<(), CliError> {
    let d = doc::load(&a.search.config)?;
    let report = check_reductions(&d.model, &d.kernel, &a.search.params())?;
    emit(&pretty(&report), a.out.as_ref())?;
    if !report.passed {
        let failed: Vec<&str> =
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Identity(format!("identity checks failed: {}", failed.join(", "))));
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let d = doc::load(&a.config)?;
    let p = d.scheme_or_uncoded()?;
    let params = CodeParams {
        n: a.n,
        blocks: a.blocks,
        r0: a.r0,
        r1: a.r1,
        r2: a.r2,
        rp1: a.rp1,
        rp2: a.rp2,
        epsilon: a.epsilon,
        trials: a.trials,
        seed: a.seed,
        distinct_codewords: a.distinct_codewords,
    };
    let report = run_simulation(&p, &params, &a.kind()?)?;
    emit(&pretty(&report), a.out.as_ref())
}

fn cmd_info(a: &InfoArgs) -> Result<(), CliError> {
    let d = doc::load(&a.config)?;
    let shape = d.kernel.shape();
    let slices = shape.s0 * shape.s1 * shape.s2 * shape.x1 * shape.x2;
    let rows: Vec<&[f64]> = d.kernel.table().chunks(shape.y).collect();
    let row_entropy: Vec<f64> = rows.iter().map(|r| entropy_of(r)).collect();
    let max_sum_error = rows
        .iter()
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let deterministic = d.kernel.table().iter().all(|&x| x == 0.0 || x == 1.0);
    let info = json!({
        "alphabets": {
            "s0": shape.s0, "s1": shape.s1, "s2": shape.s2,
            "x1": shape.x1, "x2": shape.x2, "y": shape.y,
        },
        "state_entropies": {
            "s0": entropy_of(&d.model.q0),
            "s1": entropy_of(&d.model.q1),
            "s2": entropy_of(&d.model.q2),
        },
        "kernel": {
            "slices": slices,
            "max_row_sum_error": max_sum_error,
            "deterministic": deterministic,
            "min_output_entropy": row_entropy.iter().copied().fold(f64::INFINITY, f64::min),
            "max_output_entropy": row_entropy.iter().copied().fold(0.0, f64::max),
        },
        "has_scheme": d.scheme.is_some(),
    });
    print!("{}", pretty(&info));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Region(a) => cmd_region(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Info(a) => cmd_info(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
