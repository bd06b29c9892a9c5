// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graftfuzz_core::coverage::CoverageReport;
use graftfuzz_core::driver::{load_corpus, Budget, FuzzConfig, Fuzzer, PassSelection, BUILTIN_REFERENCE};
use graftfuzz_core::matching::MatchConfig;
use graftfuzz_core::mutate::{mutate_once, MutateOptions, DEFAULT_MAX_SITES};
use graftfuzz_core::syntax::{parse, print};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mutation fuzzer for generic-syntax MLIR.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fuzzing loop against an opt-style target.
    Fuzz(FuzzArgs),
    /// Print dialect and dialect-pair coverage of a directory of seeds.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Apply one mutation from a donor file to a recipient file.
    Mutate {
        #[arg(long)]
        donor: PathBuf,
        #[arg(long)]
        recipient: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        matching: MatchArgs,
        #[arg(long)]
        no_parameterization: bool,
        /// Also print the chosen site, binding and parameterized mutation.
        #[arg(long, short)]
        verbose: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct MatchArgs {
    /// Ancestors compared when matching a site.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Left siblings compared.
    #[arg(long, default_value_t = 4)]
    l: usize,
    /// Right siblings compared.
    #[arg(long, default_value_t = 4)]
    r: usize,
}

impl From<MatchArgs> for MatchConfig {
    fn from(m: MatchArgs) -> Self {
        MatchConfig { k: m.k, l: m.l, r: m.r }
    }
}

#[derive(Args)]
struct FuzzArgs {
    /// Directory of `.mlir` seed files.
    #[arg(long)]
    seeds: PathBuf,
    /// Target executable, or `builtin:reference`.
    #[arg(long, default_value = BUILTIN_REFERENCE)]
    target: String,
    /// Pass file listing one pass per line with its options.
    #[arg(long)]
    passes: Option<PathBuf>,
    /// Passes per pipeline.
    #[arg(long = "p", default_value_t = 5)]
    passes_per_pipeline: usize,
    #[command(flatten)]
    matching: MatchArgs,
    /// Iteration budget.
    #[arg(long, conflicts_with = "time")]
    iters: Option<u64>,
    /// Time budget in seconds.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where crashes, valid mutants and reports are written.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_parameterization: bool,
    /// `heuristic` or `random`.
    #[arg(long, default_value = "heuristic")]
    pass_selection: PassSelection,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Per-execution timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SITES)]
    max_sites: usize,
}

fn seconds(s: f64, what: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(s).ok().filter(|d| !d.is_zero()).with_context(|| format!("{what} must be a positive number of seconds"))
}

fn fuzz(a: FuzzArgs) -> Result<()> {
    let budget = match (a.iters, a.time) {
        (_, Some(t)) => Budget::Time(seconds(t, "--time")?),
        (Some(n), None) => Budget::Iterations(n),
        (None, None) => Budget::Iterations(1000),
    };
    let config = FuzzConfig {
        seed_dir: a.seeds,
        target: a.target,
        passes: a.passes,
        passes_per_pipeline: a.passes_per_pipeline,
        match_config: a.matching.into(),
        budget,
        rng_seed: a.seed,
        out_dir: a.out,
        parameterization: !a.no_parameterization,
        pass_selection: a.pass_selection,
        timeout: seconds(a.timeout, "--timeout")?,
        workers: a.workers,
        max_sites: a.max_sites,
        ..FuzzConfig::default()
    };
    let report = Fuzzer::from_config(config)?.run()?;
    print!("{}", report.to_text());
    Ok(())
}

fn analyze(corpus: PathBuf, json: bool) -> Result<()> {
    let corpus = load_corpus(&corpus)?;
    let mut cov = CoverageReport::default();
    for seed in &corpus.seeds {
        cov.accumulate(&seed.tree);
    }
    if json {
        println!("{}", cov.to_json());
    } else {
        println!("{} seeds from {} files", corpus.len(), corpus.files);
        print!("{cov}");
    }
    Ok(())
}

fn read_tree(path: &PathBuf) -> Result<graftfuzz_core::syntax::SyntaxTree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match Cli::parse().command {
        Command::Fuzz(a) => fuzz(a),
        Command::Analyze { corpus, json } => analyze(corpus, json),
        Command::Mutate { donor, recipient, seed, matching, no_parameterization, verbose } => (|| {
            let donor = read_tree(&donor)?;
            let recipient = read_tree(&recipient)?;
            let opts = MutateOptions {
                match_config: matching.into(),
                parameterization: !no_parameterization,
                ..MutateOptions::default()
            };
            let m = match mutate_once(&donor, &recipient, &opts, &mut ChaCha8Rng::seed_from_u64(seed)) {
                Ok(m) => m,
                Err(e) => bail!("no mutant: {e}"),
            };
            if verbose {
                eprint!("{}", m.mutation.debug_dump());
                eprintln!("site: {}", m.site);
                for (p, v) in m.binding.iter() {
                    eprintln!("{p} = {}", v.lexeme);
                }
            }
            print!("{}", print(&m.tree));
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
