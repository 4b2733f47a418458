//! Thin command-line front end: flag parsing and report output only; all
//! experiment logic lives in `sumbis::cli`.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use sumbis::cli::{self, Command as Experiment, ConfigFile, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(
    name = "sumbis",
    version,
    about = "Exact sum-product, incidence, and bisector-geometry experiments with built-in verification"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// odd prime modulus base
    #[arg(long, global = true)]
    p: Option<u64>,

    /// modulus exponent (the plane modules use k = 3)
    #[arg(long, global = true)]
    k: Option<u32>,

    /// seed for every sampled quantity; identical seeds reproduce reports
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// worker threads (0 = all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// abort before any enumeration larger than this many tuples
    #[arg(long = "budget-tuples", global = true)]
    budget_tuples: Option<u64>,

    /// wall-clock budget in seconds
    #[arg(long = "budget-seconds", global = true)]
    budget_seconds: Option<u64>,

    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// report format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// JSON config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// size knob: family sizes, grid sizes, sample counts
    #[arg(long, global = true)]
    n: Option<u64>,

    /// base point pair for the census: "auto" or "x11,x12,x21,x22"
    #[arg(long, global = true)]
    x: Option<String>,

    /// distance parameter for the pair graph and circle Cayley graph
    #[arg(long, global = true)]
    d: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sum-set/product-set reports and energy checks over generated families
    Sumprod,
    /// Grid constructions, slope families, collinear triples, point-plane counts
    Incidence,
    /// The Z/p^3 lemma suite: square roots, circles, lines, isometries
    Bisectors,
    /// The reflection-pair census and its N(x,y) histogram
    Conjecture,
    /// Pair-graph build, A^2 decomposition, eigenvalues, mixing
    Spectral,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let args = Args::parse();
    let mut cfg = ExperimentConfig::default();

    if let Some(path) = &args.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                return 1;
            }
        };
        let file: ConfigFile = match serde_json::from_str(&text) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: bad config {}: {e}", path.display());
                return 1;
            }
        };
        cfg.apply_file(&file);
    }

    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = args.budget_tuples {
        cfg.budget_tuples = v;
    }
    if let Some(v) = args.budget_seconds {
        cfg.budget_seconds = Some(v);
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }
    if let Some(v) = args.format {
        cfg.format = match v {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.x {
        cfg.x = v;
    }
    if let Some(v) = args.d {
        cfg.d = v;
    }

    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .ok();
    }

    let command = match args.command {
        Cmd::Sumprod => Experiment::SumProd,
        Cmd::Incidence => Experiment::Incidence,
        Cmd::Bisectors => Experiment::Bisectors,
        Cmd::Conjecture => Experiment::Conjecture,
        Cmd::Spectral => Experiment::Spectral,
    };

    match cli::run(command, &cfg) {
        Ok(doc) => {
            let rendered = cli::render(&doc, cfg.format);
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => println!("{rendered}"),
            }
            if doc.all_passed() {
                0
            } else {
                for c in doc.checks.iter().filter(|c| !c.verdict) {
                    eprintln!("check failed: {} (lhs {}, rhs {})", c.name, c.lhs, c.rhs);
                }
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
