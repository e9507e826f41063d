use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use m2galois::cli::{
    fetch_newforms, json_files, newform_source, read_text, run_find, run_refine, write_text, CliError, RunConfig,
    BASE_URL_ENV,
};
use m2galois::finder::{render_text, ListKind};
use m2galois::heckepoly::{default_primes, load_packet_files, PacketFile};
use m2galois::matf2k::load_operators;
use m2galois::newforms::{serialize_db, RemoteClient, DEFAULT_BASE_URL};
use m2galois::sharbly::{coset_reps, validate_encoding, CycleEncoding};

#[derive(Parser)]
#[command(name = "m2galois", version, about = "Mod-2 Hecke eigenpackets and their apparently attached Galois representations")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListArg {
    Chis,
    Chib,
    Both,
}

impl ListArg {
    fn kinds(self) -> Vec<ListKind> {
        match self {
            ListArg::Chis => vec![ListKind::ChiS],
            ListArg::Chib => vec![ListKind::ChiB],
            ListArg::Both => vec![ListKind::ChiS, ListKind::ChiB],
        }
    }
}

#[derive(Args)]
struct Selection {
    /// Comma-separated levels to process.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    /// Comma-separated primes overriding the per-level default set.
    #[arg(long = "ell-set", value_delimiter = ',')]
    ell_set: Option<Vec<u64>>,
}

#[derive(Args)]
struct FindInputs {
    /// Eigenpacket file, or a directory of them.
    #[arg(long)]
    packets: Option<PathBuf>,
    /// Operator-matrix file, or a directory of them; refined first.
    #[arg(long, conflicts_with = "packets")]
    matrices: Option<PathBuf>,
    /// Local newform database.
    #[arg(long)]
    newforms: Option<PathBuf>,
    /// Cache directory; enables fetching missing newform data.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    list: ListArg,
}

#[derive(Subcommand)]
enum Command {
    /// Refine operator matrices into simultaneous eigenpackets.
    Refine {
        #[arg(long)]
        matrices: PathBuf,
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the finder and write a JSON report.
    Find {
        #[command(flatten)]
        inputs: FindInputs,
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the finder and write a text report.
    Report {
        #[command(flatten)]
        inputs: FindInputs,
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write single-coset representatives of T(ell, k).
    CosetReps {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a 1-sharbly cycle encoding.
    ValidateCycle {
        #[arg(long)]
        cycle: PathBuf,
        #[arg(long)]
        level: u64,
    },
    /// Download newform data for the given levels into one database file.
    FetchNewforms {
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn refine_all(path: &Path, config: &RunConfig) -> Result<Vec<PacketFile>, CliError> {
    let mut files = Vec::new();
    for p in json_files(path)? {
        let (ops, mats) = load_operators(&p)?;
        if !config.wants(ops.level) {
            continue;
        }
        let out = run_refine(&ops, &mats, &config.primes_for(ops.level))?;
        for w in &out.warnings {
            eprintln!("warning: {w}");
        }
        files.push(out.file);
    }
    files.sort_by_key(|f| f.level);
    Ok(files)
}

fn load_inputs(inputs: &FindInputs, config: &RunConfig) -> Result<Vec<PacketFile>, CliError> {
    if let Some(m) = &inputs.matrices {
        return refine_all(m, config);
    }
    let Some(p) = &inputs.packets else {
        return Ok(Vec::new());
    };
    let mut files = Vec::new();
    for f in json_files(p)? {
        files.extend(load_packet_files(&f)?);
    }
    Ok(files)
}

fn config(sel: &Selection, list: Option<ListArg>, jobs: Option<usize>) -> RunConfig {
    RunConfig {
        levels: sel.levels.clone(),
        ell_set: sel.ell_set.clone(),
        lists: list.map(ListArg::kinds).unwrap_or_default(),
        jobs,
    }
}

fn all_primes(files: &[PacketFile], config: &RunConfig) -> Vec<u64> {
    let mut primes: Vec<u64> = files.iter().flat_map(|f| config.primes_for(f.level)).collect();
    primes.sort_unstable();
    primes.dedup();
    primes
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Refine { matrices, sel, out } => {
            let cfg = config(&sel, None, cli.jobs);
            let files = refine_all(&matrices, &cfg)?;
            write_text(&out, &serde_json::to_string_pretty(&files)?)
        }
        Command::Find { inputs, sel, out } => {
            let cfg = config(&sel, Some(inputs.list), cli.jobs);
            let files = load_inputs(&inputs, &cfg)?;
            let source = newform_source(inputs.newforms.as_deref(), inputs.cache.as_deref(), &all_primes(&files, &cfg))?;
            let reports = run_find(&files, &cfg, &source)?;
            emit(out.as_ref(), &(serde_json::to_string_pretty(&reports)? + "\n"))
        }
        Command::Report { inputs, sel, out } => {
            let cfg = config(&sel, Some(inputs.list), cli.jobs);
            let files = load_inputs(&inputs, &cfg)?;
            let source = newform_source(inputs.newforms.as_deref(), inputs.cache.as_deref(), &all_primes(&files, &cfg))?;
            let reports = run_find(&files, &cfg, &source)?;
            emit(out.as_ref(), &render_text(&reports))
        }
        Command::CosetReps { ell, k, out } => {
            let set = coset_reps(ell, k)?;
            emit(out.as_ref(), &(serde_json::to_string(&set)? + "\n"))
        }
        Command::ValidateCycle { cycle, level } => {
            let enc: CycleEncoding = serde_json::from_str(&read_text(&cycle)?)?;
            let violations = validate_encoding(&enc, level);
            if violations.is_empty() {
                println!("ok");
            }
            for v in violations {
                println!("{v}");
            }
            Ok(())
        }
        Command::FetchNewforms { sel, cache, out } => {
            let levels = sel.levels.clone().unwrap_or_default();
            let mut primes: Vec<u64> = sel
                .ell_set
                .clone()
                .unwrap_or_else(|| levels.iter().flat_map(|&n| default_primes(n)).collect());
            primes.sort_unstable();
            primes.dedup();
            let base = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
            let client = RemoteClient::new(&base, &cache, &primes);
            let db = fetch_newforms(&levels, &client)?;
            write_text(&out, &serialize_db(&db))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
