//! `setexpand`: build embedding caches, expand seed sets, and evaluate.
//!
//! Exit codes: 0 success, 1 user error, 2 infrastructure error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use setexpand_core::corpus::{build_cache, load_cache, write_store, Vocabulary};
use setexpand_core::eval::{
    evaluate, load_queries, write_queries, PlantedClusters, DEFAULT_CUTOFFS,
};
use setexpand_core::expansion::{expand, resolve_seeds, ExpansionConfig};
use setexpand_core::lm::{CachedLm, FixtureLm, LmClient, RemoteConfig, RemoteLm};
use setexpand_core::selection::AggregationMode;
use setexpand_core::Error;

#[derive(Parser)]
#[command(
    name = "setexpand",
    version,
    about = "Class-guided entity set expansion"
)]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr; `evaluate` also prints per-query APs.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed every vocabulary mention in a corpus (one sentence per line).
    BuildCache {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lm: LmArgs,
    },
    /// Expand a seed set and print the ranked entities.
    Expand {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        lm: LmArgs,
        #[command(flatten)]
        params: ExpansionArgs,
        /// Write one JSON record per iteration here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Seed entity surfaces.
        #[arg(required = true, num_args = 3..)]
        seeds: Vec<String>,
    },
    /// Run every query in a query file and report MAP@10/20/50.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        lm: LmArgs,
        #[command(flatten)]
        params: ExpansionArgs,
        #[arg(long)]
        queries: PathBuf,
    },
    /// Write a planted-cluster benchmark (vocabulary, cache, fixture, queries).
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        /// Plant decoys next to the first cluster.
        #[arg(long)]
        adversarial: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    cache: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LmArgs {
    /// JSON fixture tables for the deterministic LM.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Base URL of the LM service.
    #[arg(long)]
    lm_endpoint: Option<String>,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    beam_width: usize,
    #[arg(long, default_value_t = 3)]
    max_class_len: usize,
    #[arg(long, default_value_t = 30)]
    class_samples: usize,
    #[arg(long, default_value_t = 18)]
    entity_samples: usize,
    #[arg(long, default_value_t = 50)]
    target_size: usize,
    #[arg(long, default_value_t = 10)]
    batch_size: usize,
    /// mrr or combsum.
    #[arg(long, default_value_t = AggregationMode::Mrr)]
    agg: AggregationMode,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Rank without negative class names.
    #[arg(long)]
    no_filter: bool,
}

impl ExpansionArgs {
    fn config(&self) -> ExpansionConfig {
        ExpansionConfig {
            target_size: self.target_size,
            k: self.k,
            beam_width: self.beam_width,
            max_class_len: self.max_class_len,
            class_samples: self.class_samples,
            entity_samples: self.entity_samples,
            batch_size: self.batch_size,
            agg_mode: self.agg,
            rng_seed: self.rng_seed,
            negative_gate: !self.no_filter,
            ..ExpansionConfig::default()
        }
    }
}

enum Failure {
    Usage {
        subcommand: &'static str,
        message: String,
    },
    Core(Error),
    Output(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Output(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn require_file(path: &Path, flag: &str, subcommand: &'static str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage {
            subcommand,
            message: format!("--{flag}: no such file: {}", path.display()),
        })
    }
}

fn open_lm(args: &LmArgs, subcommand: &'static str) -> CliResult<CachedLm<Box<dyn LmClient>>> {
    let inner: Box<dyn LmClient> = match (&args.fixture, &args.lm_endpoint) {
        (Some(path), None) => {
            require_file(path, "fixture", subcommand)?;
            Box::new(FixtureLm::from_json_file(path)?)
        }
        (None, Some(endpoint)) => Box::new(RemoteLm::new(RemoteConfig::new(endpoint.as_str()))),
        _ => unreachable!("clap enforces exactly one backend"),
    };
    Ok(CachedLm::new(inner))
}

struct Loaded {
    vocab: Vocabulary,
    store: setexpand_core::corpus::EmbeddingStore,
}

fn load_data(data: &DataArgs, lm: &dyn LmClient, subcommand: &'static str) -> CliResult<Loaded> {
    require_file(&data.vocab, "vocab", subcommand)?;
    require_file(&data.cache, "cache", subcommand)?;
    let vocab = Vocabulary::load(&data.vocab)?;
    let loaded = load_cache(&data.cache, Some(lm.dim()?))?;
    loaded.header.check_vocabulary(&vocab)?;
    let absent = vocab.len().saturating_sub(loaded.store.len());
    if absent > 0 {
        log::warn!("{absent} vocabulary entities have no occurrences and will not be ranked");
    }
    Ok(Loaded {
        vocab,
        store: loaded.store,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::BuildCache {
            vocab,
            corpus,
            out: cache,
            lm,
        } => {
            require_file(&vocab, "vocab", "build-cache")?;
            require_file(&corpus, "corpus", "build-cache")?;
            let lm = open_lm(&lm, "build-cache")?;
            let vocab = Vocabulary::load(&vocab)?;
            let summary = build_cache(&corpus, &vocab, &lm, &cache)?;
            writeln!(
                out,
                "entities\t{}\noccurrences\t{}\ndim\t{}\nsentences\t{}\nabsent\t{}",
                summary.entities_found,
                summary.occurrences,
                summary.dim,
                summary.sentences,
                summary.absent.len()
            )?;
        }
        Command::Expand {
            data,
            lm,
            params,
            trace,
            seeds,
        } => {
            let lm = open_lm(&lm, "expand")?;
            let loaded = load_data(&data, &lm, "expand")?;
            let seeds = resolve_seeds(&seeds, &loaded.vocab)?;
            let cfg = params.config();
            let outcome = expand(&seeds, &cfg, &loaded.vocab, &loaded.store, &lm)?;
            for (i, entry) in outcome
                .ranking
                .entries()
                .iter()
                .take(cfg.target_size)
                .enumerate()
            {
                writeln!(
                    out,
                    "{}\t{}\t{:.6}",
                    i + 1,
                    loaded.vocab.surface(entry.item),
                    entry.score
                )?;
            }
            if let Some(path) = trace {
                let file = File::create(&path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                let mut w = BufWriter::new(file);
                for record in &outcome.trace {
                    writeln!(w, "{}", record.to_json_line())?;
                }
                w.flush()?;
            }
        }
        Command::Evaluate {
            data,
            lm,
            params,
            queries,
        } => {
            require_file(&queries, "queries", "evaluate")?;
            let queries = load_queries(&queries)?;
            if queries.is_empty() {
                return Err(Error::InvalidArgument("query file contains no queries".into()).into());
            }
            let lm = open_lm(&lm, "evaluate")?;
            let loaded = load_data(&data, &lm, "evaluate")?;
            let report = evaluate(
                &queries,
                &params.config(),
                &loaded.vocab,
                &loaded.store,
                &lm,
                &DEFAULT_CUTOFFS,
            )?;
            if cli.verbose {
                for q in &report.queries {
                    let aps: Vec<String> = q
                        .average_precision
                        .values()
                        .map(|v| format!("{v:.3}"))
                        .collect();
                    writeln!(out, "{}\t{}", q.class, aps.join("\t"))?;
                }
            }
            for (k, map) in &report.map {
                writeln!(out, "MAP@{k}\t{map:.3}")?;
            }
        }
        Command::Synth {
            out_dir,
            adversarial,
            seed,
        } => {
            let mut cfg = if adversarial {
                PlantedClusters::adversarial()
            } else {
                PlantedClusters::default()
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let bench = cfg.generate()?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            let vocab_path = out_dir.join("vocab.txt");
            let surfaces: Vec<&str> = bench.vocab.iter().map(|(_, s)| s).collect();
            std::fs::write(&vocab_path, surfaces.join("\n") + "\n").map_err(|e| Error::Io {
                path: vocab_path.clone(),
                source: e,
            })?;
            write_store(&bench.store, &bench.vocab, out_dir.join("cache.bin"))?;
            let fixture_path = out_dir.join("fixture.json");
            let fixture = serde_json::to_string_pretty(&bench.tables).map_err(Error::from)?;
            std::fs::write(&fixture_path, fixture + "\n").map_err(|e| Error::Io {
                path: fixture_path.clone(),
                source: e,
            })?;
            write_queries(&bench.queries, out_dir.join("queries.json"))?;
            writeln!(
                out,
                "wrote {} entities and {} queries to {}",
                bench.vocab.len(),
                bench.queries.len(),
                out_dir.display()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage {
            subcommand,
            message,
        }) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(subcommand)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            eprintln!("error: {message}\n\n{usage}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infrastructure() { 2 } else { 1 })
        }
        Err(Failure::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Output(e)) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(2)
        }
    }
}
