//! Command-line interface. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 remote error.

use std::ffi::OsString;
use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use factdb_core::{render_answer, Database};
use factdb_datagen::write_dataset;
use factdb_ssg::{build_index, lexical_encoder};

use crate::config::AppConfig;
use crate::error::EngineError;
use crate::pipeline::{resolve_query, run_query, run_split_opts, RunOptions};
use crate::stub::{serve, SpjBehavior, StubOptions};

#[derive(Parser, Debug)]
#[command(
    name = "factdb",
    version,
    about = "Query natural-language fact databases: generate corpora, build indexes, answer queries, evaluate pipelines."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every pipeline-running subcommand.
#[derive(Args, Debug, Default, Clone)]
struct CommonOpts {
    /// JSON config file (see `factdb config --print-defaults`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// SSG mode: oracle | lexical | tfidf-k | remote.
    #[arg(long)]
    mode: Option<String>,
    /// SPJ mode: oracle | remote.
    #[arg(long)]
    spj: Option<String>,
    /// Retrieval mode: retrieved | perfectir.
    #[arg(long)]
    retrieval: Option<String>,
    /// Override the SSG score threshold tau.
    #[arg(long)]
    tau: Option<f64>,
    /// Override the seed (pipeline and generation).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 = library default. Results are identical for any
    /// value.
    #[arg(long)]
    workers: Option<usize>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<AppConfig, EngineError> {
        let mut config = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        if let Some(mode) = &self.mode {
            config.pipeline.ssg_mode = mode.parse()?;
        }
        if let Some(mode) = &self.spj {
            config.pipeline.spj_mode = mode.parse()?;
        }
        if let Some(mode) = &self.retrieval {
            config.pipeline.retrieval_mode = mode.parse()?;
        }
        if let Some(tau) = self.tau {
            config.pipeline.ssg.tau = tau;
        }
        if let Some(seed) = self.seed {
            config.pipeline.seed = seed;
            config.generation.seed = seed;
        }
        if let Some(workers) = self.workers {
            config.pipeline.worker_count = workers;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a synthetic dataset tree (byte-identical for a fixed seed).
    Generate {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory.
        #[arg(long, default_value = "dataset")]
        out: PathBuf,
        /// Keep only these DB sizes from the configured table, e.g. "25,100".
        #[arg(long)]
        sizes: Option<String>,
        /// Override the train DB count for every kept size.
        #[arg(long)]
        train: Option<u32>,
        /// Override the valid DB count for every kept size.
        #[arg(long)]
        valid: Option<u32>,
        /// Override the test DB count for every kept size.
        #[arg(long)]
        test: Option<u32>,
        /// Override target queries per DB for every kept size.
        #[arg(long)]
        queries: Option<u32>,
    },
    /// Build and persist the dense vector index for a fact file.
    Index {
        /// Fact file (JSON lines, one fact per line).
        #[arg(long)]
        db: PathBuf,
        /// Output path; defaults to the fact file with extension .idx.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer one natural-language question against a fact file.
    Query {
        #[command(flatten)]
        common: CommonOpts,
        /// Fact file (JSON lines).
        #[arg(long)]
        db: PathBuf,
        /// The question, e.g. "How many people work for Yale Law School?".
        question: String,
        /// Print {"answer": ...} JSON instead of the bare answer.
        #[arg(long)]
        json: bool,
        /// Print the full query trace to stderr as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Interactive loop: one question per line, answer per line.
    Repl {
        #[command(flatten)]
        common: CommonOpts,
        /// Fact file (JSON lines).
        #[arg(long)]
        db: PathBuf,
    },
    /// Evaluate a split and print the scored report.
    Eval {
        #[command(flatten)]
        common: CommonOpts,
        /// Dataset directory (size-N/ subdirs) or a single split file.
        #[arg(long)]
        data: PathBuf,
        /// Split name when `--data` is a directory.
        #[arg(long, default_value = "test")]
        split: String,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-query traces to this path as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the report as JSON instead of the text table.
        #[arg(long)]
        json: bool,
        /// Print the per-size scaling table as CSV instead of the text table.
        #[arg(long)]
        csv: bool,
    },
    /// Latency/accuracy scaling table per DB size (CSV on stdout).
    Bench {
        #[command(flatten)]
        common: CommonOpts,
        /// Dataset directory or a single split file.
        #[arg(long)]
        data: PathBuf,
        /// Split name when `--data` is a directory.
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Serve the loopback encoder + SPJ stub (for the remote modes).
    ServeStub {
        /// Port to bind on 127.0.0.1; 0 picks an ephemeral port.
        #[arg(long, default_value_t = 0)]
        port: u16,
        /// Embedding dimension served by /encode.
        #[arg(long, default_value_t = factdb_ssg::DEFAULT_DIM)]
        dim: usize,
        /// /spj behavior: null | garbage.
        #[arg(long, default_value = "null")]
        spj_behavior: String,
    },
    /// Print configuration as JSON.
    Config {
        /// Print the built-in defaults.
        #[arg(long)]
        print_defaults: bool,
        /// Print this file's effective (validated) configuration instead.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Entry point used by `main`; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Parse and dispatch an explicit argument vector (testable entry point).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_sizes(raw: &str) -> Result<std::collections::BTreeSet<u32>, EngineError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| EngineError::Usage(format!("bad size {s:?} in --sizes")))
        })
        .collect()
}

fn dispatch(cmd: Cmd) -> Result<(), EngineError> {
    match cmd {
        Cmd::Generate { common, out, sizes, train, valid, test, queries } => {
            let mut gen = common.resolve()?.generation;
            if let Some(raw) = &sizes {
                let keep = parse_sizes(raw)?;
                let known: std::collections::BTreeSet<u32> =
                    gen.sizes.iter().map(|s| s.db_size).collect();
                for size in &keep {
                    if !known.contains(size) {
                        return Err(EngineError::Usage(format!(
                            "size {size} is not configured (available: {known:?})"
                        )));
                    }
                }
                gen.sizes.retain(|s| keep.contains(&s.db_size));
            }
            for spec in &mut gen.sizes {
                if let Some(n) = train {
                    spec.train = n;
                }
                if let Some(n) = valid {
                    spec.valid = n;
                }
                if let Some(n) = test {
                    spec.test = n;
                }
                if let Some(n) = queries {
                    spec.queries_per_db = n;
                }
            }
            gen.validate()?;
            let stats = write_dataset(&gen, &out)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(())
        }
        Cmd::Index { db, out } => {
            let database = Database::read_jsonl(&db)?;
            let encoder = lexical_encoder(&database);
            let index = build_index(&database, &encoder)?;
            let out = out.unwrap_or_else(|| db.with_extension("idx"));
            index.save(&out)?;
            println!(
                "index written to {} ({} rows, dim {})",
                out.display(),
                index.num_rows(),
                index.dim()
            );
            Ok(())
        }
        Cmd::Query { common, db, question, json, trace } => {
            let config = common.resolve()?;
            let database = Database::read_jsonl(&db)?;
            let query = resolve_query(&database, &config.generation.pack, &question)?;
            let (answer, query_trace) = run_query(&database, &query, &config.pipeline)?;
            if trace {
                eprintln!("{}", serde_json::to_string_pretty(&query_trace)?);
            }
            if json {
                println!("{}", serde_json::json!({ "answer": render_answer(&answer) }));
            } else {
                println!("{}", render_answer(&answer));
            }
            Ok(())
        }
        Cmd::Repl { common, db } => {
            let config = common.resolve()?;
            let database = Database::read_jsonl(&db)?;
            let interactive = std::io::stdin().is_terminal();
            if interactive {
                eprintln!("{} facts loaded; ask a question, or 'quit' to leave.", database.len());
            }
            let stdin = std::io::stdin();
            for line in stdin.lock().lines() {
                let line = line?;
                let question = line.trim();
                if question.is_empty() {
                    continue;
                }
                if matches!(question, "quit" | "exit" | ":q") {
                    break;
                }
                match resolve_query(&database, &config.generation.pack, question)
                    .and_then(|q| run_query(&database, &q, &config.pipeline))
                {
                    Ok((answer, _)) => println!("{}", render_answer(&answer)),
                    Err(e) => eprintln!("error: {e}"),
                }
            }
            Ok(())
        }
        Cmd::Eval { common, data, split, out, trace, json, csv } => {
            let config = common.resolve()?;
            let opts = RunOptions { split, collect_traces: trace.is_some() };
            let outcome = run_split_opts(&data, &config.pipeline, &opts)?;
            if let Some(path) = &trace {
                let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
                for t in &outcome.traces {
                    serde_json::to_writer(&mut file, t)?;
                    file.write_all(b"\n")?;
                }
                file.flush()?;
            }
            if let Some(path) = &out {
                std::fs::write(path, outcome.report.to_json())?;
            }
            if json {
                println!("{}", outcome.report.to_json());
            } else if csv {
                print!("{}", outcome.report.to_csv());
            } else {
                print!("{}", outcome.report.to_text());
            }
            Ok(())
        }
        Cmd::Bench { common, data, split } => {
            let config = common.resolve()?;
            let opts = RunOptions { split, collect_traces: false };
            let outcome = run_split_opts(&data, &config.pipeline, &opts)?;
            print!("{}", outcome.report.to_csv());
            Ok(())
        }
        Cmd::ServeStub { port, dim, spj_behavior } => {
            if dim < 2 {
                return Err(EngineError::Usage("stub dim must be at least 2".into()));
            }
            let opts = StubOptions { dim, spj: spj_behavior.parse::<SpjBehavior>()? };
            let listener = std::net::TcpListener::bind(("127.0.0.1", port))?;
            println!("listening on {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            serve(listener, opts)?;
            Ok(())
        }
        Cmd::Config { print_defaults, config } => {
            let resolved = match (&config, print_defaults) {
                (Some(path), false) => AppConfig::load(path)?,
                _ => AppConfig::default(),
            };
            println!("{}", resolved.to_pretty_json());
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flags_exit_one() {
        assert_eq!(run_from(["factdb", "--bogus"]), 1);
        assert_eq!(run_from(["factdb", "definitely-not-a-subcommand"]), 1);
        assert_eq!(run_from(["factdb", "eval"]), 1); // missing required --data
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_from(["factdb", "--help"]), 0);
        assert_eq!(run_from(["factdb", "--version"]), 0);
        assert_eq!(run_from(["factdb", "query", "--help"]), 0);
    }

    #[test]
    fn config_subcommand_prints_defaults() {
        assert_eq!(run_from(["factdb", "config", "--print-defaults"]), 0);
    }

    #[test]
    fn common_opts_apply_overrides() {
        let common = CommonOpts {
            mode: Some("tfidf-4".into()),
            spj: Some("oracle".into()),
            retrieval: Some("perfectir".into()),
            tau: Some(0.6),
            seed: Some(99),
            workers: Some(2),
            config: None,
        };
        let config = common.resolve().unwrap();
        assert_eq!(config.pipeline.ssg_mode, crate::config::SsgMode::TfIdf { k: 4 });
        assert_eq!(config.pipeline.retrieval_mode, crate::config::RetrievalMode::PerfectIr);
        assert_eq!(config.pipeline.ssg.tau, 0.6);
        assert_eq!(config.pipeline.seed, 99);
        assert_eq!(config.generation.seed, 99);
        assert_eq!(config.pipeline.worker_count, 2);

        let bad = CommonOpts { mode: Some("psychic".into()), ..CommonOpts::default() };
        assert!(matches!(bad.resolve(), Err(EngineError::Usage(_))));
    }

    #[test]
    fn sizes_parse_and_reject_garbage() {
        assert_eq!(parse_sizes("25, 100").unwrap().len(), 2);
        assert!(parse_sizes("25,banana").is_err());
    }

    #[test]
    fn missing_data_path_is_a_data_error() {
        assert_eq!(run_from(["factdb", "eval", "--data", "/nonexistent/dir"]), 2);
        assert_eq!(
            run_from(["factdb", "query", "--db", "/nonexistent/facts.jsonl", "Who?"]),
            2
        );
    }
}
