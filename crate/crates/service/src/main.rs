use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use prodclarify_core::catalog::{generate_synthetic_catalog, load_catalog, SyntheticSpec};
use prodclarify_core::retrieval::SearchEngine;
use prodclarify_core::simbench::{run_benchmark, run_conversational_detailed, BenchmarkSpec};
use prodclarify_service::config::ServiceConfig;
use prodclarify_service::{bridge_from_env, build_agent, serve};

#[derive(Parser)]
#[command(name = "prodclarify", version, about = "Clarifying product search: catalog tools, benchmark, and session server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL catalog and print per-category counts.
    Ingest {
        path: PathBuf,
        /// Write the normalized catalog here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic catalog, e.g. `4x500x8`.
    GenCatalog {
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark spec and write the JSON report.
    Bench {
        spec_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the result tables to stderr.
        #[arg(long)]
        table: bool,
    },
    /// Run a conversational spec and dump every session transcript as JSONL.
    Simulate {
        spec_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP session server.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        /// JSONL catalog; overrides the config file.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_spec(path: &Path) -> anyhow::Result<(BenchmarkSpec, PathBuf)> {
    let spec = BenchmarkSpec::from_file(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((spec, base))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { path, out } => {
            let catalog = load_catalog(&path).with_context(|| format!("loading {}", path.display()))?;
            println!("items\t{}", catalog.len());
            for c in catalog.categories() {
                println!("{c}\t{}", catalog.bucket_len(c));
            }
            if let Some(out) = out {
                catalog.save(&out)?;
            }
        }
        Command::GenCatalog { spec, seed, out } => {
            let shape: SyntheticSpec = spec.parse()?;
            let catalog = generate_synthetic_catalog(seed, shape)?;
            let mut w = output(out.as_deref())?;
            catalog.write_jsonl(&mut w)?;
            w.flush()?;
        }
        Command::Bench { spec_file, out, table } => {
            let (spec, base) = load_spec(&spec_file)?;
            spec.validate()?;
            let catalog = spec.catalog.load(spec.seed, Some(&base))?;
            let report = run_benchmark(Arc::new(catalog), &spec, bridge_from_env())?;
            if table {
                eprint!("{}", report.render_table());
            }
            let mut w = output(out.as_deref())?;
            w.write_all(report.to_json().as_bytes())?;
            w.flush()?;
        }
        Command::Simulate { spec_file, out } => {
            let (spec, base) = load_spec(&spec_file)?;
            spec.validate()?;
            if !spec.setting.is_conversational() {
                bail!("simulate needs a conversational setting, got `{}`", spec.setting);
            }
            let catalog = Arc::new(spec.catalog.load(spec.seed, Some(&base))?);
            let engine = Arc::new(SearchEngine::from_catalog(&catalog)?);
            let (report, memories) = run_conversational_detailed(catalog, engine, &spec, bridge_from_env())?;
            let mut w = output(out.as_deref())?;
            for memory in memories.iter().flatten() {
                memory.write_transcript(&mut w)?;
            }
            w.flush()?;
            eprint!("{}", report.render_table());
        }
        Command::Serve { config, port, catalog, static_dir } => {
            let mut cfg = match &config {
                Some(p) => ServiceConfig::from_file(p)?,
                None => ServiceConfig::default(),
            };
            if let Some(p) = port {
                cfg.server.port = p;
            }
            if let Some(p) = catalog {
                cfg.catalog.synthetic = None;
                cfg.catalog.path = Some(p);
            }
            if static_dir.is_some() {
                cfg.server.static_dir = static_dir;
            }
            let items = cfg.catalog.load(cfg.agent.seed, None)?;
            eprintln!("catalog: {} items in {} categories", items.len(), items.category_count());
            let agent = build_agent(items, &cfg, bridge_from_env())?;
            tokio::runtime::Runtime::new()?.block_on(serve(agent, &cfg))?;
        }
    }
    Ok(())
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
