use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revclone::manifest::ManifestRecorder;
use revclone::{metrics, revisions, tiering, tuner};
use revclone::{BoilerplateFilter, Error, Result, ScanOptions, SearchConfig, SnippetIndex};

/// Revision-aware clone search between Q&A snippets and Java projects.
///
/// Exit codes: 0 success, 2 invalid input or data, 3 I/O failure.
/// Log verbosity is read from REVCLONE_LOG (e.g. `info`, `debug`).
#[derive(Parser)]
#[command(name = "revclone", version)]
struct Cli {
    /// Maximum worker threads (defaults to one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Manifest log to append to (defaults to `<out>.manifest.jsonl`).
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a snippet index from a revision dump.
    Index {
        #[arg(long, value_name = "PATH")]
        dump: PathBuf,
        #[arg(long, value_name = "INDEX")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Scan a project and recommend latest revisions for outdated clones.
    Scan {
        #[arg(long, value_name = "INDEX")]
        index: PathBuf,
        #[arg(long, value_name = "DIR")]
        project: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Boilerplate pattern table replacing the built-in one.
        #[arg(long, value_name = "PATH")]
        boilerplate: Option<PathBuf>,
        /// Source file extension to scan; repeatable.
        #[arg(long = "ext", value_name = "EXT", default_value = "java")]
        extensions: Vec<String>,
    },
    /// Grid-search configurations against a ground truth.
    Tune {
        #[arg(long, value_name = "PATH")]
        grid: PathBuf,
        #[arg(long, value_name = "PATH")]
        truth: PathBuf,
        /// Directory with one subdirectory per project.
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Assign popularity tiers from project metadata.
    Tier {
        #[arg(long, value_name = "CSV")]
        metadata: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Revision and edit-distance statistics for a dump.
    Stats {
        #[arg(long, value_name = "PATH")]
        dump: PathBuf,
        /// Summary statistics CSV.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Histogram CSV.
        #[arg(long, value_name = "CSV")]
        histogram: Option<PathBuf>,
        /// Per-block distance CSV.
        #[arg(long, value_name = "CSV")]
        blocks: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// Search configuration (TOML); the built-in defaults otherwise.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self, rec: &mut ManifestRecorder) -> Result<SearchConfig> {
        let cfg = match &self.config {
            Some(path) => {
                rec.input(path);
                SearchConfig::load(path)?
            }
            None => SearchConfig::default(),
        };
        rec.config(cfg);
        Ok(cfg)
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Index { .. } => "index",
            Command::Scan { .. } => "scan",
            Command::Tune { .. } => "tune",
            Command::Tier { .. } => "tier",
            Command::Stats { .. } => "stats",
        }
    }

    fn out(&self) -> &Path {
        match self {
            Command::Index { out, .. }
            | Command::Scan { out, .. }
            | Command::Tune { out, .. }
            | Command::Tier { out, .. }
            | Command::Stats { out, .. } => out,
        }
    }
}

fn run(cmd: &Command, rec: &mut ManifestRecorder) -> Result<()> {
    match cmd {
        Command::Index { dump, out, config } => {
            let cfg = config.load(rec)?;
            rec.input(dump);
            let revs = revisions::read_dump(dump)?;
            let (index, report) = revisions::ingest_revisions(&revs, &cfg)?;
            rec.output(out);
            index.save(out)?;
            println!(
                "indexed {} of {} revisions ({} answers, {} blocks; {} too small, {} duplicate, {} not accepted)",
                report.indexed,
                report.revisions,
                report.answers,
                report.blocks,
                report.skipped_too_small,
                report.deduplicated,
                report.skipped_unaccepted
            );
        }
        Command::Scan {
            index,
            project,
            out,
            config,
            boilerplate,
            extensions,
        } => {
            let cfg = config.load(rec)?;
            rec.input(index);
            rec.input(project);
            let idx = SnippetIndex::load(index)?;
            let filter = match boilerplate {
                Some(path) => {
                    rec.input(path);
                    BoilerplateFilter::load(path)?
                }
                None => BoilerplateFilter::default(),
            };
            let opts = ScanOptions {
                extensions: extensions.clone(),
                boilerplate: filter,
            };
            let outcome = revisions::scan_project(project, &idx, &cfg, &opts)?;
            rec.output(out);
            revisions::write_recommendations_csv(&outcome.recommendations, out)?;
            for (path, reason) in &outcome.skipped_files {
                eprintln!("skipped {path}: {reason}");
            }
            println!(
                "{} recommendations from {} methods in {} files ({} boilerplate, {} files skipped)",
                outcome.recommendations.len(),
                outcome.methods,
                outcome.files,
                outcome.boilerplate,
                outcome.skipped_files.len()
            );
        }
        Command::Tune {
            grid,
            truth,
            corpus,
            out,
        } => {
            rec.input(grid);
            rec.input(truth);
            rec.input(corpus);
            let spec = tuner::GridSpec::load(grid)?;
            rec.config(&spec);
            let queries = tuner::load_queries(truth)?;
            let corpus = tuner::TuningCorpus::load(corpus, &["java".to_owned()])?;
            let result = tuner::grid_search(&spec, &queries, &corpus)?;
            rec.output(out);
            tuner::write_score_table_csv(&result.table, out)?;
            println!("# mrr = {}", result.best.mrr);
            print!("{}", result.best.config.to_toml());
        }
        Command::Tier { metadata, out } => {
            rec.input(metadata);
            let projects = tiering::read_metadata_csv(metadata)?;
            let (quartiles, tiers) = tiering::tier_projects(&projects)?;
            rec.config(quartiles);
            rec.output(out);
            tiering::write_tiers_csv(&projects, &tiers, out)?;
        }
        Command::Stats {
            dump,
            out,
            histogram,
            blocks,
        } => {
            rec.input(dump);
            let revs = revisions::read_dump(dump)?;
            let stats = metrics::revision_stats(&revs)?;
            let outputs: [(Option<&PathBuf>, StatsWriter); 3] = [
                (Some(out), |s, f| s.write_summary(f)),
                (histogram.as_ref(), |s, f| s.write_histograms(f)),
                (blocks.as_ref(), |s, f| s.write_blocks(f)),
            ];
            for (path, write) in outputs {
                let Some(path) = path else { continue };
                rec.output(path);
                let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
                write(&stats, file).map_err(|e| Error::csv(path, e))?;
            }
        }
    }
    Ok(())
}

type StatsWriter = fn(&metrics::RevisionStats, std::fs::File) -> csv::Result<()>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REVCLONE_LOG", "warn")).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }

    let mut rec = ManifestRecorder::start(cli.command.name());
    let outcome = run(&cli.command, &mut rec);
    let manifest_path = cli.manifest.clone().unwrap_or_else(|| {
        let mut name = cli.command.out().as_os_str().to_owned();
        name.push(".manifest.jsonl");
        PathBuf::from(name)
    });
    if let Err(e) = rec.finish(&outcome).append(&manifest_path) {
        log::warn!("manifest not written: {e}");
    }
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
