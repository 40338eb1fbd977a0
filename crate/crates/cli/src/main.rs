use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use repcheck_cli::commands::{
    assessment_dir, cmd_assess, cmd_compare, cmd_probe, cmd_report, AssessOptions, Outcome, ProbeOptions,
    ReportOptions,
};
use repcheck_cli::config::RunConfig;
use repcheck_core::LinkKind;

#[derive(Parser, Debug)]
#[command(name = "repcheck", version, about = "Checklist-based reproducibility assessment of research papers")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Repository,
    Archive,
    Dataset,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assess every paper of the manifest, resuming an earlier run.
    Assess {
        /// Re-assess papers that already have an assessment file.
        #[arg(long)]
        force: bool,
        /// Papers assessed concurrently.
        #[arg(long)]
        workers: Option<usize>,
        /// Use the scripted stub provider instead of the configured one.
        #[arg(long)]
        stub: bool,
    },
    /// Agreement between reference and automated assessments.
    Compare {
        human_dir: PathBuf,
        auto_dir: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Output directory; `<output_dir>/agreement` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus-level tables from a directory of assessments.
    Report {
        /// Assessments; `<output_dir>/assessments` by default.
        assess_dir: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Output directory; `<output_dir>/report` by default.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Significance level; the configured one by default.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Fetch, inventory and optionally run one artifact.
    ProbeArtifact {
        url: String,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Skip sandbox execution.
        #[arg(long)]
        no_exec: bool,
        #[arg(long)]
        work_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Assess { force, workers, stub } => {
            if workers == Some(0) {
                anyhow::bail!("--workers must be at least 1");
            }
            cmd_assess(&cfg, &AssessOptions { force, workers, stub })
        }
        Command::Compare { human_dir, auto_dir, schema, out } => {
            if schema.is_some() {
                cfg.schema = schema;
            }
            let schema = cfg.load_schema()?;
            let out = out.unwrap_or_else(|| cfg.output_dir.join("agreement"));
            let (outcome, s) = cmd_compare(&human_dir, &auto_dir, &schema, &out)?;
            let r = &s.report;
            let fmt = |k: Option<f64>| k.map_or("undefined".to_string(), |v| format!("{v:.4}"));
            println!("papers compared: {}", r.papers_compared);
            println!("accuracy: {}", fmt(Some(r.accuracy)));
            println!("kappa: {}", fmt(r.overall.kappa));
            println!("merged kappa: {}", fmt(r.merged.kappa));
            println!("tables: {}", out.display());
            Ok(outcome)
        }
        Command::Report { assess_dir, manifest, schema, out, alpha, cache_dir } => {
            if schema.is_some() {
                cfg.schema = schema;
            }
            let schema = cfg.load_schema()?;
            let manifest = repcheck_cli::commands::require_manifest(&cfg, manifest.as_deref())?;
            let assess_dir = assess_dir.unwrap_or_else(|| assessment_dir(&cfg));
            let out = out.unwrap_or_else(|| cfg.output_dir.join("report"));
            let opts = ReportOptions {
                alpha: alpha.unwrap_or(cfg.alpha),
                cache_dir: cache_dir.or(cfg.cache_dir.clone()),
            };
            let (outcome, c) = cmd_report(&assess_dir, &manifest, &schema, &out, &opts)?;
            println!("papers: {}", c.papers.len());
            if let Some(s) = &c.overall_completeness {
                println!("mean completeness: {:.4}", s.mean);
            }
            if let Some(a) = c.availability {
                println!("artifact availability: {:.2}%", a * 100.0);
            }
            println!("alpha: {}", c.alpha);
            println!("tables: {}", out.display());
            Ok(outcome)
        }
        Command::ProbeArtifact { url, kind, no_exec, work_dir } => {
            let kind = kind.map(|k| match k {
                Kind::Repository => LinkKind::Repository,
                Kind::Archive => LinkKind::Archive,
                Kind::Dataset => LinkKind::Dataset,
            });
            let opts = ProbeOptions { kind, execute: !no_exec, work_dir };
            Ok(cmd_probe(&url, &cfg, &opts)?.0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
