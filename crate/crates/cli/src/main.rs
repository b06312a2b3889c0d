use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use urlscope_core::corpus::{fetch_live, CorpusManifest};
use urlscope_core::evidence::UrlRecord;
use urlscope_core::eval::synthetic::{verify_corpus, write_corpus};
use urlscope_core::eval::{evaluate, render_report, run_corpus, BaselineModel, EvalEntry, ForestParams, ReportFormat, RunOptions};
use urlscope_core::llm::{Backend, BackendDescriptor, ENDPOINT_ENV};
use urlscope_core::pipeline::{analyze_dir, analyze_snapshot, AnalyzeConfig};
use urlscope_core::risk::{Classification, RiskReport, WeightTable};

#[derive(Parser)]
#[command(name = "urlscope", version, about = "Offline URL threat analysis")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a live URL or a saved snapshot directory.
    Analyze { target: String },
    /// Analyze every entry of a corpus manifest.
    ScanCorpus { corpus: PathBuf },
    /// Score a labeled corpus and report metrics.
    Eval {
        corpus: PathBuf,
        /// Drop wall-clock timings so repeated runs give identical output.
        #[arg(long)]
        stable: bool,
        /// Also score the lexical baseline.
        #[arg(long)]
        baseline: bool,
    },
    /// Synthetic evaluation corpus.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Check a synthetic corpus directory against the built-in definitions.
    Verify {
        #[arg(long, default_value_os_t = default_fixture_dir())]
        dir: PathBuf,
    },
    /// Write the synthetic corpus into a directory.
    Write { dir: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Mock,
    Http,
}

#[derive(Args)]
struct Options {
    #[arg(long, value_enum, default_value = "mock", global = true)]
    backend: BackendArg,
    /// Chat-completions endpoint for the http backend.
    #[arg(long, env = ENDPOINT_ENV, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    /// Sandbox observation window.
    #[arg(long, global = true)]
    window_ms: Option<u64>,
    #[arg(long, global = true)]
    budget_tokens: Option<usize>,
    #[arg(long, value_enum, default_value = "text", global = true)]
    output: OutputArg,
    /// Weight table replacing the bundled one.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for corpus runs; 0 uses every core.
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
    /// Fetch timeout for live URLs.
    #[arg(long, default_value_t = 15_000, global = true)]
    fetch_timeout_ms: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Json,
    Text,
}

impl From<OutputArg> for ReportFormat {
    fn from(o: OutputArg) -> Self {
        match o {
            OutputArg::Json => ReportFormat::Json,
            OutputArg::Text => ReportFormat::Text,
        }
    }
}

fn default_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/synthetic")
}

fn descriptor(o: &Options) -> Result<BackendDescriptor> {
    let mut d = match o.backend {
        BackendArg::Mock => BackendDescriptor::mock(),
        BackendArg::Http => {
            let Some(endpoint) = o.endpoint.as_deref() else {
                bail!("--backend http needs --endpoint or {ENDPOINT_ENV}");
            };
            BackendDescriptor::http_local(endpoint, o.model.as_deref().unwrap_or("local"))
        }
    };
    if let Some(m) = &o.model {
        d.model_name = m.clone();
    }
    if let Some(s) = o.seed {
        d.seed = s;
    }
    d.validate()?;
    Ok(d)
}

fn analyze_config(o: &Options) -> Result<AnalyzeConfig> {
    let mut cfg = AnalyzeConfig::default();
    if let Some(w) = o.window_ms {
        let sb = &mut cfg.collect.sandbox;
        sb.window_ms = w;
        sb.hard_cap_ms = sb.hard_cap_ms.max(w);
    }
    if let Some(s) = o.seed {
        cfg.collect.sandbox.seed = s;
    }
    if let Some(b) = o.budget_tokens {
        cfg.budget_tokens = b;
    }
    if let Some(p) = &o.weights {
        cfg.weights = WeightTable::load(p)?;
    }
    cfg.collect.sandbox.validate()?;
    Ok(cfg)
}

fn report_text(r: &RiskReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", r.url.raw);
    let _ = writeln!(s, "{}", r.headline());
    let _ = writeln!(s, "risk score {} (evidence {}, model {:.2})", r.risk_score, r.evidence_points, r.model_score);
    for f in &r.findings {
        let _ = writeln!(s, "  [{}] {} ({})", f.severity, f.title, f.evidence_refs.join(", "));
    }
    for (kind, text) in &r.explanations {
        let _ = writeln!(s, "{kind}: {text}");
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Writes to stdout; a closed pipe (`urlscope ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn exit_for(malicious: bool) -> ExitCode {
    ExitCode::from(if malicious { 2 } else { 0 })
}

fn analyze(target: &str, o: &Options) -> Result<ExitCode> {
    let backend = Backend::new(descriptor(o)?)?;
    let cfg = analyze_config(o)?;
    let path = Path::new(target);
    let report = if path.is_dir() {
        analyze_dir(path, &backend, &cfg)?
    } else {
        let url = UrlRecord::parse(target).with_context(|| format!("{target} is neither a directory nor a URL"))?;
        let snap = fetch_live(&url, o.fetch_timeout_ms)?;
        analyze_snapshot(&snap, &backend, &cfg)?
    };
    match o.output {
        OutputArg::Json => emit(&(serde_json::to_string_pretty(&report)? + "\n"))?,
        OutputArg::Text => emit(&report_text(&report))?,
    }
    Ok(exit_for(report.classification == Classification::Malicious))
}

fn scan_corpus(corpus: &Path, o: &Options) -> Result<ExitCode> {
    let manifest = CorpusManifest::load(corpus)?;
    let opts = RunOptions { jobs: o.jobs, baseline: None };
    let results = run_corpus(&manifest, &descriptor(o)?, &analyze_config(o)?, &opts)?;
    match o.output {
        OutputArg::Json => emit(&(serde_json::to_string_pretty(&results)? + "\n"))?,
        OutputArg::Text => emit(&results.iter().map(|e| scan_line(e) + "\n").collect::<String>())?,
    }
    let malicious = results.iter().any(|e| e.report.as_ref().is_some_and(|r| r.classification == Classification::Malicious));
    Ok(exit_for(malicious))
}

fn scan_line(e: &EvalEntry) -> String {
    match (&e.report, &e.error) {
        (Some(r), _) => format!("{}\t{}\t{}", e.name, r.risk_score, r.headline()),
        (None, err) => format!("{}\terror\t{}", e.name, err.as_deref().unwrap_or("unknown")),
    }
}

fn eval(corpus: &Path, stable: bool, baseline: bool, o: &Options) -> Result<ExitCode> {
    let manifest = CorpusManifest::load(corpus)?;
    let baseline = baseline.then(|| BaselineModel::bundled(ForestParams::default())).transpose()?;
    let opts = RunOptions { jobs: o.jobs, baseline };
    let report = evaluate(&manifest, &descriptor(o)?, &analyze_config(o)?, &opts, stable)?;
    emit(&render_report(&report, o.output.into()))?;
    Ok(ExitCode::SUCCESS)
}

fn fixtures(cmd: &FixturesCommand) -> Result<ExitCode> {
    match cmd {
        FixturesCommand::Verify { dir } => {
            let problems = verify_corpus(dir);
            if problems.is_empty() {
                emit(&format!("{}: ok\n", dir.display()))?;
                return Ok(ExitCode::SUCCESS);
            }
            for p in &problems {
                eprintln!("{p}");
            }
            bail!("{} fixture file(s) differ from the definitions", problems.len())
        }
        FixturesCommand::Write { dir } => {
            let manifest = write_corpus(dir).with_context(|| format!("writing {}", dir.display()))?;
            emit(&format!("{}\n", manifest.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Analyze { target } => analyze(target, &cli.opts),
        Command::ScanCorpus { corpus } => scan_corpus(corpus, &cli.opts),
        Command::Eval { corpus, stable, baseline } => eval(corpus, *stable, *baseline, &cli.opts),
        Command::Fixtures(cmd) => fixtures(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
