use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecostruct::formats::{parse_format, serialize_format, FormatKind, SerializeError};
use ecostruct::harness::{
    build_report, compare_formats, emit_report, load_corpus, read_records, run_paired, score_records, write_crossings,
    write_pairs, write_records, write_scores, write_summary, write_sweeps, Backend, HarnessConfig, HarnessError,
    HttpBackend, Metric, OutputLock, PairRow, ReplayBackend, ReportOptions, RunOptions, ScoreOptions, ScoredRecord,
};
use ecostruct::scoring::{ScoreWeights, SyntaxOptions};
use ecostruct::sustainability::{EmissionConfig, EmissionMode};
use ecostruct::toon::{validate_toon, ToonDialect};

/// Structured-output evaluation with carbon-aware scoring.
#[derive(Parser)]
#[command(name = "ecostruct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one record per (instance, format) from a backend.
    Run(RunArgs),
    /// Score records and write scores.jsonl and summary.csv.
    Score(ScoreCmd),
    /// Paired Wilcoxon comparison of two formats.
    Compare(CompareArgs),
    /// GCS_env as a function of gamma, with the crossing point.
    Sweep(SweepArgs),
    /// Write summary, pairs, gamma_sweep and gamma_crossing CSVs.
    Report(ReportArgs),
    /// Convert a document between formats (stdin to stdout).
    Convert(ConvertArgs),
    /// Check that a document parses.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Replay,
    Http,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: BackendKind,
    /// Record file to serve outputs from (replay backend).
    #[arg(long)]
    replay_file: Option<PathBuf>,
    /// Comma-separated formats, in output order.
    #[arg(long, value_delimiter = ',', default_value = "json,toon")]
    formats: Vec<FormatKind>,
    /// Output directory; records go to records.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Chat-completions endpoint (http backend).
    #[arg(long)]
    url: Option<String>,
    /// Stream completions to time the decode phase alone.
    #[arg(long)]
    stream: bool,
    #[arg(long)]
    no_strip_fences: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Measured,
    TokenFactor,
}

/// Inputs and scoring parameters shared by score, compare, sweep and report.
#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Weights and emission settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Reference intensity, kgCO2e per 1000 tokens.
    #[arg(long)]
    xref: Option<f64>,
    #[arg(long, value_enum)]
    emission_mode: Option<ModeArg>,
    /// kgCO2e per 1000 tokens (token-factor mode).
    #[arg(long)]
    token_factor: Option<f64>,
    /// kgCO2e per kWh (measured mode).
    #[arg(long)]
    grid_intensity: Option<f64>,
    /// Count expected keys as satisfied when present, whatever the value.
    #[arg(long)]
    keys_only: bool,
}

#[derive(Args)]
struct ScoreCmd {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, default_value = "json")]
    format_a: FormatKind,
    #[arg(long, default_value = "toon")]
    format_b: FormatKind,
    /// Comma-separated metrics.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gcs,ees,gcs_env,n_tokens,ce_kg,duration_s"
    )]
    metrics: Vec<Metric>,
    /// Significance threshold for the Wilcoxon test.
    #[arg(long, default_value_t = 0.05)]
    alpha_level: f64,
    /// Also write pairs.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[arg(long, default_value = "json")]
    format_a: FormatKind,
    #[arg(long, default_value = "toon")]
    format_b: FormatKind,
    /// Also write gamma_sweep.csv and gamma_crossing.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha_level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    from: FormatKind,
    #[arg(long)]
    to: FormatKind,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "toon")]
    format: FormatKind,
    /// Read from this file instead of stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// TOON indent width.
    #[arg(long, default_value_t = 2)]
    indent: usize,
    /// TOON row delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

/// Exit 1 for runtime and parse failures, 2 for usage and config errors.
enum Failure {
    Runtime(String),
    Usage(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let msg = e.to_string();
        match e {
            HarnessError::Config(_)
            | HarnessError::Corpus(_)
            | HarnessError::RecordFormat { .. }
            | HarnessError::UnknownInstance(_)
            | HarnessError::Prompt(_)
            | HarnessError::Scoring(_)
            | HarnessError::Emission { .. } => Failure::Usage(msg),
            _ => Failure::Runtime(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Score(a) => cmd_score(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig, Failure> {
    match path {
        Some(p) => HarnessConfig::load(p).map_err(|e| Failure::Usage(e.to_string())),
        None => Ok(HarnessConfig::default()),
    }
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(m) = a.model_id {
        cfg.model_id = m;
    }
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(u) = a.url {
        cfg.backend.url = u;
    }
    cfg.backend.stream |= a.stream;
    if a.no_strip_fences {
        cfg.strip_fences = false;
    }
    cfg.validate()?;
    if a.formats.is_empty() {
        return Err(Failure::Usage("--formats must name at least one format".into()));
    }
    let backend: Box<dyn Backend> = match a.backend {
        BackendKind::Replay => {
            let path = a
                .replay_file
                .ok_or_else(|| Failure::Usage("--backend replay requires --replay-file".into()))?;
            Box::new(ReplayBackend::new(read_records(&path)?))
        }
        BackendKind::Http => Box::new(HttpBackend::new(cfg.backend.clone())),
    };
    let corpus = load_corpus(&a.corpus)?;
    let _lock = OutputLock::acquire(&a.out)?;
    let journal = a.out.join("records.jsonl.partial");
    let opts = RunOptions {
        model_id: cfg.model_id.clone(),
        formats: a.formats,
        parallelism: cfg.parallelism,
        strip_fences: cfg.strip_fences,
        templates: cfg.template_set()?,
        journal: Some(journal.clone()),
    };
    let records = run_paired(&corpus, backend.as_ref(), &opts)?;
    let path = a.out.join("records.jsonl");
    write_records(&path, &records)?;
    let _ = std::fs::remove_file(&journal);
    let failed = records.iter().filter(|r| r.failed).count();
    eprintln!(
        "wrote {} records ({failed} failed) to {}",
        records.len(),
        path.display()
    );
    Ok(())
}

fn score_options(a: &ScoreArgs) -> Result<ScoreOptions, Failure> {
    let cfg = load_config(a.config.as_deref())?;
    let weights = ScoreWeights {
        alpha: a.alpha.unwrap_or(cfg.weights.alpha),
        beta: a.beta.unwrap_or(cfg.weights.beta),
        gamma: a.gamma.unwrap_or(cfg.weights.gamma),
    };
    weights.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut emission: EmissionConfig = cfg.emission;
    if let Some(x) = a.xref {
        emission.x_ref = x;
    }
    if let Some(m) = a.emission_mode {
        emission.mode = match m {
            ModeArg::Measured => EmissionMode::Measured,
            ModeArg::TokenFactor => EmissionMode::TokenFactor,
        };
    }
    if let Some(f) = a.token_factor {
        emission.token_factor = f;
    }
    if let Some(g) = a.grid_intensity {
        emission.grid_intensity = g;
    }
    emission.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(ScoreOptions {
        weights,
        emission,
        syntax: SyntaxOptions { keys_only: a.keys_only },
    })
}

fn scored(a: &ScoreArgs) -> Result<Vec<ScoredRecord>, Failure> {
    let opts = score_options(a)?;
    let corpus = load_corpus(&a.corpus)?;
    let records = read_records(&a.records)?;
    Ok(score_records(&records, &corpus, &opts)?)
}

fn create_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn cmd_score(a: ScoreCmd) -> CmdResult {
    let scored = scored(&a.score)?;
    create_dir(&a.out)?;
    write_scores(&a.out.join("scores.jsonl"), &scored)?;
    let report = build_report(&scored, &ReportOptions::default())?;
    write_summary(&a.out.join("summary.csv"), &report.summary)?;
    eprintln!("scored {} records into {}", scored.len(), a.out.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn print_pairs(rows: &[PairRow]) {
    println!("model\tmetric\tformat_a\tmean_a\tformat_b\tmean_b\tn\tW\tp\tmethod");
    for row in rows {
        match row {
            PairRow::Compared(c) => {
                let w = c.wilcoxon.as_ref();
                println!(
                    "{}\t{}\t{}\t{:.4}\t{}\t{:.4}\t{}\t{}\t{}\t{}",
                    c.model_id,
                    c.metric,
                    c.format_a,
                    c.mean_a,
                    c.format_b,
                    c.mean_b,
                    c.samples.len(),
                    fmt_opt(w.map(|w| w.w_statistic)),
                    fmt_opt(w.map(|w| w.p_value)),
                    w.map(|w| w.method.as_str()).unwrap_or("no_difference"),
                );
            }
            PairRow::Insufficient {
                model_id,
                format_a,
                format_b,
                metric,
            } => println!("{model_id}\t{metric}\t{format_a}\t-\t{format_b}\t-\t0\t-\t-\tinsufficient_pairs"),
        }
    }
}

fn cmd_compare(a: CompareArgs) -> CmdResult {
    let scored = scored(&a.score)?;
    let mut rows = Vec::new();
    for model in ecostruct::harness::model_ids(&scored) {
        for &metric in &a.metrics {
            let row = match compare_formats(&scored, &model, a.format_a, a.format_b, metric, a.alpha_level) {
                Ok(c) => PairRow::Compared(c),
                Err(HarnessError::InsufficientPairs {
                    model_id,
                    format_a,
                    format_b,
                    metric,
                }) => PairRow::Insufficient {
                    model_id,
                    format_a,
                    format_b,
                    metric,
                },
                Err(e) => return Err(e.into()),
            };
            rows.push(row);
        }
    }
    if let Some(out) = &a.out {
        create_dir(out)?;
        write_pairs(&out.join("pairs.csv"), &rows)?;
    }
    print_pairs(&rows);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let scored = scored(&a.score)?;
    let opts = ReportOptions {
        pairs: Some(vec![(a.format_a, a.format_b)]),
        metrics: Vec::new(),
        steps: a.steps,
        ..Default::default()
    };
    let report = build_report(&scored, &opts).map_err(|e| match e {
        HarnessError::Scoring(s) => Failure::Usage(s.to_string()),
        other => other.into(),
    })?;
    if let Some(out) = &a.out {
        create_dir(out)?;
        write_sweeps(&out.join("gamma_sweep.csv"), &report.sweeps)?;
        write_crossings(&out.join("gamma_crossing.csv"), &report.crossings)?;
    }
    println!("model\tformat\tgamma\tgcs_env");
    for r in &report.sweeps {
        println!("{}\t{}\t{:.4}\t{:.6}", r.model_id, r.format, r.gamma, r.gcs_env);
    }
    for c in &report.crossings {
        match c.gamma_star {
            Some(g) => println!(
                "{}: {} and {} cross at gamma* = {g:.4} ({} sign change(s))",
                c.model_id, c.format_a, c.format_b, c.sign_changes
            ),
            None => println!(
                "{}: {} and {} do not cross in [0, 1]",
                c.model_id, c.format_a, c.format_b
            ),
        }
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let scored = scored(&a.score)?;
    let opts = ReportOptions {
        steps: a.steps,
        alpha_level: a.alpha_level,
        ..Default::default()
    };
    let report = build_report(&scored, &opts).map_err(|e| match e {
        HarnessError::Scoring(s) => Failure::Usage(s.to_string()),
        other => other.into(),
    })?;
    emit_report(&report, &a.out)?;
    eprintln!("wrote report to {}", a.out.display());
    Ok(())
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) => text = std::fs::read_to_string(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Runtime(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn cmd_convert(a: ConvertArgs) -> CmdResult {
    let input = read_input(None)?;
    let value = parse_format(&input, a.from).map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = serialize_format(&value, a.to).map_err(|e| match e {
        SerializeError::UnrepresentableValue { .. } => Failure::Usage(e.to_string()),
    })?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| Failure::Runtime(e.to_string()))
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    let input = read_input(a.input.as_deref())?;
    let result = if a.format == FormatKind::Toon {
        let dialect = ToonDialect::new(a.indent, a.delimiter).map_err(|e| Failure::Usage(e.to_string()))?;
        match validate_toon(&input, &dialect).error {
            None => Ok(()),
            Some(e) => Err(e.to_string()),
        }
    } else {
        parse_format(&input, a.format).map(|_| ()).map_err(|e| e.to_string())
    };
    match result {
        Ok(()) => {
            println!("valid {}", a.format);
            Ok(())
        }
        Err(msg) => Err(Failure::Runtime(msg)),
    }
}
