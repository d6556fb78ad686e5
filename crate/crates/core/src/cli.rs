//! Command-line front end: one subcommand per pipeline stage.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{load_corpus, load_parallel_tsv, reference_from_tokens, Corpus};
use crate::error::{Error, Result};
use crate::exec::{with_jobs, Execution};
use crate::model::{build_model_with, NGramModel, PruneThreshold};
use crate::search::{
    evaluate_point, run_grid_with, GridOptions, GridRow, GridSpec, MetricSet, ResultsTable,
};
use crate::tokenizer::{tokenize_corpus_with, NSet, TokenizerParams};

#[derive(Debug, Parser)]
#[command(
    name = "tfseg",
    version,
    about = "Unsupervised transition-freedom tokenization and hyper-parameter self-tuning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count character N-grams of a corpus into a model file
    Build(BuildArgs),
    /// Drop low-frequency N-grams from a model
    Prune(PruneArgs),
    /// Segment a text file with a model
    Tokenize(TokenizeArgs),
    /// Evaluate every metric at a single hyper-parameter point
    Eval(EvalArgs),
    /// Write the two halves of a corpus as a.txt and b.txt
    Split(SplitArgs),
    /// Evaluate the full hyper-parameter grid and write results, report and figure data
    Grid(GridArgs),
    /// Rebuild the report and figure data from a results CSV
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tokens,
    Boundaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricSetArg {
    Test,
    Train,
}

impl From<MetricSetArg> for MetricSet {
    fn from(m: MetricSetArg) -> Self {
        match m {
            MetricSetArg::Test => MetricSet::Test,
            MetricSetArg::Train => MetricSet::Train,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub n_max: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_lines: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub t_mc: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Test text given either as plain lines or as one column of a TSV file.
#[derive(Debug, Args)]
pub struct TestInput {
    #[arg(long)]
    pub test: PathBuf,
    /// Read the test set from this column of a tab-separated file with a header
    #[arg(long)]
    pub column: Option<String>,
}

impl TestInput {
    fn load(&self) -> Result<Corpus> {
        match &self.column {
            Some(col) => load_parallel_tsv(&self.test, col),
            None => load_corpus(&self.test, None),
        }
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub n_set: String,
    #[arg(long, default_value_t = 0.0)]
    pub t_mc: f64,
    #[arg(long)]
    pub t_tm: f64,
}

impl PointArgs {
    fn params(&self) -> Result<TokenizerParams> {
        TokenizerParams::new(
            self.n_set.parse::<NSet>()?,
            PruneThreshold::new(self.t_mc)?,
            self.t_tm,
        )
    }
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: TestInput,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tokens)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub input: TestInput,
    #[arg(long)]
    pub reference: PathBuf,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = MetricSetArg::Test)]
    pub metric_set: MetricSetArg,
    #[arg(long)]
    pub max_lines: Option<usize>,
    /// Results CSV with a single row; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_lines: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub input: TestInput,
    #[arg(long)]
    pub reference: PathBuf,
    /// TOML file with `n_sets`, `t_mcs` and `t_tms` arrays
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub max_lines: Option<usize>,
    #[arg(long, value_enum, default_value_t = MetricSetArg::Test)]
    pub metric_set: MetricSetArg,
    /// Results CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Report file; defaults to `<out>.report.json`
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Figure-data CSV; defaults to `<out>.figure.csv`
    #[arg(long)]
    pub figure: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results CSV written by `grid`
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub figure: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::precondition(
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

fn execution(jobs: usize) -> Execution {
    if jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn cmd_build(args: &BuildArgs) -> Result<()> {
    check_input(&args.corpus)?;
    check_output(&args.out)?;
    if args.n_max < 2 {
        return Err(Error::precondition(format!(
            "--n-max must be at least 2 (freedom at order n needs order n+1), got {}",
            args.n_max
        )));
    }
    let start = Instant::now();
    let corpus = load_corpus(&args.corpus, args.max_lines)?;
    let model = with_jobs(args.jobs, || {
        build_model_with(&corpus, args.n_max, execution(args.jobs))
    })?;
    model.save(&args.out)?;
    for n in 1..=model.max_order() {
        eprintln!("order {n}: {} grams", model.gram_count(n));
    }
    eprintln!(
        "built order-{} model from {} lines ({} symbols) in {:.2?}",
        model.max_order(),
        corpus.len(),
        corpus.symbol_count(),
        start.elapsed()
    );
    Ok(())
}

pub fn cmd_prune(args: &PruneArgs) -> Result<()> {
    check_output(&args.out)?;
    let t = PruneThreshold::new(args.t_mc)?;
    let model = NGramModel::load(&args.model)?;
    if model.is_pruned() {
        return Err(Error::precondition(format!(
            "{} is already pruned",
            args.model.display()
        )));
    }
    model.prune(t).save(&args.out)
}

pub fn cmd_tokenize(args: &TokenizeArgs) -> Result<()> {
    check_input(&args.input.test)?;
    check_output(&args.out)?;
    let params = args.point.params()?;
    let mut model = NGramModel::load(&args.model)?;
    params.check_model(&model)?;
    if !model.is_pruned() {
        model = model.prune(params.t_mc);
    } else if params.t_mc.value() != 0.0 {
        return Err(Error::precondition(
            "model is already pruned; omit --t-mc or pass an unpruned model",
        ));
    }
    let input = args.input.load()?;
    let tokenized = with_jobs(args.jobs, || {
        tokenize_corpus_with(&model, &input, &params, execution(args.jobs))
    })?;
    let mut out = String::new();
    for t in &tokenized {
        match args.format {
            OutputFormat::Tokens => out.push_str(&t.to_token_line()),
            OutputFormat::Boundaries => out.push_str(&t.to_boundary_line()),
        }
        out.push('\n');
    }
    write_file(&args.out, &out)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    check_input(&args.corpus)?;
    check_input(&args.input.test)?;
    check_input(&args.reference)?;
    if let Some(out) = &args.out {
        check_output(out)?;
    }
    let params = args.point.params()?;
    let train = load_corpus(&args.corpus, args.max_lines)?;
    let test = args.input.load()?;
    let reference = reference_from_tokens(&args.reference)?;
    let options = GridOptions {
        metric_set: args.metric_set.into(),
        execution: Execution::Parallel,
    };
    let metrics = evaluate_point(&train, &test, &reference, &params, options)?;
    let csv = ResultsTable::from_rows(&[GridRow { params, metrics }]).to_csv();
    match &args.out {
        Some(path) => write_file(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn cmd_split(args: &SplitArgs) -> Result<()> {
    check_input(&args.corpus)?;
    if !args.out.is_dir() {
        return Err(Error::precondition(format!(
            "output directory {} does not exist",
            args.out.display()
        )));
    }
    let corpus = load_corpus(&args.corpus, args.max_lines)?;
    let (a, b) = corpus.split_halves()?;
    for (name, half) in [("a.txt", &a), ("b.txt", &b)] {
        let mut text = half.lines().join("\n");
        if !half.is_empty() {
            text.push('\n');
        }
        write_file(&args.out.join(name), &text)?;
    }
    eprintln!(
        "split {} lines into {} + {}",
        corpus.len(),
        a.len(),
        b.len()
    );
    Ok(())
}

fn write_report(table: &ResultsTable, report_path: &Path, figure_path: &Path) -> Result<()> {
    let report = table.report()?;
    write_file(report_path, &report.to_json())?;
    write_file(figure_path, &report.figure_csv())
}

pub fn cmd_grid(args: &GridArgs) -> Result<()> {
    check_input(&args.corpus)?;
    check_input(&args.input.test)?;
    check_input(&args.reference)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "report.json"));
    let figure_path = args
        .figure
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "figure.csv"));
    for p in [&args.out, &report_path, &figure_path] {
        check_output(p)?;
    }
    let spec = match &args.grid {
        Some(path) => GridSpec::from_toml(&read_file(path)?)?,
        None => GridSpec::default(),
    };

    let start = Instant::now();
    let train = load_corpus(&args.corpus, args.max_lines)?;
    let test = args.input.load()?;
    let reference = reference_from_tokens(&args.reference)?;
    let options = GridOptions {
        metric_set: args.metric_set.into(),
        execution: execution(args.jobs),
    };
    let rows = with_jobs(args.jobs, || {
        run_grid_with(&train, &test, &reference, &spec, options)
    })?;
    if rows.len() != spec.len() {
        return Err(Error::Internal(format!(
            "grid produced {} rows for {} points",
            rows.len(),
            spec.len()
        )));
    }

    let csv = ResultsTable::from_rows(&rows).to_csv();
    write_file(&args.out, &csv)?;
    // the report is computed from the CSV exactly as written
    let table = ResultsTable::parse_csv(&csv)?;
    write_report(&table, &report_path, &figure_path)?;
    eprintln!(
        "evaluated {} grid points in {:.2?}",
        rows.len(),
        start.elapsed()
    );
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    check_input(&args.results)?;
    let figure_path = args
        .figure
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "figure.csv"));
    check_output(&args.out)?;
    check_output(&figure_path)?;
    let table = ResultsTable::parse_csv(&read_file(&args.results)?).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: args.results.clone(),
            line,
            message,
        },
        other => other,
    })?;
    write_report(&table, &args.out, &figure_path)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Tokenize(a) => cmd_tokenize(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Split(a) => cmd_split(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_a_user_error() {
        assert_eq!(run(["tfseg", "build", "--bogus"]), 1);
        assert_eq!(run(["tfseg", "--help"]), 0);
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling(Path::new("/tmp/results.csv"), "report.json"),
            PathBuf::from("/tmp/results.report.json")
        );
    }
}
