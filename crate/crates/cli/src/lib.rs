//! Command-line surface over the `bubbletest` library.
//!
//! Four subcommands: `test` computes SADF/GSADF statistics with Monte
//! Carlo critical values and per-level verdicts, `datestamp` locates
//! explosive episodes from the BSADF path, `critvals` prints a
//! critical-value table, and `simulate` generates synthetic series from
//! a TOML spec. Data output goes to stdout and is byte-deterministic
//! for a fixed seed; provenance notes (cache outcomes, file writes) go
//! to stderr.

pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use bubbletest::{
    bsadf_sequence, cache_file_name, critical_values_cached, csv_value_columns, date_stamp,
    generate, gsadf, load_csv, sadf, save_csv, write_csv, AdfSpec, CriticalValueTable, DgpSpec,
    Error, Series, StatKind, TableValues,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{
    render_critvals_csv, render_critvals_human, render_datestamp_human, render_test_csv,
    render_test_human, write_json, write_plot_csv, CritvalsReport, DatestampReport, EndpointRow,
    Episode, LevelValue, SeriesResult, TestBlock, TestReport, Verdict, SCHEMA_VERSION,
};

/// Everything the front end can fail with, mapped to exit codes by
/// [`exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    /// A simulation spec file that is not valid TOML for a generating
    /// process.
    #[error("spec file {path}: {msg}")]
    SpecParse { path: PathBuf, msg: String },
}

/// Process exit code for an error: 2 for input problems, 3 for
/// numerical degeneracies, 4 for infeasible configurations.
pub fn exit_code(error: &CliError) -> i32 {
    let core = match error {
        CliError::SpecParse { .. } => return 2,
        CliError::Core(core) => core,
    };
    match core {
        Error::Io { .. }
        | Error::CsvParse { .. }
        | Error::MonthFormat { .. }
        | Error::MonthGap { .. }
        | Error::MagnitudeExceeded { .. }
        | Error::NonFinite { .. }
        | Error::EmptySeries
        | Error::Misaligned { .. }
        | Error::Domain { .. }
        | Error::CacheChecksum { .. }
        | Error::CacheFormat { .. } => 2,
        Error::SingularDesign { .. }
        | Error::DegenerateFit
        | Error::NoValidWindow { .. }
        | Error::SequenceMismatch { .. } => 3,
        Error::InsufficientObservations { .. } | Error::InvalidParameter { .. } => 4,
    }
}

/// Explosive-episode tests for monthly time series.
#[derive(Debug, Parser)]
#[command(name = "bubbletest", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run SADF/GSADF tests on CSV columns, with verdicts per level.
    Test(TestArgs),
    /// Date-stamp explosive episodes from the BSADF sequence.
    Datestamp(DatestampArgs),
    /// Print a Monte Carlo critical-value table.
    Critvals(CritvalsArgs),
    /// Generate a synthetic monthly series from a TOML spec.
    Simulate(SimulateArgs),
}

/// Window, regression, and Monte Carlo settings shared by the
/// statistics commands.
#[derive(Debug, Args)]
pub struct McArgs {
    /// Smallest estimation window, in observations.
    #[arg(long, default_value_t = 12)]
    pub min_window: usize,

    /// Lagged differences in the test regression.
    #[arg(long, default_value_t = 0)]
    pub lags: usize,

    /// Monte Carlo replications behind each critical value.
    #[arg(long, default_value_t = 10_000)]
    pub replications: usize,

    /// Master seed for the replication streams.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Directory for cached critical-value tables.
    #[arg(long, env = "BUBBLETEST_CACHE")]
    pub cache_dir: Option<PathBuf>,

    /// Ignore any cache directory and recompute.
    #[arg(long)]
    pub no_cache: bool,
}

impl McArgs {
    fn spec(&self) -> AdfSpec {
        AdfSpec {
            lags: self.lags,
            ..AdfSpec::default()
        }
    }

    fn cache_dir(&self) -> Option<&Path> {
        if self.no_cache {
            None
        } else {
            self.cache_dir.as_deref()
        }
    }
}

/// Output representation for stdout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

/// Which scalar statistics `test` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Sadf,
    Gsadf,
    Both,
}

/// Statistic a critical-value table is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvKind {
    Sadf,
    Gsadf,
    Bsadf,
}

impl CvKind {
    fn stat_kind(self) -> StatKind {
        match self {
            CvKind::Sadf => StatKind::Sadf,
            CvKind::Gsadf => StatKind::Gsadf,
            CvKind::Bsadf => StatKind::Bsadf,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Input CSV with a `period` column and one or more value columns.
    #[arg(long)]
    pub input: PathBuf,

    /// Value column to test; repeat for several. All columns by default.
    #[arg(long = "column")]
    pub columns: Vec<String>,

    /// Which statistics to run.
    #[arg(long, value_enum, default_value_t = TestKind::Both)]
    pub kind: TestKind,

    /// Quantile levels for critical values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.90,0.95,0.99")]
    pub levels: Vec<f64>,

    #[command(flatten)]
    pub mc: McArgs,

    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DatestampArgs {
    /// Input CSV with a `period` column and one or more value columns.
    #[arg(long)]
    pub input: PathBuf,

    /// Value column to date-stamp. Required when several are present.
    #[arg(long)]
    pub column: Option<String>,

    /// Shortest episode to report, in months.
    #[arg(long, default_value_t = 1)]
    pub min_duration: usize,

    /// Also write the (period, bsadf, cv90, cv95) rows to this file.
    #[arg(long)]
    pub plot_output: Option<PathBuf>,

    #[command(flatten)]
    pub mc: McArgs,

    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CritvalsArgs {
    /// Statistic the table is for.
    #[arg(long, value_enum)]
    pub kind: CvKind,

    /// Simulated sample length.
    #[arg(long)]
    pub sample_size: usize,

    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.90,0.95,0.99")]
    pub levels: Vec<f64>,

    #[command(flatten)]
    pub mc: McArgs,

    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file describing the generating process.
    #[arg(long)]
    pub spec: PathBuf,

    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Runs one parsed invocation, writing data to `out` and provenance
/// notes to `err`.
pub fn run<W: Write, E: Write>(cli: Cli, out: &mut W, err: &mut E) -> Result<(), CliError> {
    match cli.command {
        Command::Test(args) => cmd_test(args, out, err),
        Command::Datestamp(args) => cmd_datestamp(args, out, err),
        Command::Critvals(args) => cmd_critvals(args, out, err),
        Command::Simulate(args) => cmd_simulate(args, out, err),
    }
}

fn stream_error(name: &str, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: PathBuf::from(name),
        source,
    })
}

/// Fetches a critical-value table through the cache and logs its
/// provenance to stderr.
fn cached_table<E: Write>(
    mc: &McArgs,
    kind: StatKind,
    sample_size: usize,
    levels: &[f64],
    err: &mut E,
) -> Result<CriticalValueTable<f64>, CliError> {
    let dir = mc.cache_dir();
    let (table, outcome) = critical_values_cached(
        dir,
        kind,
        sample_size,
        mc.min_window,
        mc.spec(),
        levels,
        mc.replications,
        mc.seed,
    )?;
    let note = match dir {
        Some(dir) => {
            let file = dir.join(cache_file_name(
                kind,
                sample_size,
                mc.min_window,
                mc.replications,
                mc.seed,
            ));
            format!("{outcome} ({})", file.display())
        }
        None => outcome.to_string(),
    };
    writeln!(err, "{} critical values, T={sample_size}: {note}", kind.label())
        .map_err(|e| stream_error("<stderr>", e))?;
    Ok(table)
}

fn cmd_test<W: Write, E: Write>(args: TestArgs, out: &mut W, err: &mut E) -> Result<(), CliError> {
    let columns = if args.columns.is_empty() {
        csv_value_columns(&args.input)?
    } else {
        args.columns.clone()
    };
    let mut series: Vec<Series<f64>> = Vec::with_capacity(columns.len());
    for column in &columns {
        series.push(load_csv(&args.input, column)?);
    }
    let first = &series[0];
    let sample_size = first.len();
    let report_start = first.start();
    let report_end = first.end();

    let kinds: &[StatKind] = match args.kind {
        TestKind::Sadf => &[StatKind::Sadf],
        TestKind::Gsadf => &[StatKind::Gsadf],
        TestKind::Both => &[StatKind::Sadf, StatKind::Gsadf],
    };
    let mut blocks = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let table = cached_table(&args.mc, kind, sample_size, &args.levels, err)?;
        let critical_values: Vec<LevelValue> = args
            .levels
            .iter()
            .map(|&level| LevelValue {
                level,
                value: table.scalar_at(level).expect("level present by construction"),
            })
            .collect();
        let mut results = Vec::with_capacity(series.len());
        for s in &series {
            let statistic = match kind {
                StatKind::Sadf => sadf(s, args.mc.spec(), args.mc.min_window)?.0,
                StatKind::Gsadf => gsadf(s, args.mc.spec(), args.mc.min_window)?.0,
                StatKind::Bsadf => unreachable!("test runs scalar statistics only"),
            };
            let verdicts = critical_values
                .iter()
                .map(|lv| Verdict {
                    level: lv.level,
                    critical_value: lv.value,
                    reject: statistic > lv.value,
                })
                .collect();
            results.push(SeriesResult {
                series: s.label().to_string(),
                statistic,
                verdicts,
            });
        }
        blocks.push(TestBlock {
            kind: kind.name().to_string(),
            critical_values,
            series: results,
        });
    }

    let report = TestReport {
        schema_version: SCHEMA_VERSION,
        input: args.input.display().to_string(),
        sample_size,
        start: report_start,
        end: report_end,
        min_window: args.mc.min_window,
        lags: args.mc.lags,
        replications: args.mc.replications,
        seed: args.mc.seed,
        tests: blocks,
    };
    match args.format {
        Format::Human => render_test_human(&report, out),
        Format::Json => write_json(&report, out),
        Format::Csv => render_test_csv(&report, out),
    }
    .map_err(|e| stream_error("<stdout>", e))
}

fn cmd_datestamp<W: Write, E: Write>(
    args: DatestampArgs,
    out: &mut W,
    err: &mut E,
) -> Result<(), CliError> {
    let column = match &args.column {
        Some(column) => column.clone(),
        None => {
            let mut columns = csv_value_columns(&args.input)?;
            if columns.len() > 1 {
                return Err(Error::InvalidParameter {
                    name: "column",
                    msg: format!("input has {} value columns, pass --column", columns.len()),
                }
                .into());
            }
            columns.remove(0)
        }
    };
    let series: Series<f64> = load_csv(&args.input, &column)?;
    let sample_size = series.len();

    let sequence = bsadf_sequence(&series, args.mc.spec(), args.mc.min_window)?;
    let table = cached_table(&args.mc, StatKind::Bsadf, sample_size, &[0.90, 0.95], err)?;
    let cv90 = table.sequence_at(0.90).expect("level present by construction");
    let cv95 = table.sequence_at(0.95).expect("level present by construction");
    let episodes_90 = date_stamp(&sequence, &cv90, args.min_duration)?;
    let episodes_95 = date_stamp(&sequence, &cv95, args.min_duration)?;
    let rows = sequence
        .entries
        .iter()
        .zip(cv90.iter().zip(&cv95))
        .map(|(entry, (&cv90, &cv95))| report::PlotRow {
            period: sequence.month_of(entry),
            bsadf: entry.stat,
            cv90,
            cv95,
        })
        .collect();

    let report = DatestampReport {
        schema_version: SCHEMA_VERSION,
        input: args.input.display().to_string(),
        series: series.label().to_string(),
        sample_size,
        min_window: args.mc.min_window,
        lags: args.mc.lags,
        replications: args.mc.replications,
        seed: args.mc.seed,
        min_duration: args.min_duration,
        episodes_90: episodes_90.iter().map(Episode::from).collect(),
        episodes_95: episodes_95.iter().map(Episode::from).collect(),
        rows,
    };

    if let Some(path) = &args.plot_output {
        let mut file = std::fs::File::create(path).map_err(|e| {
            CliError::Core(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
        write_plot_csv(&report.rows, &mut file).map_err(|e| {
            CliError::Core(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
        writeln!(err, "plot data written to {}", path.display())
            .map_err(|e| stream_error("<stderr>", e))?;
    }

    match args.format {
        Format::Human => render_datestamp_human(&report, out),
        Format::Json => write_json(&report, out),
        Format::Csv => write_plot_csv(&report.rows, out),
    }
    .map_err(|e| stream_error("<stdout>", e))
}

/// Builds the report form of a critical-value table.
fn critvals_report(table: &CriticalValueTable<f64>) -> CritvalsReport {
    let (values, endpoints) = match &table.values {
        TableValues::Scalar(values) => {
            let pairs = table
                .levels
                .iter()
                .zip(values)
                .map(|(&level, &value)| LevelValue { level, value })
                .collect();
            (Some(pairs), None)
        }
        TableValues::PerEndpoint { endpoints, rows } => {
            let rows = endpoints
                .iter()
                .zip(rows)
                .map(|(&endpoint, row)| EndpointRow {
                    endpoint,
                    values: row.clone(),
                })
                .collect();
            (None, Some(rows))
        }
    };
    CritvalsReport {
        schema_version: SCHEMA_VERSION,
        kind: table.kind.name().to_string(),
        sample_size: table.sample_size,
        min_window: table.min_window,
        lags: table.spec.lags,
        replications: table.replications,
        seed: table.seed,
        levels: table.levels.clone(),
        values,
        endpoints,
    }
}

fn cmd_critvals<W: Write, E: Write>(
    args: CritvalsArgs,
    out: &mut W,
    err: &mut E,
) -> Result<(), CliError> {
    let table = cached_table(
        &args.mc,
        args.kind.stat_kind(),
        args.sample_size,
        &args.levels,
        err,
    )?;
    let report = critvals_report(&table);
    match args.format {
        Format::Human => render_critvals_human(&report, out),
        Format::Json => write_json(&report, out),
        Format::Csv => render_critvals_csv(&report, out),
    }
    .map_err(|e| stream_error("<stdout>", e))
}

fn cmd_simulate<W: Write, E: Write>(
    args: SimulateArgs,
    out: &mut W,
    err: &mut E,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| {
        CliError::Core(Error::Io {
            path: args.spec.clone(),
            source: e,
        })
    })?;
    let spec: DgpSpec = toml::from_str(&text).map_err(|e| CliError::SpecParse {
        path: args.spec.clone(),
        msg: e.to_string(),
    })?;
    let series: Series<f64> = generate(&spec)?;
    match &args.output {
        Some(path) => {
            save_csv(&series, path)?;
            writeln!(err, "wrote {} observations to {}", series.len(), path.display())
                .map_err(|e| stream_error("<stderr>", e))?;
        }
        None => write_csv(&series, &mut *out).map_err(|e| stream_error("<stdout>", e))?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_and_help_exists() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_partition_the_error_space() {
        let input = CliError::Core(Error::EmptySeries);
        let numerical = CliError::Core(Error::DegenerateFit);
        let config = CliError::Core(Error::InvalidParameter {
            name: "levels",
            msg: "empty".into(),
        });
        let spec = CliError::SpecParse {
            path: "spec.toml".into(),
            msg: "bad".into(),
        };
        assert_eq!(exit_code(&input), 2);
        assert_eq!(exit_code(&numerical), 3);
        assert_eq!(exit_code(&config), 4);
        assert_eq!(exit_code(&spec), 2);
    }

    #[test]
    fn no_cache_overrides_cache_dir() {
        let mc = McArgs {
            min_window: 12,
            lags: 0,
            replications: 1000,
            seed: 1,
            cache_dir: Some(PathBuf::from("/tmp/x")),
            no_cache: true,
        };
        assert_eq!(mc.cache_dir(), None);
    }

    #[test]
    fn dgp_spec_parses_from_toml() {
        let spec: DgpSpec = toml::from_str(
            "kind = \"explosive-ar\"\nbeta = 1.05\nlength = 30\nseed = 7\nnoise = false\n",
        )
        .unwrap();
        let series: Series<f64> = generate(&spec).unwrap();
        assert_eq!(series.len(), 30);
    }
}
