//! Report types and renderers for the command-line front end.
//!
//! Each subcommand builds one serializable report; JSON output is the
//! serde form of that struct, so parsing a report back yields the same
//! value. The human and CSV renderers are projections of the same data
//! and never recompute anything.

use std::io::{self, Write};

use bubbletest::YearMonth;
use serde::{Deserialize, Serialize};

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// A quantile level paired with its critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub level: f64,
    pub value: f64,
}

/// Test decision at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub level: f64,
    pub critical_value: f64,
    /// Whether the statistic strictly exceeds the critical value.
    pub reject: bool,
}

/// One tested series within a test block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub series: String,
    pub statistic: f64,
    pub verdicts: Vec<Verdict>,
}

/// Results of one statistic across all requested columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBlock {
    pub kind: String,
    /// Critical values shared by every series in the block; all columns
    /// of one input have the same sample geometry.
    pub critical_values: Vec<LevelValue>,
    pub series: Vec<SeriesResult>,
}

/// Full `test` subcommand report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub input: String,
    pub sample_size: usize,
    pub start: YearMonth,
    pub end: YearMonth,
    pub min_window: usize,
    pub lags: usize,
    pub replications: usize,
    pub seed: u64,
    pub tests: Vec<TestBlock>,
}

/// One detected episode, in calendar months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub origination: YearMonth,
    /// First month back below the critical sequence; `None` while the
    /// episode is still open at the end of the sample.
    pub termination: Option<YearMonth>,
    pub peak_stat: f64,
    pub peak_month: YearMonth,
}

impl From<&bubbletest::BubbleEpisode<f64>> for Episode {
    fn from(e: &bubbletest::BubbleEpisode<f64>) -> Self {
        Episode {
            origination: e.origination,
            termination: e.termination,
            peak_stat: e.peak_stat,
            peak_month: e.peak_month,
        }
    }
}

/// One row of the data behind a date-stamping chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub period: YearMonth,
    pub bsadf: f64,
    pub cv90: f64,
    pub cv95: f64,
}

/// Full `datestamp` subcommand report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatestampReport {
    pub schema_version: u32,
    pub input: String,
    pub series: String,
    pub sample_size: usize,
    pub min_window: usize,
    pub lags: usize,
    pub replications: usize,
    pub seed: u64,
    pub min_duration: usize,
    pub episodes_90: Vec<Episode>,
    pub episodes_95: Vec<Episode>,
    pub rows: Vec<PlotRow>,
}

/// Critical values at one endpoint of a BSADF table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointRow {
    pub endpoint: usize,
    pub values: Vec<f64>,
}

/// Full `critvals` subcommand report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritvalsReport {
    pub schema_version: u32,
    pub kind: String,
    pub sample_size: usize,
    pub min_window: usize,
    pub lags: usize,
    pub replications: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    /// Scalar payload (SADF and GSADF tables).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<LevelValue>>,
    /// Per-endpoint payload (BSADF tables).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<Vec<EndpointRow>>,
}

/// Percent label of a level: 0.9 becomes "90", 0.975 becomes "97.5".
pub fn level_label(level: f64) -> String {
    let text = format!("{:.4}", level * 100.0);
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Highest level whose critical value the statistic exceeds, phrased as
/// a decision. Quantiles rise with the level, so the rejected levels are
/// always a prefix and the last one is the strongest.
pub fn verdict_phrase(verdicts: &[Verdict]) -> String {
    verdicts
        .iter()
        .rev()
        .find(|v| v.reject)
        .map(|v| format!("reject at {}%", level_label(v.level)))
        .unwrap_or_else(|| "fail to reject".to_string())
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, out: &mut W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

pub fn render_test_human<W: Write>(r: &TestReport, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "input: {}  observations: {} ({}..{})",
        r.input, r.sample_size, r.start, r.end
    )?;
    writeln!(
        out,
        "min_window: {}  lags: {}  replications: {}  seed: {}",
        r.min_window, r.lags, r.replications, r.seed
    )?;
    for block in &r.tests {
        writeln!(out)?;
        let name_width = block
            .series
            .iter()
            .map(|s| s.series.len())
            .chain([block.kind.len()])
            .max()
            .unwrap_or(8)
            .max(8);
        write!(out, "{:<name_width$}  {:>10}", block.kind.to_uppercase(), "statistic")?;
        for lv in &block.critical_values {
            write!(out, "  {:>10}", format!("{}% c.v.", level_label(lv.level)))?;
        }
        writeln!(out, "  verdict")?;
        for s in &block.series {
            write!(out, "{:<name_width$}  {:>10.4}", s.series, s.statistic)?;
            for v in &s.verdicts {
                write!(out, "  {:>10.4}", v.critical_value)?;
            }
            writeln!(out, "  {}", verdict_phrase(&s.verdicts))?;
        }
    }
    Ok(())
}

pub fn render_test_csv<W: Write>(r: &TestReport, out: &mut W) -> io::Result<()> {
    write!(out, "kind,series,statistic")?;
    let levels: Vec<&LevelValue> = r
        .tests
        .first()
        .map(|b| b.critical_values.iter().collect())
        .unwrap_or_default();
    for lv in &levels {
        write!(out, ",cv{}", level_label(lv.level))?;
    }
    for lv in &levels {
        write!(out, ",reject{}", level_label(lv.level))?;
    }
    writeln!(out)?;
    for block in &r.tests {
        for s in &block.series {
            write!(out, "{},{},{}", block.kind, s.series, s.statistic)?;
            for v in &s.verdicts {
                write!(out, ",{}", v.critical_value)?;
            }
            for v in &s.verdicts {
                write!(out, ",{}", v.reject)?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn render_episodes<W: Write>(label: &str, episodes: &[Episode], out: &mut W) -> io::Result<()> {
    writeln!(out, "episodes at {label}%:")?;
    if episodes.is_empty() {
        writeln!(out, "  none")?;
        return Ok(());
    }
    for e in episodes {
        let end = e
            .termination
            .map_or_else(|| "open".to_string(), |m| m.to_string());
        writeln!(
            out,
            "  {}..{}  peak {:.4} at {}",
            e.origination, end, e.peak_stat, e.peak_month
        )?;
    }
    Ok(())
}

pub fn render_datestamp_human<W: Write>(r: &DatestampReport, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "input: {}  series: {}  observations: {}",
        r.input, r.series, r.sample_size
    )?;
    writeln!(
        out,
        "min_window: {}  lags: {}  replications: {}  seed: {}  min_duration: {}",
        r.min_window, r.lags, r.replications, r.seed, r.min_duration
    )?;
    writeln!(out)?;
    render_episodes("90", &r.episodes_90, out)?;
    render_episodes("95", &r.episodes_95, out)?;
    writeln!(out, "plot rows: {} (period, bsadf, cv90, cv95)", r.rows.len())
}

/// Writes the tidy plot rows as CSV with round-trip float text.
pub fn write_plot_csv<W: Write>(rows: &[PlotRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "period,bsadf,cv90,cv95")?;
    for row in rows {
        writeln!(out, "{},{},{},{}", row.period, row.bsadf, row.cv90, row.cv95)?;
    }
    Ok(())
}

pub fn render_critvals_human<W: Write>(r: &CritvalsReport, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "{} critical values  T={}  min_window={}  lags={}  replications={}  seed={}",
        r.kind.to_uppercase(),
        r.sample_size,
        r.min_window,
        r.lags,
        r.replications,
        r.seed
    )?;
    if let Some(values) = &r.values {
        for lv in values {
            writeln!(out, "  {:>5}%  {:.4}", level_label(lv.level), lv.value)?;
        }
    }
    if let Some(endpoints) = &r.endpoints {
        write!(out, "{:>10}", "endpoint")?;
        for level in &r.levels {
            write!(out, "  {:>8}", format!("{}%", level_label(*level)))?;
        }
        writeln!(out)?;
        for row in endpoints {
            write!(out, "{:>10}", row.endpoint)?;
            for v in &row.values {
                write!(out, "  {v:>8.4}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn render_critvals_csv<W: Write>(r: &CritvalsReport, out: &mut W) -> io::Result<()> {
    if let Some(values) = &r.values {
        writeln!(out, "level,value")?;
        for lv in values {
            writeln!(out, "{},{}", lv.level, lv.value)?;
        }
    }
    if let Some(endpoints) = &r.endpoints {
        write!(out, "endpoint")?;
        for level in &r.levels {
            write!(out, ",cv{}", level_label(*level))?;
        }
        writeln!(out)?;
        for row in endpoints {
            write!(out, "{}", row.endpoint)?;
            for v in &row.values {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
