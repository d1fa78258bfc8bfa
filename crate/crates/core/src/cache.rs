//! On-disk cache for critical-value tables.
//!
//! Entries are self-describing text files: a header naming every
//! parameter the table depends on, the payload with round-trip float
//! formatting, and a final sha256 checksum line. A mismatched checksum or
//! unparseable entry is surfaced as an error by [`cache_get`];
//! [`critical_values_cached`] responds by recomputing and rewriting.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::adf::AdfSpec;
use crate::critical_values::{critical_values, CriticalValueTable, StatKind, TableValues};
use crate::error::Error;
use crate::Scalar;

const FORMAT_LINE: &str = "bubbletest-cvt 1";

/// File name an entry with these parameters lives under.
///
/// The adf layout and quantile levels are recorded in the header rather
/// than the name; [`cache_get`] treats a header mismatch as a miss.
pub fn cache_file_name(
    kind: StatKind,
    sample_size: usize,
    min_window: usize,
    replications: usize,
    seed: u64,
) -> String {
    format!(
        "{}_T{sample_size}_w{min_window}_r{replications}_s{seed}.cvt",
        kind.name()
    )
}

fn sha256_hex(body: &str) -> String {
    let digest = Sha256::digest(body.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use fmt::Write;
        write!(hex, "{byte:02x}").expect("writing to String cannot fail");
    }
    hex
}

fn serialize_body<S: Scalar>(table: &CriticalValueTable<S>) -> String {
    use fmt::Write;
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{FORMAT_LINE}").unwrap();
    writeln!(w, "kind {}", table.kind.name()).unwrap();
    writeln!(w, "sample_size {}", table.sample_size).unwrap();
    writeln!(w, "min_window {}", table.min_window).unwrap();
    writeln!(w, "lags {}", table.spec.lags).unwrap();
    writeln!(w, "constant {}", table.spec.constant).unwrap();
    writeln!(w, "trend {}", table.spec.trend).unwrap();
    writeln!(w, "replications {}", table.replications).unwrap();
    writeln!(w, "seed {}", table.seed).unwrap();
    write!(w, "levels").unwrap();
    for level in &table.levels {
        write!(w, " {level}").unwrap();
    }
    writeln!(w).unwrap();
    match &table.values {
        TableValues::Scalar(values) => {
            writeln!(w, "payload scalar").unwrap();
            let mut first = true;
            for v in values {
                write!(w, "{}{v}", if first { "" } else { " " }).unwrap();
                first = false;
            }
            writeln!(w).unwrap();
        }
        TableValues::PerEndpoint { endpoints, rows } => {
            writeln!(w, "payload per-endpoint {}", endpoints.len()).unwrap();
            for (endpoint, row) in endpoints.iter().zip(rows) {
                write!(w, "{endpoint}").unwrap();
                for v in row {
                    write!(w, " {v}").unwrap();
                }
                writeln!(w).unwrap();
            }
        }
    }
    out
}

struct BodyParser<'a> {
    lines: std::str::Lines<'a>,
    path: &'a Path,
}

impl<'a> BodyParser<'a> {
    fn fail(&self, msg: impl Into<String>) -> Error {
        Error::CacheFormat {
            path: self.path.to_path_buf(),
            msg: msg.into(),
        }
    }

    fn line(&mut self) -> Result<&'a str, Error> {
        self.lines.next().ok_or_else(|| self.fail("truncated entry"))
    }

    /// Next line, which must start with `key ` and whose remainder is
    /// returned.
    fn field(&mut self, key: &str) -> Result<&'a str, Error> {
        let line = self.line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.fail(format!("expected field {key:?}, found {line:?}")))
    }

    fn parse<T: std::str::FromStr>(&self, what: &str, text: &str) -> Result<T, Error> {
        text.parse()
            .map_err(|_| self.fail(format!("bad {what}: {text:?}")))
    }
}

fn parse_body<S: Scalar>(body: &str, path: &Path) -> Result<CriticalValueTable<S>, Error> {
    let mut p = BodyParser {
        lines: body.lines(),
        path,
    };
    let format = p.line()?;
    if format != FORMAT_LINE {
        return Err(p.fail(format!("unsupported format {format:?}")));
    }
    let kind: StatKind = {
        let text = p.field("kind")?;
        p.parse("kind", text)?
    };
    let sample_size: usize = {
        let text = p.field("sample_size")?;
        p.parse("sample_size", text)?
    };
    let min_window: usize = {
        let text = p.field("min_window")?;
        p.parse("min_window", text)?
    };
    let lags: usize = {
        let text = p.field("lags")?;
        p.parse("lags", text)?
    };
    let constant: bool = {
        let text = p.field("constant")?;
        p.parse("constant", text)?
    };
    let trend: bool = {
        let text = p.field("trend")?;
        p.parse("trend", text)?
    };
    let replications: usize = {
        let text = p.field("replications")?;
        p.parse("replications", text)?
    };
    let seed: u64 = {
        let text = p.field("seed")?;
        p.parse("seed", text)?
    };
    let levels: Vec<f64> = {
        let text = p.field("levels")?;
        text.split(' ')
            .map(|t| p.parse("level", t))
            .collect::<Result<_, _>>()?
    };

    let payload = p.field("payload")?;
    let values = if payload == "scalar" {
        let line = p.line()?;
        let values: Vec<S> = line
            .split(' ')
            .map(|t| p.parse("value", t))
            .collect::<Result<_, _>>()?;
        if values.len() != levels.len() {
            return Err(p.fail(format!(
                "{} values for {} levels",
                values.len(),
                levels.len()
            )));
        }
        TableValues::Scalar(values)
    } else if let Some(count) = payload.strip_prefix("per-endpoint ") {
        let count: usize = p.parse("endpoint count", count)?;
        let mut endpoints = Vec::with_capacity(count);
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            let line = p.line()?;
            let mut cells = line.split(' ');
            let endpoint_text = cells.next().ok_or_else(|| p.fail("empty payload row"))?;
            endpoints.push(p.parse("endpoint", endpoint_text)?);
            let row: Vec<S> = cells
                .map(|t| p.parse("value", t))
                .collect::<Result<_, _>>()?;
            if row.len() != levels.len() {
                return Err(p.fail(format!("{} values for {} levels", row.len(), levels.len())));
            }
            rows.push(row);
        }
        TableValues::PerEndpoint { endpoints, rows }
    } else {
        return Err(p.fail(format!("unknown payload layout {payload:?}")));
    };
    if p.lines.next().is_some() {
        return Err(p.fail("trailing content after payload"));
    }

    Ok(CriticalValueTable {
        kind,
        sample_size,
        min_window,
        spec: AdfSpec {
            lags,
            constant,
            trend,
        },
        replications,
        seed,
        levels,
        values,
    })
}

fn levels_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// Looks up a table. `Ok(None)` means absent or present with different
/// parameters; a corrupt entry is an error so the caller can decide to
/// recompute.
pub fn cache_get<S: Scalar>(
    dir: &Path,
    kind: StatKind,
    sample_size: usize,
    min_window: usize,
    spec: AdfSpec,
    levels: &[f64],
    replications: usize,
    seed: u64,
) -> Result<Option<CriticalValueTable<S>>, Error> {
    let path = dir.join(cache_file_name(kind, sample_size, min_window, replications, seed));
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };

    let Some((body, checksum_line)) = split_checksum(&text) else {
        return Err(Error::CacheFormat {
            path,
            msg: "missing checksum line".into(),
        });
    };
    if sha256_hex(body) != checksum_line {
        return Err(Error::CacheChecksum { path });
    }

    let table = parse_body::<S>(body, &path)?;
    let matches = table.kind == kind
        && table.sample_size == sample_size
        && table.min_window == min_window
        && table.spec == spec
        && table.replications == replications
        && table.seed == seed
        && levels_match(&table.levels, levels);
    Ok(if matches { Some(table) } else { None })
}

/// Splits off the final `checksum <hex>` line.
fn split_checksum(text: &str) -> Option<(&str, &str)> {
    let trimmed = text.strip_suffix('\n')?;
    let newline = trimmed.rfind('\n')?;
    let (body, last) = trimmed.split_at(newline + 1);
    let hex = last.strip_prefix("checksum ")?;
    Some((body, hex))
}

/// Writes a table to the cache, creating the directory if needed.
///
/// Only production-sized tables are admitted; tiny tables would poison
/// later runs with noisy quantiles.
pub fn cache_put<S: Scalar>(dir: &Path, table: &CriticalValueTable<S>) -> Result<PathBuf, Error> {
    if table.replications < 1_000 {
        return Err(Error::InvalidParameter {
            name: "replications",
            msg: format!(
                "{} is below the cache admission minimum of 1000",
                table.replications
            ),
        });
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(cache_file_name(
        table.kind,
        table.sample_size,
        table.min_window,
        table.replications,
        table.seed,
    ));
    let body = serialize_body(table);
    let checksum = sha256_hex(&body);
    let contents = format!("{body}checksum {checksum}\n");
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// How [`critical_values_cached`] obtained its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    /// No cache directory was supplied.
    Disabled,
    /// Served from a valid cache entry.
    Hit,
    /// Absent or mismatched entry; computed and stored.
    Miss,
    /// Corrupt entry; recomputed and rewrote it.
    Recovered,
}

impl fmt::Display for CacheOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            CacheOutcome::Disabled => "cache disabled",
            CacheOutcome::Hit => "cache hit",
            CacheOutcome::Miss => "cache miss, computed",
            CacheOutcome::Recovered => "cache entry corrupt, recomputed",
        };
        f.write_str(text)
    }
}

/// [`critical_values`] behind the cache: serves a valid entry, computes
/// and stores on a miss, recomputes over a corrupt entry.
#[allow(clippy::too_many_arguments)]
pub fn critical_values_cached<S: Scalar>(
    dir: Option<&Path>,
    kind: StatKind,
    sample_size: usize,
    min_window: usize,
    spec: AdfSpec,
    levels: &[f64],
    replications: usize,
    seed: u64,
) -> Result<(CriticalValueTable<S>, CacheOutcome), Error> {
    let Some(dir) = dir else {
        let table = critical_values(kind, sample_size, min_window, spec, levels, replications, seed)?;
        return Ok((table, CacheOutcome::Disabled));
    };
    let outcome = match cache_get::<S>(
        dir,
        kind,
        sample_size,
        min_window,
        spec,
        levels,
        replications,
        seed,
    ) {
        Ok(Some(table)) => return Ok((table, CacheOutcome::Hit)),
        Ok(None) => CacheOutcome::Miss,
        Err(Error::CacheChecksum { .. } | Error::CacheFormat { .. }) => CacheOutcome::Recovered,
        Err(other) => return Err(other),
    };
    let table = critical_values(kind, sample_size, min_window, spec, levels, replications, seed)?;
    cache_put(dir, &table)?;
    Ok((table, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_table(kind: StatKind) -> CriticalValueTable<f64> {
        critical_values(kind, 15, 12, AdfSpec::default(), &[0.9, 0.95], 1000, 21).unwrap()
    }

    #[test]
    fn round_trips_scalar_and_endpoint_tables() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [StatKind::Sadf, StatKind::Gsadf, StatKind::Bsadf] {
            let table = small_table(kind);
            let path = cache_put(dir.path(), &table).unwrap();
            assert!(path.exists());
            let loaded = cache_get::<f64>(
                dir.path(),
                kind,
                15,
                12,
                AdfSpec::default(),
                &[0.9, 0.95],
                1000,
                21,
            )
            .unwrap()
            .expect("entry present");
            assert_eq!(loaded, table);
        }
    }

    #[test]
    fn absent_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let got = cache_get::<f64>(
            dir.path(),
            StatKind::Sadf,
            15,
            12,
            AdfSpec::default(),
            &[0.9],
            1000,
            21,
        )
        .unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn mismatched_header_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let table = small_table(StatKind::Sadf);
        cache_put(dir.path(), &table).unwrap();
        // Same file name, different levels.
        let got = cache_get::<f64>(
            dir.path(),
            StatKind::Sadf,
            15,
            12,
            AdfSpec::default(),
            &[0.9, 0.99],
            1000,
            21,
        )
        .unwrap();
        assert!(got.is_none());
        // Different lag layout under the same name.
        let other_spec = AdfSpec {
            lags: 1,
            ..AdfSpec::default()
        };
        let got = cache_get::<f64>(
            dir.path(),
            StatKind::Sadf,
            15,
            12,
            other_spec,
            &[0.9, 0.95],
            1000,
            21,
        )
        .unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let table = small_table(StatKind::Sadf);
        let path = cache_put(dir.path(), &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Flip one payload digit without touching the checksum line.
        let mut bytes = text.into_bytes();
        let payload_at = bytes
            .windows(b"payload scalar".len())
            .position(|w| w == b"payload scalar")
            .unwrap();
        let digit_at = payload_at
            + bytes[payload_at..]
                .iter()
                .position(|b| b.is_ascii_digit())
                .unwrap();
        bytes[digit_at] = if bytes[digit_at] == b'9' { b'8' } else { b'9' };
        std::fs::write(&path, &bytes).unwrap();

        let err = cache_get::<f64>(
            dir.path(),
            StatKind::Sadf,
            15,
            12,
            AdfSpec::default(),
            &[0.9, 0.95],
            1000,
            21,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CacheChecksum { .. }));
    }

    #[test]
    fn truncated_entry_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let table = small_table(StatKind::Sadf);
        let path = cache_put(dir.path(), &table).unwrap();
        std::fs::write(&path, "bubbletest-cvt 1\nkind sadf\n").unwrap();
        let err = cache_get::<f64>(
            dir.path(),
            StatKind::Sadf,
            15,
            12,
            AdfSpec::default(),
            &[0.9, 0.95],
            1000,
            21,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CacheFormat { .. }));
    }

    #[test]
    fn tiny_tables_are_not_admitted() {
        let table = CriticalValueTable {
            kind: StatKind::Sadf,
            sample_size: 15,
            min_window: 12,
            spec: AdfSpec::default(),
            replications: 10,
            seed: 1,
            levels: vec![0.9],
            values: TableValues::Scalar(vec![1.0]),
        };
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            cache_put(dir.path(), &table).unwrap_err(),
            Error::InvalidParameter { name: "replications", .. }
        ));
    }

    #[test]
    fn cached_wrapper_hits_after_miss_and_recovers_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let spec = AdfSpec::default();
        let args = (StatKind::Gsadf, 15usize, 12usize, spec, 1000usize, 33u64);
        let levels = [0.9, 0.95];

        let (first, outcome) = critical_values_cached::<f64>(
            Some(dir.path()),
            args.0,
            args.1,
            args.2,
            args.3,
            &levels,
            args.4,
            args.5,
        )
        .unwrap();
        assert_eq!(outcome, CacheOutcome::Miss);

        let (second, outcome) = critical_values_cached::<f64>(
            Some(dir.path()),
            args.0,
            args.1,
            args.2,
            args.3,
            &levels,
            args.4,
            args.5,
        )
        .unwrap();
        assert_eq!(outcome, CacheOutcome::Hit);
        assert_eq!(first, second);

        let path = dir
            .path()
            .join(cache_file_name(args.0, args.1, args.2, args.4, args.5));
        std::fs::write(&path, "garbage\n").unwrap();
        let (third, outcome) = critical_values_cached::<f64>(
            Some(dir.path()),
            args.0,
            args.1,
            args.2,
            args.3,
            &levels,
            args.4,
            args.5,
        )
        .unwrap();
        assert_eq!(outcome, CacheOutcome::Recovered);
        assert_eq!(first, third);

        let (_, outcome) = critical_values_cached::<f64>(
            Some(dir.path()),
            args.0,
            args.1,
            args.2,
            args.3,
            &levels,
            args.4,
            args.5,
        )
        .unwrap();
        assert_eq!(outcome, CacheOutcome::Hit);

        let (_, outcome) = critical_values_cached::<f64>(
            None, args.0, args.1, args.2, args.3, &levels, args.4, args.5,
        )
        .unwrap();
        assert_eq!(outcome, CacheOutcome::Disabled);
    }
}
