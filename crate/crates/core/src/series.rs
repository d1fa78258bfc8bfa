//! Monthly series container, CSV ingestion, and valuation-ratio transforms.

use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::month::YearMonth;
use crate::Scalar;

/// Ingestion guard against unit errors; values this large are not prices,
/// rents, or ratios in any sane unit.
pub const MAGNITUDE_CAP: f64 = 1e12;

/// A gap-free monthly series.
///
/// Invariants: at least one observation, every value finite, observation
/// `i` belongs to calendar month `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<S> {
    start: YearMonth,
    values: Vec<S>,
    label: String,
}

impl<S: Scalar> Series<S> {
    /// Wraps raw values, rejecting empty input and non-finite entries.
    pub fn new(start: YearMonth, values: Vec<S>, label: impl Into<String>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Series {
            start,
            values,
            label: label.into(),
        })
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Calendar month of observation `index`.
    pub fn month_at(&self, index: usize) -> YearMonth {
        self.start.plus(index)
    }

    /// Month of the last observation.
    pub fn end(&self) -> YearMonth {
        self.month_at(self.len() - 1)
    }

    fn check_aligned(&self, other: &Series<S>) -> Result<(), Error> {
        if self.start != other.start || self.len() != other.len() {
            return Err(Error::Misaligned {
                msg: format!(
                    "{:?} covers {}..{} ({} obs), {:?} covers {}..{} ({} obs)",
                    self.label,
                    self.start,
                    self.end(),
                    self.len(),
                    other.label,
                    other.start,
                    other.end(),
                    other.len()
                ),
            });
        }
        Ok(())
    }
}

/// Window of a sample expressed as fractions of its length.
///
/// `start` and `end` are the window bounds, `min_window` the smallest
/// admissible window, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FractionalWindow {
    pub start: f64,
    pub end: f64,
    pub min_window: f64,
}

impl FractionalWindow {
    /// Converts observation counts into fractions of a length-`total`
    /// sample. `start_obs..end_obs` is half open.
    pub fn from_obs(
        start_obs: usize,
        end_obs: usize,
        min_window_obs: usize,
        total: usize,
    ) -> Result<Self, Error> {
        if total == 0 || start_obs >= end_obs || end_obs > total || min_window_obs > total {
            return Err(Error::InvalidParameter {
                name: "window",
                msg: format!(
                    "window [{start_obs}, {end_obs}) with min {min_window_obs} \
                     does not fit a sample of {total}"
                ),
            });
        }
        Ok(FractionalWindow {
            start: start_obs as f64 / total as f64,
            end: end_obs as f64 / total as f64,
            min_window: min_window_obs as f64 / total as f64,
        })
    }

    /// First observation index in a length-`total` sample.
    pub fn start_obs(&self, total: usize) -> usize {
        (self.start * total as f64).round() as usize
    }

    /// One past the last observation index in a length-`total` sample.
    pub fn end_obs(&self, total: usize) -> usize {
        (self.end * total as f64).round() as usize
    }
}

/// Reads one named column of a monthly CSV file.
///
/// The format is a header row whose first column is `period`, months as
/// `YYYY-MM` in strictly consecutive ascending order, UTF-8, `.` decimal
/// separator. Values larger than [`MAGNITUDE_CAP`] in magnitude are
/// rejected as unit errors.
pub fn load_csv<S: Scalar>(path: &Path, column: &str) -> Result<Series<S>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, column)
}

/// [`load_csv`] over any reader.
pub fn read_csv<S: Scalar, R: std::io::Read>(reader: R, column: &str) -> Result<Series<S>, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::CsvParse {
            row: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.get(0) != Some("period") {
        return Err(Error::CsvParse {
            row: 1,
            msg: format!(
                "first column must be 'period', found {:?}",
                headers.get(0).unwrap_or("")
            ),
        });
    }
    let col_idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::CsvParse {
            row: 1,
            msg: format!("no column named {column:?}"),
        })?;
    if col_idx == 0 {
        return Err(Error::CsvParse {
            row: 1,
            msg: "the period column holds months, not values".into(),
        });
    }

    let mut start: Option<YearMonth> = None;
    let mut prev: Option<YearMonth> = None;
    let mut values: Vec<S> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::CsvParse {
            row,
            msg: e.to_string(),
        })?;
        let month: YearMonth = record
            .get(0)
            .ok_or_else(|| Error::CsvParse {
                row,
                msg: "missing period cell".into(),
            })?
            .parse()?;
        if let Some(p) = prev {
            let expected = p.next();
            if month != expected {
                return Err(Error::MonthGap {
                    row,
                    expected,
                    found: month,
                });
            }
        } else {
            start = Some(month);
        }
        prev = Some(month);

        let cell = record.get(col_idx).ok_or_else(|| Error::CsvParse {
            row,
            msg: format!("missing value cell for column {column:?}"),
        })?;
        let value: S = cell.parse().map_err(|_| Error::CsvParse {
            row,
            msg: format!("non-numeric value {cell:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::CsvParse {
                row,
                msg: format!("non-finite value {cell:?}"),
            });
        }
        let magnitude = value.abs().to_f64_lossy();
        if magnitude > MAGNITUDE_CAP {
            return Err(Error::MagnitudeExceeded {
                row,
                value: value.to_f64_lossy(),
                cap: MAGNITUDE_CAP,
            });
        }
        values.push(value);
    }

    let start = start.ok_or(Error::EmptySeries)?;
    Series::new(start, values, column)
}

/// Names of the value columns of a monthly CSV file, in header order.
pub fn csv_value_columns(path: &Path) -> Result<Vec<String>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::CsvParse {
        row: 1,
        msg: e.to_string(),
    })?;
    if headers.get(0) != Some("period") {
        return Err(Error::CsvParse {
            row: 1,
            msg: format!(
                "first column must be 'period', found {:?}",
                headers.get(0).unwrap_or("")
            ),
        });
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    if columns.is_empty() {
        return Err(Error::CsvParse {
            row: 1,
            msg: "no value columns after 'period'".into(),
        });
    }
    Ok(columns)
}

/// Writes a series as `period,<label>` CSV with round-trip float text.
pub fn write_csv<S: Scalar, W: Write>(series: &Series<S>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "period,{}", series.label())?;
    for (i, v) in series.values().iter().enumerate() {
        writeln!(out, "{},{}", series.month_at(i), v)?;
    }
    Ok(())
}

/// [`write_csv`] to a file path.
pub fn save_csv<S: Scalar>(series: &Series<S>, path: &Path) -> Result<(), Error> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(series, &mut file).map_err(|e| Error::io(path, e))
}

/// Elementwise price over annual rent.
pub fn price_rent_ratio<S: Scalar>(
    price: &Series<S>,
    annual_rent: &Series<S>,
) -> Result<Series<S>, Error> {
    price.check_aligned(annual_rent)?;
    let mut values = Vec::with_capacity(price.len());
    for (index, (&p, &r)) in price.values().iter().zip(annual_rent.values()).enumerate() {
        if !(r > S::zero()) {
            return Err(Error::Domain {
                msg: format!("annual rent must be positive, got {r} at index {index}"),
            });
        }
        values.push(p / r);
    }
    Series::new(
        price.start(),
        values,
        format!("{}/{}", price.label(), annual_rent.label()),
    )
}

/// Price-rent ratio implied by a monthly rental yield: `1 / (12 * yield)`.
pub fn ratio_from_rental_yield<S: Scalar>(monthly_yield: &Series<S>) -> Result<Series<S>, Error> {
    let twelve = S::from_f64_lossy(12.0);
    let mut values = Vec::with_capacity(monthly_yield.len());
    for (index, &y) in monthly_yield.values().iter().enumerate() {
        if !(y > S::zero()) {
            return Err(Error::Domain {
                msg: format!("rental yield must be positive, got {y} at index {index}"),
            });
        }
        values.push(S::one() / (twelve * y));
    }
    Series::new(
        monthly_yield.start(),
        values,
        format!("pr({})", monthly_yield.label()),
    )
}

/// Spread of price over discounted rent: `P - R / rate`.
pub fn spread<S: Scalar>(
    price: &Series<S>,
    rent: &Series<S>,
    discount_rate: S,
) -> Result<Series<S>, Error> {
    price.check_aligned(rent)?;
    if !(discount_rate > S::zero()) {
        return Err(Error::Domain {
            msg: format!("discount rate must be positive, got {discount_rate}"),
        });
    }
    let values = price
        .values()
        .iter()
        .zip(rent.values())
        .map(|(&p, &r)| p - r / discount_rate)
        .collect();
    Series::new(
        price.start(),
        values,
        format!("spread({},{})", price.label(), rent.label()),
    )
}
