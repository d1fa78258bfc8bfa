//! Calendar months, the time axis of every series in this crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A calendar month such as `2008-01`.
///
/// Ordering is chronological. Arithmetic is exact; leap years are
/// irrelevant at month granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    /// Builds a month, rejecting `month` outside `1..=12`.
    pub fn new(year: i32, month: u32) -> Result<Self, Error> {
        if (1..=12).contains(&month) {
            Ok(YearMonth { year, month })
        } else {
            Err(Error::MonthFormat {
                input: format!("{year:04}-{month:02}"),
            })
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// Month number in `1..=12`.
    pub fn month(&self) -> u32 {
        self.month
    }

    /// The month `count` steps later.
    pub fn plus(&self, count: usize) -> YearMonth {
        let index = self.year as i64 * 12 + (self.month as i64 - 1) + count as i64;
        YearMonth {
            year: index.div_euclid(12) as i32,
            month: (index.rem_euclid(12) + 1) as u32,
        }
    }

    /// The immediately following month.
    pub fn next(&self) -> YearMonth {
        self.plus(1)
    }

    /// Signed number of months from `earlier` to `self`.
    pub fn months_since(&self, earlier: YearMonth) -> i64 {
        (self.year as i64 - earlier.year as i64) * 12 + self.month as i64 - earlier.month as i64
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::MonthFormat {
            input: s.to_string(),
        };
        let (year_part, month_part) = s.split_once('-').ok_or_else(bad)?;
        if year_part.len() != 4 || month_part.len() != 2 {
            return Err(bad());
        }
        let year: i32 = year_part.parse().map_err(|_| bad())?;
        let month: u32 = month_part.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for YearMonth {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
