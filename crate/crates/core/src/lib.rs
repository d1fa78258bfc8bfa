//! Detection and date-stamping of explosive episodes in monthly time series.
//!
//! The crate implements recursive right-tailed unit-root tests: the
//! forward-expanding supremum test (SADF), its generalized all-windows
//! variant (GSADF), and the backward supremum sequence (BSADF) used to
//! date-stamp individual episodes. Critical values come from Monte Carlo
//! simulation of a driftless Gaussian random walk under the null, with
//! deterministic per-replication seeding so results are reproducible.
//!
//! Numeric code is generic over [`Scalar`], which is implemented for `f32`
//! and `f64`. The `*64` aliases at the crate root cover the common case.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

pub mod adf;
pub mod cache;
pub mod critical_values;
pub mod dgp;
pub mod error;
pub mod month;
pub mod ols;
pub mod recursive;
pub mod series;

pub use adf::{adf_t_stat, AdfResult, AdfSpec};
pub use cache::{cache_file_name, cache_get, cache_put, critical_values_cached, CacheOutcome};
pub use critical_values::{
    bsadf_cv_sequence, critical_values, replication_seed, simulate_null, CriticalValueTable,
    StatKind, TableValues,
};
pub use dgp::{collapse_times, generate, DgpKind, DgpSpec};
pub use error::Error;
pub use month::YearMonth;
pub use recursive::{
    bsadf_sequence, date_stamp, gsadf, sadf, BubbleEpisode, SequenceKind, StatEntry, StatSequence,
};
pub use series::{
    csv_value_columns, load_csv, price_rent_ratio, ratio_from_rental_yield, read_csv, save_csv,
    spread, write_csv, FractionalWindow, Series, MAGNITUDE_CAP,
};

/// Types the standard normal distribution can sample into.
///
/// This exists as a named supertrait of [`Scalar`] so that generic code
/// bounded on `Scalar` alone can draw Gaussian innovations.
pub trait NormalSample: Sized {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl<T> NormalSample for T
where
    StandardNormal: Distribution<T>,
{
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> T {
        StandardNormal.sample(rng)
    }
}

/// Floating-point element type for series and statistics.
///
/// The bound set covers everything the algorithms need: IEEE arithmetic,
/// conversions from sizes and literals, standard-normal sampling, and
/// round-trip text formatting for the cache file format.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + NormalSample
    + FromStr
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Conversion that cannot fail for the small constants used internally.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in Scalar")
    }

    /// Lossy widening to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar representable as f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + NormalSample
        + FromStr
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// [`series::Series`] over `f64`.
pub type Series64 = series::Series<f64>;
/// [`adf::AdfResult`] over `f64`.
pub type AdfResult64 = adf::AdfResult<f64>;
/// [`recursive::StatSequence`] over `f64`.
pub type StatSequence64 = recursive::StatSequence<f64>;
/// [`recursive::BubbleEpisode`] over `f64`.
pub type BubbleEpisode64 = recursive::BubbleEpisode<f64>;
/// [`critical_values::CriticalValueTable`] over `f64`.
pub type CriticalValueTable64 = critical_values::CriticalValueTable<f64>;
