//! Finite-sample critical values by Monte Carlo simulation under the
//! unit-root null.
//!
//! Replications use seeds derived from a master seed by replication
//! index, so the result is independent of evaluation order and identical
//! between serial and parallel runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adf::AdfSpec;
use crate::error::Error;
use crate::month::YearMonth;
use crate::recursive::{bsadf_sequence, sadf};
use crate::series::Series;
use crate::Scalar;

/// Statistic a critical-value table is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum StatKind {
    Sadf,
    Gsadf,
    Bsadf,
}

impl StatKind {
    /// Lowercase name used in cache file names.
    pub fn name(&self) -> &'static str {
        match self {
            StatKind::Sadf => "sadf",
            StatKind::Gsadf => "gsadf",
            StatKind::Bsadf => "bsadf",
        }
    }

    /// Conventional uppercase label for reports.
    pub fn label(&self) -> &'static str {
        match self {
            StatKind::Sadf => "SADF",
            StatKind::Gsadf => "GSADF",
            StatKind::Bsadf => "BSADF",
        }
    }
}

impl std::str::FromStr for StatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sadf" => Ok(StatKind::Sadf),
            "gsadf" => Ok(StatKind::Gsadf),
            "bsadf" => Ok(StatKind::Bsadf),
            other => Err(Error::InvalidParameter {
                name: "kind",
                msg: format!("unknown statistic kind {other:?}"),
            }),
        }
    }
}

/// Table payload: one value per level, or one row per endpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum TableValues<S> {
    /// `values[i]` is the critical value at `levels[i]`.
    Scalar(Vec<S>),
    /// `rows[e][i]` is the critical value at endpoint `endpoints[e]` and
    /// level `levels[i]`.
    PerEndpoint {
        endpoints: Vec<usize>,
        rows: Vec<Vec<S>>,
    },
}

/// Finite-sample critical values for one statistic and sample geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable<S> {
    pub kind: StatKind,
    /// Length of the simulated null sample.
    pub sample_size: usize,
    /// Smallest admissible window, in observations.
    pub min_window: usize,
    pub spec: AdfSpec,
    pub replications: usize,
    /// Master seed the replication streams derive from.
    pub seed: u64,
    /// Quantile levels in strictly increasing order.
    pub levels: Vec<f64>,
    pub values: TableValues<S>,
}

impl<S: Scalar> CriticalValueTable<S> {
    /// Index of `level` in the table, tolerating float formatting noise.
    pub fn level_index(&self, level: f64) -> Option<usize> {
        self.levels.iter().position(|l| (l - level).abs() < 1e-9)
    }

    /// Critical value at `level` for scalar-statistic tables.
    pub fn scalar_at(&self, level: f64) -> Option<S> {
        let i = self.level_index(level)?;
        match &self.values {
            TableValues::Scalar(values) => values.get(i).copied(),
            TableValues::PerEndpoint { .. } => None,
        }
    }

    /// Per-endpoint critical sequence at `level` for endpoint tables.
    pub fn sequence_at(&self, level: f64) -> Option<Vec<S>> {
        let i = self.level_index(level)?;
        match &self.values {
            TableValues::Scalar(_) => None,
            TableValues::PerEndpoint { rows, .. } => {
                rows.iter().map(|row| row.get(i).copied()).collect()
            }
        }
    }
}

/// Seed for replication `index` of a run with `master` seed.
///
/// This is the splitmix64 output stream at position `index + 1`, a
/// standard way to spread one 64-bit seed into decorrelated streams.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulates one null path: a driftless Gaussian random walk with
/// `p_0 = 0` and unit innovation variance, observed for `length` months.
pub fn simulate_null<S: Scalar>(length: usize, seed: u64) -> Result<Series<S>, Error> {
    if length == 0 {
        return Err(Error::EmptySeries);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(length);
    let mut p = S::zero();
    values.push(p);
    for _ in 1..length {
        p = p + S::standard_normal(&mut rng);
        values.push(p);
    }
    Series::new(anchor_month(), values, "null")
}

/// Calendar anchor for simulated series; the tests are invariant to it.
fn anchor_month() -> YearMonth {
    YearMonth::new(2000, 1).expect("valid month")
}

fn validate_mc_params(
    sample_size: usize,
    min_window: usize,
    spec: AdfSpec,
    levels: &[f64],
    replications: usize,
) -> Result<(), Error> {
    if replications < 1_000 {
        return Err(Error::InvalidParameter {
            name: "replications",
            msg: format!("{replications} is below the minimum of 1000"),
        });
    }
    if min_window < spec.min_window_len() {
        return Err(Error::InvalidParameter {
            name: "min_window",
            msg: format!(
                "{min_window} observations cannot fit the regression, need {}",
                spec.min_window_len()
            ),
        });
    }
    if sample_size < min_window {
        return Err(Error::InsufficientObservations {
            needed: min_window,
            got: sample_size,
        });
    }
    if levels.is_empty() {
        return Err(Error::InvalidParameter {
            name: "levels",
            msg: "need at least one quantile level".into(),
        });
    }
    for pair in levels.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::InvalidParameter {
                name: "levels",
                msg: format!("levels must be strictly increasing, got {pair:?}"),
            });
        }
    }
    if levels[0] <= 0.0 || levels[levels.len() - 1] >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "levels",
            msg: format!("levels must lie strictly inside (0, 1), got {levels:?}"),
        });
    }
    Ok(())
}

/// Upper order statistic at `level`: entry `ceil(level * n)` of the
/// sorted sample, without interpolation.
fn order_statistic<S: Scalar>(sorted: &[S], level: f64) -> S {
    let n = sorted.len();
    let rank = (level * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn sort_finite<S: Scalar>(values: &mut [S]) {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));
}

/// Simulates the null distribution of `kind` and returns its upper
/// quantiles at the requested levels.
pub fn critical_values<S: Scalar>(
    kind: StatKind,
    sample_size: usize,
    min_window: usize,
    spec: AdfSpec,
    levels: &[f64],
    replications: usize,
    seed: u64,
) -> Result<CriticalValueTable<S>, Error> {
    validate_mc_params(sample_size, min_window, spec, levels, replications)?;

    let table_values = match kind {
        StatKind::Sadf | StatKind::Gsadf => {
            let stats: Vec<Result<S, Error>> = (0..replications as u64)
                .into_par_iter()
                .map(|index| {
                    let path = simulate_null::<S>(sample_size, replication_seed(seed, index))?;
                    match kind {
                        StatKind::Sadf => Ok(sadf(&path, spec, min_window)?.0),
                        StatKind::Gsadf => {
                            let seq = bsadf_sequence(&path, spec, min_window)?;
                            Ok(seq.max_entry().expect("non-empty by construction").stat)
                        }
                        StatKind::Bsadf => unreachable!("handled below"),
                    }
                })
                .collect();
            let mut stats = stats.into_iter().collect::<Result<Vec<S>, Error>>()?;
            sort_finite(&mut stats);
            TableValues::Scalar(levels.iter().map(|&l| order_statistic(&stats, l)).collect())
        }
        StatKind::Bsadf => {
            let endpoints: Vec<usize> = (min_window..=sample_size).collect();
            let per_rep: Vec<Result<Vec<S>, Error>> = (0..replications as u64)
                .into_par_iter()
                .map(|index| {
                    let path = simulate_null::<S>(sample_size, replication_seed(seed, index))?;
                    let seq = bsadf_sequence(&path, spec, min_window)?;
                    if seq.entries.len() != endpoints.len() {
                        return Err(Error::NoValidWindow {
                            skipped: seq.skipped_windows,
                        });
                    }
                    Ok(seq.entries.iter().map(|e| e.stat).collect())
                })
                .collect();
            let per_rep = per_rep.into_iter().collect::<Result<Vec<Vec<S>>, Error>>()?;
            let mut rows = Vec::with_capacity(endpoints.len());
            let mut column = vec![S::zero(); replications];
            for e in 0..endpoints.len() {
                for (r, rep) in per_rep.iter().enumerate() {
                    column[r] = rep[e];
                }
                sort_finite(&mut column);
                rows.push(levels.iter().map(|&l| order_statistic(&column, l)).collect());
            }
            TableValues::PerEndpoint { endpoints, rows }
        }
    };

    Ok(CriticalValueTable {
        kind,
        sample_size,
        min_window,
        spec,
        replications,
        seed,
        levels: levels.to_vec(),
        values: table_values,
    })
}

/// Per-endpoint critical sequence for the backward supremum statistic at
/// one level, aligned with the entries of a backward sweep over a
/// length-`sample_size` series.
pub fn bsadf_cv_sequence<S: Scalar>(
    sample_size: usize,
    min_window: usize,
    spec: AdfSpec,
    level: f64,
    replications: usize,
    seed: u64,
) -> Result<Vec<S>, Error> {
    let table = critical_values::<S>(
        StatKind::Bsadf,
        sample_size,
        min_window,
        spec,
        &[level],
        replications,
        seed,
    )?;
    Ok(table
        .sequence_at(level)
        .expect("level present by construction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::adf_t_stat;

    #[test]
    fn null_paths_are_deterministic_per_seed() {
        let a: Series<f64> = simulate_null(50, 7).unwrap();
        let b: Series<f64> = simulate_null(50, 7).unwrap();
        let c: Series<f64> = simulate_null(50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
        assert_eq!(a.len(), 50);
        assert_eq!(a.values()[0], 0.0);
    }

    #[test]
    fn replication_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            assert!(seen.insert(replication_seed(42, i)), "collision at {i}");
        }
        assert_ne!(replication_seed(1, 0), replication_seed(2, 0));
    }

    #[test]
    fn null_t_stat_is_left_shifted() {
        // The full-sample t-ratio under the null has a strongly negative
        // mean; a sign error anywhere in the regression would flip this.
        let reps = 10_000;
        let mut sum = 0.0f64;
        for i in 0..reps {
            let path: Series<f64> = simulate_null(100, replication_seed(11, i)).unwrap();
            sum += adf_t_stat(path.values(), AdfSpec::default()).unwrap().t_stat;
        }
        let mean = sum / reps as f64;
        assert!(
            (-1.9..=-1.2).contains(&mean),
            "null mean t-stat {mean} outside the expected band"
        );
    }

    #[test]
    fn parameters_are_validated() {
        let spec = AdfSpec::default();
        assert!(matches!(
            critical_values::<f64>(StatKind::Sadf, 60, 12, spec, &[0.95], 999, 1).unwrap_err(),
            Error::InvalidParameter { name: "replications", .. }
        ));
        assert!(matches!(
            critical_values::<f64>(StatKind::Sadf, 10, 12, spec, &[0.95], 1000, 1).unwrap_err(),
            Error::InsufficientObservations { .. }
        ));
        assert!(matches!(
            critical_values::<f64>(StatKind::Sadf, 60, 2, spec, &[0.95], 1000, 1).unwrap_err(),
            Error::InvalidParameter { name: "min_window", .. }
        ));
        for bad in [&[][..], &[0.9, 0.9][..], &[0.95, 0.9][..], &[0.0, 0.9][..], &[0.9, 1.0][..]] {
            assert!(matches!(
                critical_values::<f64>(StatKind::Sadf, 60, 12, spec, bad, 1000, 1).unwrap_err(),
                Error::InvalidParameter { name: "levels", .. }
            ));
        }
    }

    #[test]
    fn order_statistic_uses_ceil_rank() {
        let sorted: Vec<f64> = (1..=10).map(f64::from).collect();
        // ceil(0.95 * 10) = 10, ceil(0.90 * 10) = 9, ceil(0.05 * 10) = 1.
        assert_eq!(order_statistic(&sorted, 0.95), 10.0);
        assert_eq!(order_statistic(&sorted, 0.90), 9.0);
        assert_eq!(order_statistic(&sorted, 0.05), 1.0);
        assert_eq!(order_statistic(&sorted, 0.85), 9.0);
    }

    #[test]
    fn parallel_table_matches_serial_recomputation() {
        let spec = AdfSpec::default();
        let levels = [0.8, 0.9, 0.95];
        let table =
            critical_values::<f64>(StatKind::Sadf, 30, 12, spec, &levels, 1000, 5).unwrap();

        let mut stats: Vec<f64> = (0..1000)
            .map(|i| {
                let path: Series<f64> = simulate_null(30, replication_seed(5, i)).unwrap();
                sadf(&path, spec, 12).unwrap().0
            })
            .collect();
        stats.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, &level) in levels.iter().enumerate() {
            let want = order_statistic(&stats, level);
            let got = table.scalar_at(level).unwrap();
            assert_eq!(got, want, "level {level} (index {i})");
        }
    }

    #[test]
    fn quantiles_increase_with_level() {
        let spec = AdfSpec::default();
        let levels = [0.5, 0.9, 0.95, 0.99];
        for kind in [StatKind::Sadf, StatKind::Gsadf] {
            let table = critical_values::<f64>(kind, 25, 12, spec, &levels, 1000, 3).unwrap();
            let TableValues::Scalar(values) = &table.values else {
                panic!("scalar table expected");
            };
            for pair in values.windows(2) {
                assert!(pair[0] <= pair[1], "{kind:?}: {values:?}");
            }
        }
    }

    #[test]
    fn bsadf_table_covers_every_endpoint() {
        let spec = AdfSpec::default();
        let table =
            critical_values::<f64>(StatKind::Bsadf, 25, 12, spec, &[0.9, 0.95], 1000, 4).unwrap();
        let TableValues::PerEndpoint { endpoints, rows } = &table.values else {
            panic!("per-endpoint table expected");
        };
        assert_eq!(endpoints, &(12..=25).collect::<Vec<_>>());
        assert_eq!(rows.len(), endpoints.len());
        for row in rows {
            assert!(row[0] <= row[1]);
        }
        let seq = table.sequence_at(0.95).unwrap();
        assert_eq!(seq.len(), endpoints.len());
        for (e, row) in rows.iter().enumerate() {
            assert_eq!(seq[e], row[1]);
        }
    }

    #[test]
    fn cv_sequence_wrapper_matches_table() {
        let spec = AdfSpec::default();
        let seq = bsadf_cv_sequence::<f64>(25, 12, spec, 0.95, 1000, 4).unwrap();
        let table =
            critical_values::<f64>(StatKind::Bsadf, 25, 12, spec, &[0.95], 1000, 4).unwrap();
        assert_eq!(seq, table.sequence_at(0.95).unwrap());
    }

    #[test]
    fn tables_are_reproducible() {
        let spec = AdfSpec::default();
        let a = critical_values::<f64>(StatKind::Gsadf, 25, 12, spec, &[0.95], 1000, 9).unwrap();
        let b = critical_values::<f64>(StatKind::Gsadf, 25, 12, spec, &[0.95], 1000, 9).unwrap();
        assert_eq!(a, b);
    }
}
