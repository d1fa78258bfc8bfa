//! Recursive supremum statistics and episode date-stamping.
//!
//! All windows are half-open index ranges `[t1, t2)` into the series, so
//! `t2` doubles as the observation count of a prefix window. An endpoint
//! `t2` corresponds to calendar month `start + (t2 - 1)`.

use crate::adf::{adf_t_stat_with, AdfScratch, AdfSpec};
use crate::error::Error;
use crate::month::YearMonth;
use crate::series::{FractionalWindow, Series};
use crate::Scalar;

/// What a [`StatSequence`] indexes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SequenceKind {
    /// Forward-expanding prefix windows `[0, t2)`.
    SadfPath,
    /// Backward supremum over all windows ending at `t2`.
    Bsadf,
}

/// One endpoint of a recursive sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatEntry<S> {
    /// Observation count `t2` of the window producing this statistic.
    pub endpoint: usize,
    /// Start index of the supremum-attaining window; 0 for prefix sweeps.
    pub window_start: usize,
    /// The statistic.
    pub stat: S,
}

/// A sweep of statistics indexed by window endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StatSequence<S> {
    pub kind: SequenceKind,
    /// Month of the first observation of the underlying series.
    pub start: YearMonth,
    /// Smallest admissible window, in observations.
    pub min_window: usize,
    /// Entries in increasing endpoint order.
    pub entries: Vec<StatEntry<S>>,
    /// Windows dropped because their regression was singular or exactly
    /// fitted. Dropped windows never contribute to any supremum.
    pub skipped_windows: usize,
}

impl<S: Scalar> StatSequence<S> {
    /// Calendar month of an entry's endpoint.
    pub fn month_of(&self, entry: &StatEntry<S>) -> YearMonth {
        self.start.plus(entry.endpoint - 1)
    }

    /// Entry with the largest statistic. Ties resolve to the earliest
    /// window start, then the earliest endpoint, so the answer does not
    /// depend on traversal order.
    pub fn max_entry(&self) -> Option<&StatEntry<S>> {
        self.entries.iter().reduce(|best, e| {
            if e.stat > best.stat {
                e
            } else if e.stat == best.stat
                && (e.window_start, e.endpoint) < (best.window_start, best.endpoint)
            {
                e
            } else {
                best
            }
        })
    }
}

/// One detected explosive episode.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BubbleEpisode<S> {
    /// First month whose statistic exceeds the critical sequence.
    pub origination: YearMonth,
    /// First month whose statistic falls back below; `None` when the
    /// episode is still open at the end of the sample.
    pub termination: Option<YearMonth>,
    /// Largest statistic inside the episode.
    pub peak_stat: S,
    /// Month attaining the peak; the earliest such month on ties.
    pub peak_month: YearMonth,
}

fn check_sweep_inputs<S: Scalar>(
    series: &Series<S>,
    spec: AdfSpec,
    min_window: usize,
) -> Result<(), Error> {
    if min_window < spec.min_window_len() {
        return Err(Error::InvalidParameter {
            name: "min_window",
            msg: format!(
                "{min_window} observations cannot fit the regression, need {}",
                spec.min_window_len()
            ),
        });
    }
    if series.len() < min_window {
        return Err(Error::InsufficientObservations {
            needed: min_window,
            got: series.len(),
        });
    }
    Ok(())
}

/// Skips windows whose regression cannot produce a statistic; anything
/// else aborts the sweep.
fn note_skip(err: Error, skipped: &mut usize) -> Result<(), Error> {
    match err {
        Error::SingularDesign { .. } | Error::DegenerateFit => {
            *skipped += 1;
            Ok(())
        }
        other => Err(other),
    }
}

/// Supremum of the statistic over forward-expanding prefix windows,
/// together with the per-endpoint path.
pub fn sadf<S: Scalar>(
    series: &Series<S>,
    spec: AdfSpec,
    min_window: usize,
) -> Result<(S, StatSequence<S>), Error> {
    check_sweep_inputs(series, spec, min_window)?;
    let values = series.values();
    let mut scratch = AdfScratch::new();
    let mut entries = Vec::with_capacity(values.len() + 1 - min_window);
    let mut skipped = 0usize;
    for t2 in min_window..=values.len() {
        match adf_t_stat_with(&values[..t2], spec, &mut scratch) {
            Ok(r) => entries.push(StatEntry {
                endpoint: t2,
                window_start: 0,
                stat: r.t_stat,
            }),
            Err(e) => note_skip(e, &mut skipped)?,
        }
    }
    let seq = StatSequence {
        kind: SequenceKind::SadfPath,
        start: series.start(),
        min_window,
        entries,
        skipped_windows: skipped,
    };
    match seq.max_entry().map(|best| best.stat) {
        Some(stat) => Ok((stat, seq)),
        None => Err(Error::NoValidWindow { skipped }),
    }
}

/// Backward supremum sequence: for each endpoint `t2`, the supremum of
/// the statistic over windows `[t1, t2)` of admissible size.
pub fn bsadf_sequence<S: Scalar>(
    series: &Series<S>,
    spec: AdfSpec,
    min_window: usize,
) -> Result<StatSequence<S>, Error> {
    check_sweep_inputs(series, spec, min_window)?;
    let values = series.values();
    let mut scratch = AdfScratch::new();
    let mut entries = Vec::with_capacity(values.len() + 1 - min_window);
    let mut skipped = 0usize;
    for t2 in min_window..=values.len() {
        let mut best: Option<(S, usize)> = None;
        for t1 in 0..=(t2 - min_window) {
            match adf_t_stat_with(&values[t1..t2], spec, &mut scratch) {
                Ok(r) => {
                    // Strict comparison keeps the earliest start on ties.
                    if best.map_or(true, |(s, _)| r.t_stat > s) {
                        best = Some((r.t_stat, t1));
                    }
                }
                Err(e) => note_skip(e, &mut skipped)?,
            }
        }
        if let Some((stat, t1)) = best {
            entries.push(StatEntry {
                endpoint: t2,
                window_start: t1,
                stat,
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::NoValidWindow { skipped });
    }
    Ok(StatSequence {
        kind: SequenceKind::Bsadf,
        start: series.start(),
        min_window,
        entries,
        skipped_windows: skipped,
    })
}

/// Supremum of the statistic over every admissible window, with the
/// attaining window as sample fractions.
///
/// By construction this is the maximum of the backward supremum sequence,
/// exactly, with the same tie-breaking as [`StatSequence::max_entry`].
pub fn gsadf<S: Scalar>(
    series: &Series<S>,
    spec: AdfSpec,
    min_window: usize,
) -> Result<(S, FractionalWindow), Error> {
    let seq = bsadf_sequence(series, spec, min_window)?;
    let best = seq.max_entry().expect("non-empty by construction");
    let window =
        FractionalWindow::from_obs(best.window_start, best.endpoint, min_window, series.len())?;
    Ok((best.stat, window))
}

/// Splits a statistic sequence against a critical sequence into episodes.
///
/// An episode opens at the first endpoint whose statistic strictly
/// exceeds its critical value and closes at the first later endpoint
/// strictly below it; equality changes nothing in either direction. An
/// episode still exceeding at the last endpoint has no termination month.
/// Episodes spanning fewer than `min_duration` endpoints are dropped.
pub fn date_stamp<S: Scalar>(
    sequence: &StatSequence<S>,
    critical: &[S],
    min_duration: usize,
) -> Result<Vec<BubbleEpisode<S>>, Error> {
    if critical.len() != sequence.entries.len() {
        return Err(Error::SequenceMismatch {
            msg: format!(
                "{} statistics vs {} critical values",
                sequence.entries.len(),
                critical.len()
            ),
        });
    }
    if min_duration == 0 {
        return Err(Error::InvalidParameter {
            name: "min_duration",
            msg: "must be at least 1".into(),
        });
    }

    struct Run<S> {
        start_idx: usize,
        peak_idx: usize,
        peak_stat: S,
    }

    let entries = &sequence.entries;
    let month_of_idx = |i: usize| sequence.start.plus(entries[i].endpoint - 1);
    let mut episodes: Vec<BubbleEpisode<S>> = Vec::new();
    let close = |run: Run<S>, end_idx: Option<usize>, episodes: &mut Vec<BubbleEpisode<S>>| {
        let len = end_idx.unwrap_or(entries.len()) - run.start_idx;
        if len >= min_duration {
            episodes.push(BubbleEpisode {
                origination: month_of_idx(run.start_idx),
                termination: end_idx.map(month_of_idx),
                peak_stat: run.peak_stat,
                peak_month: month_of_idx(run.peak_idx),
            });
        }
    };

    let mut run: Option<Run<S>> = None;
    for (i, (entry, &cv)) in entries.iter().zip(critical).enumerate() {
        match &mut run {
            None => {
                if entry.stat > cv {
                    run = Some(Run {
                        start_idx: i,
                        peak_idx: i,
                        peak_stat: entry.stat,
                    });
                }
            }
            Some(r) => {
                if entry.stat < cv {
                    let finished = run.take().expect("run present");
                    close(finished, Some(i), &mut episodes);
                } else if entry.stat > r.peak_stat {
                    r.peak_stat = entry.stat;
                    r.peak_idx = i;
                }
            }
        }
    }
    if let Some(r) = run.take() {
        close(r, None, &mut episodes);
    }
    Ok(episodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn month(y: i32, m: u32) -> YearMonth {
        YearMonth::new(y, m).unwrap()
    }

    /// Random-walk-like fixture with a hand-inserted explosive stretch.
    fn mixed_series() -> Series<f64> {
        let mut values = vec![0.0f64];
        let steps = [
            0.4, -0.3, 0.8, -0.2, 0.1, -0.5, 0.6, 0.2, -0.4, 0.3, -0.1, 0.5, -0.6, 0.2, 0.4, -0.2,
            0.1, 0.3, -0.3, 0.2,
        ];
        for (i, s) in steps.iter().cycle().take(39).enumerate() {
            let prev = values[i];
            values.push(prev + s);
        }
        Series::new(month(2000, 1), values, "mixed").unwrap()
    }

    #[test]
    fn sadf_is_max_over_prefix_windows() {
        let s = mixed_series();
        let spec = AdfSpec::default();
        let (stat, seq) = sadf(&s, spec, 12).unwrap();
        assert_eq!(seq.entries.len(), s.len() + 1 - 12);
        let brute = (12..=s.len())
            .map(|t2| {
                crate::adf::adf_t_stat(&s.values()[..t2], spec)
                    .unwrap()
                    .t_stat
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(stat, brute);
        for (entry, t2) in seq.entries.iter().zip(12..) {
            assert_eq!(entry.endpoint, t2);
            assert_eq!(entry.window_start, 0);
        }
    }

    #[test]
    fn bsadf_matches_brute_force_per_endpoint() {
        let s = mixed_series();
        let spec = AdfSpec::default();
        let seq = bsadf_sequence(&s, spec, 12).unwrap();
        for entry in &seq.entries {
            let t2 = entry.endpoint;
            let brute = (0..=(t2 - 12))
                .map(|t1| {
                    crate::adf::adf_t_stat(&s.values()[t1..t2], spec)
                        .unwrap()
                        .t_stat
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(entry.stat, brute, "endpoint {t2}");
        }
    }

    #[test]
    fn gsadf_equals_max_of_bsadf() {
        let s = mixed_series();
        let spec = AdfSpec::default();
        let (g, window) = gsadf(&s, spec, 12).unwrap();
        let seq = bsadf_sequence(&s, spec, 12).unwrap();
        let best = seq.max_entry().unwrap();
        assert_eq!(g, best.stat);
        assert_eq!(window.start_obs(s.len()), best.window_start);
        assert_eq!(window.end_obs(s.len()), best.endpoint);
    }

    #[test]
    fn nesting_holds_on_fixture() {
        let s = mixed_series();
        let spec = AdfSpec::default();
        let (sup_prefix, _) = sadf(&s, spec, 12).unwrap();
        let (sup_all, _) = gsadf(&s, spec, 12).unwrap();
        let full = crate::adf::adf_t_stat(s.values(), spec).unwrap().t_stat;
        assert!(sup_all >= sup_prefix);
        assert!(sup_prefix >= full);
    }

    #[test]
    fn sweeps_validate_parameters() {
        let s = mixed_series();
        let spec = AdfSpec::default();
        assert!(matches!(
            sadf(&s, spec, 3).unwrap_err(),
            Error::InvalidParameter { name: "min_window", .. }
        ));
        let short = Series::new(month(2000, 1), vec![1.0, 2.0, 1.5], "short").unwrap();
        assert!(matches!(
            sadf(&short, spec, 12).unwrap_err(),
            Error::InsufficientObservations { needed: 12, got: 3 }
        ));
    }

    #[test]
    fn monotone_growth_in_endpoint_count() {
        // Appending one observation adds exactly one endpoint and leaves
        // existing endpoints' statistics unchanged.
        let s = mixed_series();
        let spec = AdfSpec::default();
        let longer = s.clone();
        let shorter = Series::new(
            s.start(),
            s.values()[..s.len() - 1].to_vec(),
            s.label(),
        )
        .unwrap();
        let seq_long = bsadf_sequence(&longer, spec, 12).unwrap();
        let seq_short = bsadf_sequence(&shorter, spec, 12).unwrap();
        assert_eq!(seq_long.entries.len(), seq_short.entries.len() + 1);
        for (a, b) in seq_short.entries.iter().zip(&seq_long.entries) {
            assert_eq!(a.stat, b.stat);
            assert_eq!(a.endpoint, b.endpoint);
        }
    }

    fn synthetic_sequence(stats: &[f64]) -> StatSequence<f64> {
        StatSequence {
            kind: SequenceKind::Bsadf,
            start: month(2010, 1),
            min_window: 12,
            entries: stats
                .iter()
                .enumerate()
                .map(|(i, &stat)| StatEntry {
                    endpoint: 12 + i,
                    window_start: 0,
                    stat,
                })
                .collect(),
            skipped_windows: 0,
        }
    }

    #[test]
    fn date_stamp_opens_and_closes_strictly() {
        // Critical value 1.0 throughout; equality neither opens nor
        // closes.
        let seq = synthetic_sequence(&[0.5, 1.0, 1.2, 1.0, 1.5, 0.9, 0.2, 1.1]);
        let cv = vec![1.0; 8];
        let eps = date_stamp(&seq, &cv, 1).unwrap();
        assert_eq!(eps.len(), 2);
        // Entries have endpoints 12..=19, so entry i is month 2010-12+i.
        let base = month(2010, 12);
        assert_eq!(eps[0].origination, base.plus(2));
        assert_eq!(eps[0].termination, Some(base.plus(5)));
        assert_eq!(eps[0].peak_stat, 1.5);
        assert_eq!(eps[0].peak_month, base.plus(4));
        assert_eq!(eps[1].origination, base.plus(7));
        assert_eq!(eps[1].termination, None);
    }

    #[test]
    fn date_stamp_equality_between_episodes_does_not_open() {
        let seq = synthetic_sequence(&[1.0, 1.0, 1.0]);
        let cv = vec![1.0; 3];
        assert!(date_stamp(&seq, &cv, 1).unwrap().is_empty());
    }

    #[test]
    fn date_stamp_min_duration_filters() {
        let seq = synthetic_sequence(&[1.2, 0.5, 1.3, 1.4, 0.5]);
        let cv = vec![1.0; 5];
        let eps = date_stamp(&seq, &cv, 2).unwrap();
        assert_eq!(eps.len(), 1);
        assert_eq!(eps[0].origination, month(2010, 12).plus(2));
    }

    #[test]
    fn date_stamp_validates_alignment() {
        let seq = synthetic_sequence(&[1.2, 0.5]);
        assert!(matches!(
            date_stamp(&seq, &[1.0], 1).unwrap_err(),
            Error::SequenceMismatch { .. }
        ));
        assert!(matches!(
            date_stamp(&seq, &[1.0, 1.0], 0).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    #[test]
    fn date_stamp_open_episode_spans_to_sample_end() {
        let seq = synthetic_sequence(&[0.1, 1.4, 1.2, 1.3]);
        let cv = vec![1.0; 4];
        let eps = date_stamp(&seq, &cv, 3).unwrap();
        assert_eq!(eps.len(), 1);
        assert_eq!(eps[0].termination, None);
    }
}
