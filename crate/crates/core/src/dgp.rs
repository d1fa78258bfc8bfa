//! Synthetic data generating processes for calibration and testing.
//!
//! All processes share one seeded generator per series; the zero-noise
//! switch silences the Gaussian innovations while leaving the process
//! skeleton intact, which makes closed-form trajectories available to
//! tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::month::YearMonth;
use crate::series::Series;
use crate::Scalar;

/// Process family and its parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DgpKind {
    /// Driftless Gaussian random walk started at zero.
    RandomWalk,
    /// `p_t = beta * p_{t-1} + e_t` with `beta > 1`, started at one.
    ExplosiveAr { beta: f64 },
    /// Fundamental random walk (clamped at `floor`) plus a bubble that
    /// multiplies by `growth` each month and collapses back to `reseed`
    /// with probability `collapse_prob`.
    CollapsingBubble {
        fundamental: f64,
        floor: f64,
        growth: f64,
        collapse_prob: f64,
        reseed: f64,
    },
    /// Random walk whose transitions over `explosive_start..explosive_end`
    /// use the explosive recursion instead; the prefix is bit-identical
    /// to [`DgpKind::RandomWalk`] under the same seed.
    Spliced {
        explosive_start: usize,
        explosive_end: usize,
        beta: f64,
    },
}

impl DgpKind {
    /// Series label, also the value column name in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            DgpKind::RandomWalk => "random-walk",
            DgpKind::ExplosiveAr { .. } => "explosive-ar",
            DgpKind::CollapsingBubble { .. } => "collapsing-bubble",
            DgpKind::Spliced { .. } => "spliced",
        }
    }
}

fn default_noise() -> bool {
    true
}

fn default_start() -> YearMonth {
    YearMonth::new(2000, 1).expect("valid month")
}

/// Full description of a simulated series.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DgpSpec {
    #[serde(flatten)]
    pub kind: DgpKind,
    /// Number of monthly observations.
    pub length: usize,
    pub seed: u64,
    /// When false, Gaussian innovations are replaced by exact zeros.
    #[serde(default = "default_noise")]
    pub noise: bool,
    /// Calendar month of the first observation.
    #[serde(default = "default_start")]
    pub start: YearMonth,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |name: &'static str, msg: String| Err(Error::InvalidParameter { name, msg });
        if self.length == 0 {
            return bad("length", "need at least one observation".into());
        }
        match &self.kind {
            DgpKind::RandomWalk => {}
            DgpKind::ExplosiveAr { beta } => {
                if !(beta.is_finite() && *beta > 1.0) {
                    return bad("beta", format!("explosive root must exceed 1, got {beta}"));
                }
            }
            DgpKind::CollapsingBubble {
                fundamental,
                floor,
                growth,
                collapse_prob,
                reseed,
            } => {
                if !(growth.is_finite() && *growth > 1.0) {
                    return bad("growth", format!("bubble growth must exceed 1, got {growth}"));
                }
                if !(*collapse_prob > 0.0 && *collapse_prob < 1.0) {
                    return bad(
                        "collapse_prob",
                        format!("collapse probability must lie in (0, 1), got {collapse_prob}"),
                    );
                }
                if !(reseed.is_finite() && *reseed > 0.0) {
                    return bad("reseed", format!("reseed value must be positive, got {reseed}"));
                }
                if !floor.is_finite() || !fundamental.is_finite() {
                    return bad(
                        "fundamental",
                        format!("fundamental {fundamental} and floor {floor} must be finite"),
                    );
                }
            }
            DgpKind::Spliced {
                explosive_start,
                explosive_end,
                beta,
            } => {
                if !(beta.is_finite() && *beta > 1.0) {
                    return bad("beta", format!("explosive root must exceed 1, got {beta}"));
                }
                if !(explosive_start < explosive_end && *explosive_end <= self.length) {
                    return bad(
                        "explosive_start",
                        format!(
                            "segment [{explosive_start}, {explosive_end}) does not fit \
                             a sample of {}",
                            self.length
                        ),
                    );
                }
            }
        }
        Ok(())
    }
}

struct Innovations<S> {
    rng: ChaCha8Rng,
    noise: bool,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> Innovations<S> {
    fn new(seed: u64, noise: bool) -> Self {
        Innovations {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            _marker: std::marker::PhantomData,
        }
    }

    fn gaussian(&mut self) -> S {
        if self.noise {
            S::standard_normal(&mut self.rng)
        } else {
            S::zero()
        }
    }

    fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// Simulates the series a spec describes.
pub fn generate<S: Scalar>(spec: &DgpSpec) -> Result<Series<S>, Error> {
    spec.validate()?;
    let mut inn = Innovations::<S>::new(spec.seed, spec.noise);
    let n = spec.length;
    let mut values: Vec<S> = Vec::with_capacity(n);
    match &spec.kind {
        DgpKind::RandomWalk => {
            let mut p = S::zero();
            values.push(p);
            for _ in 1..n {
                p = p + inn.gaussian();
                values.push(p);
            }
        }
        DgpKind::ExplosiveAr { beta } => {
            let beta = S::from_f64_lossy(*beta);
            let mut p = S::one();
            values.push(p);
            for _ in 1..n {
                p = beta * p + inn.gaussian();
                values.push(p);
            }
        }
        DgpKind::CollapsingBubble { .. } => {
            let (series_values, _) = collapsing_run::<S>(spec, &mut inn);
            values = series_values;
        }
        DgpKind::Spliced {
            explosive_start,
            explosive_end,
            beta,
        } => {
            let beta = S::from_f64_lossy(*beta);
            let mut p = S::zero();
            values.push(p);
            for t in 1..n {
                let e = inn.gaussian();
                p = if (*explosive_start..*explosive_end).contains(&t) {
                    beta * p + e
                } else {
                    p + e
                };
                values.push(p);
            }
        }
    }
    Series::new(spec.start, values, spec.kind.label())
}

/// Months at which the bubble component collapses, for a
/// [`DgpKind::CollapsingBubble`] spec. Shares the innovation stream with
/// [`generate`], so the times match the generated series exactly.
pub fn collapse_times<S: Scalar>(spec: &DgpSpec) -> Result<Vec<usize>, Error> {
    spec.validate()?;
    if !matches!(spec.kind, DgpKind::CollapsingBubble { .. }) {
        return Err(Error::InvalidParameter {
            name: "kind",
            msg: format!("collapse times are defined for collapsing-bubble, not {}", spec.kind.label()),
        });
    }
    let mut inn = Innovations::<S>::new(spec.seed, spec.noise);
    let (_, times) = collapsing_run::<S>(spec, &mut inn);
    Ok(times)
}

fn collapsing_run<S: Scalar>(spec: &DgpSpec, inn: &mut Innovations<S>) -> (Vec<S>, Vec<usize>) {
    let DgpKind::CollapsingBubble {
        fundamental,
        floor,
        growth,
        collapse_prob,
        reseed,
    } = &spec.kind
    else {
        unreachable!("callers match the kind first");
    };
    let floor = S::from_f64_lossy(*floor);
    let growth = S::from_f64_lossy(*growth);
    let reseed = S::from_f64_lossy(*reseed);
    let mut f = S::from_f64_lossy(*fundamental);
    let mut b = reseed;
    let mut values = Vec::with_capacity(spec.length);
    let mut times = Vec::new();
    values.push(f + b);
    for t in 1..spec.length {
        // Draw order is fixed: the Gaussian innovation first, then the
        // collapse coin, so both trajectories are seed-reproducible.
        let e = inn.gaussian();
        f = (f + e).max(floor);
        if inn.uniform() < *collapse_prob {
            b = reseed;
            times.push(t);
        } else {
            b = growth * b;
        }
        values.push(f + b);
    }
    (values, times)
}
