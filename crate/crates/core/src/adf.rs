//! Right-tailed (augmented) Dickey-Fuller regression on a window.
//!
//! The regression is `dp_t = alpha + delta * p_{t-1} + sum_i phi_i dp_{t-i}
//! + e_t` with optional intercept and linear trend. The statistic of
//! interest is the t-ratio of `delta`; under the unit-root null it is
//! centered below zero, and explosive windows push it to the right tail.

use crate::error::Error;
use crate::ols::{ols_with, Design, OlsScratch};
use crate::Scalar;

/// Regression layout for the unit-root test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AdfSpec {
    /// Number of lagged differences included as controls.
    pub lags: usize,
    /// Include an intercept.
    pub constant: bool,
    /// Include a linear trend.
    pub trend: bool,
}

impl Default for AdfSpec {
    /// Intercept only, no lag augmentation: the standard layout for
    /// right-tailed explosiveness testing on monthly data.
    fn default() -> Self {
        AdfSpec {
            lags: 0,
            constant: true,
            trend: false,
        }
    }
}

impl AdfSpec {
    /// Number of regressors.
    pub fn num_regressors(&self) -> usize {
        1 + self.lags + usize::from(self.constant) + usize::from(self.trend)
    }

    /// Smallest window length this layout can be fitted on with at least
    /// one residual degree of freedom.
    ///
    /// Differencing and lagging consume `lags + 1` observations, and the
    /// fit needs `num_regressors + 1` rows; both constraints must hold.
    pub fn min_window_len(&self) -> usize {
        let deterministic = usize::from(self.constant) + usize::from(self.trend);
        (self.lags + 4).max(2 * self.lags + 3) + deterministic
    }

    /// Index of the lagged-level coefficient in the design column order
    /// (intercept, trend, level, lagged differences).
    fn level_index(&self) -> usize {
        usize::from(self.constant) + usize::from(self.trend)
    }
}

/// Outcome of one window regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfResult<S> {
    /// t-ratio of the lagged-level coefficient.
    pub t_stat: S,
    /// Estimate of the lagged-level coefficient `delta`, i.e. the
    /// autoregressive root minus one.
    pub coef: S,
    /// Standard error of `coef`; strictly positive.
    pub stderr: S,
    /// Rows in the regression after differencing and lagging.
    pub nobs: usize,
    /// Residual variance of the fit.
    pub residual_variance: S,
}

/// Reusable buffers for sweeps that fit thousands of windows.
#[derive(Debug)]
pub struct AdfScratch<S> {
    design: Design<S>,
    response: Vec<S>,
    ols: OlsScratch<S>,
}

impl<S: Scalar> AdfScratch<S> {
    pub fn new() -> Self {
        AdfScratch {
            design: Design::with_capacity(0, 0),
            response: Vec::new(),
            ols: OlsScratch::new(),
        }
    }
}

impl<S: Scalar> Default for AdfScratch<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// Fits the test regression on one contiguous window of levels.
pub fn adf_t_stat<S: Scalar>(window: &[S], spec: AdfSpec) -> Result<AdfResult<S>, Error> {
    let mut scratch = AdfScratch::new();
    adf_t_stat_with(window, spec, &mut scratch)
}

/// [`adf_t_stat`] with caller-owned scratch buffers.
pub fn adf_t_stat_with<S: Scalar>(
    window: &[S],
    spec: AdfSpec,
    scratch: &mut AdfScratch<S>,
) -> Result<AdfResult<S>, Error> {
    let n = window.len();
    if n < spec.min_window_len() {
        return Err(Error::InsufficientObservations {
            needed: spec.min_window_len(),
            got: n,
        });
    }
    let lags = spec.lags;
    let nobs = n - 1 - lags;

    scratch.response.clear();
    for t in (lags + 1)..n {
        scratch.response.push(window[t] - window[t - 1]);
    }

    let design = &mut scratch.design;
    design.begin(nobs);
    if spec.constant {
        design.push_column_with(|_| S::one());
    }
    if spec.trend {
        design.push_column_with(|i| S::from_usize(i + 1).expect("trend index fits in Scalar"));
    }
    design.push_column_with(|i| window[lags + i]);
    for lag in 1..=lags {
        design.push_column_with(|i| {
            let t = lags + 1 + i - lag;
            window[t] - window[t - 1]
        });
    }

    ols_with(&scratch.response, design, &mut scratch.ols)?;

    // An exact fit leaves no residual variance, so the t-ratio does not
    // exist; report that rather than a spurious +-infinity.
    let ssr = scratch.ols.ssr();
    let tss = scratch
        .response
        .iter()
        .fold(S::zero(), |acc, &y| acc + y * y);
    let eps_floor = S::epsilon() * S::from_usize(nobs).expect("nobs fits in Scalar");
    let threshold = tss * eps_floor * eps_floor * S::from_f64_lossy(1024.0);
    if ssr <= threshold {
        return Err(Error::DegenerateFit);
    }

    let idx = spec.level_index();
    let coef = scratch.ols.coefs()[idx];
    let stderr = scratch.ols.stderrs()[idx];
    if !(stderr > S::zero()) {
        return Err(Error::DegenerateFit);
    }
    Ok(AdfResult {
        t_stat: coef / stderr,
        coef,
        stderr,
        nobs,
        residual_variance: scratch.ols.residual_variance(),
    })
}
