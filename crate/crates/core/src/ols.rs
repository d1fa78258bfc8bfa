//! Least-squares kernel backing the test regressions.
//!
//! The solver uses Householder QR rather than normal equations; squaring
//! the design matrix would halve the usable precision on the
//! near-collinear windows the recursive sweeps routinely visit.

use crate::error::Error;
use crate::Scalar;

/// Dense column-major design matrix.
#[derive(Debug, Clone)]
pub struct Design<S> {
    data: Vec<S>,
    nrows: usize,
    ncols: usize,
}

impl<S: Scalar> Design<S> {
    /// Builds a design from equal-length columns.
    pub fn from_columns(columns: &[&[S]]) -> Result<Self, Error> {
        let ncols = columns.len();
        if ncols == 0 {
            return Err(Error::InvalidParameter {
                name: "columns",
                msg: "design needs at least one column".into(),
            });
        }
        let nrows = columns[0].len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != nrows {
                return Err(Error::Misaligned {
                    msg: format!(
                        "design column {j} has {} rows, expected {nrows}",
                        col.len()
                    ),
                });
            }
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for col in columns {
            data.extend_from_slice(col);
        }
        Ok(Design { data, nrows, ncols })
    }

    /// Empty design to be filled column by column via [`Design::begin`].
    pub fn with_capacity(nrows: usize, ncols: usize) -> Self {
        Design {
            data: Vec::with_capacity(nrows * ncols),
            nrows,
            ncols: 0,
        }
    }

    /// Resets the design for `nrows` rows, keeping the allocation.
    pub fn begin(&mut self, nrows: usize) {
        self.data.clear();
        self.nrows = nrows;
        self.ncols = 0;
    }

    /// Appends one column produced row by row.
    ///
    /// The closure receives the row index `0..nrows`.
    pub fn push_column_with(&mut self, mut value_at: impl FnMut(usize) -> S) {
        for i in 0..self.nrows {
            self.data.push(value_at(i));
        }
        self.ncols += 1;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn column(&self, j: usize) -> &[S] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }
}

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit<S> {
    /// Coefficients in design column order.
    pub coefs: Vec<S>,
    /// Coefficient standard errors in the same order.
    pub stderrs: Vec<S>,
    /// Residual variance, sum of squared residuals over `nobs - ncoefs`.
    pub residual_variance: S,
    /// Sum of squared residuals.
    pub ssr: S,
    /// Number of observations.
    pub nobs: usize,
}

/// Reusable buffers so a sweep over thousands of windows allocates once.
#[derive(Debug)]
pub struct OlsScratch<S> {
    a: Vec<S>,
    qty: Vec<S>,
    v: Vec<S>,
    scale: Vec<S>,
    rinv: Vec<S>,
    coefs: Vec<S>,
    stderrs: Vec<S>,
}

impl<S: Scalar> OlsScratch<S> {
    pub fn new() -> Self {
        OlsScratch {
            a: Vec::new(),
            qty: Vec::new(),
            v: Vec::new(),
            scale: Vec::new(),
            rinv: Vec::new(),
            coefs: Vec::new(),
            stderrs: Vec::new(),
        }
    }
}

impl<S: Scalar> Default for OlsScratch<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// Fits `y = design * beta + e` by QR and returns coefficients with
/// standard errors.
///
/// Requires strictly more rows than columns. Rank deficiency is reported
/// as [`Error::SingularDesign`] naming the first dependent column.
pub fn ols<S: Scalar>(y: &[S], design: &Design<S>) -> Result<OlsFit<S>, Error> {
    let mut scratch = OlsScratch::new();
    ols_with(y, design, &mut scratch)?;
    Ok(OlsFit {
        coefs: scratch.coefs.clone(),
        stderrs: scratch.stderrs.clone(),
        residual_variance: scratch.residual_variance(),
        ssr: scratch.ssr(),
        nobs: design.nrows(),
    })
}

impl<S: Scalar> OlsScratch<S> {
    pub fn coefs(&self) -> &[S] {
        &self.coefs
    }

    pub fn stderrs(&self) -> &[S] {
        &self.stderrs
    }

    pub fn ssr(&self) -> S {
        // qty holds the rotated response; the tail beyond the first ncols
        // entries is the residual in the orthogonal complement.
        let k = self.coefs.len();
        self.qty[k..]
            .iter()
            .fold(S::zero(), |acc, &r| acc + r * r)
    }

    pub fn residual_variance(&self) -> S {
        let k = self.coefs.len();
        let df = self.qty.len() - k;
        self.ssr() / S::from_usize(df).expect("df fits in Scalar")
    }
}

/// In-place variant of [`ols`] writing results into `scratch`.
pub fn ols_with<S: Scalar>(
    y: &[S],
    design: &Design<S>,
    scratch: &mut OlsScratch<S>,
) -> Result<(), Error> {
    let m = design.nrows();
    let k = design.ncols();
    if y.len() != m {
        return Err(Error::Misaligned {
            msg: format!("response has {} rows, design has {m}", y.len()),
        });
    }
    if m <= k {
        return Err(Error::InsufficientObservations {
            needed: k + 1,
            got: m,
        });
    }

    scratch.a.clear();
    scratch.a.extend_from_slice(&design.data);
    scratch.qty.clear();
    scratch.qty.extend_from_slice(y);
    scratch.v.clear();
    scratch.v.resize(m, S::zero());
    scratch.scale.clear();
    for j in 0..k {
        let norm = euclidean_norm(design.column(j));
        scratch.scale.push(norm);
    }

    let a = &mut scratch.a;
    let qty = &mut scratch.qty;
    let v = &mut scratch.v;

    // Rank tolerance: a pivot this far below the column's original norm is
    // indistinguishable from exact dependence at working precision.
    let tol = S::epsilon()
        * S::from_usize(m).expect("nrows fits in Scalar").sqrt()
        * S::from_f64_lossy(16.0);

    for j in 0..k {
        let col = j * m;
        let pivot_norm = euclidean_norm(&a[col + j..col + m]);
        if pivot_norm <= scratch.scale[j] * tol || scratch.scale[j] == S::zero() {
            return Err(Error::SingularDesign { column: j });
        }
        // Reflect so the subcolumn collapses onto +-pivot_norm e1. The sign
        // choice keeps v away from cancellation.
        let x0 = a[col + j];
        let alpha = if x0 >= S::zero() {
            -pivot_norm
        } else {
            pivot_norm
        };
        v[j] = x0 - alpha;
        v[j + 1..m].copy_from_slice(&a[col + j + 1..col + m]);
        let vtv = (pivot_norm * pivot_norm - alpha * x0) * S::from_f64_lossy(2.0);
        a[col + j] = alpha;

        for c in (j + 1)..k {
            let ccol = c * m;
            let mut dot = S::zero();
            for i in j..m {
                dot += v[i] * a[ccol + i];
            }
            let w = dot / vtv * S::from_f64_lossy(2.0);
            for i in j..m {
                a[ccol + i] = a[ccol + i] - w * v[i];
            }
        }
        let mut dot = S::zero();
        for i in j..m {
            dot += v[i] * qty[i];
        }
        let w = dot / vtv * S::from_f64_lossy(2.0);
        for i in j..m {
            qty[i] = qty[i] - w * v[i];
        }
    }

    // Back-substitution on R beta = Q'y. R lives in the upper triangle of
    // the reduced a; entry (r, c) with r <= c sits at a[c * m + r].
    scratch.coefs.clear();
    scratch.coefs.resize(k, S::zero());
    for r in (0..k).rev() {
        let mut acc = qty[r];
        for c in (r + 1)..k {
            acc = acc - a[c * m + r] * scratch.coefs[c];
        }
        scratch.coefs[r] = acc / a[r * m + r];
    }

    // Columns of R^-1 by back-substitution; the coefficient covariance is
    // sigma^2 R^-1 R^-T, whose diagonal only needs the rows of R^-1.
    scratch.rinv.clear();
    scratch.rinv.resize(k * k, S::zero());
    for c in 0..k {
        for r in (0..=c).rev() {
            let mut acc = if r == c { S::one() } else { S::zero() };
            for t in (r + 1)..=c {
                acc = acc - a[t * m + r] * scratch.rinv[c * k + t];
            }
            scratch.rinv[c * k + r] = acc / a[r * m + r];
        }
    }

    let sigma2 = {
        let ssr = qty[k..].iter().fold(S::zero(), |acc, &r| acc + r * r);
        ssr / S::from_usize(m - k).expect("df fits in Scalar")
    };
    scratch.stderrs.clear();
    for r in 0..k {
        let mut diag = S::zero();
        for c in r..k {
            let e = scratch.rinv[c * k + r];
            diag += e * e;
        }
        scratch.stderrs.push((sigma2 * diag).sqrt());
    }
    Ok(())
}

/// Two-pass Euclidean norm with scaling against overflow.
fn euclidean_norm<S: Scalar>(values: &[S]) -> S {
    let max = values
        .iter()
        .fold(S::zero(), |acc, &x| acc.max(x.abs()));
    if max == S::zero() {
        return S::zero();
    }
    let mut acc = S::zero();
    for &x in values {
        let r = x / max;
        acc += r * r;
    }
    max * acc.sqrt()
}
