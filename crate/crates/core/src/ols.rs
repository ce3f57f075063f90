//! Least-squares fitting through the normal equations, with the full
//! statistic set: SSE/SSR/SST, R², adjusted R², standard error, MSE,
//! F-statistic with its critical value, and Mallow's Cp.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdist;
use crate::ingest::CauseYearMatrix;
use crate::linalg::Matrix;
use crate::scalar::{c, from_u32, from_usize, Real};

/// A chosen subset of predictor columns; the intercept is always implied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    labels: Vec<String>,
}

impl ModelSpec {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Domain(format!("duplicate predictor label `{l}`")));
            }
        }
        Ok(ModelSpec { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }
}

/// Intercept plus labeled slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients<T> {
    pub intercept: T,
    pub slopes: IndexMap<String, T>,
}

impl<T: Real> Coefficients<T> {
    /// `b0 + Σ bj·xj`; every slope label must be supplied.
    pub fn predict(&self, values: &HashMap<String, T>) -> Result<T> {
        let mut acc = self.intercept;
        for (label, &slope) in &self.slopes {
            let x = values
                .get(label)
                .copied()
                .ok_or_else(|| Error::MissingPredictor(label.clone()))?;
            acc += slope * x;
        }
        Ok(acc)
    }
}

/// Everything a single least-squares fit produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub spec: ModelSpec,
    pub n: usize,
    pub k: usize,
    pub coefficients: Coefficients<T>,
    pub sse: T,
    pub ssr: T,
    pub sst: T,
    pub r2: T,
    pub r2_adj: T,
    /// Standard error, sqrt(SSE/(n−k−1)).
    pub s: T,
    pub mse: T,
    pub f_stat: T,
    /// Upper 5% F quantile at (k, n−k−1) degrees of freedom.
    pub f_critical: T,
    /// Mallow's Cp; present only when a full-model MSE was supplied.
    pub cp: Option<T>,
    pub years: Vec<u16>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
    /// Set when any fitted value is negative.
    pub has_negative_fitted: bool,
}

/// `1 − (1−R²)(n−1)/(n−k−1)`.
pub fn adjusted_r2<T: Real>(r2: T, n: usize, k: usize) -> T {
    let n = from_usize::<T>(n);
    let k = from_usize::<T>(k);
    T::one() - (T::one() - r2) * (n - T::one()) / (n - k - T::one())
}

/// `(SSR/k) / (SSE/(n−k−1))`.
pub fn f_statistic<T: Real>(ssr: T, sse: T, n: usize, k: usize) -> T {
    let dof = from_usize::<T>(n - k - 1);
    (ssr / from_usize::<T>(k)) / (sse / dof)
}

/// `SSE/MSE_full + 2(k+1) − n`.
pub fn mallows_cp<T: Real>(sse: T, full_model_mse: T, n: usize, k: usize) -> T {
    sse / full_model_mse + c::<T>(2.0) * from_usize::<T>(k + 1) - from_usize::<T>(n)
}

pub(crate) struct RawFit<T> {
    pub coeffs: Vec<T>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
    pub sse: T,
    pub ssr: T,
    pub sst: T,
    pub r2: T,
}

/// Core least-squares on explicit columns (used by `fit` and the VIF
/// auxiliary regressions). `labels` names the columns for error reporting.
pub(crate) fn fit_columns<T: Real>(
    labels: &[&str],
    columns: &[Vec<T>],
    y: &[T],
) -> Result<RawFit<T>> {
    let n = y.len();
    let k = columns.len();
    if n <= k + 1 {
        return Err(Error::InsufficientDof { n, k });
    }

    // normal equations X'X b = X'y with an implicit leading intercept column
    let p = k + 1;
    let mut xtx = Matrix::zeros(p, p);
    let mut xty = vec![T::zero(); p];
    let col = |j: usize, i: usize| -> T {
        if j == 0 {
            T::one()
        } else {
            columns[j - 1][i]
        }
    };
    for a in 0..p {
        for b in a..p {
            let mut acc = T::zero();
            for i in 0..n {
                acc += col(a, i) * col(b, i);
            }
            xtx.set(a, b, acc);
            xtx.set(b, a, acc);
        }
        let mut acc = T::zero();
        for i in 0..n {
            acc += col(a, i) * y[i];
        }
        xty[a] = acc;
    }

    let coeffs = xtx.solve(&xty).map_err(|e| match e {
        Error::SingularSystem { pivot, .. } => {
            let label = if pivot == 0 {
                "intercept".to_string()
            } else {
                labels.get(pivot - 1).map(|s| s.to_string()).unwrap_or_else(|| format!("column {pivot}"))
            };
            Error::CollinearPredictor { label }
        }
        other => other,
    })?;

    let mut fitted = vec![T::zero(); n];
    for i in 0..n {
        let mut acc = coeffs[0];
        for j in 0..k {
            acc += coeffs[j + 1] * columns[j][i];
        }
        fitted[i] = acc;
    }
    let residuals: Vec<T> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let mean = y.iter().copied().sum::<T>() / from_usize::<T>(n);
    let sse = residuals.iter().map(|&r| r * r).sum::<T>();
    let sst = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    let ssr = fitted.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();

    let r2 = if sst > T::zero() {
        ssr / sst
    } else if sse <= c::<T>(1e-9) * (T::one() + sst) {
        // constant response fitted exactly
        T::one()
    } else {
        return Err(Error::DegenerateInput(
            "constant response with nonzero residual; R^2 undefined".into(),
        ));
    };

    Ok(RawFit { coeffs, fitted, residuals, sse, ssr, sst, r2 })
}

/// Fit `spec` against the matrix response; `full_model_mse`, when given,
/// populates Mallow's Cp.
pub fn fit<T: Real>(
    matrix: &CauseYearMatrix,
    spec: &ModelSpec,
    full_model_mse: Option<T>,
) -> Result<FitResult<T>> {
    let n = matrix.n();
    let k = spec.k();
    if n <= k + 1 {
        return Err(Error::InsufficientDof { n, k });
    }
    if let Some(m) = full_model_mse {
        if m <= T::zero() {
            return Err(Error::Domain("full-model MSE must be positive".into()));
        }
    }

    let mut columns = Vec::with_capacity(k);
    for label in spec.labels() {
        let col = matrix.predictor_column(label)?;
        columns.push(col.into_iter().map(from_u32::<T>).collect::<Vec<T>>());
    }
    let y: Vec<T> = matrix.response().iter().map(|&v| from_u32::<T>(v)).collect();
    let label_refs: Vec<&str> = spec.labels().iter().map(|s| s.as_str()).collect();

    let raw = fit_columns(&label_refs, &columns, &y)?;

    let mse = raw.sse / from_usize::<T>(n - k - 1);
    let s = mse.sqrt();
    let f_stat = f_statistic(raw.ssr, raw.sse, n, k);
    let f_critical = fdist::f_critical(c::<T>(0.05), k, n - k - 1)?;
    let cp = full_model_mse.map(|m| mallows_cp(raw.sse, m, n, k));

    let mut slopes = IndexMap::new();
    for (j, label) in spec.labels().iter().enumerate() {
        slopes.insert(label.clone(), raw.coeffs[j + 1]);
    }
    let has_negative_fitted = raw.fitted.iter().any(|&v| v < T::zero());

    Ok(FitResult {
        spec: spec.clone(),
        n,
        k,
        coefficients: Coefficients { intercept: raw.coeffs[0], slopes },
        sse: raw.sse,
        ssr: raw.ssr,
        sst: raw.sst,
        r2: raw.r2,
        r2_adj: adjusted_r2(raw.r2, n, k),
        s,
        mse,
        f_stat,
        f_critical,
        cp,
        years: matrix.years().to_vec(),
        fitted: raw.fitted,
        residuals: raw.residuals,
        has_negative_fitted,
    })
}

/// Predict the response for one set of predictor values.
pub fn predict<T: Real>(fit: &FitResult<T>, values: &HashMap<String, T>) -> Result<T> {
    fit.coefficients.predict(values)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoldoutRow<T> {
    pub year: u16,
    pub actual: u32,
    pub predicted: T,
    /// `100·|predicted − actual|/actual`; absent when actual is zero.
    pub percent_error: Option<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoldoutReport<T> {
    pub rows: Vec<HoldoutRow<T>>,
    /// Maximum over the defined percent errors.
    pub max_percent_error: Option<T>,
}

/// Percent prediction error on held-out years.
pub fn holdout_error<T: Real>(
    matrix: &CauseYearMatrix,
    fit: &FitResult<T>,
    holdout_years: &[u16],
) -> Result<HoldoutReport<T>> {
    if holdout_years.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::with_capacity(holdout_years.len());
    let mut max: Option<T> = None;
    for &year in holdout_years {
        let i = matrix.year_index(year)?;
        let mut values = HashMap::new();
        for label in fit.spec.labels() {
            let col = matrix.predictor_column(label)?;
            values.insert(label.clone(), from_u32::<T>(col[i]));
        }
        let predicted = fit.coefficients.predict(&values)?;
        let actual = matrix.response()[i];
        let percent_error = if actual > 0 {
            let a = from_u32::<T>(actual);
            Some(c::<T>(100.0) * (predicted - a).abs() / a)
        } else {
            None
        };
        if let Some(pe) = percent_error {
            max = Some(match max {
                Some(m) if m >= pe => m,
                _ => pe,
            });
        }
        rows.push(HoldoutRow { year, actual, predicted, percent_error });
    }
    Ok(HoldoutReport { rows, max_percent_error: max })
}
