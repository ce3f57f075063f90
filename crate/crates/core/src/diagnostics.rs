//! Gate computations for model development: VIF multicollinearity
//! screening, Multiple-R relevancy checks with scatter data, and residual
//! analysis with a sign-runs randomness screen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CauseYearMatrix;
use crate::ols::{fit_columns, FitResult};
use crate::scalar::{c, from_u32, from_usize, Real};

pub const DEFAULT_VIF_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifEntry<T> {
    pub label: String,
    /// `1/(1 − R²_aux)`; infinity when the auxiliary regression is a
    /// perfect fit.
    pub vif: T,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifReport<T> {
    pub entries: Vec<VifEntry<T>>,
    pub threshold: T,
    pub flagged: Vec<String>,
}

/// VIF for each label in `labels`, from regressing that predictor on the
/// remaining ones (with intercept). A lone predictor has VIF 1.
pub fn vif<T: Real>(
    matrix: &CauseYearMatrix,
    labels: &[String],
    threshold: T,
) -> Result<VifReport<T>> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if threshold <= T::one() {
        return Err(Error::Domain("VIF threshold must exceed 1".into()));
    }
    let n = matrix.n();
    if n <= labels.len() + 1 {
        return Err(Error::InsufficientDof { n, k: labels.len() });
    }

    let mut columns = Vec::with_capacity(labels.len());
    for label in labels {
        let col = matrix.predictor_column(label)?;
        columns.push(col.into_iter().map(from_u32::<T>).collect::<Vec<T>>());
    }

    let mut entries = Vec::with_capacity(labels.len());
    for (j, label) in labels.iter().enumerate() {
        let vif_value = if labels.len() == 1 {
            T::one()
        } else {
            let others_labels: Vec<&str> = labels
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, l)| l.as_str())
                .collect();
            let others: Vec<Vec<T>> = columns
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, col)| col.clone())
                .collect();
            match fit_columns(&others_labels, &others, &columns[j]) {
                Ok(raw) => {
                    let one = T::one();
                    if raw.r2 >= one - c::<T>(1e-12) {
                        T::infinity()
                    } else {
                        one / (one - raw.r2)
                    }
                }
                // perfect or degenerate collinearity in the auxiliary fit
                Err(Error::CollinearPredictor { .. }) | Err(Error::DegenerateInput(_)) => {
                    T::infinity()
                }
                Err(e) => return Err(e),
            }
        };
        entries.push(VifEntry {
            label: label.clone(),
            vif: vif_value,
            flagged: vif_value >= threshold,
        });
    }
    let flagged = entries
        .iter()
        .filter(|e| e.flagged)
        .map(|e| e.label.clone())
        .collect();
    Ok(VifReport { entries, threshold, flagged })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Relevancy<T> {
    pub label: String,
    /// Pearson correlation between the predictor and the response.
    pub r: T,
    /// Sign of the simple-regression slope (matches the sign of `r`).
    pub slope_sign: i8,
    /// `(predictor, response)` pairs in year order.
    pub scatter: Vec<(T, T)>,
}

/// Pearson correlation of two equal-length series. The first series must
/// not be constant; a constant second series yields 0.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    let n = x.len();
    let nf = from_usize::<T>(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut syy = T::zero();
    let mut sxy = T::zero();
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::ConstantPredictor("<series>".into()));
    }
    let r = if syy > T::zero() {
        sxy / (sxx * syy).sqrt()
    } else {
        T::zero()
    };
    Ok((r, sxy))
}

/// Multiple R (Pearson correlation) of one predictor against the response.
pub fn multiple_r<T: Real>(matrix: &CauseYearMatrix, label: &str) -> Result<Relevancy<T>> {
    let n = matrix.n();
    if n < 3 {
        return Err(Error::InsufficientDof { n, k: 1 });
    }
    let x: Vec<T> = matrix
        .predictor_column(label)?
        .into_iter()
        .map(from_u32::<T>)
        .collect();
    let y: Vec<T> = matrix.response().iter().map(|&v| from_u32::<T>(v)).collect();

    let (r, sxy) = pearson(&x, &y).map_err(|e| match e {
        Error::ConstantPredictor(_) => Error::ConstantPredictor(label.to_string()),
        other => other,
    })?;
    let slope_sign = if sxy > T::zero() {
        1
    } else if sxy < T::zero() {
        -1
    } else {
        0
    };
    let scatter = x.into_iter().zip(y).collect();
    Ok(Relevancy { label: label.to_string(), r, slope_sign, scatter })
}

/// Wald–Wolfowitz-style screen on residual signs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunsTest<T> {
    pub runs: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub expected_runs: T,
    pub z: T,
    /// Passes when |z| < 2.
    pub pass: bool,
    /// All-zero or one-signed residuals: no randomness signal to test.
    pub degenerate: bool,
}

/// Runs test over a residual sequence; near-zero residuals are skipped.
pub fn runs_test<T: Real>(residuals: &[T]) -> RunsTest<T> {
    let scale = residuals
        .iter()
        .fold(T::zero(), |m, r| if r.abs() > m { r.abs() } else { m });
    let eps = c::<T>(1e-10) * (T::one() + scale);

    let signs: Vec<bool> = residuals
        .iter()
        .filter(|r| r.abs() > eps)
        .map(|r| *r > T::zero())
        .collect();
    let n_pos = signs.iter().filter(|&&s| s).count();
    let n_neg = signs.len() - n_pos;

    if n_pos == 0 || n_neg == 0 {
        return RunsTest {
            runs: if signs.is_empty() { 0 } else { 1 },
            n_pos,
            n_neg,
            expected_runs: T::zero(),
            z: T::zero(),
            pass: true,
            degenerate: true,
        };
    }

    let mut runs = 1usize;
    for w in signs.windows(2) {
        if w[0] != w[1] {
            runs += 1;
        }
    }
    let p = from_usize::<T>(n_pos);
    let q = from_usize::<T>(n_neg);
    let m = p + q;
    let two = c::<T>(2.0);
    let expected = two * p * q / m + T::one();
    let variance = two * p * q * (two * p * q - m) / (m * m * (m - T::one()));
    let z = if variance > T::zero() {
        (from_usize::<T>(runs) - expected) / variance.sqrt()
    } else {
        T::zero()
    };
    RunsTest {
        runs,
        n_pos,
        n_neg,
        expected_runs: expected,
        z,
        pass: z.abs() < two,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualAnalysis<T> {
    /// `(fitted, residual)` pairs in year order.
    pub vs_fitted: Vec<(T, T)>,
    /// Per predictor: `(predictor value, residual)` pairs.
    pub vs_predictor: Vec<(String, Vec<(T, T)>)>,
    pub runs: RunsTest<T>,
}

/// Plot-ready residual series plus the randomness screen.
pub fn residual_analysis<T: Real>(
    fit: &FitResult<T>,
    matrix: &CauseYearMatrix,
) -> Result<ResidualAnalysis<T>> {
    if fit.years != matrix.years() {
        return Err(Error::Inconsistent("fit years differ from matrix years".into()));
    }
    let vs_fitted = fit
        .fitted
        .iter()
        .copied()
        .zip(fit.residuals.iter().copied())
        .collect();
    let mut vs_predictor = Vec::new();
    for label in fit.spec.labels() {
        let col = matrix.predictor_column(label)?;
        let series: Vec<(T, T)> = col
            .into_iter()
            .map(from_u32::<T>)
            .zip(fit.residuals.iter().copied())
            .collect();
        vs_predictor.push((label.clone(), series));
    }
    Ok(ResidualAnalysis { vs_fitted, vs_predictor, runs: runs_test(&fit.residuals) })
}
