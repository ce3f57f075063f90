//! End-to-end model development: VIF gate, relevancy check, exhaustive
//! subset enumeration, F-gating, criteria ranking, and residual analysis
//! of the winner.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, Relevancy, ResidualAnalysis, VifReport};
use crate::error::{Error, Result};
use crate::fdist;
use crate::ingest::{short_label, CauseYearMatrix};
use crate::ols::{self, FitResult, ModelSpec};
use crate::scalar::{from_usize, Real};

pub const MAX_SUBSET_PREDICTORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionPolicy {
    /// Highest R²; in practice the all-variable model.
    MaxR2Full,
    /// Lexicographic: max adjusted R², min MSE, min |Cp − (k+1)|, min s.
    BalancedCriteria,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionConfig<T> {
    pub alpha: T,
    pub vif_threshold: T,
    pub policy: SelectionPolicy,
}

impl Default for SelectionConfig<f64> {
    fn default() -> Self {
        SelectionConfig { alpha: 0.05, vif_threshold: 5.0, policy: SelectionPolicy::MaxR2Full }
    }
}

/// All nonempty subsets, size ascending, lexicographic within a size.
pub fn enumerate_subsets(labels: &[String]) -> Result<Vec<ModelSpec>> {
    let k = labels.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    if k > MAX_SUBSET_PREDICTORS {
        return Err(Error::TooManyPredictors(k));
    }
    let mut specs = Vec::with_capacity((1usize << k) - 1);
    for size in 1..=k {
        for combo in (0..k).combinations(size) {
            let subset: Vec<String> = combo.iter().map(|&i| labels[i].clone()).collect();
            specs.push(ModelSpec::new(subset)?);
        }
    }
    Ok(specs)
}

fn criteria_cmp<T: Real>(a: &FitResult<T>, b: &FitResult<T>, policy: SelectionPolicy) -> Ordering {
    let cmp_desc = |x: T, y: T| y.partial_cmp(&x).unwrap_or(Ordering::Equal);
    let cmp_asc = |x: T, y: T| x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    let primary = match policy {
        SelectionPolicy::MaxR2Full => cmp_desc(a.r2, b.r2),
        SelectionPolicy::BalancedCriteria => {
            let cp_dist = |f: &FitResult<T>| {
                let target = from_usize::<T>(f.k + 1);
                (f.cp.expect("cp populated") - target).abs()
            };
            cmp_desc(a.r2_adj, b.r2_adj)
                .then_with(|| cmp_asc(a.mse, b.mse))
                .then_with(|| cmp_asc(cp_dist(a), cp_dist(b)))
                .then_with(|| cmp_asc(a.s, b.s))
        }
    };
    primary.then_with(|| a.k.cmp(&b.k))
}

/// Order fits best-first under `policy`. Returns indices into `fits`;
/// ties break toward the smaller subset, then input order.
pub fn rank<T: Real>(fits: &[FitResult<T>], policy: SelectionPolicy) -> Result<Vec<usize>> {
    if fits.is_empty() {
        return Err(Error::EmptyInput);
    }
    if policy == SelectionPolicy::BalancedCriteria && fits.iter().any(|f| f.cp.is_none()) {
        return Err(Error::Domain("Cp must be populated before ranking".into()));
    }
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&i, &j| criteria_cmp(&fits[i], &fits[j], policy));
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateStatus {
    Ranked { rank: usize },
    RejectedFGate,
    RejectedCollinear { label: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub spec: ModelSpec,
    pub fit: Option<FitResult<T>>,
    /// F critical value at the configured alpha for this subset size.
    pub f_critical_gate: Option<T>,
    pub status: CandidateStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport<T> {
    pub policy: SelectionPolicy,
    pub alpha: T,
    pub vif_threshold: T,
    pub vif: VifReport<T>,
    /// Labels removed by the VIF gate.
    pub excluded: Vec<String>,
    pub relevancy: Vec<Relevancy<T>>,
    pub full_model_mse: T,
    /// One entry per enumerated subset, in enumeration order.
    pub candidates: Vec<Candidate<T>>,
    /// Indices into `candidates`, best first (F-passing candidates only).
    pub ranking: Vec<usize>,
    /// Top candidate per subset size.
    pub best_by_size: BTreeMap<usize, usize>,
    /// Index of the designated best-fit model.
    pub best_fit: usize,
    pub residual: ResidualAnalysis<T>,
    pub pipeline_log: Vec<String>,
}

impl<T: Real> SelectionReport<T> {
    pub fn best_fit_result(&self) -> &FitResult<T> {
        self.candidates[self.best_fit]
            .fit
            .as_ref()
            .expect("best fit is always a fitted candidate")
    }
}

/// Run the full development pipeline: VIF gate, relevancy check,
/// exhaustive subset fits against the full-model MSE, F gate, ranking,
/// and residual analysis of the winner.
pub fn run_pipeline<T: Real>(
    matrix: &CauseYearMatrix,
    config: &SelectionConfig<T>,
) -> Result<SelectionReport<T>> {
    let mut log = Vec::new();
    let labels = matrix.labels().to_vec();

    // gate 1: multicollinearity
    let vif_report = diagnostics::vif(matrix, &labels, config.vif_threshold)?;
    let mut retained: Vec<String> = Vec::new();
    let mut excluded: Vec<String> = Vec::new();
    for entry in &vif_report.entries {
        if entry.flagged {
            log.push(format!("vif: excluded `{}` (VIF {})", entry.label, entry.vif));
            excluded.push(entry.label.clone());
        } else {
            log.push(format!("vif: retained `{}` (VIF {})", entry.label, entry.vif));
            retained.push(entry.label.clone());
        }
    }
    if retained.is_empty() {
        return Err(Error::DegenerateInput("VIF gate removed every predictor".into()));
    }

    // gate 2: relevancy / linearity; constant predictors cannot be fit
    let mut relevancy = Vec::new();
    let mut usable: Vec<String> = Vec::new();
    for label in &retained {
        match diagnostics::multiple_r::<T>(matrix, label) {
            Ok(rel) => {
                if rel.slope_sign <= 0 {
                    log.push(format!(
                        "relevancy: warning, non-positive slope for `{label}` (R {})",
                        rel.r
                    ));
                } else {
                    log.push(format!("relevancy: `{label}` R {}", rel.r));
                }
                relevancy.push(rel);
                usable.push(label.clone());
            }
            Err(Error::ConstantPredictor(_)) => {
                log.push(format!("relevancy: excluded constant predictor `{label}`"));
                excluded.push(label.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if usable.is_empty() {
        return Err(Error::DegenerateInput("no usable predictor after relevancy check".into()));
    }
    let retained = usable;

    // gate 3: full model supplies the MSE for Cp
    let full_spec = ModelSpec::new(retained.clone())?;
    let full_fit = ols::fit::<T>(matrix, &full_spec, None)?;
    let full_model_mse = full_fit.mse;
    log.push(format!("full model: MSE {}", full_model_mse));

    // gates 4-5: exhaustive subset fits plus the F screen
    let specs = enumerate_subsets(&retained)?;
    let n = matrix.n();
    let mut f_crit_by_k: BTreeMap<usize, T> = BTreeMap::new();
    let mut candidates: Vec<Candidate<T>> = Vec::with_capacity(specs.len());
    for spec in specs {
        let k = spec.k();
        let f_crit = match f_crit_by_k.get(&k) {
            Some(&v) => v,
            None => {
                let v = fdist::f_critical(config.alpha, k, n - k - 1)?;
                f_crit_by_k.insert(k, v);
                v
            }
        };
        match ols::fit::<T>(matrix, &spec, Some(full_model_mse)) {
            Ok(fit) => {
                let pass = fit.f_stat > f_crit;
                let status = if pass {
                    CandidateStatus::Ranked { rank: 0 } // filled in below
                } else {
                    log.push(format!(
                        "f-gate: rejected {} (f {} <= critical {})",
                        model_name(&spec),
                        fit.f_stat,
                        f_crit
                    ));
                    CandidateStatus::RejectedFGate
                };
                candidates.push(Candidate {
                    spec,
                    fit: Some(fit),
                    f_critical_gate: Some(f_crit),
                    status,
                });
            }
            Err(Error::CollinearPredictor { label }) => {
                log.push(format!(
                    "fit: rejected {} (collinear `{label}`)",
                    model_name(&spec)
                ));
                candidates.push(Candidate {
                    spec,
                    fit: None,
                    f_critical_gate: Some(f_crit),
                    status: CandidateStatus::RejectedCollinear { label },
                });
            }
            Err(e) => return Err(e),
        }
    }

    let passing: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, cand)| matches!(cand.status, CandidateStatus::Ranked { .. }))
        .map(|(i, _)| i)
        .collect();
    if passing.is_empty() {
        return Err(Error::NoModel(format!(
            "all {} candidate subsets failed the F gate at alpha {}",
            candidates.len(),
            config.alpha
        )));
    }

    // gate 6: rank the survivors
    let passing_fits: Vec<FitResult<T>> = passing
        .iter()
        .map(|&i| candidates[i].fit.clone().unwrap())
        .collect();
    let order = rank(&passing_fits, config.policy)?;
    let ranking: Vec<usize> = order.iter().map(|&o| passing[o]).collect();
    for (pos, &idx) in ranking.iter().enumerate() {
        candidates[idx].status = CandidateStatus::Ranked { rank: pos };
        log.push(format!("rank {pos}: {}", model_name(&candidates[idx].spec)));
    }
    let mut best_by_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &idx in &ranking {
        best_by_size.entry(candidates[idx].spec.k()).or_insert(idx);
    }

    // gate 7: residual analysis on the winner
    let best_fit = ranking[0];
    let winner = candidates[best_fit].fit.as_ref().unwrap();
    let residual = diagnostics::residual_analysis(winner, matrix)?;
    log.push(format!(
        "residual: runs {} (z {}, pass {})",
        residual.runs.runs, residual.runs.z, residual.runs.pass
    ));

    Ok(SelectionReport {
        policy: config.policy,
        alpha: config.alpha,
        vif_threshold: config.vif_threshold,
        vif: vif_report,
        excluded,
        relevancy,
        full_model_mse,
        candidates,
        ranking,
        best_by_size,
        best_fit,
        residual,
        pipeline_log: log,
    })
}

/// `f(C,SW,...)` display name for a subset.
pub fn model_name(spec: &ModelSpec) -> String {
    let parts: Vec<&str> = spec.labels().iter().map(|l| short_label(l)).collect();
    format!("f({})", parts.join(","))
}

/// Best-fit equation as a display string, coefficients to 3 decimals.
pub fn equation_string<T: Real>(fit: &FitResult<T>) -> String {
    let mut s = format!("y = {:.3}", fit.coefficients.intercept);
    for (label, &slope) in &fit.coefficients.slopes {
        s.push_str(&format!(" + {:.3}*{}", slope, short_label(label)));
    }
    s
}

/// Write the ranked candidates as a model-per-column table: rows are the
/// intercept, each predictor coefficient (NA when absent), then the fit
/// statistics.
pub fn write_model_table<T: Real, W: Write>(
    report: &SelectionReport<T>,
    labels: &[String],
    mut w: W,
) -> Result<()> {
    let ranked: Vec<&Candidate<T>> =
        report.ranking.iter().map(|&i| &report.candidates[i]).collect();
    let header: Vec<String> = ranked.iter().map(|c| model_name(&c.spec)).collect();
    writeln!(w, "parameter,{}", header.join(","))?;

    let mut row = |name: &str, cells: Vec<String>| -> std::io::Result<()> {
        writeln!(w, "{name},{}", cells.join(","))
    };

    row(
        "a",
        ranked
            .iter()
            .map(|c| format!("{}", c.fit.as_ref().unwrap().coefficients.intercept))
            .collect(),
    )?;
    for label in labels {
        row(
            short_label(label),
            ranked
                .iter()
                .map(|c| {
                    c.fit
                        .as_ref()
                        .unwrap()
                        .coefficients
                        .slopes
                        .get(label)
                        .map(|v| format!("{v}"))
                        .unwrap_or_else(|| "NA".to_string())
                })
                .collect(),
        )?;
    }
    let stat = |f: fn(&FitResult<T>) -> String| -> Vec<String> {
        ranked.iter().map(|c| f(c.fit.as_ref().unwrap())).collect()
    };
    row("s", stat(|f| format!("{}", f.s)))?;
    row("r2", stat(|f| format!("{}", f.r2)))?;
    row("r2_adj", stat(|f| format!("{}", f.r2_adj)))?;
    row("mse", stat(|f| format!("{}", f.mse)))?;
    row(
        "cp",
        stat(|f| f.cp.map(|v| format!("{v}")).unwrap_or_else(|| "NA".to_string())),
    )?;
    row("f", stat(|f| format!("{}", f.f_stat)))?;
    row(
        "f_critical",
        ranked
            .iter()
            .map(|c| format!("{}", c.f_critical_gate.unwrap()))
            .collect(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::CauseYearMatrix;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn subset_counts() {
        assert_eq!(enumerate_subsets(&labels(&["a"])).unwrap().len(), 1);
        assert_eq!(enumerate_subsets(&labels(&["a", "b", "c", "d", "e"])).unwrap().len(), 31);
        assert!(matches!(enumerate_subsets(&[]), Err(Error::EmptyInput)));
        let many: Vec<String> = (0..17).map(|i| format!("x{i}")).collect();
        assert!(matches!(enumerate_subsets(&many), Err(Error::TooManyPredictors(17))));
    }

    #[test]
    fn enumeration_order_contract() {
        let specs = enumerate_subsets(&labels(&["a", "b", "c"])).unwrap();
        let got: Vec<Vec<&str>> = specs
            .iter()
            .map(|s| s.labels().iter().map(|l| l.as_str()).collect())
            .collect();
        assert_eq!(
            got,
            vec![
                vec!["a"],
                vec!["b"],
                vec!["c"],
                vec!["a", "b"],
                vec!["a", "c"],
                vec!["b", "c"],
                vec!["a", "b", "c"],
            ]
        );
    }

    fn noisy_matrix() -> CauseYearMatrix {
        // y = 3 + 2*x1 + deterministic low-amplitude wobble; x2 weak noise
        let n = 12usize;
        let x1: Vec<u32> = (0..n).map(|i| ((i * 7) % 10) as u32 + 1).collect();
        let x2: Vec<u32> = (0..n).map(|i| ((i * 3 + 1) % 4) as u32).collect();
        let y: Vec<u32> = (0..n)
            .map(|i| 3 + 2 * x1[i] + if i % 3 == 0 { 1 } else { 0 })
            .collect();
        let years: Vec<u16> = (0..n).map(|i| 2000 + i as u16).collect();
        let counts: Vec<Vec<u32>> = (0..n).map(|i| vec![x1[i], x2[i]]).collect();
        CauseYearMatrix::from_counts(labels(&["x1", "x2"]), years, counts, y).unwrap()
    }

    #[test]
    fn pipeline_single_strong_predictor() {
        let m = noisy_matrix();
        for policy in [SelectionPolicy::MaxR2Full, SelectionPolicy::BalancedCriteria] {
            let cfg = SelectionConfig { alpha: 0.05, vif_threshold: 5.0, policy };
            let report = run_pipeline::<f64>(&m, &cfg).unwrap();
            let winner = &report.candidates[report.best_fit];
            assert!(winner.spec.labels().contains(&"x1".to_string()));
            assert_eq!(report.candidates.len(), 3);
        }
    }

    #[test]
    fn full_subset_minimizes_sse() {
        let m = noisy_matrix();
        let cfg = SelectionConfig::default();
        let report = run_pipeline::<f64>(&m, &cfg).unwrap();
        let full_sse = report
            .candidates
            .iter()
            .find(|c| c.spec.k() == 2)
            .and_then(|c| c.fit.as_ref())
            .unwrap()
            .sse;
        for cand in &report.candidates {
            if let Some(fit) = &cand.fit {
                assert!(full_sse <= fit.sse + 1e-9);
            }
        }
    }

    #[test]
    fn ranking_tie_breaks_toward_smaller_subset() {
        let m = noisy_matrix();
        let cfg = SelectionConfig::default();
        let report = run_pipeline::<f64>(&m, &cfg).unwrap();
        let mut fits: Vec<FitResult<f64>> = report
            .candidates
            .iter()
            .filter_map(|c| c.fit.clone())
            .collect();
        // duplicate the first fit with a larger k to force a tie
        let mut clone = fits[0].clone();
        clone.k += 1;
        fits.push(clone);
        let order = rank(&fits, SelectionPolicy::MaxR2Full).unwrap();
        let dup_pos = order.iter().position(|&i| i == fits.len() - 1).unwrap();
        let orig_pos = order.iter().position(|&i| i == 0).unwrap();
        assert!(orig_pos < dup_pos);
    }

    #[test]
    fn deterministic_report() {
        let m = noisy_matrix();
        let cfg = SelectionConfig::default();
        let a = run_pipeline::<f64>(&m, &cfg).unwrap();
        let b = run_pipeline::<f64>(&m, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn pipeline_log_covers_every_subset() {
        let m = noisy_matrix();
        let report = run_pipeline::<f64>(&m, &SelectionConfig::default()).unwrap();
        for cand in &report.candidates {
            match cand.status {
                CandidateStatus::Ranked { rank } => assert!(rank < report.ranking.len()),
                CandidateStatus::RejectedFGate | CandidateStatus::RejectedCollinear { .. } => {}
            }
        }
        let ranked = report
            .candidates
            .iter()
            .filter(|c| matches!(c.status, CandidateStatus::Ranked { .. }))
            .count();
        assert_eq!(ranked, report.ranking.len());
    }
}
