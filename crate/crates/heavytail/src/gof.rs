//! Goodness-of-fit battery: trimmed-and-binned chi-square, Kolmogorov–Smirnov
//! and Kuiper measures, and NLL-based comparison across candidate models.

use crate::baselines::BaselineModel;
use crate::fit::sorted_quantile;
use crate::generated::GeneratedDistribution;
use crate::special::norm_cdf;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mass trimmed from each tail before binning.
pub const DEFAULT_TRIM: f64 = 0.05;
/// Number of equal-width interior bins (two open tail bins are added).
pub const DEFAULT_BINS: usize = 10;

/// Per-model goodness-of-fit summary. Ranks are 1-based competition ranks
/// (equal metric values share a rank) assigned by [`gof_compare`]; smaller is
/// better for every metric except `chi2_pvalue`, which ranks descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub model_name: String,
    pub chi2: f64,
    pub chi2_dof: i64,
    pub chi2_pvalue: f64,
    pub m_ks: f64,
    pub m_kuiper: f64,
    pub nll: f64,
    pub n: usize,
    pub rank_chi2: usize,
    pub rank_ks: usize,
    pub rank_kuiper: usize,
    pub rank_nll: usize,
}

/// A model whose metric computation failed, with the error it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofFailure {
    pub model_name: String,
    pub error: String,
}

/// Outcome of [`gof_compare`]: ranked successes plus per-model failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GofComparison {
    pub reports: Vec<GofReport>,
    pub failures: Vec<GofFailure>,
}

/// A candidate distribution for comparison: a name, the number of estimated
/// parameters (enters the chi-square dof), and evaluable cdf / log-density.
pub struct GofModel {
    pub name: String,
    pub n_params: usize,
    cdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    log_pdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl GofModel {
    pub fn new(
        name: impl Into<String>,
        n_params: usize,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        log_pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            n_params,
            cdf: Box::new(cdf),
            log_pdf: Box::new(log_pdf),
        }
    }

    pub fn from_baseline(model: &BaselineModel) -> Self {
        let (c, l) = (model.clone(), model.clone());
        Self::new(
            model.name(),
            model.n_params(),
            move |y| c.cdf(y),
            move |y| l.log_pdf(y),
        )
    }

    /// Wraps a transformed distribution; `n_params` is supplied by the caller
    /// because it depends on which g-family parameters were estimated.
    pub fn from_generated(
        name: impl Into<String>,
        dist: &GeneratedDistribution,
        n_params: usize,
    ) -> Self {
        let (c, l) = (dist.clone(), dist.clone());
        Self::new(name, n_params, move |y| c.cdf(y), move |y| l.log_pdf(y))
    }

    pub fn cdf(&self, y: f64) -> f64 {
        (self.cdf)(y)
    }

    pub fn log_pdf(&self, y: f64) -> f64 {
        (self.log_pdf)(y)
    }
}

/// Trimmed-and-binned chi-square test of `data` against `cdf`.
///
/// The central `1 - 2*trim` mass is split into `b` equal-width bins between
/// the trimmed empirical quantiles (inclusive linear-interpolation convention),
/// with two open tail bins, so the statistic sums over `b + 2` cells:
/// `chi2 = sum (E_i - T_i)^2 / T_i` with observed counts `E_i` and expected
/// counts `T_i = n * (cdf(e_{i+1}) - cdf(e_i))`, bins counted half-open on the
/// right and summed left to right. Degrees of freedom follow the `b - p + 1`
/// convention for `p` estimated parameters; the p-value uses the
/// Wilson–Hilferty cube-root approximation (absolute accuracy ~1e-3 for
/// dof >= 3).
pub fn chi_square(
    data: &[f64],
    cdf: impl Fn(f64) -> f64,
    p: usize,
    trim: f64,
    b: usize,
) -> Result<(f64, i64, f64)> {
    if data.len() < 50 {
        return Err(Error::InsufficientData {
            needed: 50,
            got: data.len(),
        });
    }
    if b < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {b}")));
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::Domain(format!(
            "trim must lie in [0, 0.5), got {trim}"
        )));
    }
    let dof = b as i64 - p as i64 + 1;
    if dof < 1 {
        return Err(Error::Domain(format!(
            "b - p + 1 = {dof} leaves no degrees of freedom"
        )));
    }
    let n = data.len();
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = sorted_quantile(&sorted, trim);
    let hi = sorted_quantile(&sorted, 1.0 - trim);
    if !(hi > lo) {
        return Err(Error::DegenerateData(format!(
            "trimmed range [{lo}, {hi}] has no width"
        )));
    }
    let edges: Vec<f64> = (0..=b)
        .map(|j| lo + j as f64 * (hi - lo) / b as f64)
        .collect();

    // observed counts over b+2 cells, half-open on the right
    let mut observed = Vec::with_capacity(b + 2);
    let mut prev = 0;
    for &e in &edges {
        let c = sorted.partition_point(|&y| y < e);
        observed.push((c - prev) as f64);
        prev = c;
    }
    observed.push((n - prev) as f64);

    let mut expected = Vec::with_capacity(b + 2);
    let mut prev_cdf = 0.0;
    for &e in &edges {
        let c = cdf(e);
        expected.push(n as f64 * (c - prev_cdf));
        prev_cdf = c;
    }
    expected.push(n as f64 * (1.0 - prev_cdf));

    let mut statistic = 0.0;
    for i in 0..b + 2 {
        if expected[i] < 1e-12 {
            return Err(Error::BinDegeneracy {
                bin: i,
                expected: expected[i],
            });
        }
        let d = observed[i] - expected[i];
        statistic += d * d / expected[i];
    }
    Ok((statistic, dof, chi_square_pvalue(statistic, dof as f64)))
}

/// Upper-tail chi-square probability via the Wilson–Hilferty normal
/// approximation of the cube-root transform.
fn chi_square_pvalue(statistic: f64, dof: f64) -> f64 {
    let z = ((statistic / dof).powf(1.0 / 3.0) - (1.0 - 2.0 / (9.0 * dof)))
        * (9.0 * dof / 2.0).sqrt();
    norm_cdf(-z)
}

/// One-sided Kolmogorov–Smirnov discrepancies and their maximum,
/// `D+ = max_i (i/n - F(y_(i)))`, `D- = max_i (F(y_(i)) - (i-1)/n)` over the
/// sorted sample, returned as `(d_plus, d_minus, m_ks)`.
pub fn ks_measure(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d_plus = f64::NEG_INFINITY;
    let mut d_minus = f64::NEG_INFINITY;
    for (i, &y) in sorted.iter().enumerate() {
        let f = cdf(y);
        d_plus = d_plus.max((i + 1) as f64 / n - f);
        d_minus = d_minus.max(f - i as f64 / n);
    }
    Ok((d_plus, d_minus, d_plus.max(d_minus)))
}

/// Kuiper measure `D+ + D-`, sensitive in both tails at once.
pub fn kuiper_measure(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let (d_plus, d_minus, _) = ks_measure(data, cdf)?;
    Ok(d_plus + d_minus)
}

/// Runs the full battery for every model and ranks the successful reports.
///
/// The returned list is ordered by NLL rank (ties broken by model name);
/// per-metric competition ranks are filled into each report. A model whose
/// chi-square errors out becomes a [`GofFailure`] entry instead of aborting
/// the whole comparison.
pub fn gof_compare(data: &[f64], models: &[GofModel]) -> Result<GofComparison> {
    if models.len() < 2 {
        return Err(Error::Domain(format!(
            "comparison needs at least 2 models, got {}",
            models.len()
        )));
    }
    let mut out = GofComparison::default();
    for model in models {
        match single_report(data, model) {
            Ok(report) => out.reports.push(report),
            Err(e) => out.failures.push(GofFailure {
                model_name: model.name.clone(),
                error: e.to_string(),
            }),
        }
    }
    assign_ranks(&mut out.reports);
    out.reports.sort_by(|a, b| {
        a.rank_nll
            .cmp(&b.rank_nll)
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    Ok(out)
}

fn single_report(data: &[f64], model: &GofModel) -> Result<GofReport> {
    let (chi2, chi2_dof, chi2_pvalue) =
        chi_square(data, |y| model.cdf(y), model.n_params, DEFAULT_TRIM, DEFAULT_BINS)?;
    let (_, _, m_ks) = ks_measure(data, |y| model.cdf(y))?;
    let m_kuiper = kuiper_measure(data, |y| model.cdf(y))?;
    let nll = -data.iter().map(|&y| model.log_pdf(y)).sum::<f64>() / data.len() as f64;
    Ok(GofReport {
        model_name: model.name.clone(),
        chi2,
        chi2_dof,
        chi2_pvalue,
        m_ks,
        m_kuiper,
        nll,
        n: data.len(),
        rank_chi2: 0,
        rank_ks: 0,
        rank_kuiper: 0,
        rank_nll: 0,
    })
}

fn assign_ranks(reports: &mut [GofReport]) {
    // competition rank: 1 + number of strictly better models; NaN is worst
    fn better(a: f64, b: f64, higher_is_better: bool) -> bool {
        match (a.is_nan(), b.is_nan()) {
            (true, _) => false,
            (false, true) => true,
            (false, false) => {
                if higher_is_better {
                    a > b
                } else {
                    a < b
                }
            }
        }
    }
    let metrics: [(fn(&GofReport) -> f64, bool); 4] = [
        (|r| r.chi2_pvalue, true),
        (|r| r.m_ks, false),
        (|r| r.m_kuiper, false),
        (|r| r.nll, false),
    ];
    for (m, &(key, higher)) in metrics.iter().enumerate() {
        for i in 0..reports.len() {
            let rank = 1 + reports
                .iter()
                .filter(|other| better(key(other), key(&reports[i]), higher))
                .count();
            match m {
                0 => reports[i].rank_chi2 = rank,
                1 => reports[i].rank_ks = rank,
                2 => reports[i].rank_kuiper = rank,
                _ => reports[i].rank_nll = rank,
            }
        }
    }
}

/// CSV table of a comparison, one row per successful model.
pub fn comparison_csv(reports: &[GofReport]) -> String {
    let mut out =
        String::from("name,chi2,dof,pvalue,m_ks,m_k,nll,rank_chi2,rank_ks,rank_kuiper,rank_nll\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.model_name,
            r.chi2,
            r.chi2_dof,
            r.chi2_pvalue,
            r.m_ks,
            r.m_kuiper,
            r.nll,
            r.rank_chi2,
            r.rank_ks,
            r.rank_kuiper,
            r.rank_nll
        ));
    }
    out
}
