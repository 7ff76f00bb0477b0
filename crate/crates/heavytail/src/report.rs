//! The JSON report emitted for a fitted series: the fit itself, baseline
//! fits, the goodness-of-fit table, an optional tail diagnostic, and an echo
//! of every setting that influenced the run.

use crate::baselines::BaselineModel;
use crate::fit::FitResult;
use crate::gof::GofReport;
use crate::series::Frequency;
use crate::tail::TailReport;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Resolved settings echoed into the report so a comparison can be audited
/// and reproduced byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub version: String,
    pub grid: usize,
    pub restarts: usize,
    pub seed: u64,
    pub models: Vec<String>,
    pub frequency: Frequency,
    /// Mass trimmed from each tail in the chi-square binning.
    pub trim_per_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub series: String,
    pub config: ConfigEcho,
    pub pgml: FitResult,
    pub baselines: Vec<BaselineModel>,
    pub gof: Vec<GofReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailReport>,
}

impl RunReport {
    /// Stable, human-readable JSON (fixed field order, trailing newline).
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Ingestion(format!("cannot parse run report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseDistribution;
    use crate::fit::{fit_quantile_regression, FitConfig};

    fn tiny_report() -> RunReport {
        let data = BaseDistribution::Gaussian.sample(300, 3).unwrap();
        let fit = fit_quantile_regression(
            &BaseDistribution::Gaussian,
            &data,
            &FitConfig {
                max_iters: 60,
                restarts: 1,
                ..FitConfig::default()
            },
        )
        .unwrap();
        RunReport {
            series: "demo".into(),
            config: ConfigEcho {
                version: env!("CARGO_PKG_VERSION").into(),
                grid: 99,
                restarts: 1,
                seed: 0,
                models: vec!["pgml".into(), "normal".into()],
                frequency: Frequency::Daily,
                trim_per_tail: 0.05,
            },
            pgml: fit,
            baselines: vec![BaselineModel::Normal { mu: 0.0, sigma: 1.0 }],
            gof: vec![],
            tail: None,
        }
    }

    #[test]
    fn json_round_trips_and_is_stable() {
        let report = tiny_report();
        let js = report.to_json();
        let back = RunReport::from_json(&js).unwrap();
        // the optimizer trace is display-only and not serialized; everything
        // else must survive the trip, including re-emission byte for byte
        assert_eq!(back.to_json(), js);
        assert_eq!(back.series, report.series);
        assert_eq!(back.pgml.spec, report.pgml.spec);
        assert_eq!(back.config, report.config);
        assert!(js.ends_with('\n'));
        // absent tail is omitted entirely, not emitted as null
        assert!(!js.contains("\"tail\""));
    }

    #[test]
    fn key_order_matches_schema() {
        let js = tiny_report().to_json();
        let series = js.find("\"series\"").unwrap();
        let config = js.find("\"config\"").unwrap();
        let pgml = js.find("\"pgml\"").unwrap();
        let baselines = js.find("\"baselines\"").unwrap();
        let gof = js.find("\"gof\"").unwrap();
        assert!(series < config && config < pgml && pgml < baselines && baselines < gof);
        assert!(js.contains("\"trim_per_tail\": 0.05"));
        assert!(js.contains("\"version\""));
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(
            RunReport::from_json("{\"series\": 1}"),
            Err(Error::Ingestion(_))
        ));
    }
}
