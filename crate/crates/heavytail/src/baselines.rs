//! Maximum-likelihood reference models for goodness-of-fit comparison:
//! Normal, Laplace, and location-scale Student t.

use crate::base::BaseDistribution;
use crate::fit::sorted_quantile;
use crate::special::{norm_cdf, norm_quantile, SQRT_2PI};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Degrees of freedom assigned to the Student t when the Gaussian limit wins;
/// far above the threshold where its density switches to the exact normal form.
const GAUSSIAN_LIMIT_DOF: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Normal,
    Laplace,
    StudentT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BaselineModel {
    Normal { mu: f64, sigma: f64 },
    Laplace { mu: f64, b: f64 },
    StudentT { mu: f64, scale: f64, dof: f64 },
}

impl BaselineModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Laplace { .. } => "laplace",
            Self::StudentT { .. } => "student_t",
        }
    }

    /// Number of estimated parameters.
    pub fn n_params(&self) -> usize {
        match self {
            Self::Normal { .. } | Self::Laplace { .. } => 2,
            Self::StudentT { .. } => 3,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Self::Laplace { mu, b } => {
                let z = (x - mu) / b;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Self::StudentT { mu, scale, dof } => {
                BaseDistribution::StudentT { dof }.cdf((x - mu) / scale)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - SQRT_2PI.ln() - sigma.ln()
            }
            Self::Laplace { mu, b } => -(x - mu).abs() / b - (2.0 * b).ln(),
            Self::StudentT { mu, scale, dof } => {
                BaseDistribution::StudentT { dof }.log_pdf((x - mu) / scale) - scale.ln()
            }
        }
    }

    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0,1), got {alpha}"
            )));
        }
        Ok(match *self {
            Self::Normal { mu, sigma } => mu + sigma * norm_quantile(alpha),
            Self::Laplace { mu, b } => {
                if alpha < 0.5 {
                    mu + b * (2.0 * alpha).ln()
                } else {
                    mu - b * (2.0 * (1.0 - alpha)).ln()
                }
            }
            Self::StudentT { mu, scale, dof } => {
                mu + scale * BaseDistribution::StudentT { dof }.quantile(alpha)?
            }
        })
    }

    /// Mean negative log density over `data`.
    pub fn nll(&self, data: &[f64]) -> f64 {
        -data.iter().map(|&x| self.log_pdf(x)).sum::<f64>() / data.len() as f64
    }
}

/// Mean negative log density of `data` under `model`.
pub fn baseline_nll(model: &BaselineModel, data: &[f64]) -> f64 {
    model.nll(data)
}

/// Maximum-likelihood fit. Normal and Laplace are closed-form; the Student t
/// profiles the NLL over dof (EM for location/scale at fixed dof, golden
/// section on ln dof) and always considers the Gaussian limit as a candidate,
/// so its NLL never exceeds the Normal fit's.
pub fn mle_fit(kind: BaselineKind, data: &[f64]) -> Result<BaselineModel> {
    if data.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: data.len(),
        });
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "data contains a non-finite value at index {i}"
        )));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(Error::DegenerateData(
            "all observations are identical; no scale can be estimated".into(),
        ));
    }
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let median = sorted_quantile(&sorted, 0.5);

    Ok(match kind {
        BaselineKind::Normal => BaselineModel::Normal {
            mu: mean,
            sigma: var.sqrt(),
        },
        BaselineKind::Laplace => {
            let b = data.iter().map(|x| (x - median).abs()).sum::<f64>() / n;
            BaselineModel::Laplace { mu: median, b }
        }
        BaselineKind::StudentT => fit_student_t(data, median, mean, var),
    })
}

fn fit_student_t(data: &[f64], median: f64, mean: f64, var: f64) -> BaselineModel {
    // profile over dof: best of the coarse starts brackets a golden-section
    // refinement; the Gaussian-limit candidate covers the flat large-dof tail
    let starts = [2.0, 8.0, 50.0];
    let mut best = (f64::INFINITY, BaselineModel::Normal { mu: 0.0, sigma: 1.0 });
    let mut consider = |cand: (f64, BaselineModel)| {
        if cand.0 < best.0 {
            best = cand;
        }
    };
    let mut best_start = starts[0];
    let mut best_start_nll = f64::INFINITY;
    for &dof in &starts {
        let cand = profile_at(data, median, var, dof);
        if cand.0 < best_start_nll {
            best_start_nll = cand.0;
            best_start = dof;
        }
        consider(cand);
    }
    let (mut lo, mut hi) = (
        (best_start / 4.0).max(0.5).ln(),
        (best_start * 4.0).min(200.0).ln(),
    );
    // golden section on ln dof
    let inv_phi = 0.618_033_988_749_894_9;
    let mut m1 = hi - inv_phi * (hi - lo);
    let mut m2 = lo + inv_phi * (hi - lo);
    let mut f1 = profile_at(data, median, var, m1.exp());
    let mut f2 = profile_at(data, median, var, m2.exp());
    for _ in 0..40 {
        if f1.0 <= f2.0 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = profile_at(data, median, var, m1.exp());
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = profile_at(data, median, var, m2.exp());
        }
    }
    consider(f1);
    consider(f2);
    // Gaussian limit: t nests the normal, so the fit must never lose to it
    let gaussian = BaselineModel::StudentT {
        mu: mean,
        scale: var.sqrt(),
        dof: GAUSSIAN_LIMIT_DOF,
    };
    consider((gaussian.nll(data), gaussian));
    best.1
}

/// NLL at fixed dof with (mu, scale) estimated by EM.
fn profile_at(data: &[f64], median: f64, var: f64, dof: f64) -> (f64, BaselineModel) {
    let n = data.len() as f64;
    let mut mu = median;
    let mut s2 = if dof > 2.5 { var * (dof - 2.0) / dof } else { var };
    for _ in 0..300 {
        let mut wsum = 0.0;
        let mut wx = 0.0;
        for &x in data {
            let z2 = (x - mu) * (x - mu) / s2;
            let w = (dof + 1.0) / (dof + z2);
            wsum += w;
            wx += w * x;
        }
        let mu_next = wx / wsum;
        let mut s2_next = 0.0;
        for &x in data {
            let z2 = (x - mu) * (x - mu) / s2;
            let w = (dof + 1.0) / (dof + z2);
            s2_next += w * (x - mu_next) * (x - mu_next);
        }
        s2_next /= n;
        let done = (mu_next - mu).abs() <= 1e-10 * (1.0 + mu.abs())
            && (s2_next - s2).abs() <= 1e-10 * s2;
        mu = mu_next;
        s2 = s2_next;
        if done {
            break;
        }
    }
    let model = BaselineModel::StudentT {
        mu,
        scale: s2.sqrt(),
        dof,
    };
    (model.nll(data), model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generated::GeneratedDistribution;
    use crate::transform::TransformSpec;

    #[test]
    fn normal_and_laplace_closed_forms() {
        let tiny = [-1.0, 0.0, 1.0];
        // below the data-length floor, so check the formulas on a padded copy
        let mut data = Vec::new();
        for _ in 0..4 {
            data.extend_from_slice(&tiny);
        }
        let normal = mle_fit(BaselineKind::Normal, &data).unwrap();
        match normal {
            BaselineModel::Normal { mu, sigma } => {
                assert_eq!(mu, 0.0);
                assert!((sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
            }
            other => panic!("wrong variant {other:?}"),
        }
        let laplace = mle_fit(BaselineKind::Laplace, &data).unwrap();
        match laplace {
            BaselineModel::Laplace { mu, b } => {
                assert_eq!(mu, 0.0);
                assert!((b - 2.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("wrong variant {other:?}"),
        }
    }

    #[test]
    fn nll_closed_forms() {
        let normal = BaselineModel::Normal { mu: 0.0, sigma: 1.0 };
        assert!((baseline_nll(&normal, &[0.0]) - 0.9189385332046727).abs() < 1e-12);
        let laplace = BaselineModel::Laplace { mu: 0.0, b: 1.0 };
        assert!((baseline_nll(&laplace, &[0.0]) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn student_t_recovers_dof() {
        let t5 = BaseDistribution::student_t(5.0).unwrap();
        let data: Vec<f64> = t5
            .sample(10_000, 31)
            .unwrap()
            .into_iter()
            .map(|z| 0.3 + 1.7 * z)
            .collect();
        let model = mle_fit(BaselineKind::StudentT, &data).unwrap();
        let BaselineModel::StudentT { mu, scale, dof } = model else {
            panic!("wrong variant");
        };
        assert!((3.5..=7.0).contains(&dof), "dof = {dof}");
        assert!((mu - 0.3).abs() < 0.1, "mu = {mu}");
        assert!((scale / 1.7 - 1.0).abs() < 0.1, "scale = {scale}");
    }

    #[test]
    fn student_t_never_loses_to_normal() {
        // gaussian data: the t fit must fall back to its normal limit
        let data = BaseDistribution::Gaussian.sample(5_000, 8).unwrap();
        let normal = mle_fit(BaselineKind::Normal, &data).unwrap();
        let t = mle_fit(BaselineKind::StudentT, &data).unwrap();
        assert!(t.nll(&data) <= normal.nll(&data) + 1e-9);
        // heavy data: the t fit should clearly win
        let heavy = BaseDistribution::student_t(3.0).unwrap().sample(5_000, 9).unwrap();
        let normal_h = mle_fit(BaselineKind::Normal, &heavy).unwrap();
        let t_h = mle_fit(BaselineKind::StudentT, &heavy).unwrap();
        assert!(t_h.nll(&heavy) < normal_h.nll(&heavy));
    }

    #[test]
    fn heavy_tail_series_prefers_student_t() {
        let spec = TransformSpec::pgml(0.0, 1.0, 1.6, 1.6, 4.0).unwrap();
        let data = GeneratedDistribution::new(BaseDistribution::Gaussian, spec)
            .unwrap()
            .sample(4_000, 10)
            .unwrap();
        let normal = mle_fit(BaselineKind::Normal, &data).unwrap();
        let t = mle_fit(BaselineKind::StudentT, &data).unwrap();
        assert!(t.nll(&data) < normal.nll(&data));
    }

    #[test]
    fn cdf_quantile_round_trip() {
        let data = BaseDistribution::student_t(4.0).unwrap().sample(2_000, 5).unwrap();
        for kind in [BaselineKind::Normal, BaselineKind::Laplace, BaselineKind::StudentT] {
            let model = mle_fit(kind, &data).unwrap();
            for i in 1..=39 {
                let alpha = i as f64 / 40.0;
                let q = model.quantile(alpha).unwrap();
                assert!(
                    (model.cdf(q) - alpha).abs() < 1e-8,
                    "{} at {alpha}",
                    model.name()
                );
            }
            assert!(model.quantile(0.0).is_err());
            assert!(model.quantile(1.0).is_err());
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let models = [
            BaselineModel::Normal { mu: 0.4, sigma: 1.3 },
            BaselineModel::Laplace { mu: -0.2, b: 0.8 },
            BaselineModel::StudentT { mu: 0.1, scale: 0.9, dof: 4.5 },
        ];
        for model in &models {
            let (lo, hi) = (
                model.quantile(1e-9).unwrap(),
                model.quantile(1.0 - 1e-9).unwrap(),
            );
            let n = 40_000;
            let h = (hi - lo) / n as f64;
            let mut s = model.pdf(lo) + model.pdf(hi);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * model.pdf(lo + i as f64 * h);
            }
            let integral = s * h / 3.0;
            assert!(
                (integral - 1.0).abs() < 1e-6,
                "{}: integral {integral}",
                model.name()
            );
        }
    }

    #[test]
    fn rejects_degenerate_and_short_data() {
        let constant = vec![2.5; 100];
        for kind in [BaselineKind::Normal, BaselineKind::Laplace, BaselineKind::StudentT] {
            assert!(matches!(
                mle_fit(kind, &constant),
                Err(Error::DegenerateData(_))
            ));
        }
        assert!(matches!(
            mle_fit(BaselineKind::Normal, &[1.0, 2.0]),
            Err(Error::InsufficientData { needed: 10, got: 2 })
        ));
        assert!(matches!(
            mle_fit(BaselineKind::Normal, &[f64::NAN; 20]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn serde_layout() {
        let m = BaselineModel::Normal { mu: 1.0, sigma: 2.0 };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"model":"normal","mu":1.0,"sigma":2.0}"#
        );
        let t = BaselineModel::StudentT { mu: 0.0, scale: 1.0, dof: 3.0 };
        let js = serde_json::to_string(&t).unwrap();
        let back: BaselineModel = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
    }
}
