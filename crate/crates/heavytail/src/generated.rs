//! The distribution of `f(X)` for a base variable `X` and a validated
//! monotone transform `f`.
//!
//! Quantiles push forward through `f`, probabilities pull back through
//! `f^{-1}`, and the density follows the change of variables
//! `p(y) = p_base(f^{-1}(y)) / f'(f^{-1}(y))`.

use crate::base::BaseDistribution;
use crate::transform::TransformSpec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedDistribution {
    pub base: BaseDistribution,
    pub transform: TransformSpec,
}

impl GeneratedDistribution {
    /// Pair a base with a transform; the transform must pass monotonicity
    /// validation, otherwise the pushforward is not a distribution.
    pub fn new(base: BaseDistribution, transform: TransformSpec) -> Result<Self> {
        let report = transform.validate()?;
        if !report.pass {
            return Err(Error::NotMonotone {
                witness: report.witness.unwrap_or(f64::NAN),
                value: report.g1_condition_min.min(report.g2_condition_min),
            });
        }
        Ok(Self { base, transform })
    }

    /// Parse a JSON spec: either a full `{"base": ..., "transform": ...}`
    /// object or a bare transform, which gets the Gaussian base. Everything
    /// is re-validated, since serde bypasses the checked constructors.
    pub fn from_json(text: &str) -> Result<Self> {
        let (base, t) = if let Ok(dist) = serde_json::from_str::<Self>(text) {
            (dist.base, dist.transform)
        } else {
            match serde_json::from_str::<TransformSpec>(text) {
                Ok(t) => (BaseDistribution::Gaussian, t),
                Err(e) => {
                    return Err(Error::InvalidSpec(format!(
                        "neither a {{base, transform}} spec nor a bare transform: {e}"
                    )))
                }
            }
        };
        Self::new(base, TransformSpec::new(t.mu, t.sigma, t.g1, t.g2)?)
    }

    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        self.transform.eval(self.base.quantile(alpha)?)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        if y == f64::NEG_INFINITY {
            return 0.0;
        }
        match self.transform.invert(y) {
            Ok(x) => self.base.cdf(x),
            Err(_) => f64::NAN,
        }
    }

    pub fn survival(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y == f64::INFINITY {
            return 0.0;
        }
        if y == f64::NEG_INFINITY {
            return 1.0;
        }
        match self.transform.invert(y) {
            Ok(x) => self.base.survival(x),
            Err(_) => f64::NAN,
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.log_pdf(y).exp()
    }

    /// Log density; `-inf` outside the support, and when `f'` overflows the
    /// density has underflowed anyway.
    pub fn log_pdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let Ok(x) = self.transform.invert(y) else {
            return f64::NAN;
        };
        match self.transform.deriv(x) {
            Ok(d) if d > 0.0 => self.base.log_pdf(x) - d.ln(),
            _ => f64::NEG_INFINITY,
        }
    }

    /// Transform a seeded base sample pointwise: identical `(n, seed)` give
    /// base draws bit-identical to `base.sample`, mapped through `f`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let xs = self.base.sample(n, seed)?;
        xs.into_iter().map(|x| self.transform.eval(x)).collect()
    }

    /// Mean negative log density over `data`, skipping points where the log
    /// density is not finite; returns the mean and how many were skipped.
    pub fn nll(&self, data: &[f64]) -> (f64, usize) {
        let mut sum = 0.0;
        let mut used = 0usize;
        for &y in data {
            let lp = self.log_pdf(y);
            if lp.is_finite() {
                sum += lp;
                used += 1;
            }
        }
        if used == 0 {
            (f64::INFINITY, data.len())
        } else {
            (-sum / used as f64, data.len() - used)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::GFamily;

    fn fig_generated() -> GeneratedDistribution {
        GeneratedDistribution::new(
            BaseDistribution::Gaussian,
            TransformSpec::pgml(-1.0, 0.5, 1.5, 1.8, 4.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn quantile_pushes_through_transform() {
        let d = fig_generated();
        // f(Phi^-1(0.5)) = f(0) = mu
        assert_eq!(d.quantile(0.5).unwrap(), -1.0);
        // f(Phi^-1(0.975)), with Phi^-1(0.975) = 1.959963984540054
        let q = d.quantile(0.975).unwrap();
        let expect = d.transform.eval(1.959963984540054).unwrap();
        assert!((q - expect).abs() < 1e-12);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn cdf_inverts_quantile() {
        let d = fig_generated();
        for alpha in [0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999] {
            let y = d.quantile(alpha).unwrap();
            assert!((d.cdf(y) - alpha).abs() < 1e-11, "alpha {alpha}");
            assert!((d.survival(y) - (1.0 - alpha)).abs() < 1e-11);
        }
        assert_eq!(d.cdf(f64::INFINITY), 1.0);
        assert_eq!(d.cdf(f64::NEG_INFINITY), 0.0);
        assert!(d.cdf(f64::NAN).is_nan());
    }

    #[test]
    fn pdf_matches_change_of_variables_and_cdf_slope() {
        let d = fig_generated();
        for y in [-3.0, -1.0, -0.2, 0.5, 2.0] {
            let x = d.transform.invert(y).unwrap();
            let expect = d.base.pdf(x) / d.transform.deriv(x).unwrap();
            assert!((d.pdf(y) - expect).abs() < 1e-12 * expect.max(1.0));
            let h = 1e-6;
            let num = (d.cdf(y + h) - d.cdf(y - h)) / (2.0 * h);
            assert!(
                ((num - d.pdf(y)) / d.pdf(y)).abs() < 1e-4,
                "pdf vs cdf slope at {y}"
            );
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        // composite Simpson over a wide window; tails beyond contribute < 1e-10
        let d = fig_generated();
        let (lo, hi) = (
            d.quantile(1e-12).unwrap(),
            d.quantile(1.0 - 1e-12).unwrap(),
        );
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut s = d.pdf(lo) + d.pdf(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * d.pdf(lo + i as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }

    #[test]
    fn sampling_is_transform_of_base_sample() {
        let d = fig_generated();
        let ys = d.sample(200, 77).unwrap();
        let xs = d.base.sample(200, 77).unwrap();
        for (y, x) in ys.iter().zip(&xs) {
            assert_eq!(*y, d.transform.eval(*x).unwrap());
        }
        assert_eq!(ys, d.sample(200, 77).unwrap());
        assert!(d.sample(0, 1).is_err());
    }

    #[test]
    fn rejects_non_monotone_transform() {
        let bad = TransformSpec::pgml(0.0, 1.0, 1.5, 1.0, 0.25).unwrap();
        match GeneratedDistribution::new(BaseDistribution::Gaussian, bad) {
            Err(Error::NotMonotone { witness, value }) => {
                assert!(witness.is_finite());
                assert!(value <= -0.5);
            }
            other => panic!("expected NotMonotone, got {other:?}"),
        }
    }

    #[test]
    fn nll_skips_points_outside_support() {
        // exponential base with right lift only: support is [f(0), inf)
        let spec = TransformSpec::new(
            0.0,
            1.0,
            GFamily::expm1_over_x(0.5).unwrap(),
            GFamily::Zero,
        )
        .unwrap();
        let d = GeneratedDistribution::new(BaseDistribution::Exponential, spec).unwrap();
        let sample = d.sample(500, 11).unwrap();
        let (nll, excluded) = d.nll(&sample);
        assert_eq!(excluded, 0);
        assert!(nll.is_finite());
        let mut with_outlier = sample.clone();
        with_outlier.push(-5.0); // below the support's left edge
        let (nll2, excluded2) = d.nll(&with_outlier);
        assert_eq!(excluded2, 1);
        assert!((nll2 - nll).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let d = fig_generated();
        let js = serde_json::to_string(&d).unwrap();
        let back: GeneratedDistribution = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn from_json_accepts_both_layouts_and_revalidates() {
        let d = fig_generated();
        let full = serde_json::to_string(&d).unwrap();
        assert_eq!(GeneratedDistribution::from_json(&full).unwrap(), d);

        // a bare transform defaults to the Gaussian base
        let bare = serde_json::to_string(&d.transform).unwrap();
        let parsed = GeneratedDistribution::from_json(&bare).unwrap();
        assert_eq!(parsed.base, BaseDistribution::Gaussian);
        assert_eq!(parsed.transform, d.transform);

        // constructor checks run even though serde would accept the fields
        let negative_scale =
            r#"{"mu":0.0,"sigma":-1.0,"g1":{"family":"zero"},"g2":{"family":"zero"}}"#;
        assert!(matches!(
            GeneratedDistribution::from_json(negative_scale),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            GeneratedDistribution::from_json("plain text"),
            Err(Error::InvalidSpec(_))
        ));
    }
}
