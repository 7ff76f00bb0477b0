//! Tail-behavior machinery: Hill tail-index estimation, closed-form predicted
//! indices for covered base/g1 pairs, survival-ratio divergence curves, and a
//! constructive transform that matches a heavier target's right tail.

use crate::base::BaseDistribution;
use crate::transform::{GFamily, TransformSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Summary of a tail diagnostic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub hill_estimate: f64,
    pub k_used: usize,
    pub predicted_index: Option<f64>,
    pub ratio_curve: Vec<(f64, f64)>,
}

/// Right-tail regime of a base distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TailClass {
    /// Survival decays like `x^rho` with `rho < 0`.
    RegularlyVarying { rho: f64 },
    /// Survival decays faster than any power (Gaussian, exponential).
    RapidlyDecaying,
    Unknown,
}

/// Pointwise survival ratio `heavy(x) / light((x - mu)/sigma)`; `truncated`
/// is set when the light survival underflowed before the grid ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub points: Vec<(f64, f64)>,
    pub truncated: bool,
}

/// Hill estimate of the right-tail index from the `k` largest observations:
/// `1 / mean(ln(X_(i) / X_(k+1)))` over the top-k order statistics.
pub fn hill_estimator(samples: &[f64], k: usize) -> Result<f64> {
    if k < 10 {
        return Err(Error::Domain(format!("hill k must be at least 10, got {k}")));
    }
    if 2 * k >= samples.len() {
        return Err(Error::Domain(format!(
            "hill k must stay below half the sample size, got k = {k} with n = {}",
            samples.len()
        )));
    }
    let mut work = samples.to_vec();
    let split = work.len() - k - 1;
    let (_, pivot, top) = work.select_nth_unstable_by(split, f64::total_cmp);
    let x_next = *pivot;
    if !x_next.is_finite() || top.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "non-finite values among the top-k order statistics".into(),
        ));
    }
    if !(x_next > 0.0) {
        return Err(Error::Domain(format!(
            "hill needs strictly positive top-k order statistics; X_(k+1) = {x_next}"
        )));
    }
    let mean_log = top.iter().map(|&x| (x / x_next).ln()).sum::<f64>() / k as f64;
    if !(mean_log > 0.0) {
        return Err(Error::Numerical(format!(
            "top-{k} order statistics are all {x_next}; tail index undefined"
        )));
    }
    Ok(1.0 / mean_log)
}

/// Default order-statistic count: `floor(sqrt(n))`.
pub fn hill_default_k(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

/// Hill estimates across `k = n^0.4, n^0.5, n^0.6` as a stability check
/// (k-sensitivity is the estimator's known failure mode).
pub fn hill_profile(samples: &[f64]) -> Result<Vec<(usize, f64)>> {
    let n = samples.len() as f64;
    [0.4, 0.5, 0.6]
        .iter()
        .map(|&e| {
            // nudge before flooring so exact powers are not lost to rounding
            let k = (n.powf(e) + 1e-9).floor() as usize;
            Ok((k, hill_estimator(samples, k)?))
        })
        .collect()
}

/// Closed-form tail index of the transformed distribution where one is known:
///
/// * Student t base with dof `nu` and `g1 = I{x>0} x^u / a` gives `nu/(1+u)`;
/// * exponential base with `g1 = (e^{ux}-1)/x`, `u > 0`, gives `1/u`.
///
/// Every other pair (for instance `PgmlUp` over a Gaussian, whose tail is
/// heavier than Gaussian but carries no fixed polynomial index) returns `None`.
pub fn predicted_index(base: &BaseDistribution, g1: &GFamily) -> Option<f64> {
    match (base, g1) {
        (BaseDistribution::StudentT { dof }, GFamily::IndicatorPower { u, .. }) => {
            Some(dof / (1.0 + u))
        }
        (BaseDistribution::Exponential, GFamily::ExpM1OverX { u }) if *u > 0.0 => Some(1.0 / u),
        _ => None,
    }
}

/// Tail regime of a base distribution: Student t is regularly varying with
/// exponent `-dof`; the Gaussian and exponential decay rapidly.
pub fn classify_base(base: &BaseDistribution) -> TailClass {
    match *base {
        BaseDistribution::StudentT { dof } => TailClass::RegularlyVarying { rho: -dof },
        BaseDistribution::Gaussian | BaseDistribution::Exponential => TailClass::RapidlyDecaying,
    }
}

/// Evaluates `heavy(x) / light((x - mu)/sigma)` along `xs` (strictly
/// increasing). The curve stops early with `truncated = true` when the light
/// survival underflows to zero or the ratio leaves the representable range.
pub fn survival_ratio_curve(
    heavy: impl Fn(f64) -> f64,
    light: impl Fn(f64) -> f64,
    mu: f64,
    sigma: f64,
    xs: &[f64],
) -> Result<RatioCurve> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if xs.is_empty() {
        return Err(Error::Domain("ratio grid is empty".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("ratio grid must be strictly increasing".into()));
    }
    let mut curve = RatioCurve {
        points: Vec::with_capacity(xs.len()),
        truncated: false,
    };
    for &x in xs {
        let denom = light((x - mu) / sigma);
        if !(denom > 0.0) {
            curve.truncated = true;
            break;
        }
        let ratio = heavy(x) / denom;
        if !ratio.is_finite() {
            curve.truncated = true;
            break;
        }
        curve.points.push((x, ratio));
    }
    Ok(curve)
}

/// CSV rendering of a ratio curve.
pub fn ratio_csv(curve: &RatioCurve) -> String {
    let mut out = String::from("x,ratio\n");
    for &(x, ratio) in &curve.points {
        out.push_str(&format!("{x},{ratio}\n"));
    }
    out
}

/// Builds a transform whose generated distribution (over base `f1`) matches
/// the right-tail heaviness of the target with quantile function
/// `f2_quantile`: `g1(x) = F2^-1(F1(x))/x - 1` beyond the splice point,
/// eased to zero with a monotone cubic over `[splice - 1, splice]`, and
/// `g2 = 0`. The g1 values are tabulated out to the base's `1 - 1e-7`
/// quantile (linear extension past that), so survival ratios against the
/// target approach 1 on any diagnostic grid inside that range.
///
/// The construction requires `F2^-1(F1(x))/x` to be nondecreasing and at
/// least 1 from the splice point on; violations are reported with the
/// offending `x`.
pub fn match_tail_transform(
    f1: BaseDistribution,
    f2_quantile: impl Fn(f64) -> Result<f64>,
    splice: f64,
) -> Result<TransformSpec> {
    if !(splice > 0.0) || !splice.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "splice point must be positive and finite, got {splice}"
        )));
    }
    let x_max = f1.quantile(1.0 - 1e-7)?.max(splice + 1.0);
    let steps = 200usize;
    let dx = (x_max - splice) / steps as f64;
    let mut quantile_ratio = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let x = splice + i as f64 * dx;
        let alpha = f1.cdf(x);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Numerical(format!(
                "base cdf saturates at x = {x} on the diagnostic grid"
            )));
        }
        let y = f2_quantile(alpha)?;
        if !y.is_finite() {
            return Err(Error::Numerical(format!(
                "target quantile is not finite at level {alpha}"
            )));
        }
        quantile_ratio.push((x, y / x));
    }
    for w in quantile_ratio.windows(2) {
        let ((_, r0), (x1, r1)) = (w[0], w[1]);
        // tolerate root-finding noise, reject genuine decreases with a witness
        if r1 < r0 - 1e-9 * r0.abs().max(1.0) {
            return Err(Error::InvalidSpec(format!(
                "F2^-1(F1(x))/x decreases from {r0} to {r1} at x = {x1}; the \
                 tail-matching construction needs it nondecreasing past the splice"
            )));
        }
    }
    let g_splice = quantile_ratio[0].1 - 1.0;
    if g_splice < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "F2^-1(F1(x))/x = {} sits below 1 at x = {splice}; raise the splice point",
            quantile_ratio[0].1
        )));
    }

    let mut xs = Vec::with_capacity(quantile_ratio.len() + 8);
    let mut values = Vec::with_capacity(quantile_ratio.len() + 8);
    // monotone cubic ease-in from (splice - 1, 0) up to (splice, g1(splice))
    let blend_steps = 8;
    for i in 0..blend_steps {
        let t = i as f64 / blend_steps as f64;
        xs.push(splice - 1.0 + t);
        values.push(g_splice * t * t * (3.0 - 2.0 * t));
    }
    for &(x, r) in &quantile_ratio {
        let clamped = (r - 1.0).max(*values.last().expect("blend knots exist"));
        xs.push(x);
        values.push(clamped);
    }
    let g1 = GFamily::monotone_table(xs, values)?;
    TransformSpec::new(0.0, 1.0, g1, GFamily::Zero)
}
