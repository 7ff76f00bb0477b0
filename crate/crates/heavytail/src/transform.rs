//! The monotone transform `f(x) = mu + sigma * x * (g1(x) + g2(x) + 1)` and the
//! built-in g-families.
//!
//! `g1` shapes the right tail and `g2` the left; both must be nonnegative,
//! nondecreasing, and vanish at -infinity (g1) so the transform inflates tails
//! without disturbing the bulk. Strict monotonicity of `f` holds whenever each
//! side satisfies `g(x) + x g'(x) > -1/2` for `x != 0`; for the built-in
//! families that condition has a closed-form certificate.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// |exponent| bound before exp/powf would leave the f64 range.
const EXPONENT_LIMIT: f64 = 700.0;

/// One side of the transform. Parameters:
///
/// * `PgmlUp { u, a }` — `u^x / a`, `u >= 1`, `a > 0`; exponential right lift.
/// * `PgmlDown { v, a }` — `v^-x / a`, `v >= 1`, `a > 0`; exponential left lift.
/// * `ExpM1OverX { u }` — `(e^{ux} - 1)/x`, `u >= 0`; right lift over
///   exponential bases.
/// * `IndicatorPower { u, a }` — `1{x>=0} x^u / a`, `u >= 1`, `a > 0`;
///   polynomial right lift (at `u = 1` the slope jumps at 0, but `f` itself
///   stays differentiable there).
/// * `Zero` — identically zero side.
/// * `MonotoneTable` — monotone C1 interpolation of tabulated values, produced
///   by tail matching; zero left of the first knot, linear right of the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum GFamily {
    PgmlUp { u: f64, a: f64 },
    PgmlDown { v: f64, a: f64 },
    ExpM1OverX { u: f64 },
    IndicatorPower { u: f64, a: f64 },
    Zero,
    MonotoneTable { xs: Vec<f64>, values: Vec<f64> },
}

/// Anything with a value and a slope that can play the role of one g side.
pub trait GFunction {
    fn value(&self, x: f64) -> Result<f64>;
    fn slope(&self, x: f64) -> Result<f64>;
}

impl GFunction for GFamily {
    fn value(&self, x: f64) -> Result<f64> {
        GFamily::value(self, x)
    }
    fn slope(&self, x: f64) -> Result<f64> {
        GFamily::slope(self, x)
    }
}

impl GFamily {
    pub fn pgml_up(u: f64, a: f64) -> Result<Self> {
        let g = Self::PgmlUp { u, a };
        g.check_params()?;
        Ok(g)
    }

    pub fn pgml_down(v: f64, a: f64) -> Result<Self> {
        let g = Self::PgmlDown { v, a };
        g.check_params()?;
        Ok(g)
    }

    pub fn expm1_over_x(u: f64) -> Result<Self> {
        let g = Self::ExpM1OverX { u };
        g.check_params()?;
        Ok(g)
    }

    pub fn indicator_power(u: f64, a: f64) -> Result<Self> {
        let g = Self::IndicatorPower { u, a };
        g.check_params()?;
        Ok(g)
    }

    /// Table of `(x, g(x))` knots: `xs` strictly increasing, `values`
    /// nondecreasing and starting at exactly 0 so the side vanishes leftward.
    pub fn monotone_table(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let g = Self::MonotoneTable { xs, values };
        g.check_params()?;
        Ok(g)
    }

    /// Parameter-domain validation (also applied to deserialized specs).
    pub fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            Self::PgmlUp { u, a } => {
                if !(u.is_finite() && *u >= 1.0) {
                    return bad(format!("pgml_up requires u >= 1, got {u}"));
                }
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("pgml_up requires a > 0, got {a}"));
                }
            }
            Self::PgmlDown { v, a } => {
                if !(v.is_finite() && *v >= 1.0) {
                    return bad(format!("pgml_down requires v >= 1, got {v}"));
                }
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("pgml_down requires a > 0, got {a}"));
                }
            }
            Self::ExpM1OverX { u } => {
                if !(u.is_finite() && *u >= 0.0) {
                    return bad(format!("expm1_over_x requires u >= 0, got {u}"));
                }
            }
            Self::IndicatorPower { u, a } => {
                if !(u.is_finite() && *u >= 1.0) {
                    return bad(format!("indicator_power requires u >= 1, got {u}"));
                }
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("indicator_power requires a > 0, got {a}"));
                }
            }
            Self::Zero => {}
            Self::MonotoneTable { xs, values } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    return bad(format!(
                        "monotone_table needs >= 2 knots with matching lengths, got {} and {}",
                        xs.len(),
                        values.len()
                    ));
                }
                if !xs.iter().all(|x| x.is_finite()) || !values.iter().all(|v| v.is_finite()) {
                    return bad("monotone_table knots must be finite".into());
                }
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("monotone_table xs must be strictly increasing".into());
                }
                if values.windows(2).any(|w| w[0] > w[1]) {
                    return bad("monotone_table values must be nondecreasing".into());
                }
                if values[0] != 0.0 {
                    return bad(format!(
                        "monotone_table must start at value 0, got {}",
                        values[0]
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of fittable parameters (the per-family normalizer `a` is a
    /// construction constant, not a fit parameter).
    pub fn free_params(&self) -> usize {
        match self {
            Self::PgmlUp { .. }
            | Self::PgmlDown { .. }
            | Self::ExpM1OverX { .. }
            | Self::IndicatorPower { .. } => 1,
            Self::Zero | Self::MonotoneTable { .. } => 0,
        }
    }

    /// Name of the free parameter, when there is one.
    pub fn free_param_name(&self) -> Option<&'static str> {
        match self {
            Self::PgmlUp { .. } | Self::ExpM1OverX { .. } | Self::IndicatorPower { .. } => {
                Some("u")
            }
            Self::PgmlDown { .. } => Some("v"),
            Self::Zero | Self::MonotoneTable { .. } => None,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        match self {
            Self::PgmlUp { u, a } => {
                let e = x * u.ln();
                check_exponent(e, x)?;
                Ok(e.exp() / a)
            }
            Self::PgmlDown { v, a } => {
                let e = -x * v.ln();
                check_exponent(e, x)?;
                Ok(e.exp() / a)
            }
            Self::ExpM1OverX { u } => {
                let t = u * x;
                check_exponent(t, x)?;
                if t.abs() < 1e-4 {
                    // (e^{ux}-1)/x = u (1 + t/2 + t^2/6 + ...)
                    Ok(u * (1.0 + t / 2.0 + t * t / 6.0))
                } else {
                    Ok(t.exp_m1() / x)
                }
            }
            Self::IndicatorPower { u, a } => {
                if x <= 0.0 {
                    Ok(0.0)
                } else {
                    let e = u * x.ln();
                    check_exponent(e, x)?;
                    Ok(e.exp() / a)
                }
            }
            Self::Zero => Ok(0.0),
            Self::MonotoneTable { xs, values } => Ok(table_eval(xs, values, x).0),
        }
    }

    pub fn slope(&self, x: f64) -> Result<f64> {
        match self {
            Self::PgmlUp { u, a } => {
                let e = x * u.ln();
                check_exponent(e, x)?;
                Ok(u.ln() * e.exp() / a)
            }
            Self::PgmlDown { v, a } => {
                let e = -x * v.ln();
                check_exponent(e, x)?;
                Ok(-v.ln() * e.exp() / a)
            }
            Self::ExpM1OverX { u } => {
                let t = u * x;
                check_exponent(t, x)?;
                if t.abs() < 1e-4 {
                    // g'(x) = u^2 (1/2 + t/3 + t^2/8 + ...)
                    Ok(u * u * (0.5 + t / 3.0 + t * t / 8.0))
                } else {
                    let e = t.exp_m1();
                    Ok((t * e + t - e) / (x * x))
                }
            }
            Self::IndicatorPower { u, a } => {
                if x <= 0.0 {
                    Ok(0.0)
                } else {
                    let e = (u - 1.0) * x.ln();
                    check_exponent(e, x)?;
                    Ok(u * e.exp() / a)
                }
            }
            Self::Zero => Ok(0.0),
            Self::MonotoneTable { xs, values } => Ok(table_eval(xs, values, x).1),
        }
    }

    /// Partial derivative of g(x) with respect to the free parameter.
    pub fn param_partial(&self, x: f64) -> Result<f64> {
        match self {
            Self::PgmlUp { u, a } => {
                // d/du u^x / a = x u^{x-1} / a
                let e = (x - 1.0) * u.ln();
                check_exponent(e, x)?;
                Ok(x * e.exp() / a)
            }
            Self::PgmlDown { v, a } => {
                let e = (-x - 1.0) * v.ln();
                check_exponent(e, x)?;
                Ok(-x * e.exp() / a)
            }
            Self::ExpM1OverX { u } => {
                let t = u * x;
                check_exponent(t, x)?;
                Ok(t.exp())
            }
            Self::IndicatorPower { u, a } => {
                if x <= 0.0 {
                    Ok(0.0)
                } else {
                    let e = u * x.ln();
                    check_exponent(e, x)?;
                    Ok(e.exp() * x.ln() / a)
                }
            }
            Self::Zero | Self::MonotoneTable { .. } => Err(Error::Unsupported(
                "family has no free parameter to differentiate".into(),
            )),
        }
    }

    /// Closed-form infimum of `g(x) + x g'(x)` over the real line, when known.
    /// `None` means the condition must be checked numerically.
    pub fn condition_min(&self) -> Option<f64> {
        match self {
            Self::PgmlUp { u, a } => {
                if *u == 1.0 {
                    Some(1.0 / a) // constant side: h = 1/a everywhere
                } else {
                    // h = u^x (1 + x ln u)/a is minimized at x = -2/ln u
                    Some(-(-2f64).exp() / a)
                }
            }
            Self::PgmlDown { v, a } => {
                if *v == 1.0 {
                    Some(1.0 / a)
                } else {
                    Some(-(-2f64).exp() / a)
                }
            }
            // h = d/dx (e^{ux} - 1) = u e^{ux} >= 0, infimum 0 at -infinity
            Self::ExpM1OverX { .. } => Some(0.0),
            // h = (1+u) x^u / a on x >= 0, zero elsewhere
            Self::IndicatorPower { .. } => Some(0.0),
            Self::Zero => Some(0.0),
            Self::MonotoneTable { .. } => None,
        }
    }

    /// Location of the closed-form minimizer when the certificate can fail.
    fn condition_argmin(&self) -> Option<f64> {
        match self {
            Self::PgmlUp { u, .. } if *u > 1.0 => Some(-2.0 / u.ln()),
            Self::PgmlDown { v, .. } if *v > 1.0 => Some(2.0 / v.ln()),
            _ => None,
        }
    }
}

fn check_exponent(e: f64, x: f64) -> Result<()> {
    if e.abs() > EXPONENT_LIMIT {
        Err(Error::ExponentOverflow { x, exponent: e })
    } else {
        Ok(())
    }
}

/// Monotone cubic (Fritsch-Carlson) value and slope at `x`; constant left of
/// the table, linear with the end slope right of it. Knot slopes are derived
/// locally from neighboring secants, so evaluation needs no precomputed state.
fn table_eval(xs: &[f64], values: &[f64], x: f64) -> (f64, f64) {
    let m = xs.len() - 1;
    if x <= xs[0] {
        return (values[0], 0.0);
    }
    if x >= xs[m] {
        let d = knot_slope(xs, values, m);
        return (values[m] + d * (x - xs[m]), d);
    }
    let j = xs.partition_point(|&k| k <= x) - 1;
    let (x0, x1) = (xs[j], xs[j + 1]);
    let (y0, y1) = (values[j], values[j + 1]);
    let h = x1 - x0;
    let (d0, d1) = (knot_slope(xs, values, j), knot_slope(xs, values, j + 1));
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let val = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + h * d0 * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + h * d1 * (t3 - t2);
    let slope = (y0 * (6.0 * t2 - 6.0 * t)
        + h * d0 * (3.0 * t2 - 4.0 * t + 1.0)
        + y1 * (-6.0 * t2 + 6.0 * t)
        + h * d1 * (3.0 * t2 - 2.0 * t))
        / h;
    (val, slope)
}

/// Fritsch-Carlson slope at knot `i` for nondecreasing data: a weighted
/// harmonic mean of neighboring secants (zero when either secant is zero),
/// which keeps the interpolant monotone.
fn knot_slope(xs: &[f64], values: &[f64], i: usize) -> f64 {
    let m = xs.len() - 1;
    let secant = |j: usize| (values[j + 1] - values[j]) / (xs[j + 1] - xs[j]);
    if i == 0 {
        let s0 = secant(0);
        if m == 1 {
            return s0;
        }
        let (h0, h1) = (xs[1] - xs[0], xs[2] - xs[1]);
        let d = ((2.0 * h0 + h1) * s0 - h0 * secant(1)) / (h0 + h1);
        return clamp_end_slope(d, s0);
    }
    if i == m {
        let sl = secant(m - 1);
        if m == 1 {
            return sl;
        }
        let (h0, h1) = (xs[m - 1] - xs[m - 2], xs[m] - xs[m - 1]);
        let d = ((2.0 * h1 + h0) * sl - h1 * secant(m - 2)) / (h0 + h1);
        return clamp_end_slope(d, sl);
    }
    let (s0, s1) = (secant(i - 1), secant(i));
    if s0 <= 0.0 || s1 <= 0.0 {
        return 0.0;
    }
    let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
    (w0 + w1) / (w0 / s0 + w1 / s1)
}

fn clamp_end_slope(d: f64, s: f64) -> f64 {
    if d * s <= 0.0 {
        0.0
    } else if d.abs() > 3.0 * s.abs() {
        3.0 * s
    } else {
        d
    }
}

/// Scan `g(x) + x g'(x)` over a grid and return the first point at or below
/// -1/2 along with the value there. `x = 0` entries are skipped (the condition
/// only applies away from zero).
pub fn monotonicity_witness<G: GFunction + ?Sized>(
    g: &G,
    xs: &[f64],
) -> Result<Option<(f64, f64)>> {
    for &x in xs {
        if x == 0.0 {
            continue;
        }
        let h = g.value(x)? + x * g.slope(x)?;
        if h <= -0.5 {
            return Ok(Some((x, h)));
        }
    }
    Ok(None)
}

/// Outcome of transform validation: per-side condition infima plus a witness
/// when the monotonicity condition fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub g1_condition_min: f64,
    pub g2_condition_min: f64,
    pub witness: Option<f64>,
}

/// The full transform `f(x) = mu + sigma * x * (g1(x) + g2(x) + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub mu: f64,
    pub sigma: f64,
    pub g1: GFamily,
    pub g2: GFamily,
}

impl TransformSpec {
    pub fn new(mu: f64, sigma: f64, g1: GFamily, g2: GFamily) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidSpec(format!("mu must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        g1.check_params()?;
        g2.check_params()?;
        Ok(Self { mu, sigma, g1, g2 })
    }

    /// The two-sided exponential model: `g1 = u^x/a`, `g2 = v^-x/a`.
    /// `u = v = 1` degenerates to the linear map `mu + sigma(2/a + 1) x`.
    pub fn pgml(mu: f64, sigma: f64, u: f64, v: f64, a: f64) -> Result<Self> {
        Self::new(mu, sigma, GFamily::pgml_up(u, a)?, GFamily::pgml_down(v, a)?)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let g1 = self.g1.value(x)?;
        let g2 = self.g2.value(x)?;
        Ok(self.mu + self.sigma * x * (g1 + g2 + 1.0))
    }

    /// `f` with overflow saturated to +/- infinity; used for bracketing.
    pub(crate) fn eval_extended(&self, x: f64) -> f64 {
        let g1 = self.g1.value(x).unwrap_or(f64::INFINITY);
        let g2 = self.g2.value(x).unwrap_or(f64::INFINITY);
        self.mu + self.sigma * x * (g1 + g2 + 1.0)
    }

    /// Derivative `f'(x) = sigma (g1 + g2 + 1) + sigma x (g1' + g2')`; at zero
    /// the x-weighted term drops out exactly.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        let g1 = self.g1.value(x)?;
        let g2 = self.g2.value(x)?;
        let base = self.sigma * (g1 + g2 + 1.0);
        if x == 0.0 {
            return Ok(base);
        }
        Ok(base + self.sigma * x * (self.g1.slope(x)? + self.g2.slope(x)?))
    }

    /// Monotonicity validation. `Err` indicates malformed parameters; an `Ok`
    /// report carries pass/fail plus a violating x when failing.
    pub fn validate(&self) -> Result<ValidationReport> {
        if !self.mu.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        self.g1.check_params()?;
        self.g2.check_params()?;
        let (m1, w1) = side_condition(&self.g1)?;
        let (m2, w2) = side_condition(&self.g2)?;
        let witness = w1.or(w2);
        Ok(ValidationReport {
            pass: witness.is_none(),
            g1_condition_min: m1,
            g2_condition_min: m2,
            witness,
        })
    }

    /// Invert the (validated, strictly increasing) transform at finite `y`:
    /// geometric bracket expansion from the linear-backbone guess, bisection to
    /// width 1e-13, then two Newton polish steps.
    pub fn invert(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("invert requires finite y, got {y}")));
        }
        let guess = ((y - self.mu) / self.sigma).clamp(-1e8, 1e8);
        let f0 = self.eval_extended(guess);
        if f0 == y {
            return Ok(guess);
        }
        // expand away from the guess until f brackets y
        let mut step = 1.0f64.max(guess.abs() * 0.5);
        let (mut lo, mut hi);
        if f0 < y {
            lo = guess;
            hi = guess + step;
            let mut tries = 0;
            while self.eval_extended(hi) < y {
                lo = hi;
                step *= 2.0;
                hi = lo + step;
                tries += 1;
                if tries > 200 {
                    return Err(Error::Numerical(format!(
                        "could not bracket inverse at y = {y}"
                    )));
                }
            }
        } else {
            hi = guess;
            lo = guess - step;
            let mut tries = 0;
            while self.eval_extended(lo) > y {
                hi = lo;
                step *= 2.0;
                lo = hi - step;
                tries += 1;
                if tries > 200 {
                    return Err(Error::Numerical(format!(
                        "could not bracket inverse at y = {y}"
                    )));
                }
            }
        }
        // bisect
        for _ in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // interval below fp resolution
            }
            if self.eval_extended(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        // two Newton polish steps, kept inside the bracket
        for _ in 0..2 {
            let (fx, dfx) = match (self.eval(x), self.deriv(x)) {
                (Ok(f), Ok(d)) => (f, d),
                _ => break,
            };
            if !(dfx.is_finite() && dfx > 0.0) {
                break;
            }
            let next = x - (fx - y) / dfx;
            if next.is_finite() && next >= lo && next <= hi {
                x = next;
            } else {
                break;
            }
        }
        Ok(x)
    }

    /// Names of the fittable parameters, in gradient order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["mu".to_string(), "sigma".to_string()];
        if let Some(n) = self.g1.free_param_name() {
            names.push(format!("g1.{n}"));
        }
        if let Some(n) = self.g2.free_param_name() {
            names.push(format!("g2.{n}"));
        }
        names
    }

    /// Gradient of `f(x)` with respect to `[mu, sigma, g1 param, g2 param]`
    /// (family entries present only when the side has a free parameter).
    pub fn param_gradient(&self, x: f64) -> Result<Vec<f64>> {
        let g1 = self.g1.value(x)?;
        let g2 = self.g2.value(x)?;
        let mut grad = vec![1.0, x * (g1 + g2 + 1.0)];
        if self.g1.free_params() == 1 {
            grad.push(self.sigma * x * self.g1.param_partial(x)?);
        }
        if self.g2.free_params() == 1 {
            grad.push(self.sigma * x * self.g2.param_partial(x)?);
        }
        Ok(grad)
    }
}

/// Infimum of the side condition plus a witness if it reaches -1/2.
fn side_condition(g: &GFamily) -> Result<(f64, Option<f64>)> {
    if let Some(min) = g.condition_min() {
        if min > -0.5 {
            return Ok((min, None));
        }
        // closed-form families expose the minimizer directly
        return Ok((min, g.condition_argmin()));
    }
    // tabulated side: scan knots, midpoints, and the linear extension
    let GFamily::MonotoneTable { xs, .. } = g else {
        unreachable!("only tables lack closed-form certificates");
    };
    let mut grid = Vec::with_capacity(2 * xs.len() + 8);
    for w in xs.windows(2) {
        grid.push(w[0]);
        grid.push(0.5 * (w[0] + w[1]));
    }
    let last = *xs.last().expect("table has knots");
    let span = last - xs[0];
    grid.push(last);
    for k in 1..=4 {
        grid.push(last + span * k as f64 / 2.0);
    }
    let mut min = f64::INFINITY;
    let mut witness = None;
    for &x in &grid {
        if x == 0.0 {
            continue;
        }
        let h = g.value(x)? + x * g.slope(x)?;
        if h < min {
            min = h;
        }
        if h <= -0.5 && witness.is_none() {
            witness = Some(x);
        }
    }
    Ok((min, witness))
}
