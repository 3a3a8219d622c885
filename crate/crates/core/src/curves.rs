//! Supply curves: the distribution of the highest competing bid for an item.
//!
//! A curve `W` is a continuous, strictly increasing function on `[0, x_bar]`
//! with `W(x) = 0` for `x <= 0`. Normalized curves are CDFs; limit-order-book
//! depth curves may carry any total mass.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("invalid curve parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(
        "breakpoints must start at the origin and increase strictly in both coordinates (offending index {index})"
    )]
    NonMonotoneBreakpoints { index: usize },
    #[error("need at least {needed} distinct samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("curve is not differentiable at breakpoint x = {x} (right derivative {right_derivative})")]
    UndifferentiableAtBreakpoint { x: f64, right_derivative: f64 },
    #[error("sampling needs a normalized curve, total mass is {mass}")]
    NotNormalized { mass: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveFamily {
    /// `W(x) = 1 - exp(-rate x)`.
    Exponential { rate: f64 },
    /// `W(x) = x / (scale + x)`. Heavy tailed: the mean bid is infinite.
    Hyperbolic { scale: f64 },
    /// Unnormalized depth with density `w0 p^exponent` up to `cap`.
    PowerLawDensity { w0: f64, exponent: f64, cap: f64 },
    /// Uniform on `[0, x_bar]`.
    BoundedUniform { x_bar: f64 },
    /// Piecewise linear through `(x_k, W_k)`, starting at `(0, 0)`.
    Empirical { breakpoints: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct SupplyCurve {
    family: CurveFamily,
    x_bar: f64,
    p_bar: f64,
    mass: f64,
}

/// Outcome of [`alpha_concavity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Concavity {
    Concave,
    /// Concavity fails on the grid near `witness`.
    NotConcave {
        witness: f64,
    },
}

impl Concavity {
    pub fn is_concave(&self) -> bool {
        matches!(self, Concavity::Concave)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, CurveError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CurveError::InvalidParameter { name, value })
    }
}

// e^{-y} - 1 + y without cancellation for small y
fn exp_remainder2(y: f64) -> f64 {
    if y.abs() < 0.5 {
        let mut term = y * y / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() && k < 60.0 {
            sum += term;
            k += 1.0;
            term *= -y / k;
        }
        sum
    } else {
        (-y).exp_m1() + y
    }
}

// 1 - e^{-y}(1 + y)
fn exp_gamma2(y: f64) -> f64 {
    if y < 0.5 {
        let mut sum = 0.0f64;
        let mut pow_fact = y * y / 2.0;
        let mut k = 2.0f64;
        while k < 60.0 {
            let term = pow_fact * (k - 1.0);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            k += 1.0;
            pow_fact *= -y / k;
        }
        sum
    } else {
        -(-y).exp_m1() - y * (-y).exp()
    }
}

// y - ln(1 + y)
fn log_remainder2(y: f64) -> f64 {
    if y.abs() < 0.25 {
        let mut sum = 0.0f64;
        let mut pow = y * y;
        let mut k = 2.0;
        while k < 80.0 {
            let term = pow / k;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            pow *= -y;
            k += 1.0;
        }
        sum
    } else {
        y - y.ln_1p()
    }
}

// ln(1 + y) - y / (1 + y)
fn log_ratio2(y: f64) -> f64 {
    if y.abs() < 0.25 {
        let mut sum = 0.0f64;
        let mut pow = y * y;
        let mut k = 2.0;
        while k < 80.0 {
            let term = pow * (k - 1.0) / k;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            pow *= -y;
            k += 1.0;
        }
        sum
    } else {
        y.ln_1p() - y / (1.0 + y)
    }
}

// q + (1 - q) ln(1 - q), for q in [0, 1]
fn entropy_like(q: f64) -> f64 {
    if q < 0.5 {
        let mut sum = 0.0f64;
        let mut pow = q * q;
        let mut k = 2.0;
        while k < 200.0 {
            let term = pow / (k * (k - 1.0));
            sum += term;
            if term <= 1e-18 * sum {
                break;
            }
            pow *= q;
            k += 1.0;
        }
        sum
    } else if q >= 1.0 {
        1.0
    } else {
        q + (1.0 - q) * (-q).ln_1p()
    }
}

impl SupplyCurve {
    fn build(family: CurveFamily) -> Self {
        let (x_bar, mass) = match &family {
            CurveFamily::Exponential { .. } | CurveFamily::Hyperbolic { .. } => (f64::INFINITY, 1.0),
            CurveFamily::PowerLawDensity { w0, exponent, cap } => {
                (*cap, w0 * cap.powf(exponent + 1.0) / (exponent + 1.0))
            }
            CurveFamily::BoundedUniform { x_bar } => (*x_bar, 1.0),
            CurveFamily::Empirical { breakpoints } => *breakpoints.last().expect("validated"),
        };
        let mut curve = SupplyCurve { family, x_bar, p_bar: 0.0, mass };
        curve.p_bar = curve.first_moment_to(f64::INFINITY);
        curve
    }

    pub fn exponential(rate: f64) -> Result<Self, CurveError> {
        Ok(Self::build(CurveFamily::Exponential { rate: positive("rate", rate)? }))
    }

    pub fn hyperbolic(scale: f64) -> Result<Self, CurveError> {
        Ok(Self::build(CurveFamily::Hyperbolic { scale: positive("scale", scale)? }))
    }

    pub fn bounded_uniform(x_bar: f64) -> Result<Self, CurveError> {
        Ok(Self::build(CurveFamily::BoundedUniform { x_bar: positive("x_bar", x_bar)? }))
    }

    /// Depth density `w0 p^exponent` on `[0, cap]`; `cap` may be infinite.
    pub fn power_law_density(w0: f64, exponent: f64, cap: f64) -> Result<Self, CurveError> {
        let w0 = positive("w0", w0)?;
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(CurveError::InvalidParameter { name: "exponent", value: exponent });
        }
        if !(cap > 0.0) {
            return Err(CurveError::InvalidParameter { name: "cap", value: cap });
        }
        Ok(Self::build(CurveFamily::PowerLawDensity { w0, exponent, cap }))
    }

    /// Linear order-book density `w0 p`, unbounded depth.
    pub fn linear_density(w0: f64) -> Result<Self, CurveError> {
        Self::power_law_density(w0, 1.0, f64::INFINITY)
    }

    /// Piecewise-linear curve. A leading `(0, 0)` is inserted when missing.
    pub fn from_breakpoints(mut points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if points.first().is_none_or(|p| p.0 > 0.0) {
            points.insert(0, (0.0, 0.0));
        }
        if points[0] != (0.0, 0.0) {
            return Err(CurveError::NonMonotoneBreakpoints { index: 0 });
        }
        if points.len() < 2 {
            return Err(CurveError::InsufficientSamples { needed: 2, got: points.len() });
        }
        for k in 1..points.len() {
            let (x0, w0) = points[k - 1];
            let (x1, w1) = points[k];
            if !(x1.is_finite() && w1.is_finite() && x1 > x0 && w1 > w0) {
                return Err(CurveError::NonMonotoneBreakpoints { index: k });
            }
        }
        Ok(Self::build(CurveFamily::Empirical { breakpoints: points }))
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    /// Largest bid with positive density; may be infinite.
    pub fn x_bar(&self) -> f64 {
        self.x_bar
    }

    /// Mean of the competing bid, `∫ u dW`; infinite for heavy tails.
    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    /// `W(x_bar)`: one for probability curves, total depth for order books.
    pub fn total_mass(&self) -> f64 {
        self.mass
    }

    pub fn is_normalized(&self) -> bool {
        (self.mass - 1.0).abs() <= 1e-12
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => -(-rate * x).exp_m1(),
            CurveFamily::Hyperbolic { scale } => {
                if x.is_infinite() {
                    1.0
                } else {
                    x / (scale + x)
                }
            }
            CurveFamily::PowerLawDensity { w0, exponent, cap } => {
                w0 * x.min(*cap).powf(exponent + 1.0) / (exponent + 1.0)
            }
            CurveFamily::BoundedUniform { x_bar } => (x / x_bar).min(1.0),
            CurveFamily::Empirical { breakpoints } => {
                let k = segment(breakpoints, x);
                if k + 1 >= breakpoints.len() {
                    return self.mass;
                }
                let (x0, w0) = breakpoints[k];
                let (x1, w1) = breakpoints[k + 1];
                w0 + (w1 - w0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Extended inverse: `0` for `q <= 0`, `x_bar` at the total mass and
    /// `+inf` above it.
    pub fn inverse(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 0.0;
        }
        if q > self.mass {
            return f64::INFINITY;
        }
        if q == self.mass {
            return self.x_bar;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => -(-q).ln_1p() / rate,
            CurveFamily::Hyperbolic { scale } => scale * q / (1.0 - q),
            CurveFamily::PowerLawDensity { w0, exponent, .. } => {
                ((exponent + 1.0) * q / w0).powf(1.0 / (exponent + 1.0))
            }
            CurveFamily::BoundedUniform { x_bar } => q * x_bar,
            CurveFamily::Empirical { breakpoints } => {
                let k = breakpoints.partition_point(|p| p.1 <= q).saturating_sub(1);
                let (x0, w0) = breakpoints[k];
                let (x1, w1) = breakpoints[(k + 1).min(breakpoints.len() - 1)];
                if w1 <= w0 {
                    return x0;
                }
                x0 + (x1 - x0) * (q - w0) / (w1 - w0)
            }
        }
    }

    /// Right derivative of `W`. Never fails; see [`SupplyCurve::density`] for
    /// the checked version.
    pub fn slope(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.x_bar {
            return 0.0;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => rate * (-rate * x).exp(),
            CurveFamily::Hyperbolic { scale } => scale / ((scale + x) * (scale + x)),
            CurveFamily::PowerLawDensity { w0, exponent, .. } => {
                if *exponent == 0.0 {
                    *w0
                } else {
                    w0 * x.powf(*exponent)
                }
            }
            CurveFamily::BoundedUniform { x_bar } => 1.0 / x_bar,
            CurveFamily::Empirical { breakpoints } => {
                let k = segment(breakpoints, x);
                let (x0, w0) = breakpoints[k];
                let (x1, w1) = breakpoints[k + 1];
                (w1 - w0) / (x1 - x0)
            }
        }
    }

    /// Left derivative of `W`, equal to [`SupplyCurve::slope`] away from kinks.
    pub fn left_slope(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > self.x_bar {
            return 0.0;
        }
        match &self.family {
            CurveFamily::Empirical { breakpoints } => {
                let k = breakpoints.partition_point(|p| p.0 < x) - 1;
                let (x0, w0) = breakpoints[k];
                let (x1, w1) = breakpoints[k + 1];
                (w1 - w0) / (x1 - x0)
            }
            CurveFamily::BoundedUniform { x_bar } => 1.0 / x_bar,
            _ => {
                if x == self.x_bar {
                    // power law at its cap
                    let probe = x * (1.0 - 1e-15);
                    self.slope(probe)
                } else {
                    self.slope(x)
                }
            }
        }
    }

    /// `W'(x)` for `x > 0`. Fails where left and right derivatives differ.
    pub fn density(&self, x: f64) -> Result<f64, CurveError> {
        let right = self.slope(x);
        if x > 0.0 {
            let left = self.left_slope(x);
            if (left - right).abs() > 1e-12 * left.abs().max(right.abs()) {
                return Err(CurveError::UndifferentiableAtBreakpoint { x, right_derivative: right });
            }
        }
        Ok(right)
    }

    /// Right derivative of the density, `W''`.
    pub fn density_slope(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.x_bar {
            return 0.0;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => -rate * rate * (-rate * x).exp(),
            CurveFamily::Hyperbolic { scale } => -2.0 * scale / (scale + x).powi(3),
            CurveFamily::PowerLawDensity { w0, exponent, .. } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    w0 * exponent * x.powf(exponent - 1.0)
                }
            }
            CurveFamily::BoundedUniform { .. } | CurveFamily::Empirical { .. } => 0.0,
        }
    }

    /// `∫_0^x u dW(u)`: expected payment per auction when bidding `x` in a
    /// second-price auction.
    pub fn first_moment_to(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => {
                if x.is_infinite() {
                    1.0 / rate
                } else {
                    exp_gamma2(rate * x) / rate
                }
            }
            CurveFamily::Hyperbolic { scale } => {
                if x.is_infinite() {
                    f64::INFINITY
                } else {
                    scale * log_ratio2(x / scale)
                }
            }
            CurveFamily::PowerLawDensity { w0, exponent, cap } => {
                let y = x.min(*cap);
                if y.is_infinite() {
                    return f64::INFINITY;
                }
                w0 * y.powf(exponent + 2.0) / (exponent + 2.0)
            }
            CurveFamily::BoundedUniform { x_bar } => {
                let y = x.min(*x_bar);
                y * y / (2.0 * x_bar)
            }
            CurveFamily::Empirical { breakpoints } => {
                let mut total = 0.0;
                for pair in breakpoints.windows(2) {
                    let (x0, w0) = pair[0];
                    let (x1, w1) = pair[1];
                    if x <= x0 {
                        break;
                    }
                    let b = x.min(x1);
                    let slope = (w1 - w0) / (x1 - x0);
                    total += slope * (b * b - x0 * x0) / 2.0;
                }
                total
            }
        }
    }

    /// `∫_0^mu W(u) du`.
    pub fn cdf_integral(&self, mu: f64) -> f64 {
        if !(mu > 0.0) {
            return 0.0;
        }
        if mu.is_infinite() {
            return f64::INFINITY;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => exp_remainder2(rate * mu) / rate,
            CurveFamily::Hyperbolic { scale } => scale * log_remainder2(mu / scale),
            CurveFamily::PowerLawDensity { w0, exponent, cap } => {
                let y = mu.min(*cap);
                let inner = w0 * y.powf(exponent + 2.0) / ((exponent + 1.0) * (exponent + 2.0));
                if mu > *cap {
                    inner + self.mass * (mu - cap)
                } else {
                    inner
                }
            }
            CurveFamily::BoundedUniform { x_bar } => {
                if mu <= *x_bar {
                    mu * mu / (2.0 * x_bar)
                } else {
                    0.5 * x_bar + (mu - x_bar)
                }
            }
            CurveFamily::Empirical { breakpoints } => {
                let mut total = 0.0;
                for pair in breakpoints.windows(2) {
                    let (x0, w0) = pair[0];
                    let (x1, w1) = pair[1];
                    if mu <= x0 {
                        break;
                    }
                    let b = mu.min(x1);
                    let wb = w0 + (w1 - w0) * (b - x0) / (x1 - x0);
                    total += 0.5 * (w0 + wb) * (b - x0);
                }
                if mu > self.x_bar {
                    total += self.mass * (mu - self.x_bar);
                }
                total
            }
        }
    }

    /// `∫_0^q W^{-1}(t) dt` for `q` up to the total mass; infinite beyond.
    pub fn quantile_integral(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 0.0;
        }
        if q > self.mass {
            return f64::INFINITY;
        }
        match &self.family {
            CurveFamily::Exponential { rate } => entropy_like(q) / rate,
            CurveFamily::Hyperbolic { scale } => {
                if q >= 1.0 {
                    f64::INFINITY
                } else {
                    scale * log_remainder2(-q)
                }
            }
            CurveFamily::PowerLawDensity { .. } => self.first_moment_to(self.inverse(q)),
            CurveFamily::BoundedUniform { x_bar } => x_bar * q * q / 2.0,
            CurveFamily::Empirical { breakpoints } => {
                let mut total = 0.0;
                for pair in breakpoints.windows(2) {
                    let (x0, w0) = pair[0];
                    let (x1, w1) = pair[1];
                    if q <= w0 {
                        break;
                    }
                    let b = q.min(w1);
                    let xb = x0 + (x1 - x0) * (b - w0) / (w1 - w0);
                    total += 0.5 * (x0 + xb) * (b - w0);
                }
                total
            }
        }
    }

    /// Draws a competing bid `W^{-1}(U)` with `U` uniform on `[0, 1)`.
    pub fn sample_price<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, CurveError> {
        if !self.is_normalized() {
            return Err(CurveError::NotNormalized { mass: self.mass });
        }
        Ok(self.inverse(rng.random::<f64>()))
    }

    /// The price realised by the uniform draw `u`.
    pub fn price_from_uniform(&self, u: f64) -> f64 {
        self.inverse(u * self.mass)
    }
}

// index k with breakpoints[k].0 <= x < breakpoints[k+1].0, clamped
fn segment(points: &[(f64, f64)], x: f64) -> usize {
    let k = points.partition_point(|p| p.0 <= x);
    k.saturating_sub(1).min(points.len() - 1)
}

/// `ell_alpha(w) = ∫_1^w t^{-alpha} dt`.
pub fn ell(alpha: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        w.ln()
    } else {
        (w.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
    }
}

/// Empirical curve from observed clearing prices. Ties collapse to one
/// breakpoint carrying their cumulative count; a price within `min_support`
/// of the previous kept breakpoint is merged into it.
pub fn fit_empirical(prices: &[f64], min_support: f64) -> Result<SupplyCurve, CurveError> {
    if let Some(&bad) = prices.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(CurveError::InvalidParameter { name: "price", value: bad });
    }
    if !(min_support >= 0.0) {
        return Err(CurveError::InvalidParameter { name: "min_support", value: min_support });
    }
    let mut sorted = prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for (idx, &p) in sorted.iter().enumerate() {
        match distinct.last_mut() {
            Some(last) if last.0 == p => last.1 = idx + 1,
            _ => distinct.push((p, idx + 1)),
        }
    }
    if distinct.len() < 2 {
        return Err(CurveError::InsufficientSamples { needed: 2, got: distinct.len() });
    }
    let mut points = vec![(0.0, 0.0)];
    for (value, count) in distinct {
        let w = count as f64 / n;
        let last = *points.last().expect("non-empty");
        if value - last.0 <= min_support || value <= 0.0 {
            if points.len() > 1 {
                points.last_mut().expect("non-empty").1 = w;
            }
            // mass at (or next to) zero is carried by the next kept point
            continue;
        }
        points.push((value, w));
    }
    if points.len() < 2 {
        return Err(CurveError::InsufficientSamples { needed: 2, got: 1 });
    }
    points.last_mut().expect("non-empty").1 = 1.0;
    SupplyCurve::from_breakpoints(points)
}

/// Checks that `ell_alpha ∘ W` is concave on a log-spaced grid covering the
/// bulk of the support.
pub fn alpha_concavity_check(curve: &SupplyCurve, alpha: f64, grid_size: usize) -> Concavity {
    let grid_size = grid_size.max(8);
    let upper = if curve.x_bar().is_finite() {
        curve.x_bar()
    } else if curve.total_mass().is_finite() {
        curve.inverse(0.999 * curve.total_mass())
    } else {
        1.0
    };
    let lower = upper * 1e-6;
    let ratio = (upper / lower).ln() / (grid_size - 1) as f64;
    let mut xs: Vec<f64> = (0..grid_size).map(|k| lower * (ratio * k as f64).exp()).collect();
    xs[grid_size - 1] = upper;
    if let CurveFamily::Empirical { breakpoints } = curve.family() {
        xs.extend(breakpoints.iter().map(|p| p.0).filter(|&x| x > lower && x < upper));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    }
    let hs: Vec<f64> = xs.iter().map(|&x| ell(alpha, curve.eval(x))).collect();
    let slopes: Vec<f64> = (0..xs.len() - 1).map(|k| (hs[k + 1] - hs[k]) / (xs[k + 1] - xs[k])).collect();
    for k in 0..slopes.len().saturating_sub(1) {
        let round = 64.0
            * f64::EPSILON
            * (hs[k].abs() + hs[k + 1].abs() + hs[k + 2].abs())
            * (1.0 / (xs[k + 1] - xs[k]) + 1.0 / (xs[k + 2] - xs[k + 1]));
        let tol = 1e-7 * slopes[k].abs().max(slopes[k + 1].abs()) + round;
        if slopes[k + 1] > slopes[k] + tol {
            return Concavity::NotConcave { witness: xs[k + 1] };
        }
    }
    Concavity::Concave
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum CurveJson {
    Exponential { params: RateParams },
    Hyperbolic { params: ScaleParams },
    PowerLawDensity { params: PowerParams },
    BoundedUniform { params: UniformParams },
    Empirical { breakpoints: Vec<[f64; 2]> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateParams {
    rate: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleParams {
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformParams {
    x_bar: f64,
}

fn default_exponent() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    w0: f64,
    #[serde(default = "default_exponent")]
    exponent: f64,
    /// `null` or absent means unbounded depth.
    #[serde(default)]
    cap: Option<f64>,
}

impl TryFrom<CurveJson> for SupplyCurve {
    type Error = CurveError;

    fn try_from(value: CurveJson) -> Result<Self, Self::Error> {
        match value {
            CurveJson::Exponential { params } => SupplyCurve::exponential(params.rate),
            CurveJson::Hyperbolic { params } => SupplyCurve::hyperbolic(params.scale),
            CurveJson::PowerLawDensity { params } => {
                SupplyCurve::power_law_density(params.w0, params.exponent, params.cap.unwrap_or(f64::INFINITY))
            }
            CurveJson::BoundedUniform { params } => SupplyCurve::bounded_uniform(params.x_bar),
            CurveJson::Empirical { breakpoints } => {
                SupplyCurve::from_breakpoints(breakpoints.into_iter().map(|[x, w]| (x, w)).collect())
            }
        }
    }
}

impl From<SupplyCurve> for CurveJson {
    fn from(curve: SupplyCurve) -> Self {
        match curve.family {
            CurveFamily::Exponential { rate } => CurveJson::Exponential { params: RateParams { rate } },
            CurveFamily::Hyperbolic { scale } => CurveJson::Hyperbolic { params: ScaleParams { scale } },
            CurveFamily::PowerLawDensity { w0, exponent, cap } => {
                CurveJson::PowerLawDensity { params: PowerParams { w0, exponent, cap: cap.is_finite().then_some(cap) } }
            }
            CurveFamily::BoundedUniform { x_bar } => CurveJson::BoundedUniform { params: UniformParams { x_bar } },
            CurveFamily::Empirical { breakpoints } => {
                CurveJson::Empirical { breakpoints: breakpoints.into_iter().map(|(x, w)| [x, w]).collect() }
            }
        }
    }
}
