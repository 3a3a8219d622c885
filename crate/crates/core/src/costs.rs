//! Acquisition costs: the cheapest expected spend rate for winning a given
//! fraction of an item's auctions, and its convex conjugate.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{alpha_concavity_check, Concavity, CurveError, SupplyCurve};
use crate::numerics::{bisect_increasing, integrate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuctionKind {
    FirstPrice,
    SecondPrice,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("first-price bidding needs a 2-concave supply curve; concavity fails near x = {witness}")]
    NotTwoConcave { witness: f64 },
    #[error("pseudo-bid {mu} lies outside the range of the bid mapping (max {max})")]
    OutOfRange { mu: f64, max: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Grid size used when certifying 2-concavity for first-price items.
pub const CONCAVITY_GRID: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionCost {
    curve: SupplyCurve,
    kind: AuctionKind,
    bid_cap: f64,
}

/// Monte Carlo check of `E[(x - xi)+] = Λ*_2nd(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPoolCheck {
    pub monte_carlo: f64,
    pub std_error: f64,
    pub closed_form: f64,
    pub residual: f64,
}

impl AcquisitionCost {
    /// First-price costs require `W` to be 2-concave so that the bid
    /// mapping is increasing.
    pub fn new(curve: SupplyCurve, kind: AuctionKind) -> Result<Self, CostError> {
        if kind == AuctionKind::FirstPrice {
            if let Concavity::NotConcave { witness } = alpha_concavity_check(&curve, 2.0, CONCAVITY_GRID) {
                return Err(CostError::NotTwoConcave { witness });
            }
        }
        let bid_cap = match kind {
            AuctionKind::SecondPrice => curve.x_bar(),
            AuctionKind::FirstPrice => {
                let x_bar = curve.x_bar();
                if x_bar.is_finite() {
                    x_bar + curve.total_mass() / curve.left_slope(x_bar)
                } else {
                    f64::INFINITY
                }
            }
        };
        Ok(AcquisitionCost { curve, kind, bid_cap })
    }

    pub fn second_price(curve: SupplyCurve) -> Self {
        Self::new(curve, AuctionKind::SecondPrice).expect("second price never fails")
    }

    pub fn curve(&self) -> &SupplyCurve {
        &self.curve
    }

    pub fn kind(&self) -> AuctionKind {
        self.kind
    }

    /// `g(x_bar)`: pseudo-bids above this buy the whole supply.
    pub fn bid_cap(&self) -> f64 {
        self.bid_cap
    }

    /// Expected payment per auction when bidding `x`.
    pub fn expected_cost(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match self.kind {
            AuctionKind::SecondPrice => self.curve.first_moment_to(x),
            AuctionKind::FirstPrice => x * self.curve.eval(x),
        }
    }

    /// `Λ(q) = f(W^{-1}(q))`, with `Λ = +inf` above the total mass.
    pub fn lambda(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 0.0;
        }
        if q > self.curve.total_mass() {
            return f64::INFINITY;
        }
        match self.kind {
            AuctionKind::SecondPrice => self.curve.quantile_integral(q),
            AuctionKind::FirstPrice => q * self.curve.inverse(q),
        }
    }

    /// `Λ'(q) = g(W^{-1}(q))`.
    pub fn lambda_slope(&self, q: f64) -> f64 {
        self.bid_mapping(self.curve.inverse(q))
    }

    /// `Λ*(mu) = sup_q (q mu - Λ(q))`; `+inf` for negative `mu`.
    pub fn lambda_conjugate(&self, mu: f64) -> f64 {
        if mu < 0.0 {
            return f64::INFINITY;
        }
        if mu == 0.0 {
            return 0.0;
        }
        match self.kind {
            AuctionKind::SecondPrice => self.curve.cdf_integral(mu),
            AuctionKind::FirstPrice => {
                let mass = self.curve.total_mass();
                if mu >= self.bid_cap {
                    mass * (mu - self.curve.x_bar())
                } else {
                    let x = self.inverse_unchecked(mu);
                    (mu - x) * self.curve.eval(x)
                }
            }
        }
    }

    /// `dΛ*/dmu = W(g^{-1}(mu))`: the win probability at pseudo-bid `mu`.
    pub fn conjugate_slope(&self, mu: f64) -> f64 {
        if !(mu > 0.0) {
            return 0.0;
        }
        if mu >= self.bid_cap {
            return self.curve.total_mass();
        }
        match self.kind {
            AuctionKind::SecondPrice => self.curve.eval(mu),
            AuctionKind::FirstPrice => self.curve.eval(self.inverse_unchecked(mu)),
        }
    }

    /// Right second derivative of `Λ*`.
    pub fn conjugate_curvature(&self, mu: f64) -> f64 {
        if mu < 0.0 || mu >= self.bid_cap {
            return 0.0;
        }
        match self.kind {
            AuctionKind::SecondPrice => self.curve.slope(mu),
            AuctionKind::FirstPrice => {
                let x = self.inverse_unchecked(mu);
                let w = self.curve.eval(x);
                let dw = self.curve.slope(x);
                if dw <= 0.0 {
                    return 0.0;
                }
                let dg = 2.0 - w * self.curve.density_slope(x) / (dw * dw);
                dw / dg
            }
        }
    }

    /// Maps a real bid to its pseudo-bid. The identity for second price,
    /// `x + W(x)/W'(x)` for first price.
    pub fn bid_mapping(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match self.kind {
            AuctionKind::SecondPrice => x,
            AuctionKind::FirstPrice => {
                let x_bar = self.curve.x_bar();
                if x > x_bar {
                    f64::INFINITY
                } else if x == x_bar {
                    self.bid_cap
                } else {
                    x + self.curve.eval(x) / self.curve.slope(x)
                }
            }
        }
    }

    /// The real bid realising pseudo-bid `mu`.
    pub fn bid_mapping_inverse(&self, mu: f64) -> Result<f64, CostError> {
        if mu > self.bid_cap || mu.is_nan() {
            return Err(CostError::OutOfRange { mu, max: self.bid_cap });
        }
        Ok(self.inverse_unchecked(mu))
    }

    /// The bid to place for pseudo-bid `mu`, saturating at `x_bar`.
    pub fn bid_for(&self, mu: f64) -> f64 {
        if mu >= self.bid_cap {
            self.curve.x_bar()
        } else {
            self.inverse_unchecked(mu)
        }
    }

    fn inverse_unchecked(&self, mu: f64) -> f64 {
        if !(mu > 0.0) {
            return 0.0;
        }
        if mu >= self.bid_cap {
            return self.curve.x_bar();
        }
        if self.kind == AuctionKind::SecondPrice {
            return mu;
        }
        use crate::curves::CurveFamily as F;
        match self.curve.family() {
            F::Hyperbolic { scale } => mu / (1.0 + (1.0 + mu / scale).sqrt()),
            F::BoundedUniform { .. } => 0.5 * mu,
            F::PowerLawDensity { exponent, .. } => mu * (exponent + 1.0) / (exponent + 2.0),
            F::Exponential { rate } => {
                // g(x) = x + expm1(rate x)/rate is convex, so Newton from an
                // upper bound decreases monotonically onto the root
                let mut x = mu.min((rate * mu).ln_1p() / rate);
                for _ in 0..100 {
                    let e = (rate * x).exp_m1();
                    let gx = x + e / rate;
                    let step = (gx - mu) / (2.0 + e);
                    x -= step;
                    if step.abs() <= 1e-16 * x.abs() {
                        break;
                    }
                }
                x.max(0.0)
            }
            F::Empirical { .. } => {
                let hi = self.curve.x_bar();
                bisect_increasing(|x| self.bid_mapping(x), mu, 0.0, hi, 1e-16)
            }
        }
    }

    /// Adaptive-Simpson evaluation of `Λ`, for cross-checking.
    pub fn lambda_by_quadrature(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 0.0;
        }
        if q > self.curve.total_mass() {
            return f64::INFINITY;
        }
        match self.kind {
            AuctionKind::SecondPrice => integrate(|t| self.curve.inverse(t), 0.0, q, 1e-10),
            AuctionKind::FirstPrice => q * self.curve.inverse(q),
        }
    }

    /// Adaptive-Simpson evaluation of `Λ*` as the integral of its slope.
    pub fn conjugate_by_quadrature(&self, mu: f64) -> f64 {
        if mu < 0.0 {
            return f64::INFINITY;
        }
        integrate(|t| self.conjugate_slope(t), 0.0, mu, 1e-10)
    }

    /// Adaptive-Simpson evaluation of the expected payment.
    pub fn expected_cost_by_quadrature(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match self.kind {
            AuctionKind::SecondPrice => {
                let top = x.min(self.curve.x_bar());
                integrate(|u| u * self.curve.slope(u), 0.0, top, 1e-10)
            }
            AuctionKind::FirstPrice => x * self.curve.eval(x),
        }
    }
}

/// Compares a Monte Carlo estimate of `E[(x - xi)+]`, `xi ~ W`, against the
/// second-price conjugate at `x`.
pub fn dark_pool_identity_check<R: Rng + ?Sized>(
    curve: &SupplyCurve,
    x: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<DarkPoolCheck, CostError> {
    let n = n_samples.max(2);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let xi = curve.sample_price(rng)?;
        let gain = (x - xi).max(0.0);
        sum += gain;
        sum_sq += gain * gain;
    }
    let mean = sum / n as f64;
    let var = ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0);
    let closed_form = AcquisitionCost::second_price(curve.clone()).lambda_conjugate(x);
    Ok(DarkPoolCheck {
        monte_carlo: mean,
        std_error: (var / n as f64).sqrt(),
        closed_form,
        residual: mean - closed_form,
    })
}
