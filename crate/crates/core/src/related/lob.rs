//! Market orders against a limit order book.
//!
//! The ask side is an unnormalized supply curve `W(p)`: the volume resting
//! at prices up to `p` above the mid. Walking the book for volume `V` costs
//! `Λ(V) = ∫_0^V W^{-1}`.

use std::io::Read;

use thiserror::Error;

use crate::curves::{CurveError, SupplyCurve};

#[derive(Debug, Error)]
pub enum LobError {
    #[error("order for {volume} exceeds book depth {depth}")]
    InsufficientDepth { volume: f64, depth: f64 },
    #[error("bad depth profile: {0}")]
    BadProfile(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LobMarket {
    pub asks: SupplyCurve,
}

impl LobMarket {
    pub fn new(asks: SupplyCurve) -> Self {
        LobMarket { asks }
    }

    /// Reads `offset,density` rows (header required) and integrates the
    /// density by the trapezoid rule.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, LobError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |k: usize| -> Result<f64, LobError> {
                record
                    .get(k)
                    .ok_or_else(|| LobError::BadProfile(format!("row {} has fewer than two fields", rows.len() + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| LobError::BadProfile(e.to_string()))
            };
            rows.push((parse(0)?, parse(1)?));
        }
        Self::from_density(&rows)
    }

    /// Builds the depth curve from sampled `(offset, density)` pairs.
    pub fn from_density(rows: &[(f64, f64)]) -> Result<Self, LobError> {
        if rows.len() < 2 {
            return Err(LobError::BadProfile("need at least two rows".into()));
        }
        if rows.iter().any(|&(p, w)| !(p.is_finite() && p >= 0.0 && w.is_finite() && w >= 0.0)) {
            return Err(LobError::BadProfile("offsets and densities must be finite and nonnegative".into()));
        }
        let mut points = Vec::with_capacity(rows.len());
        let mut cumulative = 0.0;
        let (mut prev_p, mut prev_w) = rows[0];
        if prev_p > 0.0 {
            // no depth below the first quoted offset
            points.push((prev_p, f64::MIN_POSITIVE));
        }
        for &(p, w) in &rows[1..] {
            if p <= prev_p {
                return Err(LobError::BadProfile(format!("offsets must increase, got {p} after {prev_p}")));
            }
            cumulative += 0.5 * (prev_w + w) * (p - prev_p);
            points.push((p, cumulative));
            prev_p = p;
            prev_w = w;
        }
        Ok(LobMarket { asks: SupplyCurve::from_breakpoints(points)? })
    }

    pub fn depth(&self) -> f64 {
        self.asks.total_mass()
    }

    /// Expected cost (above mid) of buying `volume` by walking the book.
    pub fn cost(&self, volume: f64) -> Result<f64, LobError> {
        if volume > self.depth() {
            return Err(LobError::InsufficientDepth { volume, depth: self.depth() });
        }
        Ok(self.asks.quantile_integral(volume))
    }
}

/// Convenience wrapper around [`LobMarket::cost`].
pub fn lob_cost(market: &LobMarket, volume: f64) -> Result<f64, LobError> {
    market.cost(volume)
}
