//! Mean-variance portfolio selection with order-book impact costs.
//!
//! Primal: `min_x ½ λ xᵀΣx + Σ_j [Λ_j(x_j) - α_j x_j]`.
//! Dual, with `Σ = L Lᵀ`: `min_ζ Σ_j Λ*_j(α_j - (Lζ)_j) + |ζ|² / (2λ)`; the
//! optimal values satisfy `P* + h* = 0`. Positions are recovered as
//! `x_j = Λ*_j'(α_j - φ_j)` on order-book assets and `x = Σ^{-1} φ / λ` on
//! free ones, where `φ = Lζ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::curves::SupplyCurve;
use crate::numerics::bisect_increasing;

#[derive(Debug, Clone, PartialEq)]
pub enum AssetCost {
    /// No impact cost.
    Free,
    /// Buying walks the ask side of this book.
    Book(SupplyCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkowitzInstance {
    pub risk_aversion: f64,
    pub covariance: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub costs: Vec<AssetCost>,
    /// Allow selling order-book assets, against a mirror-image bid side.
    pub allow_short: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkowitzSolution {
    pub positions: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkowitzDual {
    pub zeta: Vec<f64>,
    pub phi: Vec<f64>,
    pub positions: Vec<f64>,
    /// `h(ζ)`; at optimum equals minus the primal optimum.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkowitzError {
    #[error("covariance must be symmetric positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("risk aversion must be positive and finite")]
    InvalidRiskAversion,
    #[error("solver did not converge (residual {0})")]
    NotConverged(f64),
}

impl MarkowitzInstance {
    fn validate(&self) -> Result<Cholesky<f64, Dyn>, MarkowitzError> {
        let m = self.alpha.len();
        if self.covariance.nrows() != m || self.covariance.ncols() != m || self.costs.len() != m {
            return Err(MarkowitzError::Dimension(format!(
                "alpha {}, covariance {}x{}, costs {}",
                m,
                self.covariance.nrows(),
                self.covariance.ncols(),
                self.costs.len()
            )));
        }
        if !(self.risk_aversion.is_finite() && self.risk_aversion > 0.0) {
            return Err(MarkowitzError::InvalidRiskAversion);
        }
        if (&self.covariance - self.covariance.transpose()).amax() > 1e-12 * self.covariance.amax().max(1.0) {
            return Err(MarkowitzError::NotPositiveDefinite);
        }
        Cholesky::new(self.covariance.clone()).ok_or(MarkowitzError::NotPositiveDefinite)
    }

    fn bounds(&self, j: usize) -> (f64, f64) {
        match &self.costs[j] {
            AssetCost::Free => (f64::NEG_INFINITY, f64::INFINITY),
            AssetCost::Book(c) => {
                let depth = c.total_mass();
                (if self.allow_short { -depth } else { 0.0 }, depth)
            }
        }
    }

    /// Impact cost of holding `x` units of asset `j`.
    pub fn impact(&self, j: usize, x: f64) -> f64 {
        match &self.costs[j] {
            AssetCost::Free => 0.0,
            AssetCost::Book(c) => {
                if x < 0.0 && !self.allow_short {
                    f64::INFINITY
                } else {
                    c.quantile_integral(x.abs())
                }
            }
        }
    }

    fn impact_slope(&self, j: usize, x: f64) -> f64 {
        match &self.costs[j] {
            AssetCost::Free => 0.0,
            AssetCost::Book(c) => x.signum() * c.inverse(x.abs()),
        }
    }

    fn impact_curvature(&self, j: usize, x: f64) -> f64 {
        match &self.costs[j] {
            AssetCost::Free => 0.0,
            AssetCost::Book(c) => {
                let p = c.inverse(x.abs());
                let w = c.slope(p);
                if w > 0.0 {
                    1.0 / w
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Conjugate of the impact cost of asset `j`, for order-book assets.
    fn impact_conjugate(&self, j: usize, z: f64) -> (f64, f64, f64) {
        match &self.costs[j] {
            AssetCost::Free => (if z == 0.0 { 0.0 } else { f64::INFINITY }, 0.0, 0.0),
            AssetCost::Book(c) => {
                let u = if self.allow_short { z.abs() } else { z.max(0.0) };
                let sign = if self.allow_short { z.signum() } else { 1.0 };
                let value = c.cdf_integral(u);
                let slope = sign * c.eval(u);
                let curv = if u > 0.0 || self.allow_short { c.slope(u) } else { 0.0 };
                (value, slope, curv)
            }
        }
    }

    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let quad = 0.5 * self.risk_aversion * (xv.transpose() * &self.covariance * &xv)[(0, 0)];
        quad + (0..x.len()).map(|j| self.impact(j, x[j]) - self.alpha[j] * x[j]).sum::<f64>()
    }

    /// `h(ζ)`.
    pub fn dual_objective(&self, zeta: &[f64]) -> Result<f64, MarkowitzError> {
        let chol = self.validate()?;
        let l = chol.l();
        let z = DVector::from_column_slice(zeta);
        let phi = &l * &z;
        Ok(self.dual_in_phi(&phi, z.norm_squared()))
    }

    fn dual_in_phi(&self, phi: &DVector<f64>, zeta_sq: f64) -> f64 {
        let mut h = zeta_sq / (2.0 * self.risk_aversion);
        for j in 0..phi.len() {
            h += self.impact_conjugate(j, self.alpha[j] - phi[j]).0;
        }
        h
    }

    fn prox(&self, j: usize, y: f64, t: f64) -> f64 {
        let (lo, hi) = self.bounds(j);
        match &self.costs[j] {
            AssetCost::Free => y,
            AssetCost::Book(c) => {
                if y <= 0.0 && !self.allow_short {
                    return 0.0;
                }
                let sign = y.signum();
                let a = y.abs();
                let depth = if sign > 0.0 { hi } else { -lo };
                // root of t W^{-1}(z) + z = a on (0, min(a, depth)]
                let top = a.min(depth);
                let at_top = t * c.inverse(top) + top;
                let z = if at_top <= a { top } else { bisect_increasing(|z| t * c.inverse(z) + z, a, 0.0, top, 1e-16) };
                sign * z
            }
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.risk_aversion * (&self.covariance * x);
        for j in 0..x.len() {
            g[j] -= self.alpha[j];
        }
        g
    }

    // first-order optimality residual, respecting the box
    fn kkt_residual(&self, x: &DVector<f64>) -> f64 {
        let g = self.gradient(x);
        (0..x.len())
            .map(|j| {
                let (lo, hi) = self.bounds(j);
                let full = g[j] + self.impact_slope(j, x[j]);
                if x[j] <= lo && lo == 0.0 {
                    // at zero the one-sided slope of the impact is zero
                    (g[j]).min(0.0).abs()
                } else if x[j] >= hi {
                    full.max(0.0)
                } else {
                    full.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Accelerated proximal gradient with restarts, then Newton on the
    /// free coordinates.
    pub fn solve_primal(&self, tol: f64) -> Result<MarkowitzSolution, MarkowitzError> {
        self.validate()?;
        let m = self.alpha.len();
        let lipschitz = self.risk_aversion * self.covariance.clone().symmetric_eigenvalues().max();
        let t = 1.0 / lipschitz;
        let mut x = DVector::<f64>::zeros(m);
        let mut y = x.clone();
        let mut momentum = 1.0f64;
        let mut iterations = 0;
        let scale = 1.0 + self.alpha.iter().map(|a| a.abs()).fold(0.0, f64::max);
        for _ in 0..200_000 {
            iterations += 1;
            let g = self.gradient(&y);
            let next = DVector::from_iterator(m, (0..m).map(|j| self.prox(j, y[j] - t * g[j], t)));
            let step = (&next - &x).norm();
            let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let restart = (&y - &next).dot(&(&next - &x)) > 0.0;
            y = if restart { next.clone() } else { &next + (&next - &x) * ((momentum - 1.0) / next_momentum) };
            momentum = if restart { 1.0 } else { next_momentum };
            x = next;
            if step / t <= 1e-3 * tol * scale {
                break;
            }
        }
        self.polish(&mut x, tol * scale);
        let residual = self.kkt_residual(&x);
        if residual > tol * scale {
            return Err(MarkowitzError::NotConverged(residual));
        }
        let positions: Vec<f64> = x.iter().cloned().collect();
        Ok(MarkowitzSolution { objective: self.primal_objective(&positions), positions, iterations })
    }

    fn polish(&self, x: &mut DVector<f64>, tol: f64) {
        let m = x.len();
        for _ in 0..50 {
            if self.kkt_residual(x) <= 1e-3 * tol {
                return;
            }
            let free: Vec<usize> = (0..m)
                .filter(|&j| {
                    let (lo, hi) = self.bounds(j);
                    x[j] > lo && x[j] < hi && !(x[j] == 0.0 && !self.allow_short)
                })
                .collect();
            if free.is_empty() {
                return;
            }
            let g = self.gradient(x);
            let k = free.len();
            let mut h = DMatrix::<f64>::zeros(k, k);
            let mut r = DVector::<f64>::zeros(k);
            for (p, &j) in free.iter().enumerate() {
                r[p] = -(g[j] + self.impact_slope(j, x[j]));
                for (q, &l) in free.iter().enumerate() {
                    h[(p, q)] = self.risk_aversion * self.covariance[(j, l)];
                }
                h[(p, p)] += self.impact_curvature(j, x[j]).min(1e300);
            }
            let Some(chol) = Cholesky::new(h) else { return };
            let d = chol.solve(&r);
            let before = self.primal_objective(x.as_slice());
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let mut trial = x.clone();
                for (p, &j) in free.iter().enumerate() {
                    let (lo, hi) = self.bounds(j);
                    trial[j] = (x[j] + step * d[p]).clamp(lo, hi);
                }
                let after = self.primal_objective(trial.as_slice());
                if after <= before + 1e-14 * before.abs().max(1.0)
                    && self.kkt_residual(&trial) <= self.kkt_residual(x) * 1.5
                {
                    *x = trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                return;
            }
        }
    }

    /// Newton's method on the dual. With free (cost-less) assets the
    /// constraint `φ_F = α_F` is imposed by eliminating those coordinates.
    pub fn solve_dual(&self, tol: f64) -> Result<MarkowitzDual, MarkowitzError> {
        let chol = self.validate()?;
        let m = self.alpha.len();
        let l = chol.l();
        let lam = self.risk_aversion;
        let scale = 1.0 + self.alpha.iter().map(|a| a.abs()).fold(0.0, f64::max);
        let free: Vec<usize> = (0..m).filter(|&j| matches!(self.costs[j], AssetCost::Free)).collect();
        let mut iterations = 0;
        let phi: DVector<f64>;
        let zeta: DVector<f64>;
        if free.is_empty() {
            // Newton in ζ: ∇h = -Lᵀ p + ζ/λ, ∇²h = Lᵀ diag(κ) L + I/λ
            let mut z = DVector::<f64>::zeros(m);
            let eval = |z: &DVector<f64>| -> (f64, DVector<f64>, DMatrix<f64>) {
                let phi = &l * z;
                let mut p = DVector::zeros(m);
                let mut kap = DVector::zeros(m);
                let mut value = z.norm_squared() / (2.0 * lam);
                for j in 0..m {
                    let (v, s, c) = self.impact_conjugate(j, self.alpha[j] - phi[j]);
                    value += v;
                    p[j] = s;
                    kap[j] = c;
                }
                let grad = -(l.transpose() * &p) + z / lam;
                let mut hess = l.transpose() * DMatrix::from_diagonal(&kap) * &l;
                for j in 0..m {
                    hess[(j, j)] += 1.0 / lam;
                }
                (value, grad, hess)
            };
            for _ in 0..200 {
                let (value, grad, hess) = eval(&z);
                if grad.amax() <= 1e-4 * tol * scale {
                    break;
                }
                iterations += 1;
                let d = Cholesky::new(hess).ok_or(MarkowitzError::NotPositiveDefinite)?.solve(&(-&grad));
                let slope = grad.dot(&d);
                let mut t = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let trial = &z + &d * t;
                    if eval(&trial).0 <= value + 1e-4 * t * slope || t < 1e-10 {
                        z = trial;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            phi = &l * &z;
            zeta = z;
        } else {
            let sigma_inv = chol.inverse();
            let book: Vec<usize> = (0..m).filter(|j| !free.contains(j)).collect();
            let mut ph = DVector::<f64>::zeros(m);
            for &j in &free {
                ph[j] = self.alpha[j];
            }
            let eval = |ph: &DVector<f64>| -> (f64, DVector<f64>, DMatrix<f64>) {
                let s = &sigma_inv * ph;
                let mut value = ph.dot(&s) / (2.0 * lam);
                let k = book.len();
                let mut grad = DVector::zeros(k);
                let mut hess = DMatrix::zeros(k, k);
                for (p, &j) in book.iter().enumerate() {
                    let (v, sl, c) = self.impact_conjugate(j, self.alpha[j] - ph[j]);
                    value += v;
                    grad[p] = s[j] / lam - sl;
                    for (q, &i) in book.iter().enumerate() {
                        hess[(p, q)] = sigma_inv[(j, i)] / lam;
                    }
                    hess[(p, p)] += c;
                }
                (value, grad, hess)
            };
            for _ in 0..200 {
                if book.is_empty() {
                    break;
                }
                let (value, grad, hess) = eval(&ph);
                if grad.amax() <= 1e-4 * tol * scale {
                    break;
                }
                iterations += 1;
                let d = Cholesky::new(hess).ok_or(MarkowitzError::NotPositiveDefinite)?.solve(&(-&grad));
                let slope = grad.dot(&d);
                let mut t = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let mut trial = ph.clone();
                    for (p, &j) in book.iter().enumerate() {
                        trial[j] += t * d[p];
                    }
                    if eval(&trial).0 <= value + 1e-4 * t * slope || t < 1e-10 {
                        ph = trial;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            zeta = l.clone().solve_lower_triangular(&ph).ok_or(MarkowitzError::NotPositiveDefinite)?;
            phi = ph;
        }
        let from_phi = chol.solve(&phi) / lam;
        let positions: Vec<f64> = (0..m)
            .map(|j| match self.costs[j] {
                AssetCost::Free => from_phi[j],
                AssetCost::Book(_) => self.impact_conjugate(j, self.alpha[j] - phi[j]).1,
            })
            .collect();
        let objective = self.dual_in_phi(&phi, zeta.norm_squared());
        Ok(MarkowitzDual {
            zeta: zeta.iter().cloned().collect(),
            phi: phi.iter().cloned().collect(),
            positions,
            objective,
            iterations,
        })
    }
}
