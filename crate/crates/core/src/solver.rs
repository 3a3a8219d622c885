//! Dual solver for the contract-management problem.
//!
//! The dual in the contract prices `rho` is concave but nonsmooth through
//! `mu_j = max_i v_ij rho_i`. We replace the max by a log-sum-exp with
//! temperature `tau`, maximise the smooth surrogate by damped Newton and
//! shrink `tau` geometrically until it is far below the scale of `mu`.
//! Bids, winning rates and an allocation are then read off the dual.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::flow::MinCostFlow;
use crate::model::{InfeasibilityCertificate, ModelError, ProblemInstance, SupplyCheck};
use crate::numerics::{bisect_increasing, expand_upper};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stopping tolerance on the dual gradient, relative to `1 + max C_i`.
    pub tol: f64,
    pub max_iter: usize,
    /// Capacity margin used by the upfront feasibility check.
    pub feasibility_margin: f64,
    pub check_feasibility: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 2000, feasibility_margin: 1e-6, check_feasibility: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// Price of one unit of value for each contract.
    pub rho: Vec<f64>,
    /// Pseudo-bid of each item, `max_i v_ij rho_i`.
    pub mu: Vec<f64>,
    /// Reduced cost `mu_j - v_ij rho_i` of each edge.
    pub theta: Vec<f64>,
    pub dual_value: f64,
    pub iterations: usize,
    /// Infinity norm of the final smoothed gradient.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    /// Real bid placed on each item.
    pub bids: Vec<f64>,
    /// Rate at which each item is won.
    pub won: Vec<f64>,
    /// Rate of item `j` delivered to contract `i`, per edge.
    pub allocation: Vec<f64>,
    /// Fraction of won impressions of item `j` routed to contract `i`, per edge.
    pub gamma: Vec<f64>,
    pub primal_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// `max_i |sum_j v_ij R_ij - C_i| / C_i`.
    pub contract_residual: f64,
    /// `max_j |sum_i R_ij - s_j| / lambda_j`.
    pub balance_residual: f64,
    /// `max_j (s_j - cap_j)+ / lambda_j`.
    pub capacity_residual: f64,
    pub min_allocation: f64,
    /// `max_e theta_e R_e`.
    pub complementarity: f64,
    /// `max_j |mu_j - max_i v_ij rho_i|`, relative to `1 + mu_j`.
    pub mu_consistency: f64,
    /// `max_i |rho_i - min_j mu_j / v_ij|`, relative to `1 + rho_i`.
    pub rho_consistency: f64,
    pub passed: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("supply is inadequate for the contract targets (weighted demand {} > weighted capacity {})", .0.weighted_demand, .0.weighted_capacity)]
    Infeasible(InfeasibilityCertificate),
    #[error("dual solver stopped after {} iterations with residual {}", .best.iterations, .best.residual)]
    NotConverged { best: Box<DualSolution> },
    #[error("active edges cannot carry the demand (shortfall {shortfall})")]
    ActiveEdgeInfeasible { shortfall: f64 },
    #[error("uniform-bid shortcut needs all valuations equal to one on a complete graph")]
    UniformBidPrecondition,
    #[error("dual solution does not match the instance dimensions")]
    DimensionMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Smoothed {
    value: f64,
    grad: Vec<f64>,
    hess: Option<DMatrix<f64>>,
}

/// Pseudo-bids `mu_j = max_i v_ij rho_i`.
pub fn pseudo_bids(instance: &ProblemInstance, rho: &[f64]) -> Vec<f64> {
    (0..instance.num_items())
        .map(|j| {
            instance
                .item_edges(j)
                .iter()
                .map(|&e| {
                    let edge = instance.edges()[e];
                    edge.value * rho[edge.contract]
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// The exact dual objective `sum_i rho_i C_i - sum_j lambda_j Λ*_j(mu_j)`.
pub fn dual_objective(instance: &ProblemInstance, rho: &[f64]) -> f64 {
    if rho.iter().any(|&r| r < 0.0) {
        return f64::NEG_INFINITY;
    }
    let mu = pseudo_bids(instance, rho);
    let gain: f64 = rho.iter().enumerate().map(|(i, r)| r * instance.target(i)).sum();
    let cost: f64 = mu.iter().enumerate().map(|(j, &m)| instance.rate(j) * instance.cost(j).lambda_conjugate(m)).sum();
    gain - cost
}

/// The primal objective `sum_j lambda_j Λ_j(s_j / lambda_j)`.
pub fn primal_objective(instance: &ProblemInstance, won: &[f64]) -> f64 {
    won.iter()
        .enumerate()
        .map(|(j, &s)| {
            let lam = instance.rate(j);
            lam * instance.cost(j).lambda(s / lam)
        })
        .sum()
}

fn smoothed(instance: &ProblemInstance, rho: &[f64], tau: f64, hessian: bool) -> Smoothed {
    let n = instance.num_contracts();
    let mut value: f64 = rho.iter().enumerate().map(|(i, r)| r * instance.target(i)).sum();
    let mut grad: Vec<f64> = (0..n).map(|i| instance.target(i)).collect();
    let mut hess = hessian.then(|| DMatrix::<f64>::zeros(n, n));
    let edges = instance.edges();
    let mut active: Vec<(usize, f64)> = Vec::new();
    for j in 0..instance.num_items() {
        let incident = instance.item_edges(j);
        if incident.is_empty() {
            continue;
        }
        let peak = incident.iter().map(|&e| edges[e].value * rho[edges[e].contract]).fold(f64::NEG_INFINITY, f64::max);
        active.clear();
        let mut total = 0.0;
        for &e in incident {
            let a = edges[e].value * rho[edges[e].contract];
            let w = ((a - peak) / tau).exp();
            if w > 1e-300 {
                total += w;
                active.push((e, w));
            }
        }
        let mu = (peak + tau * total.ln()).max(0.0);
        let lam = instance.rate(j);
        let cost = instance.cost(j);
        value -= lam * cost.lambda_conjugate(mu);
        let sigma = cost.conjugate_slope(mu);
        for (e, w) in active.iter_mut() {
            *w /= total;
            let edge = edges[*e];
            grad[edge.contract] -= lam * sigma * *w * edge.value;
        }
        if let Some(h) = hess.as_mut() {
            let kappa = cost.conjugate_curvature(mu);
            for &(ea, pa) in active.iter() {
                if pa < 1e-18 {
                    continue;
                }
                let a = edges[ea];
                let ga = pa * a.value;
                h[(a.contract, a.contract)] -= lam * sigma / tau * pa * a.value * a.value;
                for &(eb, pb) in active.iter() {
                    if pb < 1e-18 {
                        continue;
                    }
                    let b = edges[eb];
                    let gb = pb * b.value;
                    h[(a.contract, b.contract)] -= lam * (kappa - sigma / tau) * ga * gb;
                }
            }
        }
    }
    Smoothed { value, grad, hess }
}

// gradient norm ignoring components blocked by rho_i >= 0
fn projected_norm(rho: &[f64], grad: &[f64]) -> f64 {
    rho.iter().zip(grad).map(|(&r, &g)| if r <= 0.0 && g < 0.0 { 0.0 } else { g.abs() }).fold(0.0, f64::max)
}

// price at which contract i alone would meet its target from its own items
fn standalone_price(instance: &ProblemInstance, i: usize) -> f64 {
    let delivered = |r: f64| -> f64 {
        instance
            .contract_edges(i)
            .iter()
            .map(|&e| {
                let edge = instance.edges()[e];
                let lam = instance.rate(edge.item);
                edge.value * lam * instance.cost(edge.item).conjugate_slope(edge.value * r)
            })
            .sum()
    };
    let target = instance.target(i);
    match expand_upper(delivered, target, 1e-6, 1e300) {
        Some(hi) => bisect_increasing(delivered, target, 0.0, hi, 1e-12),
        None => 1.0,
    }
}

/// Maximises the dual over `rho >= 0`.
pub fn solve_dual(instance: &ProblemInstance, options: &SolverOptions) -> Result<DualSolution, SolverError> {
    if options.check_feasibility {
        if let SupplyCheck::Inadequate(cert) = instance.check_adequate_supply(options.feasibility_margin)? {
            return Err(SolverError::Infeasible(cert));
        }
    }
    let n = instance.num_contracts();
    let c_scale = (0..n).map(|i| instance.target(i)).fold(0.0, f64::max);
    let final_tol = options.tol * (1.0 + c_scale);
    let mut rho: Vec<f64> = (0..n).map(|i| standalone_price(instance, i)).collect();
    let mu0 = pseudo_bids(instance, &rho);
    let mu_scale = mu0.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut tau = 0.05 * mu_scale;
    let mut iterations = 0;
    let mut residual;
    loop {
        let mu_now = pseudo_bids(instance, &rho).into_iter().fold(0.0, f64::max).max(1e-300);
        let tau_floor = 1e-9 * mu_now;
        let last_stage = tau <= tau_floor;
        if last_stage {
            tau = tau_floor;
        }
        let stage_tol = if last_stage { final_tol } else { final_tol.max(1e-3 * (1.0 + c_scale) * tau / mu_now) };
        let mut stalls = 0;
        loop {
            let current = smoothed(instance, &rho, tau, true);
            residual = projected_norm(&rho, &current.grad);
            if residual <= stage_tol.max(rounding_floor(&rho, &current)) {
                break;
            }
            if iterations >= options.max_iter || stalls >= 3 {
                break;
            }
            iterations += 1;
            let step = newton_direction(&rho, &current);
            if accept_step(instance, &mut rho, &current, &step, tau) {
                stalls = 0;
            } else {
                stalls += 1;
                // fall back to a scaled gradient step
                let g = &current.grad;
                let scale = current
                    .hess
                    .as_ref()
                    .map(|h| (0..n).map(|i| -h[(i, i)]).fold(0.0, f64::max))
                    .unwrap_or(1.0)
                    .max(1e-300);
                let fallback: Vec<f64> = g.iter().map(|x| x / scale).collect();
                accept_step(instance, &mut rho, &current, &fallback, tau);
            }
        }
        if last_stage || iterations >= options.max_iter {
            break;
        }
        tau *= 0.1;
    }
    let mu = pseudo_bids(instance, &rho);
    let theta = instance.edges().iter().map(|e| mu[e.item] - e.value * rho[e.contract]).collect();
    let dual_value = dual_objective(instance, &rho);
    let floor = rounding_floor(&rho, &smoothed(instance, &rho, tau, true));
    let solution = DualSolution { rho, mu, theta, dual_value, iterations, residual };
    if residual > final_tol.max(floor) {
        return Err(SolverError::NotConverged { best: Box::new(solution) });
    }
    Ok(solution)
}

// Gradient components cannot be resolved below the change caused by one
// rounding step in rho; along near-tied prices the curvature is O(1/tau).
fn rounding_floor(rho: &[f64], current: &Smoothed) -> f64 {
    let h = current.hess.as_ref().expect("hessian requested");
    let n = rho.len();
    (0..n).map(|i| (0..n).map(|l| (h[(i, l)] * rho[l]).abs()).sum::<f64>()).fold(0.0, f64::max) * 16.0 * f64::EPSILON
}

fn newton_direction(rho: &[f64], current: &Smoothed) -> Vec<f64> {
    let n = rho.len();
    let h = current.hess.as_ref().expect("hessian requested");
    // coordinates pinned at zero with an outward gradient stay put
    let free: Vec<usize> = (0..n).filter(|&i| !(rho[i] <= 0.0 && current.grad[i] < 0.0)).collect();
    let k = free.len();
    let mut step = vec![0.0; n];
    if k == 0 {
        return step;
    }
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DVector::<f64>::zeros(k);
    let mut diag_max: f64 = 0.0;
    for (p, &i) in free.iter().enumerate() {
        b[p] = current.grad[i];
        for (q, &l) in free.iter().enumerate() {
            a[(p, q)] = -h[(i, l)];
        }
        diag_max = diag_max.max(a[(p, p)]);
    }
    let mut reg = 1e-13 * diag_max + 1e-300;
    loop {
        let mut reg_a = a.clone();
        for p in 0..k {
            reg_a[(p, p)] += reg;
        }
        if let Some(chol) = reg_a.cholesky() {
            let d = chol.solve(&b);
            for (p, &i) in free.iter().enumerate() {
                step[i] = d[p];
            }
            return step;
        }
        reg = (reg * 100.0).max(1e-12 * diag_max.max(1.0));
    }
}

fn accept_step(instance: &ProblemInstance, rho: &mut Vec<f64>, current: &Smoothed, step: &[f64], tau: f64) -> bool {
    let rho_scale = rho.iter().cloned().fold(0.0, f64::max).max(1e-300);
    // keep any single coordinate from moving by more than ten price scales
    let longest = step.iter().cloned().map(f64::abs).fold(0.0, f64::max);
    let mut t: f64 = if longest > 10.0 * rho_scale { 10.0 * rho_scale / longest } else { 1.0 };
    let base_norm = projected_norm(rho, &current.grad);
    let round =
        1e-14 * (current.value.abs() + rho.iter().enumerate().map(|(i, r)| r * instance.target(i)).sum::<f64>());
    for _ in 0..60 {
        let trial: Vec<f64> = rho.iter().zip(step).map(|(r, d)| (r + t * d).max(0.0)).collect();
        let moved: f64 = trial.iter().zip(rho.iter()).zip(&current.grad).map(|((a, b), g)| (a - b) * g).sum();
        let next = smoothed(instance, &trial, tau, false);
        if next.value >= current.value + 1e-4 * moved {
            *rho = trial;
            return true;
        }
        // near the optimum value differences drown in rounding; fall back on
        // the gradient norm
        if next.value >= current.value - round && projected_norm(&trial, &next.grad) < base_norm {
            *rho = trial;
            return true;
        }
        t *= 0.5;
    }
    false
}

/// Default activity threshold for reduced costs.
pub fn default_eps_active(dual: &DualSolution) -> f64 {
    1e-6 * (1.0 + dual.mu.iter().cloned().fold(0.0, f64::max))
}

/// Bids `g^{-1}(mu_j)`, winning rates and an allocation supported on edges
/// with `theta_e <= eps_active`, found by min-cost flow with reduced costs
/// as arc costs.
pub fn recover_primal(
    instance: &ProblemInstance,
    dual: &DualSolution,
    eps_active: Option<f64>,
) -> Result<PrimalSolution, SolverError> {
    let n = instance.num_contracts();
    let m = instance.num_items();
    if dual.rho.len() != n || dual.mu.len() != m || dual.theta.len() != instance.edges().len() {
        return Err(SolverError::DimensionMismatch);
    }
    let eps = eps_active.unwrap_or_else(|| default_eps_active(dual));
    let bids: Vec<f64> = (0..m).map(|j| instance.cost(j).bid_for(dual.mu[j])).collect();
    let won: Vec<f64> = (0..m).map(|j| instance.rate(j) * instance.cost(j).curve().eval(bids[j])).collect();
    let edges = instance.edges();
    let demand: f64 = (0..n).map(|i| dual.rho[i] * instance.target(i)).sum();

    let mut last_short = demand;
    let mut money = vec![0.0; edges.len()];
    let mut solved = false;
    for slack in [1e-10, 1e-8, 1e-6, 1e-4] {
        let source = m + n;
        let sink = source + 1;
        let mut graph = MinCostFlow::new(m + n + 2);
        for j in 0..m {
            if won[j] > 0.0 {
                graph.add_arc(source, j, dual.mu[j] * won[j] * (1.0 + slack), 0.0);
            }
        }
        let mut arcs = vec![usize::MAX; edges.len()];
        for (e, edge) in edges.iter().enumerate() {
            let theta = dual.theta[e];
            if theta <= eps && won[edge.item] > 0.0 {
                let price = (edge.value * dual.rho[edge.contract]).max(1e-300);
                arcs[e] = graph.add_arc(edge.item, m + edge.contract, 2.0 * demand + 1.0, theta.max(0.0) / price);
            }
        }
        for i in 0..n {
            graph.add_arc(m + i, sink, dual.rho[i] * instance.target(i), 0.0);
        }
        let sent = graph.run(source, sink, demand, 1e-15 * demand.max(1e-300));
        for (e, &arc) in arcs.iter().enumerate() {
            money[e] = if arc == usize::MAX { 0.0 } else { graph.flow(arc) };
        }
        last_short = demand - sent;
        if last_short <= 1e-9 * demand {
            solved = true;
            break;
        }
    }
    if !solved {
        return Err(SolverError::ActiveEdgeInfeasible { shortfall: last_short });
    }
    let mut allocation: Vec<f64> = edges
        .iter()
        .enumerate()
        .map(|(e, edge)| money[e] / (edge.value * dual.rho[edge.contract]).max(1e-300))
        .collect();
    // rescale each contract onto its target exactly
    for i in 0..n {
        let got: f64 = instance.contract_edges(i).iter().map(|&e| edges[e].value * allocation[e]).sum();
        if got > 0.0 {
            let factor = instance.target(i) / got;
            for &e in instance.contract_edges(i) {
                allocation[e] *= factor;
            }
        }
    }
    let mut gamma = vec![0.0; edges.len()];
    for j in 0..m {
        let total: f64 = instance.item_edges(j).iter().map(|&e| allocation[e]).sum();
        if total > 0.0 {
            for &e in instance.item_edges(j) {
                gamma[e] = allocation[e] / total;
            }
        }
    }
    let primal_value = primal_objective(instance, &won);
    Ok(PrimalSolution { bids, won, allocation, gamma, primal_value })
}

/// Recomputes both objectives and all optimality residuals.
pub fn certify(instance: &ProblemInstance, dual: &DualSolution, primal: &PrimalSolution, tol: f64) -> Certificate {
    let edges = instance.edges();
    let n = instance.num_contracts();
    let m = instance.num_items();
    let primal_value = primal_objective(instance, &primal.won);
    let dual_value = dual_objective(instance, &dual.rho);
    let gap = primal_value - dual_value;
    let relative_gap = gap.abs() / primal_value.abs().max(1e-12);
    let contract_residual = (0..n)
        .map(|i| {
            let got: f64 = instance.contract_edges(i).iter().map(|&e| edges[e].value * primal.allocation[e]).sum();
            (got - instance.target(i)).abs() / instance.target(i)
        })
        .fold(0.0, f64::max);
    let balance_residual = (0..m)
        .map(|j| {
            let used: f64 = instance.item_edges(j).iter().map(|&e| primal.allocation[e]).sum();
            (used - primal.won[j]).abs() / instance.rate(j)
        })
        .fold(0.0, f64::max);
    let capacity_residual =
        (0..m).map(|j| (primal.won[j] - instance.capacity(j)).max(0.0) / instance.rate(j)).fold(0.0, f64::max);
    let min_allocation = primal.allocation.iter().cloned().fold(f64::INFINITY, f64::min);
    let complementarity = dual.theta.iter().zip(&primal.allocation).map(|(t, r)| (t * r).abs()).fold(0.0, f64::max);
    let exact_mu = pseudo_bids(instance, &dual.rho);
    let mu_consistency =
        (0..m).map(|j| (dual.mu[j] - exact_mu[j]).abs() / (1.0 + dual.mu[j].abs())).fold(0.0, f64::max);
    let rho_consistency = (0..n)
        .map(|i| {
            let best = instance
                .contract_edges(i)
                .iter()
                .map(|&e| dual.mu[edges[e].item] / edges[e].value)
                .fold(f64::INFINITY, f64::min);
            (dual.rho[i] - best).abs() / (1.0 + dual.rho[i].abs())
        })
        .fold(0.0, f64::max);
    let passed = relative_gap <= tol
        && contract_residual <= tol
        && balance_residual <= tol
        && capacity_residual <= tol
        && min_allocation >= -tol
        && complementarity <= tol * (1.0 + primal_value.abs())
        && mu_consistency <= tol
        && rho_consistency <= tol;
    Certificate {
        primal_value,
        dual_value,
        gap,
        relative_gap,
        contract_residual,
        balance_residual,
        capacity_residual,
        min_allocation,
        complementarity,
        mu_consistency,
        rho_consistency,
        passed,
    }
}

/// Closed-form path for the case where every contract values every item at
/// one: all contracts share a single price, found by bisection, and each
/// item's won supply is split in proportion to the targets.
pub fn solve_uniform_bid(instance: &ProblemInstance) -> Result<(DualSolution, PrimalSolution), SolverError> {
    let n = instance.num_contracts();
    let m = instance.num_items();
    let complete = instance.edges().len() == n * m && instance.edges().iter().all(|e| e.value == 1.0);
    if !complete {
        return Err(SolverError::UniformBidPrecondition);
    }
    let total: f64 = (0..n).map(|i| instance.target(i)).sum();
    let capacity: f64 = (0..m).map(|j| instance.capacity(j)).sum();
    let supply = |r: f64| -> f64 { (0..m).map(|j| instance.rate(j) * instance.cost(j).conjugate_slope(r)).sum() };
    let hi = match expand_upper(supply, total, 1e-6, 1e300) {
        Some(hi) => hi,
        None => {
            let weights = vec![1.0; n];
            return Err(SolverError::Infeasible(InfeasibilityCertificate {
                weights,
                weighted_demand: total,
                weighted_capacity: capacity,
            }));
        }
    };
    let price = bisect_increasing(supply, total, 0.0, hi, 1e-12);
    let rho = vec![price; n];
    let mu = vec![price; m];
    let bids: Vec<f64> = (0..m).map(|j| instance.cost(j).bid_for(price)).collect();
    let won: Vec<f64> = (0..m).map(|j| instance.rate(j) * instance.cost(j).curve().eval(bids[j])).collect();
    let delivered: f64 = won.iter().sum();
    let allocation: Vec<f64> =
        instance.edges().iter().map(|e| won[e.item] * instance.target(e.contract) / delivered).collect();
    let gamma: Vec<f64> = instance.edges().iter().map(|e| instance.target(e.contract) / total).collect();
    let theta = vec![0.0; instance.edges().len()];
    let dual_value = dual_objective(instance, &rho);
    let primal_value = primal_objective(instance, &won);
    let grad = (total - delivered).abs();
    Ok((
        DualSolution { rho, mu, theta, dual_value, iterations: 0, residual: grad },
        PrimalSolution { bids, won, allocation, gamma, primal_value },
    ))
}
