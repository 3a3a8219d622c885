//! Data behind the standard plots: cost curves of the exponential supply
//! curve, the two-contract price bifurcations and a sparsity run.

use serde::Serialize;

use crate::costs::AcquisitionCost;
use crate::curves::SupplyCurve;
use crate::generate::{sparse_exponential, two_contract_chain};
use crate::solver::{certify, recover_primal, solve_dual, SolverError, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRow {
    pub x: f64,
    pub supply: f64,
    pub expected_cost: f64,
    pub q: f64,
    pub lambda: f64,
    pub mu: f64,
    pub lambda_conjugate: f64,
}

/// `W`, `f` on `x ∈ [0, 5]`, `Λ` on `q ∈ [0, 0.99]` and `Λ*` on `mu ∈ [0, 5]`
/// for the unit exponential curve under second-price rules.
pub fn lambda_grid(points: usize) -> Vec<LambdaRow> {
    let cost = AcquisitionCost::second_price(SupplyCurve::exponential(1.0).expect("valid"));
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|k| {
            let t = k as f64 / last;
            let x = 5.0 * t;
            let q = 0.99 * t;
            LambdaRow {
                x,
                supply: cost.curve().eval(x),
                expected_cost: cost.expected_cost(x),
                q,
                lambda: cost.lambda(q),
                mu: x,
                lambda_conjugate: cost.lambda_conjugate(x),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationRow {
    pub parameter: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

fn chain_row(parameter: f64, gammas: [f64; 3], targets: [f64; 2]) -> Result<BifurcationRow, SolverError> {
    let instance = two_contract_chain(gammas, targets);
    let dual = solve_dual(&instance, &SolverOptions::default())?;
    Ok(BifurcationRow {
        parameter,
        rho1: dual.rho[0],
        rho2: dual.rho[1],
        mu1: dual.mu[0],
        mu2: dual.mu[1],
        mu3: dual.mu[2],
    })
}

/// Supply sweep: curve rates `(1/10, 1, 10)`, targets `C_2 = 2 C_1` with
/// `C_1` from 0.05 to 0.99.
pub fn bifurcation_supply(points: usize) -> Result<Vec<BifurcationRow>, SolverError> {
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|k| {
            let c = 0.05 + 0.94 * k as f64 / last;
            chain_row(c, [0.1, 1.0, 10.0], [c, 2.0 * c])
        })
        .collect()
}

/// Cost sweep: curve rates `(1/2, gamma_2, 2)` with `gamma_2` log-spaced from
/// 0.1 to 100, both targets 0.5.
pub fn bifurcation_cost(points: usize) -> Result<Vec<BifurcationRow>, SolverError> {
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|k| {
            let g = 0.1 * 1000f64.powf(k as f64 / last);
            chain_row(g, [0.5, g, 2.0], [0.5, 0.5])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityRow {
    pub items: usize,
    pub contracts: usize,
    pub edges: usize,
    pub active_edges: usize,
    pub relative_gap: f64,
    pub iterations: usize,
}

/// Solves a random sparse instance and counts the edges carrying flow.
pub fn sparsity(items: usize, contracts: usize, seed: u64) -> Result<SparsityRow, SolverError> {
    let instance = sparse_exponential(items, contracts, seed);
    let dual = solve_dual(&instance, &SolverOptions::default())?;
    let primal = recover_primal(&instance, &dual, None)?;
    let cert = certify(&instance, &dual, &primal, 1e-6);
    Ok(SparsityRow {
        items,
        contracts,
        edges: instance.edges().len(),
        active_edges: primal.allocation.iter().filter(|&&r| r > 0.0).count(),
        relative_gap: cert.relative_gap,
        iterations: dual.iterations,
    })
}
