//! JSON form of a solved instance: prices, bids, winning rates and the
//! allocation as `[contract_id, item_id, rate]` triples. Infinite bids are
//! written as `null`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ProblemInstance;
use crate::solver::{dual_objective, primal_objective, DualSolution, PrimalSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub rho: Vec<f64>,
    pub mu: Vec<f64>,
    pub bids: Vec<Option<f64>>,
    pub s: Vec<f64>,
    #[serde(rename = "R")]
    pub allocation: Vec<(u64, u64, f64)>,
    pub gap: f64,
    pub iters: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionFileError {
    #[error("solution has {got} {what}, instance needs {expected}")]
    Length { what: &'static str, got: usize, expected: usize },
    #[error("allocation entry ({contract}, {item}) is not an edge of the instance")]
    UnknownEdge { contract: u64, item: u64 },
}

impl SolutionFile {
    pub fn new(instance: &ProblemInstance, dual: &DualSolution, primal: &PrimalSolution) -> Self {
        let allocation = instance
            .edges()
            .iter()
            .zip(&primal.allocation)
            .filter(|(_, &r)| r != 0.0)
            .map(|(e, &r)| (instance.contracts()[e.contract].id, instance.items()[e.item].id, r))
            .collect();
        SolutionFile {
            rho: dual.rho.clone(),
            mu: dual.mu.clone(),
            bids: primal.bids.iter().map(|&b| b.is_finite().then_some(b)).collect(),
            s: primal.won.clone(),
            allocation,
            gap: primal.primal_value - dual.dual_value,
            iters: dual.iterations,
        }
    }

    /// Rebuilds solver structures against `instance`; objectives and
    /// reduced costs are recomputed from the stored prices.
    pub fn restore(&self, instance: &ProblemInstance) -> Result<(DualSolution, PrimalSolution), SolutionFileError> {
        let n = instance.num_contracts();
        let m = instance.num_items();
        for (what, got, expected) in
            [("rho", self.rho.len(), n), ("mu", self.mu.len(), m), ("bids", self.bids.len(), m), ("s", self.s.len(), m)]
        {
            if got != expected {
                return Err(SolutionFileError::Length { what, got, expected });
            }
        }
        let edges = instance.edges();
        let lookup: HashMap<(u64, u64), usize> = edges
            .iter()
            .enumerate()
            .map(|(k, e)| ((instance.contracts()[e.contract].id, instance.items()[e.item].id), k))
            .collect();
        let mut allocation = vec![0.0; edges.len()];
        for &(contract, item, r) in &self.allocation {
            let k = *lookup.get(&(contract, item)).ok_or(SolutionFileError::UnknownEdge { contract, item })?;
            allocation[k] = r;
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
        let theta = edges.iter().map(|e| self.mu[e.item] - e.value * self.rho[e.contract]).collect();
        let dual = DualSolution {
            rho: self.rho.clone(),
            mu: self.mu.clone(),
            theta,
            dual_value: dual_objective(instance, &self.rho),
            iterations: self.iters,
            residual: f64::NAN,
        };
        let primal = PrimalSolution {
            bids: self.bids.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect(),
            won: self.s.clone(),
            allocation,
            gamma,
            primal_value: primal_objective(instance, &self.s),
        };
        Ok((dual, primal))
    }
}
