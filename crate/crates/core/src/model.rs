//! Problem instances: item types, contracts and the bipartite graph of
//! positive valuations between them.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costs::{AcquisitionCost, AuctionKind, CostError};
use crate::curves::SupplyCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemType {
    pub id: u64,
    /// Poisson arrival rate of auctions for this item.
    pub rate: f64,
    pub curve: SupplyCurve,
    pub auction: AuctionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    pub id: u64,
    /// Value per unit time the contract must receive.
    pub target: f64,
    /// Value of one impression of each item; missing items are worth zero.
    pub valuations: BTreeMap<u64, f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate item id {0}")]
    DuplicateItem(u64),
    #[error("duplicate contract id {0}")]
    DuplicateContract(u64),
    #[error("contract {contract} values unknown item {item}")]
    UnknownItem { contract: u64, item: u64 },
    #[error("contract {0} values no item positively")]
    EmptyUsefulSet(u64),
    #[error("item {item}: arrival rate must be positive and finite, got {value}")]
    InvalidRate { item: u64, value: f64 },
    #[error("contract {contract}: target must be positive and finite, got {value}")]
    InvalidTarget { contract: u64, value: f64 },
    #[error("contract {contract}: valuation of item {item} must be finite and nonnegative, got {value}")]
    InvalidValuation { contract: u64, item: u64, value: f64 },
    #[error("item {item}: {source}")]
    Cost { item: u64, source: CostError },
    #[error("instance has no contracts")]
    NoContracts,
    #[error("feasibility LP failed: {0}")]
    Lp(String),
}

/// An edge `(i, j)` of the valuation graph with `v_ij > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub contract: usize,
    pub item: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct ProblemInstance {
    items: Vec<ItemType>,
    contracts: Vec<Contract>,
    costs: Vec<AcquisitionCost>,
    edges: Vec<Edge>,
    item_edges: Vec<Vec<usize>>,
    contract_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    items: Vec<ItemType>,
    contracts: Vec<Contract>,
}

impl TryFrom<InstanceJson> for ProblemInstance {
    type Error = ModelError;

    fn try_from(value: InstanceJson) -> Result<Self, Self::Error> {
        ProblemInstance::new(value.items, value.contracts)
    }
}

impl From<ProblemInstance> for InstanceJson {
    fn from(value: ProblemInstance) -> Self {
        InstanceJson { items: value.items, contracts: value.contracts }
    }
}

/// Farkas-type proof that no allocation meets every target: weights `y >= 0`
/// with `sum_i y_i C_i > sum_j cap_j max_i v_ij y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    pub weights: Vec<f64>,
    pub weighted_demand: f64,
    pub weighted_capacity: f64,
}

impl InfeasibilityCertificate {
    /// Recomputes both sides from the instance.
    pub fn verify(&self, instance: &ProblemInstance, margin: f64) -> bool {
        let (demand, capacity) = instance.weighted_balance(&self.weights, margin);
        self.weights.iter().all(|&y| y >= 0.0) && demand > capacity * (1.0 + 1e-9) + 1e-300
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupplyCheck {
    /// A feasible allocation, one entry per edge.
    Adequate {
        allocation: Vec<f64>,
    },
    Inadequate(InfeasibilityCertificate),
}

impl SupplyCheck {
    pub fn is_adequate(&self) -> bool {
        matches!(self, SupplyCheck::Adequate { .. })
    }
}

impl ProblemInstance {
    pub fn new(items: Vec<ItemType>, contracts: Vec<Contract>) -> Result<Self, ModelError> {
        if contracts.is_empty() {
            return Err(ModelError::NoContracts);
        }
        let mut index = BTreeMap::new();
        let mut costs = Vec::with_capacity(items.len());
        for (j, item) in items.iter().enumerate() {
            if index.insert(item.id, j).is_some() {
                return Err(ModelError::DuplicateItem(item.id));
            }
            if !(item.rate.is_finite() && item.rate > 0.0) {
                return Err(ModelError::InvalidRate { item: item.id, value: item.rate });
            }
            let cost = AcquisitionCost::new(item.curve.clone(), item.auction)
                .map_err(|source| ModelError::Cost { item: item.id, source })?;
            costs.push(cost);
        }
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (i, contract) in contracts.iter().enumerate() {
            if !seen.insert(contract.id) {
                return Err(ModelError::DuplicateContract(contract.id));
            }
            if !(contract.target.is_finite() && contract.target > 0.0) {
                return Err(ModelError::InvalidTarget { contract: contract.id, value: contract.target });
            }
            let before = edges.len();
            for (&item, &value) in &contract.valuations {
                let j = *index.get(&item).ok_or(ModelError::UnknownItem { contract: contract.id, item })?;
                if !(value.is_finite() && value >= 0.0) {
                    return Err(ModelError::InvalidValuation { contract: contract.id, item, value });
                }
                if value > 0.0 {
                    edges.push(Edge { contract: i, item: j, value });
                }
            }
            if edges.len() == before {
                return Err(ModelError::EmptyUsefulSet(contract.id));
            }
        }
        edges.sort_by_key(|e| (e.contract, e.item));
        let mut item_edges = vec![Vec::new(); items.len()];
        let mut contract_edges = vec![Vec::new(); contracts.len()];
        for (e, edge) in edges.iter().enumerate() {
            item_edges[edge.item].push(e);
            contract_edges[edge.contract].push(e);
        }
        Ok(ProblemInstance { items, contracts, costs, edges, item_edges, contract_edges })
    }

    pub fn items(&self) -> &[ItemType] {
        &self.items
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_contracts(&self) -> usize {
        self.contracts.len()
    }

    /// Acquisition cost of item `j`.
    pub fn cost(&self, j: usize) -> &AcquisitionCost {
        &self.costs[j]
    }

    pub fn rate(&self, j: usize) -> f64 {
        self.items[j].rate
    }

    pub fn target(&self, i: usize) -> f64 {
        self.contracts[i].target
    }

    /// Edges sorted by `(contract, item)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices incident to item `j`.
    pub fn item_edges(&self, j: usize) -> &[usize] {
        &self.item_edges[j]
    }

    /// Edge indices incident to contract `i`.
    pub fn contract_edges(&self, i: usize) -> &[usize] {
        &self.contract_edges[i]
    }

    /// Upper bound on the rate at which item `j` can be won.
    pub fn capacity(&self, j: usize) -> f64 {
        self.items[j].rate * self.items[j].curve.total_mass()
    }

    /// `(sum_i y_i C_i, sum_j cap_j max_i v_ij y_i)` with capacities shrunk
    /// by `margin`.
    pub fn weighted_balance(&self, weights: &[f64], margin: f64) -> (f64, f64) {
        let demand: f64 = self.contracts.iter().zip(weights).map(|(c, y)| c.target * y).sum();
        let capacity: f64 = (0..self.items.len())
            .map(|j| {
                let best = self.item_edges[j]
                    .iter()
                    .map(|&e| self.edges[e].value * weights[self.edges[e].contract])
                    .fold(0.0, f64::max);
                self.capacity(j) * (1.0 - margin) * best
            })
            .sum();
        (demand, capacity)
    }

    /// Decides whether every target can be met using at most a `1 - margin`
    /// fraction of each item's capacity. Solved as a linear program; an
    /// infeasible answer carries a certificate.
    pub fn check_adequate_supply(&self, margin: f64) -> Result<SupplyCheck, ModelError> {
        let n = self.contracts.len();
        let m = self.items.len();
        let d = self.edges.len();
        // rows: n contract equalities, m capacity rows, d sign rows
        let mut rows = Vec::with_capacity(3 * d);
        let mut cols = Vec::with_capacity(3 * d);
        let mut vals = Vec::with_capacity(3 * d);
        for (e, edge) in self.edges.iter().enumerate() {
            rows.extend([edge.contract, n + edge.item, n + m + e]);
            cols.extend([e, e, e]);
            vals.extend([edge.value, 1.0, -1.0]);
        }
        let a = CscMatrix::new_from_triplets(n + m + d, d, rows, cols, vals);
        let p = CscMatrix::zeros((d, d));
        let q = vec![0.0; d];
        let mut b = Vec::with_capacity(n + m + d);
        b.extend(self.contracts.iter().map(|c| c.target));
        b.extend((0..m).map(|j| self.capacity(j) * (1.0 - margin)));
        b.extend(std::iter::repeat_n(0.0, d));
        let cones = [SupportedConeT::ZeroConeT(n), SupportedConeT::NonnegativeConeT(m + d)];
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(500)
            .build()
            .map_err(|e| ModelError::Lp(format!("{e:?}")))?;
        let mut solver =
            DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| ModelError::Lp(format!("{e:?}")))?;
        solver.solve();
        let status = solver.solution.status;
        match status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {
                let allocation = solver.solution.x.iter().map(|&r| r.max(0.0)).collect();
                Ok(SupplyCheck::Adequate { allocation })
            }
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                let z = &solver.solution.z;
                let mut weights: Vec<f64> = (0..n).map(|i| (-z[i]).max(0.0)).collect();
                let scale = weights.iter().cloned().fold(0.0, f64::max);
                if scale > 0.0 {
                    weights.iter_mut().for_each(|y| *y /= scale);
                }
                let (weighted_demand, weighted_capacity) = self.weighted_balance(&weights, margin);
                Ok(SupplyCheck::Inadequate(InfeasibilityCertificate { weights, weighted_demand, weighted_capacity }))
            }
            other => Err(ModelError::Lp(format!("solver finished with status {other:?}"))),
        }
    }

    /// Writes the valuation graph as `contract_id,item_id,value` rows.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["contract_id", "item_id", "value"])?;
        for edge in &self.edges {
            writer.write_record([
                self.contracts[edge.contract].id.to_string(),
                self.items[edge.item].id.to_string(),
                edge.value.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}
