//! Convex contract management for real-time bidding.
//!
//! An advertiser has contracts that must each receive a target rate of
//! value, and buys impressions in auctions whose competing bids follow known
//! supply curves. Choosing bids and routing won impressions at minimum
//! expected spend is a convex problem in the winning rates; this crate
//! solves it through its dual and recovers bids and allocations.

// `!(x > 0.0)` is used throughout so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costs;
pub mod curves;
pub mod figures;
pub mod flow;
pub mod generate;
pub mod io;
pub mod model;
pub mod numerics;
pub mod related;
pub mod simulate;
pub mod solver;

pub use costs::{dark_pool_identity_check, AcquisitionCost, AuctionKind, CostError, DarkPoolCheck};
pub use curves::{alpha_concavity_check, ell, fit_empirical, Concavity, CurveError, CurveFamily, SupplyCurve};
pub use model::{Contract, Edge, InfeasibilityCertificate, ItemType, ModelError, ProblemInstance, SupplyCheck};
pub use nalgebra::DMatrix;
pub use related::budget::{solve_budget, BudgetError, BudgetItem, BudgetSolution};
pub use related::lob::{lob_cost, LobError, LobMarket};
pub use related::markowitz::{AssetCost, MarkowitzDual, MarkowitzError, MarkowitzInstance, MarkowitzSolution};
pub use simulate::{
    ab_compare, simulate, AbComparison, BidPolicy, RateEstimate, SimulationConfig, SimulationError, SimulationReport,
};
pub use solver::{
    certify, dual_objective, primal_objective, pseudo_bids, recover_primal, solve_dual, solve_uniform_bid, Certificate,
    DualSolution, PrimalSolution, SolverError, SolverOptions,
};
