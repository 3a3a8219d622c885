//! Maximise delivered value subject to a spend-rate budget.
//!
//! With multiplier `theta` on the budget, item `j` is bid at pseudo-bid
//! `v_j / theta`; `theta` is set so that expected spend equals the budget.

use thiserror::Error;

use crate::costs::{AcquisitionCost, AuctionKind};

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetItem {
    pub rate: f64,
    pub cost: AcquisitionCost,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSolution {
    pub multiplier: f64,
    pub bids: Vec<f64>,
    pub won: Vec<f64>,
    pub spend: f64,
    pub value: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BudgetError {
    #[error("budget {budget} exceeds the spend {max_spend} of buying all supply; it never binds")]
    BudgetSlack { budget: f64, max_spend: f64, max_bids: Vec<f64> },
    #[error("budget must be positive and finite, got {0}")]
    InvalidBudget(f64),
    #[error("item {index}: rate and value must be positive and finite")]
    InvalidItem { index: usize },
}

fn bids_at(items: &[BudgetItem], multiplier: f64) -> Vec<f64> {
    items
        .iter()
        .map(|it| {
            let mu = it.value / multiplier;
            match it.cost.kind() {
                AuctionKind::SecondPrice => mu,
                AuctionKind::FirstPrice => it.cost.bid_for(mu),
            }
        })
        .collect()
}

fn spend_of(items: &[BudgetItem], bids: &[f64]) -> f64 {
    items.iter().zip(bids).map(|(it, &x)| it.rate * it.cost.expected_cost(x)).sum()
}

/// Solves for the budget multiplier by bisection in log space.
pub fn solve_budget(items: &[BudgetItem], budget: f64) -> Result<BudgetSolution, BudgetError> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(BudgetError::InvalidBudget(budget));
    }
    for (index, it) in items.iter().enumerate() {
        if !(it.rate.is_finite() && it.rate > 0.0 && it.value.is_finite() && it.value > 0.0) {
            return Err(BudgetError::InvalidItem { index });
        }
    }
    let max_bids: Vec<f64> = items.iter().map(|it| it.cost.curve().x_bar()).collect();
    let max_spend: f64 = items
        .iter()
        .map(|it| match it.cost.kind() {
            AuctionKind::SecondPrice => it.rate * it.cost.curve().p_bar(),
            AuctionKind::FirstPrice => it.rate * it.cost.expected_cost(it.cost.curve().x_bar()),
        })
        .sum();
    if max_spend <= budget {
        return Err(BudgetError::BudgetSlack { budget, max_spend, max_bids });
    }
    let spend = |log_m: f64| spend_of(items, &bids_at(items, log_m.exp()));
    // spend falls as the multiplier rises
    let mut lo = 0.0f64;
    while spend(lo) < budget {
        lo -= 2.0;
    }
    let mut hi = lo + 2.0;
    while spend(hi) > budget {
        hi += 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (s_lo, s_hi) = (spend(lo), spend(hi));
    let log_m = if (s_lo - budget).abs() <= (s_hi - budget).abs() { lo } else { hi };
    let multiplier = log_m.exp();
    let bids = bids_at(items, multiplier);
    let won: Vec<f64> = items.iter().zip(&bids).map(|(it, &x)| it.rate * it.cost.curve().eval(x)).collect();
    let value = items.iter().zip(&won).map(|(it, s)| it.value * s).sum();
    let spend = spend_of(items, &bids);
    Ok(BudgetSolution { multiplier, bids, won, spend, value })
}
