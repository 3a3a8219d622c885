//! Discrete-event simulation of a bidding policy against the supply curves.
//!
//! Auctions for each item arrive as a Poisson process. Every arrival draws
//! three uniforms (inter-arrival time, competing price, routing) from a
//! stream keyed by replication and item, so two policies run on the same
//! seed see identical auctions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costs::AuctionKind;
use crate::model::ProblemInstance;
use crate::solver::PrimalSolution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("need at least two replications for standard errors, got {0}")]
    TooFewReplications(usize),
    #[error("policy has {policy} items but the instance has {instance}")]
    DimensionMismatch { policy: usize, instance: usize },
}

/// Bids per item and the routing distribution of won impressions.
#[derive(Debug, Clone, PartialEq)]
pub struct BidPolicy {
    pub bids: Vec<f64>,
    /// For each item, `(contract, gamma, value)` triples.
    pub routing: Vec<Vec<(usize, f64, f64)>>,
}

impl BidPolicy {
    pub fn from_solution(instance: &ProblemInstance, primal: &PrimalSolution) -> Self {
        let routing = (0..instance.num_items())
            .map(|j| {
                instance
                    .item_edges(j)
                    .iter()
                    .filter(|&&e| primal.gamma[e] > 0.0)
                    .map(|&e| {
                        let edge = instance.edges()[e];
                        (edge.contract, primal.gamma[e], edge.value)
                    })
                    .collect()
            })
            .collect();
        BidPolicy { bids: primal.bids.clone(), routing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub replications: usize,
    pub seed: u64,
    /// Replace exponential inter-arrival times by their mean `1/lambda`.
    pub deterministic_arrivals: bool,
    /// Number of time bins in the cumulative fulfilment series.
    pub series_bins: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { horizon: 1000.0, replications: 10, seed: 0, deterministic_arrivals: false, series_bins: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// The planned rate this estimate should reproduce.
    pub expected: f64,
}

impl RateEstimate {
    /// Deviation from the planned rate in standard errors.
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            (self.mean - self.expected) / self.std_error
        } else if self.mean == self.expected {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub horizon: f64,
    pub replications: usize,
    pub seed: u64,
    pub poisson_arrivals: bool,
    pub expected_arrivals: f64,
    pub observed_arrivals: u64,
    pub contract_value_rates: Vec<RateEstimate>,
    pub item_win_rates: Vec<RateEstimate>,
    pub cost_rate: RateEstimate,
    /// `series[b][i]`: mean cumulative value of contract `i` at the end of bin `b`.
    pub series: Vec<Vec<f64>>,
}

struct Replication {
    contract_value: Vec<f64>,
    item_wins: Vec<f64>,
    cost: f64,
    arrivals: u64,
    series: Vec<Vec<f64>>,
}

fn run_replication(
    instance: &ProblemInstance,
    policy: &BidPolicy,
    config: &SimulationConfig,
    rep: usize,
) -> Replication {
    let n = instance.num_contracts();
    let m = instance.num_items();
    let bins = config.series_bins.max(1);
    let mut out = Replication {
        contract_value: vec![0.0; n],
        item_wins: vec![0.0; m],
        cost: 0.0,
        arrivals: 0,
        series: vec![vec![0.0; n]; bins],
    };
    for j in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(((rep as u64) << 32) | j as u64);
        let rate = instance.rate(j);
        let curve = instance.cost(j).curve();
        let kind = instance.cost(j).kind();
        let bid = policy.bids[j];
        let mut t = 0.0;
        loop {
            let u_time: f64 = rng.random();
            let u_price: f64 = rng.random();
            let u_route: f64 = rng.random();
            t += if config.deterministic_arrivals { 1.0 / rate } else { -(-u_time).ln_1p() / rate };
            if t > config.horizon {
                break;
            }
            out.arrivals += 1;
            let price = curve.price_from_uniform(u_price);
            if !(bid > 0.0 && bid >= price) {
                continue;
            }
            out.item_wins[j] += 1.0;
            out.cost += match kind {
                AuctionKind::SecondPrice => price,
                AuctionKind::FirstPrice => bid,
            };
            let mut acc = 0.0;
            for &(i, gamma, value) in &policy.routing[j] {
                acc += gamma;
                if u_route < acc {
                    out.contract_value[i] += value;
                    let b = ((t / config.horizon) * bins as f64) as usize;
                    out.series[b.min(bins - 1)][i] += value;
                    break;
                }
            }
        }
    }
    for b in 1..bins {
        for i in 0..n {
            out.series[b][i] += out.series[b - 1][i];
        }
    }
    out
}

fn estimate(samples: impl Iterator<Item = f64>, expected: f64) -> RateEstimate {
    let values: Vec<f64> = samples.collect();
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    RateEstimate { mean, std_error: (var / k).sqrt(), expected }
}

fn check(instance: &ProblemInstance, policy: &BidPolicy, config: &SimulationConfig) -> Result<(), SimulationError> {
    if !(config.horizon.is_finite() && config.horizon > 0.0) {
        return Err(SimulationError::InvalidHorizon(config.horizon));
    }
    if config.replications < 2 {
        return Err(SimulationError::TooFewReplications(config.replications));
    }
    if policy.bids.len() != instance.num_items() || policy.routing.len() != instance.num_items() {
        return Err(SimulationError::DimensionMismatch { policy: policy.bids.len(), instance: instance.num_items() });
    }
    Ok(())
}

fn replicate(instance: &ProblemInstance, policy: &BidPolicy, config: &SimulationConfig) -> Vec<Replication> {
    (0..config.replications).into_par_iter().map(|rep| run_replication(instance, policy, config, rep)).collect()
}

/// Simulates `policy` and compares realised rates with the planned ones:
/// contract targets, winning rates `lambda_j W_j(x_j)` and the total
/// expected spend rate.
pub fn simulate(
    instance: &ProblemInstance,
    policy: &BidPolicy,
    config: &SimulationConfig,
) -> Result<SimulationReport, SimulationError> {
    check(instance, policy, config)?;
    let reps = replicate(instance, policy, config);
    let h = config.horizon;
    let n = instance.num_contracts();
    let m = instance.num_items();
    let contract_value_rates =
        (0..n).map(|i| estimate(reps.iter().map(|r| r.contract_value[i] / h), instance.target(i))).collect();
    let planned_win: Vec<f64> =
        (0..m).map(|j| instance.rate(j) * instance.cost(j).curve().eval(policy.bids[j])).collect();
    let item_win_rates = (0..m).map(|j| estimate(reps.iter().map(|r| r.item_wins[j] / h), planned_win[j])).collect();
    let planned_cost: f64 = (0..m).map(|j| instance.rate(j) * instance.cost(j).expected_cost(policy.bids[j])).sum();
    let cost_rate = estimate(reps.iter().map(|r| r.cost / h), planned_cost);
    let bins = config.series_bins.max(1);
    let series = (0..bins)
        .map(|b| (0..n).map(|i| reps.iter().map(|r| r.series[b][i]).sum::<f64>() / reps.len() as f64).collect())
        .collect();
    Ok(SimulationReport {
        horizon: h,
        replications: config.replications,
        seed: config.seed,
        poisson_arrivals: !config.deterministic_arrivals,
        expected_arrivals: (0..m).map(|j| instance.rate(j)).sum::<f64>() * h * config.replications as f64,
        observed_arrivals: reps.iter().map(|r| r.arrivals).sum(),
        contract_value_rates,
        item_win_rates,
        cost_rate,
        series,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbComparison {
    /// Paired difference `B - A` of each contract's value rate.
    pub contract_value_diff: Vec<RateEstimate>,
    /// Paired difference `B - A` of the spend rate.
    pub cost_rate_diff: RateEstimate,
    /// Whether each policy meets every target within three standard errors.
    pub a_feasible: bool,
    pub b_feasible: bool,
}

/// Runs two policies on common random numbers and reports paired
/// differences.
pub fn ab_compare(
    instance: &ProblemInstance,
    a: &BidPolicy,
    b: &BidPolicy,
    config: &SimulationConfig,
) -> Result<AbComparison, SimulationError> {
    check(instance, a, config)?;
    check(instance, b, config)?;
    let ra = replicate(instance, a, config);
    let rb = replicate(instance, b, config);
    let h = config.horizon;
    let n = instance.num_contracts();
    let contract_value_diff = (0..n)
        .map(|i| estimate(ra.iter().zip(&rb).map(|(x, y)| (y.contract_value[i] - x.contract_value[i]) / h), 0.0))
        .collect();
    let cost_rate_diff = estimate(ra.iter().zip(&rb).map(|(x, y)| (y.cost - x.cost) / h), 0.0);
    let feasible = |reps: &[Replication]| {
        (0..n).all(|i| {
            let est = estimate(reps.iter().map(|r| r.contract_value[i] / h), instance.target(i));
            est.mean >= instance.target(i) - 3.0 * est.std_error
        })
    };
    Ok(AbComparison { contract_value_diff, cost_rate_diff, a_feasible: feasible(&ra), b_feasible: feasible(&rb) })
}
