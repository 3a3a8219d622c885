//! Seeded random instance generators used by the benchmarks, the figure
//! data and the test suites.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::costs::AuctionKind;
use crate::curves::SupplyCurve;
use crate::model::{Contract, ItemType, ProblemInstance, SupplyCheck};

fn exp_item(id: u64, rate: f64, gamma: f64, auction: AuctionKind) -> ItemType {
    ItemType { id, rate, curve: SupplyCurve::exponential(gamma).expect("positive rate"), auction }
}

/// Large sparse instance: rates, curve parameters and targets are Exp(1),
/// valuations are `max(Z - 1, 0)` with `Z` standard normal.
pub fn sparse_exponential(items: usize, contracts: usize, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let item_list: Vec<ItemType> = (0..items)
            .map(|j| {
                let rate: f64 = Exp1.sample(&mut rng);
                let gamma: f64 = Exp1.sample(&mut rng);
                exp_item(j as u64, rate.max(1e-6), gamma.max(1e-6), AuctionKind::SecondPrice)
            })
            .collect();
        let contract_list: Vec<Contract> = (0..contracts)
            .map(|i| {
                let target: f64 = Exp1.sample(&mut rng);
                let mut valuations = BTreeMap::new();
                for j in 0..items {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if z > 1.0 {
                        valuations.insert(j as u64, z - 1.0);
                    }
                }
                Contract { id: i as u64, target: target.max(1e-6), valuations }
            })
            .collect();
        if let Ok(instance) = ProblemInstance::new(item_list, contract_list) {
            return instance;
        }
    }
}

/// Small random instance with mixed auction formats and targets scaled
/// down until supply is comfortably adequate.
pub fn small_mixed(max_items: usize, max_contracts: usize, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max_items.max(1));
    let n = rng.random_range(1..=max_contracts.max(1));
    let items: Vec<ItemType> = (0..m)
        .map(|j| {
            let rate = rng.random_range(0.2..3.0);
            let auction = if rng.random_bool(0.5) { AuctionKind::FirstPrice } else { AuctionKind::SecondPrice };
            let curve = match rng.random_range(0..4) {
                0 => SupplyCurve::exponential(rng.random_range(0.3..3.0)),
                1 => SupplyCurve::hyperbolic(rng.random_range(0.3..3.0)),
                2 => SupplyCurve::bounded_uniform(rng.random_range(0.5..3.0)),
                _ => SupplyCurve::exponential(rng.random_range(0.3..3.0)),
            }
            .expect("valid parameters");
            ItemType { id: j as u64, rate, curve, auction }
        })
        .collect();
    let mut contracts: Vec<Contract> = (0..n)
        .map(|i| {
            let mut valuations = BTreeMap::new();
            let forced = rng.random_range(0..m);
            for j in 0..m {
                if j == forced || rng.random_bool(0.4) {
                    valuations.insert(j as u64, rng.random_range(0.2..2.0));
                }
            }
            Contract { id: i as u64, target: rng.random_range(0.1..1.0), valuations }
        })
        .collect();
    let mut scale = 1.0;
    loop {
        let instance = ProblemInstance::new(items.clone(), contracts.clone()).expect("valid instance");
        match instance.check_adequate_supply(0.2) {
            Ok(SupplyCheck::Adequate { .. }) => return instance,
            _ => {
                scale *= 0.5;
                for c in contracts.iter_mut() {
                    c.target *= 0.5;
                }
                assert!(scale > 1e-9, "could not make instance feasible");
            }
        }
    }
}

/// Three items, two contracts, `A_1 = {1, 2}`, `A_2 = {2, 3}`, unit rates and
/// valuations, exponential curves with the given rates.
pub fn two_contract_chain(gammas: [f64; 3], targets: [f64; 2]) -> ProblemInstance {
    let items =
        gammas.iter().enumerate().map(|(j, &g)| exp_item(j as u64 + 1, 1.0, g, AuctionKind::SecondPrice)).collect();
    let contracts = vec![
        Contract { id: 1, target: targets[0], valuations: BTreeMap::from([(1, 1.0), (2, 1.0)]) },
        Contract { id: 2, target: targets[1], valuations: BTreeMap::from([(2, 1.0), (3, 1.0)]) },
    ];
    ProblemInstance::new(items, contracts).expect("valid instance")
}
