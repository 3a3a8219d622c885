use std::collections::BTreeMap;

use bidopt::*;

fn exp_item(id: u64, rate: f64) -> ItemType {
    ItemType { id, rate, curve: SupplyCurve::exponential(1.0).unwrap(), auction: AuctionKind::SecondPrice }
}

fn contract(id: u64, target: f64, vals: &[(u64, f64)]) -> Contract {
    Contract { id, target, valuations: vals.iter().copied().collect::<BTreeMap<_, _>>() }
}

#[test]
fn validation_errors() {
    let dup = ProblemInstance::new(vec![exp_item(1, 1.0), exp_item(1, 1.0)], vec![contract(0, 0.1, &[(1, 1.0)])]);
    assert!(matches!(dup, Err(ModelError::DuplicateItem(1))));
    let unknown = ProblemInstance::new(vec![exp_item(1, 1.0)], vec![contract(0, 0.1, &[(2, 1.0)])]);
    assert!(matches!(unknown, Err(ModelError::UnknownItem { .. })));
    let empty = ProblemInstance::new(vec![exp_item(1, 1.0)], vec![contract(0, 0.1, &[(1, 0.0)])]);
    assert!(matches!(empty, Err(ModelError::EmptyUsefulSet(0))));
    let no_contracts = ProblemInstance::new(vec![exp_item(1, 1.0)], vec![]);
    assert!(matches!(no_contracts, Err(ModelError::NoContracts)));
    let bad_rate = ProblemInstance::new(vec![exp_item(1, -1.0)], vec![contract(0, 0.1, &[(1, 1.0)])]);
    assert!(bad_rate.is_err());
}

#[test]
fn edges_are_sorted_and_indexed() {
    let inst = ProblemInstance::new(
        vec![exp_item(5, 1.0), exp_item(3, 2.0)],
        vec![contract(9, 0.1, &[(3, 1.0), (5, 0.5)]), contract(2, 0.2, &[(5, 2.0)])],
    )
    .unwrap();
    let edges = inst.edges();
    assert_eq!(edges.len(), 3);
    assert!(edges.windows(2).all(|w| (w[0].contract, w[0].item) < (w[1].contract, w[1].item)));
    for (k, e) in edges.iter().enumerate() {
        assert!(inst.item_edges(e.item).contains(&k));
        assert!(inst.contract_edges(e.contract).contains(&k));
    }
    assert_eq!(inst.capacity(1), 2.0);

    let mut buf = Vec::new();
    inst.write_edges_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn adequate_supply_has_valid_allocation() {
    let inst = generate::small_mixed(20, 5, 8);
    let margin = 1e-6;
    match inst.check_adequate_supply(margin).unwrap() {
        SupplyCheck::Adequate { allocation } => {
            let edges = inst.edges();
            for i in 0..inst.num_contracts() {
                let got: f64 = inst.contract_edges(i).iter().map(|&k| edges[k].value * allocation[k]).sum();
                assert!(got >= inst.target(i) * (1.0 - 1e-7), "contract {i}: {got}");
            }
            for j in 0..inst.num_items() {
                let used: f64 = inst.item_edges(j).iter().map(|&k| allocation[k]).sum();
                assert!(used <= inst.capacity(j) * (1.0 + 1e-7));
            }
        }
        SupplyCheck::Inadequate(_) => panic!("generator promises adequate supply"),
    }
}

#[test]
fn oversold_instance_has_certificate() {
    // two contracts share one item with unit capacity but need 1.2 in total
    let inst = ProblemInstance::new(
        vec![exp_item(1, 1.0), exp_item(2, 0.1)],
        vec![contract(0, 0.6, &[(1, 1.0)]), contract(1, 0.6, &[(1, 1.0), (2, 1.0)])],
    )
    .unwrap();
    let SupplyCheck::Inadequate(cert) = inst.check_adequate_supply(1e-6).unwrap() else {
        panic!("instance is oversold");
    };
    assert!(cert.verify(&inst, 1e-6));
    assert!(cert.weights.iter().all(|&y| y >= 0.0));
    let (demand, capacity) = inst.weighted_balance(&cert.weights, 1e-6);
    assert!(demand > capacity);
    // a uniform weight vector is not a certificate for a feasible instance
    let feasible = generate::small_mixed(10, 3, 1);
    assert!(!bidopt::InfeasibilityCertificate {
        weights: vec![1.0; feasible.num_contracts()],
        weighted_demand: 0.0,
        weighted_capacity: 0.0
    }
    .verify(&feasible, 1e-6));
}

#[test]
fn json_round_trip() {
    let inst = generate::small_mixed(8, 3, 4);
    let text = serde_json::to_string(&inst).unwrap();
    let back: ProblemInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&inst).unwrap());
    let bad = r#"{"items": [], "contracts": [{"id": 1, "target": 1, "valuations": {"3": 1}}]}"#;
    assert!(serde_json::from_str::<ProblemInstance>(bad).is_err());
}
