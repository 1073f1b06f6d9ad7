use std::collections::BTreeMap;

use nfv_orch::cluster::{cluster_hosts, cluster_vnffg, place_clustered, ClusterParams};
use nfv_orch::evaluator::{
    brute_force_place, feasible, max_utilization, total_cost, total_delay, Objective,
};
use nfv_orch::ga::{evolve, GaConfig, GaObjective};
use nfv_orch::greedy::{place_min_distance, place_min_latency};
use nfv_orch::infrastructure::machine_paths;
use nfv_orch::scenario_gen::{gen_fat_tree, random_scenario, FatTreeParams, RandomParams};
use nfv_orch::{validate_scenario, Placement, Scenario};
use proptest::prelude::*;

fn small() -> RandomParams {
    RandomParams {
        hosts: (2, 6),
        vnfs: (2, 5),
        domains: 1,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Renames every host through `perm`, so that the sorted host order changes.
fn relabel(sc: &Scenario, perm: &[usize]) -> (Scenario, BTreeMap<String, String>) {
    let names: BTreeMap<String, String> = sc
        .host_graph
        .hosts
        .iter()
        .enumerate()
        .map(|(i, h)| (h.id.clone(), format!("x{:02}", perm[i])))
        .collect();
    let mut out = sc.clone();
    for h in &mut out.host_graph.hosts {
        h.id = names[&h.id].clone();
    }
    for l in &mut out.host_graph.links {
        l.from = names[&l.from].clone();
        l.to = names[&l.to].clone();
    }
    for c in &mut out.host_graph.costs {
        c.host = names[&c.host].clone();
    }
    (out, names)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_scenarios_validate_and_round_trip(seed in any::<u64>()) {
        let sc = random_scenario(&RandomParams::default(), seed);
        let text = sc.to_json();
        prop_assert_eq!(&text, &random_scenario(&RandomParams::default(), seed).to_json());
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert!(validate_scenario(back).is_ok());
    }

    #[test]
    fn metrics_ignore_host_labels(seed in any::<u64>(), shift in 1usize..16) {
        let sc = random_scenario(&small(), seed);
        let inst = validate_scenario(sc.clone()).unwrap();
        let n = inst.n_hosts();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assume!(seen.len() == n);
        let (renamed, names) = relabel(&sc, &perm);
        let other = validate_scenario(renamed).unwrap();
        let assignment: Vec<usize> = (0..inst.n_vnfs()).map(|v| (v * 3 + seed as usize) % n).collect();
        let placement = inst.placement(&assignment);
        let moved = Placement {
            assignment: placement.assignment.iter().map(|(v, h)| (v.clone(), names[h].clone())).collect(),
        };
        let a2 = other.assignment(&moved).unwrap();
        prop_assert!(close(total_delay(&inst, &assignment), total_delay(&other, &a2)));
        prop_assert!(close(total_cost(&inst, &assignment), total_cost(&other, &a2)));
        prop_assert_eq!(feasible(&inst, &assignment), feasible(&other, &a2));
    }

    #[test]
    fn utilization_grows_with_each_placed_vnf(seed in any::<u64>()) {
        let inst = validate_scenario(random_scenario(&small(), seed)).unwrap();
        let mut partial = vec![None; inst.n_vnfs()];
        let mut last = max_utilization(&inst, &partial);
        for v in 0..inst.n_vnfs() {
            partial[v] = Some((v + seed as usize) % inst.n_hosts());
            let now = max_utilization(&inst, &partial);
            prop_assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn heuristics_only_return_feasible_placements(seed in any::<u64>(), k in 1usize..4) {
        let inst = validate_scenario(random_scenario(&RandomParams::default(), seed)).unwrap();
        let mut results = vec![place_min_distance(&inst), place_min_latency(&inst)];
        if k <= inst.n_vnfs().min(inst.n_hosts()) {
            results.push(place_clustered(&inst, &ClusterParams::with_k(k)));
        }
        for out in results.into_iter().flatten() {
            prop_assert!(feasible(&inst, &out.assignment));
        }
    }

    #[test]
    fn clustering_yields_exactly_k_with_monotone_trace(seed in any::<u64>(), k in 1usize..13) {
        let inst = validate_scenario(random_scenario(&RandomParams::default(), seed)).unwrap();
        if k <= inst.n_vnfs() {
            let c = cluster_vnffg(&inst, k).unwrap();
            prop_assert_eq!(c.sizes().len(), k);
            prop_assert_eq!(c.sizes().iter().sum::<usize>(), inst.n_vnfs());
            prop_assert!(c.merge_trace.windows(2).all(|w| w[1].weight <= w[0].weight));
        }
        if k <= inst.n_hosts() {
            let c = cluster_hosts(&inst, k, &ClusterParams::with_k(k)).unwrap();
            prop_assert_eq!(c.sizes().len(), k);
            prop_assert!(c.merge_trace.windows(2).all(|w| w[1].weight >= w[0].weight));
        }
    }

    #[test]
    fn two_vnf_greedy_matches_oracle(seed in any::<u64>()) {
        let params = RandomParams { hosts: (2, 8), vnfs: (2, 2), domains: 1 };
        let inst = validate_scenario(random_scenario(&params, seed)).unwrap();
        let best = brute_force_place(&inst, Objective::Delay, u64::MAX);
        match (place_min_latency(&inst), best) {
            (Ok(out), Ok((_, d))) => prop_assert!(close(out.metrics.total_delay, d)),
            (Err(_), Err(_)) => {}
            (got, want) => prop_assert!(false, "min-latency {:?} vs oracle {:?}", got.is_ok(), want.is_ok()),
        }
        if let Ok(out) = place_min_distance(&inst) {
            prop_assert!(feasible(&inst, &out.assignment));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ga_is_deterministic_and_elitist(seed in any::<u64>(), delay in any::<bool>()) {
        let inst = validate_scenario(random_scenario(&small(), seed)).unwrap();
        let cfg = GaConfig {
            pool_size: 8,
            generations: 30,
            objective: if delay { GaObjective::Delay } else { GaObjective::Cost },
            seed,
            ..Default::default()
        };
        match (evolve(&inst, &cfg), evolve(&inst, &cfg)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                prop_assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
                prop_assert!(feasible(&inst, &a.outcome.assignment));
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "runs disagree"),
        }
    }
}

#[test]
fn fat_tree_structure() {
    for k in [2, 4, 6] {
        let infra = gen_fat_tree(&FatTreeParams {
            k,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(infra.machines.len(), k * k * k / 4);
        let paths = machine_paths(&infra).unwrap();
        for (i, row) in paths.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if i != j {
                    let p = p.expect("every machine pair is connected");
                    assert!(p.hops <= 6, "k={k}: {} hops", p.hops);
                }
            }
        }
    }
}
