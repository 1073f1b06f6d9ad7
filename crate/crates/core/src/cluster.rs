//! Cluster-based placement.
//!
//! The VNFFG and the host graph are both clustered into `k` groups by
//! single-linkage agglomeration: VNF clusters joined by the heaviest traffic
//! edge merge first, host clusters joined by the lowest-delay link merge
//! first. Clusters are then paired by size rank and every VNF, taken in
//! order of decreasing processing delay, goes to the cheapest fitting host
//! of its paired host cluster. Equal-cost candidates are separated by the
//! resulting maximum utilization over all hosts and resources.
//!
//! In multi-domain host graphs, links between domains are stretched by
//! `interdomain_weight` before clustering and foreign hosts have their cost
//! scaled by `foreign_cost_factor`; when that factor is above one a foreign
//! host is only used if no local host fits. If the greedy pass still ends on
//! a foreign host, or fails, a bounded depth-first search over local hosts
//! looks for a feasible local-only placement before giving up.

use std::cmp::Ordering;

use serde::Serialize;

use crate::evaluator::{feasible, host_utilization};
use crate::model::{within, Instance};
use crate::outcome::{finalize, Outcome, PlaceError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Representatives (smallest member index) of the merged clusters.
    pub a: usize,
    pub b: usize,
    /// Linkage value at which the merge happened.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Cluster index of every node; clusters are numbered by smallest member.
    pub cluster_of: Vec<usize>,
    pub k: usize,
    pub merge_trace: Vec<Merge>,
}

impl Clustering {
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.cluster_of.len())
            .filter(|&i| self.cluster_of[i] == c)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.cluster_of {
            sizes[c] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterParams {
    pub k: usize,
    pub interdomain_weight: f64,
    pub foreign_cost_factor: f64,
    /// Home domain; defaults to the domain of the host with the smallest id.
    pub local_domain: Option<String>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            k: 1,
            interdomain_weight: 10.0,
            foreign_cost_factor: 10.0,
            local_domain: None,
        }
    }
}

impl ClusterParams {
    pub fn with_k(k: usize) -> Self {
        ClusterParams {
            k,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<(), PlaceError> {
        if self.k == 0 {
            return Err(PlaceError::InvalidParams(
                "cluster count must be at least 1".into(),
            ));
        }
        if self.interdomain_weight.is_nan()
            || self.foreign_cost_factor.is_nan()
            || self.interdomain_weight < 1.0
            || self.foreign_cost_factor < 1.0
        {
            return Err(PlaceError::InvalidParams(
                "domain multipliers must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn local_domain<'a>(&'a self, inst: &'a Instance) -> Option<&'a str> {
        self.local_domain
            .as_deref()
            .or_else(|| inst.hosts.first().map(|h| h.domain.as_str()))
    }
}

#[derive(Clone, Copy)]
enum Prefer {
    Max,
    Min,
}

impl Prefer {
    fn better(self, x: f64, y: f64) -> bool {
        match self {
            Prefer::Max => x > y,
            Prefer::Min => x < y,
        }
    }

    fn combine(self, x: f64, y: f64) -> f64 {
        match self {
            Prefer::Max => x.max(y),
            Prefer::Min => x.min(y),
        }
    }
}

/// Single-linkage agglomeration over a symmetric `n x n` linkage matrix.
fn agglomerate(n: usize, k: usize, mut linkage: Vec<f64>, prefer: Prefer) -> Clustering {
    // Cluster `a` always absorbs `b > a`, so an active index is the smallest
    // member of its cluster and scanning in index order breaks ties by the
    // smallest member ids.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut trace = Vec::with_capacity(n.saturating_sub(k));
    for _ in 0..n.saturating_sub(k) {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in a + 1..n {
                if !active[b] {
                    continue;
                }
                let w = linkage[a * n + b];
                let take = match best {
                    None => true,
                    Some((_, _, bw)) => prefer.better(w, bw),
                };
                if take {
                    best = Some((a, b, w));
                }
            }
        }
        let (a, b, w) = best.expect("at least two active clusters");
        active[b] = false;
        parent[b] = a;
        for c in 0..n {
            if active[c] && c != a {
                let v = prefer.combine(linkage[a * n + c], linkage[b * n + c]);
                linkage[a * n + c] = v;
                linkage[c * n + a] = v;
            }
        }
        trace.push(Merge { a, b, weight: w });
    }
    let find = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut cluster_of = vec![0; n];
    for i in 0..n {
        let r = find(i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        cluster_of[i] = label[r];
    }
    Clustering {
        cluster_of,
        k: next,
        merge_trace: trace,
    }
}

/// Groups VNFs so that heavy traffic stays inside clusters.
pub fn cluster_vnffg(inst: &Instance, k: usize) -> Result<Clustering, PlaceError> {
    let n = inst.n_vnfs();
    if k == 0 {
        return Err(PlaceError::InvalidParams(
            "cluster count must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(PlaceError::KTooLarge { k, limit: n });
    }
    let mut w = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                w[a * n + b] = inst.traffic(a, b) + inst.traffic(b, a);
            }
        }
    }
    Ok(agglomerate(n, k, w, Prefer::Max))
}

/// Groups hosts so that low-delay links stay inside clusters.
pub fn cluster_hosts(
    inst: &Instance,
    k: usize,
    params: &ClusterParams,
) -> Result<Clustering, PlaceError> {
    let n = inst.n_hosts();
    if k == 0 {
        return Err(PlaceError::InvalidParams(
            "cluster count must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(PlaceError::KTooLarge { k, limit: n });
    }
    let mut d = vec![f64::INFINITY; n * n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut delay = inst.link_delay(a, b).min(inst.link_delay(b, a));
            if inst.hosts[a].domain != inst.hosts[b].domain {
                delay *= params.interdomain_weight;
            }
            d[a * n + b] = delay;
        }
    }
    Ok(agglomerate(n, k, d, Prefer::Min))
}

/// Resource indices ordered by scenario-wide pressure (demand / capacity).
fn dominance_order(inst: &Instance) -> Vec<usize> {
    let pressure: Vec<f64> = (0..inst.n_resources())
        .map(|r| {
            let demand: f64 = inst.vnfs.iter().map(|v| v.demand[r]).sum();
            let cap: f64 = inst.hosts.iter().map(|h| h.capacity[r]).sum();
            if cap > 0.0 {
                demand / cap
            } else if demand > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..inst.n_resources()).collect();
    order.sort_by(|&a, &b| pressure[b].total_cmp(&pressure[a]).then(a.cmp(&b)));
    order
}

fn rank_clusters(c: &Clustering, totals: impl Fn(usize) -> Vec<f64>) -> Vec<usize> {
    let keyed: Vec<(Vec<f64>, usize, usize)> = (0..c.k)
        .map(|i| {
            let members = c.members(i);
            let key = members.iter().fold(None::<Vec<f64>>, |acc, &m| {
                let t = totals(m);
                Some(match acc {
                    None => t,
                    Some(a) => a.iter().zip(&t).map(|(x, y)| x + y).collect(),
                })
            });
            (key.unwrap_or_default(), members[0], i)
        })
        .collect();
    let mut order: Vec<&(Vec<f64>, usize, usize)> = keyed.iter().collect();
    order.sort_by(|x, y| {
        for (a, b) in x.0.iter().zip(&y.0) {
            match b.total_cmp(a) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        x.1.cmp(&y.1)
    });
    order.into_iter().map(|x| x.2).collect()
}

/// Pairs the i-th largest VNF cluster (by demand) with the i-th largest host
/// cluster (by capacity). Returns `matching[vnf_cluster] = host_cluster`.
pub fn match_clusters(
    vc: &Clustering,
    hc: &Clustering,
    inst: &Instance,
) -> Result<Vec<usize>, PlaceError> {
    if vc.k != hc.k {
        return Err(PlaceError::InvalidParams(format!(
            "cluster counts differ: {} vnf clusters, {} host clusters",
            vc.k, hc.k
        )));
    }
    let order = dominance_order(inst);
    let vnf_rank = rank_clusters(vc, |v| {
        order.iter().map(|&r| inst.vnfs[v].demand[r]).collect()
    });
    let host_rank = rank_clusters(hc, |h| {
        order.iter().map(|&r| inst.hosts[h].capacity[r]).collect()
    });
    let mut matching = vec![0; vc.k];
    for (vcl, hcl) in vnf_rank.into_iter().zip(host_rank) {
        matching[vcl] = hcl;
    }
    Ok(matching)
}

/// Cost-greedy assignment with load-balancing tie-break.
pub fn assign(
    vc: &Clustering,
    hc: &Clustering,
    matching: &[usize],
    inst: &Instance,
    params: &ClusterParams,
) -> Result<Outcome, PlaceError> {
    let nh = inst.n_hosts();
    let local = params.local_domain(inst);
    let is_local = |h: usize| local.is_none_or(|d| inst.hosts[h].domain == d);
    let multi_domain = (0..nh).any(|h| !is_local(h));
    let local_first = multi_domain && params.foreign_cost_factor > 1.0;

    let mut order: Vec<usize> = (0..inst.n_vnfs()).collect();
    order.sort_by(|&a, &b| {
        inst.vnfs[b]
            .proc_delay
            .total_cmp(&inst.vnfs[a].proc_delay)
            .then(a.cmp(&b))
    });

    let mut load = vec![vec![0.0; inst.n_resources()]; nh];
    let mut util = vec![0.0; nh];
    let mut assignment = vec![usize::MAX; inst.n_vnfs()];

    for &v in &order {
        let demand = &inst.vnfs[v].demand;
        let target = matching[vc.cluster_of[v]];
        let fits = |h: usize| {
            inst.cost(h, v).is_finite()
                && (0..inst.n_resources())
                    .all(|r| within(load[h][r] + demand[r], inst.hosts[h].capacity[r]))
        };
        let in_cluster = |h: usize| hc.cluster_of[h] == target;
        let tiers: Vec<Box<dyn Fn(usize) -> bool>> = if local_first {
            vec![
                Box::new(|h| in_cluster(h) && is_local(h)),
                Box::new(is_local),
                Box::new(|h| in_cluster(h) && !is_local(h)),
                Box::new(|_| true),
            ]
        } else {
            vec![Box::new(in_cluster), Box::new(|_| true)]
        };

        let mut chosen = None;
        for tier in &tiers {
            let mut best: Option<(f64, f64, usize)> = None;
            for h in (0..nh).filter(|&h| tier(h) && fits(h)) {
                let factor = if is_local(h) {
                    1.0
                } else {
                    params.foreign_cost_factor
                };
                let cost = inst.cost(h, v) * factor;
                let mut after = load[h].clone();
                for (r, q) in demand.iter().enumerate() {
                    after[r] += q;
                }
                let own = (0..inst.n_resources())
                    .filter(|&r| after[r] > 0.0)
                    .map(|r| after[r] / inst.hosts[h].capacity[r])
                    .fold(0.0, f64::max);
                let others = (0..nh)
                    .filter(|&o| o != h)
                    .map(|o| util[o])
                    .fold(0.0, f64::max);
                let resulting = own.max(others);
                let better =
                    best.is_none_or(|(bc, bu, _)| cost < bc || (cost == bc && resulting < bu));
                if better {
                    best = Some((cost, resulting, h));
                }
            }
            if let Some((_, _, h)) = best {
                chosen = Some(h);
                break;
            }
        }
        let Some(h) = chosen else {
            return Err(PlaceError::NoHostFits {
                vnf: inst.vnfs[v].id.clone(),
            });
        };
        for (r, q) in demand.iter().enumerate() {
            load[h][r] += q;
        }
        util[h] = host_utilization(inst, &load, h);
        assignment[v] = h;
    }
    if local_first && (assignment.iter().any(|&h| !is_local(h)) || !feasible(inst, &assignment)) {
        if let Some(local_only) = search_local(inst, &order, &is_local) {
            assignment = local_only;
        }
    }
    finalize(inst, assignment)
}

/// Node budget of the local-only fallback search.
const LOCAL_SEARCH_BUDGET: usize = 1_000_000;

/// Depth-first search for a feasible placement on local hosts only, taking
/// VNFs in `order` and trying the cheapest fitting host first. Gives up
/// after `LOCAL_SEARCH_BUDGET` nodes.
fn search_local(
    inst: &Instance,
    order: &[usize],
    is_local: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    struct Dfs<'a> {
        inst: &'a Instance,
        order: &'a [usize],
        candidates: Vec<Vec<usize>>,
        load: Vec<Vec<f64>>,
        assignment: Vec<usize>,
        budget: usize,
    }

    impl Dfs<'_> {
        fn go(&mut self, depth: usize) -> bool {
            if depth == self.order.len() {
                return feasible(self.inst, &self.assignment);
            }
            let v = self.order[depth];
            let demand = &self.inst.vnfs[v].demand;
            for i in 0..self.candidates[depth].len() {
                if self.budget == 0 {
                    return false;
                }
                self.budget -= 1;
                let h = self.candidates[depth][i];
                let cap = &self.inst.hosts[h].capacity;
                if !(0..demand.len()).all(|r| within(self.load[h][r] + demand[r], cap[r])) {
                    continue;
                }
                for (r, q) in demand.iter().enumerate() {
                    self.load[h][r] += q;
                }
                self.assignment[v] = h;
                if self.go(depth + 1) {
                    return true;
                }
                for (r, q) in demand.iter().enumerate() {
                    self.load[h][r] -= q;
                }
            }
            false
        }
    }

    let candidates = order
        .iter()
        .map(|&v| {
            let mut hs: Vec<usize> = (0..inst.n_hosts())
                .filter(|&h| is_local(h) && inst.cost(h, v).is_finite())
                .collect();
            hs.sort_by(|&a, &b| inst.cost(a, v).total_cmp(&inst.cost(b, v)).then(a.cmp(&b)));
            hs
        })
        .collect();
    let mut dfs = Dfs {
        inst,
        order,
        candidates,
        load: vec![vec![0.0; inst.n_resources()]; inst.n_hosts()],
        assignment: vec![usize::MAX; inst.n_vnfs()],
        budget: LOCAL_SEARCH_BUDGET,
    };
    dfs.go(0).then_some(dfs.assignment)
}

/// Full cluster-based pipeline.
pub fn place_clustered(inst: &Instance, params: &ClusterParams) -> Result<Outcome, PlaceError> {
    params.check()?;
    if inst.n_vnfs() == 0 {
        return finalize(inst, Vec::new());
    }
    let limit = inst.n_vnfs().min(inst.n_hosts());
    if params.k > limit {
        return Err(PlaceError::KTooLarge { k: params.k, limit });
    }
    let vc = cluster_vnffg(inst, params.k)?;
    let hc = cluster_hosts(inst, params.k, params)?;
    let matching = match_clusters(&vc, &hc, inst)?;
    assign(&vc, &hc, &matching, inst, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::t1;
    use crate::model::*;
    use std::collections::BTreeMap;

    fn cpu(q: f64) -> BTreeMap<String, f64> {
        [("cpu".to_string(), q)].into_iter().collect()
    }

    fn three_vnfs() -> Instance {
        let mut sc = t1();
        sc.vnffg.vnfs.push(Vnf {
            id: "c".into(),
            demand: cpu(1.0),
            proc_delay: 1.0,
        });
        sc.vnffg.traffic = vec![
            TrafficEntry {
                from: "a".into(),
                to: "b".into(),
                rate: 5.0,
            },
            TrafficEntry {
                from: "b".into(),
                to: "c".into(),
                rate: 1.0,
            },
        ];
        for h in ["h1", "h2"] {
            sc.host_graph.costs.push(CostEntry {
                host: h.into(),
                vnf: "c".into(),
                cost: 1.0,
            });
        }
        validate_scenario(sc).unwrap()
    }

    fn three_hosts(domains: [&str; 3]) -> Instance {
        let mut sc = t1();
        sc.host_graph.hosts = (0..3)
            .map(|i| Host {
                id: format!("h{}", i + 1),
                capacity: cpu(20.0),
                domain: domains[i].into(),
                operator: "op".into(),
            })
            .collect();
        let mut links = Vec::new();
        for (a, b, d) in [("h1", "h2", 1.0), ("h2", "h3", 9.0)] {
            links.push(Link {
                from: a.into(),
                to: b.into(),
                bandwidth: 10.0,
                delay: d,
            });
            links.push(Link {
                from: b.into(),
                to: a.into(),
                bandwidth: 10.0,
                delay: d,
            });
        }
        sc.host_graph.links = links;
        sc.host_graph.costs.extend(["a", "b"].map(|v| CostEntry {
            host: "h3".into(),
            vnf: v.into(),
            cost: 3.0,
        }));
        validate_scenario(sc).unwrap()
    }

    #[test]
    fn vnffg_clustering_merges_heaviest_edge() {
        let inst = three_vnfs();
        let c = cluster_vnffg(&inst, 2).unwrap();
        assert_eq!(c.cluster_of, vec![0, 0, 1]);
        assert_eq!(
            c.merge_trace,
            vec![Merge {
                a: 0,
                b: 1,
                weight: 5.0
            }]
        );
        let all = cluster_vnffg(&inst, 3).unwrap();
        assert_eq!(all.cluster_of, vec![0, 1, 2]);
        assert!(all.merge_trace.is_empty());
        let one = cluster_vnffg(&inst, 1).unwrap();
        assert_eq!(one.cluster_of, vec![0, 0, 0]);
        assert_eq!(one.merge_trace.len(), 2);
        assert!(matches!(
            cluster_vnffg(&inst, 4),
            Err(PlaceError::KTooLarge { .. })
        ));
    }

    #[test]
    fn host_clustering_merges_lowest_delay() {
        let inst = three_hosts(["d0", "d0", "d0"]);
        let p = ClusterParams::default();
        let c = cluster_hosts(&inst, 2, &p).unwrap();
        assert_eq!(c.cluster_of, vec![0, 0, 1]);
        assert_eq!(
            cluster_hosts(&inst, 3, &p).unwrap().cluster_of,
            vec![0, 1, 2]
        );
    }

    #[test]
    fn interdomain_weight_reorders_merges() {
        let inst = three_hosts(["d0", "d1", "d1"]);
        let p = ClusterParams {
            interdomain_weight: 20.0,
            ..Default::default()
        };
        let c = cluster_hosts(&inst, 2, &p).unwrap();
        assert_eq!(c.cluster_of, vec![0, 1, 1]);
        assert_eq!(c.merge_trace[0].weight, 9.0);
    }

    #[test]
    fn matching_by_rank() {
        let mut sc = t1();
        sc.vnffg.vnfs[1].demand = cpu(12.0);
        sc.host_graph.hosts[0].capacity = cpu(8.0);
        sc.host_graph.hosts[1].capacity = cpu(20.0);
        let inst = validate_scenario(sc).unwrap();
        let vc = Clustering {
            cluster_of: vec![0, 1],
            k: 2,
            merge_trace: vec![],
        };
        let hc = Clustering {
            cluster_of: vec![0, 1],
            k: 2,
            merge_trace: vec![],
        };
        // a=4 -> h1 (8), b=12 -> h2 (20)
        assert_eq!(match_clusters(&vc, &hc, &inst).unwrap(), vec![0, 1]);

        let inst = validate_scenario(t1()).unwrap();
        let one = Clustering {
            cluster_of: vec![0, 0],
            k: 1,
            merge_trace: vec![],
        };
        assert_eq!(match_clusters(&one, &one, &inst).unwrap(), vec![0]);
    }

    #[test]
    fn matching_ties_by_smallest_member() {
        let mut sc = t1();
        sc.vnffg.vnfs[1].demand = cpu(4.0);
        sc.host_graph.hosts[1].capacity = cpu(12.0);
        let inst = validate_scenario(sc).unwrap();
        let c = Clustering {
            cluster_of: vec![0, 1],
            k: 2,
            merge_trace: vec![],
        };
        assert_eq!(match_clusters(&c, &c, &inst).unwrap(), vec![0, 1]);
    }

    #[test]
    fn t1_single_cluster() {
        let inst = validate_scenario(t1()).unwrap();
        let out = place_clustered(&inst, &ClusterParams::with_k(1)).unwrap();
        assert_eq!(out.assignment, vec![0, 0]);
        assert_eq!(out.metrics.total_cost, 2.0);
        assert_eq!(out.metrics.total_delay, 2.0);
    }

    #[test]
    fn t1_two_clusters() {
        let inst = validate_scenario(t1()).unwrap();
        let out = place_clustered(&inst, &ClusterParams::with_k(2)).unwrap();
        assert_eq!(out.assignment, vec![1, 0]);
        assert_eq!(out.metrics.total_cost, 3.0);
        assert_eq!(out.metrics.total_delay, 4.0);
    }

    #[test]
    fn load_balance_tie_break() {
        let mut sc = t1();
        for c in &mut sc.host_graph.costs {
            c.cost = 1.0;
        }
        sc.host_graph.hosts[1].capacity = cpu(12.0);
        let inst = validate_scenario(sc).unwrap();
        let out = place_clustered(&inst, &ClusterParams::with_k(1)).unwrap();
        assert_eq!(out.assignment, vec![0, 1]);
    }

    #[test]
    fn oversized_vnf_fits_nowhere() {
        let mut sc = t1();
        sc.vnffg.vnfs[0].demand = cpu(99.0);
        let inst = validate_scenario(sc).unwrap();
        assert_eq!(
            place_clustered(&inst, &ClusterParams::with_k(1)),
            Err(PlaceError::NoHostFits { vnf: "a".into() })
        );
    }

    #[test]
    fn bad_params() {
        let inst = validate_scenario(t1()).unwrap();
        assert!(matches!(
            place_clustered(&inst, &ClusterParams::with_k(0)),
            Err(PlaceError::InvalidParams(_))
        ));
        assert!(matches!(
            place_clustered(&inst, &ClusterParams::with_k(3)),
            Err(PlaceError::KTooLarge { .. })
        ));
        let p = ClusterParams {
            foreign_cost_factor: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            place_clustered(&inst, &p),
            Err(PlaceError::InvalidParams(_))
        ));
    }

    #[test]
    fn foreign_hosts_only_when_needed() {
        let mut sc = t1();
        sc.host_graph.hosts[1].domain = "d1".into();
        for c in &mut sc.host_graph.costs {
            c.cost = if c.host == "h2" { 0.1 } else { 1.0 };
        }
        let inst = validate_scenario(sc.clone()).unwrap();
        let p = ClusterParams {
            k: 2,
            local_domain: Some("d0".into()),
            ..Default::default()
        };
        let out = place_clustered(&inst, &p).unwrap();
        assert_eq!(out.hosts_used(&inst), vec!["h1"]);

        sc.host_graph.hosts[0].capacity = cpu(8.0);
        let inst = validate_scenario(sc).unwrap();
        let out = place_clustered(&inst, &p).unwrap();
        assert_eq!(out.hosts_used(&inst), vec!["h1", "h2"]);
    }
}
