//! Constraint checks and objective metrics shared by every orchestrator.
//!
//! Assignments are dense: `assignment[v]` is the host index of VNF `v`.

use serde::Serialize;

use crate::model::{within, Instance};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Capacity {
        host: String,
        resource: String,
        load: f64,
        capacity: f64,
    },
    Link {
        from: String,
        to: String,
        flow: f64,
        capacity: f64,
    },
    Delay {
        service: String,
        delay: f64,
        max_delay: f64,
    },
    Cost {
        service: String,
        cost: f64,
        max_cost: f64,
    },
}

/// Every constraint violated by a placement.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Objective used to rank complete placements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Cost,
    Delay,
    /// `cost_weight * cost + delay_weight * delay`.
    Weighted {
        cost_weight: f64,
        delay_weight: f64,
    },
}

impl Objective {
    pub fn value(&self, inst: &Instance, assignment: &[usize]) -> f64 {
        match *self {
            Objective::Cost => total_cost(inst, assignment),
            Objective::Delay => total_delay(inst, assignment),
            Objective::Weighted {
                cost_weight,
                delay_weight,
            } => {
                cost_weight * total_cost(inst, assignment)
                    + delay_weight * total_delay(inst, assignment)
            }
        }
    }
}

/// Per-host, per-resource load of a (possibly partial) assignment.
pub(crate) fn host_loads(inst: &Instance, assignment: &[Option<usize>]) -> Vec<Vec<f64>> {
    let mut load = vec![vec![0.0; inst.n_resources()]; inst.n_hosts()];
    for (v, h) in assignment.iter().enumerate() {
        if let Some(h) = *h {
            for (r, q) in inst.vnfs[v].demand.iter().enumerate() {
                load[h][r] += q;
            }
        }
    }
    load
}

fn complete(assignment: &[usize]) -> Vec<Option<usize>> {
    assignment.iter().copied().map(Some).collect()
}

pub fn check_capacity(inst: &Instance, assignment: &[usize]) -> Vec<Violation> {
    let load = host_loads(inst, &complete(assignment));
    let mut out = Vec::new();
    for (h, host) in inst.hosts.iter().enumerate() {
        for (r, res) in inst.resources.iter().enumerate() {
            if !within(load[h][r], host.capacity[r]) {
                out.push(Violation::Capacity {
                    host: host.id.clone(),
                    resource: res.clone(),
                    load: load[h][r],
                    capacity: host.capacity[r],
                });
            }
        }
    }
    out
}

/// Aggregate inter-host flow matrix, row-major over host pairs.
pub(crate) fn link_flows(inst: &Instance, assignment: &[usize]) -> Vec<f64> {
    let nh = inst.n_hosts();
    let mut flow = vec![0.0; nh * nh];
    for &(a, b, f) in inst.traffic_edges() {
        let (ha, hb) = (assignment[a], assignment[b]);
        if ha != hb {
            flow[ha * nh + hb] += f;
        }
    }
    flow
}

pub fn check_link_capacity(inst: &Instance, assignment: &[usize]) -> Vec<Violation> {
    let nh = inst.n_hosts();
    let flow = link_flows(inst, assignment);
    let mut out = Vec::new();
    for h1 in 0..nh {
        for h2 in 0..nh {
            let f = flow[h1 * nh + h2];
            if h1 != h2 && f > 0.0 && !within(f, inst.link_bandwidth(h1, h2)) {
                out.push(Violation::Link {
                    from: inst.hosts[h1].id.clone(),
                    to: inst.hosts[h2].id.clone(),
                    flow: f,
                    capacity: inst.link_bandwidth(h1, h2),
                });
            }
        }
    }
    out
}

/// Expected delay of service `s`: processing plus propagation.
pub fn service_delay(inst: &Instance, s: usize, assignment: &[usize]) -> f64 {
    let svc = &inst.services[s];
    let mut delay = 0.0;
    for (v, &n) in svc.visits.iter().enumerate() {
        if n > 0.0 {
            delay += n * inst.vnfs[v].proc_delay;
        }
    }
    for &(v1, v2, p) in &svc.transitions {
        let weight = svc.visits[v1] * p;
        if weight > 0.0 {
            delay += weight * inst.link_delay(assignment[v1], assignment[v2]);
        }
    }
    delay
}

pub fn placement_cost(inst: &Instance, s: usize, assignment: &[usize]) -> f64 {
    let svc = &inst.services[s];
    svc.visits
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0.0)
        .map(|(v, &n)| inst.cost(assignment[v], v) * n)
        .sum()
}

pub fn total_cost(inst: &Instance, assignment: &[usize]) -> f64 {
    (0..inst.services.len())
        .map(|s| placement_cost(inst, s, assignment))
        .sum()
}

pub fn total_delay(inst: &Instance, assignment: &[usize]) -> f64 {
    (0..inst.services.len())
        .map(|s| service_delay(inst, s, assignment))
        .sum()
}

/// All four constraint families; empty report means feasible.
pub fn is_feasible(inst: &Instance, assignment: &[usize]) -> ViolationReport {
    let mut violations = check_capacity(inst, assignment);
    violations.extend(check_link_capacity(inst, assignment));
    for (s, svc) in inst.services.iter().enumerate() {
        let d = service_delay(inst, s, assignment);
        if !within(d, svc.max_delay) {
            violations.push(Violation::Delay {
                service: svc.id.clone(),
                delay: d,
                max_delay: svc.max_delay,
            });
        }
    }
    for (s, svc) in inst.services.iter().enumerate() {
        let c = placement_cost(inst, s, assignment);
        if !within(c, svc.max_cost) {
            violations.push(Violation::Cost {
                service: svc.id.clone(),
                cost: c,
                max_cost: svc.max_cost,
            });
        }
    }
    ViolationReport { violations }
}

pub fn feasible(inst: &Instance, assignment: &[usize]) -> bool {
    is_feasible(inst, assignment).is_empty()
}

/// Largest load/capacity ratio over all hosts and resources; unplaced VNFs
/// contribute nothing.
pub fn max_utilization(inst: &Instance, assignment: &[Option<usize>]) -> f64 {
    utilization_of_loads(inst, &host_loads(inst, assignment))
}

pub(crate) fn host_utilization(inst: &Instance, load: &[Vec<f64>], h: usize) -> f64 {
    let mut m: f64 = 0.0;
    for (r, &l) in load[h].iter().enumerate() {
        if l > 0.0 {
            let c = inst.hosts[h].capacity[r];
            m = m.max(if c > 0.0 { l / c } else { f64::INFINITY });
        }
    }
    m
}

pub(crate) fn utilization_of_loads(inst: &Instance, load: &[Vec<f64>]) -> f64 {
    (0..inst.n_hosts())
        .map(|h| host_utilization(inst, load, h))
        .fold(0.0, f64::max)
}

/// Summary numbers reported for a complete placement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub total_cost: f64,
    pub total_delay: f64,
    pub service_delays: Vec<(String, f64)>,
    pub service_costs: Vec<(String, f64)>,
    pub max_utilization: f64,
}

pub fn metrics(inst: &Instance, assignment: &[usize]) -> Metrics {
    let service_delays: Vec<(String, f64)> = inst
        .services
        .iter()
        .enumerate()
        .map(|(s, svc)| (svc.id.clone(), service_delay(inst, s, assignment)))
        .collect();
    let service_costs: Vec<(String, f64)> = inst
        .services
        .iter()
        .enumerate()
        .map(|(s, svc)| (svc.id.clone(), placement_cost(inst, s, assignment)))
        .collect();
    Metrics {
        total_cost: service_costs.iter().map(|x| x.1).sum(),
        total_delay: service_delays.iter().map(|x| x.1).sum(),
        service_delays,
        service_costs,
        max_utilization: max_utilization(inst, &complete(assignment)),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BruteForceError {
    #[error("search space of {size} assignments exceeds the bound {bound}")]
    SearchSpaceTooLarge { size: f64, bound: u64 },
    #[error("no feasible assignment exists")]
    Infeasible,
}

pub const DEFAULT_BRUTE_FORCE_BOUND: u64 = 1_000_000;

/// Exhaustive search. Assignments are enumerated in lexicographic order of
/// host indices, so the first minimizer found wins ties.
pub fn brute_force_place(
    inst: &Instance,
    objective: Objective,
    bound: u64,
) -> Result<(Vec<usize>, f64), BruteForceError> {
    let (nv, nh) = (inst.n_vnfs(), inst.n_hosts());
    let size = (nh as f64).powi(nv as i32);
    if size > bound as f64 {
        return Err(BruteForceError::SearchSpaceTooLarge { size, bound });
    }
    if nh == 0 && nv > 0 {
        return Err(BruteForceError::Infeasible);
    }
    let mut cur = vec![0usize; nv];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if feasible(inst, &cur) {
            let val = objective.value(inst, &cur);
            if best.as_ref().is_none_or(|(_, b)| val < *b) {
                best = Some((cur.clone(), val));
            }
        }
        // odometer increment, last VNF fastest
        let mut i = nv;
        loop {
            if i == 0 {
                return best.ok_or(BruteForceError::Infeasible);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < nh {
                break;
            }
            cur[i] = 0;
        }
    }
}
