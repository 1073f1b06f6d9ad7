//! Synthetic infrastructures and services.
//!
//! All distributions here are synthetic defaults; every generator is a pure
//! function of its parameters and seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::infrastructure::{abstract_level1, InfraError, Machine, PhysLink, PhysicalInfra, Pop};
use crate::model::{
    CostEntry, Host, HostGraph, Link, Scenario, ServiceSpec, TrafficEntry, Transition, Vnf, Vnffg,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.max > self.min {
            rng.gen_range(self.min..=self.max)
        } else {
            self.min
        }
    }

    /// Integer-valued sample, for quantities that should stay exact.
    fn sample_int(&self, rng: &mut impl Rng) -> f64 {
        let (lo, hi) = (self.min.ceil() as i64, self.max.floor() as i64);
        if hi > lo {
            rng.gen_range(lo..=hi) as f64
        } else {
            lo as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub bandwidth: f64,
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatTreeParams {
    pub k: usize,
    pub machine_capacity: BTreeMap<String, f64>,
    pub edge_link: LinkSpec,
    pub agg_link: LinkSpec,
    pub core_link: LinkSpec,
    /// Pods are dealt round-robin to domains; each pod is one NFVI-PoP.
    pub domains: usize,
    /// Operators, dealt round-robin over pods.
    pub operators: usize,
}

impl Default for FatTreeParams {
    fn default() -> Self {
        FatTreeParams {
            k: 4,
            machine_capacity: [("cpu".to_string(), 16.0), ("mem".to_string(), 64.0)]
                .into_iter()
                .collect(),
            edge_link: LinkSpec {
                bandwidth: 10_000.0,
                latency: 0.1,
            },
            agg_link: LinkSpec {
                bandwidth: 40_000.0,
                latency: 0.5,
            },
            core_link: LinkSpec {
                bandwidth: 100_000.0,
                latency: 2.0,
            },
            domains: 1,
            operators: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("fat-tree parameter k must be even and >= 2, got {0}")]
    InvalidK(usize),
    #[error("empty vnf range [{0}, {1}]")]
    EmptyRange(usize, usize),
    #[error(transparent)]
    Infra(#[from] InfraError),
}

/// Standard k-ary fat-tree: (k/2)^2 core switches, k pods of k/2 edge and
/// k/2 aggregation switches, k/2 machines per edge switch.
pub fn gen_fat_tree(params: &FatTreeParams) -> Result<PhysicalInfra, GenError> {
    let k = params.k;
    if k < 2 || !k.is_multiple_of(2) {
        return Err(GenError::InvalidK(k));
    }
    let half = k / 2;
    let mut infra = PhysicalInfra::default();
    let link = |a: &str, b: &str, spec: LinkSpec| PhysLink {
        a: a.into(),
        b: b.into(),
        bandwidth: spec.bandwidth,
        latency: spec.latency,
    };
    for c in 0..half * half {
        infra.switches.push(format!("core{c:03}"));
    }
    for pod in 0..k {
        let pop = format!("pod{pod:02}");
        infra.pops.push(Pop {
            id: pop.clone(),
            domain: format!("d{}", pod % params.domains.max(1)),
            operator: Some(format!("op{}", pod % params.operators.max(1))),
        });
        for a in 0..half {
            let agg = format!("agg{pod:02}_{a}");
            infra.switches.push(agg.clone());
            for c in 0..half {
                infra.phys_links.push(link(
                    &agg,
                    &format!("core{:03}", a * half + c),
                    params.core_link,
                ));
            }
        }
        for e in 0..half {
            let edge = format!("edge{pod:02}_{e}");
            infra.switches.push(edge.clone());
            for a in 0..half {
                infra
                    .phys_links
                    .push(link(&edge, &format!("agg{pod:02}_{a}"), params.agg_link));
            }
            for m in 0..half {
                let id = format!("m{:03}", (pod * half + e) * half + m);
                infra.phys_links.push(link(&id, &edge, params.edge_link));
                infra.machines.push(Machine {
                    id,
                    pop: pop.clone(),
                    capacity: params.machine_capacity.clone(),
                });
            }
        }
    }
    Ok(infra)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub delay_base: f64,
    pub delay_per_vnf: f64,
    pub cost_base: f64,
    pub cost_per_vnf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceParams {
    pub count: usize,
    pub vnf_min: usize,
    pub vnf_max: usize,
    /// Demand range per resource type; defines the resource types.
    pub demand: BTreeMap<String, Range>,
    pub proc_delay: Range,
    pub traffic: Range,
    /// Probability that a VNF hangs off a random earlier VNF instead of its
    /// predecessor in the chain.
    pub branch_prob: f64,
    pub budgets: Budgets,
}

impl Default for ServiceParams {
    fn default() -> Self {
        ServiceParams {
            count: 3,
            vnf_min: 5,
            vnf_max: 10,
            demand: [
                ("cpu".to_string(), Range::new(1.0, 4.0)),
                ("mem".to_string(), Range::new(2.0, 16.0)),
            ]
            .into_iter()
            .collect(),
            proc_delay: Range::new(0.5, 5.0),
            traffic: Range::new(10.0, 200.0),
            branch_prob: 0.2,
            budgets: Budgets {
                delay_base: 20.0,
                delay_per_vnf: 12.0,
                cost_base: 50.0,
                cost_per_vnf: 40.0,
            },
        }
    }
}

/// Random chain-with-branches services over disjoint VNF sets.
pub fn gen_services(
    params: &ServiceParams,
    seed: u64,
) -> Result<(Vnffg, Vec<ServiceSpec>), GenError> {
    if params.vnf_min > params.vnf_max {
        return Err(GenError::EmptyRange(params.vnf_min, params.vnf_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vnffg = Vnffg::default();
    let mut services = Vec::new();
    for s in 0..params.count {
        let size = rng.gen_range(params.vnf_min..=params.vnf_max);
        let ids: Vec<String> = (0..size).map(|j| format!("s{s}v{j:02}")).collect();
        for id in &ids {
            vnffg.vnfs.push(Vnf {
                id: id.clone(),
                demand: params
                    .demand
                    .iter()
                    .map(|(r, range)| (r.clone(), range.sample_int(&mut rng)))
                    .collect(),
                proc_delay: round3(params.proc_delay.sample(&mut rng)),
            });
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); size];
        for j in 1..size {
            let parent = if j >= 2 && rng.gen_bool(params.branch_prob) {
                rng.gen_range(0..j - 1)
            } else {
                j - 1
            };
            children[parent].push(j);
        }
        let mut transitions = Vec::new();
        for (p, kids) in children.iter().enumerate() {
            for &c in kids {
                vnffg.traffic.push(TrafficEntry {
                    from: ids[p].clone(),
                    to: ids[c].clone(),
                    rate: round3(params.traffic.sample(&mut rng)),
                });
                transitions.push(Transition {
                    from: ids[p].clone(),
                    to: ids[c].clone(),
                    probability: 1.0 / kids.len() as f64,
                });
            }
        }
        let b = &params.budgets;
        services.push(ServiceSpec {
            id: format!("s{s}"),
            visits: ids.iter().map(|id| (id.clone(), 1.0)).collect(),
            transitions,
            max_delay: b.delay_base + b.delay_per_vnf * size as f64,
            max_cost: b.cost_base + b.cost_per_vnf * size as f64,
        });
    }
    Ok((vnffg, services))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Per-operator price ranges for κ(h, v); hosts of unknown operators use `default`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pricing {
    pub per_operator: BTreeMap<String, Range>,
    pub default: Range,
}

impl Default for Pricing {
    fn default() -> Self {
        Pricing {
            per_operator: [
                ("op0".to_string(), Range::new(1.0, 10.0)),
                ("op1".to_string(), Range::new(3.0, 15.0)),
            ]
            .into_iter()
            .collect(),
            default: Range::new(1.0, 10.0),
        }
    }
}

pub fn gen_costs(hosts: &[Host], vnfs: &[Vnf], pricing: &Pricing, seed: u64) -> Vec<CostEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(hosts.len() * vnfs.len());
    for h in hosts {
        let range = pricing
            .per_operator
            .get(&h.operator)
            .unwrap_or(&pricing.default);
        for v in vnfs {
            out.push(CostEntry {
                host: h.id.clone(),
                vnf: v.id.clone(),
                cost: round3(range.sample(&mut rng)),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReferenceParams {
    pub fat_tree: FatTreeParams,
    pub services: ServiceParams,
    pub pricing: Pricing,
}

/// Fat-tree at machine granularity plus generated services and costs.
pub fn reference_scenario(params: &ReferenceParams, seed: u64) -> Result<Scenario, GenError> {
    let infra = gen_fat_tree(&params.fat_tree)?;
    let (vnffg, services) = gen_services(&params.services, seed)?;
    let mut host_graph = abstract_level1(&infra, &[])?;
    host_graph.costs = gen_costs(
        &host_graph.hosts,
        &vnffg.vnfs,
        &params.pricing,
        seed.wrapping_add(1),
    );
    let mut resource_types: Vec<String> = params.services.demand.keys().cloned().collect();
    for r in params.fat_tree.machine_capacity.keys() {
        if !resource_types.contains(r) {
            resource_types.push(r.clone());
        }
    }
    Ok(Scenario {
        resource_types,
        vnffg,
        host_graph,
        services,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub hosts: (usize, usize),
    pub vnfs: (usize, usize),
    pub domains: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            hosts: (4, 16),
            vnfs: (3, 12),
            domains: 1,
        }
    }
}

/// Small randomized scenario: hosts scattered in a unit square, fully meshed
/// with delay proportional to distance, and 1-3 chain services.
pub fn random_scenario(params: &RandomParams, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_hosts = rng.gen_range(params.hosts.0..=params.hosts.1);
    let total_vnfs = rng.gen_range(params.vnfs.0..=params.vnfs.1);
    let n_services = rng.gen_range(1..=3usize).min(total_vnfs);

    let mut sizes = vec![1usize; n_services];
    for _ in n_services..total_vnfs {
        let s = rng.gen_range(0..n_services);
        sizes[s] += 1;
    }

    let mut vnffg = Vnffg::default();
    let mut services = Vec::new();
    for (s, &size) in sizes.iter().enumerate() {
        let sp = ServiceParams {
            count: 1,
            vnf_min: size,
            vnf_max: size,
            demand: [
                ("cpu".to_string(), Range::new(1.0, 6.0)),
                ("mem".to_string(), Range::new(1.0, 8.0)),
            ]
            .into_iter()
            .collect(),
            proc_delay: Range::new(0.5, 3.0),
            traffic: Range::new(1.0, 20.0),
            branch_prob: 0.2,
            budgets: Budgets {
                delay_base: 10.0,
                delay_per_vnf: 6.0,
                cost_base: 20.0,
                cost_per_vnf: 15.0,
            },
        };
        let (g, svc) = gen_services(&sp, rng.gen()).expect("nonempty range");
        let rename = |id: &str| id.replacen("s0", &format!("s{s}"), 1);
        vnffg.vnfs.extend(g.vnfs.into_iter().map(|mut v| {
            v.id = rename(&v.id);
            v
        }));
        vnffg.traffic.extend(g.traffic.into_iter().map(|mut t| {
            t.from = rename(&t.from);
            t.to = rename(&t.to);
            t
        }));
        services.extend(svc.into_iter().map(|mut sv| {
            sv.id = format!("s{s}");
            sv.visits = sv
                .visits
                .into_iter()
                .map(|(k, v)| (rename(&k), v))
                .collect();
            for t in &mut sv.transitions {
                t.from = rename(&t.from);
                t.to = rename(&t.to);
            }
            sv
        }));
    }

    let coords: Vec<(f64, f64)> = (0..n_hosts)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let hosts: Vec<Host> = (0..n_hosts)
        .map(|i| Host {
            id: format!("h{i:02}"),
            capacity: [
                (
                    "cpu".to_string(),
                    Range::new(6.0, 16.0).sample_int(&mut rng),
                ),
                (
                    "mem".to_string(),
                    Range::new(8.0, 24.0).sample_int(&mut rng),
                ),
            ]
            .into_iter()
            .collect(),
            domain: format!("d{}", i % params.domains.max(1)),
            operator: format!("op{}", i % 2),
        })
        .collect();
    let mut links = Vec::new();
    for i in 0..n_hosts {
        for j in 0..n_hosts {
            if i != j {
                let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
                let delay = round3(0.2 + 5.0 * (dx * dx + dy * dy).sqrt());
                links.push(Link {
                    from: hosts[i].id.clone(),
                    to: hosts[j].id.clone(),
                    bandwidth: Range::new(20.0, 60.0).sample_int(&mut rng),
                    delay,
                });
            }
        }
    }
    let costs = gen_costs(&hosts, &vnffg.vnfs, &Pricing::default(), rng.gen());
    Scenario {
        resource_types: vec!["cpu".into(), "mem".into()],
        vnffg,
        host_graph: HostGraph {
            hosts,
            links,
            costs,
        },
        services,
    }
}
