//! Physical infrastructure and the host graphs derived from it.
//!
//! * Level 1 keeps every machine as a host and replaces the switch fabric by
//!   one virtual link per ordered machine pair.
//! * Level 2 aggregates machines per NFVI-PoP.
//! * Level 3 collapses everything into one capacity vector plus link
//!   statistics, for advertisement to peers only.
//!
//! A virtual link takes the delay of the minimum-latency path and the
//! bottleneck bandwidth of that same path (widest among equal-latency paths).
//! Only switches forward traffic; machines are path endpoints.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{CostEntry, Host, HostGraph, Link};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub id: String,
    pub pop: String,
    pub capacity: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pop {
    pub id: String,
    pub domain: String,
    #[serde(default)]
    pub operator: Option<String>,
}

impl Pop {
    pub fn operator(&self) -> &str {
        self.operator.as_deref().unwrap_or(&self.domain)
    }
}

/// Undirected physical link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysLink {
    pub a: String,
    pub b: String,
    /// Mbit/s.
    pub bandwidth: f64,
    /// ms.
    pub latency: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInfra {
    pub machines: Vec<Machine>,
    pub pops: Vec<Pop>,
    #[serde(default)]
    pub switches: Vec<String>,
    #[serde(default)]
    pub phys_links: Vec<PhysLink>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InfraError {
    #[error("invalid infrastructure: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("no pair of machines is connected")]
    DisconnectedInfra,
}

/// Minimum-latency path summary between two machines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub latency: f64,
    pub bottleneck: f64,
    /// Number of physical links on the path.
    pub hops: usize,
}

impl PhysicalInfra {
    pub fn validate(&self) -> Result<(), InfraError> {
        let mut errs = Vec::new();
        let mut nodes: HashMap<&str, bool> = HashMap::new();
        for m in &self.machines {
            if nodes.insert(&m.id, true).is_some() {
                errs.push(format!("duplicate node id {:?}", m.id));
            }
            if !self.pops.iter().any(|p| p.id == m.pop) {
                errs.push(format!(
                    "machine {:?} refers to unknown pop {:?}",
                    m.id, m.pop
                ));
            }
            for (r, &c) in &m.capacity {
                if !(c >= 0.0) {
                    errs.push(format!("capacity {r:?} of machine {:?} is negative", m.id));
                }
            }
        }
        for s in &self.switches {
            if nodes.insert(s, false).is_some() {
                errs.push(format!("duplicate node id {s:?}"));
            }
        }
        for l in &self.phys_links {
            for end in [&l.a, &l.b] {
                if !nodes.contains_key(end.as_str()) {
                    errs.push(format!("link endpoint {end:?} does not exist"));
                }
            }
            if !(l.bandwidth > 0.0) {
                errs.push(format!(
                    "link {:?}-{:?} bandwidth must be positive",
                    l.a, l.b
                ));
            }
            if !(l.latency >= 0.0) {
                errs.push(format!(
                    "link {:?}-{:?} latency must be nonnegative",
                    l.a, l.b
                ));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(InfraError::Invalid(errs))
        }
    }

    fn pop(&self, id: &str) -> &Pop {
        self.pops
            .iter()
            .find(|p| p.id == id)
            .expect("validated pop reference")
    }
}

/// Min-latency path summaries between every ordered machine pair, indexed
/// by position in `infra.machines`. `None` means unreachable.
pub fn machine_paths(infra: &PhysicalInfra) -> Result<Vec<Vec<Option<PathSummary>>>, InfraError> {
    infra.validate()?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    for m in &infra.machines {
        index.insert(&m.id, index.len());
    }
    let n_machines = index.len();
    for s in &infra.switches {
        index.insert(s, index.len());
    }
    let n = index.len();
    let mut adj: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
    for l in &infra.phys_links {
        let (a, b) = (index[l.a.as_str()], index[l.b.as_str()]);
        adj[a].push((b, l.latency, l.bandwidth));
        adj[b].push((a, l.latency, l.bandwidth));
    }

    let better = |x: &PathSummary, y: &PathSummary| {
        x.latency < y.latency
            || (x.latency == y.latency
                && (x.bottleneck > y.bottleneck
                    || (x.bottleneck == y.bottleneck && x.hops < y.hops)))
    };

    let mut table = vec![vec![None; n_machines]; n_machines];
    for src in 0..n_machines {
        let mut best: Vec<Option<PathSummary>> = vec![None; n];
        let mut done = vec![false; n];
        best[src] = Some(PathSummary {
            latency: 0.0,
            bottleneck: f64::INFINITY,
            hops: 0,
        });
        loop {
            let mut pick: Option<usize> = None;
            for u in 0..n {
                if done[u] {
                    continue;
                }
                if let Some(bu) = &best[u] {
                    if pick.is_none_or(|p| better(bu, best[p].as_ref().unwrap())) {
                        pick = Some(u);
                    }
                }
            }
            let Some(u) = pick else { break };
            done[u] = true;
            if u != src && u < n_machines {
                continue;
            }
            let bu = best[u].unwrap();
            for &(w, lat, bw) in &adj[u] {
                if done[w] {
                    continue;
                }
                let cand = PathSummary {
                    latency: bu.latency + lat,
                    bottleneck: bu.bottleneck.min(bw),
                    hops: bu.hops + 1,
                };
                if best[w].as_ref().is_none_or(|bw_| better(&cand, bw_)) {
                    best[w] = Some(cand);
                }
            }
        }
        for dst in 0..n_machines {
            if dst != src {
                table[src][dst] = best[dst];
            }
        }
    }
    Ok(table)
}

fn any_connected(paths: &[Vec<Option<PathSummary>>]) -> bool {
    paths.len() < 2 || paths.iter().flatten().any(Option::is_some)
}

/// One host per machine, one virtual link per connected ordered pair.
pub fn abstract_level1(
    infra: &PhysicalInfra,
    costs: &[CostEntry],
) -> Result<HostGraph, InfraError> {
    let paths = machine_paths(infra)?;
    if !any_connected(&paths) {
        return Err(InfraError::DisconnectedInfra);
    }
    let hosts = infra
        .machines
        .iter()
        .map(|m| {
            let pop = infra.pop(&m.pop);
            Host {
                id: m.id.clone(),
                capacity: m.capacity.clone(),
                domain: pop.domain.clone(),
                operator: pop.operator().to_string(),
            }
        })
        .collect();
    let mut links = Vec::new();
    for (i, row) in paths.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if let Some(p) = p {
                links.push(Link {
                    from: infra.machines[i].id.clone(),
                    to: infra.machines[j].id.clone(),
                    bandwidth: p.bottleneck,
                    delay: p.latency,
                });
            }
        }
    }
    Ok(HostGraph {
        hosts,
        links,
        costs: costs.to_vec(),
    })
}

fn sum_capacity<'a>(machines: impl Iterator<Item = &'a Machine>) -> BTreeMap<String, f64> {
    let mut total = BTreeMap::new();
    for m in machines {
        for (r, &c) in &m.capacity {
            *total.entry(r.clone()).or_insert(0.0) += c;
        }
    }
    total
}

/// One host per NFVI-PoP (PoPs without machines are dropped).
pub fn abstract_level2(
    infra: &PhysicalInfra,
    costs: &[CostEntry],
) -> Result<HostGraph, InfraError> {
    let paths = machine_paths(infra)?;
    if !any_connected(&paths) {
        return Err(InfraError::DisconnectedInfra);
    }
    let pops: Vec<&Pop> = infra
        .pops
        .iter()
        .filter(|p| infra.machines.iter().any(|m| m.pop == p.id))
        .collect();
    let members: Vec<Vec<usize>> = pops
        .iter()
        .map(|p| {
            (0..infra.machines.len())
                .filter(|&i| infra.machines[i].pop == p.id)
                .collect()
        })
        .collect();

    let hosts = pops
        .iter()
        .map(|p| Host {
            id: p.id.clone(),
            capacity: sum_capacity(infra.machines.iter().filter(|m| m.pop == p.id)),
            domain: p.domain.clone(),
            operator: p.operator().to_string(),
        })
        .collect();

    let mut links = Vec::new();
    for (a, ma) in members.iter().enumerate() {
        for (b, mb) in members.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut best: Option<PathSummary> = None;
            for &i in ma {
                for &j in mb {
                    if let Some(p) = paths[i][j] {
                        let take = best.is_none_or(|q| {
                            p.latency < q.latency
                                || (p.latency == q.latency && p.bottleneck > q.bottleneck)
                        });
                        if take {
                            best = Some(p);
                        }
                    }
                }
            }
            if let Some(p) = best {
                links.push(Link {
                    from: pops[a].id.clone(),
                    to: pops[b].id.clone(),
                    bandwidth: p.bottleneck,
                    delay: p.latency,
                });
            }
        }
    }
    Ok(HostGraph {
        hosts,
        links,
        costs: costs.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl LinkStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(LinkStats {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

/// Domain-wide advertisement. Not a placement input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateView {
    pub capacity: BTreeMap<String, f64>,
    /// Statistics over inter-PoP virtual links; `None` without such links.
    pub delay: Option<LinkStats>,
    pub bandwidth: Option<LinkStats>,
}

impl AggregateView {
    pub fn capacity_of(&self, resource: &str) -> f64 {
        self.capacity.get(resource).copied().unwrap_or(0.0)
    }
}

pub fn abstract_level3(infra: &PhysicalInfra) -> Result<AggregateView, InfraError> {
    infra.validate()?;
    let capacity = sum_capacity(infra.machines.iter());
    let (delay, bandwidth) = match abstract_level2(infra, &[]) {
        Ok(hg) => {
            let d: Vec<f64> = hg.links.iter().map(|l| l.delay).collect();
            let b: Vec<f64> = hg.links.iter().map(|l| l.bandwidth).collect();
            (LinkStats::of(&d), LinkStats::of(&b))
        }
        Err(InfraError::DisconnectedInfra) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(AggregateView {
        capacity,
        delay,
        bandwidth,
    })
}
