//! Scenario description and validation.
//!
//! A [`Scenario`] is the serialized unit: resource types, the VNF forwarding
//! graph, the host graph and the service set. [`validate_scenario`] checks
//! every cross-reference and quantity and produces an [`Instance`], a dense
//! index-based view that all placement algorithms work on.
//!
//! VNFs and hosts are indexed in ascending id order, so "smaller index" and
//! "smaller identifier" are the same thing everywhere in this crate.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

/// Slack used when comparing accumulated loads against capacities.
pub(crate) const EPS: f64 = 1e-9;

pub(crate) fn within(load: f64, limit: f64) -> bool {
    load <= limit + EPS * (1.0 + limit.abs())
}

/// Serde adapter for quantities that may be `+inf`, written as the string `"inf"`.
pub mod num_or_inf {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                _ => Err(de::Error::custom(format!(
                    "expected number or \"inf\", got {s:?}"
                ))),
            },
        }
    }
}

fn default_domain() -> String {
    "default".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vnf {
    pub id: String,
    /// Demand per resource type.
    pub demand: BTreeMap<String, f64>,
    /// Processing delay per visit, in ms.
    pub proc_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficEntry {
    pub from: String,
    pub to: String,
    /// Mbit/s.
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vnffg {
    pub vnfs: Vec<Vnf>,
    #[serde(default)]
    pub traffic: Vec<TrafficEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub id: String,
    pub capacity: BTreeMap<String, f64>,
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default = "default_domain")]
    pub operator: String,
}

/// A directed virtual link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: String,
    pub to: String,
    /// Mbit/s.
    #[serde(with = "num_or_inf")]
    pub bandwidth: f64,
    /// ms.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub host: String,
    pub vnf: String,
    /// Money units; `inf` forbids the pairing.
    #[serde(with = "num_or_inf")]
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HostGraph {
    pub hosts: Vec<Host>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default)]
    pub costs: Vec<CostEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub id: String,
    /// Expected visits per request, n(s, v).
    pub visits: BTreeMap<String, f64>,
    /// P(to | from, s).
    #[serde(default)]
    pub transitions: Vec<Transition>,
    /// ms.
    #[serde(with = "num_or_inf")]
    pub max_delay: f64,
    #[serde(with = "num_or_inf")]
    pub max_cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub resource_types: Vec<String>,
    #[serde(flatten)]
    pub vnffg: Vnffg,
    #[serde(flatten)]
    pub host_graph: HostGraph,
    #[serde(default)]
    pub services: Vec<ServiceSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }
}

/// Complete VNF to host assignment, keyed by ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub assignment: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationError {
    #[error("scenario declares no resource types")]
    NoResourceTypes,
    #[error("duplicate {what} id {id:?}")]
    DuplicateId { what: String, id: String },
    #[error("{what} refers to unknown {target} {id:?}")]
    DanglingReference {
        what: String,
        target: String,
        id: String,
    },
    #[error("{what} must be nonnegative, got {value}")]
    NegativeQuantity { what: String, value: f64 },
    #[error("{what} must be strictly positive, got {value}")]
    NonPositiveQuantity { what: String, value: f64 },
    #[error("vnf {vnf:?} has no demand entry for resource {resource:?}")]
    MissingDemand { vnf: String, resource: String },
    #[error("service {service:?}: outgoing transition mass from {vnf:?} is {mass} > 1")]
    ProbabilityMassExceeded {
        service: String,
        vnf: String,
        mass: f64,
    },
    #[error("service {service:?}: probability {value} on {from:?} -> {to:?} outside [0, 1]")]
    InvalidProbability {
        service: String,
        from: String,
        to: String,
        value: f64,
    },
    #[error("no cost entry for host {host:?} and vnf {vnf:?}")]
    MissingCostEntry { host: String, vnf: String },
    #[error("duplicate {what} entry {from:?} -> {to:?}")]
    DuplicateEntry {
        what: String,
        from: String,
        to: String,
    },
    #[error("vnf {vnf:?} has nonzero self traffic {rate}")]
    SelfTraffic { vnf: String, rate: f64 },
    #[error("self link on host {host:?} (intra-host links are implicit)")]
    SelfLink { host: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnfInfo {
    pub id: String,
    pub demand: Vec<f64>,
    pub proc_delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostInfo {
    pub id: String,
    pub capacity: Vec<f64>,
    pub domain: String,
    pub operator: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceInfo {
    pub id: String,
    pub visits: Vec<f64>,
    /// (from, to, probability) with probability > 0.
    pub transitions: Vec<(usize, usize, f64)>,
    pub max_delay: f64,
    pub max_cost: f64,
}

/// Validated, dense view of a scenario. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    scenario: Scenario,
    pub resources: Vec<String>,
    pub vnfs: Vec<VnfInfo>,
    pub hosts: Vec<HostInfo>,
    pub services: Vec<ServiceInfo>,
    traffic: Vec<f64>,
    traffic_edges: Vec<(usize, usize, f64)>,
    link_bw: Vec<f64>,
    link_delay: Vec<f64>,
    cost: Vec<f64>,
}

impl Instance {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn n_vnfs(&self) -> usize {
        self.vnfs.len()
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    /// f(v1, v2); zero when absent.
    pub fn traffic(&self, v1: usize, v2: usize) -> f64 {
        self.traffic[v1 * self.vnfs.len() + v2]
    }

    /// Directed edges with positive traffic, ordered by (from, to).
    pub fn traffic_edges(&self) -> &[(usize, usize, f64)] {
        &self.traffic_edges
    }

    /// T(h1, h2): +inf on the diagonal, 0 when no link is declared.
    pub fn link_bandwidth(&self, h1: usize, h2: usize) -> f64 {
        self.link_bw[h1 * self.hosts.len() + h2]
    }

    /// δ(h1, h2): 0 on the diagonal, +inf when no link is declared.
    pub fn link_delay(&self, h1: usize, h2: usize) -> f64 {
        self.link_delay[h1 * self.hosts.len() + h2]
    }

    pub fn has_link(&self, h1: usize, h2: usize) -> bool {
        h1 != h2 && self.link_delay(h1, h2).is_finite()
    }

    /// κ(h, v).
    pub fn cost(&self, h: usize, v: usize) -> f64 {
        self.cost[h * self.vnfs.len() + v]
    }

    pub fn vnf_index(&self, id: &str) -> Option<usize> {
        self.vnfs.binary_search_by(|v| v.id.as_str().cmp(id)).ok()
    }

    pub fn host_index(&self, id: &str) -> Option<usize> {
        self.hosts.binary_search_by(|h| h.id.as_str().cmp(id)).ok()
    }

    /// Total visits of `v` over all services.
    pub fn total_visits(&self, v: usize) -> f64 {
        self.services.iter().map(|s| s.visits[v]).sum()
    }

    pub fn placement(&self, assignment: &[usize]) -> Placement {
        Placement {
            assignment: assignment
                .iter()
                .enumerate()
                .map(|(v, &h)| (self.vnfs[v].id.clone(), self.hosts[h].id.clone()))
                .collect(),
        }
    }

    /// Dense assignment for a keyed placement, or the id of the first VNF
    /// that is missing or mapped to an unknown host.
    pub fn assignment(&self, p: &Placement) -> Result<Vec<usize>, String> {
        if let Some(extra) = p.assignment.keys().find(|k| self.vnf_index(k).is_none()) {
            return Err(extra.clone());
        }
        self.vnfs
            .iter()
            .map(|v| {
                p.assignment
                    .get(&v.id)
                    .and_then(|h| self.host_index(h))
                    .ok_or_else(|| v.id.clone())
            })
            .collect()
    }

    /// Copy of this instance keeping only the hosts selected by `keep`.
    pub fn restrict_hosts(&self, keep: impl Fn(&HostInfo) -> bool) -> Option<Instance> {
        let mut sc = self.scenario.clone();
        let kept: BTreeSet<String> = self
            .hosts
            .iter()
            .filter(|h| keep(h))
            .map(|h| h.id.clone())
            .collect();
        sc.host_graph.hosts.retain(|h| kept.contains(&h.id));
        sc.host_graph
            .links
            .retain(|l| kept.contains(&l.from) && kept.contains(&l.to));
        sc.host_graph.costs.retain(|c| kept.contains(&c.host));
        validate_scenario(sc).ok()
    }
}

fn check_nonneg(errs: &mut Vec<ValidationError>, what: impl FnOnce() -> String, value: f64) {
    if !(value >= 0.0) {
        errs.push(ValidationError::NegativeQuantity {
            what: what(),
            value,
        });
    }
}

fn check_positive(errs: &mut Vec<ValidationError>, what: impl FnOnce() -> String, value: f64) {
    if !(value > 0.0) {
        errs.push(ValidationError::NonPositiveQuantity {
            what: what(),
            value,
        });
    }
}

fn index_ids<'a>(
    errs: &mut Vec<ValidationError>,
    what: &str,
    ids: impl Iterator<Item = &'a str>,
) -> HashMap<&'a str, usize> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            errs.push(ValidationError::DuplicateId {
                what: what.into(),
                id: id.into(),
            });
        }
    }
    seen.into_iter()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect()
}

fn dangling(what: impl Into<String>, target: &str, id: &str) -> ValidationError {
    ValidationError::DanglingReference {
        what: what.into(),
        target: target.into(),
        id: id.into(),
    }
}

/// Checks every scenario invariant, reporting all violations.
pub fn validate_scenario(raw: Scenario) -> Result<Instance, Vec<ValidationError>> {
    let mut errs = Vec::new();

    if raw.resource_types.is_empty() {
        errs.push(ValidationError::NoResourceTypes);
    }
    let res_idx = index_ids(
        &mut errs,
        "resource type",
        raw.resource_types.iter().map(String::as_str),
    );
    let vnf_idx = index_ids(
        &mut errs,
        "vnf",
        raw.vnffg.vnfs.iter().map(|v| v.id.as_str()),
    );
    let host_idx = index_ids(
        &mut errs,
        "host",
        raw.host_graph.hosts.iter().map(|h| h.id.as_str()),
    );
    index_ids(
        &mut errs,
        "service",
        raw.services.iter().map(|s| s.id.as_str()),
    );

    let nr = res_idx.len();
    let nv = vnf_idx.len();
    let nh = host_idx.len();

    let mut resources = vec![String::new(); nr];
    for (name, &i) in &res_idx {
        resources[i] = name.to_string();
    }

    let mut vnfs: Vec<Option<VnfInfo>> = vec![None; nv];
    for v in &raw.vnffg.vnfs {
        check_nonneg(
            &mut errs,
            || format!("proc_delay of vnf {:?}", v.id),
            v.proc_delay,
        );
        let mut demand = vec![0.0; nr];
        for (res, &q) in &v.demand {
            match res_idx.get(res.as_str()) {
                Some(&r) => demand[r] = q,
                None => errs.push(dangling(
                    format!("demand of vnf {:?}", v.id),
                    "resource type",
                    res,
                )),
            }
            check_nonneg(&mut errs, || format!("demand {res:?} of vnf {:?}", v.id), q);
        }
        for res in &raw.resource_types {
            if !v.demand.contains_key(res) {
                errs.push(ValidationError::MissingDemand {
                    vnf: v.id.clone(),
                    resource: res.clone(),
                });
            }
        }
        let slot = &mut vnfs[vnf_idx[v.id.as_str()]];
        if slot.is_none() {
            *slot = Some(VnfInfo {
                id: v.id.clone(),
                demand,
                proc_delay: v.proc_delay,
            });
        }
    }

    let mut traffic = vec![0.0; nv * nv];
    let mut seen_traffic = BTreeSet::new();
    for t in &raw.vnffg.traffic {
        check_nonneg(
            &mut errs,
            || format!("traffic {:?} -> {:?}", t.from, t.to),
            t.rate,
        );
        let (a, b) = (vnf_idx.get(t.from.as_str()), vnf_idx.get(t.to.as_str()));
        if a.is_none() {
            errs.push(dangling("traffic", "vnf", &t.from));
        }
        if b.is_none() {
            errs.push(dangling("traffic", "vnf", &t.to));
        }
        let (Some(&a), Some(&b)) = (a, b) else {
            continue;
        };
        if !seen_traffic.insert((a, b)) {
            errs.push(ValidationError::DuplicateEntry {
                what: "traffic".into(),
                from: t.from.clone(),
                to: t.to.clone(),
            });
        }
        if a == b && t.rate != 0.0 {
            errs.push(ValidationError::SelfTraffic {
                vnf: t.from.clone(),
                rate: t.rate,
            });
        }
        if t.rate.is_finite() && t.rate > 0.0 && a != b {
            traffic[a * nv + b] = t.rate;
        }
    }
    let mut traffic_edges = Vec::new();
    for a in 0..nv {
        for b in 0..nv {
            let f = traffic[a * nv + b];
            if f > 0.0 {
                traffic_edges.push((a, b, f));
            }
        }
    }

    let mut hosts: Vec<Option<HostInfo>> = vec![None; nh];
    for h in &raw.host_graph.hosts {
        let mut capacity = vec![0.0; nr];
        for (res, &c) in &h.capacity {
            match res_idx.get(res.as_str()) {
                Some(&r) => capacity[r] = c,
                None => errs.push(dangling(
                    format!("capacity of host {:?}", h.id),
                    "resource type",
                    res,
                )),
            }
            check_positive(
                &mut errs,
                || format!("capacity {res:?} of host {:?}", h.id),
                c,
            );
        }
        let slot = &mut hosts[host_idx[h.id.as_str()]];
        if slot.is_none() {
            *slot = Some(HostInfo {
                id: h.id.clone(),
                capacity,
                domain: h.domain.clone(),
                operator: h.operator.clone(),
            });
        }
    }

    let mut link_bw = vec![0.0; nh * nh];
    let mut link_delay = vec![f64::INFINITY; nh * nh];
    for i in 0..nh {
        link_bw[i * nh + i] = f64::INFINITY;
        link_delay[i * nh + i] = 0.0;
    }
    let mut seen_links = BTreeSet::new();
    for l in &raw.host_graph.links {
        check_nonneg(
            &mut errs,
            || format!("bandwidth {:?} -> {:?}", l.from, l.to),
            l.bandwidth,
        );
        check_nonneg(
            &mut errs,
            || format!("delay {:?} -> {:?}", l.from, l.to),
            l.delay,
        );
        let (a, b) = (host_idx.get(l.from.as_str()), host_idx.get(l.to.as_str()));
        if a.is_none() {
            errs.push(dangling("link", "host", &l.from));
        }
        if b.is_none() {
            errs.push(dangling("link", "host", &l.to));
        }
        let (Some(&a), Some(&b)) = (a, b) else {
            continue;
        };
        if a == b {
            errs.push(ValidationError::SelfLink {
                host: l.from.clone(),
            });
            continue;
        }
        if !seen_links.insert((a, b)) {
            errs.push(ValidationError::DuplicateEntry {
                what: "link".into(),
                from: l.from.clone(),
                to: l.to.clone(),
            });
        }
        link_bw[a * nh + b] = l.bandwidth;
        link_delay[a * nh + b] = l.delay;
    }

    let mut cost = vec![f64::NAN; nh * nv];
    for c in &raw.host_graph.costs {
        check_nonneg(
            &mut errs,
            || format!("cost of vnf {:?} on host {:?}", c.vnf, c.host),
            c.cost,
        );
        let (h, v) = (host_idx.get(c.host.as_str()), vnf_idx.get(c.vnf.as_str()));
        if h.is_none() {
            errs.push(dangling("cost entry", "host", &c.host));
        }
        if v.is_none() {
            errs.push(dangling("cost entry", "vnf", &c.vnf));
        }
        let (Some(&h), Some(&v)) = (h, v) else {
            continue;
        };
        if !cost[h * nv + v].is_nan() {
            errs.push(ValidationError::DuplicateEntry {
                what: "cost".into(),
                from: c.host.clone(),
                to: c.vnf.clone(),
            });
        }
        cost[h * nv + v] = c.cost;
    }
    let mut sorted_hosts: Vec<&str> = host_idx.keys().copied().collect();
    sorted_hosts.sort_unstable();
    let mut sorted_vnfs: Vec<&str> = vnf_idx.keys().copied().collect();
    sorted_vnfs.sort_unstable();
    for (h, host) in sorted_hosts.iter().enumerate() {
        for (v, vnf) in sorted_vnfs.iter().enumerate() {
            if cost[h * nv + v].is_nan() {
                errs.push(ValidationError::MissingCostEntry {
                    host: host.to_string(),
                    vnf: vnf.to_string(),
                });
            }
        }
    }

    let mut services = Vec::new();
    for s in &raw.services {
        check_positive(
            &mut errs,
            || format!("max_delay of service {:?}", s.id),
            s.max_delay,
        );
        check_positive(
            &mut errs,
            || format!("max_cost of service {:?}", s.id),
            s.max_cost,
        );
        let mut visits = vec![0.0; nv];
        for (vid, &n) in &s.visits {
            check_nonneg(
                &mut errs,
                || format!("visits of {vid:?} in service {:?}", s.id),
                n,
            );
            match vnf_idx.get(vid.as_str()) {
                Some(&v) => visits[v] = n,
                None => errs.push(dangling(
                    format!("visits of service {:?}", s.id),
                    "vnf",
                    vid,
                )),
            }
        }
        let mut transitions = Vec::new();
        let mut mass: BTreeMap<&str, f64> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for t in &s.transitions {
            if !(0.0..=1.0).contains(&t.probability) {
                errs.push(ValidationError::InvalidProbability {
                    service: s.id.clone(),
                    from: t.from.clone(),
                    to: t.to.clone(),
                    value: t.probability,
                });
            }
            let (a, b) = (vnf_idx.get(t.from.as_str()), vnf_idx.get(t.to.as_str()));
            if a.is_none() {
                errs.push(dangling(
                    format!("transitions of service {:?}", s.id),
                    "vnf",
                    &t.from,
                ));
            }
            if b.is_none() {
                errs.push(dangling(
                    format!("transitions of service {:?}", s.id),
                    "vnf",
                    &t.to,
                ));
            }
            let (Some(&a), Some(&b)) = (a, b) else {
                continue;
            };
            if !seen.insert((a, b)) {
                errs.push(ValidationError::DuplicateEntry {
                    what: format!("transition of service {:?}", s.id),
                    from: t.from.clone(),
                    to: t.to.clone(),
                });
            }
            *mass.entry(t.from.as_str()).or_default() += t.probability;
            if t.probability > 0.0 {
                transitions.push((a, b, t.probability));
            }
        }
        for (vnf, m) in mass {
            if !within(m, 1.0) {
                errs.push(ValidationError::ProbabilityMassExceeded {
                    service: s.id.clone(),
                    vnf: vnf.to_string(),
                    mass: m,
                });
            }
        }
        transitions.sort_by_key(|x| (x.0, x.1));
        services.push(ServiceInfo {
            id: s.id.clone(),
            visits,
            transitions,
            max_delay: s.max_delay,
            max_cost: s.max_cost,
        });
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(Instance {
        resources,
        vnfs: vnfs.into_iter().map(|v| v.expect("indexed")).collect(),
        hosts: hosts.into_iter().map(|h| h.expect("indexed")).collect(),
        services,
        traffic,
        traffic_edges,
        link_bw,
        link_delay,
        cost,
        scenario: raw,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// Two hosts, two VNFs, one service.
    pub(crate) fn t1() -> Scenario {
        Scenario {
            resource_types: vec!["cpu".into()],
            vnffg: Vnffg {
                vnfs: vec![
                    Vnf {
                        id: "a".into(),
                        demand: map(&[("cpu", 4.0)]),
                        proc_delay: 1.0,
                    },
                    Vnf {
                        id: "b".into(),
                        demand: map(&[("cpu", 8.0)]),
                        proc_delay: 1.0,
                    },
                ],
                traffic: vec![TrafficEntry {
                    from: "a".into(),
                    to: "b".into(),
                    rate: 3.0,
                }],
            },
            host_graph: HostGraph {
                hosts: vec![
                    Host {
                        id: "h1".into(),
                        capacity: map(&[("cpu", 12.0)]),
                        domain: "d0".into(),
                        operator: "op0".into(),
                    },
                    Host {
                        id: "h2".into(),
                        capacity: map(&[("cpu", 10.0)]),
                        domain: "d0".into(),
                        operator: "op0".into(),
                    },
                ],
                links: vec![
                    Link {
                        from: "h1".into(),
                        to: "h2".into(),
                        bandwidth: 5.0,
                        delay: 2.0,
                    },
                    Link {
                        from: "h2".into(),
                        to: "h1".into(),
                        bandwidth: 5.0,
                        delay: 2.0,
                    },
                ],
                costs: vec![
                    CostEntry {
                        host: "h1".into(),
                        vnf: "a".into(),
                        cost: 1.0,
                    },
                    CostEntry {
                        host: "h1".into(),
                        vnf: "b".into(),
                        cost: 1.0,
                    },
                    CostEntry {
                        host: "h2".into(),
                        vnf: "a".into(),
                        cost: 2.0,
                    },
                    CostEntry {
                        host: "h2".into(),
                        vnf: "b".into(),
                        cost: 2.0,
                    },
                ],
            },
            services: vec![ServiceSpec {
                id: "s1".into(),
                visits: map(&[("a", 1.0), ("b", 1.0)]),
                transitions: vec![Transition {
                    from: "a".into(),
                    to: "b".into(),
                    probability: 1.0,
                }],
                max_delay: 10.0,
                max_cost: 100.0,
            }],
        }
    }

    #[test]
    fn t1_is_accepted() {
        let inst = validate_scenario(t1()).unwrap();
        assert_eq!(inst.n_hosts(), 2);
        assert_eq!(inst.n_vnfs(), 2);
        assert_eq!(inst.link_delay(0, 1), 2.0);
        assert_eq!(inst.link_bandwidth(1, 1), f64::INFINITY);
        assert_eq!(inst.link_delay(1, 1), 0.0);
        assert_eq!(inst.cost(1, 0), 2.0);
        assert_eq!(inst.traffic(0, 1), 3.0);
        assert_eq!(inst.traffic(1, 0), 0.0);
    }

    #[test]
    fn negative_demand_rejected() {
        let mut sc = t1();
        sc.vnffg.vnfs[0].demand.insert("cpu".into(), -1.0);
        let errs = validate_scenario(sc).unwrap_err();
        assert!(errs.iter().any(
            |e| matches!(e, ValidationError::NegativeQuantity { value, .. } if *value == -1.0)
        ));
    }

    #[test]
    fn probability_mass_over_one_rejected() {
        let mut sc = t1();
        sc.vnffg.vnfs.push(Vnf {
            id: "c".into(),
            demand: map(&[("cpu", 1.0)]),
            proc_delay: 1.0,
        });
        for h in ["h1", "h2"] {
            sc.host_graph.costs.push(CostEntry {
                host: h.into(),
                vnf: "c".into(),
                cost: 1.0,
            });
        }
        let s = &mut sc.services[0];
        s.transitions = vec![
            Transition {
                from: "a".into(),
                to: "b".into(),
                probability: 0.7,
            },
            Transition {
                from: "a".into(),
                to: "c".into(),
                probability: 0.5,
            },
        ];
        let errs = validate_scenario(sc).unwrap_err();
        assert_eq!(errs.len(), 1);
        match &errs[0] {
            ValidationError::ProbabilityMassExceeded { vnf, mass, .. } => {
                assert_eq!(vnf, "a");
                assert!((mass - 1.2).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn all_violations_reported() {
        let mut sc = t1();
        sc.vnffg.traffic.push(TrafficEntry {
            from: "a".into(),
            to: "zz".into(),
            rate: 1.0,
        });
        sc.host_graph.costs.pop();
        sc.services[0].max_delay = 0.0;
        let errs = validate_scenario(sc).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ValidationError::DanglingReference { id, .. } if id == "zz")));
        assert!(errs.iter().any(|e| matches!(e, ValidationError::MissingCostEntry { host, vnf } if host == "h2" && vnf == "b")));
        assert!(errs
            .iter()
            .any(|e| matches!(e, ValidationError::NonPositiveQuantity { .. })));
    }

    #[test]
    fn self_traffic_only_if_zero() {
        let mut sc = t1();
        sc.vnffg.traffic.push(TrafficEntry {
            from: "a".into(),
            to: "a".into(),
            rate: 0.0,
        });
        assert!(validate_scenario(sc.clone()).is_ok());
        sc.vnffg.traffic.last_mut().unwrap().rate = 1.0;
        assert!(matches!(
            validate_scenario(sc).unwrap_err()[0],
            ValidationError::SelfTraffic { .. }
        ));
    }

    #[test]
    fn infinite_cost_round_trips_through_json() {
        let mut sc = t1();
        sc.host_graph.costs[3].cost = f64::INFINITY;
        let text = sc.to_json();
        assert!(text.contains("\"inf\""));
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, sc);
        let inst = validate_scenario(back).unwrap();
        assert_eq!(inst.cost(1, 1), f64::INFINITY);
    }

    #[test]
    fn placement_conversion() {
        let inst = validate_scenario(t1()).unwrap();
        let p = inst.placement(&[0, 1]);
        assert_eq!(p.assignment["a"], "h1");
        assert_eq!(inst.assignment(&p).unwrap(), vec![0, 1]);
        let mut broken = p.clone();
        broken.assignment.remove("b");
        assert_eq!(inst.assignment(&broken).unwrap_err(), "b");
    }
}
