//! Minimum-distance and minimum-latency placement.
//!
//! Both strategies sweep the VNFFG edges in order of decreasing traffic. For
//! each edge with an unplaced endpoint they pick host(s) for the unplaced
//! endpoint(s) among the candidates that pass every guard: residual host
//! capacity, residual virtual-link bandwidth for all traffic between the new
//! VNFs and those already placed, and the running per-service delay and cost
//! budgets (undecided terms count as zero). Minimum-distance ranks
//! candidates by shortest-path delay between the two hosts; minimum-latency
//! ranks them by the increase of the total expected service delay. VNFs
//! without traffic are placed at the end.

use serde::Serialize;

use crate::evaluator::host_utilization;
use crate::model::{within, Instance};
use crate::outcome::{finalize, Outcome, PlaceError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEntry {
    /// ms; `inf` when unreachable.
    pub delay: f64,
    /// Bottleneck bandwidth of the chosen path; 0 when unreachable.
    pub bottleneck: f64,
    pub hops: usize,
}

impl PathEntry {
    const UNREACHABLE: PathEntry = PathEntry {
        delay: f64::INFINITY,
        bottleneck: 0.0,
        hops: usize::MAX,
    };

    pub fn reachable(&self) -> bool {
        self.delay.is_finite()
    }
}

/// All-pairs minimum-delay paths over the virtual links.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    n: usize,
    entries: Vec<PathEntry>,
}

impl PathTable {
    pub fn get(&self, h1: usize, h2: usize) -> PathEntry {
        self.entries[h1 * self.n + h2]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

pub fn build_path_table(inst: &Instance) -> PathTable {
    let n = inst.n_hosts();
    let mut e = vec![PathEntry::UNREACHABLE; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                e[i * n + j] = PathEntry {
                    delay: 0.0,
                    bottleneck: f64::INFINITY,
                    hops: 0,
                };
            } else if inst.has_link(i, j) && inst.link_bandwidth(i, j) > 0.0 {
                e[i * n + j] = PathEntry {
                    delay: inst.link_delay(i, j),
                    bottleneck: inst.link_bandwidth(i, j),
                    hops: 1,
                };
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let ik = e[i * n + k];
            if !ik.reachable() || i == k {
                continue;
            }
            for j in 0..n {
                let kj = e[k * n + j];
                if !kj.reachable() || j == k || i == j {
                    continue;
                }
                let cand = PathEntry {
                    delay: ik.delay + kj.delay,
                    bottleneck: ik.bottleneck.min(kj.bottleneck),
                    hops: ik.hops + kj.hops,
                };
                let cur = e[i * n + j];
                let better = cand.delay < cur.delay
                    || (cand.delay == cur.delay
                        && (cand.hops < cur.hops
                            || (cand.hops == cur.hops && cand.bottleneck > cur.bottleneck)));
                if better {
                    e[i * n + j] = cand;
                }
            }
        }
    }
    PathTable { n, entries: e }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    MinDistance,
    MinLatency,
}

struct Sweep<'a> {
    inst: &'a Instance,
    table: PathTable,
    strategy: Strategy,
    assignment: Vec<Option<usize>>,
    load: Vec<Vec<f64>>,
    flow: Vec<f64>,
    delay: Vec<f64>,
    cost: Vec<f64>,
    /// Incident traffic edges per VNF: (other, f(v, other), f(other, v)).
    incident: Vec<Vec<(usize, f64, f64)>>,
}

/// Result of tentatively placing one or two VNFs.
struct Trial {
    delay_inc: Vec<f64>,
    cost_inc: Vec<f64>,
    flow_inc: Vec<(usize, usize, f64)>,
}

impl Trial {
    fn total_delay(&self) -> f64 {
        self.delay_inc.iter().sum()
    }
}

impl<'a> Sweep<'a> {
    fn new(inst: &'a Instance, strategy: Strategy) -> Self {
        let nv = inst.n_vnfs();
        let mut incident = vec![Vec::new(); nv];
        for a in 0..nv {
            for b in 0..nv {
                if a != b && (inst.traffic(a, b) > 0.0 || inst.traffic(b, a) > 0.0) {
                    incident[a].push((b, inst.traffic(a, b), inst.traffic(b, a)));
                }
            }
        }
        let nh = inst.n_hosts();
        Sweep {
            inst,
            table: build_path_table(inst),
            strategy,
            assignment: vec![None; nv],
            load: vec![vec![0.0; inst.n_resources()]; nh],
            flow: vec![0.0; nh * nh],
            delay: vec![0.0; inst.services.len()],
            cost: vec![0.0; inst.services.len()],
            incident,
        }
    }

    fn host_of(&self, v: usize, new: &[(usize, usize)]) -> Option<usize> {
        self.assignment[v].or_else(|| new.iter().find(|(u, _)| *u == v).map(|&(_, h)| h))
    }

    /// Checks every guard for placing `new` = [(vnf, host)]; `None` if any fails.
    fn trial(&self, new: &[(usize, usize)]) -> Option<Trial> {
        let inst = self.inst;
        let nh = inst.n_hosts();

        for &(v, h) in new {
            if !inst.cost(h, v).is_finite() {
                return None;
            }
        }
        for &(_, h) in new {
            for r in 0..inst.n_resources() {
                let extra: f64 = new
                    .iter()
                    .filter(|(_, hh)| *hh == h)
                    .map(|&(u, _)| inst.vnfs[u].demand[r])
                    .sum();
                if !within(self.load[h][r] + extra, inst.hosts[h].capacity[r]) {
                    return None;
                }
            }
        }

        let mut flow_inc: Vec<(usize, usize, f64)> = Vec::new();
        let mut add_flow = |from: usize, to: usize, f: f64| {
            if from == to || f <= 0.0 {
                return;
            }
            match flow_inc.iter_mut().find(|x| x.0 == from && x.1 == to) {
                Some(x) => x.2 += f,
                None => flow_inc.push((from, to, f)),
            }
        };
        for (i, &(v, h)) in new.iter().enumerate() {
            for &(u, out, inc) in &self.incident[v] {
                // pairs inside `new` are counted once, from the first member
                if new[..i].iter().any(|(w, _)| *w == u) {
                    continue;
                }
                if let Some(hu) = self.host_of(u, new) {
                    add_flow(h, hu, out);
                    add_flow(hu, h, inc);
                }
            }
        }
        for &(a, b, f) in &flow_inc {
            if !within(self.flow[a * nh + b] + f, inst.link_bandwidth(a, b)) {
                return None;
            }
        }

        let mut delay_inc = vec![0.0; inst.services.len()];
        let mut cost_inc = vec![0.0; inst.services.len()];
        for (s, svc) in inst.services.iter().enumerate() {
            for &(v, h) in new {
                let n = svc.visits[v];
                if n > 0.0 {
                    delay_inc[s] += n * inst.vnfs[v].proc_delay;
                    cost_inc[s] += n * inst.cost(h, v);
                }
            }
            for &(v1, v2, p) in &svc.transitions {
                let touches_new = new.iter().any(|(w, _)| *w == v1 || *w == v2);
                if !touches_new {
                    continue;
                }
                let weight = svc.visits[v1] * p;
                if weight <= 0.0 {
                    continue;
                }
                if let (Some(h1), Some(h2)) = (self.host_of(v1, new), self.host_of(v2, new)) {
                    delay_inc[s] += weight * inst.link_delay(h1, h2);
                }
            }
            if !within(self.delay[s] + delay_inc[s], svc.max_delay)
                || !within(self.cost[s] + cost_inc[s], svc.max_cost)
            {
                return None;
            }
        }
        Some(Trial {
            delay_inc,
            cost_inc,
            flow_inc,
        })
    }

    fn commit(&mut self, new: &[(usize, usize)], trial: Trial) {
        let nh = self.inst.n_hosts();
        for &(v, h) in new {
            self.assignment[v] = Some(h);
            for (r, q) in self.inst.vnfs[v].demand.iter().enumerate() {
                self.load[h][r] += q;
            }
        }
        for (a, b, f) in trial.flow_inc {
            self.flow[a * nh + b] += f;
        }
        for (s, (d, c)) in trial.delay_inc.into_iter().zip(trial.cost_inc).enumerate() {
            self.delay[s] += d;
            self.cost[s] += c;
        }
    }

    /// Score for placing an edge whose endpoints end up on (h1, h2).
    fn edge_score(&self, h1: usize, h2: usize, trial: &Trial) -> (f64, usize, usize, usize) {
        let p = self.table.get(h1, h2);
        let primary = match self.strategy {
            Strategy::MinDistance => p.delay,
            Strategy::MinLatency => trial.total_delay(),
        };
        (primary, p.hops, h1, h2)
    }

    #[allow(clippy::type_complexity)]
    fn place_edge(&mut self, v1: usize, v2: usize) -> Result<(), PlaceError> {
        let nh = self.inst.n_hosts();
        let mut best: Option<((f64, usize, usize, usize), Vec<(usize, usize)>, Trial)> = None;
        let mut consider = |this: &Self, new: Vec<(usize, usize)>, h1: usize, h2: usize| {
            if let Some(trial) = this.trial(&new) {
                let score = this.edge_score(h1, h2, &trial);
                if best.as_ref().is_none_or(|(b, _, _)| lex_less(&score, b)) {
                    best = Some((score, new, trial));
                }
            }
        };
        match (self.assignment[v1], self.assignment[v2]) {
            (Some(_), Some(_)) => return Ok(()),
            (None, None) => {
                for h1 in 0..nh {
                    for h2 in 0..nh {
                        consider(self, vec![(v1, h1), (v2, h2)], h1, h2);
                    }
                }
            }
            (Some(h1), None) => {
                for h2 in 0..nh {
                    consider(self, vec![(v2, h2)], h1, h2);
                }
            }
            (None, Some(h2)) => {
                for h1 in 0..nh {
                    consider(self, vec![(v1, h1)], h1, h2);
                }
            }
        }
        match best {
            Some((_, new, trial)) => {
                self.commit(&new, trial);
                Ok(())
            }
            None => {
                let v = if self.assignment[v1].is_none() {
                    v1
                } else {
                    v2
                };
                Err(PlaceError::NoFeasibleAssignment {
                    vnf: self.inst.vnfs[v].id.clone(),
                })
            }
        }
    }

    fn place_isolated(&mut self, v: usize) -> Result<(), PlaceError> {
        let mut best: Option<((f64, f64, usize), Trial, usize)> = None;
        for h in 0..self.inst.n_hosts() {
            let Some(trial) = self.trial(&[(v, h)]) else {
                continue;
            };
            let util = host_utilization(self.inst, &self.load, h);
            let score = match self.strategy {
                Strategy::MinDistance => (util, 0.0, h),
                Strategy::MinLatency => (trial.total_delay(), util, h),
            };
            if best.as_ref().is_none_or(|(b, _, _)| lex_less(&score, b)) {
                best = Some((score, trial, h));
            }
        }
        let Some((_, trial, h)) = best else {
            return Err(PlaceError::NoFeasibleAssignment {
                vnf: self.inst.vnfs[v].id.clone(),
            });
        };
        self.commit(&[(v, h)], trial);
        Ok(())
    }

    fn run(mut self) -> Result<Outcome, PlaceError> {
        let mut edges = self.inst.traffic_edges().to_vec();
        edges.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
        for (v1, v2, _) in edges {
            self.place_edge(v1, v2)?;
        }
        for v in 0..self.inst.n_vnfs() {
            if self.assignment[v].is_none() {
                self.place_isolated(v)?;
            }
        }
        let assignment = self
            .assignment
            .into_iter()
            .map(|h| h.expect("all placed"))
            .collect();
        finalize(self.inst, assignment)
    }
}

trait LexKey {
    fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering;
}

impl LexKey for (f64, usize, usize, usize) {
    fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&o.0)
            .then(self.1.cmp(&o.1))
            .then(self.2.cmp(&o.2))
            .then(self.3.cmp(&o.3))
    }
}

impl LexKey for (f64, f64, usize) {
    fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&o.0)
            .then(self.1.total_cmp(&o.1))
            .then(self.2.cmp(&o.2))
    }
}

fn lex_less<K: LexKey>(a: &K, b: &K) -> bool {
    a.lex_cmp(b).is_lt()
}

/// Places each traffic edge on the closest admissible host pair.
pub fn place_min_distance(inst: &Instance) -> Result<Outcome, PlaceError> {
    Sweep::new(inst, Strategy::MinDistance).run()
}

/// Places each traffic edge where it adds the least expected service delay.
pub fn place_min_latency(inst: &Instance) -> Result<Outcome, PlaceError> {
    Sweep::new(inst, Strategy::MinLatency).run()
}
