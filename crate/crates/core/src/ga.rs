//! Genetic-algorithm benchmark.
//!
//! A chromosome is a complete placement; its genes are the hosts, each
//! carrying the set of VNFs placed on it. Crossover ranks the genes of both
//! parents by quality and adopts them greedily while they fit, mutation
//! swaps VNFs between two genes, and every generation keeps the top-K
//! feasible chromosomes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cluster::{place_clustered, ClusterParams};
use crate::evaluator::{feasible, host_utilization, total_cost, total_delay};
use crate::model::{within, Instance};
use crate::outcome::{finalize, Outcome, PlaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaObjective {
    Cost,
    Delay,
}

impl GaObjective {
    pub fn value(self, inst: &Instance, assignment: &[usize]) -> f64 {
        match self {
            GaObjective::Cost => total_cost(inst, assignment),
            GaObjective::Delay => total_delay(inst, assignment),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub pool_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub objective: GaObjective,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pool_size: 50,
            generations: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.05,
            objective: GaObjective::Cost,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn check(&self) -> Result<(), PlaceError> {
        if self.pool_size < 2 {
            return Err(PlaceError::InvalidParams(
                "pool size must be at least 2".into(),
            ));
        }
        if self.generations < 1 {
            return Err(PlaceError::InvalidParams(
                "at least one generation is required".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return Err(PlaceError::InvalidParams("rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// A complete placement, `assignment[v] = host`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome {
    pub assignment: Vec<usize>,
}

impl Chromosome {
    /// Gene view: host -> VNFs placed there. Hosts without VNFs are omitted.
    pub fn genes(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut genes: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (v, &h) in self.assignment.iter().enumerate() {
            genes.entry(h).or_default().insert(v);
        }
        genes
    }

    fn vnfs_on(&self, h: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == h)
            .collect()
    }
}

/// Retries per pool slot before falling back to perturbed heuristic seeds.
const SEED_ATTEMPTS_PER_SLOT: usize = 200;

fn random_chromosome(inst: &Instance, rng: &mut ChaCha8Rng) -> Chromosome {
    Chromosome {
        assignment: (0..inst.n_vnfs())
            .map(|_| rng.gen_range(0..inst.n_hosts()))
            .collect(),
    }
}

/// Draws `pool_size` feasible chromosomes by rejection sampling, topping up
/// with mutated copies of the single-cluster heuristic placement.
pub fn init_pool(
    inst: &Instance,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Chromosome>, PlaceError> {
    if inst.n_hosts() == 0 {
        return if inst.n_vnfs() == 0 {
            Ok(vec![Chromosome { assignment: vec![] }; cfg.pool_size])
        } else {
            Err(PlaceError::CannotSeedPool)
        };
    }
    let mut pool = Vec::with_capacity(cfg.pool_size);
    let mut attempts = SEED_ATTEMPTS_PER_SLOT * cfg.pool_size;
    while pool.len() < cfg.pool_size && attempts > 0 {
        attempts -= 1;
        let c = random_chromosome(inst, rng);
        if feasible(inst, &c.assignment) {
            pool.push(c);
        }
    }
    if pool.len() < cfg.pool_size {
        let mut base = pool.clone();
        if let Ok(out) = place_clustered(inst, &ClusterParams::with_k(1)) {
            base.push(Chromosome {
                assignment: out.assignment,
            });
        }
        if base.is_empty() {
            return Err(PlaceError::CannotSeedPool);
        }
        let mut i = 0;
        while pool.len() < cfg.pool_size {
            let parent = &base[i % base.len()];
            pool.push(swap_mutation(parent, inst, rng));
            i += 1;
        }
    }
    Ok(pool)
}

/// Quality of the gene (host, vnfs) inside `parent`; lower is better.
///
/// Cost: placement cost of the gene's VNFs summed over services. Delay:
/// processing delay of the gene's VNFs plus the propagation delay of the
/// transitions leaving them, with successors located as in `parent`.
pub fn gene_quality(
    inst: &Instance,
    host: usize,
    vnfs: &[usize],
    parent: &[usize],
    objective: GaObjective,
) -> f64 {
    let mut q = 0.0;
    for svc in &inst.services {
        for &v in vnfs {
            let n = svc.visits[v];
            if n <= 0.0 {
                continue;
            }
            q += match objective {
                GaObjective::Cost => n * inst.cost(host, v),
                GaObjective::Delay => n * inst.vnfs[v].proc_delay,
            };
        }
        if objective == GaObjective::Delay {
            for &(v1, v2, p) in &svc.transitions {
                let w = svc.visits[v1] * p;
                if w > 0.0 && vnfs.contains(&v1) {
                    q += w * inst.link_delay(host, parent[v2]);
                }
            }
        }
    }
    q
}

/// Cheapest fitting host with the load-balancing tie-break.
fn repair_host(inst: &Instance, load: &[Vec<f64>], v: usize) -> Option<usize> {
    let nh = inst.n_hosts();
    let utils: Vec<f64> = (0..nh).map(|h| host_utilization(inst, load, h)).collect();
    let mut best: Option<(f64, f64, usize)> = None;
    for h in 0..nh {
        let c = inst.cost(h, v);
        let demand = &inst.vnfs[v].demand;
        if !c.is_finite()
            || !(0..inst.n_resources())
                .all(|r| within(load[h][r] + demand[r], inst.hosts[h].capacity[r]))
        {
            continue;
        }
        let mut after = load.to_vec();
        for (r, q) in demand.iter().enumerate() {
            after[h][r] += q;
        }
        let resulting = host_utilization(inst, &after, h).max(
            (0..nh)
                .filter(|&o| o != h)
                .map(|o| utils[o])
                .fold(0.0, f64::max),
        );
        if best.is_none_or(|(bc, bu, _)| c < bc || (c == bc && resulting < bu)) {
            best = Some((c, resulting, h));
        }
    }
    best.map(|b| b.2)
}

/// Gene-quality crossover. Returns `None` when the child is infeasible.
pub fn crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    inst: &Instance,
    objective: GaObjective,
) -> Option<Chromosome> {
    // (quality per vnf, -size, host, parent, vnfs)
    let mut genes: Vec<(f64, usize, usize, usize, Vec<usize>)> = Vec::new();
    for (pi, parent) in [p1, p2].into_iter().enumerate() {
        for (h, vnfs) in parent.genes() {
            let vnfs: Vec<usize> = vnfs.into_iter().collect();
            let q = gene_quality(inst, h, &vnfs, &parent.assignment, objective);
            genes.push((q / vnfs.len() as f64, vnfs.len(), h, pi, vnfs));
        }
    }
    genes.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });

    let nv = inst.n_vnfs();
    let mut child: Vec<Option<usize>> = vec![None; nv];
    let mut load = vec![vec![0.0; inst.n_resources()]; inst.n_hosts()];
    for (_, _, h, _, vnfs) in &genes {
        if vnfs.iter().any(|&v| child[v].is_some()) {
            continue;
        }
        let fits = (0..inst.n_resources()).all(|r| {
            let extra: f64 = vnfs.iter().map(|&v| inst.vnfs[v].demand[r]).sum();
            within(load[*h][r] + extra, inst.hosts[*h].capacity[r])
        });
        if !fits {
            continue;
        }
        for &v in vnfs {
            child[v] = Some(*h);
            for (r, q) in inst.vnfs[v].demand.iter().enumerate() {
                load[*h][r] += q;
            }
        }
    }
    for v in 0..nv {
        if child[v].is_none() {
            let h = repair_host(inst, &load, v)?;
            child[v] = Some(h);
            for (r, q) in inst.vnfs[v].demand.iter().enumerate() {
                load[h][r] += q;
            }
        }
    }
    let c = Chromosome {
        assignment: child.into_iter().map(Option::unwrap).collect(),
    };
    feasible(inst, &c.assignment).then_some(c)
}

/// Unconditional swap between two distinct genes; returns `c` unchanged if
/// the result is infeasible or there is nothing to swap.
fn swap_mutation(c: &Chromosome, inst: &Instance, rng: &mut ChaCha8Rng) -> Chromosome {
    let nh = inst.n_hosts();
    if nh < 2 {
        return c.clone();
    }
    let g1 = rng.gen_range(0..nh);
    let mut g2 = rng.gen_range(0..nh - 1);
    if g2 >= g1 {
        g2 += 1;
    }
    let (a, b) = (c.vnfs_on(g1), c.vnfs_on(g2));
    let mut out = c.clone();
    match (a.choose(rng), b.choose(rng)) {
        (None, None) => return out,
        (Some(&va), Some(&vb)) => {
            out.assignment[va] = g2;
            out.assignment[vb] = g1;
        }
        (Some(&va), None) => out.assignment[va] = g2,
        (None, Some(&vb)) => out.assignment[vb] = g1,
    }
    if feasible(inst, &out.assignment) {
        out
    } else {
        c.clone()
    }
}

/// With probability `mutation_rate`, swaps one VNF between two random genes.
pub fn mutate(c: &Chromosome, inst: &Instance, cfg: &GaConfig, rng: &mut ChaCha8Rng) -> Chromosome {
    if cfg.mutation_rate > 0.0 && rng.gen_bool(cfg.mutation_rate) {
        swap_mutation(c, inst, rng)
    } else {
        c.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaOutcome {
    pub outcome: Outcome,
    /// Best fitness (negated objective) after each generation.
    pub trace: Vec<f64>,
}

fn generation_rng(seed: u64, generation: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation as u64 + 1);
    rng
}

fn select_top_k(
    inst: &Instance,
    cfg: &GaConfig,
    candidates: Vec<Chromosome>,
) -> Vec<(f64, Chromosome)> {
    let mut seen = HashSet::new();
    let mut scored: Vec<(f64, Chromosome)> = candidates
        .into_iter()
        .filter(|c| seen.insert(c.clone()))
        .map(|c| (-cfg.objective.value(inst, &c.assignment), c))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(cfg.pool_size);
    scored
}

pub fn evolve(inst: &Instance, cfg: &GaConfig) -> Result<GaOutcome, PlaceError> {
    cfg.check()?;
    let mut rng = generation_rng(cfg.seed, 0);
    rng.set_stream(0);
    let initial = init_pool(inst, cfg, &mut rng)?;
    let mut pool = select_top_k(inst, cfg, initial);
    let mut trace = Vec::with_capacity(cfg.generations);

    for g in 0..cfg.generations {
        let mut rng = generation_rng(cfg.seed, g);
        let parents: Vec<&Chromosome> = pool.iter().map(|(_, c)| c).collect();
        let mut offspring = Vec::new();
        for _ in 0..cfg.pool_size {
            if cfg.crossover_rate > 0.0 && rng.gen_bool(cfg.crossover_rate) {
                let a = parents[rng.gen_range(0..parents.len())];
                let b = parents[rng.gen_range(0..parents.len())];
                if let Some(child) = crossover(a, b, inst, cfg.objective) {
                    offspring.push(mutate(&child, inst, cfg, &mut rng));
                }
            }
        }
        for p in &parents {
            let m = mutate(p, inst, cfg, &mut rng);
            if &&m != p {
                offspring.push(m);
            }
        }
        let mut all: Vec<Chromosome> = pool.iter().map(|(_, c)| c.clone()).collect();
        all.extend(
            offspring
                .into_iter()
                .filter(|c| feasible(inst, &c.assignment)),
        );
        pool = select_top_k(inst, cfg, all);
        trace.push(pool[0].0);
    }

    let best = pool.into_iter().next().expect("pool is never empty").1;
    Ok(GaOutcome {
        outcome: finalize(inst, best.assignment)?,
        trace,
    })
}
