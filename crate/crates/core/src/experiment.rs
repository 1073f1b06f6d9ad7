//! Running algorithms and emitting result rows.
//!
//! Rows serialize to CSV with the fixed header
//! `label,param,total_cost,total_delay,runtime_ms,feasible`, or to one JSON
//! object per line.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::cluster::{place_clustered, ClusterParams};
use crate::evaluator::{brute_force_place, metrics, Objective, DEFAULT_BRUTE_FORCE_BOUND};
use crate::ga::{evolve, GaConfig, GaObjective};
use crate::greedy::{place_min_distance, place_min_latency};
use crate::model::Instance;
use crate::outcome::{finalize, Outcome, PlaceError};

pub const CSV_HEADER: &str = "label,param,total_cost,total_delay,runtime_ms,feasible";

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Cluster(ClusterParams),
    MinDistance,
    MinLatency,
    Ga(GaConfig),
    BruteForce(Objective),
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Cluster(_) => "cluster",
            Algorithm::MinDistance => "min-distance",
            Algorithm::MinLatency => "min-latency",
            Algorithm::Ga(_) => "ga",
            Algorithm::BruteForce(_) => "brute-force",
        }
    }

    pub fn param(&self) -> String {
        match self {
            Algorithm::Cluster(p) => p.k.to_string(),
            Algorithm::Ga(c) => match c.objective {
                GaObjective::Cost => "cost".into(),
                GaObjective::Delay => "delay".into(),
            },
            Algorithm::BruteForce(o) => match o {
                Objective::Cost => "cost".into(),
                Objective::Delay => "delay".into(),
                Objective::Weighted {
                    cost_weight,
                    delay_weight,
                } => format!("weighted:{cost_weight}:{delay_weight}"),
            },
            Algorithm::MinDistance | Algorithm::MinLatency => String::new(),
        }
    }

    pub fn run(&self, inst: &Instance) -> Result<Outcome, PlaceError> {
        match self {
            Algorithm::Cluster(p) => place_clustered(inst, p),
            Algorithm::MinDistance => place_min_distance(inst),
            Algorithm::MinLatency => place_min_latency(inst),
            Algorithm::Ga(cfg) => evolve(inst, cfg).map(|g| g.outcome),
            Algorithm::BruteForce(obj) => {
                let (assignment, _) = brute_force_place(inst, *obj, DEFAULT_BRUTE_FORCE_BOUND)?;
                finalize(inst, assignment)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    Measured,
    /// Report 0 ms, for byte-reproducible output.
    Omitted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub param: String,
    pub total_cost: Option<f64>,
    pub total_delay: Option<f64>,
    pub runtime_ms: f64,
    pub feasible: bool,
}

/// A single run: the row plus the full result.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub row: Row,
    pub result: Result<Outcome, PlaceError>,
}

pub fn run_one(inst: &Instance, algo: &Algorithm, timing: Timing) -> RunRecord {
    let start = Instant::now();
    let result = algo.run(inst);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let runtime_ms = match timing {
        Timing::Measured => (elapsed * 1e3).round() / 1e3,
        Timing::Omitted => 0.0,
    };
    let (total_cost, total_delay) = match &result {
        Ok(out) => (Some(out.metrics.total_cost), Some(out.metrics.total_delay)),
        Err(PlaceError::Infeasible { placement, .. }) => match inst.assignment(placement) {
            Ok(a) => {
                let m = metrics(inst, &a);
                (Some(m.total_cost), Some(m.total_delay))
            }
            Err(_) => (None, None),
        },
        Err(_) => (None, None),
    };
    RunRecord {
        row: Row {
            label: algo.label().to_string(),
            param: algo.param(),
            total_cost,
            total_delay,
            runtime_ms,
            feasible: result.is_ok(),
        },
        result,
    }
}

/// Cluster-count sweep plus one row per GA configuration. Rows are ordered
/// by (label, k); GA rows follow in the order given.
pub fn sweep(
    inst: &Instance,
    ks: std::ops::RangeInclusive<usize>,
    base: &ClusterParams,
    ga: &[GaConfig],
    timing: Timing,
) -> Result<Vec<RunRecord>, PlaceError> {
    let limit = inst.n_vnfs().min(inst.n_hosts());
    if *ks.start() == 0 {
        return Err(PlaceError::InvalidParams(
            "cluster counts start at 1".into(),
        ));
    }
    if *ks.end() > limit {
        return Err(PlaceError::KTooLarge {
            k: *ks.end(),
            limit,
        });
    }
    let mut out = Vec::new();
    for k in ks {
        let algo = Algorithm::Cluster(ClusterParams { k, ..base.clone() });
        out.push(run_one(inst, &algo, timing));
    }
    for cfg in ga {
        out.push(run_one(inst, &Algorithm::Ga(cfg.clone()), timing));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            if rows.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            w.flush()
        }
        Format::JsonLines => {
            let mut out = out;
            for r in rows {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

pub fn rows_to_string(rows: &[Row], format: Format) -> String {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 output")
}
