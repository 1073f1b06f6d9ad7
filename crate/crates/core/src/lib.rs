//! Placement of VNF forwarding graphs onto abstracted host graphs.
//!
//! Scenarios are described by [`model::Scenario`] and validated into an
//! [`model::Instance`]. Placement strategies:
//!
//! * [`cluster::place_clustered`]: co-clustering plus cost-greedy assignment,
//! * [`greedy::place_min_distance`] and [`greedy::place_min_latency`],
//! * [`ga::evolve`]: genetic-algorithm benchmark,
//! * [`evaluator::brute_force_place`]: exhaustive oracle for small inputs.
//!
//! Every strategy returns a placement only after [`evaluator::is_feasible`]
//! accepts it.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod evaluator;
pub mod experiment;
pub mod ga;
pub mod greedy;
pub mod infrastructure;
pub mod model;
pub mod outcome;
pub mod scenario_gen;

pub use model::{validate_scenario, Instance, Placement, Scenario};
pub use outcome::{Outcome, PlaceError};
