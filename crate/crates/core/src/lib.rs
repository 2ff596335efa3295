//! Solver core for the multi-port continuous berth allocation problem.
//!
//! Ships follow routes over several container terminals. Each port visit is a
//! rectangle in a quay-meters x hours diagram; the handling time grows with the
//! distance from the ship's ideal berthing position and the sailing speed on
//! each voyage leg trades fuel against arrival time. This crate holds the data
//! model and cost function, a seeded instance generator, the greedy
//! construction, the destroy/repair operators with adaptive selection, the
//! annealing-driven search with ejection-chain local search, and an exact
//! brute-force oracle plus LP-format model export for cross-checking.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the wall clock
//! and the command line live in the `mcbap` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod construct;
pub mod instgen;
pub mod local_search;
pub mod lp;
pub mod math;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod placement;
pub mod sampling;
pub mod search;

pub use model::{
    Assignment, CallId, CostBreakdown, CostRates, ExternalBerth, Instance, ModelError, Port,
    PortCall, PortId, Ship, ShipClass, ShipId, Solution, SpeedLevel, Violation,
};
