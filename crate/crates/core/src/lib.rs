//! Routing engine for maximizing the entangled routing rate of a quantum
//! network.
//!
//! A network is an undirected simple graph of quantum nodes whose links have
//! been successfully entangled (the *reduced network*). A set of demands asks
//! for one end-to-end path each; paths of different demands may not share a
//! link and may not exceed a hop budget. This crate provides:
//!
//! * [`topology`]: graph and demand model, Topology Zoo GraphML and edge-list
//!   JSON ingestion, reduced-network sampling and demand generation.
//! * [`lp`]: linear programs and a branch-and-bound layer for binary programs.
//! * [`formulation`]: the flow-based integer program, its relaxation, and the
//!   decoder from integral flows back to paths.
//! * [`algorithms`]: the exact ILP solver, half-based and randomized rounding,
//!   the shortest-path-first greedy, and an exhaustive verification oracle.
//! * [`fidelity`]: closed-form channel noise, path fidelity and the
//!   decoherence timing budget.
//! * [`harness`]: experiment sweeps, CSV output and the command-line front end.

pub mod algorithms;
pub mod exec;
pub mod fidelity;
pub mod formulation;
pub mod harness;
pub mod lp;
pub mod rng;
pub mod topology;

pub use algorithms::{
    brute_force_oracle, entangled_routing_rate, hbra, plba, rra, solve_ilp_exact, Decision, RateReport, RoutingOutcome,
};
pub use formulation::{build_merr_model, decode_paths, relax, MerrModel};
pub use topology::{Demand, MerrInstance, NetworkGraph, NodeId};
