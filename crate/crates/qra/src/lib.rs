//! Queue-based random-access networks on bipartite interference graphs.
//!
//! Servers sit on the nodes of a bipartite graph whose edges forbid
//! simultaneous activity. Starting from the configuration where one side
//! is fully active, the network crosses over to the opposite
//! configuration through a cascade of fork nucleations. This crate
//! provides:
//!
//! - [`graph`]: the interference graph, its edge-list format, and the
//!   fork-removal primitive;
//! - [`algorithm`]: the greedy minimum-degree elimination, exhaustive
//!   enumeration of its tie-breaking paths with exact probabilities, and
//!   regime classification;
//! - [`predictor`]: closed-form leading-order means and limit laws of
//!   the crossover time in the subcritical, critical and supercritical
//!   regimes;
//! - [`simulator`]: an exact event-driven simulation of the joint
//!   activity/queue Markov process;
//! - [`experiments`]: a replication harness that cross-validates the
//!   predictions against simulation.

pub mod algorithm;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod law;
pub mod params;
pub mod predictor;
pub mod rational;
pub mod rng;
pub mod simulator;

pub use algorithm::{
    classify_regime, degree_sequence_of_path, enumerate_admissible, run_algorithm,
    AlgorithmTrace, Regime, RegimeTag, TraceStep, DEFAULT_PATH_CAP,
};
pub use graph::{BipartiteGraph, IsolatedUPolicy, UNode, VNode};
pub use law::LawDescriptor;
pub use params::{Exponent, ModelParams};
pub use predictor::{
    complete_bipartite_prediction, fork_mean_nucleation, gamma_sequence, iid_min_prefactor,
    law_for_trace, mean_transition, mixture_mean, LawPrediction, MinKind, TransitionPrediction,
};
pub use rational::Rational;
pub use rng::Rng;
pub use simulator::{simulate, Cap, NetworkState, SimOutcome};
