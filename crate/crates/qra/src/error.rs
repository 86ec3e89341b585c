//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalError {
    #[error("rational overflow in probability arithmetic")]
    Overflow,
    #[error("zero denominator")]
    ZeroDenominator,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed input: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: edge references undeclared node {node:?}")]
    UndeclaredNode { line: usize, node: String },
    #[error("line {line}: duplicate edge {u:?} {v:?}")]
    DuplicateEdge { line: usize, u: String, v: String },
    #[error("node {node:?} declared on both sides")]
    NodeOnBothSides { node: String },
    #[error("duplicate node {node:?} within one side")]
    DuplicateNode { node: String },
    #[error(
        "U-node {node:?} has no V-neighbor; it can never be permanently blocked, \
         making the target configuration ill-conditioned (pass the permissive flag to accept)"
    )]
    IsolatedUNode { node: String },
    #[error("unknown node {node:?}")]
    UnknownNode { node: String },
    #[error("operation requires a nonempty V side")]
    EmptyVSide,
    #[error("invalid graph JSON: {0}")]
    Json(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgorithmError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("admissible path enumeration exceeded the cap of {cap} paths")]
    PathCapExceeded { cap: usize },
    #[error("path is not a permutation of V: {reason}")]
    NotAPermutation { reason: String },
    #[error(transparent)]
    Rational(#[from] RationalError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("requires {field} > 0 (got {value})")]
    NotPositive { field: &'static str, value: f64 },
    #[error("requires rho_U = lambda/mu_U < c (got rho_U = {rho}, c = {c})")]
    UnstableU { rho: f64, c: f64 },
    #[error("requires rho_V = lambda/mu_V < c (got rho_V = {rho}, c = {c})")]
    UnstableV { rho: f64, c: f64 },
    #[error("requires gamma_u >= gamma_v > 0 (got gamma_u = {gamma_u}, gamma_v = {gamma_v})")]
    InitialQueueOrder { gamma_u: f64, gamma_v: f64 },
    #[error("requires beta_prime > beta + 1 (got beta_prime = {beta_prime}, beta = {beta})")]
    NotAggressiveEnough { beta: f64, beta_prime: f64 },
    #[error("invalid exponent string {text:?}: expected a number or \"p/q\"")]
    BadExponent { text: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum PredictorError {
    #[error("degenerate fork of degree 0: nucleation is O(1), no coefficient predicted")]
    DegenerateFork,
    #[error("fork degree must be >= 2 for a complete-bipartite prediction (got {m})")]
    DegenerateGraph { m: usize },
    #[error(
        "updated queue coefficient turned non-positive at step {step} (gamma = {gamma}); \
         the positivity claim of the critical recursion fails for these parameters"
    )]
    NonPositiveGamma { step: usize, gamma: f64 },
    #[error("traces disagree on the maximum least degree ({a} vs {b}); enumeration is inconsistent")]
    InconsistentDStar { a: usize, b: usize },
    #[error("no trace supplied")]
    NoTraces,
    #[error("degenerate regime (d* <= 1): no limit law is predicted")]
    DegenerateRegime,
}

#[derive(Debug, Error, PartialEq)]
pub enum LawError {
    #[error("law evaluation requires x >= 0 (got {x})")]
    NegativeX { x: f64 },
    #[error("hypoexponential law requires at least one rate")]
    NoRates,
    #[error("hypoexponential rates must be positive (got {rate})")]
    NonPositiveRate { rate: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("total event rate is zero; the process cannot move")]
    TotalRateZero,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("no samples supplied")]
    NoSamples,
    #[error("all {n} replications hit the event/time cap; parameters are too slow for desk scale")]
    AllCapped { n: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("export failed: {0}")]
    Export(String),
}
