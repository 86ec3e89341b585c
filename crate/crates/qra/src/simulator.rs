//! Exact event-driven simulation of the joint activity/queue process.
//!
//! Between events every clock rate in the race is constant: inactive
//! queues only move through arrival events, active nodes deactivate at
//! rate 1 regardless of their queue, and arrivals are Poisson. So the
//! competing exponential clocks can be sampled exactly, with no
//! discretization and no thinning. Blocked nodes carry no activation
//! clock at all; by memorylessness this yields the same process law as
//! sampling and discarding failed attempts, without drowning the event
//! loop in no-ops from the aggressive V side.

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::graph::{BipartiteGraph, UNode, VNode};
use crate::params::ModelParams;
use crate::rng::Rng;

/// Queue level after `dt` time units without intervening events:
/// active queues drain at speed `c` and reflect at zero, inactive queues
/// hold still (arrivals are events, not flows).
pub fn queue_at(value: f64, active: bool, dt: f64, c: f64) -> f64 {
    if active {
        (value - c * dt).max(0.0)
    } else {
        value
    }
}

/// Node handle valid for the graph the state was built from: U-nodes
/// first in declaration order, then V-nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRef(usize);

impl NodeRef {
    pub fn of_u(u: UNode) -> NodeRef {
        NodeRef(u.0)
    }

    pub fn of_v(g: &BipartiteGraph, v: VNode) -> NodeRef {
        NodeRef(g.u_count() + v.0)
    }

    pub fn as_u(self, g: &BipartiteGraph) -> Option<UNode> {
        (self.0 < g.u_count()).then_some(UNode(self.0))
    }

    pub fn as_v(self, g: &BipartiteGraph) -> Option<VNode> {
        (self.0 >= g.u_count()).then(|| VNode(self.0 - g.u_count()))
    }

    pub fn name(self, g: &BipartiteGraph) -> &str {
        match self.as_u(g) {
            Some(u) => g.u_name(u),
            None => g.v_name(VNode(self.0 - g.u_count())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Arrival(NodeRef),
    Activation(NodeRef),
    Deactivation(NodeRef),
}

impl Event {
    pub fn node(self) -> NodeRef {
        match self {
            Event::Arrival(w) | Event::Activation(w) | Event::Deactivation(w) => w,
        }
    }
}

/// Event and simulated-time budget of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub max_events: u64,
    pub max_time: f64,
}

impl Cap {
    /// Default budget: generous on events, ten drain times on the clock
    /// (supercritical runs take one drain time).
    pub fn default_for(p: &ModelParams) -> Cap {
        Cap {
            max_events: 100_000_000,
            max_time: 10.0 * p.gamma_u * p.r / p.drain_u(),
        }
    }
}

/// One replication's record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Hitting time of the all-V-active configuration (or the cap).
    pub tau: f64,
    /// V-nodes by first activation.
    #[serde(rename = "order")]
    pub activation_order: Vec<String>,
    /// Surviving-U queue levels at each first activation, declaration
    /// order within each snapshot.
    #[serde(rename = "snapshots")]
    pub queue_snapshots: Vec<Vec<f64>>,
    #[serde(rename = "events")]
    pub event_count: u64,
    pub seed: u64,
    pub capped: bool,
    /// U-activations observed after the first activation of a V-neighbor
    /// (bookkeeping for the blocking-sticks check; not part of the wire
    /// format).
    #[serde(skip)]
    pub late_u_reactivations: u64,
}

/// Joint activity/queue state, queues materialized lazily per node.
#[derive(Debug, Clone)]
pub struct NetworkState {
    clock: f64,
    active: Vec<bool>,
    queue_value: Vec<f64>,
    queue_seen_at: Vec<f64>,
    /// Cached activation rate; valid while the node is inactive.
    act_rate: Vec<f64>,
    active_neighbors: Vec<u32>,
    n_active_u: usize,
    n_active_v: usize,
    /// Whether some V-neighbor of this U-node has activated already.
    u_betrayed: Vec<bool>,
    /// U-nodes adjacent to a first-activated V-node.
    u_eliminated: Vec<bool>,
    activation_order: Vec<VNode>,
    first_activated: Vec<bool>,
    queue_snapshots: Vec<Vec<f64>>,
    late_u_reactivations: u64,
}

impl NetworkState {
    /// The all-U-active initial configuration with queues `gamma_u r` on
    /// U and `gamma_v r` on V.
    pub fn initial(g: &BipartiteGraph, p: &ModelParams) -> NetworkState {
        let nu = g.u_count();
        let nv = g.v_count();
        let n = nu + nv;
        let mut queue_value = vec![p.gamma_u * p.r; n];
        for q in queue_value.iter_mut().skip(nu) {
            *q = p.gamma_v * p.r;
        }
        let mut active = vec![false; n];
        active[..nu].fill(true);
        let mut active_neighbors = vec![0u32; n];
        for v in g.v_nodes() {
            active_neighbors[nu + v.0] = g.degree(v) as u32;
        }
        let mut act_rate = vec![0.0; n];
        for v in g.v_nodes() {
            act_rate[nu + v.0] = p.g_v(queue_value[nu + v.0]);
        }
        NetworkState {
            clock: 0.0,
            active,
            queue_value,
            queue_seen_at: vec![0.0; n],
            act_rate,
            active_neighbors,
            n_active_u: nu,
            n_active_v: 0,
            u_betrayed: vec![false; nu],
            u_eliminated: vec![false; nu],
            activation_order: Vec::with_capacity(nv),
            first_activated: vec![false; nv],
            queue_snapshots: Vec::with_capacity(nv),
            late_u_reactivations: 0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn is_active(&self, w: NodeRef) -> bool {
        self.active[w.0]
    }

    /// Queue level of a node at the current clock.
    pub fn queue(&self, p: &ModelParams, w: NodeRef) -> f64 {
        queue_at(
            self.queue_value[w.0],
            self.active[w.0],
            self.clock - self.queue_seen_at[w.0],
            p.c,
        )
    }

    /// The exact hitting condition: all V active and all U inactive.
    pub fn hit(&self, g: &BipartiteGraph) -> bool {
        self.n_active_v == g.v_count() && self.n_active_u == 0
    }

    /// Sum of all clock rates currently in the race.
    pub fn total_rate(&self, p: &ModelParams) -> f64 {
        let n = self.active.len();
        let mut total = n as f64 * p.lambda;
        for w in 0..n {
            if self.active[w] {
                total += 1.0;
            } else if self.active_neighbors[w] == 0 {
                total += self.act_rate[w];
            }
        }
        total
    }

    /// Sample the next event of the exponential race. Does not touch the
    /// state; `apply` commits the result. Arrivals run at rate `lambda`
    /// on every node, deactivation at rate 1 on active nodes, activation
    /// at the cached `g(Q)` on inactive nodes with no active neighbor;
    /// blocked nodes carry no activation clock.
    pub fn next_event(
        &self,
        g: &BipartiteGraph,
        p: &ModelParams,
        rng: &mut Rng,
    ) -> Result<(Event, f64), SimError> {
        debug_assert_eq!(self.active.len(), g.u_count() + g.v_count());
        let total = self.total_rate(p);
        if !(total > 0.0) {
            return Err(SimError::TotalRateZero);
        }
        let dt = rng.exp(total);
        let mut target = rng.uniform() * total;
        let n = self.active.len();
        let mut last_eligible = None;
        for w in 0..n {
            let node = NodeRef(w);
            if p.lambda > 0.0 {
                last_eligible = Some(Event::Arrival(node));
                target -= p.lambda;
                if target < 0.0 {
                    return Ok((Event::Arrival(node), dt));
                }
            }
            if self.active[w] {
                last_eligible = Some(Event::Deactivation(node));
                target -= 1.0;
                if target < 0.0 {
                    return Ok((Event::Deactivation(node), dt));
                }
            } else if self.active_neighbors[w] == 0 && self.act_rate[w] > 0.0 {
                last_eligible = Some(Event::Activation(node));
                target -= self.act_rate[w];
                if target < 0.0 {
                    return Ok((Event::Activation(node), dt));
                }
            }
        }
        // rounding pushed the target past the last positive rate
        Ok((last_eligible.expect("total > 0 implies a clock exists"), dt))
    }

    fn materialize(&mut self, p: &ModelParams, w: usize) {
        self.queue_value[w] = queue_at(
            self.queue_value[w],
            self.active[w],
            self.clock - self.queue_seen_at[w],
            p.c,
        );
        self.queue_seen_at[w] = self.clock;
    }

    fn refresh_act_rate(&mut self, g: &BipartiteGraph, p: &ModelParams, w: usize) {
        self.act_rate[w] = if w < g.u_count() {
            p.g_u(self.queue_value[w])
        } else {
            p.g_v(self.queue_value[w])
        };
    }

    /// Commit a sampled event. Consumes one jump-size draw on arrivals.
    pub fn apply(
        &mut self,
        g: &BipartiteGraph,
        p: &ModelParams,
        rng: &mut Rng,
        event: Event,
        dt: f64,
    ) {
        self.clock += dt;
        let nu = g.u_count();
        match event {
            Event::Arrival(node) => {
                let w = node.0;
                let mu = if w < nu { p.mu_u } else { p.mu_v };
                self.materialize(p, w);
                self.queue_value[w] += rng.exp(mu);
                if !self.active[w] {
                    self.refresh_act_rate(g, p, w);
                }
            }
            Event::Deactivation(node) => {
                let w = node.0;
                debug_assert!(self.active[w]);
                self.materialize(p, w);
                self.active[w] = false;
                self.refresh_act_rate(g, p, w);
                if let Some(u) = node.as_u(g) {
                    self.n_active_u -= 1;
                    for &v in g.neighbors_of_u(u) {
                        self.active_neighbors[nu + v.0] -= 1;
                    }
                } else {
                    self.n_active_v -= 1;
                    let v = node.as_v(g).unwrap();
                    for &u in g.neighbors_of_v(v) {
                        self.active_neighbors[u.0] -= 1;
                    }
                }
            }
            Event::Activation(node) => {
                let w = node.0;
                debug_assert!(!self.active[w] && self.active_neighbors[w] == 0);
                self.materialize(p, w);
                self.active[w] = true;
                if let Some(u) = node.as_u(g) {
                    self.n_active_u += 1;
                    if self.u_betrayed[u.0] {
                        self.late_u_reactivations += 1;
                    }
                    for &v in g.neighbors_of_u(u) {
                        self.active_neighbors[nu + v.0] += 1;
                    }
                } else {
                    let v = node.as_v(g).unwrap();
                    self.n_active_v += 1;
                    for &u in g.neighbors_of_v(v) {
                        self.active_neighbors[u.0] += 1;
                        self.u_betrayed[u.0] = true;
                    }
                    if !self.first_activated[v.0] {
                        self.first_activated[v.0] = true;
                        self.activation_order.push(v);
                        for &u in g.neighbors_of_v(v) {
                            self.u_eliminated[u.0] = true;
                        }
                        let snapshot: Vec<f64> = (0..nu)
                            .filter(|&u| !self.u_eliminated[u])
                            .map(|u| {
                                queue_at(
                                    self.queue_value[u],
                                    self.active[u],
                                    self.clock - self.queue_seen_at[u],
                                    p.c,
                                )
                            })
                            .collect();
                        self.queue_snapshots.push(snapshot);
                    }
                }
            }
        }
    }

    /// Sample and commit one event.
    pub fn step(
        &mut self,
        g: &BipartiteGraph,
        p: &ModelParams,
        rng: &mut Rng,
    ) -> Result<Event, SimError> {
        let (event, dt) = self.next_event(g, p, rng)?;
        self.apply(g, p, rng, event, dt);
        Ok(event)
    }
}

/// Run one replication from the all-U-active configuration until the
/// all-V-active configuration is hit or the cap is reached. Identical
/// inputs and seed give an identical outcome.
pub fn simulate(
    g: &BipartiteGraph,
    p: &ModelParams,
    seed: u64,
    cap: Option<Cap>,
) -> Result<SimOutcome, SimError> {
    let cap = cap.unwrap_or_else(|| Cap::default_for(p));
    let mut rng = Rng::seed_from_u64(seed);
    let mut state = NetworkState::initial(g, p);
    let mut event_count: u64 = 0;
    let mut capped = false;
    while !state.hit(g) {
        if event_count >= cap.max_events || state.clock >= cap.max_time {
            capped = true;
            break;
        }
        state.step(g, p, &mut rng)?;
        event_count += 1;
    }
    Ok(SimOutcome {
        tau: state.clock,
        activation_order: state
            .activation_order
            .iter()
            .map(|&v| g.v_name(v).to_string())
            .collect(),
        queue_snapshots: state.queue_snapshots,
        event_count,
        seed,
        capped,
        late_u_reactivations: state.late_u_reactivations,
    })
}
