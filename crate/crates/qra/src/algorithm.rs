//! Greedy minimum-degree elimination.
//!
//! One run picks, at every step, a uniformly random V-node of minimum
//! residual degree, removes its fork and records `(Y_k, d_k, n_k)`.
//! Enumeration walks every tie-breaking choice depth-first and carries
//! exact rational probabilities.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::AlgorithmError;
use crate::graph::BipartiteGraph;
use crate::params::Exponent;
use crate::rational::Rational;
use crate::rng::Rng;

/// One elimination step: selected node, its residual degree, and the
/// number of minimum-degree choices it was picked from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: String,
    pub dbar: usize,
    pub n_choices: usize,
}

/// A full admissible path through the elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmTrace {
    steps: Vec<TraceStep>,
    d_star: usize,
    probability: Rational,
}

impl AlgorithmTrace {
    fn from_steps(steps: Vec<TraceStep>) -> Result<Self, AlgorithmError> {
        let d_star = steps.iter().map(|s| s.dbar).max().unwrap_or(0);
        let mut probability = Rational::ONE;
        for step in &steps {
            probability = probability.checked_mul(Rational::new(1, step.n_choices as u64)?)?;
        }
        Ok(AlgorithmTrace {
            steps,
            d_star,
            probability,
        })
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Maximum least degree `d* = max_k d_k`.
    pub fn d_star(&self) -> usize {
        self.d_star
    }

    /// Exact probability `prod_k 1/n_k` of this tie-breaking sequence.
    pub fn probability(&self) -> Rational {
        self.probability
    }

    /// Activation order by node name.
    pub fn order(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.node.as_str()).collect()
    }

    /// How many steps attain `d*`.
    pub fn multiplicity_of_dstar(&self) -> usize {
        self.steps.iter().filter(|s| s.dbar == self.d_star).count()
    }

    /// Prefix up to and including the first supercritical step
    /// (`beta * (dbar_k - 1) > 1`); the whole trace if there is none.
    pub fn truncate_at_supercritical(&self, beta: &Exponent) -> AlgorithmTrace {
        let end = self
            .steps
            .iter()
            .position(|s| beta.criticality(s.dbar) == Ordering::Greater)
            .map(|k| k + 1)
            .unwrap_or(self.steps.len());
        // Prefix probabilities still multiply 1/n_k over kept steps only.
        AlgorithmTrace::from_steps(self.steps[..end].to_vec())
            .expect("prefix of a valid trace stays valid")
    }
}

impl Serialize for AlgorithmTrace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AlgorithmTrace", 5)?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("dbar", &self.steps.iter().map(|x| x.dbar).collect::<Vec<_>>())?;
        st.serialize_field(
            "n",
            &self.steps.iter().map(|x| x.n_choices).collect::<Vec<_>>(),
        )?;
        st.serialize_field("d_star", &self.d_star)?;
        st.serialize_field("prob", &self.probability)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for AlgorithmTrace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            order: Vec<String>,
            dbar: Vec<usize>,
            n: Vec<usize>,
        }
        let w = Wire::deserialize(d)?;
        if w.order.len() != w.dbar.len() || w.order.len() != w.n.len() {
            return Err(serde::de::Error::custom("order/dbar/n length mismatch"));
        }
        let steps = w
            .order
            .into_iter()
            .zip(w.dbar)
            .zip(w.n)
            .map(|((node, dbar), n_choices)| TraceStep {
                node,
                dbar,
                n_choices,
            })
            .collect();
        AlgorithmTrace::from_steps(steps).map_err(serde::de::Error::custom)
    }
}

/// Default cap on the number of enumerated paths; enumeration is
/// factorial in `|V|` in the worst case.
pub const DEFAULT_PATH_CAP: usize = 100_000;

/// Run the elimination once. Ties are broken uniformly by `rng`; one
/// uniform draw is consumed at every step even when there is a single
/// choice, so a seed pins the trace independent of branch structure.
pub fn run_algorithm(g: &BipartiteGraph, rng: &mut Rng) -> Result<AlgorithmTrace, AlgorithmError> {
    let mut current = g.clone();
    let mut steps = Vec::with_capacity(g.v_count());
    while current.v_count() > 0 {
        let (dbar, nodes, n) = current.min_degree_set()?;
        let pick = nodes[rng.uniform_usize(n)];
        steps.push(TraceStep {
            node: current.v_name(pick).to_string(),
            dbar,
            n_choices: n,
        });
        current = current.remove_fork(pick);
    }
    Ok(AlgorithmTrace::from_steps(steps)?)
}

/// Enumerate every admissible path with its exact probability.
///
/// Paths come back sorted by activation order (declaration order of the
/// first differing node), and their probabilities sum to exactly 1.
pub fn enumerate_admissible(
    g: &BipartiteGraph,
    cap: usize,
) -> Result<Vec<AlgorithmTrace>, AlgorithmError> {
    fn dfs(
        current: &BipartiteGraph,
        prefix: &mut Vec<TraceStep>,
        out: &mut Vec<AlgorithmTrace>,
        cap: usize,
    ) -> Result<(), AlgorithmError> {
        if current.v_count() == 0 {
            if out.len() == cap {
                return Err(AlgorithmError::PathCapExceeded { cap });
            }
            out.push(AlgorithmTrace::from_steps(prefix.clone())?);
            return Ok(());
        }
        let (dbar, nodes, n) = current.min_degree_set()?;
        for pick in nodes {
            prefix.push(TraceStep {
                node: current.v_name(pick).to_string(),
                dbar,
                n_choices: n,
            });
            let next = current.remove_fork(pick);
            dfs(&next, prefix, out, cap)?;
            prefix.pop();
        }
        Ok(())
    }

    let mut out = Vec::new();
    let mut prefix = Vec::new();
    dfs(g, &mut prefix, &mut out, cap)?;
    Ok(out)
}

/// Residual degree sequence of an arbitrary path (not necessarily
/// admissible): entry `k` is the degree of the `k`-th path node in the
/// graph left after removing the forks of the previous nodes. Also
/// returns the sequence maximum, the path's maximum least degree.
pub fn degree_sequence_of_path(
    g: &BipartiteGraph,
    path: &[&str],
) -> Result<(Vec<usize>, usize), AlgorithmError> {
    if path.len() != g.v_count() {
        return Err(AlgorithmError::NotAPermutation {
            reason: format!("path has {} nodes, V has {}", path.len(), g.v_count()),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for name in path {
        if !seen.insert(*name) {
            return Err(AlgorithmError::NotAPermutation {
                reason: format!("node {name:?} repeats"),
            });
        }
    }
    let mut current = g.clone();
    let mut degrees = Vec::with_capacity(path.len());
    for name in path {
        let v = current.v_by_name(name)?;
        degrees.push(current.degree(v));
        current = current.remove_fork(v);
    }
    let max = degrees.iter().copied().max().unwrap_or(0);
    Ok((degrees, max))
}

/// Behavioral regime of the transition, from `d*` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeTag {
    Subcritical,
    Critical,
    Supercritical,
    /// `d* <= 1`: the transition happens in O(1) time.
    Degenerate,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RegimeTag::Subcritical => "subcritical",
            RegimeTag::Critical => "critical",
            RegimeTag::Supercritical => "supercritical",
            RegimeTag::Degenerate => "degenerate",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub d_star: usize,
    pub beta: f64,
}

/// Classify by the sign of `beta * (d* - 1) - 1`; `d* <= 1` is degenerate.
pub fn classify_regime(d_star: usize, beta: &Exponent) -> Regime {
    let tag = if d_star <= 1 {
        RegimeTag::Degenerate
    } else {
        match beta.criticality(d_star) {
            Ordering::Less => RegimeTag::Subcritical,
            Ordering::Equal => RegimeTag::Critical,
            Ordering::Greater => RegimeTag::Supercritical,
        }
    };
    Regime {
        tag,
        d_star,
        beta: beta.value(),
    }
}
