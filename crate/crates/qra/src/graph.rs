//! Bipartite interference graphs.
//!
//! Node identifiers are opaque strings; iteration order is declaration
//! order throughout, so tie-breaking under a seeded generator is
//! reproducible. Graph values are immutable after construction.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::GraphError;

/// Index of a node on the U side (declaration order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UNode(pub usize);

/// Index of a node on the V side (declaration order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VNode(pub usize);

/// Bipartite interference graph `G = ((U, V), E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    u_names: Vec<String>,
    v_names: Vec<String>,
    /// Neighbors of each V-node, ascending by U index.
    v_adj: Vec<Vec<UNode>>,
    /// Neighbors of each U-node, ascending by V index.
    u_adj: Vec<Vec<VNode>>,
}

/// How strictly `parse` treats U-nodes without any V-neighbor.
///
/// A U-node with no V-neighbor can never be permanently blocked, so the
/// all-V-active target would require it to be momentarily inactive and the
/// transition time becomes ill-conditioned. The strict mode rejects such
/// input; the permissive mode accepts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsolatedUPolicy {
    #[default]
    Reject,
    Allow,
}

#[derive(Deserialize)]
struct GraphJson {
    u: Vec<String>,
    v: Vec<String>,
    edges: Vec<(String, String)>,
}

impl BipartiteGraph {
    /// Build a graph from named parts. Edges may come in any order;
    /// adjacency is stored sorted by declaration index.
    pub fn new(
        u_names: Vec<String>,
        v_names: Vec<String>,
        edges: &[(String, String)],
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(u_names, v_names)?;
        let mut seen = HashSet::new();
        for (u, v) in edges {
            g.add_edge_named(u, v, &mut seen, 0)?;
        }
        g.sort_adjacency();
        Ok(g)
    }

    fn empty(u_names: Vec<String>, v_names: Vec<String>) -> Result<Self, GraphError> {
        let mut all = HashSet::new();
        for name in &u_names {
            if !all.insert(name.clone()) {
                return Err(GraphError::DuplicateNode { node: name.clone() });
            }
        }
        for name in &v_names {
            if u_names.contains(name) {
                return Err(GraphError::NodeOnBothSides { node: name.clone() });
            }
            if !all.insert(name.clone()) {
                return Err(GraphError::DuplicateNode { node: name.clone() });
            }
        }
        let v_adj = vec![Vec::new(); v_names.len()];
        let u_adj = vec![Vec::new(); u_names.len()];
        Ok(BipartiteGraph {
            u_names,
            v_names,
            v_adj,
            u_adj,
        })
    }

    fn add_edge_named(
        &mut self,
        u: &str,
        v: &str,
        seen: &mut HashSet<(usize, usize)>,
        line: usize,
    ) -> Result<(), GraphError> {
        let ui = self
            .u_names
            .iter()
            .position(|n| n == u)
            .ok_or_else(|| GraphError::UndeclaredNode {
                line,
                node: u.to_string(),
            })?;
        let vi = self
            .v_names
            .iter()
            .position(|n| n == v)
            .ok_or_else(|| GraphError::UndeclaredNode {
                line,
                node: v.to_string(),
            })?;
        if !seen.insert((ui, vi)) {
            return Err(GraphError::DuplicateEdge {
                line,
                u: u.to_string(),
                v: v.to_string(),
            });
        }
        self.v_adj[vi].push(UNode(ui));
        self.u_adj[ui].push(VNode(vi));
        Ok(())
    }

    fn sort_adjacency(&mut self) {
        for adj in &mut self.v_adj {
            adj.sort_unstable();
        }
        for adj in &mut self.u_adj {
            adj.sort_unstable();
        }
    }

    /// Parse the edge-list text format or its JSON equivalent,
    /// rejecting isolated U-nodes.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        Self::parse_with(text, IsolatedUPolicy::Reject)
    }

    /// Parse with an explicit policy for isolated U-nodes.
    ///
    /// Text format (line-oriented, `#` starts a comment):
    ///
    /// ```text
    /// U: u1 u2 ...
    /// V: v1 v2 ...
    /// E: u1 v1 u2 v1 ...   # optionally one "u v" pair per following line
    /// ```
    ///
    /// A JSON document `{"u": [...], "v": [...], "edges": [["u1","v1"], ...]}`
    /// is accepted interchangeably.
    pub fn parse_with(text: &str, policy: IsolatedUPolicy) -> Result<Self, GraphError> {
        let graph = if text.trim_start().starts_with('{') {
            let doc: GraphJson =
                serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
            Self::new(doc.u, doc.v, &doc.edges)?
        } else {
            Self::parse_text(text)?
        };
        if policy == IsolatedUPolicy::Reject {
            if let Some(ui) = graph.u_adj.iter().position(|adj| adj.is_empty()) {
                return Err(GraphError::IsolatedUNode {
                    node: graph.u_names[ui].clone(),
                });
            }
        }
        Ok(graph)
    }

    fn parse_text(text: &str) -> Result<Self, GraphError> {
        let mut u_names: Option<Vec<String>> = None;
        let mut v_names: Option<Vec<String>> = None;
        let mut graph: Option<BipartiteGraph> = None;
        let mut seen = HashSet::new();
        let mut in_edges = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| GraphError::Malformed {
                line: line_no,
                reason: reason.to_string(),
            };
            if let Some(rest) = line.strip_prefix("U:") {
                if u_names.is_some() || in_edges {
                    return Err(malformed("unexpected second U: declaration"));
                }
                u_names = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("V:") {
                if v_names.is_some() || in_edges {
                    return Err(malformed("unexpected second V: declaration"));
                }
                if u_names.is_none() {
                    return Err(malformed("V: declaration before U:"));
                }
                v_names = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("E:") {
                if in_edges {
                    return Err(malformed("unexpected second E: declaration"));
                }
                let (u, v) = match (u_names.take(), v_names.take()) {
                    (Some(u), Some(v)) => (u, v),
                    _ => return Err(malformed("E: before both sides are declared")),
                };
                graph = Some(Self::empty(u, v)?);
                in_edges = true;
                let g = graph.as_mut().unwrap();
                parse_edge_tokens(rest, g, &mut seen, line_no)?;
            } else if in_edges {
                let g = graph.as_mut().unwrap();
                parse_edge_tokens(line, g, &mut seen, line_no)?;
            } else {
                return Err(malformed("expected a U:/V:/E: declaration"));
            }
        }

        let mut graph = graph.ok_or(GraphError::Malformed {
            line: text.lines().count(),
            reason: "missing E: section".to_string(),
        })?;
        graph.sort_adjacency();
        Ok(graph)
    }

    /// Canonical edge-list form: side declarations, then one edge per line
    /// in declaration order. `parse` of this text reproduces the graph.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("U:");
        for name in &self.u_names {
            let _ = write!(out, " {name}");
        }
        out.push_str("\nV:");
        for name in &self.v_names {
            let _ = write!(out, " {name}");
        }
        out.push_str("\nE:\n");
        for (ui, adj) in self.u_adj.iter().enumerate() {
            for &VNode(vi) in adj {
                let _ = writeln!(out, "{} {}", self.u_names[ui], self.v_names[vi]);
            }
        }
        out
    }

    pub fn u_count(&self) -> usize {
        self.u_names.len()
    }

    pub fn v_count(&self) -> usize {
        self.v_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.v_adj.iter().map(Vec::len).sum()
    }

    pub fn u_name(&self, u: UNode) -> &str {
        &self.u_names[u.0]
    }

    pub fn v_name(&self, v: VNode) -> &str {
        &self.v_names[v.0]
    }

    pub fn u_nodes(&self) -> impl Iterator<Item = UNode> {
        (0..self.u_names.len()).map(UNode)
    }

    pub fn v_nodes(&self) -> impl Iterator<Item = VNode> {
        (0..self.v_names.len()).map(VNode)
    }

    pub fn v_by_name(&self, name: &str) -> Result<VNode, GraphError> {
        self.v_names
            .iter()
            .position(|n| n == name)
            .map(VNode)
            .ok_or_else(|| GraphError::UnknownNode {
                node: name.to_string(),
            })
    }

    /// Neighbors `N(v)` in U, ascending by declaration order.
    pub fn neighbors_of_v(&self, v: VNode) -> &[UNode] {
        &self.v_adj[v.0]
    }

    /// Neighbors of a U-node in V, ascending by declaration order.
    pub fn neighbors_of_u(&self, u: UNode) -> &[VNode] {
        &self.u_adj[u.0]
    }

    /// Degree `d(v) = |N(v)|`.
    pub fn degree(&self, v: VNode) -> usize {
        self.v_adj[v.0].len()
    }

    /// Minimum degree over V, the V-nodes attaining it (declaration
    /// order), and how many there are.
    pub fn min_degree_set(&self) -> Result<(usize, Vec<VNode>, usize), GraphError> {
        if self.v_names.is_empty() {
            return Err(GraphError::EmptyVSide);
        }
        let min = self.v_adj.iter().map(Vec::len).min().unwrap();
        let nodes: Vec<VNode> = self
            .v_nodes()
            .filter(|&v| self.degree(v) == min)
            .collect();
        let n = nodes.len();
        Ok((min, nodes, n))
    }

    /// Whether every V-node interferes with every U-node.
    pub fn is_complete_bipartite(&self) -> bool {
        !self.u_names.is_empty()
            && !self.v_names.is_empty()
            && self.v_adj.iter().all(|adj| adj.len() == self.u_names.len())
    }

    /// Remove the fork of `v`: the node itself, all its U-neighbors, and
    /// every edge incident to a removed node. Pure; the input is untouched.
    pub fn remove_fork(&self, v: VNode) -> BipartiteGraph {
        let dead_u: HashSet<UNode> = self.v_adj[v.0].iter().copied().collect();
        let mut u_names = Vec::new();
        let mut u_keep = Vec::new();
        for u in self.u_nodes() {
            if !dead_u.contains(&u) {
                u_keep.push(u);
                u_names.push(self.u_names[u.0].clone());
            }
        }
        let u_remap: HashMap<UNode, usize> =
            u_keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();

        let mut v_names = Vec::new();
        let mut v_adj = Vec::new();
        let mut u_adj = vec![Vec::new(); u_names.len()];
        for w in self.v_nodes() {
            if w == v {
                continue;
            }
            let vi = v_names.len();
            v_names.push(self.v_names[w.0].clone());
            let mut adj = Vec::new();
            for old_u in &self.v_adj[w.0] {
                if let Some(&new_u) = u_remap.get(old_u) {
                    adj.push(UNode(new_u));
                    u_adj[new_u].push(VNode(vi));
                }
            }
            v_adj.push(adj);
        }
        BipartiteGraph {
            u_names,
            v_names,
            v_adj,
            u_adj,
        }
    }
}

fn parse_edge_tokens(
    text: &str,
    g: &mut BipartiteGraph,
    seen: &mut HashSet<(usize, usize)>,
    line: usize,
) -> Result<(), GraphError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() % 2 != 0 {
        return Err(GraphError::Malformed {
            line,
            reason: format!("odd number of edge tokens ({})", tokens.len()),
        });
    }
    for pair in tokens.chunks(2) {
        g.add_edge_named(pair[0], pair[1], seen, line)?;
    }
    Ok(())
}
