//! Weighted undirected interaction networks.
//!
//! A [`Network`] is the static description of the system: per-node inertia,
//! damping and natural velocity, positive edge weights, a coupling function,
//! and a measured/unmeasured partition. Constructors enforce the structural
//! invariants (connectivity, no self-loops or duplicates, at least one
//! measured node), so downstream numerics never have to re-check them.
//!
//! Natural velocities are shifted to zero mean on construction and the
//! removed offset is kept; the balance equation `omega = L x` is only
//! solvable with `omega` orthogonal to the constant mode.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};

/// One dynamical agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Inertia m_i >= 0; zero selects the overdamped first-order equation.
    pub inertia: f64,
    /// Damping d_i > 0.
    pub damping: f64,
    /// Natural velocity omega_i (stored zero-mean across the network).
    pub natural_velocity: f64,
    pub measured: bool,
}

/// Undirected edge, stored once with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    coupling: CouplingSpec,
    omega_offset: f64,
}

impl Network {
    /// Builds and validates a network from index-based edges.
    pub fn new(
        mut nodes: Vec<Node>,
        edges: Vec<(usize, usize, f64)>,
        coupling: CouplingSpec,
    ) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return Err(Error::InvalidNetwork(format!(
                "need at least two nodes, got {n}"
            )));
        }
        let mut seen_ids = std::collections::HashSet::new();
        for node in &nodes {
            if node.id.is_empty() {
                return Err(Error::InvalidNetwork("empty node id".into()));
            }
            if !seen_ids.insert(node.id.clone()) {
                return Err(Error::InvalidNetwork(format!("duplicate node id {}", node.id)));
            }
            if !(node.inertia >= 0.0) || !node.inertia.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has invalid inertia {}",
                    node.id, node.inertia
                )));
            }
            if !(node.damping > 0.0) || !node.damping.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has non-positive damping {}",
                    node.id, node.damping
                )));
            }
            if !node.natural_velocity.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has non-finite natural velocity",
                    node.id
                )));
            }
        }
        if !nodes.iter().any(|v| v.measured) {
            return Err(Error::InvalidNetwork("no measured node".into()));
        }

        let mut normalized = Vec::with_capacity(edges.len());
        let mut seen_edges = std::collections::HashSet::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a}, {b}) references a missing node"
                )));
            }
            if a == b {
                return Err(Error::InvalidNetwork(format!("self-loop at node index {a}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            let (i, j) = (a.min(b), a.max(b));
            if !seen_edges.insert((i, j)) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({i}, {j})")));
            }
            normalized.push(Edge { i, j, weight: w });
        }

        coupling.validate()?;

        // Connectivity by breadth-first search.
        let mut adjacency = vec![Vec::new(); n];
        for e in &normalized {
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidNetwork(format!(
                "graph is disconnected ({reached} of {n} nodes reachable)"
            )));
        }

        // Work in the co-moving frame: omega gets zero mean, offset recorded.
        let offset = nodes.iter().map(|v| v.natural_velocity).sum::<f64>() / n as f64;
        for node in &mut nodes {
            node.natural_velocity -= offset;
        }

        Ok(Network {
            nodes,
            edges: normalized,
            coupling,
            omega_offset: offset,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    /// Mean natural velocity removed at construction.
    pub fn omega_offset(&self) -> f64 {
        self.omega_offset
    }

    /// Zero-mean natural velocity vector.
    pub fn omega(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.nodes.len(),
            self.nodes.iter().map(|v| v.natural_velocity),
        )
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|v| v.id == id)
            .ok_or_else(|| Error::InvalidTarget(format!("node {id}")))
    }

    pub fn id_of(&self, index: usize) -> &str {
        &self.nodes[index].id
    }

    /// Edge position for an unordered node pair, if present.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = (a.min(b), a.max(b));
        self.edges.iter().position(|e| e.i == i && e.j == j)
    }

    /// Indices of measured nodes, in insertion order.
    pub fn measured_indices(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&k| self.nodes[k].measured).collect()
    }

    /// Indices of unmeasured nodes, in insertion order.
    pub fn unmeasured_indices(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&k| !self.nodes[k].measured).collect()
    }

    /// Returns a copy with the measured flag set from an explicit reduced set.
    pub fn with_reduced_ids(&self, reduced_ids: &[String]) -> Result<Network> {
        let mut reduced = vec![false; self.nodes.len()];
        for id in reduced_ids {
            reduced[self.index_of(id)?] = true;
        }
        let mut out = self.clone();
        for (k, node) in out.nodes.iter_mut().enumerate() {
            node.measured = !reduced[k];
        }
        if !out.nodes.iter().any(|v| v.measured) {
            return Err(Error::InvalidNetwork("reduced set covers every node".into()));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// JSON representation: node ids are strings, edges reference ids.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: String,
    m: f64,
    d: f64,
    omega: f64,
    measured: bool,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    i: String,
    j: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<NodeFile>,
    edges: Vec<EdgeFile>,
    coupling: CouplingSpec,
}

impl From<Network> for NetworkFile {
    fn from(net: Network) -> Self {
        NetworkFile {
            nodes: net
                .nodes
                .iter()
                .map(|v| NodeFile {
                    id: v.id.clone(),
                    m: v.inertia,
                    d: v.damping,
                    omega: v.natural_velocity,
                    measured: v.measured,
                })
                .collect(),
            edges: net
                .edges
                .iter()
                .map(|e| EdgeFile {
                    i: net.nodes[e.i].id.clone(),
                    j: net.nodes[e.j].id.clone(),
                    weight: e.weight,
                })
                .collect(),
            coupling: net.coupling,
        }
    }
}

impl TryFrom<NetworkFile> for Network {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        let nodes: Vec<Node> = file
            .nodes
            .iter()
            .map(|v| Node {
                id: v.id.clone(),
                inertia: v.m,
                damping: v.d,
                natural_velocity: v.omega,
                measured: v.measured,
            })
            .collect();
        let lookup: std::collections::HashMap<&str, usize> = file
            .nodes
            .iter()
            .enumerate()
            .map(|(k, v)| (v.id.as_str(), k))
            .collect();
        let mut edges = Vec::with_capacity(file.edges.len());
        for e in &file.edges {
            let &i = lookup
                .get(e.i.as_str())
                .ok_or_else(|| Error::InvalidTarget(format!("node {}", e.i)))?;
            let &j = lookup
                .get(e.j.as_str())
                .ok_or_else(|| Error::InvalidTarget(format!("node {}", e.j)))?;
            edges.push((i, j, e.weight));
        }
        Network::new(nodes, edges, file.coupling)
    }
}

/// Convenience constructor for tests and generators: uniform m, d and the
/// given omegas, all nodes measured, ids "1", "2", ...
pub fn network_from_weights(
    omegas: &[f64],
    edges: &[(usize, usize, f64)],
    coupling: CouplingSpec,
) -> Result<Network> {
    let nodes = omegas
        .iter()
        .enumerate()
        .map(|(k, &w)| Node {
            id: (k + 1).to_string(),
            inertia: 1.0,
            damping: 1.0,
            natural_velocity: w,
            measured: true,
        })
        .collect();
    Network::new(nodes, edges.to_vec(), coupling)
}
