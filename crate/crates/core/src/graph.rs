//! Undirected workspace graphs.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Grid coordinate `(row, col)`.
pub type Cell = (u32, u32);

/// An undirected graph without self-loops.
///
/// Edge ids follow the sorted order of the canonical `(min, max)` endpoint
/// pairs, so edge iteration order is a function of the edge set alone.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    edges: Vec<(NodeId, NodeId)>,
    edge_index: HashMap<(NodeId, NodeId), EdgeId>,
    coords: Option<Vec<Cell>>,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut canonical = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) references a missing node")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        canonical.dedup();

        let mut adjacency = vec![Vec::new(); num_nodes];
        let mut edge_index = HashMap::with_capacity(canonical.len());
        for (id, &(u, v)) in canonical.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
            edge_index.insert((u, v), id);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph { adjacency, edges: canonical, edge_index, coords: None })
    }

    /// Attaches grid coordinates, one per node.
    pub fn with_coords(mut self, coords: Vec<Cell>) -> Result<Self> {
        if coords.len() != self.num_nodes() {
            return Err(Error::InvalidGraph(format!(
                "{} coordinates for {} nodes",
                coords.len(),
                self.num_nodes()
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// 4-connected grid graph over the passable cells of a `height x width`
    /// board. Nodes are numbered in row-major order of passable cells.
    pub fn grid(height: u32, width: u32, passable: impl Fn(u32, u32) -> bool) -> Self {
        let mut ids = vec![None; (height * width) as usize];
        let mut coords = Vec::new();
        for r in 0..height {
            for c in 0..width {
                if passable(r, c) {
                    ids[(r * width + c) as usize] = Some(coords.len());
                    coords.push((r, c));
                }
            }
        }
        let mut edges = Vec::new();
        for (id, &(r, c)) in coords.iter().enumerate() {
            if c + 1 < width {
                if let Some(right) = ids[(r * width + c + 1) as usize] {
                    edges.push((id, right));
                }
            }
            if r + 1 < height {
                if let Some(down) = ids[((r + 1) * width + c) as usize] {
                    edges.push((id, down));
                }
            }
        }
        Graph::new(coords.len(), &edges)
            .and_then(|g| g.with_coords(coords))
            .expect("grid construction yields a valid graph")
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        v < self.num_nodes()
    }

    /// Neighbors of `v` with the connecting edge id, sorted by neighbor.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn edge_endpoints(&self, e: EdgeId) -> Option<(NodeId, NodeId)> {
        self.edges.get(e).copied()
    }

    /// Canonical `(min, max)` endpoint pairs in edge-id order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn coord(&self, v: NodeId) -> Option<Cell> {
        self.coords.as_ref().map(|c| c[v])
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn node_at(&self, cell: Cell) -> Option<NodeId> {
        self.coords.as_ref()?.binary_search(&cell).ok()
    }

    pub fn manhattan(&self, u: NodeId, v: NodeId) -> Option<u64> {
        let (a, b) = (self.coord(u)?, self.coord(v)?);
        Some((a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as u64)
    }
}
