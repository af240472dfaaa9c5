//! Small connected graphs used as hooking-network blocks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A catalog graph: either a named shape or an explicit edge list.
///
/// Named shapes put the hook at vertex 0: `k2`, `triangle`, `path:L`
/// (`L` edges, hook at one end), `cycle:m`, `star:m` (hook at the centre),
/// `complete:m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Named(String),
    Explicit {
        vertices: usize,
        edges: Vec<(usize, usize)>,
        hook: usize,
    },
}

#[derive(Clone, Debug)]
pub struct HookedGraph {
    adjacency: Vec<Vec<usize>>,
    hook: usize,
}

impl HookedGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize)], hook: usize) -> Result<Self> {
        if vertices == 0 {
            return Err(invalid("graph", "graph must have at least one vertex"));
        }
        if hook >= vertices {
            return Err(invalid("graph.hook", format!("hook {hook} out of range")));
        }
        let mut adjacency = vec![Vec::new(); vertices];
        for &(u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(invalid(
                    "graph.edges",
                    format!("edge ({u},{v}) out of range"),
                ));
            }
            if u == v {
                return Err(invalid("graph.edges", format!("self-loop at {u}")));
            }
            if adjacency[u].contains(&v) {
                return Err(invalid("graph.edges", format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let graph = Self { adjacency, hook };
        if graph.hook_distances().iter().any(Option::is_none) {
            return Err(invalid("graph", "graph must be connected"));
        }
        Ok(graph)
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        match spec {
            GraphSpec::Explicit {
                vertices,
                edges,
                hook,
            } => Self::new(*vertices, edges, *hook),
            GraphSpec::Named(name) => {
                let (shape, size) = match name.split_once(':') {
                    Some((s, k)) => {
                        let k: usize = k
                            .trim()
                            .parse()
                            .map_err(|_| invalid("graph", format!("bad size in {name:?}")))?;
                        (s.trim(), Some(k))
                    }
                    None => (name.trim(), None),
                };
                let need = |min: usize| -> Result<usize> {
                    match size {
                        Some(k) if k >= min => Ok(k),
                        _ => Err(invalid("graph", format!("{name:?} needs a size >= {min}"))),
                    }
                };
                match shape {
                    "k2" => Self::new(2, &[(0, 1)], 0),
                    "triangle" => Self::cycle(3),
                    "path" => {
                        let len = need(1)?;
                        let edges: Vec<_> = (0..len).map(|i| (i, i + 1)).collect();
                        Self::new(len + 1, &edges, 0)
                    }
                    "cycle" => Self::cycle(need(3)?),
                    "star" => {
                        let leaves = need(1)?;
                        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
                        Self::new(leaves + 1, &edges, 0)
                    }
                    "complete" => {
                        let m = need(1)?;
                        let edges: Vec<_> = (0..m)
                            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                            .collect();
                        Self::new(m, &edges, 0)
                    }
                    _ => Err(invalid("graph", format!("unknown graph shape {name:?}"))),
                }
            }
        }
    }

    fn cycle(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Self::new(m, &edges, 0)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn hook(&self) -> usize {
        self.hook
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// BFS distances from the hook; `None` marks unreachable vertices.
    pub fn hook_distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adjacency.len()];
        dist[self.hook] = Some(0);
        let mut queue = VecDeque::from([self.hook]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}
