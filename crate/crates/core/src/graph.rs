//! Flow-graph topology.
//!
//! Nodes are `0..n` internally; anything printed for humans is 1-based.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Undirected, simple, connected interference graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

/// Degree of a node plus the degree histogram of its neighbors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeType {
    pub degree: usize,
    /// neighbor degree -> number of neighbors with that degree
    pub neighbor_degree_distribution: BTreeMap<usize, usize>,
}

impl FlowGraph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        let mut neighbors = vec![Vec::new(); node_count];
        for (a, b) in edges {
            for v in [a, b] {
                if v >= node_count {
                    return Err(Error::InvalidNode { node: v, node_count });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let graph = FlowGraph { node_count, edges: set, neighbors };
        if graph.distances_from(0).iter().any(Option::is_none) {
            return Err(Error::Disconnected);
        }
        Ok(graph)
    }

    /// The path `P_n` with edges `(i, i+1)`.
    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(Error::InvalidNode { node, node_count: self.node_count })
        }
    }

    /// True when the edge set is exactly `{(i, i+1)}`.
    pub fn is_path(&self) -> bool {
        self.edges.len() + 1 == self.node_count && self.edges.iter().all(|&(a, b)| b == a + 1)
    }

    /// degree -> node count
    pub fn degree_distribution(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for v in 0..self.node_count {
            *out.entry(self.degree(v)).or_insert(0) += 1;
        }
        out
    }

    /// BFS distances; `None` marks unreachable nodes.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::from([source]);
        dist[source] = Some(0);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Nodes at shortest-path distance exactly `r` from `node`.
    pub fn r_hop_neighbors(&self, node: usize, r: usize) -> Result<BTreeSet<usize>> {
        self.check_node(node)?;
        Ok(self
            .distances_from(node)
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d == Some(r))
            .map(|(v, _)| v)
            .collect())
    }

    pub fn node_type(&self, node: usize) -> Result<NodeType> {
        self.check_node(node)?;
        let mut hist = BTreeMap::new();
        for &w in &self.neighbors[node] {
            *hist.entry(self.degree(w)).or_insert(0) += 1;
        }
        Ok(NodeType { degree: self.degree(node), neighbor_degree_distribution: hist })
    }

    pub fn diameter(&self) -> usize {
        (0..self.node_count)
            .flat_map(|v| self.distances_from(v))
            .map(|d| d.expect("flow graphs are connected"))
            .max()
            .unwrap_or(0)
    }

    /// Relabel nodes by `v -> n-1-v`.
    pub fn reversed(&self) -> Self {
        let n = self.node_count;
        Self::new(n, self.edges().map(|(a, b)| (n - 1 - a, n - 1 - b))).expect("relabeling preserves validity")
    }
}

/// Text format: a header `n <count>` then one `e <i> <j>` line per edge, 1-based.
/// Blank lines and lines starting with `#` are ignored.
impl FromStr for FlowGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut count = None;
        let mut edges = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: `{line}`", lineno + 1));
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("n") => {
                    let v: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    count = Some(v);
                }
                Some("e") => {
                    let a: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let b: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    if a == 0 || b == 0 {
                        return Err(bad());
                    }
                    edges.push((a - 1, b - 1));
                }
                _ => return Err(bad()),
            }
            if parts.next().is_some() {
                return Err(bad());
            }
        }
        let n = count.ok_or_else(|| Error::Parse("missing `n <count>` header".into()))?;
        FlowGraph::new(n, edges)
    }
}

impl fmt::Display for FlowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.node_count)?;
        for (a, b) in self.edges() {
            writeln!(f, "e {} {}", a + 1, b + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn path_construction() {
        assert_eq!(FlowGraph::path(0), Err(Error::EmptyGraph));

        let p1 = FlowGraph::path(1).unwrap();
        assert_eq!((p1.node_count(), p1.edge_count()), (1, 0));

        let p3 = FlowGraph::path(3).unwrap();
        assert_eq!(p3.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert_eq!((0..3).map(|v| p3.degree(v)).collect::<Vec<_>>(), vec![1, 2, 1]);

        let p50 = FlowGraph::path(50).unwrap();
        assert_eq!(p50.edge_count(), 49);
        assert_eq!(p50.degree_distribution(), BTreeMap::from([(1, 2), (2, 48)]));
    }

    #[test]
    fn rejects_bad_edge_sets() {
        assert_eq!(FlowGraph::new(3, [(0, 0)]), Err(Error::SelfLoop(0)));
        assert_eq!(FlowGraph::new(3, [(0, 1), (1, 0), (1, 2)]), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(FlowGraph::new(3, [(0, 1)]), Err(Error::Disconnected));
        assert!(matches!(FlowGraph::new(2, [(0, 5)]), Err(Error::InvalidNode { node: 5, .. })));
    }

    #[test]
    fn r_hop_examples() {
        let p5 = FlowGraph::path(5).unwrap();
        assert_eq!(p5.r_hop_neighbors(2, 1).unwrap(), set(&[1, 3]));
        assert_eq!(p5.r_hop_neighbors(0, 2).unwrap(), set(&[2]));
        assert_eq!(p5.r_hop_neighbors(2, 3).unwrap(), set(&[]));
        assert_eq!(p5.r_hop_neighbors(2, 0).unwrap(), set(&[2]));
        assert!(p5.r_hop_neighbors(5, 1).is_err());
    }

    #[test]
    fn r_hop_layers_partition_nodes() {
        let g = FlowGraph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (3, 5)]).unwrap();
        for v in 0..6 {
            let mut seen = BTreeSet::new();
            for r in 0..=g.diameter() {
                for w in g.r_hop_neighbors(v, r).unwrap() {
                    assert!(seen.insert(w), "node {w} appears twice");
                }
            }
            assert_eq!(seen.len(), 6);
        }
    }

    #[test]
    fn node_type_examples() {
        let p4 = FlowGraph::path(4).unwrap();
        assert_eq!(
            p4.node_type(1).unwrap(),
            NodeType { degree: 2, neighbor_degree_distribution: BTreeMap::from([(1, 1), (2, 1)]) }
        );
        assert_eq!(
            p4.node_type(0).unwrap(),
            NodeType { degree: 1, neighbor_degree_distribution: BTreeMap::from([(2, 1)]) }
        );
        let p6 = FlowGraph::path(6).unwrap();
        assert_eq!(
            p6.node_type(2).unwrap(),
            NodeType { degree: 2, neighbor_degree_distribution: BTreeMap::from([(2, 2)]) }
        );
        assert!(p6.node_type(6).is_err());
    }

    #[test]
    fn node_type_survives_reversal() {
        for n in 1..12 {
            let g = FlowGraph::path(n).unwrap();
            let r = g.reversed();
            assert_eq!(r, g);
            for v in 0..n {
                let t = g.node_type(v).unwrap();
                assert_eq!(t, r.node_type(n - 1 - v).unwrap());
                assert_eq!(t.neighbor_degree_distribution.values().sum::<usize>(), t.degree);
            }
        }
    }

    #[test]
    fn diameters() {
        assert_eq!(FlowGraph::path(1).unwrap().diameter(), 0);
        assert_eq!(FlowGraph::path(7).unwrap().diameter(), 6);
        assert_eq!(FlowGraph::path(50).unwrap().diameter(), 49);
    }

    #[test]
    fn text_format_round_trip() {
        let g: FlowGraph = "# a path\nn 4\ne 1 2\ne 2 3\n\ne 3 4\n".parse().unwrap();
        assert_eq!(g, FlowGraph::path(4).unwrap());
        assert!(g.is_path());
        assert_eq!(g.to_string().parse::<FlowGraph>().unwrap(), g);
        assert!("e 1 2".parse::<FlowGraph>().is_err());
        assert!("n 2\ne 0 1".parse::<FlowGraph>().is_err());
        assert!("n 2\nx".parse::<FlowGraph>().is_err());
    }

    #[test]
    fn path_detection_is_label_sensitive() {
        let star = FlowGraph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!star.is_path());
        let shuffled = FlowGraph::new(3, [(0, 2), (2, 1)]).unwrap();
        assert!(!shuffled.is_path());
    }
}
