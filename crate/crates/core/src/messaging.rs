//! Synchronous broadcast rounds that build each node's local topology tree.
//!
//! In round `r` every node broadcasts the frontier it learned in round `r-1`
//! as `(id, initial color, parent)` triplets. Receivers attach unseen ids as
//! new leaves under the announced parent. Colors are initial colors only;
//! this phase never changes the coloring.

use std::cmp::Ordering;

use crate::coloring::{Color, ColorState, ConflictState};
use crate::error::{Error, Result};
use crate::graph::FlowGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageEntry {
    pub node: usize,
    pub color: Color,
    /// Node the sender heard about `node` from; the sender itself in round 1.
    pub parent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundMessage {
    pub sender: usize,
    pub round: usize,
    pub entries: Vec<MessageEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeEntry {
    pub node: usize,
    pub color: Color,
    /// `None` only for the root.
    pub parent: Option<usize>,
}

/// A node's rooted view of its neighborhood after some number of rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTree {
    pub root: usize,
    /// `layers[r]` holds the nodes first heard of in round `r`.
    pub layers: Vec<Vec<TreeEntry>>,
    /// `(node, parent)` announcements dropped because `node` was already
    /// attached at the same depth through another parent. Only cycles
    /// produce these; the first-heard parent is kept.
    pub duplicates: Vec<(usize, usize)>,
}

impl LocalTree {
    fn new(root: usize, color: Color) -> Self {
        LocalTree { root, layers: vec![vec![TreeEntry { node: root, color, parent: None }]], duplicates: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn contains(&self, node: usize) -> bool {
        self.layers.iter().flatten().any(|e| e.node == node)
    }

    fn outgoing(&self, sender: usize, round: usize) -> RoundMessage {
        let entries = self.layers[round - 1]
            .iter()
            .map(|e| MessageEntry { node: e.node, color: e.color, parent: e.parent.unwrap_or(sender) })
            .collect();
        RoundMessage { sender, round, entries }
    }
}

/// Run `rounds` synchronous rounds and return one tree per node.
pub fn run_rounds(g: &FlowGraph, s0: &ColorState, rounds: usize) -> Result<Vec<LocalTree>> {
    s0.check_against(g)?;
    let n = g.node_count();
    let mut trees: Vec<LocalTree> = (0..n).map(|v| LocalTree::new(v, s0.color(v))).collect();
    // depth at which each node is known, per receiver
    let mut known: Vec<Vec<Option<usize>>> = (0..n)
        .map(|v| {
            let mut row = vec![None; n];
            row[v] = Some(0);
            row
        })
        .collect();

    for round in 1..=rounds {
        let outbox: Vec<RoundMessage> = trees.iter().enumerate().map(|(v, t)| t.outgoing(v, round)).collect();
        for receiver in 0..n {
            let tree = &mut trees[receiver];
            let mut layer = Vec::new();
            for &sender in g.neighbors(receiver) {
                let msg = &outbox[sender];
                for entry in &msg.entries {
                    let parent = if entry.node == msg.sender { receiver } else { entry.parent };
                    match known[receiver][entry.node] {
                        Some(d) if d < round => {}
                        Some(_) => tree.duplicates.push((entry.node, parent)),
                        None => {
                            known[receiver][entry.node] = Some(round);
                            layer.push(TreeEntry { node: entry.node, color: entry.color, parent: Some(parent) });
                        }
                    }
                }
            }
            tree.layers.push(layer);
        }
    }
    Ok(trees)
}

/// One node of an anonymized view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViewNode {
    pub color: Color,
    /// Canonically ordered.
    pub children: Vec<ViewNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Shape(Vec<Shape>);

impl ViewNode {
    fn shape(&self) -> Shape {
        Shape(self.children.iter().map(ViewNode::shape).collect())
    }
}

impl Ord for ViewNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shape()
            .cmp(&other.shape())
            .then(self.color.cmp(&other.color))
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for ViewNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A local tree with ids erased. Isomorphic colored neighborhoods give equal views.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalView {
    pub depth: usize,
    pub root: ViewNode,
}

impl LocalView {
    pub fn root_degree(&self) -> usize {
        self.root.children.len()
    }

    pub fn root_color(&self) -> Color {
        self.root.color
    }

    /// Conflict state of the root, readable from any view of depth >= 1.
    pub fn conflict_state(&self) -> Result<ConflictState> {
        if self.depth == 0 {
            return Err(Error::ViewDepth(0));
        }
        ConflictState::classify(self.root.color, self.root.children.iter().map(|c| c.color))
            .ok_or(Error::UnsupportedDegree(0))
    }
}

pub fn anonymize(t: &LocalTree) -> LocalView {
    fn build(t: &LocalTree, depth: usize, entry: &TreeEntry) -> ViewNode {
        let mut children: Vec<ViewNode> = t
            .layers
            .get(depth + 1)
            .into_iter()
            .flatten()
            .filter(|e| e.parent == Some(entry.node))
            .map(|e| build(t, depth + 1, e))
            .collect();
        children.sort();
        ViewNode { color: entry.color, children }
    }
    LocalView { depth: t.depth(), root: build(t, 0, &t.layers[0][0]) }
}

/// Anonymized `rounds`-round views of every node.
pub fn local_views(g: &FlowGraph, s0: &ColorState, rounds: usize) -> Result<Vec<LocalView>> {
    Ok(run_rounds(g, s0, rounds)?.iter().map(anonymize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(colors: &[Color], c: u32) -> ColorState {
        ColorState::new(colors.to_vec(), c).unwrap()
    }

    fn leaf(color: Color) -> ViewNode {
        ViewNode { color, children: vec![] }
    }

    #[test]
    fn zero_rounds_is_just_the_root() {
        let p3 = FlowGraph::path(3).unwrap();
        let trees = run_rounds(&p3, &st(&[2, 1, 2], 2), 0).unwrap();
        for (v, t) in trees.iter().enumerate() {
            assert_eq!(t.depth(), 0);
            assert_eq!(t.layers, vec![vec![TreeEntry { node: v, color: [2, 1, 2][v], parent: None }]]);
        }
    }

    #[test]
    fn one_round_on_p3() {
        let p3 = FlowGraph::path(3).unwrap();
        let trees = run_rounds(&p3, &st(&[1, 2, 1], 2), 1).unwrap();
        let mid = &trees[1];
        assert_eq!(mid.layers[0][0].color, 2);
        assert_eq!(
            mid.layers[1],
            vec![
                TreeEntry { node: 0, color: 1, parent: Some(1) },
                TreeEntry { node: 2, color: 1, parent: Some(1) },
            ]
        );
    }

    #[test]
    fn two_rounds_on_p5_follow_bfs_layers() {
        let p5 = FlowGraph::path(5).unwrap();
        let s = st(&[1, 2, 3, 1, 2], 3);
        let trees = run_rounds(&p5, &s, 2).unwrap();
        let center = &trees[2];
        assert_eq!(
            center.layers[2],
            vec![
                TreeEntry { node: 0, color: 1, parent: Some(1) },
                TreeEntry { node: 4, color: 2, parent: Some(3) },
            ]
        );
        for (v, t) in trees.iter().enumerate() {
            for (r, layer) in t.layers.iter().enumerate() {
                let ids: std::collections::BTreeSet<usize> = layer.iter().map(|e| e.node).collect();
                assert_eq!(ids, p5.r_hop_neighbors(v, r).unwrap());
                for e in layer.iter().filter(|_| r > 0) {
                    let p = e.parent.unwrap();
                    assert!(t.layers[r - 1].iter().any(|q| q.node == p));
                    assert_eq!(e.color, s.color(e.node));
                }
            }
            assert!(t.duplicates.is_empty());
        }
    }

    #[test]
    fn cycles_keep_first_parent_and_log_duplicates() {
        let c4 = FlowGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let trees = run_rounds(&c4, &st(&[1, 1, 1, 1], 1), 2).unwrap();
        let t = &trees[0];
        assert_eq!(t.layers[2], vec![TreeEntry { node: 2, color: 1, parent: Some(1) }]);
        assert_eq!(t.duplicates, vec![(2, 3)]);
    }

    #[test]
    fn anonymized_views() {
        let p3 = FlowGraph::path(3).unwrap();
        let views = local_views(&p3, &st(&[1, 2, 1], 2), 1).unwrap();
        assert_eq!(views[1].root, ViewNode { color: 2, children: vec![leaf(1), leaf(1)] });
        assert_eq!(views[1].root_degree(), 2);

        let views = local_views(&p3, &st(&[1, 1, 2], 2), 1).unwrap();
        assert_eq!(views[0].root, ViewNode { color: 1, children: vec![leaf(1)] });
        assert_eq!(views[0].conflict_state().unwrap(), ConflictState::Conflict);
    }

    #[test]
    fn mirrored_interior_nodes_share_a_view() {
        let p6 = FlowGraph::path(6).unwrap();
        let s = st(&[3, 1, 2, 2, 1, 3], 3);
        for rounds in 0..=3 {
            let views = local_views(&p6, &s, rounds).unwrap();
            assert_eq!(views[2], views[3], "rounds = {rounds}");
            assert_eq!(views[1], views[4]);
        }
        let asym = st(&[3, 1, 2, 2, 1, 1], 3);
        let views = local_views(&p6, &asym, 2).unwrap();
        assert_ne!(views[2], views[3]);
    }

    #[test]
    fn depth_zero_view_has_no_conflict_state() {
        let p2 = FlowGraph::path(2).unwrap();
        let views = local_views(&p2, &st(&[1, 1], 1), 0).unwrap();
        assert_eq!(views[0].conflict_state(), Err(Error::ViewDepth(0)));
    }
}
