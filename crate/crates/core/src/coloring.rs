//! Color states, conflict states, defects and defect groups.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::FlowGraph;

/// 1-based color index.
pub type Color = u32;

/// A full network coloring with colors in `1..=palette`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorState {
    colors: Vec<Color>,
    palette: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictState {
    /// Every neighbor shares the node's color.
    Conflict,
    /// No neighbor shares the node's color.
    NoConflict,
    /// Some neighbors match, some do not.
    Confused,
}

/// A maximal monochromatic run on a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefectGroup {
    /// 0-based index of the first node.
    pub start: usize,
    pub len: usize,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectGroupDecomposition {
    pub groups: Vec<DefectGroup>,
}

impl ColorState {
    pub fn new(colors: Vec<Color>, palette: u32) -> Result<Self> {
        if palette == 0 {
            return Err(Error::PaletteTooSmall { min: 1, got: 0 });
        }
        if let Some(&color) = colors.iter().find(|&&c| c == 0 || c > palette) {
            return Err(Error::ColorOutOfRange { color, palette });
        }
        Ok(ColorState { colors, palette })
    }

    /// Decode `index` in base `palette` (least significant digit = node 0).
    pub fn from_index(mut index: u64, n: usize, palette: u32) -> Self {
        let colors = (0..n)
            .map(|_| {
                let digit = (index % palette as u64) as u32;
                index /= palette as u64;
                digit + 1
            })
            .collect();
        ColorState { colors, palette }
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn palette(&self) -> u32 {
        self.palette
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color(&self, node: usize) -> Color {
        self.colors[node]
    }

    pub fn reversed(&self) -> Self {
        let mut colors = self.colors.clone();
        colors.reverse();
        ColorState { colors, palette: self.palette }
    }

    /// Apply a palette permutation given as `perm[c-1] = new color`.
    pub fn permuted(&self, perm: &[Color]) -> Self {
        ColorState { colors: self.colors.iter().map(|&c| perm[(c - 1) as usize]).collect(), palette: self.palette }
    }

    /// Parse comma-separated 1-based colors.
    pub fn parse(s: &str, palette: u32) -> Result<Self> {
        let colors = s
            .split(',')
            .map(|t| t.trim().parse::<Color>().map_err(|_| Error::Parse(format!("bad color `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(colors, palette)
    }

    pub(crate) fn check_against(&self, g: &FlowGraph) -> Result<()> {
        if self.colors.len() != g.node_count() {
            return Err(Error::LengthMismatch { expected: g.node_count(), got: self.colors.len() });
        }
        Ok(())
    }
}

impl fmt::Display for ColorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.colors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl ConflictState {
    /// Classify a node from its own color and its neighbors' colors.
    pub fn classify(own: Color, neighbors: impl IntoIterator<Item = Color>) -> Option<Self> {
        let (mut same, mut total) = (0usize, 0usize);
        for c in neighbors {
            total += 1;
            same += usize::from(c == own);
        }
        match (same, total) {
            (_, 0) => None,
            (s, t) if s == t => Some(ConflictState::Conflict),
            (0, _) => Some(ConflictState::NoConflict),
            _ => Some(ConflictState::Confused),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ConflictState::Conflict => "C",
            ConflictState::NoConflict => "Cbar",
            ConflictState::Confused => "X",
        }
    }
}

pub fn conflict_state(g: &FlowGraph, s: &ColorState, node: usize) -> Result<ConflictState> {
    g.check_node(node)?;
    s.check_against(g)?;
    ConflictState::classify(s.color(node), g.neighbors(node).iter().map(|&w| s.color(w)))
        .ok_or(Error::IsolatedNode(node))
}

/// Number of monochromatic edges.
pub fn count_defects(g: &FlowGraph, s: &ColorState) -> usize {
    g.edges().filter(|&(a, b)| s.color(a) == s.color(b)).count()
}

/// Defects of a path coloring given as a plain slice.
pub(crate) fn path_defects(colors: &[Color]) -> usize {
    colors.windows(2).filter(|w| w[0] == w[1]).count()
}

/// Maximal monochromatic runs of a path coloring, in node order.
pub fn defect_groups(g: &FlowGraph, s: &ColorState) -> Result<DefectGroupDecomposition> {
    if !g.is_path() {
        return Err(Error::NotAPath);
    }
    s.check_against(g)?;
    Ok(DefectGroupDecomposition { groups: runs(s.colors()) })
}

pub(crate) fn runs(colors: &[Color]) -> Vec<DefectGroup> {
    let mut groups: Vec<DefectGroup> = Vec::new();
    for (i, &c) in colors.iter().enumerate() {
        match groups.last_mut() {
            Some(last) if last.color == c => last.len += 1,
            _ => groups.push(DefectGroup { start: i, len: 1, color: c }),
        }
    }
    groups
}

impl DefectGroupDecomposition {
    pub fn defects(&self) -> usize {
        self.groups.iter().map(|g| g.len - 1).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len).collect()
    }
}
