//! The 32 one-round decision rules for paths and their execution.
//!
//! After one round a node knows its degree and its conflict state. A rule
//! lists, per degree, the conflict states in which the node re-draws its
//! color. Degree-1 nodes can only be in `C` or `Cbar`; degree-2 nodes can
//! also be confused (`X`). That gives 2^2 * 2^3 = 32 rules.
//!
//! Execution is simultaneous: every node decides on the initial coloring,
//! then all re-draws are applied. A re-drawing node picks uniformly among
//! the `c - 1` colors different from its own. The randomness contract is
//! one draw per re-drawing node, in ascending node order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::Rng;

use crate::coloring::{Color, ColorState, ConflictState};
use crate::error::{Error, Result};
use crate::graph::FlowGraph;
use crate::messaging::{local_views, LocalView};
use crate::scalar::Scalar;

/// Conflict states that trigger a re-draw.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChangeSet {
    pub conflict: bool,
    pub no_conflict: bool,
    pub confused: bool,
}

impl ChangeSet {
    pub const EMPTY: ChangeSet = ChangeSet { conflict: false, no_conflict: false, confused: false };

    pub fn contains(self, state: ConflictState) -> bool {
        match state {
            ConflictState::Conflict => self.conflict,
            ConflictState::NoConflict => self.no_conflict,
            ConflictState::Confused => self.confused,
        }
    }

    pub fn is_empty(self) -> bool {
        self == Self::EMPTY
    }

    fn render(self, empty: &str, conflict: &str, no_conflict: &str) -> String {
        if self.is_empty() {
            return empty.to_string();
        }
        let mut s = String::new();
        if self.conflict {
            s.push_str(conflict);
        }
        if self.no_conflict {
            s.push_str(no_conflict);
        }
        if self.confused {
            s.push('X');
        }
        s
    }

    fn parse(token: &str) -> Result<Self> {
        let bad = || Error::UnknownProtocol(token.to_string());
        let t = token.trim();
        if matches!(t, "phi" | "φ" | "∅" | "") {
            return Ok(Self::EMPTY);
        }
        let mut set = Self::EMPTY;
        let mut rest = t;
        while !rest.is_empty() {
            let flag = if let Some(r) = rest.strip_prefix("Cbar").or_else(|| rest.strip_prefix("C\u{0304}")) {
                rest = r;
                &mut set.no_conflict
            } else if let Some(r) = rest.strip_prefix('C') {
                rest = r;
                &mut set.conflict
            } else if let Some(r) = rest.strip_prefix('X') {
                rest = r;
                &mut set.confused
            } else {
                return Err(bad());
            };
            if *flag {
                return Err(bad());
            }
            *flag = true;
        }
        Ok(set)
    }
}

/// One of the 32 one-round path protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProtocolSpec {
    deg1: ChangeSet,
    deg2: ChangeSet,
}

impl ProtocolSpec {
    /// Zero-round random assignment: nobody re-draws.
    pub const RANDOM: ProtocolSpec = ProtocolSpec { deg1: ChangeSet::EMPTY, deg2: ChangeSet::EMPTY };
    /// Edge correcting: end nodes in conflict re-draw.
    pub const EDGE_CORRECTING: ProtocolSpec =
        ProtocolSpec { deg1: ChangeSet { conflict: true, no_conflict: false, confused: false }, deg2: ChangeSet::EMPTY };
    /// Center correcting: interior nodes in conflict re-draw.
    pub const CENTER_CORRECTING: ProtocolSpec =
        ProtocolSpec { deg1: ChangeSet::EMPTY, deg2: ChangeSet { conflict: true, no_conflict: false, confused: false } };
    /// Re-draws whenever a node is not in conflict or is confused.
    pub const SUBOPTIMAL: ProtocolSpec = ProtocolSpec {
        deg1: ChangeSet { conflict: false, no_conflict: true, confused: false },
        deg2: ChangeSet { conflict: false, no_conflict: true, confused: true },
    };

    pub fn new(deg1: ChangeSet, deg2: ChangeSet) -> Result<Self> {
        if deg1.confused {
            return Err(Error::UnknownProtocol("degree-1 nodes are never confused".into()));
        }
        Ok(ProtocolSpec { deg1, deg2 })
    }

    pub fn deg1(&self) -> ChangeSet {
        self.deg1
    }

    pub fn deg2(&self) -> ChangeSet {
        self.deg2
    }

    /// Bits: 0 = deg1 C, 1 = deg1 Cbar, 2 = deg2 C, 3 = deg2 Cbar, 4 = deg2 X.
    pub fn mask(&self) -> u8 {
        u8::from(self.deg1.conflict)
            | u8::from(self.deg1.no_conflict) << 1
            | u8::from(self.deg2.conflict) << 2
            | u8::from(self.deg2.no_conflict) << 3
            | u8::from(self.deg2.confused) << 4
    }

    pub fn from_mask(mask: u8) -> Result<Self> {
        if mask >= 32 {
            return Err(Error::UnknownProtocol(mask.to_string()));
        }
        let bit = |i: u8| mask >> i & 1 == 1;
        Ok(ProtocolSpec {
            deg1: ChangeSet { conflict: bit(0), no_conflict: bit(1), confused: false },
            deg2: ChangeSet { conflict: bit(2), no_conflict: bit(3), confused: bit(4) },
        })
    }

    /// Tuple notation with φ for the empty set and C̄ for "not in conflict".
    pub fn tuple_name(&self) -> String {
        format!("({},{})", self.deg1.render("φ", "C", "C\u{0304}"), self.deg2.render("φ", "C", "C\u{0304}"))
    }

    /// ASCII alias, e.g. `C|phi` or `Cbar|CbarX`.
    pub fn ascii_name(&self) -> String {
        format!("{}|{}", self.deg1.render("phi", "C", "Cbar"), self.deg2.render("phi", "C", "Cbar"))
    }

    pub fn change_set(&self, degree: usize) -> Result<ChangeSet> {
        match degree {
            1 => Ok(self.deg1),
            2 => Ok(self.deg2),
            0 => Err(Error::IsolatedNode(0)),
            d => Err(Error::UnsupportedDegree(d)),
        }
    }

    /// Largest number of nodes of `P_n` that can re-draw at once.
    pub fn max_redraws(&self, n: usize) -> usize {
        let ends = n.min(2);
        let interior = n.saturating_sub(2);
        (if self.deg1.is_empty() { 0 } else { ends }) + (if self.deg2.is_empty() { 0 } else { interior })
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ascii_name())
    }
}

/// Accepts `random`, a mask `0..=31`, `A|B` aliases and `(A,B)` tuples.
impl FromStr for ProtocolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("random") {
            return Ok(Self::RANDOM);
        }
        if let Ok(mask) = t.parse::<u8>() {
            return Self::from_mask(mask);
        }
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
        let (a, b) = inner
            .split_once('|')
            .or_else(|| inner.split_once(','))
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))?;
        let wrap = |_| Error::UnknownProtocol(s.to_string());
        let deg1 = ChangeSet::parse(a).map_err(wrap)?;
        let deg2 = ChangeSet::parse(b).map_err(wrap)?;
        Self::new(deg1, deg2).map_err(wrap)
    }
}

/// All 32 rules, ordered by mask.
pub fn enumerate_protocols() -> Vec<ProtocolSpec> {
    (0..32).map(|m| ProtocolSpec::from_mask(m).unwrap()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Keep,
    Redraw,
}

/// Evaluate a rule on an anonymized one-round view.
pub fn decide(spec: &ProtocolSpec, view: &LocalView) -> Result<Decision> {
    if view.depth != 1 {
        return Err(Error::ViewDepth(view.depth));
    }
    let set = spec.change_set(view.root_degree())?;
    Ok(if set.contains(view.conflict_state()?) { Decision::Redraw } else { Decision::Keep })
}

fn check_degrees(g: &FlowGraph) -> Result<()> {
    for v in 0..g.node_count() {
        match g.degree(v) {
            0 => return Err(Error::IsolatedNode(v)),
            1 | 2 => {}
            d => return Err(Error::UnsupportedDegree(d)),
        }
    }
    Ok(())
}

/// Decisions of every node, computed from neighbor colors directly.
pub fn decisions(g: &FlowGraph, s0: &ColorState, spec: &ProtocolSpec) -> Result<Vec<Decision>> {
    s0.check_against(g)?;
    check_degrees(g)?;
    (0..g.node_count())
        .map(|v| {
            let state = ConflictState::classify(s0.color(v), g.neighbors(v).iter().map(|&w| s0.color(w)))
                .ok_or(Error::IsolatedNode(v))?;
            let set = spec.change_set(g.degree(v))?;
            Ok(if set.contains(state) { Decision::Redraw } else { Decision::Keep })
        })
        .collect()
}

/// Decisions of every node obtained by actually running one message round
/// and evaluating the rule on each anonymized view.
pub fn decisions_via_messages(g: &FlowGraph, s0: &ColorState, spec: &ProtocolSpec) -> Result<Vec<Decision>> {
    check_degrees(g)?;
    local_views(g, s0, 1)?.iter().map(|view| decide(spec, view)).collect()
}

/// Nodes of the path `colors` that re-draw under `spec`, ascending.
pub(crate) fn path_redraws(colors: &[Color], spec: &ProtocolSpec, out: &mut Vec<usize>) {
    out.clear();
    let n = colors.len();
    if n < 2 {
        return;
    }
    let end_state = |own: Color, nb: Color| if own == nb { ConflictState::Conflict } else { ConflictState::NoConflict };
    if spec.deg1.contains(end_state(colors[0], colors[1])) {
        out.push(0);
    }
    if !spec.deg2.is_empty() {
        for v in 1..n - 1 {
            let own = colors[v];
            let state = match (colors[v - 1] == own, colors[v + 1] == own) {
                (true, true) => ConflictState::Conflict,
                (false, false) => ConflictState::NoConflict,
                _ => ConflictState::Confused,
            };
            if spec.deg2.contains(state) {
                out.push(v);
            }
        }
    }
    if spec.deg1.contains(end_state(colors[n - 1], colors[n - 2])) {
        out.push(n - 1);
    }
}

/// The `draw`-th color of `1..=c` skipping `old`; `draw < c - 1`.
#[inline]
pub fn redraw_target(old: Color, draw: u32) -> Color {
    if draw + 1 < old {
        draw + 1
    } else {
        draw + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProtocolOutcome {
    pub final_state: ColorState,
    /// Nodes that re-drew, ascending.
    pub changed: Vec<usize>,
}

fn redrawing_nodes(g: &FlowGraph, s0: &ColorState, spec: &ProtocolSpec) -> Result<Vec<usize>> {
    if s0.palette() < 2 {
        return Err(Error::PaletteTooSmall { min: 2, got: s0.palette() });
    }
    Ok(decisions(g, s0, spec)?
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d == Decision::Redraw)
        .map(|(v, _)| v)
        .collect())
}

/// Run one round of messaging and one simultaneous decision.
pub fn execute<R: Rng + ?Sized>(g: &FlowGraph, s0: &ColorState, spec: &ProtocolSpec, rng: &mut R) -> Result<ProtocolOutcome> {
    let changed = redrawing_nodes(g, s0, spec)?;
    let c = s0.palette();
    let mut colors = s0.colors().to_vec();
    for &v in &changed {
        colors[v] = redraw_target(colors[v], rng.random_range(0..c - 1));
    }
    Ok(ProtocolOutcome { final_state: ColorState::new(colors, c)?, changed })
}

/// Every joint re-draw outcome with its exact probability `(c-1)^-k`.
pub fn execute_all_outcomes<S: Scalar>(
    g: &FlowGraph,
    s0: &ColorState,
    spec: &ProtocolSpec,
    max_outcomes: u128,
) -> Result<Vec<(ProtocolOutcome, S)>> {
    let changed = redrawing_nodes(g, s0, spec)?;
    let c = s0.palette();
    let k = changed.len();
    let total = (c as u128 - 1)
        .checked_pow(k as u32)
        .filter(|&t| t <= max_outcomes)
        .ok_or(Error::BudgetExceeded { required: (c as f64 - 1.0).powi(k as i32) as u128, budget: max_outcomes })?;
    let p = S::from_ratio(&BigInt::from(1), &BigInt::from(total));

    let mut digits = vec![0u32; k];
    let mut out = Vec::with_capacity(total as usize);
    loop {
        let mut colors = s0.colors().to_vec();
        for (&v, &d) in changed.iter().zip(&digits) {
            colors[v] = redraw_target(colors[v], d);
        }
        out.push((ProtocolOutcome { final_state: ColorState::new(colors, c)?, changed: changed.clone() }, p.clone()));
        if !advance(&mut digits, c - 1) {
            break;
        }
    }
    Ok(out)
}

/// Odometer increment in base `base`; false once it wraps around.
pub(crate) fn advance(digits: &mut [u32], base: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
