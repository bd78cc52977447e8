//! Adjacent node pairs with matching neighborhoods, and the colorings that
//! make every finite-round protocol fail on them.
//!
//! Two adjacent nodes `i`, `j` are `R`-hop symmetric when for every
//! `1 <= r <= R` their `r`-hop neighbor sets have the same multiset of node
//! types. Coloring both sides of the edge identically layer by layer gives
//! the two nodes identical anonymized views, so any decision rule treats
//! them alike and the edge `(i, j)` stays monochromatic with positive
//! probability.

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coloring::{count_defects, ColorState};
use crate::error::{Error, Result};
use crate::graph::{FlowGraph, NodeType};
use crate::messaging::local_views;
use crate::oracle::EnumerationBudget;
use crate::protocols::{decisions_via_messages, enumerate_protocols, execute, execute_all_outcomes, ProtocolSpec};
use crate::Exact;

/// Sorted node types of the `r`-hop neighbors of `i` and of `j`.
pub type LayerTypes = (Vec<NodeType>, Vec<NodeType>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricPair {
    pub i: usize,
    pub j: usize,
    pub radius: usize,
    /// `layer_witness[r-1]` holds the types at distance `r`.
    pub layer_witness: Vec<LayerTypes>,
}

fn layer_types(g: &FlowGraph, node: usize, r: usize) -> Result<Vec<NodeType>> {
    let mut types = g
        .r_hop_neighbors(node, r)?
        .into_iter()
        .map(|v| g.node_type(v))
        .collect::<Result<Vec<_>>>()?;
    types.sort();
    Ok(types)
}

fn witness(g: &FlowGraph, i: usize, j: usize, radius: usize) -> Result<Option<Vec<LayerTypes>>> {
    let mut layers = Vec::with_capacity(radius);
    for r in 1..=radius {
        let (a, b) = (layer_types(g, i, r)?, layer_types(g, j, r)?);
        if a != b {
            return Ok(None);
        }
        layers.push((a, b));
    }
    Ok(Some(layers))
}

/// Check `1 <= r < diameter`, the range in which the impossibility argument applies.
pub fn check_radius(g: &FlowGraph, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::ZeroRadius);
    }
    let diameter = g.diameter();
    if r >= diameter {
        return Err(Error::RadiusTooLarge { r, diameter });
    }
    Ok(())
}

/// Lexicographically smallest symmetric edge at the largest radius `<= r_max`.
pub fn find_symmetric_pair(g: &FlowGraph, r_max: usize) -> Result<Option<SymmetricPair>> {
    check_radius(g, r_max)?;
    for radius in (1..=r_max).rev() {
        for (i, j) in g.edges() {
            if let Some(layer_witness) = witness(g, i, j, radius)? {
                return Ok(Some(SymmetricPair { i, j, radius, layer_witness }));
            }
        }
    }
    Ok(None)
}

/// Verify that `(i, j)` is an `radius`-hop symmetric edge.
pub fn symmetric_pair(g: &FlowGraph, i: usize, j: usize, radius: usize) -> Result<Option<SymmetricPair>> {
    g.check_node(i)?;
    g.check_node(j)?;
    if !g.has_edge(i, j) {
        return Err(Error::NotAdjacent(i, j));
    }
    Ok(witness(g, i, j, radius)?.map(|layer_witness| SymmetricPair { i: i.min(j), j: i.max(j), radius, layer_witness }))
}

/// Color every node by its distance to the nearer of `i`, `j`:
/// `1 + (min(d_i, d_j) mod c)`. Both endpoints get color 1 and the two
/// sides of the edge mirror each other layer by layer.
pub fn adversarial_state(g: &FlowGraph, pair: &SymmetricPair, c: u32) -> Result<ColorState> {
    if c < 2 {
        return Err(Error::PaletteTooSmall { min: 2, got: c });
    }
    if !g.has_edge(pair.i, pair.j) {
        return Err(Error::NotAdjacent(pair.i, pair.j));
    }
    let di = g.distances_from(pair.i);
    let dj = g.distances_from(pair.j);
    let colors = di
        .iter()
        .zip(&dj)
        .map(|(a, b)| {
            let d = a.unwrap().min(b.unwrap());
            1 + (d as u32 % c)
        })
        .collect();
    ColorState::new(colors, c)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    /// `c = 2`: re-draws are forced, so the run is deterministic.
    Deterministic { final_state: ColorState, defects: usize, pair_defective: bool },
    /// Exact values over every joint re-draw.
    Randomized { outcomes: usize, pair_defect_probability: Exact, expected_defects: Exact },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRow {
    pub spec: ProtocolSpec,
    pub decisions_equal: bool,
    pub outcome: PairOutcome,
}

impl ProtocolRow {
    /// The protocol leaves the symmetric edge defective (surely, or with
    /// positive probability).
    pub fn defeated(&self) -> bool {
        self.decisions_equal
            && match &self.outcome {
                PairOutcome::Deterministic { pair_defective, .. } => *pair_defective,
                PairOutcome::Randomized { pair_defect_probability, .. } => *pair_defect_probability > Exact::zero(),
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpossibilityReport {
    pub pair: SymmetricPair,
    pub state: ColorState,
    /// Anonymized `radius`-round views of `i` and `j` coincide.
    pub views_equal: bool,
    /// Same for one-round views, which is what the 32 rules read.
    pub one_round_views_equal: bool,
    pub rows: Vec<ProtocolRow>,
}

impl ImpossibilityReport {
    pub fn all_defeated(&self) -> bool {
        self.views_equal && self.rows.iter().all(ProtocolRow::defeated)
    }

    pub fn hypothesis_note() -> &'static str {
        "radius is gated on r < diameter; r = diameter would let a node see the whole graph"
    }
}

/// Run every one-round rule on the adversarial state of `pair`.
pub fn impossibility_check(g: &FlowGraph, pair: &SymmetricPair, c: u32, max_outcomes: u128) -> Result<ImpossibilityReport> {
    if pair.radius == 0 {
        return Err(Error::ZeroRadius);
    }
    let state = adversarial_state(g, pair, c)?;
    let views = local_views(g, &state, pair.radius)?;
    let views_equal = views[pair.i] == views[pair.j];
    let one_round = local_views(g, &state, 1)?;
    let one_round_views_equal = one_round[pair.i] == one_round[pair.j];

    let rows = enumerate_protocols()
        .into_par_iter()
        .map(|spec| protocol_row(g, &state, pair, spec, max_outcomes))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImpossibilityReport { pair: pair.clone(), state, views_equal, one_round_views_equal, rows })
}

fn protocol_row(g: &FlowGraph, state: &ColorState, pair: &SymmetricPair, spec: ProtocolSpec, max_outcomes: u128) -> Result<ProtocolRow> {
    let decisions = decisions_via_messages(g, state, &spec)?;
    let decisions_equal = decisions[pair.i] == decisions[pair.j];
    let outcome = if state.palette() == 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = execute(g, state, &spec, &mut rng)?;
        let fs = out.final_state;
        PairOutcome::Deterministic {
            defects: count_defects(g, &fs),
            pair_defective: fs.color(pair.i) == fs.color(pair.j),
            final_state: fs,
        }
    } else {
        let all = execute_all_outcomes::<Exact>(g, state, &spec, max_outcomes)?;
        let mut p_pair = Exact::zero();
        let mut expected = Exact::zero();
        for (o, p) in &all {
            if o.final_state.color(pair.i) == o.final_state.color(pair.j) {
                p_pair += p;
            }
            expected += p * Exact::from_integer(count_defects(g, &o.final_state).into());
        }
        PairOutcome::Randomized { outcomes: all.len(), pair_defect_probability: p_pair, expected_defects: expected }
    };
    Ok(ProtocolRow { spec, decisions_equal, outcome })
}

/// First starting state (in base-`c` index order) from which `spec` can end
/// with a defect, together with such a final state. `None` means the rule is
/// one-round successful on `g`.
pub fn failing_start(g: &FlowGraph, spec: &ProtocolSpec, c: u32, budget: &EnumerationBudget) -> Result<Option<(ColorState, ColorState)>> {
    let n = g.node_count();
    let work = (c as u128)
        .checked_pow(n as u32)
        .and_then(|s| s.checked_mul((c.max(2) as u128 - 1).checked_pow(n as u32)?));
    let max_outcomes = budget.check(work)?;
    for idx in 0..(c as u64).pow(n as u32) {
        let start = ColorState::from_index(idx, n, c);
        for (outcome, _) in execute_all_outcomes::<Exact>(g, &start, spec, max_outcomes)? {
            if count_defects(g, &outcome.final_state) > 0 {
                return Ok(Some((start, outcome.final_state)));
            }
        }
    }
    Ok(None)
}

/// Probability bound used in reports: a pair that both re-draw matches with
/// probability `1/(c-1)`; a pair that both keep matches surely.
pub fn pair_match_probability(c: u32, both_redraw: bool) -> Exact {
    if both_redraw {
        Exact::new(1.into(), (c as i64 - 1).into())
    } else {
        Exact::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> FlowGraph {
        FlowGraph::path(n).unwrap()
    }

    #[test]
    fn p4_central_pair() {
        let pair = find_symmetric_pair(&path(4), 1).unwrap().unwrap();
        assert_eq!((pair.i, pair.j, pair.radius), (1, 2, 1));
        let (a, b) = &pair.layer_witness[0];
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|t| t.degree).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn p3_has_no_pair() {
        assert_eq!(find_symmetric_pair(&path(3), 1).unwrap(), None);
    }

    #[test]
    fn p6_radius_two() {
        let pair = find_symmetric_pair(&path(6), 2).unwrap().unwrap();
        assert_eq!((pair.i, pair.j, pair.radius), (2, 3, 2));
    }

    #[test]
    fn radius_must_stay_below_diameter() {
        assert_eq!(find_symmetric_pair(&path(4), 3), Err(Error::RadiusTooLarge { r: 3, diameter: 3 }));
        assert_eq!(find_symmetric_pair(&path(4), 4), Err(Error::RadiusTooLarge { r: 4, diameter: 3 }));
        assert_eq!(find_symmetric_pair(&path(4), 0), Err(Error::ZeroRadius));
    }

    #[test]
    fn even_paths_have_central_pairs_up_to_half_length() {
        for n in (4..=14).step_by(2) {
            let g = path(n);
            for r in 1..n / 2 {
                let pair = symmetric_pair(&g, n / 2 - 1, n / 2, r).unwrap();
                assert!(pair.is_some(), "n={n} r={r}");
            }
            let best = find_symmetric_pair(&g, n / 2 - 1).unwrap().unwrap();
            assert_eq!((best.i, best.j, best.radius), (n / 2 - 1, n / 2, n / 2 - 1));
        }
    }

    #[test]
    fn adversarial_states_mirror() {
        let g4 = path(4);
        let pair = find_symmetric_pair(&g4, 1).unwrap().unwrap();
        assert_eq!(adversarial_state(&g4, &pair, 2).unwrap().colors(), &[2, 1, 1, 2]);

        let g6 = path(6);
        let pair = find_symmetric_pair(&g6, 2).unwrap().unwrap();
        let s = adversarial_state(&g6, &pair, 2).unwrap();
        assert_eq!(s.colors(), &[1, 2, 1, 1, 2, 1]);
        assert_eq!(s, s.reversed());
        assert!(count_defects(&g6, &s) >= 1);
        let s3 = adversarial_state(&g6, &pair, 3).unwrap();
        assert_eq!(s3.colors(), &[3, 2, 1, 1, 2, 3]);
    }

    #[test]
    fn p4_binary_impossibility() {
        let g = path(4);
        let pair = find_symmetric_pair(&g, 1).unwrap().unwrap();
        let report = impossibility_check(&g, &pair, 2, 1 << 20).unwrap();
        assert!(report.views_equal && report.one_round_views_equal);
        assert_eq!(report.rows.len(), 32);
        for row in &report.rows {
            match &row.outcome {
                PairOutcome::Deterministic { defects, .. } => assert!(*defects >= 1, "{}", row.spec),
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(report.all_defeated());
    }

    #[test]
    fn p4_three_colors() {
        let g = path(4);
        let pair = find_symmetric_pair(&g, 1).unwrap().unwrap();
        let report = impossibility_check(&g, &pair, 3, 1 << 20).unwrap();
        let row = report.rows.iter().find(|r| r.spec == ProtocolSpec::CENTER_CORRECTING).unwrap();
        // both centers are confused, so (phi,C) keeps them: still defective
        assert!(matches!(&row.outcome, PairOutcome::Randomized { pair_defect_probability, .. } if pair_defect_probability.is_one()));
        let x = "phi|X".parse::<ProtocolSpec>().unwrap();
        let row = report.rows.iter().find(|r| r.spec == x).unwrap();
        assert!(matches!(&row.outcome,
            PairOutcome::Randomized { pair_defect_probability, outcomes: 4, .. }
                if *pair_defect_probability == pair_match_probability(3, true)));
        let identity = report.rows.iter().find(|r| r.spec == ProtocolSpec::RANDOM).unwrap();
        assert!(matches!(&identity.outcome, PairOutcome::Randomized { pair_defect_probability, outcomes: 1, .. } if pair_defect_probability.is_one()));
        assert!(report.all_defeated());
    }

    #[test]
    fn no_rule_is_successful_on_p4() {
        let g = path(4);
        for spec in enumerate_protocols() {
            let found = failing_start(&g, &spec, 2, &EnumerationBudget::default()).unwrap();
            let (_, end) = found.expect("every rule fails somewhere");
            assert!(count_defects(&g, &end) > 0);
        }
    }
}
