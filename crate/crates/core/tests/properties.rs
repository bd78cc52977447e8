use std::collections::BTreeMap;

use flowcolor::coloring::{conflict_state, count_defects, defect_groups};
use flowcolor::montecarlo::{sample_protocol, TrialReport};
use flowcolor::protocols::{decisions, decisions_via_messages, execute, execute_all_outcomes};
use flowcolor::{ColorState, ConflictState, Exact, FlowGraph, ProtocolSpec};
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec() -> impl Strategy<Value = ProtocolSpec> {
    (0u8..32).prop_map(|m| ProtocolSpec::from_mask(m).unwrap())
}

/// `(n, c, colors)` with every color in `1..=c`.
fn path_state(n_max: usize, c_max: u32) -> impl Strategy<Value = (usize, u32, Vec<u32>)> {
    (2..=n_max, 2..=c_max).prop_flat_map(|(n, c)| (Just(n), Just(c), prop::collection::vec(1..=c, n)))
}

/// Defect count distribution over all joint re-draws.
fn defect_law(g: &FlowGraph, s0: &ColorState, spec: &ProtocolSpec) -> BTreeMap<usize, Exact> {
    let mut law = BTreeMap::new();
    for (o, p) in execute_all_outcomes::<Exact>(g, s0, spec, 1 << 20).unwrap() {
        *law.entry(count_defects(g, &o.final_state)).or_insert_with(|| Exact::from_integer(0.into())) += p;
    }
    law
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn palette_relabeling_commutes_with_execution(
        (n, c, colors) in path_state(7, 4),
        spec in spec(),
        shuffle in any::<prop::sample::Index>(),
    ) {
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, c).unwrap();
        // pick one permutation of 1..=c by index
        let mut pool: Vec<u32> = (1..=c).collect();
        let mut perm = Vec::new();
        let mut k = shuffle.index(usize::MAX);
        while !pool.is_empty() {
            perm.push(pool.remove(k % pool.len()));
            k /= perm.len();
        }
        let relabeled = s0.permuted(&perm);
        prop_assert_eq!(defect_law(&g, &s0, &spec), defect_law(&g, &relabeled, &spec));

        let mut outcomes: Vec<ColorState> = execute_all_outcomes::<Exact>(&g, &s0, &spec, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|(o, _)| o.final_state.permuted(&perm))
            .collect();
        let mut direct: Vec<ColorState> = execute_all_outcomes::<Exact>(&g, &relabeled, &spec, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|(o, _)| o.final_state)
            .collect();
        outcomes.sort_by(|a, b| a.colors().cmp(b.colors()));
        direct.sort_by(|a, b| a.colors().cmp(b.colors()));
        prop_assert_eq!(outcomes, direct);
    }

    #[test]
    fn mirrored_start_has_same_defect_law((n, c, colors) in path_state(7, 4), spec in spec()) {
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, c).unwrap();
        prop_assert_eq!(defect_law(&g, &s0, &spec), defect_law(&g, &s0.reversed(), &spec));
    }

    #[test]
    fn defects_are_run_lengths_minus_one((n, c, colors) in path_state(40, 5)) {
        let g = FlowGraph::path(n).unwrap();
        let s = ColorState::new(colors, c).unwrap();
        let groups = defect_groups(&g, &s).unwrap();
        prop_assert_eq!(groups.sizes().iter().sum::<usize>(), n);
        prop_assert_eq!(count_defects(&g, &s), groups.groups.iter().map(|r| r.len - 1).sum::<usize>());
    }

    #[test]
    fn proper_iff_nobody_conflicts((n, c, colors) in path_state(12, 3)) {
        let g = FlowGraph::path(n).unwrap();
        let s = ColorState::new(colors, c).unwrap();
        let all_clear = (0..n).all(|v| conflict_state(&g, &s, v).unwrap() == ConflictState::NoConflict);
        prop_assert_eq!(count_defects(&g, &s) == 0, all_clear);
        for v in [0, n - 1] {
            prop_assert_ne!(conflict_state(&g, &s, v).unwrap(), ConflictState::Confused);
        }
    }

    #[test]
    fn edge_rule_clears_boundary_edges((n, c, colors) in path_state(30, 6), seed in any::<u64>()) {
        prop_assume!(n >= 3);
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, c).unwrap();
        let out = execute(&g, &s0, &ProtocolSpec::EDGE_CORRECTING, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let f = &out.final_state;
        prop_assert_ne!(f.color(0), f.color(1));
        prop_assert_ne!(f.color(n - 1), f.color(n - 2));
        // interior edges are untouched
        for v in 1..n - 2 {
            prop_assert_eq!(f.color(v) == f.color(v + 1), s0.color(v) == s0.color(v + 1));
        }
    }

    #[test]
    fn two_color_center_rule_shortens_long_runs(colors in prop::collection::vec(1u32..=2, 2..40)) {
        let n = colors.len();
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, 2).unwrap();
        let out = execute(&g, &s0, &ProtocolSpec::CENTER_CORRECTING, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut expected: Vec<usize> = defect_groups(&g, &s0)
            .unwrap()
            .sizes()
            .into_iter()
            .flat_map(|k| if k >= 3 { vec![1, k - 2, 1] } else { vec![k] })
            .collect();
        let mut got = defect_groups(&g, &out.final_state).unwrap().sizes();
        expected.sort_unstable();
        got.sort_unstable();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn sampled_execution_is_one_of_the_enumerated_outcomes(
        (n, c, colors) in path_state(6, 4),
        spec in spec(),
        seed in any::<u64>(),
    ) {
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, c).unwrap();
        let all = execute_all_outcomes::<Exact>(&g, &s0, &spec, 1 << 20).unwrap();
        let total = all.iter().fold(Exact::from_integer(0.into()), |a, (_, p)| a + p);
        prop_assert!(total.is_one());
        let one = execute(&g, &s0, &spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(all.iter().any(|(o, _)| *o == one));
        for v in &one.changed {
            prop_assert_ne!(one.final_state.color(*v), s0.color(*v));
        }
    }

    #[test]
    fn message_rounds_and_fast_path_decide_alike((n, c, colors) in path_state(9, 4), spec in spec()) {
        let g = FlowGraph::path(n).unwrap();
        let s0 = ColorState::new(colors, c).unwrap();
        prop_assert_eq!(decisions(&g, &s0, &spec).unwrap(), decisions_via_messages(&g, &s0, &spec).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampling_is_a_function_of_the_seed(n in 2usize..30, c in 2u32..8, spec in spec(), seed in any::<u64>()) {
        let a: TrialReport = sample_protocol(n, c, &spec, 300, seed).unwrap();
        let b: TrialReport = sample_protocol(n, c, &spec, 300, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.mean >= 0.0 && a.mean <= (n - 1) as f64);
        prop_assert!(a.stderr >= 0.0);
    }
}
