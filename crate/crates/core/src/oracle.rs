//! Brute-force ground truth over every starting coloring of `P_n`.
//!
//! Starting states are visited odometer-style in base `c`; the index range
//! is split into fixed-size chunks that run on the rayon pool. Chunk results
//! are exact integer histograms, so the merged result does not depend on the
//! number of workers.
//!
//! Randomized protocols are handled by enumerating every joint re-draw. A
//! start with `k` re-drawing nodes has `(c-1)^k` equally likely outcomes; each
//! is accumulated with weight `(c-1)^(K-k)` over the common denominator
//! `(c-1)^K`, where `K` is the largest possible number of re-draws.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::analytics::{DefectDistribution, GroupCountVector};
use crate::coloring::{path_defects, runs, Color};
use crate::error::{Error, Result};
use crate::protocols::{advance, path_redraws, redraw_target, ProtocolSpec};
use crate::scalar::Scalar;

/// Work cap for exhaustive enumeration, in elementary state evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_work: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_work: 100_000_000 }
    }
}

impl EnumerationBudget {
    pub const ENV_VAR: &'static str = "FLOWCOLOR_BUDGET";

    pub fn new(max_work: u128) -> Self {
        EnumerationBudget { max_work }
    }

    /// Default budget, overridden by `FLOWCOLOR_BUDGET` when it parses.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().replace('_', "").parse().ok())
            .map(Self::new)
            .unwrap_or_default()
    }

    pub fn check(&self, required: Option<u128>) -> Result<u128> {
        match required {
            Some(r) if r <= self.max_work => Ok(r),
            Some(r) => Err(Error::BudgetExceeded { required: r, budget: self.max_work }),
            None => Err(Error::BudgetExceeded { required: u128::MAX, budget: self.max_work }),
        }
    }
}

const CHUNK: u64 = 1 << 12;

fn state_count(n: usize, c: u32) -> Option<u128> {
    (c as u128).checked_pow(n as u32)
}

/// Work needed to enumerate `spec` on `P_n` with `c` colors.
pub fn protocol_work(n: usize, c: u32, spec: &ProtocolSpec) -> Option<u128> {
    let outcomes = (c.max(2) as u128 - 1).checked_pow(spec.max_redraws(n) as u32)?;
    state_count(n, c)?.checked_mul(outcomes)
}

/// Run `visit` on every coloring of `P_n`, chunked in parallel, and sum the
/// per-chunk histograms of length `len`.
fn sweep<F>(n: usize, c: u32, len: usize, visit: F) -> Result<Vec<u128>>
where
    F: Fn(&[Color], &mut Vec<u128>) -> Result<()> + Sync,
{
    let total = state_count(n, c).filter(|&t| t <= u64::MAX as u128).ok_or(Error::Overflow)? as u64;
    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<u128>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut hist = vec![0u128; len];
            let mut digits: Vec<u32> = crate::coloring::ColorState::from_index(start, n, c)
                .colors()
                .iter()
                .map(|&x| x - 1)
                .collect();
            let mut colors: Vec<Color> = vec![0; n];
            for _ in start..end {
                for (dst, &d) in colors.iter_mut().zip(&digits) {
                    *dst = d + 1;
                }
                visit(&colors, &mut hist)?;
                advance(&mut digits, c);
            }
            Ok(hist)
        })
        .collect();
    let mut out = vec![0u128; len];
    for part in partials {
        for (acc, v) in out.iter_mut().zip(part?) {
            *acc = acc.checked_add(v).ok_or(Error::Overflow)?;
        }
    }
    Ok(out)
}

fn require(n: usize, c: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::PathTooShort { min: 1, got: 0 });
    }
    if c == 0 {
        return Err(Error::PaletteTooSmall { min: 1, got: 0 });
    }
    Ok(())
}

fn to_scalars<S: Scalar>(hist: Vec<u128>, den: &BigInt) -> Vec<S> {
    hist.into_iter().map(|x| S::from_ratio(&BigInt::from(x), den)).collect()
}

/// Tally of defect counts over all `c^n` colorings.
pub fn oracle_random_distribution<S: Scalar>(n: usize, c: u32, budget: &EnumerationBudget) -> Result<DefectDistribution<S>> {
    require(n, c)?;
    let states = budget.check(state_count(n, c))?;
    let hist = sweep(n, c, n, |colors, hist| {
        hist[path_defects(colors)] += 1;
        Ok(())
    })?;
    let one = BigInt::from(1);
    Ok(DefectDistribution::new(to_scalars(hist, &one), S::from_ratio(&BigInt::from(states), &one)))
}

/// Tally of maximal run lengths over all `c^n` colorings.
pub fn oracle_group_counts<S: Scalar>(n: usize, c: u32, budget: &EnumerationBudget) -> Result<GroupCountVector<S>> {
    require(n, c)?;
    budget.check(state_count(n, c))?;
    let hist = sweep(n, c, n, |colors, hist| {
        for g in runs(colors) {
            hist[g.len - 1] += 1;
        }
        Ok(())
    })?;
    Ok(GroupCountVector { counts: to_scalars(hist, &BigInt::from(1)) })
}

/// Expected final defect distribution of `spec` summed over all starts.
/// Entries are exact rationals that add up to `c^n`.
pub fn oracle_protocol_distribution<S: Scalar>(
    n: usize,
    c: u32,
    spec: &ProtocolSpec,
    budget: &EnumerationBudget,
) -> Result<DefectDistribution<S>> {
    require(n, c)?;
    if c < 2 {
        return Err(Error::PaletteTooSmall { min: 2, got: c });
    }
    if n < 2 {
        return Err(Error::IsolatedNode(0));
    }
    budget.check(protocol_work(n, c, spec))?;
    let base = c as u128 - 1;
    let k_max = spec.max_redraws(n);
    let den = base.checked_pow(k_max as u32).ok_or(Error::Overflow)?;
    let hist = sweep(n, c, n, |start, hist| {
        let mut redraws = Vec::with_capacity(n);
        path_redraws(start, spec, &mut redraws);
        let k = redraws.len();
        let weight = base.pow((k_max - k) as u32);
        let mut digits = vec![0u32; k];
        let mut colors = start.to_vec();
        loop {
            for (&v, &d) in redraws.iter().zip(&digits) {
                colors[v] = redraw_target(start[v], d);
            }
            let slot = &mut hist[path_defects(&colors)];
            *slot = slot.checked_add(weight).ok_or(Error::Overflow)?;
            if !advance(&mut digits, c - 1) {
                break;
            }
        }
        Ok(())
    })?;
    let states = state_count(n, c).ok_or(Error::Overflow)?;
    let one = BigInt::from(1);
    Ok(DefectDistribution::new(
        to_scalars(hist, &BigInt::from(den)),
        S::from_ratio(&BigInt::from(states), &one),
    ))
}

/// True when every start ends with the same defect count for every joint
/// re-draw, i.e. the protocol's defect count ignores its randomness.
pub fn defects_independent_of_redraws(n: usize, c: u32, spec: &ProtocolSpec, budget: &EnumerationBudget) -> Result<bool> {
    require(n, c)?;
    if c < 2 {
        return Err(Error::PaletteTooSmall { min: 2, got: c });
    }
    budget.check(protocol_work(n, c, spec))?;
    // slot 0 counts starts whose outcomes disagree
    let hist = sweep(n, c, 1, |start, hist| {
        let mut redraws = Vec::with_capacity(n);
        path_redraws(start, spec, &mut redraws);
        let mut digits = vec![0u32; redraws.len()];
        let mut colors = start.to_vec();
        let mut first = None;
        loop {
            for (&v, &d) in redraws.iter().zip(&digits) {
                colors[v] = redraw_target(start[v], d);
            }
            let d = path_defects(&colors);
            if *first.get_or_insert(d) != d {
                hist[0] += 1;
                break;
            }
            if !advance(&mut digits, c - 1) {
                break;
            }
        }
        Ok(())
    })?;
    Ok(hist[0] == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;
    use num_traits::FromPrimitive;

    fn ints(v: &[i64]) -> Vec<Exact> {
        v.iter().map(|&x| Exact::from_i64(x).unwrap()).collect()
    }

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn random_tallies() {
        let d: DefectDistribution<Exact> = oracle_random_distribution(3, 2, &budget()).unwrap();
        assert_eq!(d.counts(), ints(&[2, 4, 2]).as_slice());
        let d: DefectDistribution<Exact> = oracle_random_distribution(2, 3, &budget()).unwrap();
        assert_eq!(d.counts(), ints(&[6, 3]).as_slice());
        let d: DefectDistribution<Exact> = oracle_random_distribution(1, 4, &budget()).unwrap();
        assert_eq!(d.counts(), ints(&[4]).as_slice());
        assert_eq!(d.total(), &Exact::from_i64(4).unwrap());
    }

    #[test]
    fn group_tallies() {
        let g: GroupCountVector<Exact> = oracle_group_counts(3, 2, &budget()).unwrap();
        assert_eq!(g.counts, ints(&[10, 4, 2]));
        let g: GroupCountVector<Exact> = oracle_group_counts(2, 2, &budget()).unwrap();
        assert_eq!(g.counts, ints(&[4, 2]));
        let g: GroupCountVector<Exact> = oracle_group_counts(5, 3, &budget()).unwrap();
        assert_eq!(g.node_weighted_sum(), Exact::from_i64(5 * 243).unwrap());
    }

    #[test]
    fn protocol_tallies() {
        let d: DefectDistribution<Exact> =
            oracle_protocol_distribution(5, 2, &ProtocolSpec::EDGE_CORRECTING, &budget()).unwrap();
        assert_eq!(d.counts(), ints(&[8, 16, 8, 0, 0]).as_slice());
        let id: DefectDistribution<Exact> = oracle_protocol_distribution(4, 2, &ProtocolSpec::RANDOM, &budget()).unwrap();
        let rnd: DefectDistribution<Exact> = oracle_random_distribution(4, 2, &budget()).unwrap();
        assert_eq!(id, rnd);
        let cc: DefectDistribution<Exact> =
            oracle_protocol_distribution(4, 2, &ProtocolSpec::CENTER_CORRECTING, &budget()).unwrap();
        assert_eq!(cc.counts(), ints(&[6, 8, 2, 0]).as_slice());
    }

    #[test]
    fn randomized_entries_are_rational_and_sum_to_all_states() {
        let d: DefectDistribution<Exact> =
            oracle_protocol_distribution(4, 3, &ProtocolSpec::CENTER_CORRECTING, &budget()).unwrap();
        assert_eq!(d.sum(), Exact::from_i64(81).unwrap());
        assert!(d.counts().iter().any(|x| !x.is_integer()));
    }

    #[test]
    fn budget_is_refused_not_truncated() {
        let tiny = EnumerationBudget::new(10);
        assert!(matches!(
            oracle_random_distribution::<Exact>(4, 2, &tiny),
            Err(Error::BudgetExceeded { required: 16, budget: 10 })
        ));
        assert!(oracle_protocol_distribution::<Exact>(3, 3, &ProtocolSpec::SUBOPTIMAL, &EnumerationBudget::new(27)).is_err());
        assert!(oracle_protocol_distribution::<Exact>(3, 3, &ProtocolSpec::SUBOPTIMAL, &EnumerationBudget::new(216)).is_ok());
    }

    #[test]
    fn chunking_does_not_change_results() {
        // 3^9 spans several chunks
        let d: DefectDistribution<Exact> = oracle_random_distribution(9, 3, &budget()).unwrap();
        let closed = crate::analytics::random_defect_distribution::<Exact>(9, 3).unwrap();
        assert_eq!(d, closed);
    }

    #[test]
    fn edge_correction_ignores_randomness() {
        for n in 3..=8 {
            assert!(defects_independent_of_redraws(n, 3, &ProtocolSpec::EDGE_CORRECTING, &budget()).unwrap());
        }
        // both ends of P_2 re-draw and may collide again
        assert!(!defects_independent_of_redraws(2, 3, &ProtocolSpec::EDGE_CORRECTING, &budget()).unwrap());
        assert!(!defects_independent_of_redraws(4, 3, &ProtocolSpec::CENTER_CORRECTING, &budget()).unwrap());
    }
}
