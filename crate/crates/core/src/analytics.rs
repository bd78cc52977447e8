//! Closed-form defect statistics for paths.
//!
//! Everything here is evaluated in a caller-chosen [`Scalar`]; use
//! [`crate::Exact`] when results are compared against enumeration.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar};

/// `counts[d]` = number of starting states (or expected number, for
/// randomized protocols) ending with `d` defects. `total` is the weight all
/// counts add up to, `c^n` for full distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectDistribution<S> {
    counts: Vec<S>,
    total: S,
}

/// `counts[i-1]` = number of occurrences of a maximal run of length `i`
/// across all `c^n` colorings.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCountVector<S> {
    pub counts: Vec<S>,
}

impl<S: Scalar> DefectDistribution<S> {
    pub fn new(counts: Vec<S>, total: S) -> Self {
        DefectDistribution { counts, total }
    }

    /// Distribution whose total is the sum of its counts.
    pub fn from_counts(counts: Vec<S>) -> Self {
        let total = counts.iter().cloned().fold(S::zero(), |a, b| a + b);
        DefectDistribution { counts, total }
    }

    /// All weight `total` at `d`, in a vector of length `len`.
    pub fn point_mass(len: usize, d: usize, total: S) -> Self {
        let mut counts = vec![S::zero(); len.max(d + 1)];
        counts[d] = total.clone();
        DefectDistribution { counts, total }
    }

    pub fn counts(&self) -> &[S] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> &S {
        &self.total
    }

    /// Entry at `d`, zero past the end.
    pub fn get(&self, d: usize) -> S {
        self.counts.get(d).cloned().unwrap_or_else(S::zero)
    }

    pub fn sum(&self) -> S {
        self.counts.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// `sum_d d * N(d) / total`.
    pub fn average(&self) -> S {
        let weighted = self
            .counts
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (d, n)| acc + S::from_usize_exact(d) * n.clone());
        weighted / self.total.clone()
    }

    /// Distribution of the sum of two independent defect counts.
    /// Counts multiply, so totals multiply as well. The result has length
    /// `len(a) + len(b)` so that concatenated paths keep one slot per node.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut counts = vec![S::zero(); self.len() + other.len()];
        for (i, a) in self.counts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.counts.iter().enumerate() {
                counts[i + j] = counts[i + j].clone() + a.clone() * b.clone();
            }
        }
        DefectDistribution { counts, total: self.total.clone() * other.total.clone() }
    }

    pub fn scaled(&self, factor: &S) -> Self {
        DefectDistribution {
            counts: self.counts.iter().map(|x| x.clone() * factor.clone()).collect(),
            total: self.total.clone() * factor.clone(),
        }
    }

    pub fn with_total(mut self, total: S) -> Self {
        self.total = total;
        self
    }

    /// Pad or trim trailing zeros to exactly `len` entries.
    pub fn resized(mut self, len: usize) -> Self {
        debug_assert!(self.counts.iter().skip(len).all(|x| x.is_zero()));
        self.counts.resize(len, S::zero());
        self
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DefectDistribution<T> {
        DefectDistribution { counts: self.counts.iter().map(&f).collect(), total: f(&self.total) }
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for DefectDistribution<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, x) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("]")
    }
}

impl<S: Scalar> GroupCountVector<S> {
    /// Occurrences of runs of length `i` (1-based).
    pub fn get(&self, i: usize) -> S {
        if i == 0 {
            return S::zero();
        }
        self.counts.get(i - 1).cloned().unwrap_or_else(S::zero)
    }

    /// `sum_i i * G_i`.
    pub fn node_weighted_sum(&self) -> S {
        self.counts
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (i, g)| acc + S::from_usize_exact(i + 1) * g.clone())
    }
}

pub fn average_defects<S: Scalar>(dist: &DefectDistribution<S>) -> S {
    dist.average()
}

fn scalar<S: Scalar>(v: u32) -> S {
    S::from_u32(v).expect("small integers are representable")
}

fn require_palette(c: u32, min: u32) -> Result<()> {
    if c < min {
        Err(Error::PaletteTooSmall { min, got: c })
    } else {
        Ok(())
    }
}

fn require_len(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::PathTooShort { min, got: n })
    } else {
        Ok(())
    }
}

/// Number of proper `c`-colorings of `P_n`: `c (c-1)^(n-1)`.
pub fn chromatic_polynomial_path<S: Scalar>(n: usize, c: u32) -> S {
    if n == 0 {
        return S::one();
    }
    scalar::<S>(c) * (scalar::<S>(c) - S::one()).powu(n - 1)
}

/// `c (c-1)^(n-d-1) C(n-1, d)` for `d in 0..n`; valid for any `c >= 1`.
fn random_counts<S: Scalar>(n: usize, c: u32) -> Vec<S> {
    (0..n)
        .map(|d| chromatic_polynomial_path::<S>(n - d, c) * binomial::<S>(n as i64 - 1, d as i64))
        .collect()
}

/// Defect distribution of a uniformly random coloring of `P_n`.
pub fn random_defect_distribution<S: Scalar>(n: usize, c: u32) -> Result<DefectDistribution<S>> {
    require_len(n, 1)?;
    require_palette(c, 2)?;
    Ok(DefectDistribution::new(random_counts(n, c), scalar::<S>(c).powu(n)))
}

/// `(n-1)/c`.
pub fn random_average<S: Scalar>(n: usize, c: u32) -> S {
    S::from_usize_exact(n.saturating_sub(1)) / scalar(c)
}

/// For `c = 2`, checks `N0(d) = 2 C(n-1, d)` for every `d`.
pub fn pascal_row_property(n: usize) -> bool {
    use crate::Exact;
    let Ok(dist) = random_defect_distribution::<Exact>(n, 2) else {
        return false;
    };
    (0..n).all(|d| dist.get(d) == scalar::<Exact>(2) * binomial::<Exact>(n as i64 - 1, d as i64))
}

/// Occurrences of runs of each length across all colorings of `P_n`.
pub fn group_count_vector<S: Scalar>(n: usize, c: u32) -> Result<GroupCountVector<S>> {
    require_len(n, 2)?;
    require_palette(c, 2)?;
    let cs = scalar::<S>(c);
    let cm1 = cs.clone() - S::one();
    let counts = (1..=n)
        .map(|i| {
            if i == n {
                cs.clone()
            } else if i == n - 1 {
                scalar::<S>(2) * cs.clone() * cm1.clone()
            } else {
                let a = S::from_usize_exact(n - i + 1) * cs.clone();
                let b = S::from_usize_exact(n - i - 1);
                cs.powu(n - 1 - i) * cm1.clone() * (a - b)
            }
        })
        .collect();
    Ok(GroupCountVector { counts })
}

/// Final defects under the edge-correcting rule:
/// `c^3 (c-1)^(n-d-3) C(n-3, d)` for `d <= n-3`, zero above.
pub fn edge_correcting_distribution<S: Scalar>(n: usize, c: u32) -> Result<DefectDistribution<S>> {
    require_len(n, 4)?;
    require_palette(c, 2)?;
    let cs = scalar::<S>(c);
    let counts = (0..n)
        .map(|d| {
            if d + 3 > n {
                S::zero()
            } else {
                cs.powu(3) * (cs.clone() - S::one()).powu(n - d - 3) * binomial::<S>(n as i64 - 3, d as i64)
            }
        })
        .collect();
    Ok(DefectDistribution::new(counts, cs.powu(n)))
}

/// `(n-3)/c`.
pub fn edge_correcting_average<S: Scalar>(n: usize, c: u32) -> S {
    S::from_usize_exact(n.saturating_sub(3)) / scalar(c)
}

/// Which binomial the two-color center-correcting formula is evaluated with.
///
/// The published closed form exists in three textual versions that differ
/// only in the last binomial of the double sum, with
/// `d_s = d + 2(i - k)`:
///
/// * `Statement`: `C(d_s + i - 2k - 1, i - k - 1)`
/// * `Proof`: `C(d_s + i - 1, i - k - 1)` (final line of the derivation)
/// * `Derivation`: `C(d + i - 2k - 1, i - k - 1)`, the coefficient produced
///   by the generating-function step of the derivation
///
/// The last term is `2 C(n - d, d)` in all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinomialForm {
    Statement,
    Proof,
    Derivation,
}

impl BinomialForm {
    pub const ALL: [BinomialForm; 3] = [BinomialForm::Statement, BinomialForm::Proof, BinomialForm::Derivation];

    pub fn name(self) -> &'static str {
        match self {
            BinomialForm::Statement => "statement",
            BinomialForm::Proof => "proof",
            BinomialForm::Derivation => "derivation",
        }
    }

    fn last_binomial<S: Scalar>(self, d: i64, i: i64, k: i64, d_s: i64) -> S {
        match self {
            BinomialForm::Statement => binomial(d_s + i - 2 * k - 1, i - k - 1),
            BinomialForm::Proof => binomial(d_s + i - 1, i - k - 1),
            BinomialForm::Derivation => binomial(d + i - 2 * k - 1, i - k - 1),
        }
    }
}

impl fmt::Display for BinomialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed-form final defect distribution of the center-correcting rule at
/// `c = 2`, evaluated with the chosen binomial.
///
/// `K*_k = floor((n - 1 - d + 2k) / 2)` bounds the inner sum; binomials
/// with out-of-range arguments are zero.
pub fn center_correcting_distribution_c2<S: Scalar>(n: usize, form: BinomialForm) -> Result<DefectDistribution<S>> {
    require_len(n, 3)?;
    let ni = n as i64;
    let two = scalar::<S>(2);
    let counts = (0..ni)
        .map(|d| {
            let mut acc = S::zero();
            for k in 0..=d {
                let k_star = (ni - 1 - d + 2 * k).div_euclid(2);
                for i in k + 1..=k_star {
                    let d_s = d + 2 * (i - k);
                    let term = binomial::<S>(ni - d_s, i) * binomial::<S>(i, k) * form.last_binomial::<S>(d, i, k, d_s);
                    acc = acc + term;
                }
            }
            two.clone() * acc + two.clone() * binomial::<S>(ni - d, d)
        })
        .collect();
    Ok(DefectDistribution::new(counts, two.powu(n)))
}

/// Final defects contributed by one starting run of length `len` under the
/// center-correcting rule with `c` colors.
///
/// Runs of length 1 and 2 never change. In a longer run the `len - 2`
/// interior nodes re-draw among the `c - 1` other colors while the two
/// boundary nodes keep theirs, so the run contributes the random-coloring
/// distribution of `P_(len-2)` with `c - 1` colors. Unnormalized: the total
/// is `(c-1)^(len-2)`.
fn run_distribution<S: Scalar>(len: usize, c: u32) -> DefectDistribution<S> {
    if len <= 2 {
        return DefectDistribution::point_mass(len, len - 1, S::one());
    }
    let inner = random_counts::<S>(len - 2, c - 1);
    DefectDistribution::new(inner, scalar::<S>(c - 1).powu(len - 2)).resized(len)
}

/// Convolution of per-run distributions for one fixed starting
/// decomposition into runs of the given sizes. The result is unnormalized:
/// its total is the number of joint re-draw outcomes.
pub fn center_correcting_convolution<S: Scalar>(groups: &[usize], c: u32) -> Result<DefectDistribution<S>> {
    require_palette(c, 2)?;
    if groups.is_empty() || groups.contains(&0) {
        return Err(Error::PathTooShort { min: 1, got: 0 });
    }
    let mut acc = run_distribution::<S>(groups[0], c);
    for &g in &groups[1..] {
        acc = acc.convolve(&run_distribution(g, c));
    }
    let n: usize = groups.iter().sum();
    Ok(acc.resized(n))
}

/// Expected final defect distribution of the center-correcting rule over all
/// `c^n` starting states, obtained by weighting every decomposition into runs
/// `(m_1, .., m_t)` by its `c (c-1)^(t-1)` colorings and summing the
/// normalized per-decomposition convolutions.
pub fn center_correcting_distribution<S: Scalar>(n: usize, c: u32) -> Result<DefectDistribution<S>> {
    require_len(n, 1)?;
    require_palette(c, 2)?;
    let cs = scalar::<S>(c);
    let cm1 = cs.clone() - S::one();
    // by_prefix[m]: weighted distribution over compositions of m, each run weighted (c-1)
    let mut by_prefix: Vec<DefectDistribution<S>> = vec![DefectDistribution::point_mass(0, 0, S::one()).resized(1)];
    for m in 1..=n {
        let mut acc: Option<DefectDistribution<S>> = None;
        for len in 1..=m {
            let run = run_distribution::<S>(len, c);
            let norm = cm1.clone() / run.total().clone();
            let part = by_prefix[m - len].convolve(&run).scaled(&norm);
            acc = Some(match acc {
                None => part,
                Some(a) => add(&a, &part),
            });
        }
        by_prefix.push(acc.expect("m >= 1").resized(m + 1));
    }
    let first_run = cs.clone() / cm1;
    let dist = by_prefix[n].scaled(&first_run).resized(n);
    Ok(dist.with_total(cs.powu(n)))
}

fn add<S: Scalar>(a: &DefectDistribution<S>, b: &DefectDistribution<S>) -> DefectDistribution<S> {
    let len = a.len().max(b.len());
    let counts = (0..len).map(|d| a.get(d) + b.get(d)).collect();
    DefectDistribution::new(counts, a.total().clone() + b.total().clone())
}

/// Both sides of `sum_d d C(n-1,d) / (c-1)^d = (n-1)/(c-1) (1 + 1/(c-1))^(n-2)`.
pub fn derivative_identity<S: Scalar>(n: usize, c: u32) -> (S, S) {
    let alpha = scalar::<S>(c - 1);
    let lhs = (0..n).fold(S::zero(), |acc, d| {
        acc + S::from_usize_exact(d) * binomial::<S>(n as i64 - 1, d as i64) / alpha.powu(d)
    });
    let rhs = if n < 2 {
        S::zero()
    } else {
        S::from_usize_exact(n - 1) / alpha.clone() * (S::one() + S::one() / alpha).powu(n - 2)
    };
    (lhs, rhs)
}
