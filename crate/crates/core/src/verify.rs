//! Cell-by-cell comparison of every closed form against the brute-force oracle.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytics::{
    center_correcting_distribution, center_correcting_distribution_c2, edge_correcting_average,
    edge_correcting_distribution, group_count_vector, random_average, random_defect_distribution, BinomialForm,
};
use crate::error::{Error, Result};
use crate::oracle::{oracle_group_counts, oracle_protocol_distribution, oracle_random_distribution, EnumerationBudget};
use crate::protocols::ProtocolSpec;
use crate::scalar::{format_exact, Scalar};
use crate::Exact;

/// A closed-form claim that can be checked by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Claim {
    /// `N0(d) = c (c-1)^(n-d-1) C(n-1, d)` and its average `(n-1)/c`.
    RandomAssignment,
    /// Run-length counts `G_i` and `sum_i i G_i = n c^n`.
    GroupCounts,
    /// `N1(d) = c^3 (c-1)^(n-d-3) C(n-3, d)` and its average `(n-3)/c`.
    EdgeCorrecting,
    /// The center-correcting distribution: the binomial forms at `c = 2`
    /// and the run convolution at every `c`.
    CenterCorrecting,
}

impl Claim {
    pub const ALL: [Claim; 4] = [Claim::RandomAssignment, Claim::GroupCounts, Claim::EdgeCorrecting, Claim::CenterCorrecting];

    pub fn name(self) -> &'static str {
        match self {
            Claim::RandomAssignment => "random",
            Claim::GroupCounts => "groups",
            Claim::EdgeCorrecting => "edge",
            Claim::CenterCorrecting => "center",
        }
    }

    fn min_len(self) -> usize {
        match self {
            Claim::RandomAssignment | Claim::GroupCounts => 2,
            Claim::EdgeCorrecting => 4,
            Claim::CenterCorrecting => 3,
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown claim `{s}`, expected one of random, groups, edge, center")))
    }
}

/// Which variant of a claim a row checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Single,
    Binomial(BinomialForm),
    Convolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Index {
    Defects(usize),
    GroupSize(usize),
    Average,
    NodeWeightedSum,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Defects(d) | Index::GroupSize(d) => write!(f, "{d}"),
            Index::Average => f.write_str("avg"),
            Index::NodeWeightedSum => f.write_str("sum_iG"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub claim: Claim,
    pub variant: Variant,
    pub n: usize,
    pub c: u32,
    pub index: Index,
    pub closed_form: Exact,
    pub oracle: Exact,
}

impl VerifyRow {
    pub fn matches(&self) -> bool {
        self.closed_form == self.oracle
    }

    /// Claim name, suffixed with the variant where there is more than one.
    pub fn label(&self) -> String {
        match self.variant {
            Variant::Single => self.claim.name().to_string(),
            Variant::Binomial(form) => format!("{}:{}", self.claim, form.name()),
            Variant::Convolution => format!("{}:convolution", self.claim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub claims: Vec<Claim>,
    pub n_values: Vec<usize>,
    pub c_values: Vec<u32>,
    pub budget: EnumerationBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    /// Binomial forms of the center-correcting claim that match every checked cell.
    pub fn matching_forms(&self) -> Vec<BinomialForm> {
        BinomialForm::ALL
            .into_iter()
            .filter(|&form| {
                let mut rows = self.rows.iter().filter(|r| r.variant == Variant::Binomial(form)).peekable();
                rows.peek().is_some() && rows.all(VerifyRow::matches)
            })
            .collect()
    }

    fn has_binomial_rows(&self) -> bool {
        self.rows.iter().any(|r| matches!(r.variant, Variant::Binomial(_)))
    }

    /// Whether the published binomial forms are settled: at least one of the
    /// statement or proof form matches, or no such cell was checked.
    pub fn published_form_matches(&self) -> bool {
        !self.has_binomial_rows()
            || self
                .matching_forms()
                .iter()
                .any(|f| matches!(f, BinomialForm::Statement | BinomialForm::Proof))
    }

    /// First mismatching row that decides the outcome: any row outside the
    /// binomial forms, then the first mismatching published form.
    pub fn first_failure(&self) -> Option<&VerifyRow> {
        let hard = self.rows.iter().find(|r| !matches!(r.variant, Variant::Binomial(_)) && !r.matches());
        if hard.is_some() || self.published_form_matches() {
            return hard;
        }
        self.rows
            .iter()
            .find(|r| matches!(r.variant, Variant::Binomial(BinomialForm::Statement | BinomialForm::Proof)) && !r.matches())
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub const CSV_COLUMNS: [&'static str; 7] = ["theorem", "n", "c", "d", "closed_form", "oracle", "match"];

    pub fn write_csv<W: std::io::Write>(&self, out: W, header: &[String]) -> Result<()> {
        let mut out = out;
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        for line in header {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(Self::CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.label(),
                r.n.to_string(),
                r.c.to_string(),
                r.index.to_string(),
                format_exact(&r.closed_form),
                format_exact(&r.oracle),
                r.matches().to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

fn distribution_rows(
    claim: Claim,
    variant: Variant,
    n: usize,
    c: u32,
    closed: &crate::ExactDistribution,
    oracle: &crate::ExactDistribution,
) -> Vec<VerifyRow> {
    (0..n.max(closed.len()).max(oracle.len()))
        .map(|d| VerifyRow { claim, variant, n, c, index: Index::Defects(d), closed_form: closed.get(d), oracle: oracle.get(d) })
        .collect()
}

/// Rows for one `(claim, n, c)` cell. Cells outside a claim's domain are empty.
pub fn check_cell(claim: Claim, n: usize, c: u32, budget: &EnumerationBudget) -> Result<Vec<VerifyRow>> {
    if n < claim.min_len() || c < 2 {
        return Ok(Vec::new());
    }
    let row = |variant, index, closed_form, oracle| VerifyRow { claim, variant, n, c, index, closed_form, oracle };
    let mut rows = Vec::new();
    match claim {
        Claim::RandomAssignment => {
            let closed = random_defect_distribution::<Exact>(n, c)?;
            let oracle = oracle_random_distribution::<Exact>(n, c, budget)?;
            rows.extend(distribution_rows(claim, Variant::Single, n, c, &closed, &oracle));
            rows.push(row(Variant::Single, Index::Average, random_average(n, c), oracle.average()));
        }
        Claim::GroupCounts => {
            let closed = group_count_vector::<Exact>(n, c)?;
            let oracle = oracle_group_counts::<Exact>(n, c, budget)?;
            for i in 1..=n {
                rows.push(row(Variant::Single, Index::GroupSize(i), closed.get(i), oracle.get(i)));
            }
            let partition = Exact::from_usize_exact(n) * Exact::from_usize_exact(c as usize).powu(n);
            rows.push(row(Variant::Single, Index::NodeWeightedSum, partition, oracle.node_weighted_sum()));
        }
        Claim::EdgeCorrecting => {
            let closed = edge_correcting_distribution::<Exact>(n, c)?;
            let oracle = oracle_protocol_distribution::<Exact>(n, c, &ProtocolSpec::EDGE_CORRECTING, budget)?;
            rows.extend(distribution_rows(claim, Variant::Single, n, c, &closed, &oracle));
            rows.push(row(Variant::Single, Index::Average, edge_correcting_average(n, c), oracle.average()));
        }
        Claim::CenterCorrecting => {
            let oracle = oracle_protocol_distribution::<Exact>(n, c, &ProtocolSpec::CENTER_CORRECTING, budget)?;
            if c == 2 {
                for form in BinomialForm::ALL {
                    let closed = center_correcting_distribution_c2::<Exact>(n, form)?;
                    rows.extend(distribution_rows(claim, Variant::Binomial(form), n, c, &closed, &oracle));
                }
            }
            let closed = center_correcting_distribution::<Exact>(n, c)?;
            rows.extend(distribution_rows(claim, Variant::Convolution, n, c, &closed, &oracle));
        }
    }
    Ok(rows)
}

/// Check every `(claim, n, c)` cell, in parallel, rows ordered by claim, `n`, `c`.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let cells: Vec<(Claim, usize, u32)> = cfg
        .claims
        .iter()
        .flat_map(|&claim| cfg.n_values.iter().flat_map(move |&n| cfg.c_values.iter().map(move |&c| (claim, n, c))))
        .collect();
    let per_cell = cells
        .into_par_iter()
        .map(|(claim, n, c)| check_cell(claim, n, c, &cfg.budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { rows: per_cell.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(claims: Vec<Claim>, n_values: Vec<usize>, c_values: Vec<u32>) -> VerifyConfig {
        VerifyConfig { claims, n_values, c_values, budget: EnumerationBudget::default() }
    }

    #[test]
    fn random_assignment_small() {
        let report = run(&cfg(vec![Claim::RandomAssignment], vec![3], vec![2])).unwrap();
        let values: Vec<String> = report.rows.iter().take(3).map(|r| format_exact(&r.oracle)).collect();
        assert_eq!(values, ["2", "4", "2"]);
        assert!(report.passed());
        assert_eq!(report.rows.last().unwrap().index, Index::Average);
    }

    #[test]
    fn sweep_without_center_passes() {
        let claims = vec![Claim::RandomAssignment, Claim::GroupCounts, Claim::EdgeCorrecting];
        let report = run(&cfg(claims, (2..=7).collect(), vec![2, 3])).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn center_forms_agree_up_to_five() {
        let report = run(&cfg(vec![Claim::CenterCorrecting], (3..=5).collect(), vec![2, 3])).unwrap();
        assert_eq!(report.matching_forms(), BinomialForm::ALL.to_vec());
        assert!(report.passed());
    }

    #[test]
    fn published_forms_break_at_six() {
        let report = run(&cfg(vec![Claim::CenterCorrecting], vec![6], vec![2])).unwrap();
        assert_eq!(report.matching_forms(), vec![BinomialForm::Derivation]);
        assert!(!report.passed());
        let fail = report.first_failure().unwrap();
        assert_eq!((fail.n, fail.variant), (6, Variant::Binomial(BinomialForm::Statement)));
    }

    #[test]
    fn claim_names_round_trip() {
        for claim in Claim::ALL {
            assert_eq!(claim.name().parse::<Claim>().unwrap(), claim);
        }
        assert!("nope".parse::<Claim>().is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let tight = VerifyConfig { budget: EnumerationBudget::new(10), ..cfg(vec![Claim::RandomAssignment], vec![8], vec![3]) };
        assert!(matches!(run(&tight), Err(Error::BudgetExceeded { .. })));
    }
}
