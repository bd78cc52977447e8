//! Sampled defect averages for paths too long to enumerate.
//!
//! Every trial owns its own ChaCha8 stream: the key is derived from
//! `(seed, n, c)` and the stream id is the trial index. A trial first draws
//! the starting colors, then every protocol replays the same continuation of
//! the stream for its re-draws, so all protocols in a cell see the same
//! starting states. Sums are kept as exact integers and merged in a fixed
//! order, which makes reports identical for any thread count.

use std::io::Write;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::random_average;
use crate::coloring::{path_defects, Color};
use crate::error::{Error, Result};
use crate::oracle::{oracle_protocol_distribution, protocol_work, EnumerationBudget};
use crate::protocols::{path_redraws, redraw_target, ProtocolSpec};
use crate::Exact;

const BATCH: u64 = 1 << 10;

/// Chromatic number of any path with at least one edge.
pub const PATH_CHROMATIC_NUMBER: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport<F = f64> {
    pub protocol: ProtocolSpec,
    pub n: usize,
    pub c: u32,
    pub trials: u64,
    pub mean: F,
    /// Standard error of the mean.
    pub stderr: F,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, x: usize) {
        let x = x as u128;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn report<F: Float + FromPrimitive>(&self, protocol: ProtocolSpec, n: usize, c: u32, trials: u64, seed: u64) -> TrialReport<F> {
        let t = trials as u128;
        let f = |x: u128| F::from_u128(x).expect("finite");
        let mean = f(self.sum) / f(t);
        let stderr = if trials < 2 {
            F::zero()
        } else {
            // t * sum_sq - sum^2 is t^2 times the biased variance, exact in integers
            let spread = t * self.sum_sq - self.sum * self.sum;
            (f(spread) / (f(t) * f(t - 1)) / f(t)).sqrt()
        };
        TrialReport { protocol, n, c, trials, mean, stderr, seed }
    }
}

fn cell_rng(seed: u64, n: usize, c: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    key[16..20].copy_from_slice(&c.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn check(n: usize, c: u32, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if c < 2 {
        return Err(Error::PaletteTooSmall { min: 2, got: c });
    }
    if n < 2 {
        return Err(Error::PathTooShort { min: 2, got: n });
    }
    Ok(())
}

/// Sample every protocol in `specs` on `P_n` with `c` colors over the same
/// `trials` starting states.
pub fn sample_protocols<F: Float + FromPrimitive>(
    n: usize,
    c: u32,
    specs: &[ProtocolSpec],
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialReport<F>>> {
    check(n, c, trials)?;
    let base = cell_rng(seed, n, c);
    let batches = trials.div_ceil(BATCH);
    let partials: Vec<Vec<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut moments = vec![Moments::default(); specs.len()];
            let mut start: Vec<Color> = vec![0; n];
            let mut colors: Vec<Color> = vec![0; n];
            let mut redraws = Vec::with_capacity(n);
            for trial in b * BATCH..((b + 1) * BATCH).min(trials) {
                let mut rng = base.clone();
                rng.set_stream(trial);
                for x in start.iter_mut() {
                    *x = rng.random_range(1..=c);
                }
                for (spec, m) in specs.iter().zip(moments.iter_mut()) {
                    let mut r = rng.clone();
                    path_redraws(&start, spec, &mut redraws);
                    colors.copy_from_slice(&start);
                    for &v in &redraws {
                        colors[v] = redraw_target(start[v], r.random_range(0..c - 1));
                    }
                    m.push(path_defects(&colors));
                }
            }
            moments
        })
        .collect();
    let mut total = vec![Moments::default(); specs.len()];
    for part in &partials {
        for (acc, m) in total.iter_mut().zip(part) {
            acc.merge(m);
        }
    }
    Ok(total
        .iter()
        .zip(specs)
        .map(|(m, &spec)| m.report(spec, n, c, trials, seed))
        .collect())
}

pub fn sample_protocol<F: Float + FromPrimitive>(n: usize, c: u32, spec: &ProtocolSpec, trials: u64, seed: u64) -> Result<TrialReport<F>> {
    Ok(sample_protocols(n, c, std::slice::from_ref(spec), trials, seed)?.remove(0))
}

/// What protocol means are divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Baseline {
    /// The random-coloring average `(n-1)/c`.
    #[default]
    Exact,
    /// The sampled mean of the starting states of the same cell.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Enumerate when the cell fits the budget, sample otherwise.
    #[default]
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub n: usize,
    pub c_values: Vec<u32>,
    pub protocols: Vec<ProtocolSpec>,
    pub trials: u64,
    pub seed: u64,
    pub baseline: Baseline,
    pub method: Method,
    pub budget: EnumerationBudget,
}

/// One `(protocol, c)` cell of the defects-versus-colors table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub protocol: ProtocolSpec,
    pub n: usize,
    pub c: u32,
    /// `0` for rows computed by enumeration.
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub normalized_mean: f64,
    pub seed: u64,
}

impl DatasetRow {
    pub fn c_over_chi(&self) -> f64 {
        self.c as f64 / PATH_CHROMATIC_NUMBER as f64
    }

    pub fn is_exact(&self) -> bool {
        self.trials == 0
    }

    /// Standard error of `normalized_mean` against an exact baseline.
    pub fn normalized_stderr(&self) -> f64 {
        self.stderr * self.normalized_mean / self.mean.max(f64::MIN_POSITIVE)
    }
}

fn exact_row(n: usize, c: u32, spec: ProtocolSpec, seed: u64, budget: &EnumerationBudget) -> Result<DatasetRow> {
    let mean = oracle_protocol_distribution::<Exact>(n, c, &spec, budget)?.average();
    let normalized = &mean / random_average::<Exact>(n, c);
    Ok(DatasetRow {
        protocol: spec,
        n,
        c,
        trials: 0,
        mean: mean.to_f64().unwrap_or(f64::NAN),
        stderr: 0.0,
        normalized_mean: normalized.to_f64().unwrap_or(f64::NAN),
        seed,
    })
}

fn use_exact(cfg: &DatasetConfig, c: u32) -> Result<bool> {
    match cfg.method {
        Method::Sampled => Ok(false),
        Method::Exact => {
            for spec in &cfg.protocols {
                cfg.budget.check(protocol_work(cfg.n, c, spec))?;
            }
            Ok(true)
        }
        Method::Auto => Ok(cfg.protocols.iter().all(|s| cfg.budget.check(protocol_work(cfg.n, c, s)).is_ok())),
    }
}

/// Mean final defects per protocol and palette size, normalized by the
/// random-coloring mean. Rows are ordered by `c`, then by protocol.
pub fn defects_vs_colors(cfg: &DatasetConfig) -> Result<Vec<DatasetRow>> {
    check(cfg.n, cfg.c_values.iter().copied().min().unwrap_or(2), cfg.trials.max(1))?;
    if cfg.method != Method::Exact && cfg.trials == 0 {
        return Err(Error::NoTrials);
    }
    let mut rows = Vec::with_capacity(cfg.c_values.len() * cfg.protocols.len());
    for &c in &cfg.c_values {
        if use_exact(cfg, c)? {
            for &spec in &cfg.protocols {
                rows.push(exact_row(cfg.n, c, spec, cfg.seed, &cfg.budget)?);
            }
            continue;
        }
        let mut specs = cfg.protocols.clone();
        if cfg.baseline == Baseline::Sampled {
            specs.push(ProtocolSpec::RANDOM);
        }
        let reports = sample_protocols::<f64>(cfg.n, c, &specs, cfg.trials, cfg.seed)?;
        let baseline = match cfg.baseline {
            Baseline::Exact => random_average::<f64>(cfg.n, c),
            Baseline::Sampled => reports.last().expect("baseline sampled").mean,
        };
        for r in &reports[..cfg.protocols.len()] {
            rows.push(DatasetRow {
                protocol: r.protocol,
                n: r.n,
                c,
                trials: r.trials,
                mean: r.mean,
                stderr: r.stderr,
                normalized_mean: r.mean / baseline,
                seed: r.seed,
            });
        }
    }
    Ok(rows)
}

pub const CSV_COLUMNS: [&str; 9] = ["protocol", "n", "c", "c_over_chi", "trials", "mean", "stderr", "normalized_mean", "seed"];

/// Write `rows` as CSV, preceded by `# `-prefixed header lines.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[DatasetRow]) -> Result<()> {
    let mut out = out;
    let io = |e: std::io::Error| Error::Parse(e.to_string());
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.protocol.ascii_name(),
            r.n.to_string(),
            r.c.to_string(),
            format!("{:.1}", r.c_over_chi()),
            r.trials.to_string(),
            format!("{:.6}", r.mean),
            format!("{:.6}", r.stderr),
            format!("{:.6}", r.normalized_mean),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io)
}
