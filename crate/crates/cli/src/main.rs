use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flowcolor::montecarlo::{self, Baseline, DatasetConfig, Method};
use flowcolor::symmetry::{self, PairOutcome};
use flowcolor::verify::{self, Claim, VerifyConfig};
use flowcolor::{BinomialForm, EnumerationBudget, Error, FlowGraph, ProtocolSpec};

#[derive(Parser)]
#[command(name = "flowcolor", version, about = "Finite-round coloring protocols on path networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every closed form against exhaustive enumeration.
    Verify(VerifyArgs),
    /// Mean final defects per protocol and palette size.
    Simulate(SimulateArgs),
    /// Search for a symmetric edge and run all 32 one-round rules on it.
    Symmetry(SymmetryArgs),
}

#[derive(Args)]
struct Common {
    /// Maximum number of state evaluations for exact enumeration.
    #[arg(long, env = "FLOWCOLOR_BUDGET", default_value_t = EnumerationBudget::default().max_work)]
    budget: u128,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Leave the generation time out of the header.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Claims to check: random, groups, edge, center (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = Claim::ALL.map(|c| c.name().to_string()))]
    theorem: Vec<String>,
    /// Path lengths: `5`, `2..10` or `3,5,7`. Overrides --n-max.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Palette sizes, same syntax as --n. Overrides --c-max.
    #[arg(long)]
    c: Option<String>,
    #[arg(long, default_value_t = 3)]
    c_max: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Exact,
    Sampled,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Palette sizes: `4`, `2..40` or `2,4,8`.
    #[arg(long, default_value = "2..40")]
    c: String,
    /// Comma-separated protocol names (`random`, `C|phi`, `(φ,C)`, mask 0-31) or `all32`.
    #[arg(long, default_value = "random,C|phi,phi|C,Cbar|CbarX")]
    protocols: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = BaselineArg::Exact)]
    baseline: BaselineArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SymmetryArgs {
    /// Use the path on this many nodes.
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    path: Option<usize>,
    /// Graph file: `n <count>` then `e <i> <j>` lines, 1-based.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Largest radius to search; must stay below the diameter.
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    c: u32,
    /// Also search every starting state for one each rule fails on.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, env = "FLOWCOLOR_BUDGET", default_value_t = EnumerationBudget::default().max_work)]
    budget: u128,
}

/// `5`, `2..10` (inclusive) or `2,4,8`.
fn parse_values<T>(s: &str) -> anyhow::Result<Vec<T>>
where
    T: FromStr + Copy + PartialOrd + Into<u64> + TryFrom<u64>,
    T::Err: std::fmt::Display,
{
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| anyhow!("bad range start in `{s}`: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| anyhow!("bad range end in `{s}`: {e}"))?;
        if a > b {
            bail!("empty range `{s}`");
        }
        return (a..=b).map(|v| T::try_from(v).map_err(|_| anyhow!("{v} out of range"))).collect();
    }
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| anyhow!("bad value `{t}`: {e}")))
        .collect()
}

/// Split on commas that are not inside parentheses.
fn split_protocols(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn parse_protocols(s: &str) -> anyhow::Result<Vec<ProtocolSpec>> {
    if s.trim().eq_ignore_ascii_case("all32") {
        return Ok(flowcolor::protocols::enumerate_protocols());
    }
    let specs = split_protocols(s).into_iter().map(ProtocolSpec::from_str).collect::<Result<Vec<_>, _>>()?;
    if specs.is_empty() {
        bail!("no protocols given");
    }
    Ok(specs)
}

fn header(command: &str, config: String, no_timestamp: bool) -> Vec<String> {
    let mut lines = vec![format!("flowcolor {} {command} {config}", env!("CARGO_PKG_VERSION"))];
    if !no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        lines.push(format!("generated_unix={secs}"));
    }
    lines
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let claims = args.theorem.iter().map(|t| t.parse::<Claim>()).collect::<Result<Vec<_>, _>>()?;
    let n_values: Vec<usize> = match &args.n {
        Some(s) => parse_values::<u64>(s)?.into_iter().map(|v| v as usize).collect(),
        None => (2..=args.n_max).collect(),
    };
    let c_values: Vec<u32> = match &args.c {
        Some(s) => parse_values(s)?,
        None => (2..=args.c_max).collect(),
    };
    let cfg = VerifyConfig { claims, n_values, c_values, budget: EnumerationBudget::new(args.common.budget) };
    let report = verify::run(&cfg)?;

    let config = format!(
        "theorem={} n={} c={} budget={}",
        join(&cfg.claims),
        join(&cfg.n_values),
        join(&cfg.c_values),
        cfg.budget.max_work
    );
    let mut out = sink(&args.common.output)?;
    report.write_csv(&mut out, &header("verify", config, args.common.no_timestamp))?;
    out.flush()?;

    if report.rows.iter().any(|r| matches!(r.variant, verify::Variant::Binomial(_))) {
        let forms = report.matching_forms();
        let names: Vec<&str> = forms.iter().map(|f| f.name()).collect();
        eprintln!(
            "center-correcting binomial forms matching every cell: {}",
            if names.is_empty() { "none".to_string() } else { names.join(", ") }
        );
        if !report.published_form_matches() {
            eprintln!("neither the statement nor the proof binomial matches enumeration");
            if forms.contains(&BinomialForm::Derivation) {
                eprintln!("the derivation-step binomial C(d+i-2k-1, i-k-1) matches");
            }
        }
    }
    match report.first_failure() {
        None => {
            eprintln!("all {} cells match", report.rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(r) => {
            eprintln!(
                "mismatch: theorem={} n={} c={} d={} closed_form={} oracle={}",
                r.label(),
                r.n,
                r.c,
                r.index,
                flowcolor::scalar::format_exact(&r.closed_form),
                flowcolor::scalar::format_exact(&r.oracle)
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let protocols = parse_protocols(&args.protocols)?;
    let cfg = DatasetConfig {
        n: args.n,
        c_values: parse_values(&args.c)?,
        protocols,
        trials: args.trials,
        seed: args.seed,
        baseline: match args.baseline {
            BaselineArg::Exact => Baseline::Exact,
            BaselineArg::Sampled => Baseline::Sampled,
        },
        method: match args.method {
            MethodArg::Auto => Method::Auto,
            MethodArg::Exact => Method::Exact,
            MethodArg::Mc => Method::Sampled,
        },
        budget: EnumerationBudget::new(args.common.budget),
    };
    let rows = montecarlo::defects_vs_colors(&cfg)?;
    let config = format!(
        "n={} c={} protocols={} trials={} seed={} method={:?} baseline={:?} budget={}",
        cfg.n,
        join(&cfg.c_values),
        cfg.protocols.iter().map(ProtocolSpec::ascii_name).collect::<Vec<_>>().join(";"),
        cfg.trials,
        cfg.seed,
        cfg.method,
        cfg.baseline,
        cfg.budget.max_work
    );
    let mut out = sink(&args.common.output)?;
    montecarlo::write_csv(&mut out, &header("simulate", config, args.common.no_timestamp), &rows)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn load_graph(args: &SymmetryArgs) -> anyhow::Result<FlowGraph> {
    if let Some(n) = args.path {
        return Ok(FlowGraph::path(n)?);
    }
    let path: &Path = args.graph.as_deref().ok_or_else(|| anyhow!("either --path or --graph is required"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.parse()?)
}

fn cmd_symmetry(args: SymmetryArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&args)?;
    let Some(pair) = symmetry::find_symmetric_pair(&g, args.r)? else {
        println!("no {}-hop symmetric pair: no adjacent nodes have matching neighbor types up to radius {}", args.r, args.r);
        return Ok(ExitCode::SUCCESS);
    };
    let report = symmetry::impossibility_check(&g, &pair, args.c, args.budget)?;
    let colors: Vec<String> = report.state.colors().iter().map(u32::to_string).collect();
    println!("pair: ({}, {}) at radius {}", pair.i + 1, pair.j + 1, pair.radius);
    for (r, (a, _)) in pair.layer_witness.iter().enumerate() {
        let degrees: Vec<String> = a.iter().map(|t| t.degree.to_string()).collect();
        println!("  {}-hop neighbor degrees on both sides: [{}]", r + 1, degrees.join(","));
    }
    println!("state: ({})", colors.join(","));
    println!("views equal at radius {}: {}", pair.radius, report.views_equal);
    println!("views equal after 1 round: {}", report.one_round_views_equal);
    println!("note: {}", symmetry::ImpossibilityReport::hypothesis_note());
    println!();
    println!("{:<14} {:<10} {:<8} result", "protocol", "alias", "same");
    for row in &report.rows {
        let result = match &row.outcome {
            PairOutcome::Deterministic { final_state, defects, pair_defective } => {
                let fs: Vec<String> = final_state.colors().iter().map(u32::to_string).collect();
                format!("final ({}) defects {defects} pair defective {pair_defective}", fs.join(","))
            }
            PairOutcome::Randomized { outcomes, pair_defect_probability, expected_defects } => format!(
                "P(pair defective) = {} over {outcomes} outcomes, E[defects] = {}",
                flowcolor::scalar::format_exact(pair_defect_probability),
                flowcolor::scalar::format_exact(expected_defects)
            ),
        };
        println!("{:<14} {:<10} {:<8} {result}", row.spec.tuple_name(), row.spec.ascii_name(), row.decisions_equal);
    }
    let defeated = report.rows.iter().filter(|r| r.defeated()).count();
    println!();
    println!("{defeated}/{} protocols defective on edge ({}, {})", report.rows.len(), pair.i + 1, pair.j + 1);

    if args.exhaustive {
        println!();
        let budget = EnumerationBudget::new(args.budget);
        let mut successful = 0;
        for spec in flowcolor::protocols::enumerate_protocols() {
            match symmetry::failing_start(&g, &spec, args.c, &budget)? {
                Some((start, end)) => println!("{:<10} fails from {start} -> {end}", spec.ascii_name()),
                None => {
                    successful += 1;
                    println!("{:<10} never ends with a defect", spec.ascii_name());
                }
            }
        }
        println!("{successful}/32 protocols are one-round successful on this graph");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Symmetry(a) => cmd_symmetry(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::RadiusTooLarge { .. }) => eprintln!("error: {e} (the impossibility argument needs r < diameter)"),
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(2)
        }
    }
}
