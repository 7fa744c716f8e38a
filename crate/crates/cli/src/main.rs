//! `forestwalk` command-line front end.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 when an experiment ran but
//! failed one of its criteria.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use forestwalk::codec::{ForestRecord, MarkedCyclicForest, MarkedTree, PlaneTree};
use forestwalk::degseq::{make_degree_sequence, DegreeSequence, OffspringLaw};
use forestwalk::lattice::{CodingWalk, LatticeBridge};
use forestwalk::limit::{sample_tau_exact, simulate_limit};
use forestwalk::sampler::{forget_mark, sample_mcf, ReplicateStats, ReplicateSummary};
use forestwalk::verify::{
    cn_from_exponent, experiment_concentration, experiment_degrees, experiment_largest_marked, experiment_tau,
    experiment_tree_sizes, experiment_walk, run_replicates, ExperimentReport, ExperimentSetup, LimitOptions,
    Tolerances,
};

#[derive(Parser, Debug)]
#[command(name = "forestwalk", version, about = "Random plane forests with a prescribed degree sequence")]
struct Cli {
    /// Worker threads (wall time only; results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate or build degree sequences.
    #[command(subcommand)]
    Degseq(DegseqCmd),
    /// Draw uniform forests or marked cyclic forests.
    Sample(SampleArgs),
    /// Bijections between trees, forests, bridges and walks.
    #[command(subcommand)]
    Codec(CodecCmd),
    /// Brownian limit objects.
    #[command(subcommand)]
    Limit(LimitCmd),
    /// Monte Carlo experiments.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum DegseqCmd {
    /// Check a degree sequence given as `{"0":3,"2":1}` or `@file`.
    Check {
        #[arg(long)]
        counts: String,
    },
    /// Build a degree sequence from an offspring law.
    Make {
        #[arg(long)]
        p: OffspringLaw,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        cn: CnArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct CnArgs {
    /// Number of trees.
    #[arg(long)]
    cn: Option<usize>,
    /// Number of trees as floor(n^exp).
    #[arg(long = "cn-exp")]
    cn_exp: Option<f64>,
}

impl CnArgs {
    fn resolve(&self, n: usize) -> usize {
        match (self.cn, self.cn_exp) {
            (Some(c), _) => c,
            (None, Some(e)) => cn_from_exponent(n, e),
            (None, None) => unreachable!("clap enforces one of --cn/--cn-exp"),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Forest,
    Mcf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Degree sequence file (JSON `{"counts": {...}}`).
    #[arg(long, conflicts_with = "counts")]
    degseq: Option<PathBuf>,
    /// Inline counts `{"0":3,"2":1}`.
    #[arg(long)]
    counts: Option<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum CodecCmd {
    /// Tree (optionally marked) to bridge, or marked cyclic forest to walk.
    Encode {
        /// Lexicographic degrees of a tree, e.g. `[2,0,0]`.
        #[arg(long, conflicts_with = "mcf")]
        tree: Option<String>,
        /// 1-based lexicographic position of the mark.
        #[arg(long, requires = "tree")]
        mark: Option<usize>,
        /// `{"trees": [...], "mark": [tree, pos]}`.
        #[arg(long)]
        mcf: Option<String>,
    },
    /// Bridge to (marked) tree, or coding walk to marked cyclic forest.
    Decode {
        #[arg(long, conflicts_with = "walk")]
        bridge: Option<String>,
        #[arg(long)]
        walk: Option<String>,
    },
    /// Cyclic shift of a bridge; without `--shift`, its first-passage shift.
    Rotate {
        #[arg(long)]
        bridge: String,
        #[arg(long)]
        shift: Option<usize>,
    },
    /// Split a coding walk at its first passage times.
    Split {
        #[arg(long)]
        walk: String,
    },
}

#[derive(Subcommand, Debug)]
enum LimitCmd {
    /// Exact draws of the first passage time of sigma B to -1.
    SampleTau {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Ranked excursion lengths of the reflected path up to the passage time.
    Excursions {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "top", alias = "top-j", default_value_t = 5)]
        top_j: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 400.0)]
        t_cap: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Include the reflected sub-paths of the kept excursions.
        #[arg(long)]
        keep_paths: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Experiment {
    Tau,
    Sizes,
    Walk,
    Degrees,
    Largest,
    Concentration,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    #[arg(long, default_value = "geometric:0.5")]
    p: OffspringLaw,
    #[arg(long, default_value_t = 200_000)]
    n: usize,
    /// Number of trees (overrides --cn-exp).
    #[arg(long)]
    cn: Option<usize>,
    #[arg(long = "cn-exp", default_value_t = 0.35)]
    cn_exp: f64,
    #[arg(long, default_value_t = 300)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Raw per-replicate statistics as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Ranked sizes compared (sizes).
    #[arg(long, default_value_t = 3)]
    top_j: usize,
    #[arg(long, default_value_t = 3000)]
    limit_reps: usize,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 400.0)]
    t_cap: f64,
    /// Time points (walk).
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    t: Vec<f64>,
    /// Degrees i (degrees, concentration uses the first).
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    degrees: Vec<usize>,
    /// Tree ranks l (degrees).
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    trees: Vec<usize>,
    /// Exceedance level for degree differences.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Thresholds (concentration).
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5")]
    thresholds: Vec<f64>,
}

enum Failure {
    Invalid(String),
    Criterion(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Inline JSON, or `@path` to read it from a file.
fn parse_json<T: DeserializeOwned>(arg: &str) -> CliResult<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

/// Accepts either `{"counts": {...}}` or the bare counts map.
fn parse_degseq(arg: &str) -> CliResult<DegreeSequence> {
    let value: Value = parse_json(arg)?;
    let wrapped = if value.get("counts").is_some() { value } else { json!({ "counts": value }) };
    Ok(serde_json::from_value(wrapped)?)
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&PathBuf>, value: &impl serde::Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn run_degseq(cmd: DegseqCmd) -> CliResult {
    match cmd {
        DegseqCmd::Check { counts } => {
            let s = parse_degseq(&counts)?;
            emit_json(None, &json!({ "valid": true, "n": s.n(), "c": s.c(), "degseq": s }))
        }
        DegseqCmd::Make { p, n, cn, out } => {
            let s = make_degree_sequence(&p, n, cn.resolve(n))?;
            emit_json(out.as_ref(), &s)
        }
    }
}

fn run_sample(args: SampleArgs) -> CliResult {
    let s = match (&args.degseq, &args.counts) {
        (Some(path), _) => parse_degseq(&format!("@{}", path.display()))?,
        (None, Some(counts)) => parse_degseq(counts)?,
        (None, None) => return Err(Failure::Invalid("one of --degseq or --counts is required".into())),
    };
    let samples: Vec<(ForestRecord, ReplicateSummary)> = run_replicates(args.count, args.seed, 0, |i, rng| {
        let mcf = sample_mcf(&s, rng);
        let summary = ReplicateStats::from_degrees(mcf.to_walk().degrees(), s.c()).summary(i);
        let record = match args.kind {
            Kind::Forest => ForestRecord::from(&forget_mark(mcf, rng)),
            Kind::Mcf => ForestRecord::from(&mcf),
        };
        (record, summary)
    });
    let mut text = String::new();
    match args.format {
        Format::Json => {
            for (i, (record, _)) in samples.iter().enumerate() {
                let mut line = serde_json::to_value(record)?;
                line["seed"] = json!(args.seed);
                line["replicate"] = json!(i);
                text.push_str(&serde_json::to_string(&line)?);
                text.push('\n');
            }
        }
        Format::Csv => {
            let columns = samples.iter().map(|(_, m)| m.sizes.len()).max().unwrap_or(0);
            text.push_str(&format!("# seed={}\n", args.seed));
            text.push_str(&ReplicateSummary::csv_header(columns));
            text.push('\n');
            for (_, summary) in &samples {
                text.push_str(&summary.csv_row(columns));
                text.push('\n');
            }
        }
    }
    emit(args.out.as_ref(), &text)
}

fn run_codec(cmd: CodecCmd) -> CliResult {
    match cmd {
        CodecCmd::Encode { tree, mark, mcf } => {
            if let Some(tree) = tree {
                let t = PlaneTree::from_lex(parse_json(&tree)?)?;
                let bridge: Vec<i64> = match mark {
                    None => t.dfw_encode().values().to_vec(),
                    Some(k) => MarkedTree::new(t, k)?.to_bridge().values().to_vec(),
                };
                emit_json(None, &json!({ "bridge": bridge }))
            } else if let Some(mcf) = mcf {
                let m: MarkedCyclicForest = parse_json(&mcf)?;
                emit_json(None, &json!({ "walk": m.to_walk().values() }))
            } else {
                Err(Failure::Invalid("one of --tree or --mcf is required".into()))
            }
        }
        CodecCmd::Decode { bridge, walk } => {
            if let Some(bridge) = bridge {
                let b = LatticeBridge::new(parse_json(&bridge)?)?;
                let m = MarkedTree::from_bridge(&b);
                if b.is_first_passage() {
                    emit_json(None, &json!({ "tree": m.tree }))
                } else {
                    emit_json(None, &json!({ "tree": m.tree, "mark": m.mark }))
                }
            } else if let Some(walk) = walk {
                let w = CodingWalk::new(parse_json(&walk)?)?;
                emit_json(None, &MarkedCyclicForest::from_walk(&w))
            } else {
                Err(Failure::Invalid("one of --bridge or --walk is required".into()))
            }
        }
        CodecCmd::Rotate { bridge, shift } => {
            let b = LatticeBridge::new(parse_json(&bridge)?)?;
            match shift {
                Some(k) if k == 0 || k > b.len() - 1 => {
                    Err(Failure::Invalid(format!("shift must lie in 1..={}", b.len() - 1)))
                }
                Some(k) => emit_json(None, &json!({ "shift": k, "bridge": b.cyclic_shift(k).values() })),
                None => {
                    let (r, fp) = b.to_first_passage();
                    emit_json(None, &json!({ "rotation_index": r, "bridge": fp.values() }))
                }
            }
        }
        CodecCmd::Split { walk } => {
            let w = CodingWalk::new(parse_json(&walk)?)?;
            let split = w.split_at_passage_times();
            let trees: Vec<&[i64]> = split.trees.iter().map(|t| t.values()).collect();
            emit_json(None, &json!({ "trees": trees, "last": split.last.values() }))
        }
    }
}

fn run_limit(cmd: LimitCmd) -> CliResult {
    match cmd {
        LimitCmd::SampleTau { sigma, count, seed, out, format } => {
            if sigma.is_nan() || sigma <= 0.0 {
                return Err(Failure::Invalid(format!("sigma must be positive, got {sigma}")));
            }
            let taus = run_replicates(count, seed, 0, |_, rng| sample_tau_exact(sigma, rng));
            match format {
                Format::Json => emit_json(out.as_ref(), &json!({ "seed": seed, "sigma": sigma, "tau": taus })),
                Format::Csv => {
                    let mut text = format!("# seed={seed}\nsample,tau\n");
                    for (i, t) in taus.iter().enumerate() {
                        text.push_str(&format!("{i},{t}\n"));
                    }
                    emit(out.as_ref(), &text)
                }
            }
        }
        LimitCmd::Excursions { sigma, top_j, dt, t_cap, count, seed, keep_paths, out, format } => {
            let outcomes = run_replicates(count, seed, 0, |_, rng| simulate_limit(sigma, top_j, dt, rng, t_cap, keep_paths))
                .into_iter()
                .collect::<forestwalk::Result<Vec<_>>>()?;
            match format {
                Format::Json => {
                    let samples: Vec<Value> = outcomes
                        .iter()
                        .map(|o| json!({ "censored": o.is_censored(), "sample": o.sample() }))
                        .collect();
                    emit_json(out.as_ref(), &json!({ "seed": seed, "sigma": sigma, "dt": dt, "samples": samples }))
                }
                Format::Csv => {
                    let mut text = format!("# seed={seed}\nsample,censored,tau");
                    for j in 1..=top_j {
                        text.push_str(&format!(",length_{j}"));
                    }
                    text.push('\n');
                    for (i, o) in outcomes.iter().enumerate() {
                        let s = o.sample();
                        text.push_str(&format!("{i},{},{}", o.is_censored(), s.tau));
                        for j in 0..top_j {
                            match s.lengths.get(j) {
                                Some(l) => text.push_str(&format!(",{l}")),
                                None => text.push(','),
                            }
                        }
                        text.push('\n');
                    }
                    emit(out.as_ref(), &text)
                }
            }
        }
    }
}

fn run_verify(args: VerifyArgs) -> CliResult {
    let cn = args.cn.unwrap_or_else(|| cn_from_exponent(args.n, args.cn_exp));
    let setup = ExperimentSetup::from_law(args.p.clone(), args.n, cn)?;
    let tol = Tolerances::default();
    let report: ExperimentReport = match args.experiment {
        Experiment::Tau => experiment_tau(&setup, args.reps, args.seed, &tol)?,
        Experiment::Sizes => {
            let limit = LimitOptions { reps: args.limit_reps, dt: args.dt, t_cap: args.t_cap };
            experiment_tree_sizes(&setup, args.reps, args.top_j, &limit, args.seed, &tol)?
        }
        Experiment::Walk => experiment_walk(&setup, args.reps, &args.t, args.seed, &tol)?,
        Experiment::Degrees => {
            experiment_degrees(&setup, args.reps, &args.degrees, &args.trees, args.delta, args.seed, &tol)?
        }
        Experiment::Largest => experiment_largest_marked(&setup, args.reps, args.seed, &tol)?,
        Experiment::Concentration => {
            let degree = *args.degrees.first().ok_or(Failure::Invalid("--degrees is empty".into()))?;
            experiment_concentration(&setup.seq, degree, &args.thresholds, args.reps, args.seed)?
        }
    };
    let mut text = report.to_json();
    text.push('\n');
    emit(args.out.as_ref(), &text)?;
    if let Some(path) = &args.csv {
        fs::write(path, report.raw.to_csv())?;
    }
    eprintln!("{} finished in {:.2}s", report.experiment, report.runtime_secs);
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Criterion(format!("failed criteria: {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Degseq(cmd) => run_degseq(cmd),
        Command::Sample(args) => run_sample(args),
        Command::Codec(cmd) => run_codec(cmd),
        Command::Limit(cmd) => run_limit(cmd),
        Command::Verify(args) => run_verify(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Criterion(msg)) => {
            eprintln!("criterion failure: {msg}");
            ExitCode::from(2)
        }
    }
}
