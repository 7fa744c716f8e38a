//! Monte Carlo experiments comparing shuffled-degree forests with their
//! Brownian limits.
//!
//! Every experiment is a pure function of its parameters and seed.
//! Replicate `r` draws from substream `r` of the seed, replicates run on the
//! rayon pool and are collected in replicate order, so thread count changes
//! only wall time.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::degseq::{make_degree_sequence, DegreeSequence, OffspringLaw};
use crate::error::{Error, Result};
use crate::limit::{simulate_limit, tau_cdf};
use crate::rng::{substream, SeededRng};
use crate::sampler::{walk_statistics, ReplicateStats};
use crate::stats::{correlation, ks_one_sample, ks_two_sample, normal_cdf, quantile, variance, wilson_interval};

/// Substream offset for limit-law replicates, keeping them disjoint from
/// the finite-n replicates of the same seed.
const LIMIT_STREAM_OFFSET: u64 = 1 << 40;

/// One pass/fail check inside a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub comparison: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Criterion {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            comparison: "<=",
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            comparison: ">=",
            threshold,
            passed: value >= threshold,
        }
    }
}

/// Raw per-replicate statistics, written as CSV on request.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RawTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Outcome of one experiment. Wall time and the raw table are kept out of
/// the JSON so that reports are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub statistics: BTreeMap<String, Value>,
    pub criteria: Vec<Criterion>,
    /// Set when the regime makes the statistic trivial (e.g. one tree).
    pub degenerate: bool,
    #[serde(skip)]
    pub runtime_secs: f64,
    #[serde(skip)]
    pub raw: RawTable,
}

impl ExperimentReport {
    fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            statistics: BTreeMap::new(),
            criteria: Vec::new(),
            degenerate: false,
            runtime_secs: 0.0,
            raw: RawTable::default(),
        }
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn statistic(&self, name: &str) -> Option<&Value> {
        self.statistics.get(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.to_string(), json!(value));
    }

    fn stat(&mut self, key: &str, value: impl Serialize) {
        self.statistics.insert(key.to_string(), json!(value));
    }
}

/// Degree sequence built from an offspring law at size `n` with `cn` trees.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSetup {
    pub law: Option<OffspringLaw>,
    pub seq: DegreeSequence,
}

impl ExperimentSetup {
    pub fn from_law(law: OffspringLaw, n: usize, cn: usize) -> Result<Self> {
        let seq = make_degree_sequence(&law, n, cn)?;
        Ok(Self { law: Some(law), seq })
    }

    /// `cn = floor(n^exponent)`.
    pub fn from_exponent(law: OffspringLaw, n: usize, exponent: f64) -> Result<Self> {
        Self::from_law(law, n, cn_from_exponent(n, exponent))
    }

    pub fn from_sequence(seq: DegreeSequence) -> Self {
        Self { law: None, seq }
    }

    pub fn n(&self) -> usize {
        self.seq.n()
    }

    pub fn c(&self) -> usize {
        self.seq.c()
    }

    pub fn sigma(&self) -> f64 {
        self.seq.limit_sigma()
    }

    fn describe(&self, report: &mut ExperimentReport, reps: usize, seed: u64) {
        if let Some(law) = &self.law {
            report.param("p", law.to_string());
        }
        report.param("n", self.n());
        report.param("cn", self.c());
        report.param("sigma", self.sigma());
        report.param("reps", reps);
        report.param("seed", seed);
    }
}

pub fn cn_from_exponent(n: usize, exponent: f64) -> usize {
    ((n as f64).powf(exponent).floor() as usize).max(1)
}

/// Runs `f` on replicates `0..reps`, each with its own substream, and
/// returns the results in replicate order.
pub fn run_replicates<T, F>(reps: usize, seed: u64, stream_offset: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SeededRng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| f(r, &mut substream(seed, stream_offset + r as u64)))
        .collect()
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

/// Height of the tree whose lexicographic degrees are `lex`.
fn lex_height(lex: &[usize]) -> usize {
    // Stack of outstanding child counts along the current branch.
    let mut stack: Vec<usize> = Vec::new();
    let mut height = 0;
    for &d in lex {
        height = height.max(stack.len());
        if let Some(top) = stack.last_mut() {
            *top -= 1;
        }
        if d > 0 {
            stack.push(d);
        } else {
            while stack.last() == Some(&0) {
                stack.pop();
            }
        }
    }
    height
}

fn largest_tree_height(st: &ReplicateStats) -> usize {
    let sizes = st.tree_sizes();
    let order = crate::sampler::rank_by_size(&sizes);
    let idx = order[0];
    let mut start = 0;
    for &s in &sizes[..idx] {
        start += s;
    }
    lex_height(&st.degrees()[start..start + sizes[idx]])
}

/// Thresholds for the experiment criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tau_ks: f64,
    pub sizes_ks: f64,
    pub walk_ks: f64,
    pub degrees_q99: f64,
    pub largest_freq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_ks: 0.12,
            sizes_ks: 0.12,
            walk_ks: 0.06,
            degrees_q99: 0.01,
            largest_freq: 0.95,
        }
    }
}

/// Law of `tau_n / cn^2` and `(n - |T_1|) / cn^2` against the first-passage
/// CDF of `sigma B` to `-1`.
pub fn experiment_tau(setup: &ExperimentSetup, reps: usize, seed: u64, tol: &Tolerances) -> Result<ExperimentReport> {
    check_reps(reps)?;
    let start = Instant::now();
    let (n, c) = (setup.n(), setup.c());
    let bound = (n as f64).powf(0.4);
    if c as f64 > bound {
        return Err(Error::Precondition(format!("cn = {c} exceeds n^0.4 = {bound:.2}")));
    }
    let mut report = ExperimentReport::new("tau");
    setup.describe(&mut report, reps, seed);
    let sigma = setup.sigma();
    let scale = (c * c) as f64;

    let rows = run_replicates(reps, seed, 0, |_, rng| {
        let st = walk_statistics(&setup.seq, rng);
        let largest = st.ranked_sizes()[0];
        let height = largest_tree_height(&st);
        (st.tau(), n - largest, st.largest_is_marked(), height)
    });

    let tau: Vec<f64> = rows.iter().map(|r| r.0 as f64 / scale).collect();
    let outside: Vec<f64> = rows.iter().map(|r| r.1 as f64 / scale).collect();
    let identity_violations = rows.iter().filter(|r| r.2 && r.0 != r.1).count();
    report.stat("identity_violations", identity_violations);
    report.raw = RawTable {
        header: ["replicate", "tau_scaled", "outside_largest_scaled", "largest_is_marked", "largest_height"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i as f64, r.0 as f64 / scale, r.1 as f64 / scale, f64::from(u8::from(r.2)), r.3 as f64])
            .collect(),
    };

    if c == 1 {
        report.degenerate = true;
        report.stat("tau_max", tau.iter().copied().fold(0.0, f64::max));
        report.runtime_secs = start.elapsed().as_secs_f64();
        return Ok(report);
    }

    let cdf = |t: f64| if t <= 0.0 { 0.0 } else { tau_cdf(t, sigma).expect("sigma > 0") };
    let ks_outside = ks_one_sample(&outside, cdf)?;
    let ks_tau = ks_one_sample(&tau, cdf)?;
    report.stat("ks_outside_largest", ks_outside);
    report.stat("ks_tau", ks_tau);
    if let Some(law) = &setup.law {
        let (_, falling) = law.moments();
        let nominal = falling.sqrt();
        report.stat("sigma_nominal", nominal);
        let cdf_nominal = |t: f64| if t <= 0.0 { 0.0 } else { tau_cdf(t, nominal).expect("sigma > 0") };
        report.stat("ks_outside_largest_nominal", ks_one_sample(&outside, cdf_nominal)?);
    }
    // Limit mass beyond the largest value the finite model can produce.
    report.stat("limit_mass_beyond_horizon", 1.0 - tau_cdf(n as f64 / scale, sigma)?);
    // Independence diagnostic: largest-tree height against tau.
    let heights: Vec<f64> = rows.iter().map(|r| r.3 as f64).collect();
    report.stat("corr_height_tau", correlation(&heights, &tau));
    report.criteria.push(Criterion::at_most("ks_outside_largest", ks_outside, tol.tau_ks));
    report.criteria.push(Criterion::at_most("identity_violations", identity_violations as f64, 0.0));
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Options for the limit-law side of [`experiment_tree_sizes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub reps: usize,
    pub dt: f64,
    /// Time cap in units of the limit clock; censored paths contribute
    /// their partial (lower-bound) lengths and are counted in the report.
    pub t_cap: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            reps: 3000,
            dt: 1e-4,
            t_cap: 400.0,
        }
    }
}

/// Ranked sizes of the non-largest trees against ranked excursion lengths
/// of the reflected Brownian motion up to its passage time.
pub fn experiment_tree_sizes(
    setup: &ExperimentSetup,
    reps: usize,
    top_j: usize,
    limit: &LimitOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    check_reps(reps)?;
    check_reps(limit.reps)?;
    if top_j == 0 {
        return Err(Error::Precondition("top_j must be at least 1".into()));
    }
    let start = Instant::now();
    let (n, c) = (setup.n(), setup.c());
    let mut report = ExperimentReport::new("sizes");
    setup.describe(&mut report, reps, seed);
    report.param("top_j", top_j);
    report.param("limit_reps", limit.reps);
    report.param("dt", limit.dt);
    report.param("t_cap", limit.t_cap);
    let sigma = setup.sigma();
    let scale = (c * c) as f64;

    let rows = run_replicates(reps, seed, 0, |_, rng| {
        let st = walk_statistics(&setup.seq, rng);
        (st.ranked_sizes(), st.tau(), st.largest_is_marked())
    });
    let monotone = rows.iter().all(|r| r.0.windows(2).all(|w| w[0] >= w[1]));
    // Sum of the small trees is n - |T_1|, which is tau_n on the event that
    // the marked tree is the largest.
    let sum_mismatch = rows
        .iter()
        .filter(|r| r.2 && r.0[1..].iter().sum::<usize>() != r.1)
        .count();
    report.stat("sizes_weakly_decreasing", monotone);
    report.stat("sum_identity_violations", sum_mismatch);
    report.raw = RawTable {
        header: std::iter::once("replicate".to_string())
            .chain((1..=top_j).map(|j| format!("size_{}_scaled", j + 1)))
            .collect(),
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                std::iter::once(i as f64)
                    .chain((1..=top_j).map(|j| r.0.get(j).copied().unwrap_or(0) as f64 / scale))
                    .collect()
            })
            .collect(),
    };
    if c == 1 {
        report.degenerate = true;
        report.runtime_secs = start.elapsed().as_secs_f64();
        return Ok(report);
    }

    let outcomes = run_replicates(limit.reps, seed, LIMIT_STREAM_OFFSET, |_, rng| {
        simulate_limit(sigma, top_j, limit.dt, rng, limit.t_cap, false)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let censored = outcomes.iter().filter(|o| o.is_censored()).count();
    report.stat("limit_censored", censored);

    let mut ks = Vec::with_capacity(top_j);
    for j in 1..=top_j {
        let finite: Vec<f64> = rows.iter().map(|r| r.0.get(j).copied().unwrap_or(0) as f64 / scale).collect();
        let lim: Vec<f64> = outcomes
            .iter()
            .map(|o| o.sample().lengths.get(j - 1).copied().unwrap_or(0.0))
            .collect();
        ks.push(ks_two_sample(&finite, &lim)?);
    }
    let sum_finite: Vec<f64> = rows.iter().map(|r| (n - r.0[0]) as f64 / scale).collect();
    let sum_limit: Vec<f64> = outcomes.iter().map(|o| o.sample().tau).collect();
    report.stat("ks_by_rank", &ks);
    report.stat("ks_sum", ks_two_sample(&sum_finite, &sum_limit)?);
    report.criteria.push(Criterion::at_most("ks_top1", ks[0], tol.sizes_ks));
    report.criteria.push(Criterion::at_most("sum_identity_violations", sum_mismatch as f64, 0.0));
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Marginals of `S_{n, floor(t cn^2)} / cn` against `Normal(0, sigma^2 t)`.
pub fn experiment_walk(
    setup: &ExperimentSetup,
    reps: usize,
    t_points: &[f64],
    seed: u64,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    check_reps(reps)?;
    if t_points.is_empty() || t_points.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Precondition("t_points must be finite and nonnegative".into()));
    }
    let start = Instant::now();
    let (n, c) = (setup.n(), setup.c());
    let mut report = ExperimentReport::new("walk");
    setup.describe(&mut report, reps, seed);
    report.param("t_points", t_points);
    let sigma = setup.sigma();
    let c2 = (c * c) as f64;
    let steps: Vec<usize> = t_points.iter().map(|t| ((t * c2).floor() as usize).min(n)).collect();

    // Prefix sums at the requested steps, read off in increasing order.
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| steps[i]);
    let rows = run_replicates(reps, seed, 0, |_, rng| {
        let st = walk_statistics(&setup.seq, rng);
        let d = st.degrees();
        let mut out = vec![0.0; steps.len()];
        let (mut k, mut acc) = (0usize, 0i64);
        for &i in &order {
            while k < steps[i] {
                acc += d[k] as i64 - 1;
                k += 1;
            }
            out[i] = acc as f64 / c as f64;
        }
        out
    });
    report.raw = RawTable {
        header: std::iter::once("replicate".to_string())
            .chain(t_points.iter().map(|t| format!("S_t{t}")))
            .collect(),
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, r)| std::iter::once(i as f64).chain(r.iter().copied()).collect())
            .collect(),
    };

    let mut ks_all = BTreeMap::new();
    let mut variances = BTreeMap::new();
    for (k, &t) in t_points.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let key = format!("{t}");
        let ks = if t == 0.0 || steps[k] == 0 {
            // S_0 = 0 and the limit is the point mass at 0.
            let max_abs = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            report.stat(&format!("max_abs_t{t}"), max_abs);
            0.0
        } else {
            let sd = sigma * t.sqrt();
            ks_one_sample(&xs, |x| normal_cdf(x / sd))?
        };
        let var = if reps > 1 { variance(&xs) } else { 0.0 };
        ks_all.insert(key.clone(), ks);
        variances.insert(key, var);
        report.criteria.push(Criterion::at_most(&format!("ks_t{t}"), ks, tol.walk_ks));
    }
    report.stat("ks", &ks_all);
    report.stat("variance", &variances);

    let find = |t: f64| t_points.iter().position(|&x| x == t);
    if let (Some(i1), Some(i2)) = (find(1.0), find(2.0)) {
        let (v1, v2) = (variances[&format!("{}", t_points[i1])], variances[&format!("{}", t_points[i2])]);
        if v1 > 0.0 {
            let ratio = v2 / v1;
            report.stat("variance_ratio_2_1", ratio);
            report.criteria.push(Criterion::at_least("variance_ratio_2_1_low", ratio, 1.7));
            report.criteria.push(Criterion::at_most("variance_ratio_2_1_high", ratio, 2.3));
        }
    }

    // Increments over consecutive disjoint windows should be uncorrelated.
    let mut sorted_t: Vec<usize> = order.clone();
    sorted_t.dedup_by_key(|i| steps[*i]);
    if sorted_t.len() >= 2 && reps > 2 {
        let mut worst: f64 = 0.0;
        let mut prev = vec![0.0; reps];
        let mut incs: Vec<Vec<f64>> = Vec::new();
        for &i in &sorted_t {
            let cur: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            incs.push(cur.iter().zip(&prev).map(|(a, b)| a - b).collect());
            prev = cur;
        }
        for w in incs.windows(2) {
            let r = correlation(&w[0], &w[1]);
            worst = worst.max(r.abs());
        }
        let limit = 3.0 / (reps as f64).sqrt();
        report.stat("max_abs_increment_correlation", worst);
        report.criteria.push(Criterion::at_most("increment_correlation", worst, limit));
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Offspring variance `sum i^2 p^i - (sum i p^i)^2` of a degree sequence.
pub fn offspring_variance(s: &DegreeSequence) -> f64 {
    let e = s.empirical();
    e.second_moment - e.mean * e.mean
}

/// Empirical degree distributions of the `l`-th largest trees against the
/// whole forest.
pub fn experiment_degrees(
    setup: &ExperimentSetup,
    reps: usize,
    degrees: &[usize],
    trees: &[usize],
    delta: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    check_reps(reps)?;
    if trees.is_empty() || trees.contains(&0) {
        return Err(Error::Precondition("tree ranks l start at 1".into()));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new("degrees");
    setup.describe(&mut report, reps, seed);
    report.param("degrees", degrees);
    report.param("trees", trees);
    report.param("delta", delta);
    let whole = setup.seq.empirical();
    let whole_var = offspring_variance(&setup.seq);

    // Per replicate, per l: |p^i_{n,l} - p^i_n| for each i, then the
    // variance difference. Missing trees (l > c) count as absent.
    let rows: Vec<Vec<Option<Vec<f64>>>> = run_replicates(reps, seed, 0, |_, rng| {
        let st = walk_statistics(&setup.seq, rng);
        trees
            .iter()
            .map(|&l| {
                st.ranked_tree_degrees(l).map(|t| {
                    let e = t.empirical();
                    degrees
                        .iter()
                        .map(|&i| (e.prob(i) - whole.prob(i)).abs())
                        .chain(std::iter::once((offspring_variance(&t) - whole_var).abs()))
                        .collect()
                })
            })
            .collect()
    });

    let mut summary = BTreeMap::new();
    let mut header = vec!["replicate".to_string()];
    for &l in trees {
        for &i in degrees {
            header.push(format!("dp{i}_l{l}"));
        }
        header.push(format!("dvar_l{l}"));
    }
    for (li, &l) in trees.iter().enumerate() {
        let labels = degrees
            .iter()
            .map(|i| format!("p{i}"))
            .chain(std::iter::once("variance".to_string()));
        for (k, label) in labels.enumerate() {
            let xs: Vec<f64> = rows.iter().filter_map(|r| r[li].as_ref().map(|v| v[k])).collect();
            if xs.is_empty() {
                continue;
            }
            let exceed = xs.iter().filter(|&&x| x > delta).count() as f64 / xs.len() as f64;
            let q99 = quantile(&xs, 0.99)?;
            summary.insert(
                format!("{label}_l{l}"),
                json!({
                    "q50": quantile(&xs, 0.5)?,
                    "q90": quantile(&xs, 0.9)?,
                    "q99": q99,
                    "exceed_delta": exceed,
                    "count": xs.len(),
                }),
            );
            if l == 1 && label == "p0" {
                report.criteria.push(Criterion::at_most("q99_p0_l1", q99, tol.degrees_q99));
            }
        }
    }
    report.stat("differences", &summary);
    report.raw = RawTable {
        header,
        rows: rows
            .iter()
            .enumerate()
            .map(|(r, per_l)| {
                let mut row = vec![r as f64];
                for v in per_l {
                    match v {
                        Some(v) => row.extend(v),
                        None => row.extend(std::iter::repeat_n(f64::NAN, degrees.len() + 1)),
                    }
                }
                row
            })
            .collect(),
    };
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Frequency of the event that the marked tree is the largest one.
pub fn experiment_largest_marked(
    setup: &ExperimentSetup,
    reps: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    check_reps(reps)?;
    let start = Instant::now();
    let mut report = ExperimentReport::new("largest");
    setup.describe(&mut report, reps, seed);
    let flags = run_replicates(reps, seed, 0, |_, rng| walk_statistics(&setup.seq, rng).largest_is_marked());
    let hits = flags.iter().filter(|&&f| f).count();
    let freq = hits as f64 / reps as f64;
    let (lo, hi) = wilson_interval(hits, reps, 1.96);
    report.stat("frequency", freq);
    report.stat("wilson95", [lo, hi]);
    report.degenerate = setup.c() == 1;
    report.raw = RawTable {
        header: vec!["replicate".into(), "largest_is_marked".into()],
        rows: flags.iter().enumerate().map(|(i, &f)| vec![i as f64, f64::from(u8::from(f))]).collect(),
    };
    report.criteria.push(Criterion::at_least("frequency", freq, tol.largest_freq));
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `sup_{x > c} |p^i - Q^i(x)/x|` for one uniformly shuffled degree
/// vector, where `Q^i(x)` counts degree-`i` entries among the first `x`.
/// Only the indicator of degree `i` matters, so the shuffle is drawn
/// sequentially: the next entry has degree `i` with probability
/// (remaining degree-`i` entries) / (remaining entries).
fn concentration_sup<R: rand::Rng + ?Sized>(n: usize, c: usize, k: usize, rng: &mut R) -> (f64, usize) {
    let p = k as f64 / n as f64;
    let (mut left, mut q) = (k, 0usize);
    let mut sup: f64 = 0.0;
    for x in 1..=n {
        if left > 0 && rng.random_range(0..(n - x + 1)) < left {
            left -= 1;
            q += 1;
        }
        if x > c {
            sup = sup.max((p - q as f64 / x as f64).abs());
        }
    }
    (sup, q)
}

/// Exceedance frequencies of the prefix-frequency deviation against the
/// bound `exp(-3 t^2 c / 5)`.
pub fn experiment_concentration(
    seq: &DegreeSequence,
    degree: usize,
    thresholds: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_reps(reps)?;
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::Precondition("thresholds must lie in (0, 1)".into()));
    }
    let start = Instant::now();
    let (n, c, k) = (seq.n(), seq.c(), seq.count(degree));
    let mut report = ExperimentReport::new("concentration");
    report.param("n", n);
    report.param("cn", c);
    report.param("degree", degree);
    report.param("thresholds", thresholds);
    report.param("reps", reps);
    report.param("seed", seed);
    let rows = run_replicates(reps, seed, 0, |_, rng| concentration_sup(n, c, k, rng));
    let endpoint_mismatch = rows.iter().filter(|r| r.1 != k).count();
    report.stat("endpoint_mismatch", endpoint_mismatch);
    let mut per_t = BTreeMap::new();
    for &t in thresholds {
        let exceed = rows.iter().filter(|r| r.0 >= t).count() as f64 / reps as f64;
        let bound = (-3.0 * t * t * c as f64 / 5.0).exp();
        let slack = 3.0 * (bound / reps as f64).sqrt();
        per_t.insert(format!("{t}"), json!({"exceedance": exceed, "bound": bound, "slack": slack}));
        report.criteria.push(Criterion::at_most(&format!("exceedance_t{t}"), exceed, bound + slack));
    }
    report.stat("by_threshold", &per_t);
    report.stat("sup_max", rows.iter().map(|r| r.0).fold(0.0, f64::max));
    report.criteria.push(Criterion::at_most("endpoint_mismatch", endpoint_mismatch as f64, 0.0));
    report.raw = RawTable {
        header: vec!["replicate".into(), "sup_deviation".into()],
        rows: rows.iter().enumerate().map(|(i, r)| vec![i as f64, r.0]).collect(),
    };
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(n: usize, c: usize) -> ExperimentSetup {
        ExperimentSetup::from_law(OffspringLaw::Geometric(0.5), n, c).unwrap()
    }

    #[test]
    fn lex_height_examples() {
        assert_eq!(lex_height(&[0]), 0);
        assert_eq!(lex_height(&[2, 0, 0]), 1);
        assert_eq!(lex_height(&[1, 1, 1, 0]), 3);
        assert_eq!(lex_height(&[2, 1, 0, 1, 1, 0]), 3);
        assert_eq!(lex_height(&[2, 0, 1, 0]), 2);
    }

    #[test]
    fn single_tree_is_degenerate() {
        let s = geometric(2000, 1);
        let r = experiment_tau(&s, 20, 1, &Tolerances::default()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.statistic("tau_max"), Some(&json!(0.0)));
        let r = experiment_largest_marked(&s, 20, 1, &Tolerances::default()).unwrap();
        assert_eq!(r.statistic("frequency"), Some(&json!(1.0)));
    }

    #[test]
    fn tau_precondition() {
        let s = geometric(1000, 100);
        assert!(matches!(experiment_tau(&s, 10, 1, &Tolerances::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn walk_at_zero_is_zero() {
        let s = geometric(5000, 19);
        let r = experiment_walk(&s, 50, &[0.0, 1.0], 3, &Tolerances::default()).unwrap();
        assert_eq!(r.statistic("max_abs_t0"), Some(&json!(0.0)));
        assert_eq!(r.criterion("ks_t0").unwrap().value, 0.0);
    }

    #[test]
    fn concentrated_sequence_has_zero_differences() {
        // One tree made of a path: every tree's law equals the forest's.
        let s = ExperimentSetup::from_sequence(DegreeSequence::from_pairs([(0, 1), (1, 9)]).unwrap());
        let r = experiment_degrees(&s, 10, &[0, 1], &[1], 0.0, 5, &Tolerances::default()).unwrap();
        let q = &r.statistic("differences").unwrap()["p0_l1"];
        assert_eq!(q["q99"], json!(0.0));
        // Only leaves: every tree is a single node.
        let s = ExperimentSetup::from_sequence(DegreeSequence::from_pairs([(0, 30)]).unwrap());
        let r = experiment_degrees(&s, 10, &[0], &[1, 2], 0.0, 5, &Tolerances::default()).unwrap();
        for key in ["p0_l1", "p0_l2", "variance_l1", "variance_l2"] {
            assert_eq!(r.statistic("differences").unwrap()[key]["q99"], json!(0.0), "{key}");
        }
    }

    #[test]
    fn concentration_checks() {
        let s = geometric(2000, 14).seq;
        assert!(experiment_concentration(&s, 0, &[1.0], 10, 1).is_err());
        assert!(experiment_concentration(&s, 0, &[0.0], 10, 1).is_err());
        let r = experiment_concentration(&s, 0, &[0.5], 200, 1).unwrap();
        assert_eq!(r.statistic("endpoint_mismatch"), Some(&json!(0)));
    }

    #[test]
    fn sizes_report_shape() {
        let s = geometric(5000, 19);
        let limit = LimitOptions { reps: 50, dt: 1e-3, t_cap: 50.0 };
        let r = experiment_tree_sizes(&s, 40, 3, &limit, 9, &Tolerances::default()).unwrap();
        assert_eq!(r.statistic("sizes_weakly_decreasing"), Some(&json!(true)));
        assert_eq!(r.statistic("sum_identity_violations"), Some(&json!(0)));
        assert_eq!(r.statistic("ks_by_rank").unwrap().as_array().unwrap().len(), 3);
        assert!(experiment_tree_sizes(&s, 40, 0, &limit, 9, &Tolerances::default()).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let s = geometric(3000, 16);
        let tol = Tolerances::default();
        let a = experiment_tau(&s, 30, 42, &tol).unwrap().to_json();
        let b = experiment_tau(&s, 30, 42, &tol).unwrap().to_json();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| experiment_tau(&s, 30, 42, &tol).unwrap().to_json());
        assert_eq!(a, c);
        assert_ne!(a, experiment_tau(&s, 30, 43, &tol).unwrap().to_json());
    }
}
