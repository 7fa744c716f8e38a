//! Degree sequences of plane forests and the moment quantities derived from
//! them.
//!
//! A degree sequence `s` records, for each `i`, the number `s^i` of nodes with
//! exactly `i` children. Any forest with degree sequence `s` has
//! `n = sum s^i` nodes and `c(s) = sum (1 - i) s^i` trees.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of nodes by number of children, with the derived node and tree
/// counts.
///
/// Counts are stored sparsely; zero entries are never kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeSequence {
    counts: BTreeMap<usize, usize>,
    n: usize,
    c: usize,
}

impl DegreeSequence {
    /// Validates a degree histogram.
    pub fn validate(counts: BTreeMap<usize, usize>) -> Result<Self> {
        let counts: BTreeMap<usize, usize> = counts.into_iter().filter(|&(_, k)| k > 0).collect();
        let n: usize = counts.values().sum();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let c: i64 = counts
            .iter()
            .map(|(&i, &k)| (1 - i as i64) * k as i64)
            .sum();
        if c <= 0 {
            return Err(Error::NotAForest { c });
        }
        Ok(Self {
            counts,
            n,
            c: c as usize,
        })
    }

    /// Builds the histogram of a list of node degrees and validates it.
    pub fn from_degrees<I: IntoIterator<Item = usize>>(degrees: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for d in degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        Self::validate(counts)
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (d, k) in pairs {
            *counts.entry(d).or_insert(0) += k;
        }
        Self::validate(counts)
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    /// `s^i`, zero when degree `i` is absent.
    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    /// Total number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of trees `c(s)` in any forest with this degree sequence.
    pub fn c(&self) -> usize {
        self.c
    }

    pub fn max_degree(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// The weakly increasing vector `d(s)` holding `s^i` copies of `i`.
    pub fn degree_vector(&self) -> DegreeVector {
        let mut entries = Vec::with_capacity(self.n);
        for (&i, &k) in &self.counts {
            entries.extend(std::iter::repeat_n(i, k));
        }
        DegreeVector(entries)
    }

    /// Empirical offspring distribution `p_n = s / n` and its moments.
    pub fn empirical(&self) -> EmpiricalDist {
        let n = self.n as f64;
        let probs: BTreeMap<usize, f64> = self
            .counts
            .iter()
            .map(|(&i, &k)| (i, k as f64 / n))
            .collect();
        // Sums are accumulated in integers so that the factorial-moment
        // identity holds exactly up to the final division.
        let (mut first, mut second, mut falling) = (0u128, 0u128, 0u128);
        for (&i, &k) in &self.counts {
            let (i, k) = (i as u128, k as u128);
            first += i * k;
            second += i * i * k;
            falling += i * i.saturating_sub(1) * k;
        }
        EmpiricalDist {
            probs,
            mean: first as f64 / n,
            second_moment: second as f64 / n,
            factorial_moment: falling as f64 / n,
        }
    }

    /// Moments of the degree-minus-one increments split at threshold `t`.
    ///
    /// `mu_plus` and `sigma_plus_sq` sum over degrees `j >= t + 1`;
    /// `sigma_minus_sq` is the centred second moment of the increments with
    /// degree `j <= t`, centred at `-mu_plus - c/n`.
    pub fn truncated_moments(&self, t: usize) -> Result<TruncatedMoments> {
        if t == 0 {
            return Err(Error::Precondition("threshold t must be >= 1".into()));
        }
        let n = self.n as f64;
        let (mut mu_plus, mut sigma_plus_sq, mut low_second) = (0.0, 0.0, 0.0);
        for (&j, &k) in &self.counts {
            let (jf, kf) = (j as f64, k as f64);
            if j > t {
                mu_plus += (jf - 1.0) * kf / n;
                sigma_plus_sq += jf * (jf - 1.0) * kf / n;
            } else {
                low_second += (jf - 1.0) * (jf - 1.0) * kf / n;
            }
        }
        let centre = -mu_plus - self.c as f64 / n;
        Ok(TruncatedMoments {
            mu_plus,
            sigma_plus_sq,
            sigma_minus_sq: low_second - centre * centre,
        })
    }

    /// `sqrt(sum j (j - 1) s^j / n)`, the Brownian scale used in every
    /// limit-law comparison.
    pub fn limit_sigma(&self) -> f64 {
        self.empirical().factorial_moment.sqrt()
    }
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, (i, k)) in self.counts.iter().enumerate() {
            if idx > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {k}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Deserialize)]
struct DegreeSequenceRepr {
    counts: BTreeMap<String, usize>,
}

struct NumericKeys<'a>(&'a BTreeMap<usize, usize>);

impl Serialize for NumericKeys<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (i, k) in self.0 {
            map.serialize_entry(&i.to_string(), k)?;
        }
        map.end()
    }
}

impl Serialize for DegreeSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("DegreeSequence", 1)?;
        st.serialize_field("counts", &NumericKeys(&self.counts))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DegreeSequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DegreeSequenceRepr::deserialize(deserializer)?;
        let mut counts = BTreeMap::new();
        for (key, k) in repr.counts {
            let i: usize = key
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("degree key {key:?} is not a nonnegative integer")))?;
            *counts.entry(i).or_insert(0) += k;
        }
        DegreeSequence::validate(counts).map_err(serde::de::Error::custom)
    }
}

/// Weakly increasing degree vector `d(s)`; permutations of it are plain
/// `Vec<usize>`s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Empirical offspring law and its moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDist {
    pub probs: BTreeMap<usize, f64>,
    pub mean: f64,
    /// `sum i^2 p^i`.
    pub second_moment: f64,
    /// `sum i (i - 1) p^i`.
    pub factorial_moment: f64,
}

impl EmpiricalDist {
    pub fn prob(&self, degree: usize) -> f64 {
        self.probs.get(&degree).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedMoments {
    pub mu_plus: f64,
    pub sigma_plus_sq: f64,
    pub sigma_minus_sq: f64,
}

/// Offspring law used to generate test degree sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum OffspringLaw {
    /// `p^i = (1 - q)^i q`; mean one only for `q = 1/2`.
    Geometric(f64),
    /// `p^i = e^{-lambda} lambda^i / i!`.
    Poisson(f64),
    /// Explicit weights `p^0, p^1, ...`.
    Explicit(Vec<f64>),
}

impl OffspringLaw {
    /// Probability of degree `i`.
    pub fn prob(&self, i: usize) -> f64 {
        match *self {
            OffspringLaw::Geometric(q) => q * (1.0 - q).powi(i as i32),
            OffspringLaw::Poisson(lambda) => {
                let mut p = (-lambda).exp();
                for k in 1..=i {
                    p *= lambda / k as f64;
                }
                p
            }
            OffspringLaw::Explicit(ref w) => w.get(i).copied().unwrap_or(0.0),
        }
    }

    /// Mean and factorial second moment, evaluated by summing the series
    /// until the tail is negligible.
    pub fn moments(&self) -> (f64, f64) {
        let (mut mean, mut falling, mut mass) = (0.0, 0.0, 0.0);
        let mut i = 0usize;
        loop {
            let p = self.prob(i);
            mean += i as f64 * p;
            falling += (i * i.saturating_sub(1)) as f64 * p;
            mass += p;
            i += 1;
            let exhausted = match self {
                OffspringLaw::Explicit(w) => i >= w.len(),
                _ => 1.0 - mass < 1e-16 && i > 8,
            };
            if exhausted || i > 10_000 {
                break;
            }
        }
        (mean, falling)
    }

    fn check(&self) -> Result<()> {
        let bad = match *self {
            OffspringLaw::Geometric(q) => !(q > 0.0 && q <= 1.0),
            OffspringLaw::Poisson(l) => !(l >= 0.0 && l.is_finite()),
            OffspringLaw::Explicit(ref w) => w.is_empty() || w.iter().any(|&p| !(p >= 0.0) || !p.is_finite()),
        };
        if bad {
            return Err(Error::Precondition(format!("invalid offspring law {self}")));
        }
        if let OffspringLaw::Explicit(w) = self {
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition(format!("weights sum to {total}, not 1")));
            }
        }
        let (mean, _) = self.moments();
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("offspring law {self} has mean {mean}, not 1")));
        }
        Ok(())
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffspringLaw::Geometric(q) => write!(f, "geometric:{q}"),
            OffspringLaw::Poisson(l) => write!(f, "poisson:{l}"),
            OffspringLaw::Explicit(w) => {
                write!(f, "explicit:")?;
                for (idx, p) in w.iter().enumerate() {
                    if idx > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for OffspringLaw {
    type Err = Error;

    /// Parses `geometric:Q`, `poisson:L` or `explicit:P0,P1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Precondition(format!("offspring law {s:?} must look like kind:params")))?;
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Precondition(format!("bad number {x:?} in offspring law")))
        };
        match kind {
            "geometric" => Ok(OffspringLaw::Geometric(num(arg)?)),
            "poisson" => Ok(OffspringLaw::Poisson(num(arg)?)),
            "explicit" => Ok(OffspringLaw::Explicit(arg.split(',').map(num).collect::<Result<_>>()?)),
            _ => Err(Error::Precondition(format!("unknown offspring law {kind:?}"))),
        }
    }
}

/// Builds a degree sequence with `n` nodes and exactly `c_target` trees whose
/// empirical law approximates `law`.
///
/// Rule: round `n p^i` for every `i` with `n p^i >= 1/2`; absorb the total
/// rounding error in `s^1` (or `s^0` when `s^1` is too small); then move
/// single nodes between adjacent degrees until `c(s) = c_target`. Raising
/// `c` turns a degree-1 node into a leaf, or failing that lowers the smallest
/// positive degree `i >= 2` by one; lowering `c` turns a leaf into a
/// degree-1 node. Each move shifts `c` by exactly one.
pub fn make_degree_sequence(law: &OffspringLaw, n: usize, c_target: usize) -> Result<DegreeSequence> {
    law.check()?;
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if c_target == 0 || c_target > n {
        return Err(Error::Infeasible(format!("need 1 <= c <= n, got c = {c_target}, n = {n}")));
    }
    if c_target == n && law.prob(0) < 1.0 {
        return Err(Error::Infeasible("c = n forces every degree to be 0".into()));
    }

    let mut counts: Vec<i64> = Vec::new();
    let nf = n as f64;
    let mut i = 0usize;
    loop {
        let expected = nf * law.prob(i);
        if expected >= 0.5 {
            counts.resize(i + 1, 0);
            counts[i] = expected.round() as i64;
        }
        i += 1;
        let past_support = match law {
            OffspringLaw::Explicit(w) => i >= w.len(),
            // Geometric and Poisson weights are unimodal.
            _ => expected < 0.5 && law.prob(i) <= law.prob(i - 1),
        };
        if past_support || i > n {
            break;
        }
    }
    if counts.len() < 2 {
        counts.resize(2, 0);
    }

    let total: i64 = counts.iter().sum();
    let diff = n as i64 - total;
    if counts[1] + diff >= 0 {
        counts[1] += diff;
    } else if counts[0] + diff >= 0 {
        counts[0] += diff;
    } else {
        return Err(Error::Infeasible("cannot absorb rounding error in s^0 or s^1".into()));
    }

    let tree_count = |counts: &[i64]| -> i64 {
        counts
            .iter()
            .enumerate()
            .map(|(i, &k)| (1 - i as i64) * k)
            .sum()
    };
    let target = c_target as i64;
    let mut swaps = 0usize;
    loop {
        let c = tree_count(&counts);
        if c == target {
            break;
        }
        if swaps >= n {
            return Err(Error::Infeasible(format!("no fix-up to c = {c_target} within {n} moves")));
        }
        if c < target {
            // i -> i - 1 raises c by one.
            let from = if counts[1] > 0 {
                Some(1)
            } else {
                (2..counts.len()).find(|&i| counts[i] > 0)
            };
            let Some(from) = from else {
                return Err(Error::Infeasible("no node left to lower".into()));
            };
            counts[from] -= 1;
            counts[from - 1] += 1;
        } else {
            if counts[0] == 0 {
                return Err(Error::Infeasible("no leaf left to raise".into()));
            }
            counts[0] -= 1;
            counts[1] += 1;
        }
        swaps += 1;
    }

    DegreeSequence::validate(
        counts
            .into_iter()
            .enumerate()
            .map(|(i, k)| (i, k as usize))
            .collect(),
    )
}
