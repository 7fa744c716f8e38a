//! Brownian limit objects: paths run until the first passage below `-x`,
//! reflection at the running minimum, ranked excursion intervals of the
//! reflected path, and the exact law of the first-passage time.
//!
//! Paths are Gaussian random walks on a grid of step `dt`. A grid point
//! belongs to the zero set of the reflected path exactly when the walk
//! attains a new running minimum there; the first-passage time is linearly
//! interpolated inside the crossing step.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::normal_cdf;

/// Grid samples `B(0), B(dt), ...` of a Brownian motion with diffusion
/// coefficient `sigma_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub dt: f64,
    pub sigma_scale: f64,
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::DomainError(format!("dt must be positive, got {dt}")));
        }
        if values.first() != Some(&0.0) {
            return Err(Error::DomainError("a Brownian path starts at 0".into()));
        }
        Ok(Self {
            dt,
            sigma_scale: 1.0,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Time of the last grid point.
    pub fn horizon(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    /// `R(t) = B(t) - min_{s <= t} B(s)`.
    pub fn reflect_at_min(&self) -> BrownianPath {
        let mut running = f64::INFINITY;
        let values = self
            .values
            .iter()
            .map(|&b| {
                running = running.min(b);
                b - running
            })
            .collect();
        BrownianPath {
            dt: self.dt,
            sigma_scale: self.sigma_scale,
            values,
        }
    }
}

pub fn reflect_at_min(path: &BrownianPath) -> BrownianPath {
    path.reflect_at_min()
}

/// A maximal interval `(g, d)` on which the reflected path is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcursionInterval {
    pub start: f64,
    pub end: f64,
}

impl ExcursionInterval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Sorts by decreasing length; equal lengths keep the earlier start first.
fn rank(intervals: &mut [ExcursionInterval]) {
    intervals.sort_by(|a, b| b.length().total_cmp(&a.length()).then(a.start.total_cmp(&b.start)));
}

/// Linear interpolation of the crossing of `-x` in the step `prev -> next`.
fn crossing_time(t_prev: f64, dt: f64, prev: f64, next: f64, x: f64) -> f64 {
    if prev <= -x {
        return t_prev;
    }
    t_prev + dt * (prev + x) / (prev - next)
}

/// A path stopped at its first grid point at or below `-x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HitResult {
    pub path: BrownianPath,
    pub tau: f64,
}

/// Simulates a standard Brownian motion on a grid of step `dt` until it
/// first reaches `-x`. Fails with `TimeCapExceeded` if the path survives
/// past `t_cap`; the first-passage time has infinite mean, so callers must
/// treat a cap hit as censoring.
pub fn simulate_to_hit<R: Rng + ?Sized>(x: f64, dt: f64, rng: &mut R, t_cap: f64) -> Result<HitResult> {
    check_level(x, dt)?;
    let sd = dt.sqrt();
    let max_steps = (t_cap / dt).ceil() as usize;
    let mut values = vec![0.0];
    let mut b = 0.0;
    for i in 1..=max_steps {
        let z: f64 = rng.sample(StandardNormal);
        let next = b + sd * z;
        values.push(next);
        if next <= -x {
            let tau = crossing_time((i - 1) as f64 * dt, dt, b, next, x);
            return Ok(HitResult {
                path: BrownianPath::new(dt, values)?,
                tau,
            });
        }
        b = next;
    }
    Err(Error::TimeCapExceeded { t_cap, level: x })
}

fn check_level(x: f64, dt: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("level must be positive, got {x}")));
    }
    if !(dt > 0.0) {
        return Err(Error::DomainError(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Excursion intervals of the reflected path before the first passage
/// below `-x`, longest first. The final excursion is cut at the
/// interpolated passage time.
pub fn ranked_excursions(path: &BrownianPath, x: f64) -> Result<Vec<ExcursionInterval>> {
    let values = path.values();
    let hit = values
        .iter()
        .position(|&b| b <= -x)
        .ok_or_else(|| Error::Precondition(format!("path never reaches -{x}")))?;
    let dt = path.dt;
    let tau = if hit == 0 {
        0.0
    } else {
        crossing_time((hit - 1) as f64 * dt, dt, values[hit - 1], values[hit], x)
    };
    let mut out = Vec::new();
    let mut running = values[0];
    let mut last_zero = 0usize;
    for (i, &b) in values.iter().enumerate().take(hit + 1).skip(1) {
        if b <= running {
            if i > last_zero + 1 {
                out.push(ExcursionInterval {
                    start: last_zero as f64 * dt,
                    end: (i as f64 * dt).min(tau),
                });
            }
            running = b;
            last_zero = i;
        }
    }
    rank(&mut out);
    Ok(out)
}

/// `P(tau(1/sigma) <= t) = 2 (1 - Phi(1 / (sigma sqrt t)))`.
pub fn tau_cdf(t: f64, sigma: f64) -> Result<f64> {
    check_tau_args(t, sigma)?;
    Ok(2.0 * (1.0 - normal_cdf(1.0 / (sigma * t.sqrt()))))
}

/// Density `1 / (sigma sqrt(2 pi t^3)) exp(-1 / (2 t sigma^2))` of the
/// first-passage time of a standard Brownian motion below `-1/sigma`.
pub fn tau_density(t: f64, sigma: f64) -> Result<f64> {
    check_tau_args(t, sigma)?;
    let norm = sigma * (2.0 * std::f64::consts::PI * t * t * t).sqrt();
    Ok((-1.0 / (2.0 * t * sigma * sigma)).exp() / norm)
}

fn check_tau_args(t: f64, sigma: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("time must be positive, got {t}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::DomainError(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Exact draw of `tau(1/sigma)` as `(1/sigma)^2 / Z^2`.
pub fn sample_tau_exact<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    1.0 / (sigma * sigma * z * z)
}

/// One replicate of the limit objects for the small trees: the passage
/// time `tau(1/sigma)`, the ranked excursion lengths of the reflected path
/// before it, and optionally the reflected excursion sub-paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSample {
    pub tau: f64,
    /// Top ranked excursion lengths, decreasing.
    pub lengths: Vec<f64>,
    pub intervals: Vec<ExcursionInterval>,
    /// Reflected excursion `R(g_i + t)`, `0 <= t <= d_i - g_i`, on the grid,
    /// for each kept interval.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<Vec<f64>>,
}

/// Result of a capped limit simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitOutcome {
    Hit(LimitSample),
    /// The cap was reached first. `tau` is the cap and the lengths include
    /// the excursion still open at the cap, so each is a lower bound.
    Censored(LimitSample),
}

impl LimitOutcome {
    pub fn sample(&self) -> &LimitSample {
        match self {
            LimitOutcome::Hit(s) | LimitOutcome::Censored(s) => s,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, LimitOutcome::Censored(_))
    }
}

/// Streaming tracker of the `top_j` longest excursions above the running
/// minimum, so long paths never need to be stored.
struct ExcursionTracker {
    dt: f64,
    top_j: usize,
    keep_paths: bool,
    running: f64,
    last_zero: usize,
    start_value: f64,
    current: Vec<f64>,
    kept: Vec<(ExcursionInterval, Vec<f64>)>,
}

impl ExcursionTracker {
    fn new(dt: f64, top_j: usize, keep_paths: bool) -> Self {
        Self {
            dt,
            top_j,
            keep_paths,
            running: 0.0,
            last_zero: 0,
            start_value: 0.0,
            current: vec![0.0],
            kept: Vec::new(),
        }
    }

    fn admits(&self, len: f64) -> bool {
        self.kept.len() < self.top_j || self.kept.last().is_some_and(|(iv, _)| len > iv.length())
    }

    fn close(&mut self, end_idx: usize, end_time: f64) {
        if end_idx <= self.last_zero + 1 {
            return;
        }
        let iv = ExcursionInterval {
            start: self.last_zero as f64 * self.dt,
            end: end_time,
        };
        if self.top_j == 0 || !self.admits(iv.length()) {
            return;
        }
        let path = if self.keep_paths {
            let mut p = std::mem::take(&mut self.current);
            p.push(0.0);
            p
        } else {
            Vec::new()
        };
        self.kept.push((iv, path));
        self.kept
            .sort_by(|a, b| b.0.length().total_cmp(&a.0.length()).then(a.0.start.total_cmp(&b.0.start)));
        self.kept.truncate(self.top_j);
    }

    /// Feeds grid point `i` with value `b`; returns whether it is a new
    /// running minimum.
    fn push(&mut self, i: usize, b: f64) -> bool {
        if b <= self.running {
            self.close(i, i as f64 * self.dt);
            self.running = b;
            self.last_zero = i;
            self.start_value = b;
            if self.keep_paths {
                self.current.clear();
                self.current.push(0.0);
            }
            true
        } else {
            if self.keep_paths {
                self.current.push(b - self.start_value);
            }
            false
        }
    }

    fn finish(mut self, tau: f64, end_idx: usize, censored: bool) -> LimitSample {
        if censored {
            self.close(end_idx + 1, tau);
        }
        let (intervals, paths): (Vec<_>, Vec<_>) = self.kept.into_iter().unzip();
        LimitSample {
            tau,
            lengths: intervals.iter().map(ExcursionInterval::length).collect(),
            intervals,
            paths: if self.keep_paths { paths } else { Vec::new() },
        }
    }
}

/// Runs a standard Brownian motion to level `-1/sigma` (equivalently
/// `sigma B` to `-1`), tracking the `top_j` longest excursions.
pub fn simulate_limit<R: Rng + ?Sized>(
    sigma: f64,
    top_j: usize,
    dt: f64,
    rng: &mut R,
    t_cap: f64,
    keep_paths: bool,
) -> Result<LimitOutcome> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError(format!("sigma must be positive, got {sigma}")));
    }
    let x = 1.0 / sigma;
    check_level(x, dt)?;
    let sd = dt.sqrt();
    let max_steps = (t_cap / dt).ceil() as usize;
    let mut tracker = ExcursionTracker::new(dt, top_j, keep_paths);
    let mut b = 0.0;
    for i in 1..=max_steps {
        let z: f64 = rng.sample(StandardNormal);
        let next = b + sd * z;
        if next <= -x {
            let tau = crossing_time((i - 1) as f64 * dt, dt, b, next, x);
            // The final excursion (if any) ends at the passage time.
            if i > tracker.last_zero + 1 {
                tracker.close(i, tau);
            }
            return Ok(LimitOutcome::Hit(tracker.finish(tau, i, false)));
        }
        tracker.push(i, next);
        b = next;
    }
    Ok(LimitOutcome::Censored(tracker.finish(max_steps as f64 * dt, max_steps, true)))
}

/// Like [`simulate_limit`] without sub-paths, but a cap hit is an error.
pub fn sample_limit_vector<R: Rng + ?Sized>(
    sigma: f64,
    top_j: usize,
    dt: f64,
    rng: &mut R,
    t_cap: f64,
) -> Result<LimitSample> {
    match simulate_limit(sigma, top_j, dt, rng, t_cap, false)? {
        LimitOutcome::Hit(s) => Ok(s),
        LimitOutcome::Censored(_) => Err(Error::TimeCapExceeded { t_cap, level: 1.0 / sigma }),
    }
}

/// Top excursion lengths of one path observed on two grids, `dt` and
/// `2 dt`, where the coarse path is every other point of the fine one.
/// Returns `(fine, coarse)` top-1 lengths, each censored at `t_cap`.
pub fn coupled_top_lengths<R: Rng + ?Sized>(sigma: f64, dt: f64, rng: &mut R, t_cap: f64) -> Result<(f64, f64)> {
    let x = 1.0 / sigma;
    check_level(x, dt)?;
    let sd = dt.sqrt();
    let max_steps = 2 * (t_cap / (2.0 * dt)).ceil() as usize;
    let mut fine = ExcursionTracker::new(dt, 1, false);
    let mut coarse = ExcursionTracker::new(2.0 * dt, 1, false);
    let (mut b, mut coarse_prev) = (0.0, 0.0);
    let mut fine_done: Option<f64> = None;
    for i in 1..=max_steps {
        let z: f64 = rng.sample(StandardNormal);
        let next = b + sd * z;
        if fine_done.is_none() {
            if next <= -x {
                let tau = crossing_time((i - 1) as f64 * dt, dt, b, next, x);
                if i > fine.last_zero + 1 {
                    fine.close(i, tau);
                }
                fine_done = Some(top_length(&fine));
            } else {
                fine.push(i, next);
            }
        }
        if i % 2 == 0 {
            let j = i / 2;
            if next <= -x {
                let tau = crossing_time((j - 1) as f64 * 2.0 * dt, 2.0 * dt, coarse_prev, next, x);
                if j > coarse.last_zero + 1 {
                    coarse.close(j, tau);
                }
                let fine_top = fine_done.expect("the fine path hits no later than the coarse one");
                return Ok((fine_top, top_length(&coarse)));
            }
            coarse.push(j, next);
            coarse_prev = next;
        }
        b = next;
    }
    let t_end = max_steps as f64 * dt;
    let fine_top = match fine_done {
        Some(v) => v,
        None => fine.finish(t_end, max_steps, true).lengths.first().copied().unwrap_or(0.0),
    };
    let coarse_top = coarse
        .finish(t_end, max_steps / 2, true)
        .lengths
        .first()
        .copied()
        .unwrap_or(0.0);
    Ok((fine_top, coarse_top))
}

fn top_length(t: &ExcursionTracker) -> f64 {
    t.kept.first().map(|(iv, _)| iv.length()).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn path(values: &[f64]) -> BrownianPath {
        BrownianPath::new(1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(path(&[0.0, -1.0, -2.0, -3.0]).reflect_at_min().values(), &[0.0; 4]);
        assert_eq!(path(&[0.0, 1.0, 2.0]).reflect_at_min().values(), &[0.0, 1.0, 2.0]);
        assert_eq!(path(&[0.0, 1.0, -1.0, 0.0]).reflect_at_min().values(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn excursion_examples() {
        let stairs = path(&[0.0, -0.5, -1.0, -1.5]);
        assert!(ranked_excursions(&stairs, 1.5).unwrap().is_empty());

        let hump = path(&[0.0, 1.0, 2.0, 1.0, -0.5, -1.0]);
        let ex = ranked_excursions(&hump, 1.0).unwrap();
        assert_eq!(ex, vec![ExcursionInterval { start: 0.0, end: 4.0 }]);

        let two = path(&[0.0, 1.0, -0.2, 0.5, 0.7, -1.2]);
        let ex = ranked_excursions(&two, 1.0).unwrap();
        // Last excursion is cut at the interpolated passage time 4 + 1.7/1.9.
        let tau = 4.0 + 1.7 / 1.9;
        assert_eq!(ex.len(), 2);
        assert!((ex[0].end - tau).abs() < 1e-12 && ex[0].start == 2.0);
        assert_eq!(ex[1], ExcursionInterval { start: 0.0, end: 2.0 });

        assert!(ranked_excursions(&path(&[0.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn equal_lengths_rank_by_start() {
        let p = path(&[0.0, 1.0, -0.1, 1.0, -0.2, -2.0]);
        let ex = ranked_excursions(&p, 1.0).unwrap();
        assert_eq!(ex[0].start, 0.0);
        assert_eq!(ex[1].start, 2.0);
    }

    #[test]
    fn simulated_hit_is_first_crossing() {
        let mut rng = seeded(1);
        for _ in 0..20 {
            let hit = simulate_to_hit(1.0, 1e-3, &mut rng, 1e4).unwrap();
            let v = hit.path.values();
            assert!(v[v.len() - 1] <= -1.0);
            assert!(v[..v.len() - 1].iter().all(|&b| b > -1.0));
            assert!(hit.tau <= hit.path.horizon() && hit.tau > hit.path.horizon() - 1e-3);
        }
        assert!(matches!(
            simulate_to_hit(100.0, 1e-2, &mut rng, 1.0),
            Err(Error::TimeCapExceeded { .. })
        ));
    }

    #[test]
    fn excursion_partition_identity() {
        let mut rng = seeded(2);
        let dt = 1e-3;
        for _ in 0..50 {
            let hit = simulate_to_hit(0.5, dt, &mut rng, 1e4).unwrap();
            let ex = ranked_excursions(&hit.path, 0.5).unwrap();
            let zeros = reflect_at_min(&hit.path);
            let r = zeros.values();
            // Steps between consecutive zero-set points carry no excursion.
            let last = r.len() - 1;
            let mut zero_steps = 0.0;
            let mut running = 0.0f64;
            let mut prev_zero = true;
            for (i, &b) in hit.path.values().iter().enumerate().skip(1) {
                let is_zero = b <= running;
                if is_zero {
                    running = b;
                    if prev_zero {
                        zero_steps += if i == last { hit.tau - (i - 1) as f64 * dt } else { dt };
                    }
                }
                prev_zero = is_zero;
            }
            let total: f64 = ex.iter().map(ExcursionInterval::length).sum::<f64>() + zero_steps;
            assert!((total - hit.tau).abs() < 1e-9, "{total} vs {}", hit.tau);
            assert!(r.iter().all(|&v| v >= 0.0));
            for w in ex.windows(2) {
                assert!(w[0].length() >= w[1].length());
            }
            for iv in &ex {
                assert!(iv.start >= 0.0 && iv.end <= hit.tau + 1e-12 && iv.start < iv.end);
            }
        }
    }

    #[test]
    fn streaming_tracker_matches_stored_path() {
        let dt = 1e-3;
        for seed in 0..30 {
            let Ok(hit) = simulate_to_hit(2f64.sqrt().recip(), dt, &mut seeded(seed), 1e3) else {
                let out = simulate_limit(2f64.sqrt(), 3, dt, &mut seeded(seed), 1e3, false).unwrap();
                assert!(out.is_censored());
                continue;
            };
            let stored = ranked_excursions(&hit.path, 2f64.sqrt().recip()).unwrap();
            let LimitOutcome::Hit(streamed) =
                simulate_limit(2f64.sqrt(), 3, dt, &mut seeded(seed), 1e3, true).unwrap()
            else {
                panic!("censored");
            };
            assert_eq!(streamed.tau, hit.tau);
            let expect: Vec<ExcursionInterval> = stored.iter().take(3).copied().collect();
            assert_eq!(streamed.intervals, expect);
            for (iv, p) in streamed.intervals.iter().zip(&streamed.paths) {
                assert!(p.iter().all(|&r| r >= 0.0));
                assert_eq!(p[0], 0.0);
                assert_eq!(*p.last().unwrap(), 0.0);
                assert!(p.len() as f64 - 1.0 >= (iv.length() / dt).floor());
            }
        }
    }

    #[test]
    fn limit_sample_shape() {
        let mut rng = seeded(5);
        for _ in 0..50 {
            let s = sample_limit_vector(1.0, 4, 1e-3, &mut rng, 1e6).unwrap();
            for w in s.lengths.windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(s.lengths.iter().sum::<f64>() <= s.tau + 1e-12);
            assert!(s.lengths.first().copied().unwrap_or(0.0) <= s.tau);
        }
        assert!(matches!(
            sample_limit_vector(0.01, 1, 1e-2, &mut rng, 1.0),
            Err(Error::TimeCapExceeded { .. })
        ));
    }

    #[test]
    fn tau_law_domain() {
        assert!(tau_cdf(0.0, 1.0).is_err());
        assert!(tau_density(-1.0, 1.0).is_err());
        assert!(tau_cdf(1.0, 0.0).is_err());
        assert!((tau_cdf(1e12, 1.0).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exact_sampler_scaling() {
        let a = sample_tau_exact(1.0, &mut seeded(8));
        let b = sample_tau_exact(2.0, &mut seeded(8));
        assert!((a / 4.0 - b).abs() < 1e-12 * a);
    }
}
