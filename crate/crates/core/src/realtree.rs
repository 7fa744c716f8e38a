//! Real trees coded by functions, at desk scale.
//!
//! A nonnegative function `g` with `g(0) = 0` induces the pseudometric
//! `d_g(s, t) = g(s) + g(t) - 2 min_{[s ^ t, s v t]} g`; quotienting by its
//! zero set gives a real tree. This module evaluates `d_g` on
//! piecewise-linear codings, takes finite snapshots, builds the graph
//! metric of a plane tree and its contour coding, and computes
//! Gromov-Hausdorff distances between small finite spaces by exhaustive
//! search over correspondences.

use serde::{Deserialize, Serialize};

use crate::codec::PlaneTree;
use crate::error::{Error, Result};

/// Tolerance for metric axioms and zero-distance identification.
pub const METRIC_TOL: f64 = 1e-9;

/// Piecewise-linear coding function on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingFunction {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl CodingFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::DomainError("need equally many (>= 1) times and values".into()));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::DomainError("a coding function starts at g(0) = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DomainError("grid times must be strictly increasing".into()));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::DomainError("coding functions are finite and nonnegative".into()));
        }
        Ok(Self { times, values })
    }

    /// Values on the integer grid `0, 1, ..., m`.
    pub fn on_unit_grid(values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|i| i as f64).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.support_end()).contains(&t) {
            return Err(Error::DomainError(format!("time {t} outside [0, {}]", self.support_end())));
        }
        Ok(())
    }

    /// Index `i` with `times[i] <= t < times[i + 1]` (last index at the end).
    fn segment(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t).saturating_sub(1)
    }

    /// Linear interpolation of `g` at `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.interp(t))
    }

    fn interp(&self, t: f64) -> f64 {
        let i = self.segment(t);
        if i + 1 >= self.times.len() {
            return self.values[i];
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Exact minimum of the interpolant over `[s ^ t, s v t]`.
    pub fn min_between(&self, s: f64, t: f64) -> Result<f64> {
        self.check_time(s)?;
        self.check_time(t)?;
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let mut m = self.interp(lo).min(self.interp(hi));
        // Grid points strictly inside (lo, hi).
        let first = self.times.partition_point(|&x| x <= lo);
        let last = self.times.partition_point(|&x| x < hi);
        for &v in &self.values[first..last.max(first)] {
            m = m.min(v);
        }
        Ok(m)
    }

    /// `d_g(s, t)`.
    pub fn pseudometric(&self, s: f64, t: f64) -> Result<f64> {
        let m = self.min_between(s, t)?;
        Ok((self.interp(s) + self.interp(t) - 2.0 * m).max(0.0))
    }

    /// Same function with time rescaled affinely onto `[0, 1]`.
    pub fn rescaled_to_unit(&self) -> CodingFunction {
        let end = self.support_end();
        if end == 0.0 {
            return self.clone();
        }
        CodingFunction {
            times: self.times.iter().map(|t| t / end).collect(),
            values: self.values.clone(),
        }
    }

    /// Multiplies every value by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> CodingFunction {
        CodingFunction {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `t,g` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,g\n");
        for (t, g) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{g}\n"));
        }
        out
    }
}

pub fn coding_pseudometric(g: &CodingFunction, s: f64, t: f64) -> Result<f64> {
    g.pseudometric(s, t)
}

/// Finite metric space with optional probability masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    distances: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    masses: Option<Vec<f64>>,
}

impl FiniteMetricSpace {
    pub fn new(distances: Vec<Vec<f64>>, masses: Option<Vec<f64>>) -> Result<Self> {
        let n = distances.len();
        if n == 0 {
            return Err(Error::DomainError("a metric space needs at least one point".into()));
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DomainError("distance matrix must be square".into()));
            }
            if row[i] != 0.0 {
                return Err(Error::DomainError(format!("nonzero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !(d >= 0.0) || !d.is_finite() || (d - distances[j][i]).abs() > 0.0 {
                    return Err(Error::DomainError(format!("distance ({i}, {j}) is negative or asymmetric")));
                }
            }
        }
        if let Some((i, j, k)) = triangle_violation(&distances) {
            return Err(Error::DomainError(format!("triangle inequality fails at ({i}, {j}, {k})")));
        }
        if let Some(m) = &masses {
            if m.len() != n || m.iter().any(|&x| !(x >= 0.0)) || (m.iter().sum::<f64>() - 1.0).abs() > METRIC_TOL {
                return Err(Error::DomainError("masses must be a probability vector on the points".into()));
            }
        }
        Ok(Self { distances, masses })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn masses(&self) -> Option<&[f64]> {
        self.masses.as_deref()
    }

    /// Masses, defaulting to uniform.
    pub fn masses_or_uniform(&self) -> Vec<f64> {
        self.masses
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.len() as f64; self.len()])
    }

    pub fn diameter(&self) -> f64 {
        self.distances.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest violation of the four-point condition
    /// `d(w,x) + d(y,z) <= max(d(w,y) + d(x,z), d(w,z) + d(x,y))` over all
    /// quadruples (0 when it holds).
    pub fn four_point_defect(&self) -> f64 {
        let n = self.len();
        let d = &self.distances;
        let mut worst: f64 = 0.0;
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let lhs = d[w][x] + d[y][z];
                        let rhs = (d[w][y] + d[x][z]).max(d[w][z] + d[x][y]);
                        worst = worst.max(lhs - rhs);
                    }
                }
            }
        }
        worst
    }

    /// Whether some relabelling of points maps one distance matrix onto the
    /// other within `tol`.
    pub fn is_isometric(&self, other: &FiniteMetricSpace, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let n = self.len();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn extend(
            a: &FiniteMetricSpace,
            b: &FiniteMetricSpace,
            tol: f64,
            i: usize,
            perm: &mut [usize],
            used: &mut [bool],
        ) -> bool {
            if i == perm.len() {
                return true;
            }
            for y in 0..perm.len() {
                if used[y] || (0..i).any(|j| (a.d(i, j) - b.d(y, perm[j])).abs() > tol) {
                    continue;
                }
                used[y] = true;
                perm[i] = y;
                if extend(a, b, tol, i + 1, perm, used) {
                    return true;
                }
                used[y] = false;
            }
            false
        }
        extend(self, other, tol, 0, &mut perm, &mut used)
    }
}

fn triangle_violation(d: &[Vec<f64>]) -> Option<(usize, usize, usize)> {
    let n = d.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d[i][j] > d[i][k] + d[k][j] + METRIC_TOL {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Finite snapshot of the coded tree at `sample_times`: pairwise `d_g`,
/// points at distance zero merged (masses add), uniform masses on the
/// sample times.
pub fn metric_snapshot(g: &CodingFunction, sample_times: &[f64]) -> Result<FiniteMetricSpace> {
    if sample_times.is_empty() {
        return Err(Error::DomainError("no sample times".into()));
    }
    let k = sample_times.len();
    let mut full = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = g.pseudometric(sample_times[i], sample_times[j])?;
            full[i][j] = d;
            full[j][i] = d;
        }
    }
    // Representative of each class: the first sample at distance ~0.
    let mut reps: Vec<usize> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for (i, row) in full.iter().enumerate() {
        match reps.iter().position(|&r| row[r] <= METRIC_TOL) {
            Some(c) => masses[c] += 1.0 / k as f64,
            None => {
                reps.push(i);
                masses.push(1.0 / k as f64);
            }
        }
    }
    let distances = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| full[a][b]).collect())
        .collect();
    FiniteMetricSpace::new(distances, Some(masses))
}

/// Graph distances between nodes of `t` (lexicographic order) times
/// `scale`, with mass `mass_per_node` on each node.
pub fn tree_graph_metric(t: &PlaneTree, scale: f64, mass_per_node: f64) -> Result<FiniteMetricSpace> {
    if !(scale > 0.0) {
        return Err(Error::DomainError(format!("scale must be positive, got {scale}")));
    }
    let n = t.size();
    let parents = t.parents();
    let depths = t.depths();
    let mut distances = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in (u + 1)..n {
            let (mut a, mut b) = (u, v);
            while a != b {
                if depths[a] >= depths[b] {
                    a = parents[a].expect("non-root");
                } else {
                    b = parents[b].expect("non-root");
                }
            }
            let hops = depths[u] + depths[v] - 2 * depths[a];
            distances[u][v] = hops as f64 * scale;
            distances[v][u] = hops as f64 * scale;
        }
    }
    FiniteMetricSpace::new(distances, Some(vec![mass_per_node; n]))
}

/// Contour (depth along the depth-first traversal) of `t` on the grid
/// `0, 1, ..., 2(|T| - 1)`.
pub fn contour_function(t: &PlaneTree) -> CodingFunction {
    let (values, _) = contour(t);
    CodingFunction::on_unit_grid(values).expect("depths are nonnegative and start at 0")
}

/// Grid times at which the contour first visits each node, in
/// lexicographic order.
pub fn first_visit_times(t: &PlaneTree) -> Vec<f64> {
    contour(t).1
}

fn contour(t: &PlaneTree) -> (Vec<f64>, Vec<f64>) {
    let children = t.children();
    let depths = t.depths();
    let mut values = Vec::with_capacity(2 * t.size() - 1);
    let mut first = vec![0.0; t.size()];
    // (node, index of next child to visit)
    let mut stack = vec![(0usize, 0usize)];
    values.push(0.0);
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if *next < children[v].len() {
            let c = children[v][*next];
            *next += 1;
            first[c] = values.len() as f64;
            values.push(depths[c] as f64);
            stack.push((c, 0));
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                values.push(depths[p] as f64);
            }
        }
    }
    (values, first)
}

/// Largest number of points accepted by the brute-force searches.
pub const BRUTE_FORCE_CAP: usize = 7;

/// Exhaustive search over correspondences. Every correspondence contains a
/// minimal one, of the form `{(x, f(x))} u {(g(y), y) : y not in f(X)}`,
/// and distortion can only drop when pairs are removed, so it suffices to
/// enumerate maps `f` and partners `g` for uncovered points, pruning any
/// branch whose distortion already reaches the best found.
struct CorrespondenceSearch<'a, F: FnMut(&[(usize, usize)], f64) -> f64> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    pairs: Vec<(usize, usize)>,
    covered: Vec<usize>,
    /// Branches are cut once their distortion reaches this value; the
    /// callback may lower it.
    bound: f64,
    on_complete: F,
}

impl<F: FnMut(&[(usize, usize)], f64) -> f64> CorrespondenceSearch<'_, F> {
    fn added_distortion(&self, a: usize, b: usize, current: f64) -> f64 {
        let mut dis = current;
        for &(p, q) in &self.pairs {
            dis = dis.max((self.x.d(a, p) - self.y.d(b, q)).abs());
        }
        dis
    }

    fn assign_x(&mut self, a: usize, dis: f64) {
        if a == self.x.len() {
            self.assign_uncovered(0, dis);
            return;
        }
        let mut options: Vec<(f64, usize)> = (0..self.y.len())
            .map(|b| (self.added_distortion(a, b, dis), b))
            .collect();
        options.sort_by(|u, v| u.0.total_cmp(&v.0));
        for (nd, b) in options {
            if nd >= self.bound {
                break;
            }
            self.pairs.push((a, b));
            self.covered[b] += 1;
            self.assign_x(a + 1, nd);
            self.covered[b] -= 1;
            self.pairs.pop();
        }
    }

    fn assign_uncovered(&mut self, from: usize, dis: f64) {
        let Some(b) = (from..self.y.len()).find(|&b| self.covered[b] == 0) else {
            self.bound = (self.on_complete)(&self.pairs, dis).min(self.bound);
            return;
        };
        let mut options: Vec<(f64, usize)> = (0..self.x.len())
            .map(|a| (self.added_distortion(a, b, dis), a))
            .collect();
        options.sort_by(|u, v| u.0.total_cmp(&v.0));
        for (nd, a) in options {
            if nd >= self.bound {
                break;
            }
            self.pairs.push((a, b));
            self.assign_uncovered(b + 1, nd);
            self.pairs.pop();
        }
    }
}

fn check_size(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<()> {
    let size = x.len().max(y.len());
    if size > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: BRUTE_FORCE_CAP,
        });
    }
    Ok(())
}

/// Gromov-Hausdorff distance: half the least distortion of a
/// correspondence.
pub fn gh_distance_bruteforce(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    check_size(x, y)?;
    // Any correspondence has distortion at most max(diam X, diam Y).
    let start = x.diameter().max(y.diameter()) + 1.0;
    let mut search = CorrespondenceSearch {
        x,
        y,
        pairs: Vec::new(),
        covered: vec![0; y.len()],
        bound: start,
        on_complete: |_: &[(usize, usize)], dis: f64| dis,
    };
    search.assign_x(0, 0.0);
    Ok(search.bound / 2.0)
}

/// Bracket on the Gromov-Hausdorff-Prokhorov distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhpBounds {
    /// The exact GH distance, which never exceeds GHP.
    pub lower: f64,
    /// `min_R max(dis(R) / 2, 1 - maxflow_R(mu, nu))` over the searched
    /// correspondences; `1 - maxflow` is the least mass a coupling puts
    /// outside `R`.
    pub upper: f64,
}

impl GhpBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Brute-force bracket on the GHP distance between measured spaces
/// (uniform masses when none are given). The upper bound uses the
/// coupling criterion `d_GHP <= max(dis(R)/2, pi(R^c))`; for each minimal
/// correspondence the search saturates it with every pair that keeps the
/// distortion unchanged and takes the optimal coupling by max-flow.
pub fn ghp_distance_bruteforce(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<GhpBounds> {
    let lower = gh_distance_bruteforce(x, y)?;
    let (mu, nu) = (x.masses_or_uniform(), y.masses_or_uniform());
    let mut best = f64::INFINITY;
    let start = x.diameter().max(y.diameter()) + 1.0;
    let mut search = CorrespondenceSearch {
        x,
        y,
        pairs: Vec::new(),
        covered: vec![0; y.len()],
        bound: start,
        on_complete: |pairs: &[(usize, usize)], dis: f64| {
            let saturated = saturate(x, y, pairs, dis);
            let outside = (1.0 - max_flow(&mu, &nu, &saturated)).max(0.0);
            best = best.min((dis / 2.0).max(outside));
            // Keep exploring correspondences whose distortion stays below
            // 2 * best: they might carry more mass.
            2.0 * best
        },
    };
    search.assign_x(0, 0.0);
    Ok(GhpBounds { lower, upper: best })
}

/// Adds every pair whose inclusion keeps the distortion at most `dis`.
fn saturate(x: &FiniteMetricSpace, y: &FiniteMetricSpace, pairs: &[(usize, usize)], dis: f64) -> Vec<(usize, usize)> {
    let mut rel = pairs.to_vec();
    for a in 0..x.len() {
        for b in 0..y.len() {
            if rel.contains(&(a, b)) {
                continue;
            }
            if rel.iter().all(|&(p, q)| (x.d(a, p) - y.d(b, q)).abs() <= dis) {
                rel.push((a, b));
            }
        }
    }
    rel
}

/// Maximum mass a coupling of `mu` and `nu` can place on `rel`
/// (augmenting paths on the bipartite transport network).
fn max_flow(mu: &[f64], nu: &[f64], rel: &[(usize, usize)]) -> f64 {
    let (m, n) = (mu.len(), nu.len());
    let mut supply = mu.to_vec();
    let mut demand = nu.to_vec();
    // flow[a][b] on relation edges.
    let mut flow = vec![vec![0.0; n]; m];
    let allowed = {
        let mut g = vec![vec![false; n]; m];
        for &(a, b) in rel {
            g[a][b] = true;
        }
        g
    };
    let eps = 1e-15;
    let mut total = 0.0;
    loop {
        // BFS over x-nodes and y-nodes from every x with spare supply.
        let mut prev_x: Vec<Option<usize>> = vec![None; m]; // y that led to x
        let mut prev_y: Vec<Option<usize>> = vec![None; n]; // x that led to y
        let mut seen_x = vec![false; m];
        let mut queue: std::collections::VecDeque<usize> = (0..m).filter(|&a| supply[a] > eps).collect();
        for &a in &queue {
            seen_x[a] = true;
        }
        let mut sink_y = None;
        'bfs: while let Some(a) = queue.pop_front() {
            for b in 0..n {
                if !allowed[a][b] || prev_y[b].is_some() {
                    continue;
                }
                prev_y[b] = Some(a);
                if demand[b] > eps {
                    sink_y = Some(b);
                    break 'bfs;
                }
                // Residual back-edges y -> x' where flow[x'][b] > 0.
                for a2 in 0..m {
                    if !seen_x[a2] && flow[a2][b] > eps {
                        seen_x[a2] = true;
                        prev_x[a2] = Some(b);
                        queue.push_back(a2);
                    }
                }
            }
        }
        let Some(end) = sink_y else { break };
        // Bottleneck.
        let mut amount = demand[end];
        let mut b = end;
        loop {
            let a = prev_y[b].expect("on path");
            match prev_x[a] {
                Some(b_prev) => {
                    amount = amount.min(flow[a][b_prev]);
                    b = b_prev;
                }
                None => {
                    amount = amount.min(supply[a]);
                    break;
                }
            }
        }
        let mut b = end;
        demand[end] -= amount;
        loop {
            let a = prev_y[b].expect("on path");
            flow[a][b] += amount;
            match prev_x[a] {
                Some(b_prev) => {
                    flow[a][b_prev] -= amount;
                    b = b_prev;
                }
                None => {
                    supply[a] -= amount;
                    break;
                }
            }
        }
        total += amount;
    }
    total
}

/// `2 sup |f - g|` after rescaling both time axes onto `[0, 1]`, evaluated
/// exactly on the union of the two grids. Bounds the GH distance between
/// the coded trees.
pub fn gh_upper_bound_from_codings(f: &CodingFunction, g: &CodingFunction) -> f64 {
    let (f, g) = (f.rescaled_to_unit(), g.rescaled_to_unit());
    let mut grid: Vec<f64> = f.times().iter().chain(g.times()).copied().collect();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    grid.into_iter()
        .map(|t| (f.interp(t.min(f.support_end())) - g.interp(t.min(g.support_end()))).abs())
        .fold(0.0, f64::max)
        * 2.0
}
