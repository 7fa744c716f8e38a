#![allow(dead_code)]

use std::collections::BTreeMap;

use forestwalk::codec::PlaneTree;
use forestwalk::degseq::DegreeSequence;

/// Every degree sequence with `1 <= n <= max_n` and `c(s) >= 1`.
pub fn all_degree_sequences(max_n: usize) -> Vec<DegreeSequence> {
    fn rec(n_left: usize, min_deg: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if n_left == 0 {
            return;
        }
        for d in min_deg..=current.len() + n_left {
            current.push(d);
            rec(n_left - 1, d, current, out);
            current.pop();
        }
    }
    let mut vectors = Vec::new();
    rec(max_n, 0, &mut Vec::new(), &mut vectors);
    vectors
        .into_iter()
        .filter(|d| d.iter().map(|&x| 1 - x as i64).sum::<i64>() >= 1)
        .map(|d| DegreeSequence::from_degrees(d).unwrap())
        .collect()
}

/// All plane trees with exactly `size` nodes, built from their root degree
/// and ordered subtrees.
pub fn trees_of_size(size: usize) -> Vec<PlaneTree> {
    let mut memo: BTreeMap<usize, Vec<PlaneTree>> = BTreeMap::new();
    trees_memo(size, &mut memo)
}

fn trees_memo(size: usize, memo: &mut BTreeMap<usize, Vec<PlaneTree>>) -> Vec<PlaneTree> {
    if let Some(v) = memo.get(&size) {
        return v.clone();
    }
    let result = if size == 1 {
        vec![PlaneTree::leaf()]
    } else {
        forests_memo(size - 1, memo)
            .into_iter()
            .map(PlaneTree::node)
            .collect()
    };
    memo.insert(size, result.clone());
    result
}

/// Ordered sequences of trees with `total` nodes in all (at least one tree).
fn forests_memo(total: usize, memo: &mut BTreeMap<usize, Vec<PlaneTree>>) -> Vec<Vec<PlaneTree>> {
    let mut out = Vec::new();
    for first in 1..=total {
        let heads = trees_memo(first, memo);
        let tails = if first == total { vec![Vec::new()] } else { forests_memo(total - first, memo) };
        for h in &heads {
            for t in &tails {
                let mut f = vec![h.clone()];
                f.extend(t.iter().cloned());
                out.push(f);
            }
        }
    }
    out
}

/// All plane forests (as tree lists) with exactly `c` trees and `n` nodes.
pub fn forests_with(n: usize, c: usize) -> Vec<Vec<PlaneTree>> {
    if c == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(c - 1) {
        for h in trees_of_size(first) {
            for mut rest in forests_with(n - first, c - 1) {
                rest.insert(0, h.clone());
                out.push(rest);
            }
        }
    }
    out
}

/// All trees with at most `max` nodes.
pub fn all_trees(max: usize) -> Vec<PlaneTree> {
    (1..=max).flat_map(trees_of_size).collect()
}

/// Calls `f` on every lattice bridge with `1..=max_len` steps and
/// increments drawn from `steps`.
pub fn for_each_bridge(max_len: usize, steps: &[i64], mut f: impl FnMut(&[i64])) {
    fn rec(values: &mut Vec<i64>, n: usize, steps: &[i64], f: &mut dyn FnMut(&[i64])) {
        let k = values.len() - 1;
        let here = values[k];
        if k == n {
            if here == -1 {
                f(values);
            }
            return;
        }
        // The remaining steps move by at least `lo` and at most `hi` each.
        let left = (n - k) as i64;
        let (lo, hi) = (*steps.iter().min().unwrap(), *steps.iter().max().unwrap());
        if here + left * lo > -1 || here + left * hi < -1 {
            return;
        }
        for &s in steps {
            values.push(here + s);
            rec(values, n, steps, f);
            values.pop();
        }
    }
    for n in 1..=max_len {
        let mut values = vec![0];
        rec(&mut values, n, steps, &mut f);
    }
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = rule(f, a, fa, m, fm);
        let (rm, frm, right) = rule(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = rule(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 50)
}
