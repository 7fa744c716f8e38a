//! Exact uniform samplers for marked cyclic forests and plane forests with
//! a prescribed degree sequence.
//!
//! A uniformly shuffled degree vector codes a uniform marked cyclic forest.
//! Every marked cyclic forest has exactly `c(s)` preimages `(forest, node)`
//! and every forest carries exactly `n` nodes, so picking one of the `c(s)`
//! rotations uniformly and forgetting the mark yields a uniform forest.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::codec::{MarkedCyclicForest, PlaneForest};
use crate::degseq::DegreeSequence;
use crate::lattice::{passage_times, CodingWalk};

/// Uniformly random arrangement of `d(s)` (Fisher-Yates).
pub fn shuffle_degrees<R: Rng + ?Sized>(s: &DegreeSequence, rng: &mut R) -> Vec<usize> {
    let mut d = s.degree_vector().into_inner();
    d.shuffle(rng);
    d
}

/// Uniform element of `MCF(s)`.
pub fn sample_mcf<R: Rng + ?Sized>(s: &DegreeSequence, rng: &mut R) -> MarkedCyclicForest {
    let d = shuffle_degrees(s, rng);
    MarkedCyclicForest::from_walk(&CodingWalk::from_degrees(&d).expect("valid degree sequence"))
}

/// Uniform element of `F(s)`.
pub fn sample_forest<R: Rng + ?Sized>(s: &DegreeSequence, rng: &mut R) -> PlaneForest {
    forget_mark(sample_mcf(s, rng), rng)
}

/// Picks one of the `c` preimage rotations of `mcf` uniformly and drops the
/// mark; applied to a uniform marked cyclic forest this gives a uniform
/// forest.
pub fn forget_mark<R: Rng + ?Sized>(mcf: MarkedCyclicForest, rng: &mut R) -> PlaneForest {
    let k = mcf.forest().tree_count();
    let rotation = rng.random_range(0..k);
    let mut trees = mcf.into_forest().into_trees();
    trees.rotate_right(rotation);
    PlaneForest::new(trees).expect("nonempty")
}

/// Trees sorted by decreasing size; ties keep their original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedForest {
    pub forest: PlaneForest,
    /// `order[i]` is the original index of the `i`-th largest tree.
    pub order: Vec<usize>,
    pub sizes: Vec<usize>,
}

pub fn ranked_trees(f: &PlaneForest) -> RankedForest {
    let sizes = f.tree_sizes();
    let order = rank_by_size(&sizes);
    let trees = order.iter().map(|&i| f.trees()[i].clone()).collect();
    RankedForest {
        forest: PlaneForest::new(trees).expect("nonempty"),
        sizes: order.iter().map(|&i| sizes[i]).collect(),
        order,
    }
}

/// Indices sorted by decreasing size, stable on ties.
pub fn rank_by_size(sizes: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
    order
}

/// One replicate of the shuffled-degree pipeline, summarised without
/// materialising trees.
///
/// The arrangement `degrees` is the coding walk `S_n` of a uniform marked
/// cyclic forest; its trees are the segments between the first visits to
/// `-1, ..., -(c-1)`, and the last segment is the marked tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateStats {
    degrees: Vec<usize>,
    /// Segment ends `tau(-1), ..., tau(-(c-1)), n`.
    bounds: Vec<usize>,
}

impl ReplicateStats {
    pub fn from_degrees(degrees: Vec<usize>, c: usize) -> Self {
        let mut w = Vec::with_capacity(degrees.len() + 1);
        let mut acc = 0i64;
        w.push(0);
        for &d in &degrees {
            acc += d as i64 - 1;
            w.push(acc);
        }
        let mut bounds = passage_times(&w, c.saturating_sub(1));
        bounds.push(degrees.len());
        Self { degrees, bounds }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn c(&self) -> usize {
        self.bounds.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn walk(&self) -> CodingWalk {
        CodingWalk::from_degrees(&self.degrees).expect("valid")
    }

    /// `S_{n,k}`.
    pub fn walk_at(&self, k: usize) -> i64 {
        self.degrees[..k].iter().map(|&d| d as i64 - 1).sum()
    }

    /// `tau_n`: number of nodes outside the marked tree, i.e. the first time
    /// the walk reaches `-(c-1)`.
    pub fn tau(&self) -> usize {
        if self.bounds.len() >= 2 {
            self.bounds[self.bounds.len() - 2]
        } else {
            0
        }
    }

    /// Tree sizes in cyclic order; the marked tree is last.
    pub fn tree_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.bounds
            .iter()
            .map(|&b| {
                let size = b - prev;
                prev = b;
                size
            })
            .collect()
    }

    pub fn marked_size(&self) -> usize {
        self.n() - self.tau()
    }

    /// Sizes in decreasing order.
    pub fn ranked_sizes(&self) -> Vec<usize> {
        let mut sizes = self.tree_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Whether the marked tree is the first in the ranked order. With the
    /// stable tie rule the marked tree, being last, loses every tie.
    pub fn largest_is_marked(&self) -> bool {
        let sizes = self.tree_sizes();
        let marked = sizes[sizes.len() - 1];
        sizes[..sizes.len() - 1].iter().all(|&s| s < marked)
    }

    /// Degree sequence of the `rank`-th largest tree (1-based).
    pub fn ranked_tree_degrees(&self, rank: usize) -> Option<DegreeSequence> {
        let sizes = self.tree_sizes();
        let order = rank_by_size(&sizes);
        let idx = *order.get(rank.checked_sub(1)?)?;
        let start = if idx == 0 { 0 } else { self.bounds[idx - 1] };
        let end = self.bounds[idx];
        Some(DegreeSequence::from_degrees(self.degrees[start..end].iter().copied()).expect("a tree has c = 1"))
    }

    pub fn summary(&self, replicate: usize) -> ReplicateSummary {
        ReplicateSummary {
            replicate,
            tau_n: self.tau(),
            sizes: self.ranked_sizes(),
            largest_is_marked: self.largest_is_marked(),
        }
    }
}

/// Row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub tau_n: usize,
    pub sizes: Vec<usize>,
    pub largest_is_marked: bool,
}

impl ReplicateSummary {
    pub fn csv_header(size_columns: usize) -> String {
        let mut h = String::from("replicate,tau_n");
        for i in 1..=size_columns {
            h.push_str(&format!(",size_{i}"));
        }
        h.push_str(",largest_is_marked");
        h
    }

    pub fn csv_row(&self, size_columns: usize) -> String {
        let mut row = format!("{},{}", self.replicate, self.tau_n);
        for i in 0..size_columns {
            match self.sizes.get(i) {
                Some(s) => row.push_str(&format!(",{s}")),
                None => row.push(','),
            }
        }
        row.push_str(&format!(",{}", self.largest_is_marked));
        row
    }
}

/// Samples one replicate of the coding walk `S_n` and its tree statistics.
pub fn walk_statistics<R: Rng + ?Sized>(s: &DegreeSequence, rng: &mut R) -> ReplicateStats {
    ReplicateStats::from_degrees(shuffle_degrees(s, rng), s.c())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::PlaneTree;
    use crate::rng::seeded;

    fn seq(pairs: &[(usize, usize)]) -> DegreeSequence {
        DegreeSequence::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn single_node_is_deterministic() {
        let s = seq(&[(0, 1)]);
        let mut rng = seeded(1);
        assert_eq!(shuffle_degrees(&s, &mut rng), vec![0]);
        let m = sample_mcf(&s, &mut rng);
        assert_eq!(m.forest().trees(), &[PlaneTree::leaf()]);
        assert_eq!(sample_forest(&s, &mut rng).trees(), &[PlaneTree::leaf()]);
        let st = walk_statistics(&s, &mut rng);
        assert_eq!((st.tau(), st.ranked_sizes(), st.largest_is_marked()), (0, vec![1], true));
    }

    #[test]
    fn ranking_examples() {
        let t = |n: usize| PlaneTree::from_lex(std::iter::repeat_n(1, n - 1).chain([0]).collect()).unwrap();
        let f = PlaneForest::new(vec![t(2), t(5), t(2)]).unwrap();
        let r = ranked_trees(&f);
        assert_eq!(r.order, vec![1, 0, 2]);
        assert_eq!(r.sizes, vec![5, 2, 2]);
        let f = PlaneForest::new(vec![t(1), t(1), t(1)]).unwrap();
        assert_eq!(ranked_trees(&f).order, vec![0, 1, 2]);
        let f = PlaneForest::new(vec![t(3)]).unwrap();
        assert_eq!(ranked_trees(&f).forest, f);
    }

    #[test]
    fn replicate_stats_match_full_decode() {
        let s = seq(&[(0, 5), (1, 2), (2, 2)]);
        let mut rng = seeded(9);
        for _ in 0..200 {
            let st = walk_statistics(&s, &mut rng);
            let m = MarkedCyclicForest::from_walk(&st.walk());
            assert_eq!(st.tree_sizes(), m.forest().tree_sizes());
            assert_eq!(st.tau(), s.n() - m.forest().trees().last().unwrap().size());
            assert_eq!(
                st.tau(),
                st.walk().hitting_time(-(s.c() as i64 - 1)).unwrap()
            );
            let ranked = ranked_trees(m.forest());
            assert_eq!(st.ranked_sizes(), ranked.sizes);
            for l in 1..=s.c() {
                let from_decode = ranked.forest.trees()[l - 1].degree_sequence();
                assert_eq!(st.ranked_tree_degrees(l).unwrap(), from_decode);
            }
            assert!(st.ranked_tree_degrees(s.c() + 1).is_none());
            let flag = *ranked.order.first().unwrap() == s.c() - 1;
            assert_eq!(st.largest_is_marked(), flag);
        }
    }

    #[test]
    fn small_case_tau_range() {
        let s = seq(&[(0, 2), (2, 1)]);
        let mut rng = seeded(3);
        for _ in 0..100 {
            let st = walk_statistics(&s, &mut rng);
            assert!(st.tau() <= 2);
            assert_eq!(st.tree_sizes().iter().sum::<usize>(), 3);
        }
    }

    #[test]
    fn degrees_preserved() {
        let s = seq(&[(0, 7), (1, 3), (2, 2), (3, 1)]);
        let mut rng = seeded(5);
        for _ in 0..100 {
            assert_eq!(sample_forest(&s, &mut rng).degree_sequence(), s);
            assert_eq!(sample_mcf(&s, &mut rng).forest().degree_sequence(), s);
        }
    }

    #[test]
    fn summary_csv() {
        let st = ReplicateStats::from_degrees(vec![0, 2, 0, 0, 0], 3);
        assert_eq!(st.tree_sizes(), vec![1, 3, 1]);
        let row = st.summary(4);
        assert_eq!(ReplicateSummary::csv_header(3), "replicate,tau_n,size_1,size_2,size_3,largest_is_marked");
        assert_eq!(row.csv_row(4), "4,4,3,1,1,,false");
    }
}
