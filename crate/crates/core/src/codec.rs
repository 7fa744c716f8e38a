//! Plane trees and forests, and the bijections between them and lattice
//! paths:
//!
//! * tree <-> first-passage bridge (depth-first walk),
//! * marked tree <-> lattice bridge (via the rotation of the bridge),
//! * marked cyclic forest <-> coding walk (split at first passage times),
//! * plane forest with a marked node -> marked cyclic forest.
//!
//! Trees are stored as their lexicographic degree sequence, which is the
//! canonical form used by every codec. Nodes are addressed by
//! [`NodeId`]: a 0-based tree index and a 1-based lexicographic position.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::lattice::{passage_times, CodingWalk, FirstPassageBridge, LatticeBridge};

/// Ordered rooted tree, stored as node degrees in lexicographic
/// (depth-first, left-to-right) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PlaneTree {
    lex: Vec<usize>,
}

impl PlaneTree {
    pub fn leaf() -> Self {
        Self { lex: vec![0] }
    }

    /// A root whose subtrees are `children`, left to right.
    pub fn node(children: Vec<PlaneTree>) -> Self {
        let mut lex = Vec::with_capacity(1 + children.iter().map(PlaneTree::size).sum::<usize>());
        lex.push(children.len());
        for child in children {
            lex.extend(child.lex);
        }
        Self { lex }
    }

    /// Validates a lexicographic degree sequence.
    pub fn from_lex(lex: Vec<usize>) -> Result<Self> {
        if !is_tree_code(&lex) {
            return Err(Error::MalformedForest(format!("{lex:?} is not the lexicographic degree sequence of a tree")));
        }
        Ok(Self { lex })
    }

    pub(crate) fn from_lex_unchecked(lex: Vec<usize>) -> Self {
        debug_assert!(is_tree_code(&lex));
        Self { lex }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.lex.len()
    }

    /// `(k_T(u_1), ..., k_T(u_|T|))`.
    pub fn lex_degrees(&self) -> &[usize] {
        &self.lex
    }

    /// Depth-first walk: partial sums of `lex(T) - 1`.
    pub fn dfw_encode(&self) -> FirstPassageBridge {
        let walk = CodingWalk::from_degrees(&self.lex).expect("tree code has negative total");
        FirstPassageBridge::new(walk.values().to_vec()).expect("depth-first walk of a tree is a first-passage bridge")
    }

    /// The unique tree whose depth-first walk is `b`.
    pub fn dfw_decode(b: &FirstPassageBridge) -> Self {
        Self {
            lex: b.bridge().path().increments().map(|d| (d + 1) as usize).collect(),
        }
    }

    /// Parent of each node by 0-based lexicographic index; the root has none.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = vec![None; self.lex.len()];
        // Stack of (node, children still to attach).
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for (v, &deg) in self.lex.iter().enumerate() {
            if let Some(top) = stack.last_mut() {
                parents[v] = Some(top.0);
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if deg > 0 {
                stack.push((v, deg));
            }
        }
        parents
    }

    /// Graph distance from the root for each node, in lexicographic order.
    pub fn depths(&self) -> Vec<usize> {
        let parents = self.parents();
        let mut depths = vec![0; parents.len()];
        for v in 1..parents.len() {
            // Parents precede children in lexicographic order.
            depths[v] = depths[parents[v].expect("non-root node has a parent")] + 1;
        }
        depths
    }

    /// Children of each node (0-based lexicographic indices), left to right.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.lex.len()];
        for (v, p) in self.parents().into_iter().enumerate() {
            if let Some(p) = p {
                children[p].push(v);
            }
        }
        children
    }

    /// Subtrees of the root, left to right.
    pub fn root_subtrees(&self) -> Vec<PlaneTree> {
        let mut out = Vec::with_capacity(self.lex[0]);
        let mut start = 1;
        while start < self.lex.len() {
            let end = start + subtree_len(&self.lex[start..]);
            out.push(PlaneTree {
                lex: self.lex[start..end].to_vec(),
            });
            start = end;
        }
        out
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::from_degrees(self.lex.iter().copied()).expect("a tree has c = 1")
    }
}

impl TryFrom<Vec<usize>> for PlaneTree {
    type Error = Error;
    fn try_from(lex: Vec<usize>) -> Result<Self> {
        Self::from_lex(lex)
    }
}

impl From<PlaneTree> for Vec<usize> {
    fn from(t: PlaneTree) -> Self {
        t.lex
    }
}

fn is_tree_code(lex: &[usize]) -> bool {
    let mut open = 1i64;
    for (i, &d) in lex.iter().enumerate() {
        open += d as i64 - 1;
        if open == 0 {
            return i + 1 == lex.len();
        }
    }
    false
}

/// Length of the subtree code starting at the front of `lex`.
fn subtree_len(lex: &[usize]) -> usize {
    let mut open = 1i64;
    for (i, &d) in lex.iter().enumerate() {
        open += d as i64 - 1;
        if open == 0 {
            return i + 1;
        }
    }
    lex.len()
}

/// Node address: 0-based tree index, 1-based lexicographic position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct NodeId {
    pub tree: usize,
    pub pos: usize,
}

impl From<[usize; 2]> for NodeId {
    fn from([tree, pos]: [usize; 2]) -> Self {
        Self { tree, pos }
    }
}

impl From<NodeId> for [usize; 2] {
    fn from(id: NodeId) -> Self {
        [id.tree, id.pos]
    }
}

/// A plane tree with one distinguished node (1-based lexicographic
/// position).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedTree {
    pub tree: PlaneTree,
    pub mark: usize,
}

impl MarkedTree {
    pub fn new(tree: PlaneTree, mark: usize) -> Result<Self> {
        if mark == 0 || mark > tree.size() {
            return Err(Error::MalformedForest(format!(
                "mark {mark} outside 1..={}",
                tree.size()
            )));
        }
        Ok(Self { tree, mark })
    }

    /// Decodes a lattice bridge: rotate by `r = rotation_index(b)` to a
    /// first-passage bridge, decode the tree, mark node `|T| - r + 1`.
    pub fn from_bridge(b: &LatticeBridge) -> Self {
        let (r, fpb) = b.to_first_passage();
        let tree = PlaneTree::dfw_decode(&fpb);
        let mark = tree.size() - r + 1;
        Self { tree, mark }
    }

    /// Inverse of [`Self::from_bridge`].
    pub fn to_bridge(&self) -> LatticeBridge {
        let fpb = self.tree.dfw_encode();
        // The rotation was r = |T| - mark + 1; shifting by |T| - r undoes it.
        match self.mark - 1 {
            0 => fpb.into_bridge(),
            back => fpb.bridge().cyclic_shift(back),
        }
    }
}

/// Decodes a lattice bridge into a marked tree.
pub fn marked_tree_from_bridge(b: &LatticeBridge) -> MarkedTree {
    MarkedTree::from_bridge(b)
}

/// Encodes a marked tree as a lattice bridge.
pub fn bridge_from_marked_tree(t: &MarkedTree) -> LatticeBridge {
    t.to_bridge()
}

/// A nonempty sequence of plane trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneForest {
    trees: Vec<PlaneTree>,
}

impl PlaneForest {
    pub fn new(trees: Vec<PlaneTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::MalformedForest("a forest needs at least one tree".into()));
        }
        Ok(Self { trees })
    }

    /// Splits a concatenation of tree codes.
    pub fn from_concatenated_lex(degrees: &[usize]) -> Result<Self> {
        let mut trees = Vec::new();
        let mut start = 0;
        while start < degrees.len() {
            let len = subtree_len(&degrees[start..]);
            trees.push(PlaneTree::from_lex(degrees[start..start + len].to_vec())?);
            start += len;
        }
        Self::new(trees)
    }

    pub fn trees(&self) -> &[PlaneTree] {
        &self.trees
    }

    pub fn into_trees(self) -> Vec<PlaneTree> {
        self.trees
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Total number of nodes.
    pub fn size(&self) -> usize {
        self.trees.iter().map(PlaneTree::size).sum()
    }

    pub fn tree_sizes(&self) -> Vec<usize> {
        self.trees.iter().map(PlaneTree::size).collect()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::from_degrees(self.trees.iter().flat_map(|t| t.lex.iter().copied()))
            .expect("a forest has c >= 1")
    }

    /// Concatenated lexicographic degrees of all trees.
    pub fn concatenated_lex(&self) -> Vec<usize> {
        self.trees.iter().flat_map(|t| t.lex.iter().copied()).collect()
    }

    /// The node with 1-based global index `index` (trees in order, nodes in
    /// lexicographic order within each tree).
    pub fn node_at(&self, index: usize) -> Result<NodeId> {
        let mut rest = index;
        if rest == 0 {
            return Err(Error::MalformedForest("node index is 1-based".into()));
        }
        for (tree, t) in self.trees.iter().enumerate() {
            if rest <= t.size() {
                return Ok(NodeId { tree, pos: rest });
            }
            rest -= t.size();
        }
        Err(Error::MalformedForest(format!("node index {index} exceeds forest size {}", self.size())))
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        match self.trees.get(id.tree) {
            Some(t) if (1..=t.size()).contains(&id.pos) => Ok(()),
            _ => Err(Error::MalformedForest(format!("node {id:?} not in forest"))),
        }
    }
}

/// A plane forest with a mark in its last tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkedCyclicForest {
    forest: PlaneForest,
    mark: usize,
}

impl MarkedCyclicForest {
    /// `mark` is the 1-based lexicographic position in the last tree.
    pub fn new(forest: PlaneForest, mark: usize) -> Result<Self> {
        let last = forest.trees.last().expect("forest is nonempty");
        if mark == 0 || mark > last.size() {
            return Err(Error::MalformedForest(format!("mark {mark} outside the last tree")));
        }
        Ok(Self { forest, mark })
    }

    pub fn forest(&self) -> &PlaneForest {
        &self.forest
    }

    pub fn into_forest(self) -> PlaneForest {
        self.forest
    }

    pub fn mark(&self) -> NodeId {
        NodeId {
            tree: self.forest.trees.len() - 1,
            pos: self.mark,
        }
    }

    pub fn marked_tree(&self) -> MarkedTree {
        MarkedTree {
            tree: self.forest.trees.last().expect("nonempty").clone(),
            mark: self.mark,
        }
    }

    /// Decodes a coding walk: the first `k - 1` passage segments are
    /// depth-first walks, the last segment is the bridge of a marked tree.
    pub fn from_walk(w: &CodingWalk) -> Self {
        let values = w.values();
        let degrees: Vec<usize> = w.path().increments().map(|d| (d + 1) as usize).collect();
        let times = passage_times(values, w.depth());
        let mut trees = Vec::with_capacity(w.depth());
        let mut start = 0;
        for &t in &times[..w.depth() - 1] {
            trees.push(PlaneTree::from_lex_unchecked(degrees[start..t].to_vec()));
            start = t;
        }
        let tail: Vec<i64> = values[start..].iter().map(|&x| x - values[start]).collect();
        let tail = LatticeBridge::new(tail).expect("tail of a coding walk is a lattice bridge");
        let marked = MarkedTree::from_bridge(&tail);
        trees.push(marked.tree);
        Self {
            forest: PlaneForest { trees },
            mark: marked.mark,
        }
    }

    /// Inverse of [`Self::from_walk`].
    pub fn to_walk(&self) -> CodingWalk {
        let k = self.forest.trees.len();
        let heads: Vec<FirstPassageBridge> = self.forest.trees[..k - 1].iter().map(PlaneTree::dfw_encode).collect();
        CodingWalk::concatenate(&heads, &self.marked_tree().to_bridge())
    }

    /// Marks `node` and rotates the trees cyclically so that its tree comes
    /// last.
    pub fn from_forest(forest: &PlaneForest, node: NodeId) -> Result<Self> {
        forest.check_node(node)?;
        let mut trees = forest.trees.clone();
        trees.rotate_left(node.tree + 1);
        Ok(Self {
            forest: PlaneForest { trees },
            mark: node.pos,
        })
    }

    /// All `(forest, node)` pairs mapped onto `self` by
    /// [`Self::from_forest`]: one per cyclic rotation.
    pub fn preimages(&self) -> Vec<(PlaneForest, NodeId)> {
        let k = self.forest.trees.len();
        (0..k)
            .map(|p| {
                let mut trees = self.forest.trees.clone();
                // Last tree lands at index p.
                trees.rotate_right(p + 1);
                (PlaneForest { trees }, NodeId { tree: p, pos: self.mark })
            })
            .collect()
    }
}

pub fn mcf_from_walk(w: &CodingWalk) -> MarkedCyclicForest {
    MarkedCyclicForest::from_walk(w)
}

pub fn walk_from_mcf(m: &MarkedCyclicForest) -> CodingWalk {
    m.to_walk()
}

pub fn forest_to_mcf(forest: &PlaneForest, node: NodeId) -> Result<MarkedCyclicForest> {
    MarkedCyclicForest::from_forest(forest, node)
}

pub fn mcf_preimages(m: &MarkedCyclicForest) -> Vec<(PlaneForest, NodeId)> {
    m.preimages()
}

/// JSON form of a forest, optionally with a mark:
/// `{"trees": [[lex...], ...], "mark": [tree_idx, lex_pos]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestRecord {
    pub trees: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<NodeId>,
}

impl From<&PlaneForest> for ForestRecord {
    fn from(f: &PlaneForest) -> Self {
        Self {
            trees: f.trees.iter().map(|t| t.lex.clone()).collect(),
            mark: None,
        }
    }
}

impl From<&MarkedCyclicForest> for ForestRecord {
    fn from(m: &MarkedCyclicForest) -> Self {
        Self {
            mark: Some(m.mark()),
            ..Self::from(&m.forest)
        }
    }
}

impl From<&MarkedTree> for ForestRecord {
    fn from(m: &MarkedTree) -> Self {
        Self {
            trees: vec![m.tree.lex.clone()],
            mark: Some(NodeId { tree: 0, pos: m.mark }),
        }
    }
}

impl ForestRecord {
    pub fn to_forest(&self) -> Result<PlaneForest> {
        PlaneForest::new(
            self.trees
                .iter()
                .map(|t| PlaneTree::from_lex(t.clone()))
                .collect::<Result<_>>()?,
        )
    }

    /// Requires a mark in the last tree.
    pub fn to_mcf(&self) -> Result<MarkedCyclicForest> {
        let forest = self.to_forest()?;
        match self.mark {
            Some(id) if id.tree + 1 == forest.tree_count() => MarkedCyclicForest::new(forest, id.pos),
            Some(id) => Err(Error::MalformedForest(format!("mark {id:?} is not in the last tree"))),
            None => Err(Error::MalformedForest("missing mark".into())),
        }
    }
}

impl Serialize for PlaneForest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ForestRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PlaneForest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = ForestRecord::deserialize(deserializer)?;
        if rec.mark.is_some() {
            return Err(serde::de::Error::custom("unexpected mark on an unmarked forest"));
        }
        rec.to_forest().map_err(serde::de::Error::custom)
    }
}

impl Serialize for MarkedCyclicForest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ForestRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarkedCyclicForest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        ForestRecord::deserialize(deserializer)?
            .to_mcf()
            .map_err(serde::de::Error::custom)
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// `|MCF(s)| = n! / prod_i s^i!`, the number of distinct arrangements of
/// `d(s)`.
pub fn count_mcf(s: &DegreeSequence) -> BigUint {
    let denom = s.counts().values().fold(BigUint::one(), |acc, &k| acc * factorial(k));
    factorial(s.n()) / denom
}

/// `|F(s)| = (c(s) / n) |MCF(s)|`.
pub fn count_forests(s: &DegreeSequence) -> BigUint {
    let scaled = count_mcf(s) * BigUint::from(s.c());
    let n = BigUint::from(s.n());
    debug_assert!((&scaled % &n).to_u64() == Some(0));
    scaled / n
}

/// Largest `n` accepted by the enumerators unless the caller raises it.
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// Every distinct arrangement of `d(s)`, in lexicographic order.
pub fn enumerate_arrangements(s: &DegreeSequence, cap: usize) -> Result<Vec<Vec<usize>>> {
    if s.n() > cap {
        return Err(Error::CapExceeded { n: s.n(), cap });
    }
    let mut remaining: BTreeMap<usize, usize> = s.counts().clone();
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(s.n());
    arrangements(&mut remaining, &mut prefix, s.n(), &mut |p| {
        out.push(p.to_vec());
        true
    });
    Ok(out)
}

/// Walks every distinct arrangement; `visit` returns whether to descend
/// into the current prefix.
fn arrangements<F: FnMut(&[usize]) -> bool>(
    remaining: &mut BTreeMap<usize, usize>,
    prefix: &mut Vec<usize>,
    n: usize,
    visit: &mut F,
) {
    if prefix.len() == n {
        visit(prefix);
        return;
    }
    let keys: Vec<usize> = remaining.iter().filter(|(_, &k)| k > 0).map(|(&d, _)| d).collect();
    for d in keys {
        *remaining.get_mut(&d).expect("key present") -= 1;
        prefix.push(d);
        arrangements(remaining, prefix, n, visit);
        prefix.pop();
        *remaining.get_mut(&d).expect("key present") += 1;
    }
}

/// Every plane forest with degree sequence `s`, each exactly once.
///
/// A concatenation of tree codes is exactly an arrangement of `d(s)` whose
/// walk first reaches `-c(s)` at its last step; prefixes are pruned as
/// soon as they reach `-c(s)` early.
pub fn enumerate_forests(s: &DegreeSequence, cap: usize) -> Result<std::vec::IntoIter<PlaneForest>> {
    if s.n() > cap {
        return Err(Error::CapExceeded { n: s.n(), cap });
    }
    let n = s.n();
    let floor = -(s.c() as i64);
    let mut out = Vec::new();
    let mut remaining = s.counts().clone();
    let mut prefix = Vec::with_capacity(n);
    forest_codes(&mut remaining, &mut prefix, 0, n, floor, &mut out);
    Ok(out.into_iter())
}

fn forest_codes(
    remaining: &mut BTreeMap<usize, usize>,
    prefix: &mut Vec<usize>,
    level: i64,
    n: usize,
    floor: i64,
    out: &mut Vec<PlaneForest>,
) {
    if prefix.len() == n {
        if level == floor {
            out.push(PlaneForest::from_concatenated_lex(prefix).expect("valid forest code"));
        }
        return;
    }
    let keys: Vec<usize> = remaining.iter().filter(|(_, &k)| k > 0).map(|(&d, _)| d).collect();
    for d in keys {
        let next = level + d as i64 - 1;
        if next == floor && prefix.len() + 1 < n {
            continue;
        }
        *remaining.get_mut(&d).expect("key present") -= 1;
        prefix.push(d);
        forest_codes(remaining, prefix, next, n, floor, out);
        prefix.pop();
        *remaining.get_mut(&d).expect("key present") += 1;
    }
}

/// Every marked cyclic forest with degree sequence `s`, via the coding
/// walks of all arrangements of `d(s)`.
pub fn enumerate_mcfs(s: &DegreeSequence, cap: usize) -> Result<Vec<MarkedCyclicForest>> {
    Ok(enumerate_arrangements(s, cap)?
        .into_iter()
        .map(|d| MarkedCyclicForest::from_walk(&CodingWalk::from_degrees(&d).expect("valid degree sequence")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(lex: &[usize]) -> PlaneTree {
        PlaneTree::from_lex(lex.to_vec()).unwrap()
    }

    fn bridge(v: &[i64]) -> LatticeBridge {
        LatticeBridge::new(v.to_vec()).unwrap()
    }

    #[test]
    fn builders_and_views() {
        let cherry = PlaneTree::node(vec![PlaneTree::leaf(), PlaneTree::leaf()]);
        assert_eq!(cherry.lex_degrees(), &[2, 0, 0]);
        assert_eq!(PlaneTree::leaf().lex_degrees(), &[0]);
        let chain = tree(&[1, 1, 3, 0, 0, 0]);
        assert_eq!(chain.depths(), vec![0, 1, 2, 3, 3, 3]);
        assert_eq!(chain.parents(), vec![None, Some(0), Some(1), Some(2), Some(2), Some(2)]);
        assert_eq!(tree(&[2, 3, 0, 0, 0, 1, 0]).root_subtrees(), vec![tree(&[3, 0, 0, 0]), tree(&[1, 0])]);
        assert!(PlaneTree::from_lex(vec![2, 0]).is_err());
        assert!(PlaneTree::from_lex(vec![0, 0]).is_err());
    }

    #[test]
    fn dfw_examples() {
        assert_eq!(PlaneTree::leaf().dfw_encode().values(), &[0, -1]);
        assert_eq!(tree(&[2, 0, 0]).dfw_encode().values(), &[0, 1, 0, -1]);
        let t = tree(&[2, 3, 0, 0, 0, 1, 0]);
        assert_eq!(t.dfw_encode().values(), &[0, 1, 3, 2, 1, 0, 0, -1]);
        for t in [PlaneTree::leaf(), tree(&[2, 0, 0]), t] {
            assert_eq!(PlaneTree::dfw_decode(&t.dfw_encode()), t);
        }
    }

    #[test]
    fn marked_tree_examples() {
        let m = marked_tree_from_bridge(&bridge(&[0, -1, -1, -2, -1, 1, 0, -1]));
        assert_eq!(m.tree, tree(&[2, 3, 0, 0, 0, 1, 0]));
        assert_eq!(m.mark, 5);

        let m = marked_tree_from_bridge(&bridge(&[0, -1]));
        assert_eq!((m.tree.clone(), m.mark), (PlaneTree::leaf(), 1));

        let b = bridge(&[0, -1, -2, -3, -3, -3, -1]);
        let m = marked_tree_from_bridge(&b);
        assert_eq!((m.tree.clone(), m.mark), (tree(&[1, 1, 3, 0, 0, 0]), 4));
        assert_eq!(bridge_from_marked_tree(&m), b);
        assert_eq!(
            bridge_from_marked_tree(&MarkedTree::new(tree(&[2, 3, 0, 0, 0, 1, 0]), 5).unwrap()),
            bridge(&[0, -1, -1, -2, -1, 1, 0, -1])
        );
        assert!(MarkedTree::new(PlaneTree::leaf(), 2).is_err());
    }

    #[test]
    fn mcf_walk_examples() {
        let w = CodingWalk::new(vec![0, -1, -2, -3, -3, -3, -1]).unwrap();
        let m = mcf_from_walk(&w);
        assert_eq!(m.forest().trees(), &[tree(&[1, 1, 3, 0, 0, 0])]);
        assert_eq!(m.mark(), NodeId { tree: 0, pos: 4 });
        assert_eq!(walk_from_mcf(&m), w);

        let w = CodingWalk::new(vec![0, -1, 0, -1, -2]).unwrap();
        let m = mcf_from_walk(&w);
        assert_eq!(m.forest().trees(), &[PlaneTree::leaf(), tree(&[2, 0, 0])]);
        assert_eq!(m.mark(), NodeId { tree: 1, pos: 1 });
        assert_eq!(walk_from_mcf(&m), w);

        let w = CodingWalk::new(vec![0, -1, -2]).unwrap();
        let m = mcf_from_walk(&w);
        assert_eq!(m.forest().trees(), &[PlaneTree::leaf(), PlaneTree::leaf()]);
        assert_eq!(m.mark(), NodeId { tree: 1, pos: 1 });
        assert_eq!(walk_from_mcf(&m), w);
    }

    #[test]
    fn forest_to_mcf_examples() {
        let (a, b, c) = (PlaneTree::leaf(), tree(&[1, 0]), tree(&[2, 0, 0]));
        let f = PlaneForest::new(vec![a.clone(), b.clone()]).unwrap();
        let m = forest_to_mcf(&f, NodeId { tree: 0, pos: 1 }).unwrap();
        assert_eq!(m.forest().trees(), &[b.clone(), a.clone()]);
        assert_eq!(m.mark(), NodeId { tree: 1, pos: 1 });

        let single = PlaneForest::new(vec![c.clone()]).unwrap();
        let m = forest_to_mcf(&single, NodeId { tree: 0, pos: 3 }).unwrap();
        assert_eq!((m.forest(), m.mark()), (&single, NodeId { tree: 0, pos: 3 }));

        let f = PlaneForest::new(vec![a.clone(), b.clone(), c.clone()]).unwrap();
        let m = forest_to_mcf(&f, NodeId { tree: 1, pos: 2 }).unwrap();
        assert_eq!(m.forest().trees(), &[c.clone(), a.clone(), b.clone()]);
        assert_eq!(m.mark(), NodeId { tree: 2, pos: 2 });
        assert!(forest_to_mcf(&f, NodeId { tree: 1, pos: 3 }).is_err());
        assert_eq!(f.node_at(3).unwrap(), NodeId { tree: 1, pos: 2 });

        let pre = mcf_preimages(&m);
        assert_eq!(pre.len(), 3);
        assert!(pre.contains(&(f.clone(), NodeId { tree: 1, pos: 2 })));
        for (g, v) in &pre {
            assert_eq!(&forest_to_mcf(g, *v).unwrap(), &m);
        }
    }

    #[test]
    fn counting_examples() {
        let s = DegreeSequence::from_pairs([(0, 4), (2, 2)]).unwrap();
        assert_eq!(count_mcf(&s), BigUint::from(15u32));
        assert_eq!(count_forests(&s), BigUint::from(5u32));
        assert_eq!(enumerate_forests(&s, 10).unwrap().count(), 5);
        let one = DegreeSequence::from_pairs([(0, 1)]).unwrap();
        assert_eq!((count_mcf(&one), count_forests(&one)), (BigUint::one(), BigUint::one()));
        let s = DegreeSequence::from_pairs([(0, 3), (1, 2), (3, 1)]).unwrap();
        assert_eq!(count_mcf(&s), BigUint::from(60u32));
        assert_eq!(count_forests(&s), BigUint::from(10u32));
        assert_eq!(enumerate_forests(&s, 10).unwrap().count(), 10);
        let big = DegreeSequence::from_pairs([(0, 11)]).unwrap();
        assert_eq!(enumerate_forests(&big, 10).err(), Some(Error::CapExceeded { n: 11, cap: 10 }));
    }

    #[test]
    fn json_round_trip() {
        let f = PlaneForest::new(vec![PlaneTree::leaf(), tree(&[2, 0, 0])]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"trees":[[0],[2,0,0]]}"#);
        assert_eq!(serde_json::from_str::<PlaneForest>(&text).unwrap(), f);

        let m = MarkedCyclicForest::new(f, 2).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"trees":[[0],[2,0,0]],"mark":[1,2]}"#);
        assert_eq!(serde_json::from_str::<MarkedCyclicForest>(&text).unwrap(), m);
        assert!(serde_json::from_str::<MarkedCyclicForest>(r#"{"trees":[[0],[0]],"mark":[0,1]}"#).is_err());
        assert!(serde_json::from_str::<PlaneForest>(r#"{"trees":[[2,0]]}"#).is_err());
    }
}
